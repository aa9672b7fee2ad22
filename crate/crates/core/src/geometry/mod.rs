//! Static metric background and the periodic grid it is sampled on.
//!
//! Conventions: signature (+,-,-,-), `x^0 = ct`, Greek indices run over
//! 0..4 and Latin indices over the three spatial axes. Only static metrics
//! with `g_0i = 0` are representable.

mod grid;
mod metric;

pub use grid::{GridSpec, MIN_CELLS};
pub(crate) use grid::{max_abs, max_abs3};
pub use metric::{AntisymTensor, CellMetric, Matrix4, MetricFamily, MetricTensor, SpacetimeMetric};
