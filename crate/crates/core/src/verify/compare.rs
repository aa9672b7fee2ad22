use serde::Serialize;

use super::fdtd::PhysicalTrajectory;
use crate::error::{Error, Result};
use crate::integrate::{Method, Model};
use crate::maxwell::{FieldState, PhysicalFields};

/// `D` and `H` of the canonical state, i.e. `E` and `B` in flat vacuum.
pub fn physical_fields(model: &Model, state: &FieldState) -> PhysicalFields {
    let (e, b) = model.equations.d_and_h(state, &model.metric);
    PhysicalFields { e, b }
}

/// Canonical run mapped to `D, H`, recorded like [`fdtd_oracle`].
pub fn canonical_trajectory(
    model: &Model,
    initial: &FieldState,
    method: Method,
    dt: f64,
    steps: usize,
    cadence: usize,
) -> Result<PhysicalTrajectory> {
    let cadence = cadence.max(1);
    let t0 = initial.time;
    let mut s = initial.clone();
    let mut out = PhysicalTrajectory {
        grid: initial.grid,
        times: vec![0.0],
        frames: vec![physical_fields(model, &s)],
    };
    for n in 1..=steps {
        s = model.step(method, &s, dt)?;
        if n % cadence == 0 || n == steps {
            out.times.push(s.time - t0);
            out.frames.push(physical_fields(model, &s));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiscrepancy {
    pub time: f64,
    pub sup_e: f64,
    pub sup_b: f64,
    /// Root-mean-square over cells.
    pub l2_e: f64,
    pub l2_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub steps: Vec<StepDiscrepancy>,
    /// Largest sup-norm discrepancy of either field over the horizon.
    pub max_sup: f64,
    pub max_l2: f64,
}

fn norms(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.iter().zip(y) {
            let d = u - v;
            sup = sup.max(d.abs());
            sq += d * d;
        }
    }
    (sup, (sq / a[0].len().max(1) as f64).sqrt())
}

/// Frame-by-frame discrepancy between two trajectories on the same grid and
/// time levels.
pub fn compare_to_oracle(canonical: &PhysicalTrajectory, oracle: &PhysicalTrajectory) -> Result<ComparisonReport> {
    if canonical.grid != oracle.grid {
        return Err(Error::GridMismatch(format!(
            "canonical grid {:?} vs oracle grid {:?}",
            canonical.grid.n, oracle.grid.n
        )));
    }
    if canonical.times.len() != oracle.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} canonical frames vs {} oracle frames",
            canonical.times.len(),
            oracle.times.len()
        )));
    }
    let mut steps = Vec::with_capacity(canonical.times.len());
    for (k, (&ta, &tb)) in canonical.times.iter().zip(&oracle.times).enumerate() {
        if (ta - tb).abs() > 1e-9 * ta.abs().max(tb.abs()).max(1e-300) {
            return Err(Error::GridMismatch(format!("frame {k} at t = {ta} vs t = {tb}")));
        }
        let (a, b) = (&canonical.frames[k], &oracle.frames[k]);
        let n = canonical.grid.len();
        if a.e.iter().chain(&a.b).chain(&b.e).chain(&b.b).any(|v| v.len() != n) {
            return Err(Error::GridMismatch(format!("frame {k} has arrays of the wrong length")));
        }
        let (sup_e, l2_e) = norms(&a.e, &b.e);
        let (sup_b, l2_b) = norms(&a.b, &b.b);
        steps.push(StepDiscrepancy {
            time: ta,
            sup_e,
            sup_b,
            l2_e,
            l2_b,
        });
    }
    let max_sup = steps.iter().map(|s| s.sup_e.max(s.sup_b)).fold(0.0, f64::max);
    let max_l2 = steps.iter().map(|s| s.l2_e.max(s.l2_b)).fold(0.0, f64::max);
    Ok(ComparisonReport { steps, max_sup, max_l2 })
}
