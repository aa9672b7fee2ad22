use std::sync::Arc;

use super::diff::{finite, gradient, partial, step_first};
use crate::error::{Error, Result};

/// Partial derivatives of a phase-space function.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGradient {
    pub dq: Vec<f64>,
    pub dp: Vec<f64>,
}

/// A real function `f(t, q, p)` on phase space.
///
/// The default gradient is a central difference; implementors with a known
/// structure override it.
pub trait PhaseFunction: Send + Sync {
    fn value(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64>;

    fn gradient(&self, t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        finite_difference_gradient(self, t, q, p)
    }

    /// Explicit time derivative `df/dt` at fixed `(q, p)`.
    fn time_derivative(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        partial(|s| self.value(s[0], q, p), &[t], 0, step_first(t))
    }
}

pub fn finite_difference_gradient<F: PhaseFunction + ?Sized>(
    f: &F,
    t: f64,
    q: &[f64],
    p: &[f64],
) -> Result<PhaseGradient> {
    Ok(PhaseGradient {
        dq: gradient(|x| f.value(t, x, p), q)?,
        dp: gradient(|x| f.value(t, q, x), p)?,
    })
}

/// Adapter turning a closure into a [`PhaseFunction`].
pub struct PhaseFn<F>(pub F);

impl<F> PhaseFunction for PhaseFn<F>
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync,
{
    fn value(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        finite((self.0)(t, q, p), || format!("f(t={t}, q={q:?}, p={p:?})"))
    }
}

pub fn phase_fn<F>(f: F) -> Arc<dyn PhaseFunction>
where
    F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
{
    Arc::new(PhaseFn(f))
}

/// The coordinate `q^i` as a phase function (exact gradient).
pub struct Coordinate(pub usize);

/// The momentum `p_i` as a phase function (exact gradient).
pub struct Momentum(pub usize);

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

impl PhaseFunction for Coordinate {
    fn value(&self, _t: f64, q: &[f64], _p: &[f64]) -> Result<f64> {
        q.get(self.0)
            .copied()
            .ok_or_else(|| Error::Dimension(format!("no coordinate {}", self.0)))
    }

    fn gradient(&self, _t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        Ok(PhaseGradient {
            dq: unit(q.len(), self.0),
            dp: vec![0.0; p.len()],
        })
    }

    fn time_derivative(&self, _t: f64, _q: &[f64], _p: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

impl PhaseFunction for Momentum {
    fn value(&self, _t: f64, _q: &[f64], p: &[f64]) -> Result<f64> {
        p.get(self.0)
            .copied()
            .ok_or_else(|| Error::Dimension(format!("no momentum {}", self.0)))
    }

    fn gradient(&self, _t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        Ok(PhaseGradient {
            dq: vec![0.0; q.len()],
            dp: unit(p.len(), self.0),
        })
    }

    fn time_derivative(&self, _t: f64, _q: &[f64], _p: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

/// `[f, g] = sum_i (df/dq^i dg/dp_i - df/dp_i dg/dq^i)` from precomputed gradients.
pub fn bracket_of_gradients(f: &PhaseGradient, g: &PhaseGradient) -> f64 {
    let mut acc = 0.0;
    for i in 0..f.dq.len() {
        acc += f.dq[i] * g.dp[i] - f.dp[i] * g.dq[i];
    }
    acc
}

/// Poisson bracket `[f, g]` at `(t, q, p)`.
pub fn poisson_bracket(
    f: &dyn PhaseFunction,
    g: &dyn PhaseFunction,
    t: f64,
    q: &[f64],
    p: &[f64],
) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::Dimension(format!(
            "{} coordinates but {} momenta",
            q.len(),
            p.len()
        )));
    }
    let gf = f.gradient(t, q, p)?;
    let gg = g.gradient(t, q, p)?;
    Ok(bracket_of_gradients(&gf, &gg))
}
