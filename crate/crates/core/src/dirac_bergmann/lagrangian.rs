use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::diff::{finite, partial, second_partial, step_first, step_second};
use crate::error::{Error, Result};

pub type LagrangianFn = dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync;

/// A finite-dimensional Lagrangian `L(t, q, qdot)` with `dim` degrees of freedom.
#[derive(Clone)]
pub struct LagrangianSystem {
    dim: usize,
    lagrangian: Arc<LagrangianFn>,
}

impl fmt::Debug for LagrangianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianSystem").field("dim", &self.dim).finish()
    }
}

impl LagrangianSystem {
    pub fn new<F>(dim: usize, lagrangian: F) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_arc(dim, Arc::new(lagrangian))
    }

    pub fn from_arc(dim: usize, lagrangian: Arc<LagrangianFn>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("a Lagrangian system needs dim >= 1".into()));
        }
        Ok(Self { dim, lagrangian })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, q: &[f64], qdot: &[f64]) -> Result<()> {
        if q.len() != self.dim || qdot.len() != self.dim {
            return Err(Error::Dimension(format!(
                "expected {} coordinates and velocities, got {} and {}",
                self.dim,
                q.len(),
                qdot.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<f64> {
        self.check(q, qdot)?;
        finite((self.lagrangian)(t, q, qdot), || {
            format!("L(t={t}, q={q:?}, qdot={qdot:?})")
        })
    }

    /// Canonical momenta `p_i = dL/dqdot^i`.
    pub fn momenta(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        self.check(q, qdot)?;
        (0..self.dim)
            .map(|i| partial(|v| self.eval(t, q, v), qdot, i, step_first(qdot[i])))
            .collect()
    }

    /// `dL/dq^i` at fixed velocities.
    pub fn coordinate_gradient(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        self.check(q, qdot)?;
        (0..self.dim)
            .map(|i| partial(|x| self.eval(t, x, qdot), q, i, step_first(q[i])))
            .collect()
    }

    /// Explicit `dL/dt`.
    pub fn time_partial(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<f64> {
        partial(|s| self.eval(s[0], q, qdot), &[t], 0, step_first(t))
    }

    /// `W_ij = d^2 L / dqdot^i dqdot^j`, symmetrised.
    pub fn velocity_hessian(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<DMatrix<f64>> {
        self.check(q, qdot)?;
        let n = self.dim;
        let f = |v: &[f64], _: &[f64]| self.eval(t, q, v);
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = second_partial(f, qdot, qdot, i, j, true)?;
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
        Ok(w)
    }

    /// `M_ij = d^2 L / dqdot^i dq^j`.
    pub fn mixed_hessian(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<DMatrix<f64>> {
        self.check(q, qdot)?;
        let n = self.dim;
        let f = |v: &[f64], x: &[f64]| self.eval(t, x, v);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = second_partial(f, qdot, q, i, j, false)?;
            }
        }
        Ok(m)
    }

    /// `d^2 L / dqdot^i dt`.
    pub fn momenta_time_partial(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        let h = step_second(t);
        let (tp, tm) = (t + h, t - h);
        let pp = self.momenta(tp, q, qdot)?;
        let pm = self.momenta(tm, q, qdot)?;
        Ok(pp.iter().zip(&pm).map(|(a, b)| (a - b) / (tp - tm)).collect())
    }
}

/// `velocity_hessian` as a free function.
pub fn velocity_hessian(
    sys: &LagrangianSystem,
    t: f64,
    q: &[f64],
    qdot: &[f64],
) -> Result<DMatrix<f64>> {
    sys.velocity_hessian(t, q, qdot)
}
