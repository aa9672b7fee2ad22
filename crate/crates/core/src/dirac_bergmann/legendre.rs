use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::constraints::{ConstrainedHamiltonian, Constraint, ConstraintKind, ConstraintSet, Multipliers};
use super::lagrangian::LagrangianSystem;
use super::phase::{PhaseFunction, PhaseGradient};
use super::singularity::{singularity_report_with_floor, SingularityReport};
use crate::error::{Error, Result};

/// Tunables for [`legendre_transform`].
#[derive(Debug, Clone, Copy)]
pub struct LegendreOptions {
    /// Relative threshold for the Hessian rank.
    pub rank_tol: f64,
    /// Half-width of the rank probe neighbourhood, relative to `max(1, |x|)`.
    pub probe_radius: f64,
    /// Surface thickness stored on the resulting constraint set.
    pub constraint_tol: f64,
    pub max_newton_iterations: usize,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        Self {
            rank_tol: crate::defaults::RANK_TOL,
            probe_radius: 1e-3,
            constraint_tol: crate::defaults::CONSTRAINT_TOL,
            max_newton_iterations: 60,
        }
    }
}

/// Solves the invertible part of `p = dL/dqdot` for the velocities.
///
/// Velocities are parametrised as `u = seed + R y` with `R` the range basis of
/// the Hessian; the kernel part of `u` stays at the seed, which is the
/// arbitrariness the primary constraints' multipliers absorb.
#[derive(Debug)]
pub struct VelocitySolver {
    sys: LagrangianSystem,
    seed: DVector<f64>,
    range: DMatrix<f64>,
    kernel: DMatrix<f64>,
    max_iterations: usize,
}

impl VelocitySolver {
    pub fn system(&self) -> &LagrangianSystem {
        &self.sys
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    fn residual(&self, t: f64, q: &[f64], p: &[f64], u: &DVector<f64>) -> Result<DVector<f64>> {
        let pi = self.sys.momenta(t, q, u.as_slice())?;
        let diff = DVector::from_iterator(p.len(), pi.iter().zip(p).map(|(a, b)| a - b));
        Ok(self.range.transpose() * diff)
    }

    /// Velocities reproducing the regular momenta at `(t, q, p)`.
    pub fn solve(&self, t: f64, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let r = self.rank();
        let mut u = self.seed.clone();
        if r == 0 {
            return Ok(u.as_slice().to_vec());
        }
        let scale = 1.0 + p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut g = self.residual(t, q, p, &u)?;
        let mut gnorm = g.norm();
        for _ in 0..self.max_iterations {
            if gnorm <= 1e-14 * scale {
                return Ok(u.as_slice().to_vec());
            }
            let w = self.sys.velocity_hessian(t, q, u.as_slice())?;
            let jac = self.range.transpose() * w * &self.range;
            let step = match jac.lu().solve(&(-&g)) {
                Some(s) => s,
                None => {
                    return Err(Error::NewtonDivergence {
                        iterations: 0,
                        residual: gnorm,
                    })
                }
            };
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let trial = &u + &self.range * (&step * alpha);
                let gt = self.residual(t, q, p, &trial)?;
                if gt.norm() < gnorm {
                    u = trial;
                    g = gt;
                    gnorm = g.norm();
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                // Stalled at the finite-difference noise floor.
                break;
            }
        }
        if gnorm <= 1e-7 * scale {
            Ok(u.as_slice().to_vec())
        } else {
            Err(Error::NewtonDivergence {
                iterations: self.max_iterations,
                residual: gnorm,
            })
        }
    }
}

/// Primary constraint `phi = k . (p - dL/dqdot(q, u(q, p)))` for a kernel
/// direction `k` of the velocity Hessian.
pub struct MomentumConstraint {
    solver: Arc<VelocitySolver>,
    direction: Vec<f64>,
}

impl MomentumConstraint {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }
}

impl PhaseFunction for MomentumConstraint {
    fn value(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        let u = self.solver.solve(t, q, p)?;
        let pi = self.solver.sys.momenta(t, q, &u)?;
        Ok(self
            .direction
            .iter()
            .zip(p.iter().zip(&pi))
            .map(|(k, (pv, piv))| k * (pv - piv))
            .sum())
    }

    fn gradient(&self, t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        // k lies in the Hessian kernel, so the velocity dependence drops out.
        let u = self.solver.solve(t, q, p)?;
        let m = self.solver.sys.mixed_hessian(t, q, &u)?;
        let n = q.len();
        let dq = (0..n)
            .map(|j| -(0..n).map(|i| self.direction[i] * m[(i, j)]).sum::<f64>())
            .collect();
        Ok(PhaseGradient {
            dq,
            dp: self.direction.clone(),
        })
    }

    fn time_derivative(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        let u = self.solver.solve(t, q, p)?;
        let dpi = self.solver.sys.momenta_time_partial(t, q, &u)?;
        Ok(-self.direction.iter().zip(&dpi).map(|(k, d)| k * d).sum::<f64>())
    }
}

/// Canonical Hamiltonian `H = p . u - L(q, u)` on the velocities returned by
/// the solver. Its gradient uses the envelope identities `dH/dp = u`,
/// `dH/dq = -dL/dq`, exact on the primary constraint surface.
pub struct LegendreHamiltonian {
    solver: Arc<VelocitySolver>,
}

impl PhaseFunction for LegendreHamiltonian {
    fn value(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        let u = self.solver.solve(t, q, p)?;
        let pu: f64 = p.iter().zip(&u).map(|(a, b)| a * b).sum();
        Ok(pu - self.solver.sys.eval(t, q, &u)?)
    }

    fn gradient(&self, t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        let u = self.solver.solve(t, q, p)?;
        let dl = self.solver.sys.coordinate_gradient(t, q, &u)?;
        Ok(PhaseGradient {
            dq: dl.into_iter().map(|x| -x).collect(),
            dp: u,
        })
    }

    fn time_derivative(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        let u = self.solver.solve(t, q, p)?;
        Ok(-self.solver.sys.time_partial(t, q, &u)?)
    }
}

/// Roundoff level of a second difference of `L` at the Hessian step.
fn noise_floor(sys: &LagrangianSystem, t: f64, q: &[f64], qdot: &[f64]) -> Result<f64> {
    let scale = qdot.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let h = super::diff::step_second(scale);
    Ok(16.0 * f64::EPSILON * (1.0 + sys.eval(t, q, qdot)?.abs()) / (h * h))
}

fn check_constant_rank(
    sys: &LagrangianSystem,
    t: f64,
    q: &[f64],
    qdot: &[f64],
    rank: usize,
    opts: &LegendreOptions,
) -> Result<()> {
    let n = sys.dim();
    for block in 0..2 {
        for i in 0..n {
            for offset in [-2.0, -1.0, 1.0, 2.0] {
                let mut qq = q.to_vec();
                let mut vv = qdot.to_vec();
                let target = if block == 0 { &mut qq } else { &mut vv };
                target[i] += offset * opts.probe_radius * 0.5 * target[i].abs().max(1.0);
                let w = sys.velocity_hessian(t, &qq, &vv)?;
                let floor = noise_floor(sys, t, &qq, &vv)?;
                let found = singularity_report_with_floor(&w, opts.rank_tol, floor).rank;
                if found != rank {
                    return Err(Error::RankDrift {
                        expected: rank,
                        found,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Result of the Legendre map: the constrained Hamiltonian plus the
/// singularity analysis it was built from.
pub struct LegendreMap {
    pub hamiltonian: ConstrainedHamiltonian,
    pub report: SingularityReport,
    pub solver: Arc<VelocitySolver>,
}

impl LegendreMap {
    /// Momenta of a velocity state, `p = dL/dqdot`.
    pub fn momenta(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        self.solver.sys.momenta(t, q, qdot)
    }
}

/// Legendre transform at `(t, q)`, seeded with `qdot_seed`.
///
/// Each kernel direction of the velocity Hessian becomes one primary
/// constraint; the Hamiltonian is `p . qdot - L` on the solved velocities.
pub fn legendre_transform(
    sys: &LagrangianSystem,
    t: f64,
    q: &[f64],
    qdot_seed: &[f64],
    opts: &LegendreOptions,
) -> Result<LegendreMap> {
    let w = sys.velocity_hessian(t, q, qdot_seed)?;
    let report = singularity_report_with_floor(&w, opts.rank_tol, noise_floor(sys, t, q, qdot_seed)?);
    check_constant_rank(sys, t, q, qdot_seed, report.rank, opts)?;

    let solver = Arc::new(VelocitySolver {
        sys: sys.clone(),
        seed: DVector::from_column_slice(qdot_seed),
        range: report.range_basis.clone(),
        kernel: report.null_basis.clone(),
        max_iterations: opts.max_newton_iterations,
    });

    let mut set = ConstraintSet::new(sys.dim(), opts.constraint_tol);
    for (a, col) in report.null_basis.column_iter().enumerate() {
        let phi = MomentumConstraint {
            solver: solver.clone(),
            direction: col.iter().copied().collect(),
        };
        set.push(Constraint {
            function: Arc::new(phi),
            kind: ConstraintKind::Primary,
            label: format!("primary[{a}]"),
        })?;
    }

    let hamiltonian = ConstrainedHamiltonian {
        hamiltonian: Arc::new(LegendreHamiltonian {
            solver: solver.clone(),
        }),
        constraints: set,
        multipliers: Multipliers::Unresolved,
    };
    Ok(LegendreMap {
        hamiltonian,
        report,
        solver,
    })
}
