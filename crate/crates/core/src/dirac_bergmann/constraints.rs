use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::diff::{gradient_nested, partial, step_second};
use super::phase::{bracket_of_gradients, PhaseFunction, PhaseGradient};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Primary,
    Secondary,
}

#[derive(Clone)]
pub struct Constraint {
    pub function: Arc<dyn PhaseFunction>,
    pub kind: ConstraintKind,
    pub label: String,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("kind", &self.kind)
            .field("label", &self.label)
            .finish()
    }
}

/// Constraint functions `phi^a(t, q, p)`, `a = 1..m` with `m <= n`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    dim: usize,
    constraints: Vec<Constraint>,
    /// Surface thickness: a state is on the surface when every `|phi^a| <= tolerance`.
    pub tolerance: f64,
}

impl ConstraintSet {
    pub fn new(dim: usize, tolerance: f64) -> Self {
        Self {
            dim,
            constraints: Vec::new(),
            tolerance,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, c: Constraint) -> Result<()> {
        if self.constraints.len() >= self.dim {
            return Err(Error::Dimension(format!(
                "more than {} constraints on a {}-dimensional system",
                self.dim, self.dim
            )));
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Constraint> {
        self.constraints.iter()
    }

    pub fn get(&self, a: usize) -> Option<&Constraint> {
        self.constraints.get(a)
    }

    /// Indices of the primary constraints, in order.
    pub fn primary_indices(&self) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ConstraintKind::Primary)
            .map(|(a, _)| a)
            .collect()
    }

    pub fn values(&self, t: f64, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.constraints
            .iter()
            .map(|c| c.function.value(t, q, p))
            .collect()
    }

    pub fn max_violation(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        Ok(self
            .values(t, q, p)?
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs())))
    }

    pub fn on_surface(&self, t: f64, q: &[f64], p: &[f64]) -> Result<bool> {
        Ok(self.max_violation(t, q, p)? <= self.tolerance)
    }
}

/// How the multipliers of the primary constraints are obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Multipliers {
    Unresolved,
    /// Fixed values, one per primary constraint.
    Given(Vec<f64>),
    /// Solved from the consistency conditions at every evaluated state.
    ResolvePerState { tol: f64 },
}

/// Hamiltonian plus constraints; the total Hamiltonian is
/// `H + lambda_a phi^a` summed over the primary constraints.
#[derive(Clone)]
pub struct ConstrainedHamiltonian {
    pub hamiltonian: Arc<dyn PhaseFunction>,
    pub constraints: ConstraintSet,
    pub multipliers: Multipliers,
}

impl fmt::Debug for ConstrainedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstrainedHamiltonian")
            .field("constraints", &self.constraints)
            .field("multipliers", &self.multipliers)
            .finish()
    }
}

impl ConstrainedHamiltonian {
    pub fn new(hamiltonian: Arc<dyn PhaseFunction>, constraints: ConstraintSet) -> Self {
        Self {
            hamiltonian,
            constraints,
            multipliers: Multipliers::Unresolved,
        }
    }

    pub fn with_multipliers(mut self, multipliers: Multipliers) -> Self {
        self.multipliers = multipliers;
        self
    }
}

/// Constrained Hamilton equations for the configured multipliers.
pub fn constrained_rhs(
    ch: &ConstrainedHamiltonian,
    t: f64,
    q: &[f64],
    p: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let primaries = ch.constraints.primary_indices();
    let lambdas = match &ch.multipliers {
        _ if primaries.is_empty() => Vec::new(),
        Multipliers::Unresolved => return Err(Error::UnresolvedMultipliers(primaries)),
        Multipliers::Given(l) => l.clone(),
        Multipliers::ResolvePerState { tol } => {
            let r = consistency_resolve(ch, t, q, p, *tol)?;
            let free: Vec<usize> = r
                .arbitrary
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(b, _)| primaries[b])
                .collect();
            if !free.is_empty() {
                return Err(Error::UnresolvedMultipliers(free));
            }
            r.lambdas
        }
    };
    constrained_rhs_with(ch, t, q, p, &lambdas)
}

/// `qdot = dH/dp + lambda_a dphi^a/dp`, `pdot = -dH/dq - lambda_a dphi^a/dq`,
/// with one `lambda` per primary constraint.
pub fn constrained_rhs_with(
    ch: &ConstrainedHamiltonian,
    t: f64,
    q: &[f64],
    p: &[f64],
    lambdas: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let primaries = ch.constraints.primary_indices();
    if lambdas.len() != primaries.len() {
        return Err(Error::Dimension(format!(
            "{} multipliers for {} primary constraints",
            lambdas.len(),
            primaries.len()
        )));
    }
    let gh = ch.hamiltonian.gradient(t, q, p)?;
    let mut qdot = gh.dp;
    let mut pdot: Vec<f64> = gh.dq.into_iter().map(|x| -x).collect();
    for (&a, &lambda) in primaries.iter().zip(lambdas) {
        if lambda == 0.0 {
            continue;
        }
        let g = ch.constraints.constraints[a].function.gradient(t, q, p)?;
        for i in 0..q.len() {
            qdot[i] += lambda * g.dp[i];
            pdot[i] -= lambda * g.dq[i];
        }
    }
    Ok((qdot, pdot))
}

/// Outcome of the consistency conditions
/// `d_t phi^a + [phi^a, H] + lambda_b [phi^a, phi^b] ~ 0`.
#[derive(Debug, Clone)]
pub struct Resolution {
    /// Minimum-norm multipliers, one per primary constraint.
    pub lambdas: Vec<f64>,
    /// `true` where the multiplier has a component along the kernel of the
    /// bracket matrix and is therefore left free by the conditions.
    pub arbitrary: Vec<bool>,
    /// Orthonormal right kernel of the bracket matrix (columns).
    pub kernel: DMatrix<f64>,
    pub new_constraints: Vec<Constraint>,
    /// `C_ab = [phi^a, phi^b]`, rows over all constraints, columns over primaries.
    pub bracket_matrix: DMatrix<f64>,
    /// `b_a = d_t phi^a + [phi^a, H]`.
    pub drift: Vec<f64>,
}

impl Resolution {
    pub fn all_fixed(&self) -> bool {
        !self.arbitrary.iter().any(|&a| a)
    }
}

/// Eigenvectors of a symmetric PSD matrix with eigenvalue `<= threshold`.
fn small_eigenspace(m: DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(m);
    let cols: Vec<usize> = (0..n).filter(|&c| eig.eigenvalues[c] <= threshold).collect();
    let mut out = DMatrix::from_fn(n, cols.len(), |i, c| eig.eigenvectors[(i, cols[c])]);
    for mut col in out.column_iter_mut() {
        let lead = col
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    out
}

/// Solve the consistency conditions at `(t, q, p)`.
///
/// Singular values of the bracket matrix below `max(1e-10 * sigma_max, tol)`
/// count as zero. Left-kernel directions `w` with `|w . b| > tol` emit the
/// secondary constraint `w_a (d_t phi^a + [phi^a, H])`.
pub fn consistency_resolve(
    ch: &ConstrainedHamiltonian,
    t: f64,
    q: &[f64],
    p: &[f64],
    tol: f64,
) -> Result<Resolution> {
    let set = &ch.constraints;
    let m = set.len();
    let primaries = set.primary_indices();
    let mp = primaries.len();
    if m == 0 {
        return Ok(Resolution {
            lambdas: Vec::new(),
            arbitrary: Vec::new(),
            kernel: DMatrix::zeros(0, 0),
            new_constraints: Vec::new(),
            bracket_matrix: DMatrix::zeros(0, 0),
            drift: Vec::new(),
        });
    }
    let grads: Vec<PhaseGradient> = set
        .iter()
        .map(|c| c.function.gradient(t, q, p))
        .collect::<Result<_>>()?;
    let gh = ch.hamiltonian.gradient(t, q, p)?;
    let c = DMatrix::from_fn(m, mp, |a, b| bracket_of_gradients(&grads[a], &grads[primaries[b]]));
    let mut drift = Vec::with_capacity(m);
    for (a, con) in set.iter().enumerate() {
        drift.push(con.function.time_derivative(t, q, p)? + bracket_of_gradients(&grads[a], &gh));
    }
    let b = DVector::from_column_slice(&drift);

    let sigma_max = if mp == 0 {
        0.0
    } else {
        c.clone().svd(false, false).singular_values.max()
    };
    let threshold = (1e-10 * sigma_max).max(tol);

    let lambdas = if mp == 0 {
        Vec::new()
    } else {
        let svd = c.clone().svd(true, true);
        let sol = svd
            .solve(&(-&b), threshold)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        sol.as_slice().to_vec()
    };

    let kernel = small_eigenspace(c.transpose() * &c, threshold * threshold);
    let arbitrary = (0..mp)
        .map(|row| kernel.row(row).norm_squared() > 1e-8)
        .collect();

    let left_kernel = small_eigenspace(&c * c.transpose(), threshold * threshold);
    let mut new_constraints = Vec::new();
    for w in left_kernel.column_iter() {
        let s: f64 = w.iter().zip(&drift).map(|(x, y)| x * y).sum();
        if s.abs() > tol {
            let weights: Vec<f64> = w.iter().copied().collect();
            let label = format!("secondary[{}]", m + new_constraints.len());
            new_constraints.push(Constraint {
                function: Arc::new(SecondaryConstraint {
                    hamiltonian: ch.hamiltonian.clone(),
                    parents: set.iter().map(|c| c.function.clone()).collect(),
                    weights,
                }),
                kind: ConstraintKind::Secondary,
                label,
            });
        }
    }

    Ok(Resolution {
        lambdas,
        arbitrary,
        kernel,
        new_constraints,
        bracket_matrix: c,
        drift,
    })
}

/// `chi = sum_a w_a (d_t phi^a + [phi^a, H])`, the consistency condition of a
/// kernel direction promoted to a constraint. Its own derivatives are nested
/// finite differences.
pub struct SecondaryConstraint {
    hamiltonian: Arc<dyn PhaseFunction>,
    parents: Vec<Arc<dyn PhaseFunction>>,
    weights: Vec<f64>,
}

impl SecondaryConstraint {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl PhaseFunction for SecondaryConstraint {
    fn value(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        let gh = self.hamiltonian.gradient(t, q, p)?;
        let mut acc = 0.0;
        for (phi, &w) in self.parents.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            let g = phi.gradient(t, q, p)?;
            acc += w * (phi.time_derivative(t, q, p)? + bracket_of_gradients(&g, &gh));
        }
        Ok(acc)
    }

    fn gradient(&self, t: f64, q: &[f64], p: &[f64]) -> Result<PhaseGradient> {
        Ok(PhaseGradient {
            dq: gradient_nested(|x| self.value(t, x, p), q)?,
            dp: gradient_nested(|x| self.value(t, q, x), p)?,
        })
    }

    fn time_derivative(&self, t: f64, q: &[f64], p: &[f64]) -> Result<f64> {
        partial(|s| self.value(s[0], q, p), &[t], 0, step_second(t))
    }
}

/// Minimum-norm Gauss-Newton projection of `(q, p)` onto the constraint
/// surface. Returns the projected state once `max |phi^a| <= tol`.
pub fn project_to_surface(
    set: &ConstraintSet,
    t: f64,
    q: &[f64],
    p: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = q.len();
    let mut q = q.to_vec();
    let mut p = p.to_vec();
    if set.is_empty() {
        return Ok((q, p));
    }
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let phi = DVector::from_vec(set.values(t, &q, &p)?);
        residual = phi.amax();
        if residual <= tol {
            return Ok((q, p));
        }
        let mut jac = DMatrix::zeros(set.len(), 2 * n);
        for (a, c) in set.iter().enumerate() {
            let g = c.function.gradient(t, &q, &p)?;
            for i in 0..n {
                jac[(a, i)] = g.dq[i];
                jac[(a, n + i)] = g.dp[i];
            }
        }
        let step = jac
            .clone()
            .svd(true, true)
            .solve(&phi, 1e-12 * jac.norm())
            .map_err(|e| Error::Dimension(e.to_string()))?;
        for i in 0..n {
            q[i] -= step[i];
            p[i] -= step[n + i];
        }
    }
    Err(Error::NewtonDivergence {
        iterations: 50,
        residual,
    })
}

/// Constraints found by running the consistency algorithm to closure.
#[derive(Debug, Clone)]
pub struct ConstraintChain {
    pub hamiltonian: ConstrainedHamiltonian,
    pub resolution: Resolution,
    /// Point on the final surface where the closing resolution was evaluated.
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub rounds: usize,
}

/// Project, resolve, append secondaries, repeat until no constraint appears.
pub fn constraint_chain(
    ch: &ConstrainedHamiltonian,
    t: f64,
    q: &[f64],
    p: &[f64],
    tol: f64,
    max_rounds: usize,
) -> Result<ConstraintChain> {
    let mut ch = ch.clone();
    let mut q = q.to_vec();
    let mut p = p.to_vec();
    for round in 1..=max_rounds {
        let (qs, ps) = project_to_surface(&ch.constraints, t, &q, &p, 0.1 * ch.constraints.tolerance)?;
        q = qs;
        p = ps;
        let resolution = consistency_resolve(&ch, t, &q, &p, tol)?;
        if resolution.new_constraints.is_empty() {
            return Ok(ConstraintChain {
                hamiltonian: ch,
                resolution,
                q,
                p,
                rounds: round,
            });
        }
        for c in resolution.new_constraints {
            ch.constraints.push(c)?;
        }
    }
    Err(Error::Dimension(format!(
        "constraint chain did not close within {max_rounds} rounds"
    )))
}
