use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{max_abs, GridSpec, SpacetimeMetric};

/// Smooth periodic bump `prod_a exp(kappa_a (cos theta_a - 1))` with
/// `theta_a = 2 pi (x_a - c_a) / L_a`. Near the centre it is a Gaussian of
/// width `w`, i.e. `kappa_a = L_a^2 / (4 pi^2 w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicBump {
    pub center: [f64; 3],
    pub width: f64,
    pub lengths: [f64; 3],
}

impl PeriodicBump {
    fn kappa(&self, a: usize) -> f64 {
        let r = self.lengths[a] / (2.0 * PI * self.width);
        r * r
    }

    fn axis_terms(&self, x: [f64; 3]) -> [(f64, f64, f64); 3] {
        let mut out = [(0.0, 0.0, 0.0); 3];
        for (a, slot) in out.iter_mut().enumerate() {
            let k = 2.0 * PI / self.lengths[a];
            let theta = k * (x[a] - self.center[a]);
            let kap = self.kappa(a);
            let f = (kap * (theta.cos() - 1.0)).exp();
            let d1 = -kap * k * theta.sin();
            let d2 = d1 * d1 - kap * k * k * theta.cos();
            // (value, f'/f, f''/f)
            *slot = (f, d1, d2);
        }
        out
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        self.axis_terms(x).iter().map(|t| t.0).product()
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let t = self.axis_terms(x);
        let v = t[0].0 * t[1].0 * t[2].0;
        [v * t[0].1, v * t[1].1, v * t[2].1]
    }

    pub fn laplacian(&self, x: [f64; 3]) -> f64 {
        let t = self.axis_terms(x);
        let v = t[0].0 * t[1].0 * t[2].0;
        v * (t[0].2 + t[1].2 + t[2].2)
    }
}

/// Time dependence `s(t)` of a source term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant,
    /// `1 - cos(omega t)`; starts with `s = s' = 0`.
    RaisedCosine { omega: f64 },
    Sine { omega: f64 },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::RaisedCosine { omega } => 1.0 - (omega * t).cos(),
            Profile::Sine { omega } => (omega * t).sin(),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 0.0,
            Profile::RaisedCosine { omega } => omega * (omega * t).sin(),
            Profile::Sine { omega } => omega * (omega * t).cos(),
        }
    }
}

/// One separable term: `rho = s(t) rho_shape`, `j^i = s'(t) j_shape^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub rho: Vec<f64>,
    pub j: [Vec<f64>; 3],
    pub profile: Profile,
}

/// Prescribed charge and current densities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurrentSource {
    pub terms: Vec<SourceTerm>,
    /// Set by constructors whose terms satisfy the discrete continuity
    /// equation `d_t(sqrt(3g) rho) + D_i(sqrt(3g) j^i) = 0` exactly.
    pub continuity_certified: bool,
}

impl CurrentSource {
    pub fn none() -> Self {
        Self {
            terms: Vec::new(),
            continuity_certified: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: SourceTerm, certified: bool) {
        self.continuity_certified = (self.terms.is_empty() || self.continuity_certified) && certified;
        self.terms.push(term);
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        let n = grid.len();
        for t in &self.terms {
            if t.rho.len() != n || t.j.iter().any(|c| c.len() != n) {
                return Err(Error::GridMismatch("source term sampled on a different grid".into()));
            }
        }
        Ok(())
    }

    pub fn rho_at(&self, t: f64, idx: usize) -> f64 {
        self.terms.iter().map(|s| s.profile.value(t) * s.rho[idx]).sum()
    }

    pub fn j_at(&self, t: f64, axis: usize, idx: usize) -> f64 {
        self.terms.iter().map(|s| s.profile.rate(t) * s.j[axis][idx]).sum()
    }

    /// Overwrite `out` with `rho(t)`.
    pub fn rho_into(&self, t: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for s in &self.terms {
            let c = s.profile.value(t);
            if c != 0.0 {
                out.iter_mut().zip(&s.rho).for_each(|(o, r)| *o += c * r);
            }
        }
    }

    /// Overwrite `out` with `j^i(t)`.
    pub fn j_into(&self, t: f64, out: &mut [Vec<f64>; 3]) {
        for comp in out.iter_mut() {
            comp.iter_mut().for_each(|v| *v = 0.0);
        }
        for s in &self.terms {
            let c = s.profile.rate(t);
            if c == 0.0 {
                continue;
            }
            for (o, src) in out.iter_mut().zip(&s.j) {
                o.iter_mut().zip(src).for_each(|(o, r)| *o += c * r);
            }
        }
    }

    pub fn has_current(&self) -> bool {
        self.terms.iter().any(|s| s.profile != Profile::Constant)
    }

    /// `max |d_t(sqrt(3g) rho) + D_i(sqrt(3g) j^i)|` at time `t`, with the
    /// time derivative taken analytically from the profiles.
    pub fn continuity_residual(&self, t: f64, grid: &GridSpec, metric: &SpacetimeMetric) -> f64 {
        let n = grid.len();
        let mut res = vec![0.0; n];
        for s in &self.terms {
            let rate = s.profile.rate(t);
            if rate == 0.0 {
                continue;
            }
            for (idx, r) in res.iter_mut().enumerate() {
                *r += rate * metric.cell(idx).sqrt_spatial_det * s.rho[idx];
            }
            for (axis, comp) in s.j.iter().enumerate() {
                let flux: Vec<f64> = (0..n)
                    .map(|idx| rate * metric.cell(idx).sqrt_spatial_det * comp[idx])
                    .collect();
                grid.add_central_diff(&flux, axis, 1.0, &mut res);
            }
        }
        max_abs(&res)
    }
}

/// Localised oscillating dipole: `W = amplitude * axis * bump`,
/// `rho = -(1/sqrt(3g)) D_i(sqrt(3g) W^i) s(t)`, `j = W s'(t)` with the
/// raised-cosine profile, so charge is conserved exactly on the grid.
pub fn oscillating_dipole(
    grid: &GridSpec,
    metric: &SpacetimeMetric,
    bump: PeriodicBump,
    axis: [f64; 3],
    amplitude: f64,
    omega: f64,
) -> SourceTerm {
    let shape = grid.sample(|x| amplitude * bump.value(x));
    let j = [0, 1, 2].map(|a| shape.iter().map(|v| axis[a] * v).collect::<Vec<_>>());
    let weighted = [0, 1, 2].map(|a| {
        j[a].iter()
            .enumerate()
            .map(|(idx, v)| metric.cell(idx).sqrt_spatial_det * v)
            .collect::<Vec<_>>()
    });
    let div = grid.divergence([&weighted[0], &weighted[1], &weighted[2]]);
    let rho = div
        .iter()
        .enumerate()
        .map(|(idx, d)| -d / metric.cell(idx).sqrt_spatial_det)
        .collect();
    SourceTerm {
        rho,
        j,
        profile: Profile::RaisedCosine { omega },
    }
}

/// Time-independent charge density with no current.
pub fn static_charge(rho: Vec<f64>) -> SourceTerm {
    let n = rho.len();
    SourceTerm {
        rho,
        j: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        profile: Profile::Constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricFamily;

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let b = PeriodicBump {
            center: [0.4, 0.5, 0.6],
            width: 0.15,
            lengths: [1.0, 1.2, 0.9],
        };
        let x = [0.47, 0.41, 0.66];
        let h = 1e-5;
        let g = b.gradient(x);
        let mut lap = 0.0;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let d = (b.value(xp) - b.value(xm)) / (2.0 * h);
            assert!((d - g[a]).abs() < 1e-6 * (1.0 + g[a].abs()));
            lap += (b.value(xp) - 2.0 * b.value(x) + b.value(xm)) / (h * h);
        }
        assert!((lap - b.laplacian(x)).abs() < 1e-3 * b.laplacian(x).abs().max(1.0));
        assert!((b.value(b.center) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dipole_conserves_charge_on_curved_grid() {
        let grid = GridSpec::cube(12, 1.0).unwrap();
        let metric = SpacetimeMetric::from_family(&MetricFamily::Warped { amplitude: 0.2 }, &grid).unwrap();
        let bump = PeriodicBump {
            center: [0.5; 3],
            width: 0.12,
            lengths: grid.lengths(),
        };
        let mut src = CurrentSource::none();
        src.push(oscillating_dipole(&grid, &metric, bump, [0.0, 0.0, 1.0], 2.0, 3.0), true);
        assert!(src.continuity_certified);
        let scale = src.terms[0].j[2].iter().fold(0.0f64, |m, v| m.max(v.abs())) * 3.0 / grid.dx[0];
        for t in [0.0, 0.3, 1.7] {
            assert!(src.continuity_residual(t, &grid, &metric) <= 1e-12 * scale);
        }
        assert_eq!(src.rho_at(0.0, 100), 0.0);
        assert_eq!(src.j_at(0.0, 2, 100), 0.0);
    }
}
