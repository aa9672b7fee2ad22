//! Initial data. Vector amplitudes and polarizations are given in the
//! Cartesian sense, `A_vec`; the stored covariant components are
//! `A_i = -A_vec_i`.

use std::f64::consts::PI;

use super::field::FieldEquations;
use super::source::{static_charge, PeriodicBump, SourceTerm};
use super::state::FieldState;
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, SpacetimeMetric};

/// Electric and magnetic fields of flat-space reference solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalFields {
    pub e: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
}

/// A single Fourier mode `k_a = 2 pi m_a / L_a` with polarization `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: [f64; 3],
    pub polarization: [f64; 3],
    pub amplitude: f64,
}

impl PlaneWave {
    pub fn new(grid: &GridSpec, mode: [i64; 3], amplitude: f64, polarization: [f64; 3]) -> Result<Self> {
        let l = grid.lengths();
        let k = [0, 1, 2].map(|a| 2.0 * PI * mode[a] as f64 / l[a]);
        let kn = norm(k);
        let en = norm(polarization);
        if kn == 0.0 {
            return Err(Error::Validation("plane_wave.mode must be non-zero".into()));
        }
        if en == 0.0 {
            return Err(Error::Validation("plane_wave.polarization must be non-zero".into()));
        }
        let e = polarization.map(|v| v / en);
        let dot = (e[0] * k[0] + e[1] * k[1] + e[2] * k[2]) / kn;
        if dot.abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "plane_wave.polarization is not transverse to k (cosine {dot:e})"
            )));
        }
        Ok(Self {
            k,
            polarization: e,
            amplitude,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        norm(self.k)
    }

    fn phase(&self, x: [f64; 3]) -> f64 {
        self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2]
    }

    /// `A_vec = (c/omega) E0 e sin(k.x)`, `D = E0 e cos(k.x)` at `t = 0`.
    pub fn state(&self, grid: &GridSpec, metric: &SpacetimeMetric, eq: &FieldEquations) -> FieldState {
        let c = eq.c;
        let omega = c * self.wavenumber();
        let mut s = FieldState::zeros(*grid);
        for idx in 0..grid.len() {
            let ph = self.phase(grid.position(idx));
            let (sn, cs) = ph.sin_cos();
            let sg = metric.cell(idx).sqrt_minus_g;
            for i in 0..3 {
                let e = self.amplitude * self.polarization[i];
                s.a[i][idx] = -(c / omega) * e * sn;
                s.p[i][idx] = sg * e * cs / (4.0 * PI * c * c);
            }
        }
        s
    }

    /// Exact flat-space `E` and `B` at time `t`.
    pub fn fields(&self, grid: &GridSpec, t: f64, c: f64) -> PhysicalFields {
        let omega = c * self.wavenumber();
        let kn = self.wavenumber();
        let kh = self.k.map(|v| v / kn);
        let bdir = cross(kh, self.polarization);
        let n = grid.len();
        let mut f = PhysicalFields {
            e: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            b: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        };
        for idx in 0..n {
            let cs = (self.phase(grid.position(idx)) - omega * t).cos() * self.amplitude;
            for i in 0..3 {
                f.e[i][idx] = self.polarization[i] * cs;
                f.b[i][idx] = bdir[i] * cs;
            }
        }
        f
    }
}

/// Localised vector potential at rest: `A_vec = amplitude * e * bump`, `D = 0`.
pub fn gaussian_pulse(grid: &GridSpec, bump: PeriodicBump, amplitude: f64, polarization: [f64; 3]) -> FieldState {
    let mut s = FieldState::zeros(*grid);
    for idx in 0..grid.len() {
        let b = amplitude * bump.value(grid.position(idx));
        for i in 0..3 {
            s.a[i][idx] = -polarization[i] * b;
        }
    }
    s
}

/// `E = 0`, `B = curl A_vec = amplitude * grad(bump) x e` for the pulse.
pub fn gaussian_pulse_fields(
    grid: &GridSpec,
    bump: PeriodicBump,
    amplitude: f64,
    polarization: [f64; 3],
) -> PhysicalFields {
    let n = grid.len();
    let mut f = PhysicalFields {
        e: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        b: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
    };
    for idx in 0..n {
        let g = bump.gradient(grid.position(idx)).map(|v| amplitude * v);
        let b = cross(g, polarization);
        for i in 0..3 {
            f.b[i][idx] = b[i];
        }
    }
    f
}

/// Electrostatic manufactured solution: `sqrt(3g) D^i = d_i psi` with
/// `psi = amplitude * bump`, and the matching exact charge
/// `rho = lap(psi) / (4 pi sqrt(3g))`.
pub fn manufactured_charge(
    grid: &GridSpec,
    metric: &SpacetimeMetric,
    eq: &FieldEquations,
    bump: PeriodicBump,
    amplitude: f64,
) -> (FieldState, SourceTerm) {
    let c = eq.c;
    let mut s = FieldState::zeros(*grid);
    let mut rho = vec![0.0; grid.len()];
    for (idx, r) in rho.iter_mut().enumerate() {
        let x = grid.position(idx);
        let m = metric.cell(idx);
        let g = bump.gradient(x);
        for i in 0..3 {
            let d = amplitude * g[i] / m.sqrt_spatial_det;
            s.p[i][idx] = m.sqrt_minus_g * d / (4.0 * PI * c * c);
        }
        *r = amplitude * bump.laplacian(x) / (4.0 * PI * m.sqrt_spatial_det);
    }
    (s, static_charge(rho))
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Static charge that makes `state` satisfy the discrete Gauss law exactly:
/// `rho = D_i(sqrt(3g) D^i) / (4 pi sqrt(3g))`.
pub fn gauss_consistent_charge(state: &FieldState, metric: &SpacetimeMetric, eq: &FieldEquations) -> SourceTerm {
    let grid = &state.grid;
    let d = eq.displacement(state, metric);
    let w = [0, 1, 2].map(|i| {
        d[i].iter()
            .enumerate()
            .map(|(idx, v)| metric.cell(idx).sqrt_spatial_det * v)
            .collect::<Vec<_>>()
    });
    let div = grid.divergence([&w[0], &w[1], &w[2]]);
    let rho = div
        .iter()
        .enumerate()
        .map(|(idx, v)| v / (4.0 * PI * metric.cell(idx).sqrt_spatial_det))
        .collect();
    static_charge(rho)
}
