use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::integrate::{Method, Model};
use crate::maxwell::PlaneWave;

/// Least-squares fit `y ~ a cos(w t) + b sin(w t) + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFit {
    pub omega: f64,
    pub amplitude: f64,
    /// RMS residual divided by the fitted amplitude.
    pub relative_residual: f64,
}

fn linear_part(t: &[f64], y: &[f64], omega: f64) -> (f64, f64) {
    let a = DMatrix::from_fn(t.len(), 3, |i, j| match j {
        0 => (omega * t[i]).cos(),
        1 => (omega * t[i]).sin(),
        _ => 1.0,
    });
    let rhs = DVector::from_column_slice(y);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(3));
    let r = &a * &sol - rhs;
    (r.norm_squared(), sol[0].hypot(sol[1]))
}

/// Fit the frequency of a single sinusoid sampled at `t`, searching
/// `omega_guess * [0.5, 1.5]`. The signal must span at least `min_periods`
/// periods of the guessed frequency.
pub fn fit_frequency(t: &[f64], y: &[f64], omega_guess: f64, min_periods: f64) -> Result<PhaseFit> {
    if t.len() != y.len() || t.len() < 16 {
        return Err(Error::FitFailure(format!("{} samples are too few to fit", t.len())));
    }
    let span = t[t.len() - 1] - t[0];
    let periods = span * omega_guess / (2.0 * PI);
    if periods < min_periods {
        return Err(Error::FitFailure(format!(
            "signal covers {periods:.2} periods, need at least {min_periods}"
        )));
    }
    let per_period = t.len() as f64 / periods;
    if per_period < 8.0 {
        return Err(Error::FitFailure(format!(
            "{per_period:.1} samples per period, need at least 8"
        )));
    }
    let cost = |w: f64| linear_part(t, y, w).0;
    let (lo, hi) = (0.5 * omega_guess, 1.5 * omega_guess);
    // The cost has local minima spaced by ~2 pi / span; scan finer than that.
    let scan = ((hi - lo) * span / PI * 8.0).ceil().max(64.0) as usize;
    let h = (hi - lo) / scan as f64;
    let mut best = lo;
    let mut best_cost = f64::INFINITY;
    for i in 0..=scan {
        let w = lo + i as f64 * h;
        let c = cost(w);
        if c < best_cost {
            best = w;
            best_cost = c;
        }
    }
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * best.abs() {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
    }
    let omega = 0.5 * (a + b);
    let (res, amplitude) = linear_part(t, y, omega);
    if amplitude.is_nan() || amplitude <= 0.0 || !omega.is_finite() {
        return Err(Error::FitFailure("signal has no oscillating component".into()));
    }
    if omega <= lo * (1.0 + 1e-9) || omega >= hi * (1.0 - 1e-9) {
        return Err(Error::FitFailure(format!(
            "best frequency {omega} sits on the search boundary"
        )));
    }
    Ok(PhaseFit {
        omega,
        amplitude,
        relative_residual: (res / t.len() as f64).sqrt() / amplitude,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionConfig {
    pub c: f64,
    /// Resolutions to probe, in cells per wavelength.
    pub cells_per_wavelength: Vec<usize>,
    pub cfl: f64,
    pub periods: f64,
    pub method: Method,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            cells_per_wavelength: vec![16, 32],
            cfl: 0.5,
            periods: 8.0,
            method: Method::Leapfrog,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub cells_per_wavelength: usize,
    pub k: f64,
    pub dt: f64,
    pub omega_measured: f64,
    pub omega_exact: f64,
    /// `|omega_measured / (c k) - 1|`.
    pub relative_error: f64,
    /// Central-difference prediction `c sin(k dx) / dx` (continuous time).
    pub omega_semi_discrete: f64,
    /// With leapfrog time stepping: `(2/dt) asin(dt omega_sd / 2)`.
    pub omega_discrete: f64,
}

/// Semi-discrete angular frequency of an axis-aligned mode.
pub fn semi_discrete_omega(c: f64, k: f64, dx: f64) -> f64 {
    c * (k * dx).sin() / dx
}

/// Leapfrog frequency for a mode whose semi-discrete frequency is `omega_sd`.
pub fn leapfrog_omega(omega_sd: f64, dt: f64) -> f64 {
    2.0 / dt * (0.5 * dt * omega_sd).asin()
}

/// Measure the frequency of an x-directed vacuum plane wave of unit
/// wavelength at each resolution by fitting the `p^2` time series at one cell.
pub fn dispersion_study(cfg: &DispersionConfig) -> Result<Vec<DispersionRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.cells_per_wavelength {
        let dx = 1.0 / n as f64;
        let grid = GridSpec::new([n, 4, 4], [dx, 0.25, 0.25])?;
        let mut model = Model::flat(cfg.c);
        model.max_cfl = model.max_cfl.max(cfg.cfl);
        let wave = PlaneWave::new(&grid, [1, 0, 0], 1.0, [0.0, 1.0, 0.0])?;
        let mut s = wave.state(&grid, &model.metric, &model.equations);
        let k = wave.wavenumber();
        let omega_exact = cfg.c * k;
        let dt = model.dt_for_cfl(&grid, cfg.cfl);
        let steps = (cfg.periods * 2.0 * PI / omega_exact / dt).ceil() as usize + 1;
        let mut t = Vec::with_capacity(steps + 1);
        let mut y = Vec::with_capacity(steps + 1);
        t.push(s.time);
        y.push(s.p[1][0]);
        for _ in 0..steps {
            s = model.step(cfg.method, &s, dt)?;
            t.push(s.time);
            y.push(s.p[1][0]);
        }
        let fit = fit_frequency(&t, &y, omega_exact, cfg.periods.min(8.0))?;
        let omega_sd = semi_discrete_omega(cfg.c, k, dx);
        rows.push(DispersionRow {
            cells_per_wavelength: n,
            k,
            dt,
            omega_measured: fit.omega,
            omega_exact,
            relative_error: (fit.omega / omega_exact - 1.0).abs(),
            omega_semi_discrete: omega_sd,
            omega_discrete: leapfrog_omega(omega_sd, dt),
        });
    }
    Ok(rows)
}
