use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, SpacetimeMetric};
use crate::maxwell::{CurrentSource, FieldEquations, FieldState, Rhs};

pub type LambdaFn = dyn Fn(f64, [f64; 3]) -> f64 + Send + Sync;

/// How `Adot_0 = lambda` is chosen.
#[derive(Clone, Default)]
pub enum GaugePolicy {
    /// `lambda = 0`: `A_0` never changes.
    #[default]
    LambdaZero,
    Prescribed(Arc<LambdaFn>),
}

impl fmt::Debug for GaugePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugePolicy::LambdaZero => f.write_str("LambdaZero"),
            GaugePolicy::Prescribed(_) => f.write_str("Prescribed(..)"),
        }
    }
}

impl GaugePolicy {
    pub fn prescribed<F>(f: F) -> Self
    where
        F: Fn(f64, [f64; 3]) -> f64 + Send + Sync + 'static,
    {
        GaugePolicy::Prescribed(Arc::new(f))
    }

    /// `lambda(t)` sampled on the grid, or `None` when it is identically zero.
    pub fn lambda_field(&self, t: f64, grid: &GridSpec) -> Option<Vec<f64>> {
        match self {
            GaugePolicy::LambdaZero => None,
            GaugePolicy::Prescribed(f) => Some(grid.sample(|x| f(t, x))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Leapfrog,
    Rk4,
}

/// Everything a step needs besides the state.
#[derive(Debug, Clone)]
pub struct Model {
    pub equations: FieldEquations,
    pub metric: SpacetimeMetric,
    pub source: CurrentSource,
    pub gauge: GaugePolicy,
    /// Largest accepted Courant number `c dt / min(dx)` (scaled by the
    /// metric's coordinate speed).
    pub max_cfl: f64,
}

impl Model {
    pub fn flat(c: f64) -> Self {
        Self {
            equations: FieldEquations::new(c),
            metric: SpacetimeMetric::minkowski(),
            source: CurrentSource::none(),
            gauge: GaugePolicy::LambdaZero,
            max_cfl: defaults::MAX_CFL,
        }
    }

    /// Largest stable `|dt|` on `grid`.
    pub fn stability_limit(&self, grid: &GridSpec) -> f64 {
        self.max_cfl * grid.min_spacing() / (self.equations.c * self.metric.max_coordinate_speed_factor())
    }

    /// Time step for a Courant number `cfl`.
    pub fn dt_for_cfl(&self, grid: &GridSpec, cfl: f64) -> f64 {
        cfl * grid.min_spacing() / (self.equations.c * self.metric.max_coordinate_speed_factor())
    }

    fn check_step(&self, grid: &GridSpec, dt: f64) -> Result<()> {
        let limit = self.stability_limit(grid);
        if !(dt.is_finite() && dt.abs() <= limit * (1.0 + 1e-12)) {
            return Err(Error::CflViolation { dt, limit });
        }
        Ok(())
    }

    fn lambda(&self, t: f64, grid: &GridSpec) -> Option<Vec<f64>> {
        self.gauge.lambda_field(t, grid)
    }

    pub fn rhs(&self, state: &FieldState) -> Rhs {
        let lambda = self
            .lambda(state.time, &state.grid)
            .unwrap_or_else(|| vec![0.0; state.grid.len()]);
        self.equations.rhs(state, &self.metric, &self.source, &lambda)
    }

    pub fn hamiltonian(&self, state: &FieldState) -> f64 {
        let lambda = self.lambda(state.time, &state.grid);
        self.equations
            .hamiltonian_total(state, &self.metric, &self.source, lambda.as_deref())
    }

    pub fn step(&self, method: Method, state: &FieldState, dt: f64) -> Result<FieldState> {
        match method {
            Method::Leapfrog => leapfrog_step(self, state, dt),
            Method::Rk4 => rk4_step(self, state, dt),
        }
    }
}

/// Kick-drift-kick step. `A_0` advances by the midpoint value of `lambda`
/// and the drift uses its average over the step, so the update stays
/// time-reversible.
pub fn leapfrog_step(model: &Model, state: &FieldState, dt: f64) -> Result<FieldState> {
    let grid = state.grid;
    model.check_step(&grid, dt)?;
    let eq = &model.equations;
    let (metric, source) = (&model.metric, &model.source);
    let t = state.time;
    let mut s = state.clone();

    eq.add_force(&grid, metric, source, &s.a, t, 0.5 * dt, &mut s.p);
    let a0_mid = match model.lambda(t + 0.5 * dt, &grid) {
        None => None,
        Some(l) => {
            let mut mid = s.a0.clone();
            for (idx, lv) in l.iter().enumerate() {
                s.a0[idx] += dt * lv;
                mid[idx] = 0.5 * (mid[idx] + s.a0[idx]);
            }
            Some(mid)
        }
    };
    let a0 = a0_mid.as_deref().unwrap_or(&s.a0);
    eq.add_velocities(&grid, metric, a0, &s.p, dt, &mut s.a);
    eq.add_p0_rate(&grid, metric, source, &s.p, t + 0.5 * dt, dt, &mut s.p0);
    eq.add_force(&grid, metric, source, &s.a, t + dt, 0.5 * dt, &mut s.p);
    s.time = t + dt;
    s.check_finite()?;
    Ok(s)
}

fn axpy(state: &FieldState, k: &Rhs, h: f64) -> FieldState {
    let mut s = state.clone();
    let add = |dst: &mut Vec<f64>, src: &Vec<f64>| dst.iter_mut().zip(src).for_each(|(d, v)| *d += h * v);
    add(&mut s.a0, &k.a0);
    add(&mut s.p0, &k.p0);
    for i in 0..3 {
        add(&mut s.a[i], &k.a[i]);
        add(&mut s.p[i], &k.p[i]);
    }
    s.time += h;
    s
}

/// Classical fourth-order Runge-Kutta over the full right-hand side.
pub fn rk4_step(model: &Model, state: &FieldState, dt: f64) -> Result<FieldState> {
    model.check_step(&state.grid, dt)?;
    let k1 = model.rhs(state);
    let k2 = model.rhs(&axpy(state, &k1, 0.5 * dt));
    let k3 = model.rhs(&axpy(state, &k2, 0.5 * dt));
    let k4 = model.rhs(&axpy(state, &k3, dt));
    let mut s = state.clone();
    let w = dt / 6.0;
    let comb = |dst: &mut Vec<f64>, a: &Vec<f64>, b: &Vec<f64>, c: &Vec<f64>, d: &Vec<f64>| {
        for (i, v) in dst.iter_mut().enumerate() {
            *v += w * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
        }
    };
    comb(&mut s.a0, &k1.a0, &k2.a0, &k3.a0, &k4.a0);
    comb(&mut s.p0, &k1.p0, &k2.p0, &k3.p0, &k4.p0);
    for i in 0..3 {
        comb(&mut s.a[i], &k1.a[i], &k2.a[i], &k3.a[i], &k4.a[i]);
        comb(&mut s.p[i], &k1.p[i], &k2.p[i], &k3.p[i], &k4.p[i]);
    }
    s.time = state.time + dt;
    s.check_finite()?;
    Ok(s)
}
