use std::f64::consts::PI;

use dirac_maxwell_core::geometry::{GridSpec, MetricFamily, SpacetimeMetric};
use dirac_maxwell_core::integrate::{leapfrog_step, rk4_step, run, GaugePolicy, Method, Model, MonitorLog, RunConfig};
use dirac_maxwell_core::maxwell::{
    gauss_consistent_charge, gaussian_pulse, oscillating_dipole, CurrentSource, FieldState, PeriodicBump, PlaneWave,
};
use dirac_maxwell_core::Error;

fn line_grid(n: usize) -> GridSpec {
    GridSpec::new([n, 4, 4], [1.0 / n as f64, 0.25, 0.25]).unwrap()
}

fn axis_wave(grid: &GridSpec, model: &Model) -> (PlaneWave, FieldState) {
    let w = PlaneWave::new(grid, [1, 0, 0], 1.0, [0.0, 1.0, 0.0]).unwrap();
    let s = w.state(grid, &model.metric, &model.equations);
    (w, s)
}

fn evolve(model: &Model, method: Method, s: &FieldState, dt: f64, steps: usize) -> FieldState {
    let mut s = s.clone();
    for _ in 0..steps {
        s = model.step(method, &s, dt).unwrap();
    }
    s
}

#[test]
fn zero_state_stays_zero() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let model = Model::flat(1.0);
    let z = FieldState::zeros(grid);
    for method in [Method::Leapfrog, Method::Rk4] {
        let s = evolve(&model, method, &z, 0.05, 3);
        assert_eq!(s.max_difference(&z), 0.0);
        assert!((s.time - 0.15).abs() < 1e-15);
    }
}

#[test]
fn cfl_violation_is_refused() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let model = Model::flat(1.0);
    let z = FieldState::zeros(grid);
    let limit = model.stability_limit(&grid);
    assert!((limit - 0.5 / 8.0).abs() < 1e-15);
    for method in [Method::Leapfrog, Method::Rk4] {
        let err = model.step(method, &z, 1.01 * limit).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }
}

#[test]
fn non_finite_state_is_reported() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let model = Model::flat(1.0);
    let mut s = FieldState::zeros(grid);
    s.a[0][5] = f64::NAN;
    let err = leapfrog_step(&model, &s, 0.01).unwrap_err();
    assert!(matches!(err, Error::NonFiniteState { .. }));
}

#[test]
fn plane_wave_returns_after_one_period() {
    let model = Model::flat(1.0);
    let mut errs = Vec::new();
    for n in [32usize, 64] {
        let grid = line_grid(n);
        let (w, s0) = axis_wave(&grid, &model);
        let period = 2.0 * PI / w.wavenumber();
        let steps = 4 * n;
        let dt = period / steps as f64;
        let s = evolve(&model, Method::Leapfrog, &s0, dt, steps);
        errs.push(s.max_difference(&s0) / s0.p_max().max(1e-300));
    }
    let ratio = errs[0] / errs[1];
    assert!(errs[1] < 5e-2, "{errs:?}");
    assert!((3.5..4.5).contains(&ratio), "{errs:?}");
}

fn self_convergence(method: Method, dts: [f64; 3], horizon: f64) -> (f64, f64) {
    let model = Model::flat(1.0);
    let grid = line_grid(16);
    let (_, s0) = axis_wave(&grid, &model);
    let reference = {
        let dt = dts[2] / 4.0;
        evolve(&model, method, &s0, dt, (horizon / dt).round() as usize)
    };
    let e: Vec<f64> = dts
        .iter()
        .map(|&dt| evolve(&model, method, &s0, dt, (horizon / dt).round() as usize).max_difference(&reference))
        .collect();
    (e[0] / e[1], e[1] / e[2])
}

#[test]
fn leapfrog_is_second_order_in_time() {
    let (r1, r2) = self_convergence(Method::Leapfrog, [0.02, 0.01, 0.005], 0.4);
    assert!((3.5..4.6).contains(&r1) && (3.5..4.6).contains(&r2), "{r1} {r2}");
}

#[test]
fn rk4_is_fourth_order_in_time() {
    let (r1, r2) = self_convergence(Method::Rk4, [0.02, 0.01, 0.005], 0.4);
    assert!(r1 > 13.0 && r2 > 13.0, "{r1} {r2}");
}

#[test]
fn leapfrog_is_reversible() {
    let grid = GridSpec::cube(12, 1.0).unwrap();
    let model = Model::flat(1.0);
    let bump = PeriodicBump {
        center: [0.4, 0.5, 0.6],
        width: 0.15,
        lengths: grid.lengths(),
    };
    let mut s0 = gaussian_pulse(&grid, bump, 1.0, [0.0, 0.0, 1.0]);
    s0.p[0] = grid.sample(|x| (2.0 * PI * x[1]).sin() * 0.01);
    let dt = 0.02;
    let fwd = leapfrog_step(&model, &s0, dt).unwrap();
    let back = leapfrog_step(&model, &fwd, -dt).unwrap();
    assert!(back.max_difference(&s0) <= 1e-12);
    assert!(back.time.abs() < 1e-15);
}

#[test]
fn a0_is_bitwise_frozen_under_lambda_zero() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let metric = SpacetimeMetric::from_family(&MetricFamily::Warped { amplitude: 0.2 }, &grid).unwrap();
    let mut model = Model::flat(1.0);
    model.metric = metric;
    let mut s0 = FieldState::zeros(grid);
    s0.a0 = grid.sample(|x| (2.0 * PI * x[0]).cos() + x[2]);
    s0.a[2] = grid.sample(|x| (2.0 * PI * x[1]).sin());
    for method in [Method::Leapfrog, Method::Rk4] {
        let s = evolve(&model, method, &s0, 0.01, 20);
        assert!(s.a0.iter().zip(&s0.a0).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn prescribed_gauge_moves_a0_without_touching_physics() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let (w, s0) = {
        let m = Model::flat(1.0);
        axis_wave(&grid, &m)
    };
    let _ = w;
    let mut frozen = Model::flat(1.0);
    frozen.gauge = GaugePolicy::LambdaZero;
    let mut moving = Model::flat(1.0);
    moving.gauge = GaugePolicy::prescribed(|t, x| 0.3 * (2.0 * PI * x[2]).sin() * (1.0 + t));
    let a = evolve(&frozen, Method::Leapfrog, &s0, 0.01, 30);
    let b = evolve(&moving, Method::Leapfrog, &s0, 0.01, 30);
    assert!(b.a0.iter().any(|v| v.abs() > 1e-3));
    let eq = frozen.equations;
    let (da, ha) = eq.d_and_h(&a, &frozen.metric);
    let (db, hb) = eq.d_and_h(&b, &moving.metric);
    for i in 0..3 {
        for idx in 0..grid.len() {
            assert!((da[i][idx] - db[i][idx]).abs() < 1e-12);
            assert!((ha[i][idx] - hb[i][idx]).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_step_run_records_initial_state_only() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let model = Model::flat(1.0);
    let cfg = RunConfig {
        method: Method::Leapfrog,
        dt: 0.01,
        steps: 0,
        cadence: 1,
        snapshot_every: 0,
        snapshot_dir: None,
    };
    let out = run(&model, FieldState::zeros(grid), &cfg).unwrap();
    assert_eq!(out.log.records.len(), 1);
    assert_eq!(out.log.records[0].step, 0);
    assert!(out.snapshots.is_empty());
}

#[test]
fn vacuum_wave_energy_stays_within_band() {
    let grid = GridSpec::cube(32, 1.0).unwrap();
    let model = Model::flat(1.0);
    let w = PlaneWave::new(&grid, [1, 0, 0], 1.0, [0.0, 1.0, 0.0]).unwrap();
    let s0 = w.state(&grid, &model.metric, &model.equations);
    let cfg = RunConfig {
        method: Method::Leapfrog,
        dt: model.dt_for_cfl(&grid, 0.5),
        steps: 1000,
        cadence: 10,
        snapshot_every: 0,
        snapshot_dir: None,
    };
    let out = run(&model, s0, &cfg).unwrap();
    let h0 = out.log.records[0].hamiltonian;
    for r in &out.log.records {
        assert!(((r.hamiltonian - h0) / h0).abs() <= 1e-4, "{r:?}");
    }
    assert_eq!(out.log.records.len(), 101);
    assert_eq!(out.log.last().unwrap().step, 1000);
    assert!(out.log.records.windows(2).all(|w| w[1].time > w[0].time));
}

fn charged_model(grid: &GridSpec) -> (Model, FieldState) {
    let metric = SpacetimeMetric::from_family(&MetricFamily::Warped { amplitude: 0.2 }, grid).unwrap();
    let mut model = Model::flat(1.0);
    let bump = PeriodicBump {
        center: [0.5; 3],
        width: 0.15,
        lengths: grid.lengths(),
    };
    let mut s = gaussian_pulse(grid, bump, 1.0, [1.0, 0.0, 0.0]);
    s.p[1] = grid.sample(|x| 0.05 * bump.value(x));
    s.p[2] = grid.sample(|x| 0.05 * (2.0 * PI * x[0]).cos());
    let charge = gauss_consistent_charge(&s, &metric, &model.equations);
    let dip = oscillating_dipole(grid, &metric, bump, [0.0, 0.0, 1.0], 0.5, 2.0 * PI);
    let mut src = CurrentSource::none();
    src.push(charge, true);
    src.push(dip, true);
    model.metric = metric;
    model.source = src;
    (model, s)
}

#[test]
fn gauss_drift_with_certified_source_is_second_order_in_dt() {
    let grid = GridSpec::cube(12, 1.0).unwrap();
    let (model, s0) = charged_model(&grid);
    let g0 = model.equations.gauss_residual(&s0, &model.metric, &model.source);
    assert!(g0.iter().all(|v| v.abs() < 1e-10));
    let horizon = 0.5;
    let mut drift = Vec::new();
    for dt in [0.01, 0.005] {
        let cfg = RunConfig {
            method: Method::Leapfrog,
            dt,
            steps: (horizon / dt).round() as usize,
            cadence: 1,
            snapshot_every: 0,
            snapshot_dir: None,
        };
        let out = run(&model, s0.clone(), &cfg).unwrap();
        drift.push(out.log.records.iter().map(|r| r.gauss_residual_max).fold(0.0, f64::max));
    }
    let ratio = drift[0] / drift[1];
    assert!((3.5..4.5).contains(&ratio), "{drift:?}");
}

#[test]
fn monitor_log_round_trips_through_csv() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let (model, s0) = charged_model(&grid);
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        method: Method::Rk4,
        dt: 0.01,
        steps: 7,
        cadence: 3,
        snapshot_every: 4,
        snapshot_dir: Some(dir.path().join("snaps")),
    };
    let out = run(&model, s0, &cfg).unwrap();
    let steps: Vec<usize> = out.log.records.iter().map(|r| r.step).collect();
    assert_eq!(steps, vec![0, 3, 6, 7]);
    let names: Vec<String> = out
        .snapshots
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["snapshot_000000.bin", "snapshot_000004.bin", "snapshot_000007.bin"]);
    let path = dir.path().join("monitor.csv");
    out.log.write_csv(&path).unwrap();
    let back = MonitorLog::read_csv(&path).unwrap();
    assert_eq!(back, out.log);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("step,time,hamiltonian,p0_max,gauss_residual_max,ampere_residual_max"));
}

#[test]
fn runs_are_bitwise_reproducible() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let (model, s0) = charged_model(&grid);
    let cfg = RunConfig {
        method: Method::Leapfrog,
        dt: 0.01,
        steps: 15,
        cadence: 1,
        snapshot_every: 0,
        snapshot_dir: None,
    };
    let a = run(&model, s0.clone(), &cfg).unwrap().log.to_csv_string().unwrap();
    let b = run(&model, s0, &cfg).unwrap().log.to_csv_string().unwrap();
    assert_eq!(a, b);
}

#[test]
fn rk4_handles_sources_and_metric() {
    let grid = GridSpec::cube(8, 1.0).unwrap();
    let (model, s0) = charged_model(&grid);
    let a = rk4_step(&model, &s0, 0.01).unwrap();
    let b = leapfrog_step(&model, &s0, 0.01).unwrap();
    assert!(a.max_difference(&b) < 1e-3 * s0.p_max().max(1.0));
}
