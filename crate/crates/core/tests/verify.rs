use std::f64::consts::PI;

use dirac_maxwell_core::geometry::GridSpec;
use dirac_maxwell_core::integrate::{Method, Model};
use dirac_maxwell_core::maxwell::{gaussian_pulse, CurrentSource, PeriodicBump, PhysicalFields, PlaneWave};
use dirac_maxwell_core::verify::{
    canonical_trajectory, compare_to_oracle, constraint_chain_check, dispersion_study, fdtd_oracle, observed_orders,
    physical_fields, ChainCase, DispersionConfig, FdtdOracle, ORACLE_SOURCE,
};
use dirac_maxwell_core::Error;

fn zero_fields(grid: &GridSpec) -> PhysicalFields {
    let n = grid.len();
    PhysicalFields {
        e: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        b: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
    }
}

fn sup(f: &PhysicalFields) -> f64 {
    f.e.iter()
        .chain(&f.b)
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
}

fn diff(a: &PhysicalFields, b: &PhysicalFields) -> f64 {
    let mut m = 0.0f64;
    for (x, y) in a.e.iter().chain(&a.b).zip(b.e.iter().chain(&b.b)) {
        for (u, v) in x.iter().zip(y) {
            m = m.max((u - v).abs());
        }
    }
    m
}

#[test]
fn oracle_keeps_zero_fields_zero() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let oracle = FdtdOracle::new(grid, 1.0, 0.5);
    let tr = fdtd_oracle(&oracle, zero_fields(&grid), &CurrentSource::none(), 0.05, 4, 1).unwrap();
    assert_eq!(tr.frames.len(), 5);
    assert!(tr.frames.iter().all(|f| sup(f) == 0.0));
}

#[test]
fn oracle_refuses_large_steps() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let oracle = FdtdOracle::new(grid, 1.0, 0.5);
    let err = fdtd_oracle(&oracle, zero_fields(&grid), &CurrentSource::none(), 0.2, 1, 1).unwrap_err();
    assert!(matches!(err, Error::CflViolation { .. }));
}

#[test]
fn oracle_recovers_plane_wave_period_at_second_order() {
    let mut errs = Vec::new();
    for n in [32usize, 64] {
        let grid = GridSpec::new([n, 4, 4], [1.0 / n as f64, 0.25, 0.25]).unwrap();
        let w = PlaneWave::new(&grid, [1, 0, 0], 1.0, [0.0, 0.0, 1.0]).unwrap();
        let oracle = FdtdOracle::new(grid, 1.0, 0.5);
        let steps = 4 * n;
        let dt = 2.0 * PI / w.wavenumber() / steps as f64;
        let tr = fdtd_oracle(&oracle, w.fields(&grid, 0.0, 1.0), &CurrentSource::none(), dt, steps, steps).unwrap();
        errs.push(diff(tr.frames.last().unwrap(), &w.fields(&grid, tr.times[1], 1.0)));
    }
    let r = errs[0] / errs[1];
    assert!((3.5..4.5).contains(&r), "{errs:?}");
}

#[test]
fn oracle_energy_stays_in_band() {
    let grid = GridSpec::cube(16, 1.0).unwrap();
    let w = PlaneWave::new(&grid, [1, 2, 0], 1.0, [2.0, -1.0, 0.0]).unwrap();
    let oracle = FdtdOracle::new(grid, 1.0, 0.5);
    let dt = oracle.stability_limit();
    let tr = fdtd_oracle(&oracle, w.fields(&grid, 0.0, 1.0), &CurrentSource::none(), dt, 400, 10).unwrap();
    let e0 = oracle.energy(&tr.frames[0]);
    for f in &tr.frames {
        assert!(((oracle.energy(f) - e0) / e0).abs() < 1e-2);
    }
}

#[test]
fn oracle_is_independent_of_the_canonical_solver() {
    for forbidden in [
        "FieldEquations",
        "FieldState",
        "add_central_diff",
        "central_diff",
        "divergence(",
        "integrate",
        "leapfrog_step",
        "rk4_step",
        "Model",
        "d_and_h",
        "maxwell::field",
    ] {
        assert!(!ORACLE_SOURCE.contains(forbidden), "oracle mentions {forbidden}");
    }
}

#[test]
fn identical_zero_runs_have_zero_discrepancy() {
    let grid = GridSpec::cube(6, 1.0).unwrap();
    let model = Model::flat(1.0);
    let s = dirac_maxwell_core::maxwell::FieldState::zeros(grid);
    let a = canonical_trajectory(&model, &s, Method::Leapfrog, 0.05, 3, 1).unwrap();
    let b = fdtd_oracle(&FdtdOracle::new(grid, 1.0, 0.5), zero_fields(&grid), &CurrentSource::none(), 0.05, 3, 1)
        .unwrap();
    let rep = compare_to_oracle(&a, &b).unwrap();
    assert_eq!(rep.steps.len(), 4);
    assert_eq!(rep.max_sup, 0.0);
    assert_eq!(rep.max_l2, 0.0);
}

#[test]
fn comparison_rejects_different_grids() {
    let g1 = GridSpec::cube(6, 1.0).unwrap();
    let g2 = GridSpec::cube(8, 1.0).unwrap();
    let o = |g: GridSpec| {
        fdtd_oracle(&FdtdOracle::new(g, 1.0, 0.5), zero_fields(&g), &CurrentSource::none(), 0.01, 1, 1).unwrap()
    };
    assert!(matches!(compare_to_oracle(&o(g1), &o(g2)), Err(Error::GridMismatch(_))));
}

fn oracle_discrepancy(n: usize, pulse: bool) -> f64 {
    let grid = GridSpec::cube(n, 1.0).unwrap();
    let model = Model::flat(1.0);
    let s0 = if pulse {
        let bump = PeriodicBump {
            center: [0.5; 3],
            width: 0.12,
            lengths: grid.lengths(),
        };
        gaussian_pulse(&grid, bump, 1.0, [0.0, 0.0, 1.0])
    } else {
        PlaneWave::new(&grid, [1, 1, 0], 1.0, [1.0, -1.0, 0.0])
            .unwrap()
            .state(&grid, &model.metric, &model.equations)
    };
    let dt = model.dt_for_cfl(&grid, 0.5);
    let steps = (0.25 / dt).round() as usize;
    let a = canonical_trajectory(&model, &s0, Method::Leapfrog, dt, steps, steps).unwrap();
    let oracle = FdtdOracle::new(grid, 1.0, 0.5);
    let b = fdtd_oracle(&oracle, physical_fields(&model, &s0), &CurrentSource::none(), dt, steps, steps).unwrap();
    compare_to_oracle(&a, &b).unwrap().max_sup
}

#[test]
fn canonical_and_oracle_agree_at_second_order() {
    for pulse in [false, true] {
        let e: Vec<f64> = [16, 32].iter().map(|&n| oracle_discrepancy(n, pulse)).collect();
        let order = observed_orders(&e, 2.0)[0];
        assert!(order >= 1.9, "pulse {pulse}: {e:?}");
    }
}

#[test]
fn dispersion_matches_the_discrete_relation() {
    let rows = dispersion_study(&DispersionConfig::default()).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((r.omega_measured / r.omega_discrete - 1.0).abs() < 1e-6, "{r:?}");
    }
    // The collocated central stencil at 16 cells per wavelength lags by about
    // 2.4e-2.
    assert!((rows[0].relative_error - 2.4e-2).abs() < 1.5e-3, "{:?}", rows[0]);
    let ratio = rows[1].relative_error / rows[0].relative_error;
    assert!((0.22..0.28).contains(&ratio), "ratio {ratio}");
}

#[test]
fn small_time_step_reproduces_semi_discrete_prediction() {
    let cfg = DispersionConfig {
        cells_per_wavelength: vec![16],
        cfl: 0.02,
        ..DispersionConfig::default()
    };
    let r = dispersion_study(&cfg).unwrap()[0];
    assert!((r.omega_measured / r.omega_semi_discrete - 1.0).abs() < 1e-3, "{r:?}");
}

#[test]
fn constraint_chains_match_hand_analysis() {
    let em = constraint_chain_check(ChainCase::EmSingleMode {
        k: 2.0 * PI,
        c: 1.0,
        rho0: 0.3,
    })
    .unwrap();
    assert!(em.matches_expected, "{em:?}");
    assert_eq!((em.primaries, em.secondaries), (1, 1));
    let pair = constraint_chain_check(ChainCase::SecondClassPair).unwrap();
    assert!(pair.matches_expected, "{pair:?}");
    assert_eq!(pair.rounds, 1);
    let reg = constraint_chain_check(ChainCase::RegularOscillator).unwrap();
    assert!(reg.matches_expected, "{reg:?}");
    assert_eq!(reg.primaries + reg.secondaries, 0);
}

#[test]
fn em_chain_in_gaussian_units() {
    let em = constraint_chain_check(ChainCase::EmSingleMode {
        k: 0.5,
        c: 3.0,
        rho0: -1.2,
    })
    .unwrap();
    assert!(em.matches_expected, "{em:?}");
}
