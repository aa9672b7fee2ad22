use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::geometry::{GridSpec, MetricFamily, SpacetimeMetric};
use crate::integrate::{GaugePolicy, Method, Model, RunConfig};
use crate::maxwell::{
    gauss_consistent_charge, gaussian_pulse, manufactured_charge, oscillating_dipole, static_charge, CurlTerm,
    CurrentSource, FieldEquations, FieldState, PeriodicBump, PlaneWave,
};

fn one() -> f64 {
    1.0
}

fn default_cadence() -> usize {
    defaults::MONITOR_CADENCE
}

fn default_max_cfl() -> f64 {
    defaults::MAX_CFL
}

fn default_method() -> Method {
    Method::Leapfrog
}

fn default_gauge_mode() -> [i64; 3] {
    [1, 0, 0]
}

/// A scenario file. Tables and keys are listed in the README.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub grid: GridConfig,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default = "minkowski")]
    pub metric: MetricFamily,
    pub initial: InitialCondition,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub gauge: GaugeConfig,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
}

fn minkowski() -> MetricFamily {
    MetricFamily::Minkowski
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub cells: [usize; 3],
    /// Box side lengths; the grid is periodic.
    pub length: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitScale {
    /// `c = 1`.
    #[default]
    Desk,
    /// CGS, `c` in cm/s.
    Gaussian,
}

impl UnitScale {
    pub fn speed_of_light(self) -> f64 {
        match self {
            UnitScale::Desk => defaults::C_DESK,
            UnitScale::Gaussian => defaults::C_GAUSSIAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    #[serde(default)]
    pub scale: UnitScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// Wave vector `k_a = 2 pi mode_a / L_a`.
    PlaneWave {
        mode: [i64; 3],
        #[serde(default = "one")]
        amplitude: f64,
        polarization: [f64; 3],
    },
    /// Vector potential bump at rest.
    GaussianPulse {
        center: [f64; 3],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        polarization: [f64; 3],
    },
    /// Static displacement `sqrt(3g) D^i = d_i psi` with its exact charge.
    ManufacturedCharge {
        center: [f64; 3],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Oscillating dipole switched on smoothly; conserves charge on the grid.
    Dipole {
        center: [f64; 3],
        width: f64,
        axis: [f64; 3],
        #[serde(default = "one")]
        amplitude: f64,
        omega: f64,
    },
    /// Static charge that, together with the other sources at `t = 0`,
    /// satisfies the discrete Gauss law for the initial state.
    GaussConsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    pub steps: usize,
    /// Give `dt` or `cfl`, not both. Neither means the default Courant number.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default = "default_max_cfl")]
    pub max_cfl: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeConfig {
    #[default]
    LambdaZero,
    /// `lambda = amplitude sin(omega t) cos(k . x)`, `k_a = 2 pi mode_a / L_a`.
    Prescribed {
        amplitude: f64,
        omega: f64,
        #[serde(default = "default_gauge_mode")]
        mode: [i64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            cadence: defaults::MONITOR_CADENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Run directory. Relative paths resolve under the output root; defaults
    /// to the scenario name.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            snapshot_every: defaults::SNAPSHOT_EVERY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default)]
    pub curl_term: CurlTerm,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn finite_positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{key} must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(format!("{key} must be finite")))
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })
    }

    /// Parse a scenario file; a missing `name` becomes the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut s = Self::from_toml_str(&text, path)?;
        if s.name.is_none() {
            s.name = path.file_stem().map(|x| x.to_string_lossy().into_owned());
        }
        Ok(s)
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("scenario")
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        for a in 0..3 {
            finite_positive(&format!("grid.length[{a}]"), g.length[a])?;
        }
        GridSpec::new(g.cells, [0, 1, 2].map(|a| g.length[a] / g.cells[a].max(1) as f64))
    }

    /// Check every invariant and assemble the model, initial state and run
    /// parameters. Nothing is written.
    pub fn prepare(&self) -> Result<Prepared> {
        let name = self.name();
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(invalid(format!("name {name:?} is not a valid directory name")));
        }
        let grid = self.grid_spec()?;
        let c = self.units.scale.speed_of_light();
        let metric = SpacetimeMetric::from_family(&self.metric, &grid)?;
        let mut equations = FieldEquations::new(c);
        equations.curl_term = self.physics.curl_term;
        let lengths = grid.lengths();
        let bump = |key: &str, center: [f64; 3], width: f64| -> Result<PeriodicBump> {
            finite(&format!("{key}.center"), &center)?;
            finite_positive(&format!("{key}.width"), width)?;
            Ok(PeriodicBump { center, width, lengths })
        };

        let mut source = CurrentSource::none();
        let initial = match &self.initial {
            InitialCondition::Zero => FieldState::zeros(grid),
            InitialCondition::PlaneWave {
                mode,
                amplitude,
                polarization,
            } => {
                finite("initial.amplitude", &[*amplitude])?;
                finite("initial.polarization", polarization)?;
                PlaneWave::new(&grid, *mode, *amplitude, *polarization)?.state(&grid, &metric, &equations)
            }
            InitialCondition::GaussianPulse {
                center,
                width,
                amplitude,
                polarization,
            } => {
                finite("initial.amplitude", &[*amplitude])?;
                finite("initial.polarization", polarization)?;
                gaussian_pulse(&grid, bump("initial", *center, *width)?, *amplitude, *polarization)
            }
            InitialCondition::ManufacturedCharge {
                center,
                width,
                amplitude,
            } => {
                finite("initial.amplitude", &[*amplitude])?;
                let (s, rho) = manufactured_charge(&grid, &metric, &equations, bump("initial", *center, *width)?, *amplitude);
                source.push(rho, true);
                s
            }
        };

        let mut consistent = false;
        for (i, spec) in self.sources.iter().enumerate() {
            match spec {
                SourceSpec::Dipole {
                    center,
                    width,
                    axis,
                    amplitude,
                    omega,
                } => {
                    let key = format!("sources[{i}]");
                    finite(&format!("{key}.axis"), axis)?;
                    finite(&format!("{key}.amplitude"), &[*amplitude])?;
                    finite_positive(&format!("{key}.omega"), *omega)?;
                    let b = bump(&key, *center, *width)?;
                    source.push(oscillating_dipole(&grid, &metric, b, *axis, *amplitude, *omega), true);
                }
                SourceSpec::GaussConsistent => {
                    if consistent {
                        return Err(invalid("only one gauss_consistent source is allowed"));
                    }
                    consistent = true;
                }
            }
        }
        if consistent {
            let mut term = gauss_consistent_charge(&initial, &metric, &equations);
            let mut present = vec![0.0; grid.len()];
            source.rho_into(0.0, &mut present);
            term.rho.iter_mut().zip(&present).for_each(|(r, p)| *r -= p);
            source.push(static_charge(term.rho), true);
        }

        let gauge = match &self.gauge {
            GaugeConfig::LambdaZero => GaugePolicy::LambdaZero,
            GaugeConfig::Prescribed { amplitude, omega, mode } => {
                finite("gauge.amplitude", &[*amplitude])?;
                finite("gauge.omega", &[*omega])?;
                let (a, w) = (*amplitude, *omega);
                let k = [0, 1, 2].map(|i| 2.0 * PI * mode[i] as f64 / lengths[i]);
                GaugePolicy::prescribed(move |t, x| a * (w * t).sin() * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos())
            }
        };

        let it = &self.integrator;
        finite_positive("integrator.max_cfl", it.max_cfl)?;
        let model = Model {
            equations,
            metric,
            source,
            gauge,
            max_cfl: it.max_cfl,
        };
        let (dt, cfl) = match (it.dt, it.cfl) {
            (Some(_), Some(_)) => return Err(invalid("give integrator.dt or integrator.cfl, not both")),
            (Some(dt), None) => {
                finite_positive("integrator.dt", dt)?;
                (dt, dt / model.dt_for_cfl(&grid, 1.0))
            }
            (None, cfl) => {
                let cfl = cfl.unwrap_or(defaults::CFL);
                finite_positive("integrator.cfl", cfl)?;
                (model.dt_for_cfl(&grid, cfl), cfl)
            }
        };
        let limit = model.stability_limit(&grid);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        if self.monitor.cadence == 0 {
            return Err(invalid("monitor.cadence must be at least 1"));
        }

        let mut echo = self.clone();
        echo.name = Some(name.to_string());
        if echo.output.dir.is_none() {
            echo.output.dir = Some(PathBuf::from(name));
        }
        if echo.integrator.dt.is_none() {
            echo.integrator.cfl = Some(cfl);
        }
        Ok(Prepared {
            scenario: echo,
            grid,
            model,
            initial,
            dt,
            cfl,
            run: RunConfig {
                method: it.method,
                dt,
                steps: it.steps,
                cadence: self.monitor.cadence,
                snapshot_every: self.output.snapshot_every,
                snapshot_dir: None,
            },
        })
    }
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The input with every defaulted value filled in.
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub model: Model,
    pub initial: FieldState,
    pub dt: f64,
    /// Courant number `c dt / min(dx)` scaled by the metric's coordinate speed.
    pub cfl: f64,
    pub run: RunConfig,
}

impl Prepared {
    pub fn name(&self) -> &str {
        self.scenario.name()
    }

    pub fn speed_of_light(&self) -> f64 {
        self.model.equations.c
    }

    pub fn stability_limit(&self) -> f64 {
        self.model.stability_limit(&self.grid)
    }
}
