//! Time integration of the canonical field system and run monitoring.

mod run;
mod step;

pub use run::{run, MonitorLog, MonitorRecord, RunConfig, RunOutput};
pub use step::{leapfrog_step, rk4_step, GaugePolicy, LambdaFn, Method, Model};
