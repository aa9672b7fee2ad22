use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_maxwell_core::scenario::{build_report, execute, output_root, run_dir, write_report, Scenario};
use dirac_maxwell_core::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "dirac-maxwell", version = env!("DIRAC_MAXWELL_VERSION"), about = "Canonical Maxwell field runs on static metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write monitor.csv, snapshots and manifest.json.
    Run { config: PathBuf },
    /// Parse and check a scenario file without running it.
    Validate { config: PathBuf },
    /// Summarize run directories into CSV tables and a text digest.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Directory for report.csv, convergence.csv and digest.txt.
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

fn fail(code: u8, err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let prepared = match Scenario::load(&config).and_then(|s| s.prepare()) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_VALIDATION, &e),
            };
            let dir = run_dir(&prepared, &output_root());
            match execute(&prepared, &dir) {
                Ok(m) => {
                    let r = &m.final_record;
                    println!(
                        "{}: {} steps in {:.2}s, H {:.6e}, gauss {:.3e}, ampere {:.3e} -> {}",
                        m.name,
                        m.effective.steps,
                        m.wall_time_seconds,
                        r.hamiltonian,
                        r.gauss_residual_max,
                        r.ampere_residual_max,
                        dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_RUNTIME, &e),
            }
        }
        Command::Validate { config } => match Scenario::load(&config).and_then(|s| s.prepare()) {
            Ok(p) => {
                println!(
                    "{}: ok ({:?} cells, dt {:.6e}, cfl {:.4}, {} steps, c {})",
                    p.name(),
                    p.grid.n,
                    p.dt,
                    p.cfl,
                    p.run.steps,
                    p.speed_of_light()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_VALIDATION, &e),
        },
        Command::Report { dirs, out } => {
            let report = match build_report(&dirs) {
                Ok(r) => r,
                Err(e @ (Error::ManifestMissing(_) | Error::Validation(_))) => return fail(EXIT_VALIDATION, &e),
                Err(e) => return fail(EXIT_RUNTIME, &e),
            };
            match write_report(&report, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_RUNTIME, &e),
            }
        }
    }
}
