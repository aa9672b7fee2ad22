//! Flat-space E/B reference solver. Deliberately self-contained: it uses its
//! own difference stencil and never calls into the canonical field code.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::maxwell::{CurrentSource, PhysicalFields};

/// Fields recorded at a sequence of times.
#[derive(Debug, Clone)]
pub struct PhysicalTrajectory {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub frames: Vec<PhysicalFields>,
}

fn curl(grid: &GridSpec, v: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let [nx, ny, nz] = grid.n;
    let inv = [0, 1, 2].map(|a| 0.5 / grid.dx[a]);
    let n = nx * ny * nz;
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let at = |i: usize, j: usize, k: usize| (i * ny + j) * nz + k;
    for i in 0..nx {
        let (ip, im) = ((i + 1) % nx, (i + nx - 1) % nx);
        for j in 0..ny {
            let (jp, jm) = ((j + 1) % ny, (j + ny - 1) % ny);
            for k in 0..nz {
                let (kp, km) = ((k + 1) % nz, (k + nz - 1) % nz);
                let c = at(i, j, k);
                let dx = |f: &Vec<f64>| (f[at(ip, j, k)] - f[at(im, j, k)]) * inv[0];
                let dy = |f: &Vec<f64>| (f[at(i, jp, k)] - f[at(i, jm, k)]) * inv[1];
                let dz = |f: &Vec<f64>| (f[at(i, j, kp)] - f[at(i, j, km)]) * inv[2];
                out[0][c] = dy(&v[2]) - dz(&v[1]);
                out[1][c] = dz(&v[0]) - dx(&v[2]);
                out[2][c] = dx(&v[1]) - dy(&v[0]);
            }
        }
    }
    out
}

/// Second-order E/B leapfrog for `dE/dt = c curl B - 4 pi j`,
/// `dB/dt = -c curl E` on a periodic collocated grid. `B` is kicked by half
/// steps around a full `E` update.
#[derive(Debug, Clone)]
pub struct FdtdOracle {
    pub grid: GridSpec,
    pub c: f64,
    pub max_cfl: f64,
}

impl FdtdOracle {
    pub fn new(grid: GridSpec, c: f64, max_cfl: f64) -> Self {
        Self { grid, c, max_cfl }
    }

    pub fn stability_limit(&self) -> f64 {
        self.max_cfl * self.grid.min_spacing() / self.c
    }

    pub fn step(&self, f: &mut PhysicalFields, source: &CurrentSource, t: f64, dt: f64) -> Result<()> {
        let limit = self.stability_limit();
        if !(dt.is_finite() && dt.abs() <= limit * (1.0 + 1e-12)) {
            return Err(Error::CflViolation { dt, limit });
        }
        let c = self.c;
        let g = &self.grid;
        let ce = curl(g, &f.e);
        for a in 0..3 {
            f.b[a].iter_mut().zip(&ce[a]).for_each(|(b, v)| *b -= 0.5 * dt * c * v);
        }
        let cb = curl(g, &f.b);
        let tm = t + 0.5 * dt;
        for a in 0..3 {
            for (idx, e) in f.e[a].iter_mut().enumerate() {
                let j = if source.is_empty() { 0.0 } else { source.j_at(tm, a, idx) };
                *e += dt * (c * cb[a][idx] - 4.0 * PI * j);
            }
        }
        let ce = curl(g, &f.e);
        for a in 0..3 {
            f.b[a].iter_mut().zip(&ce[a]).for_each(|(b, v)| *b -= 0.5 * dt * c * v);
        }
        let finite = f.e.iter().chain(f.b.iter()).all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::NonFiniteState {
                field: "oracle E/B",
                time: t + dt,
            });
        }
        Ok(())
    }

    /// `(1/8 pi) sum (E^2 + B^2) dV`.
    pub fn energy(&self, f: &PhysicalFields) -> f64 {
        let s: f64 = f.e.iter().chain(f.b.iter()).flat_map(|v| v.iter()).map(|x| x * x).sum();
        s * self.grid.cell_volume() / (8.0 * PI)
    }
}

/// Evolve `initial` for `steps` steps, recording every `cadence` steps and
/// the final one. Flat metric only.
pub fn fdtd_oracle(
    oracle: &FdtdOracle,
    initial: PhysicalFields,
    source: &CurrentSource,
    dt: f64,
    steps: usize,
    cadence: usize,
) -> Result<PhysicalTrajectory> {
    let cadence = cadence.max(1);
    let mut f = initial;
    let mut out = PhysicalTrajectory {
        grid: oracle.grid,
        times: vec![0.0],
        frames: vec![f.clone()],
    };
    for n in 1..=steps {
        oracle.step(&mut f, source, (n - 1) as f64 * dt, dt)?;
        if n % cadence == 0 || n == steps {
            out.times.push(n as f64 * dt);
            out.frames.push(f.clone());
        }
    }
    Ok(out)
}
