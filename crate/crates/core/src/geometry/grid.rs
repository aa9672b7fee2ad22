use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest number of cells per axis; the central stencil plus the
/// curl-of-curl operator reach two cells away.
pub const MIN_CELLS: usize = 4;

/// A periodic, collocated, uniformly spaced 3-D grid.
///
/// Cell `(i, j, k)` sits at `(i dx, j dy, k dz)` and is stored at flat index
/// `(i * ny + j) * nz + k` (C order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub dx: [f64; 3],
}

impl GridSpec {
    pub fn new(n: [usize; 3], dx: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if n[a] < MIN_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells, need at least {MIN_CELLS}",
                    n[a]
                )));
            }
            if !(dx[a] > 0.0 && dx[a].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} spacing {} must be positive",
                    dx[a]
                )));
            }
        }
        Ok(Self { n, dx })
    }

    /// Cubic grid with `n` cells per axis spanning a box of side `length`.
    pub fn cube(n: usize, length: f64) -> Result<Self> {
        let h = length / n as f64;
        Self::new([n; 3], [h; 3])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lengths(&self) -> [f64; 3] {
        [
            self.n[0] as f64 * self.dx[0],
            self.n[1] as f64 * self.dx[1],
            self.n[2] as f64 * self.dx[2],
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx[0] * self.dx[1] * self.dx[2]
    }

    pub fn min_spacing(&self) -> f64 {
        self.dx.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], k]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.unravel(idx);
        [
            c[0] as f64 * self.dx[0],
            c[1] as f64 * self.dx[1],
            c[2] as f64 * self.dx[2],
        ]
    }

    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    /// Sample a function of position on every cell.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|idx| f(self.position(idx))).collect()
    }

    /// `out += scale * D_axis f` with the second-order periodic central difference.
    pub fn add_central_diff(&self, f: &[f64], axis: usize, scale: f64, out: &mut [f64]) {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let [nx, ny, nz] = self.n;
        let s = scale / (2.0 * self.dx[axis]);
        match axis {
            0 => {
                let plane = ny * nz;
                for i in 0..nx {
                    let ip = if i + 1 == nx { 0 } else { i + 1 } * plane;
                    let im = if i == 0 { nx - 1 } else { i - 1 } * plane;
                    let base = i * plane;
                    for r in 0..plane {
                        out[base + r] += s * (f[ip + r] - f[im + r]);
                    }
                }
            }
            1 => {
                for i in 0..nx {
                    for j in 0..ny {
                        let jp = if j + 1 == ny { 0 } else { j + 1 };
                        let jm = if j == 0 { ny - 1 } else { j - 1 };
                        let base = (i * ny + j) * nz;
                        let bp = (i * ny + jp) * nz;
                        let bm = (i * ny + jm) * nz;
                        for k in 0..nz {
                            out[base + k] += s * (f[bp + k] - f[bm + k]);
                        }
                    }
                }
            }
            _ => {
                for row in 0..nx * ny {
                    let base = row * nz;
                    let fr = &f[base..base + nz];
                    let or = &mut out[base..base + nz];
                    or[0] += s * (fr[1] - fr[nz - 1]);
                    for k in 1..nz - 1 {
                        or[k] += s * (fr[k + 1] - fr[k - 1]);
                    }
                    or[nz - 1] += s * (fr[0] - fr[nz - 2]);
                }
            }
        }
    }

    /// `D_axis f` at a single cell.
    pub fn diff_at(&self, f: &[f64], axis: usize, idx: usize) -> f64 {
        let mut c = self.unravel(idx);
        let n = self.n[axis];
        let i = c[axis];
        c[axis] = if i + 1 == n { 0 } else { i + 1 };
        let fp = f[self.index(c[0], c[1], c[2])];
        c[axis] = if i == 0 { n - 1 } else { i - 1 };
        let fm = f[self.index(c[0], c[1], c[2])];
        (fp - fm) / (2.0 * self.dx[axis])
    }

    /// `D_axis f` into a fresh buffer.
    pub fn central_diff(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.add_central_diff(f, axis, 1.0, &mut out);
        out
    }

    /// `sum_i D_i v^i`.
    pub fn divergence(&self, v: [&[f64]; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (a, comp) in v.iter().enumerate() {
            self.add_central_diff(comp, a, 1.0, &mut out);
        }
        out
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn max_abs3(v: &[Vec<f64>; 3]) -> f64 {
    v.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
}
