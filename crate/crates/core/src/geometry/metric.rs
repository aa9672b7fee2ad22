use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use crate::error::{Error, Result};

pub type Matrix4 = [[f64; 4]; 4];

/// A static, block-diagonal 4-metric `g_{ab}` at one point, signature (+,-,-,-).
///
/// Construction checks exact symmetry, `g_{0i} = 0`, `g_00 > 0` and a
/// negative-definite spatial block (hence `det g < 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    g: Matrix4,
}

impl MetricTensor {
    pub fn new(g: Matrix4) -> Result<Self> {
        for a in 0..4 {
            for b in 0..4 {
                if !g[a][b].is_finite() {
                    return Err(Error::NonLorentzianMetric(format!(
                        "component g_{a}{b} is not finite"
                    )));
                }
                if g[a][b] != g[b][a] {
                    return Err(Error::NonLorentzianMetric(format!(
                        "g_{a}{b} = {} differs from g_{b}{a} = {}",
                        g[a][b], g[b][a]
                    )));
                }
            }
        }
        for i in 1..4 {
            if g[0][i] != 0.0 {
                return Err(Error::NonStaticMetric {
                    index: i,
                    value: g[0][i],
                });
            }
        }
        if g[0][0] <= 0.0 {
            return Err(Error::NonLorentzianMetric(format!(
                "g_00 = {} must be positive",
                g[0][0]
            )));
        }
        let s = Matrix3::from_fn(|i, j| g[i + 1][j + 1]);
        let eig = SymmetricEigen::new(s).eigenvalues;
        if eig.iter().any(|&l| l >= 0.0) {
            return Err(Error::NonLorentzianMetric(format!(
                "spatial block is not negative definite (eigenvalues {:?})",
                eig.as_slice()
            )));
        }
        Ok(Self { g })
    }

    pub fn minkowski() -> Self {
        Self {
            g: diag4([1.0, -1.0, -1.0, -1.0]),
        }
    }

    pub fn diagonal(d: [f64; 4]) -> Result<Self> {
        Self::new(diag4(d))
    }

    pub fn components(&self) -> &Matrix4 {
        &self.g
    }

    pub fn g00(&self) -> f64 {
        self.g[0][0]
    }

    fn spatial(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.g[i + 1][j + 1])
    }

    pub fn determinant(&self) -> f64 {
        self.g[0][0] * self.spatial().determinant()
    }

    /// `sqrt(-det g)`.
    pub fn sqrt_minus_g(&self) -> f64 {
        (-self.determinant()).sqrt()
    }

    /// `|det g_ij|`, the spatial 3-metric determinant.
    pub fn spatial_det(&self) -> f64 {
        self.spatial().determinant().abs()
    }

    pub fn inverse(&self) -> Matrix4 {
        let mut inv = [[0.0; 4]; 4];
        inv[0][0] = 1.0 / self.g[0][0];
        // Negative definite, so the inverse always exists.
        let s = self.spatial().try_inverse().expect("spatial block is invertible");
        for i in 0..3 {
            for j in 0..3 {
                inv[i + 1][j + 1] = s[(i, j)];
            }
        }
        inv
    }

    /// `F^{ab} = g^{ac} g^{bd} F_{cd}`.
    pub fn raise_antisym(&self, f_lower: &AntisymTensor) -> AntisymTensor {
        contract_antisym(&self.inverse(), f_lower)
    }

    /// `F_{ab} = g_{ac} g_{bd} F^{cd}`.
    pub fn lower_antisym(&self, f_upper: &AntisymTensor) -> AntisymTensor {
        contract_antisym(&self.g, f_upper)
    }

    /// Largest coordinate light speed over all directions, in units of `c`.
    pub fn coordinate_speed_factor(&self) -> f64 {
        let inv = self.inverse();
        let s = Matrix3::from_fn(|i, j| -inv[i + 1][j + 1]);
        let lmax = SymmetricEigen::new(s).eigenvalues.max();
        (self.g[0][0] * lmax).sqrt()
    }
}

fn diag4(d: [f64; 4]) -> Matrix4 {
    let mut g = [[0.0; 4]; 4];
    for a in 0..4 {
        g[a][a] = d[a];
    }
    g
}

/// Upper-triangle contraction `M^{ac} M^{bd} F_{cd}`, mirrored so the result
/// is antisymmetric bit for bit.
fn contract_antisym(m: &Matrix4, f: &AntisymTensor) -> AntisymTensor {
    let mut out = AntisymTensor::zero();
    for a in 0..4 {
        for b in (a + 1)..4 {
            let mut acc = 0.0;
            for c in 0..4 {
                if m[a][c] == 0.0 {
                    continue;
                }
                for d in 0..4 {
                    if c != d && m[b][d] != 0.0 {
                        acc += m[a][c] * m[b][d] * f.get(c, d);
                    }
                }
            }
            out.set(a, b, acc);
        }
    }
    out
}

/// An antisymmetric 4x4 tensor; writing `(a, b)` also writes `(b, a) = -value`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AntisymTensor {
    m: Matrix4,
}

impl AntisymTensor {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from a full matrix, rejecting anything not antisymmetric to `1e-14`
    /// (relative to the largest entry).
    pub fn from_matrix(m: Matrix4) -> Result<Self> {
        let scale = m
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(1.0);
        for a in 0..4 {
            for b in 0..4 {
                if (m[a][b] + m[b][a]).abs() > 1e-14 * scale {
                    return Err(Error::Dimension(format!(
                        "tensor is not antisymmetric at ({a}, {b})"
                    )));
                }
            }
        }
        let mut t = Self::zero();
        for a in 0..4 {
            for b in (a + 1)..4 {
                t.set(a, b, m[a][b]);
            }
        }
        Ok(t)
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.m[a][b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.m[a][b] = v;
        self.m[b][a] = if a == b { 0.0 } else { -v };
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.m
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// Built-in metric families, selectable from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricFamily {
    Minkowski,
    /// Constant `diag(g00, g11, g22, g33)`.
    Diagonal { components: [f64; 4] },
    /// Coordinate-dependent diagonal metric with `g_00 = 1` and
    /// `g_11 = -(1 + a sin(2 pi y / Ly))`, `g_22 = -(1 + a sin(2 pi z / Lz))`,
    /// `g_33 = -(1 + a sin(2 pi x / Lx))`; smooth and periodic on the box.
    Warped { amplitude: f64 },
}

impl MetricFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            MetricFamily::Minkowski => Ok(()),
            MetricFamily::Diagonal { components } => MetricTensor::diagonal(*components).map(|_| ()),
            MetricFamily::Warped { amplitude } => {
                if amplitude.abs() < 1.0 && amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonLorentzianMetric(format!(
                        "warped amplitude {amplitude} must satisfy |a| < 1"
                    )))
                }
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        !matches!(self, MetricFamily::Warped { .. })
    }

    /// Metric at a continuous position inside a periodic box of side `lengths`.
    pub fn tensor_at(&self, x: [f64; 3], lengths: [f64; 3]) -> Result<MetricTensor> {
        match self {
            MetricFamily::Minkowski => Ok(MetricTensor::minkowski()),
            MetricFamily::Diagonal { components } => MetricTensor::diagonal(*components),
            MetricFamily::Warped { amplitude } => {
                let w = |axis: usize| 1.0 + amplitude * (2.0 * PI * x[axis] / lengths[axis]).sin();
                MetricTensor::diagonal([1.0, -w(1), -w(2), -w(0)])
            }
        }
    }
}

/// Per-cell quantities the field kernels need, computed once.
#[derive(Debug, Clone, Copy)]
pub struct CellMetric {
    pub tensor: MetricTensor,
    pub inverse: Matrix4,
    pub sqrt_minus_g: f64,
    pub sqrt_spatial_det: f64,
}

impl CellMetric {
    pub fn new(tensor: MetricTensor) -> Self {
        Self {
            inverse: tensor.inverse(),
            sqrt_minus_g: tensor.sqrt_minus_g(),
            sqrt_spatial_det: tensor.spatial_det().sqrt(),
            tensor,
        }
    }

    #[inline]
    pub fn g00(&self) -> f64 {
        self.tensor.components()[0][0]
    }

    /// Spatial block `g_ij`.
    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.tensor.components()[i + 1][j + 1]
    }

    /// Spatial block of the inverse, `g^ij`.
    #[inline]
    pub fn ginv(&self, i: usize, j: usize) -> f64 {
        self.inverse[i + 1][j + 1]
    }
}

#[derive(Debug, Clone)]
enum MetricCells {
    Uniform(Box<CellMetric>),
    Sampled(Vec<CellMetric>),
}

/// The static metric background over a grid: either one constant tensor or a
/// tensor sampled per cell. Read-only after construction.
#[derive(Debug, Clone)]
pub struct SpacetimeMetric {
    family: Option<MetricFamily>,
    cells: MetricCells,
}

impl SpacetimeMetric {
    pub fn minkowski() -> Self {
        Self {
            family: Some(MetricFamily::Minkowski),
            cells: MetricCells::Uniform(Box::new(CellMetric::new(MetricTensor::minkowski()))),
        }
    }

    pub fn uniform(tensor: MetricTensor) -> Self {
        Self {
            family: None,
            cells: MetricCells::Uniform(Box::new(CellMetric::new(tensor))),
        }
    }

    pub fn from_family(family: &MetricFamily, grid: &GridSpec) -> Result<Self> {
        family.validate()?;
        let lengths = grid.lengths();
        let cells = if family.is_uniform() {
            MetricCells::Uniform(Box::new(CellMetric::new(family.tensor_at([0.0; 3], lengths)?)))
        } else {
            let cells = (0..grid.len())
                .map(|idx| family.tensor_at(grid.position(idx), lengths).map(CellMetric::new))
                .collect::<Result<Vec<_>>>()?;
            MetricCells::Sampled(cells)
        };
        Ok(Self {
            family: Some(family.clone()),
            cells,
        })
    }

    pub fn family(&self) -> Option<&MetricFamily> {
        self.family.as_ref()
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.cells, MetricCells::Uniform(_))
    }

    /// Number of sampled cells, or `None` for a constant metric.
    pub fn sampled_len(&self) -> Option<usize> {
        match &self.cells {
            MetricCells::Uniform(_) => None,
            MetricCells::Sampled(v) => Some(v.len()),
        }
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        match self.sampled_len() {
            Some(n) if n != grid.len() => Err(Error::GridMismatch(format!(
                "metric sampled on {n} cells, grid has {}",
                grid.len()
            ))),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> &CellMetric {
        match &self.cells {
            MetricCells::Uniform(c) => c,
            MetricCells::Sampled(v) => &v[idx],
        }
    }

    pub fn sqrt_minus_g(&self, idx: usize) -> f64 {
        self.cell(idx).sqrt_minus_g
    }

    pub fn spatial_det(&self, idx: usize) -> f64 {
        self.cell(idx).tensor.spatial_det()
    }

    pub fn raise_antisym(&self, idx: usize, f_lower: &AntisymTensor) -> AntisymTensor {
        contract_antisym(&self.cell(idx).inverse, f_lower)
    }

    pub fn lower_antisym(&self, idx: usize, f_upper: &AntisymTensor) -> AntisymTensor {
        contract_antisym(self.cell(idx).tensor.components(), f_upper)
    }

    /// True when `g_00` takes the same value in every cell. The curvilinear
    /// Gauss and Ampere forms divide `sqrt(-g)` into `sqrt(g_00) sqrt(3g)`
    /// and need this.
    pub fn g00_is_constant(&self) -> bool {
        match &self.cells {
            MetricCells::Uniform(_) => true,
            MetricCells::Sampled(v) => v.iter().all(|c| c.g00() == v[0].g00()),
        }
    }

    pub fn max_coordinate_speed_factor(&self) -> f64 {
        match &self.cells {
            MetricCells::Uniform(c) => c.tensor.coordinate_speed_factor(),
            MetricCells::Sampled(v) => v
                .iter()
                .map(|c| c.tensor.coordinate_speed_factor())
                .fold(0.0, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sqrt_minus_g_examples() {
        assert!(close(MetricTensor::minkowski().sqrt_minus_g(), 1.0, 1e-15));
        let stretched = MetricTensor::diagonal([1.0, -4.0, -1.0, -1.0]).unwrap();
        assert!(close(stretched.sqrt_minus_g(), 2.0, 1e-15));
        // diag(1, -1, -r^2, -r^2 sin^2 theta) at r = 2, theta = pi/2.
        let r: f64 = 2.0;
        let th = PI / 2.0;
        let sph = MetricTensor::diagonal([1.0, -1.0, -r * r, -(r * th.sin()).powi(2)]).unwrap();
        assert!(close(sph.sqrt_minus_g(), 4.0, 1e-14));
    }

    #[test]
    fn spatial_det_examples() {
        assert!(close(MetricTensor::minkowski().spatial_det(), 1.0, 1e-15));
        let m = MetricTensor::diagonal([1.0, -4.0, -1.0, -1.0]).unwrap();
        assert!(close(m.spatial_det(), 4.0, 1e-15));
        let lapse = MetricTensor::diagonal([4.0, -1.0, -1.0, -1.0]).unwrap();
        assert!(close(lapse.spatial_det(), 1.0, 1e-15));
        assert!(close(lapse.sqrt_minus_g(), 2.0, 1e-15));
    }

    #[test]
    fn rejects_bad_metrics() {
        assert!(matches!(
            MetricTensor::diagonal([1.0, 1.0, -1.0, -1.0]),
            Err(Error::NonLorentzianMetric(_))
        ));
        assert!(matches!(
            MetricTensor::diagonal([-1.0, -1.0, -1.0, -1.0]),
            Err(Error::NonLorentzianMetric(_))
        ));
        let mut g = diag4([1.0, -1.0, -1.0, -1.0]);
        g[0][2] = 0.1;
        g[2][0] = 0.1;
        assert!(matches!(
            MetricTensor::new(g),
            Err(Error::NonStaticMetric { index: 2, .. })
        ));
        let mut g = diag4([1.0, -1.0, -1.0, -1.0]);
        g[1][2] = 0.1;
        assert!(MetricTensor::new(g).is_err());
        assert!(MetricFamily::Warped { amplitude: 1.0 }.validate().is_err());
    }

    #[test]
    fn inverse_is_inverse() {
        let mut g = diag4([2.0, -1.5, -2.0, -0.7]);
        g[1][2] = 0.3;
        g[2][1] = 0.3;
        g[2][3] = -0.1;
        g[3][2] = -0.1;
        let m = MetricTensor::new(g).unwrap();
        let inv = m.inverse();
        for a in 0..4 {
            for b in 0..4 {
                let s: f64 = (0..4).map(|c| inv[a][c] * g[c][b]).sum();
                let delta = if a == b { 1.0 } else { 0.0 };
                assert!((s - delta).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn raise_examples() {
        let mink = MetricTensor::minkowski();
        let mut f = AntisymTensor::zero();
        f.set(0, 1, 3.0);
        assert_eq!(mink.raise_antisym(&f).get(0, 1), -3.0);
        let mut f = AntisymTensor::zero();
        f.set(1, 2, 2.5);
        assert_eq!(mink.raise_antisym(&f).get(1, 2), 2.5);
        let m = MetricTensor::diagonal([1.0, -4.0, -1.0, -1.0]).unwrap();
        let mut f = AntisymTensor::zero();
        f.set(0, 1, 1.0);
        assert!(close(m.raise_antisym(&f).get(0, 1), -0.25, 1e-15));
    }

    #[test]
    fn sqrt_minus_g_splits_into_lapse_and_spatial_parts() {
        for d in [
            [1.0, -1.0, -1.0, -1.0],
            [4.0, -1.0, -1.0, -1.0],
            [2.5, -0.3, -7.0, -1.1],
            [0.2, -9.0, -0.5, -3.0],
        ] {
            let m = MetricTensor::diagonal(d).unwrap();
            let split = m.g00().sqrt() * m.spatial_det().sqrt();
            assert!(close(m.sqrt_minus_g(), split, 1e-12));
        }
    }

    #[test]
    fn warped_family_is_sampled_and_positive() {
        let grid = GridSpec::cube(8, 1.0).unwrap();
        let m = SpacetimeMetric::from_family(&MetricFamily::Warped { amplitude: 0.3 }, &grid).unwrap();
        assert!(!m.is_uniform());
        assert!(m.g00_is_constant());
        for idx in 0..grid.len() {
            assert!(m.sqrt_minus_g(idx) > 0.0);
        }
        // Coordinate speed grows where the spatial metric shrinks.
        assert!(m.max_coordinate_speed_factor() > 1.0);
    }
}
