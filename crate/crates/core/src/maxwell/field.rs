use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::source::CurrentSource;
use super::state::FieldState;
use crate::geometry::{AntisymTensor, CellMetric, GridSpec, SpacetimeMetric};

/// Which coefficient multiplies the spatial divergence of the field tensor in
/// the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CurlTerm {
    /// `(1/4 pi c) D_j(sqrt(-g) F^{ji})`, the variation of the Lagrangian.
    #[default]
    Consistent,
    /// `(sqrt(-g)/16 pi c) D_j F^{ji}`. Kept only to show that it does not
    /// reproduce Ampere's law.
    OuterDensity,
}

/// Time derivatives of every canonical variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub a0: Vec<f64>,
    pub a: [Vec<f64>; 3],
    pub p0: Vec<f64>,
    pub p: [Vec<f64>; 3],
}

/// Lower and raised field tensor, stored as the six independent components
/// in the order `01, 02, 03, 12, 13, 23`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTensor {
    pub grid: GridSpec,
    pub lower: [Vec<f64>; 6],
    pub upper: [Vec<f64>; 6],
}

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl FieldTensor {
    fn tensor(parts: &[Vec<f64>; 6], idx: usize) -> AntisymTensor {
        let mut t = AntisymTensor::zero();
        for (c, &(a, b)) in PAIRS.iter().enumerate() {
            t.set(a, b, parts[c][idx]);
        }
        t
    }

    pub fn lower_at(&self, idx: usize) -> AntisymTensor {
        Self::tensor(&self.lower, idx)
    }

    pub fn upper_at(&self, idx: usize) -> AntisymTensor {
        Self::tensor(&self.upper, idx)
    }

    /// Component `F_{ab}` (any order, antisymmetry applied).
    pub fn lower_component(&self, a: usize, b: usize) -> Vec<f64> {
        component(&self.lower, a, b)
    }

    pub fn upper_component(&self, a: usize, b: usize) -> Vec<f64> {
        component(&self.upper, a, b)
    }
}

fn component(parts: &[Vec<f64>; 6], a: usize, b: usize) -> Vec<f64> {
    if a == b {
        return vec![0.0; parts[0].len()];
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let c = PAIRS.iter().position(|&p| p == (lo, hi)).unwrap();
    parts[c].iter().map(|v| sign * v).collect()
}

/// `D^i = F^{i0}`, `H_i = -1/2 eps_ijk F^{jk}`.
pub fn extract_dh(f: &FieldTensor) -> ([Vec<f64>; 3], [Vec<f64>; 3]) {
    let d = [0, 1, 2].map(|i| f.upper[i].iter().map(|v| -v).collect::<Vec<_>>());
    let h = [
        f.upper[5].iter().map(|v| -v).collect(),
        f.upper[4].clone(),
        f.upper[3].iter().map(|v| -v).collect(),
    ];
    (d, h)
}

/// Largest `|D_1 F_23 + D_2 F_31 + D_3 F_12|` relative to the largest single
/// term of the cyclic sum.
pub fn bianchi_residual(f: &FieldTensor) -> f64 {
    let g = &f.grid;
    let t1 = g.central_diff(&f.lower[5], 0);
    let t2 = g.central_diff(&f.lower[4], 1);
    let t3 = g.central_diff(&f.lower[3], 2);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for idx in 0..g.len() {
        worst = worst.max((t1[idx] - t2[idx] + t3[idx]).abs());
        scale = scale.max(t1[idx].abs()).max(t2[idx].abs()).max(t3[idx].abs());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// Spatial inverse-metric contraction `F^{ij} = g^{ik} g^{jl} F_{kl}` for the
/// three components `12, 13, 23`.
#[inline]
fn raise_spatial(m: &CellMetric, f: [f64; 3]) -> [f64; 3] {
    const IJ: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    let mut out = [0.0; 3];
    for (slot, &(i, j)) in out.iter_mut().zip(&IJ) {
        let mut acc = 0.0;
        for (c, &(k, l)) in IJ.iter().enumerate() {
            acc += (m.ginv(i, k) * m.ginv(j, l) - m.ginv(i, l) * m.ginv(j, k)) * f[c];
        }
        *slot = acc;
    }
    out
}

/// The canonical Maxwell system with speed of light `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEquations {
    pub c: f64,
    #[serde(default)]
    pub curl_term: CurlTerm,
}

impl FieldEquations {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            curl_term: CurlTerm::Consistent,
        }
    }

    fn four_pi_c2(&self) -> f64 {
        4.0 * PI * self.c * self.c
    }

    /// `F^{i0} = 4 pi c^2 p^i / sqrt(-g)` at one cell.
    #[inline]
    fn electric_upper(&self, p: &[Vec<f64>; 3], m: &CellMetric, idx: usize) -> [f64; 3] {
        let s = self.four_pi_c2() / m.sqrt_minus_g;
        [s * p[0][idx], s * p[1][idx], s * p[2][idx]]
    }

    /// `F_{i0} = g_00 g_ij F^{j0}` at one cell.
    #[inline]
    fn electric_lower(&self, p: &[Vec<f64>; 3], m: &CellMetric, idx: usize) -> [f64; 3] {
        let e = self.electric_upper(p, m, idx);
        let g00 = m.g00();
        [0, 1, 2].map(|i| g00 * (m.g(i, 0) * e[0] + m.g(i, 1) * e[1] + m.g(i, 2) * e[2]))
    }

    /// `F_12, F_13, F_23` from `F_ij = D_i A_j - D_j A_i`.
    pub fn spatial_field_lower(&self, grid: &GridSpec, a: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
        let n = grid.len();
        let mut f = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (c, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            grid.add_central_diff(&a[j], i, 1.0, &mut f[c]);
            grid.add_central_diff(&a[i], j, -1.0, &mut f[c]);
        }
        f
    }

    /// `F^12, F^13, F^23`, each multiplied by `weight(cell)`.
    fn spatial_field_upper(
        &self,
        grid: &GridSpec,
        metric: &SpacetimeMetric,
        a: &[Vec<f64>; 3],
        weight: impl Fn(&CellMetric) -> f64,
    ) -> [Vec<f64>; 3] {
        let mut f = self.spatial_field_lower(grid, a);
        for idx in 0..grid.len() {
            let m = metric.cell(idx);
            let up = raise_spatial(m, [f[0][idx], f[1][idx], f[2][idx]]);
            let w = weight(m);
            for c in 0..3 {
                f[c][idx] = w * up[c];
            }
        }
        f
    }

    /// `out += scale * Adot_i` with `Adot_i = c D_i A_0 - c F_{i0}`.
    pub fn add_velocities(
        &self,
        grid: &GridSpec,
        metric: &SpacetimeMetric,
        a0: &[f64],
        p: &[Vec<f64>; 3],
        scale: f64,
        out: &mut [Vec<f64>; 3],
    ) {
        let c = self.c;
        for (i, o) in out.iter_mut().enumerate() {
            grid.add_central_diff(a0, i, scale * c, o);
        }
        for idx in 0..grid.len() {
            let fl = self.electric_lower(p, metric.cell(idx), idx);
            for i in 0..3 {
                out[i][idx] -= scale * c * fl[i];
            }
        }
    }

    /// `Adot_i = c A_{0,i} - (4 pi c^3 / sqrt(-g)) g_00 g_ij p^j`.
    pub fn velocities_from_momenta(&self, state: &FieldState, metric: &SpacetimeMetric) -> [Vec<f64>; 3] {
        let n = state.grid.len();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        self.add_velocities(&state.grid, metric, &state.a0, &state.p, 1.0, &mut out);
        out
    }

    /// Inverse of [`velocities_from_momenta`](Self::velocities_from_momenta):
    /// `p^i = (sqrt(-g)/4 pi c^2) g^00 g^ij (A_{0,j} - Adot_j / c)`.
    pub fn momenta_from_velocities(
        &self,
        adot: &[Vec<f64>; 3],
        state: &FieldState,
        metric: &SpacetimeMetric,
    ) -> [Vec<f64>; 3] {
        let grid = &state.grid;
        let n = grid.len();
        let grad = [0, 1, 2].map(|i| grid.central_diff(&state.a0, i));
        let mut p = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for idx in 0..n {
            let m = metric.cell(idx);
            let fl = [0, 1, 2].map(|i| grad[i][idx] - adot[i][idx] / self.c);
            let g00inv = m.inverse[0][0];
            let s = m.sqrt_minus_g / self.four_pi_c2();
            for i in 0..3 {
                let up = g00inv * (m.ginv(i, 0) * fl[0] + m.ginv(i, 1) * fl[1] + m.ginv(i, 2) * fl[2]);
                p[i][idx] = s * up;
            }
        }
        p
    }

    /// `out += scale * pdot^i` at time `t`: the field-tensor divergence minus
    /// `(sqrt(-g)/c^2) j^i`.
    #[allow(clippy::too_many_arguments)]
    pub fn add_force(
        &self,
        grid: &GridSpec,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        a: &[Vec<f64>; 3],
        t: f64,
        scale: f64,
        out: &mut [Vec<f64>; 3],
    ) {
        let c = self.c;
        let (u, coef) = match self.curl_term {
            CurlTerm::Consistent => (
                self.spatial_field_upper(grid, metric, a, |m| m.sqrt_minus_g),
                1.0 / (4.0 * PI * c),
            ),
            CurlTerm::OuterDensity => (self.spatial_field_upper(grid, metric, a, |_| 1.0), 1.0 / (16.0 * PI * c)),
        };
        // sum_j D_j X^{ji}: X^{21} = -X^{12}, X^{31} = -X^{13}, X^{32} = -X^{23}.
        let n = grid.len();
        let mut div = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        grid.add_central_diff(&u[0], 1, -1.0, &mut div[0]);
        grid.add_central_diff(&u[1], 2, -1.0, &mut div[0]);
        grid.add_central_diff(&u[0], 0, 1.0, &mut div[1]);
        grid.add_central_diff(&u[2], 2, -1.0, &mut div[1]);
        grid.add_central_diff(&u[1], 0, 1.0, &mut div[2]);
        grid.add_central_diff(&u[2], 1, 1.0, &mut div[2]);
        let outer = self.curl_term == CurlTerm::OuterDensity;
        let has_current = source.has_current();
        let mut j = [Vec::new(), Vec::new(), Vec::new()];
        if has_current {
            j = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            source.j_into(t, &mut j);
        }
        for idx in 0..n {
            let sg = metric.cell(idx).sqrt_minus_g;
            let w = if outer { coef * sg } else { coef };
            for i in 0..3 {
                let mut v = w * div[i][idx];
                if has_current {
                    v -= sg * j[i][idx] / (c * c);
                }
                out[i][idx] += scale * v;
            }
        }
    }

    /// `out += scale * pdot^0` with `pdot^0 = c D_i p^i - sqrt(-g) rho / c`.
    #[allow(clippy::too_many_arguments)]
    pub fn add_p0_rate(
        &self,
        grid: &GridSpec,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        p: &[Vec<f64>; 3],
        t: f64,
        scale: f64,
        out: &mut [f64],
    ) {
        for (i, comp) in p.iter().enumerate() {
            grid.add_central_diff(comp, i, scale * self.c, out);
        }
        if !source.is_empty() {
            for (idx, o) in out.iter_mut().enumerate() {
                *o -= scale * metric.cell(idx).sqrt_minus_g * source.rho_at(t, idx) / self.c;
            }
        }
    }

    /// All four right-hand sides at `state.time`; `lambda` is the gauge
    /// multiplier field (`Adot_0 = lambda`).
    pub fn rhs(
        &self,
        state: &FieldState,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        lambda: &[f64],
    ) -> Rhs {
        let grid = &state.grid;
        let n = grid.len();
        let mut a = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        self.add_velocities(grid, metric, &state.a0, &state.p, 1.0, &mut a);
        let mut p = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        self.add_force(grid, metric, source, &state.a, state.time, 1.0, &mut p);
        let mut p0 = vec![0.0; n];
        self.add_p0_rate(grid, metric, source, &state.p, state.time, 1.0, &mut p0);
        Rhs {
            a0: lambda.to_vec(),
            a,
            p0,
            p,
        }
    }

    /// Full lower and raised field tensor, with `F_{i0}` reconstructed from
    /// the momenta.
    pub fn field_tensor(&self, state: &FieldState, metric: &SpacetimeMetric) -> FieldTensor {
        let grid = state.grid;
        let n = grid.len();
        let fs = self.spatial_field_lower(&grid, &state.a);
        let mut lower: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
        let mut upper: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
        for idx in 0..n {
            let m = metric.cell(idx);
            let fl = self.electric_lower(&state.p, m, idx);
            let mut t = AntisymTensor::zero();
            for i in 0..3 {
                t.set(i + 1, 0, fl[i]);
            }
            t.set(1, 2, fs[0][idx]);
            t.set(1, 3, fs[1][idx]);
            t.set(2, 3, fs[2][idx]);
            let up = metric.raise_antisym(idx, &t);
            for (c, &(a, b)) in PAIRS.iter().enumerate() {
                lower[c][idx] = t.get(a, b);
                upper[c][idx] = up.get(a, b);
            }
        }
        FieldTensor { grid, lower, upper }
    }

    /// `D^i` and `H_i` without materialising the full tensor.
    pub fn d_and_h(&self, state: &FieldState, metric: &SpacetimeMetric) -> ([Vec<f64>; 3], [Vec<f64>; 3]) {
        let grid = &state.grid;
        let n = grid.len();
        let mut d = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for idx in 0..n {
            let e = self.electric_upper(&state.p, metric.cell(idx), idx);
            for i in 0..3 {
                d[i][idx] = e[i];
            }
        }
        let [u12, u13, u23] = self.spatial_field_upper(grid, metric, &state.a, |_| 1.0);
        let h = [u23.into_iter().map(|v| -v).collect(), u13, u12.into_iter().map(|v| -v).collect()];
        (d, h)
    }

    /// `D^i` alone.
    pub fn displacement(&self, state: &FieldState, metric: &SpacetimeMetric) -> [Vec<f64>; 3] {
        let n = state.grid.len();
        let mut d = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for idx in 0..n {
            let e = self.electric_upper(&state.p, metric.cell(idx), idx);
            for i in 0..3 {
                d[i][idx] = e[i];
            }
        }
        d
    }

    /// `(1/sqrt(3g)) D_i(sqrt(3g) D^i) - 4 pi rho` per cell.
    pub fn gauss_residual(&self, state: &FieldState, metric: &SpacetimeMetric, source: &CurrentSource) -> Vec<f64> {
        let grid = &state.grid;
        let n = grid.len();
        let d = self.displacement(state, metric);
        let w = [0, 1, 2].map(|i| {
            (0..n)
                .map(|idx| metric.cell(idx).sqrt_spatial_det * d[i][idx])
                .collect::<Vec<_>>()
        });
        let mut r = grid.divergence([&w[0], &w[1], &w[2]]);
        for (idx, v) in r.iter_mut().enumerate() {
            *v /= metric.cell(idx).sqrt_spatial_det;
            if !source.is_empty() {
                *v -= 4.0 * PI * source.rho_at(state.time, idx);
            }
        }
        r
    }

    /// `(1/sqrt(3g)) eps_ijk D_j(sqrt(3g) H_k) - (1/c) Ddot^i - (4 pi/c) j^i`
    /// per cell and component; `d_dot` is the measured time derivative of `D`.
    pub fn ampere_residual(
        &self,
        state: &FieldState,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        d_dot: &[Vec<f64>; 3],
    ) -> [Vec<f64>; 3] {
        let grid = &state.grid;
        let n = grid.len();
        let (_, h) = self.d_and_h(state, metric);
        let w = [0, 1, 2].map(|k| {
            (0..n)
                .map(|idx| metric.cell(idx).sqrt_spatial_det * h[k][idx])
                .collect::<Vec<_>>()
        });
        let mut r = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            grid.add_central_diff(&w[k], j, 1.0, &mut r[i]);
            grid.add_central_diff(&w[j], k, -1.0, &mut r[i]);
        }
        let c = self.c;
        for idx in 0..n {
            let sdet = metric.cell(idx).sqrt_spatial_det;
            for i in 0..3 {
                let mut v = r[i][idx] / sdet - d_dot[i][idx] / c;
                if !source.is_empty() {
                    v -= 4.0 * PI * source.j_at(state.time, i, idx) / c;
                }
                r[i][idx] = v;
            }
        }
        r
    }

    /// Hamiltonian density summed over the grid times the cell volume:
    /// `c p^i A_{0,i} - (2 pi c^3 g_00 / sqrt(-g)) p^i g_ij p^j
    ///  + (sqrt(-g)/16 pi c) F_ij F^ij + (sqrt(-g)/c^2)(A_0 c rho + A_i j^i) + lambda p^0`.
    pub fn hamiltonian_total(
        &self,
        state: &FieldState,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        lambda: Option<&[f64]>,
    ) -> f64 {
        let grid = &state.grid;
        let n = grid.len();
        let c = self.c;
        let fs = self.spatial_field_lower(grid, &state.a);
        let grad = [0, 1, 2].map(|i| grid.central_diff(&state.a0, i));
        let t = state.time;
        let mut total = 0.0;
        for idx in 0..n {
            let m = metric.cell(idx);
            let p = [state.p[0][idx], state.p[1][idx], state.p[2][idx]];
            let mut h = c * (p[0] * grad[0][idx] + p[1] * grad[1][idx] + p[2] * grad[2][idx]);
            let mut pgp = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    pgp += p[i] * m.g(i, j) * p[j];
                }
            }
            h -= 2.0 * PI * c * c * c * m.g00() / m.sqrt_minus_g * pgp;
            let fl = [fs[0][idx], fs[1][idx], fs[2][idx]];
            let fu = raise_spatial(m, fl);
            h += m.sqrt_minus_g / (16.0 * PI * c) * 2.0 * (fl[0] * fu[0] + fl[1] * fu[1] + fl[2] * fu[2]);
            if !source.is_empty() {
                let mut aj = state.a0[idx] * c * source.rho_at(t, idx);
                for i in 0..3 {
                    aj += state.a[i][idx] * source.j_at(t, i, idx);
                }
                h += m.sqrt_minus_g / (c * c) * aj;
            }
            if let Some(l) = lambda {
                h += l[idx] * state.p0[idx];
            }
            total += h;
        }
        total * grid.cell_volume()
    }

    /// `-(sqrt(-g)/16 pi c) F_ab F^ab - (sqrt(-g)/c^2) A_a j^a` at one cell,
    /// with `F_{i0}` taken from the momenta (equivalently from the velocities
    /// returned by `velocities_from_momenta`).
    pub fn em_lagrangian_density(
        &self,
        state: &FieldState,
        metric: &SpacetimeMetric,
        source: &CurrentSource,
        idx: usize,
    ) -> f64 {
        let grid = &state.grid;
        let c = self.c;
        let m = metric.cell(idx);
        let el = self.electric_lower(&state.p, m, idx);
        let eu = self.electric_upper(&state.p, m, idx);
        let d = |f: &[f64], axis| grid.diff_at(f, axis, idx);
        let a = &state.a;
        let fl = [
            d(&a[1], 0) - d(&a[0], 1),
            d(&a[2], 0) - d(&a[0], 2),
            d(&a[2], 1) - d(&a[1], 2),
        ];
        let fu = raise_spatial(m, fl);
        let ff = 2.0 * (el[0] * eu[0] + el[1] * eu[1] + el[2] * eu[2])
            + 2.0 * (fl[0] * fu[0] + fl[1] * fu[1] + fl[2] * fu[2]);
        let mut l = -m.sqrt_minus_g / (16.0 * PI * c) * ff;
        if !source.is_empty() {
            let t = state.time;
            let mut aj = state.a0[idx] * c * source.rho_at(t, idx);
            for i in 0..3 {
                aj += state.a[i][idx] * source.j_at(t, i, idx);
            }
            l -= m.sqrt_minus_g / (c * c) * aj;
        }
        l
    }
}
