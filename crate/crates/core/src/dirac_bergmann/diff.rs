//! Central finite differences.
//!
//! First derivatives use `h = cbrt(eps) * max(1, |x|)`. Second and nested
//! derivatives use `h = eps^(1/4) * max(1, |x|)`, the step that balances
//! truncation against roundoff for a second difference.

use crate::error::{Error, Result};

pub fn step_first(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

pub fn step_second(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

pub(crate) fn finite(v: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::EvaluationFailure(what()))
    }
}

/// `(f(x + h e_i) - f(x - h e_i)) / (2h)`, with the actual representable
/// spacing used as the denominator.
pub fn partial<F>(mut f: F, x: &[f64], i: usize, h: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let xp = x[i] + h;
    let xm = x[i] - h;
    probe[i] = xp;
    let fp = f(&probe)?;
    probe[i] = xm;
    let fm = f(&probe)?;
    Ok((fp - fm) / (xp - xm))
}

/// Gradient with the first-derivative step rule.
pub fn gradient<F>(mut f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    (0..x.len())
        .map(|i| partial(&mut f, x, i, step_first(x[i])))
        .collect()
}

/// Gradient with the nested (second-derivative) step rule, for functions that
/// are themselves built from finite differences.
pub fn gradient_nested<F>(mut f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    (0..x.len())
        .map(|i| partial(&mut f, x, i, step_second(x[i])))
        .collect()
}

/// Second derivative `d^2 f / dx dy` of `f(x, y)`; `x` and `y` may be the same
/// vector (pass `same = true`) or two independent argument blocks.
pub(crate) fn second_partial<F>(
    mut f: F,
    x: &[f64],
    y: &[f64],
    i: usize,
    j: usize,
    same: bool,
) -> Result<f64>
where
    F: FnMut(&[f64], &[f64]) -> Result<f64>,
{
    let hi = step_second(x[i]);
    if same && i == j {
        let mut px = x.to_vec();
        let f0 = f(x, y)?;
        let xp = x[i] + hi;
        let xm = x[i] - hi;
        px[i] = xp;
        let fp = f(&px, y)?;
        px[i] = xm;
        let fm = f(&px, y)?;
        let h = 0.5 * (xp - xm);
        return Ok((fp - 2.0 * f0 + fm) / (h * h));
    }
    let hj = step_second(y[j]);
    let eval = |f: &mut F, si: f64, sj: f64| -> Result<f64> {
        if same {
            let mut px = x.to_vec();
            px[i] += si * hi;
            px[j] += sj * hj;
            f(&px, y)
        } else {
            let mut px = x.to_vec();
            let mut py = y.to_vec();
            px[i] += si * hi;
            py[j] += sj * hj;
            f(&px, &py)
        }
    };
    let fpp = eval(&mut f, 1.0, 1.0)?;
    let fpm = eval(&mut f, 1.0, -1.0)?;
    let fmp = eval(&mut f, -1.0, 1.0)?;
    let fmm = eval(&mut f, -1.0, -1.0)?;
    Ok((fpp - fpm - fmp + fmm) / (4.0 * hi * hj))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_polynomial() {
        let f = |x: &[f64]| Ok(x[0] * x[0] * x[1] + 3.0 * x[1]);
        let g = gradient(f, &[2.0, -1.5]).unwrap();
        assert!((g[0] - 2.0 * 2.0 * -1.5).abs() < 1e-9);
        assert!((g[1] - (4.0 + 3.0)).abs() < 1e-9);
    }

    #[test]
    fn second_partial_of_quadratic_is_exact() {
        let f = |x: &[f64], y: &[f64]| Ok(x[0] * y[1] + 0.5 * x[0] * x[0]);
        let v = second_partial(f, &[0.3, 0.1], &[1.0, 2.0], 0, 1, false).unwrap();
        assert!((v - 1.0).abs() < 1e-7);
        let d = second_partial(f, &[0.3, 0.1], &[1.0, 2.0], 0, 0, true).unwrap();
        assert!((d - 1.0).abs() < 1e-7);
    }

    #[test]
    fn non_finite_is_reported() {
        let f = |x: &[f64]| finite(1.0 / (x[0] - x[0]), || "probe".into());
        assert!(matches!(gradient(f, &[1.0]), Err(Error::EvaluationFailure(_))));
    }
}
