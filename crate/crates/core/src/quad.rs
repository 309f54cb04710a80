//! Adaptive Simpson quadrature for smooth (or piecewise smooth) 1-D integrands.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not converge on [{lo}, {hi}]: residual {residual:e} exceeds tolerance {tolerance:e}")]
pub struct QuadratureError {
    pub lo: f64,
    pub hi: f64,
    pub residual: f64,
    pub tolerance: f64,
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[lo, hi]`.
///
/// The interval is first cut into `panels` equal pieces, each refined
/// adaptively. Kinks (e.g. where two densities cross) only cost extra
/// refinement inside the panel that contains them.
pub fn integrate<F>(f: F, lo: f64, hi: f64, panels: usize, tolerance: f64) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    assert!(panels > 0 && hi > lo);
    let width = (hi - lo) / panels as f64;
    let panel_tol = tolerance / panels as f64;
    let mut total = 0.0;
    let mut residual = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let b = if p + 1 == panels { hi } else { a + width };
        let (value, err) = panel(&f, a, b, panel_tol);
        total += value;
        residual += err;
    }
    if residual > tolerance {
        return Err(QuadratureError { lo, hi, residual, tolerance });
    }
    Ok(total)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        // Richardson correction; the residual is the uncorrected difference
        let residual = if depth == 0 { delta.abs() / 15.0 } else { 0.0 };
        return (left + right + delta / 15.0, residual);
    }
    let (lv, le) = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (rv, re) = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (lv + rv, le + re)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 4, 1e-12).unwrap();
        // x^4/4 - x^2 + x on [-1, 3] = (81/4 - 9 + 3) - (1/4 - 1 - 1) = 16
        assert!((v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_converges() {
        let v = integrate(|x: f64| x.abs(), -1.0, 2.0, 3, 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-10);
    }

    #[test]
    fn gaussian_mass() {
        let v = integrate(
            |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            -10.0,
            10.0,
            20,
            1e-13,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }
}
