use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// `C(ρ) = (2ρ+1)! / ((ρ!)² 2^{2ρ+1})`, evaluated as `½ ∏_{j≤ρ} (2j+1)/(2j)`.
pub fn norm_const(rho: u64) -> f64 {
    (1..=rho).fold(0.5, |acc, j| acc * (2 * j + 1) as f64 / (2 * j) as f64)
}

/// `1 / B(½, ρ+1)`.
pub fn norm_const_beta(rho: u64) -> f64 {
    (-ln_beta(0.5, rho as f64 + 1.0)).exp()
}

pub fn limit_density(rho: u64, t: f64) -> f64 {
    if !(-1.0..=1.0).contains(&t) {
        return 0.0;
    }
    norm_const(rho) * (1.0 - t * t).powi(rho as i32)
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Start from a few panels so narrow peaks are not missed.
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            adapt(
                &f,
                lo,
                hi,
                flo,
                fmid,
                fhi,
                simpson(flo, fmid, fhi, lo, hi),
                tol / panels as f64,
                50,
            )
        })
        .sum()
}

/// `C(ρ) ∫_{-1}^{x} (1 - t²)^ρ dt`.
pub fn limit_cdf(rho: u64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    let r = rho as i32;
    let half = norm_const(rho) * integrate(|t| (1.0 - t * t).powi(r), 0.0, x.abs(), 1e-12);
    Ok(if x >= 0.0 { 0.5 + half } else { 0.5 - half }.clamp(0.0, 1.0))
}

/// `E[|X|^j]` under the limit density: `B((j+1)/2, ρ+1) / B(½, ρ+1)`.
pub fn abs_moment(rho: u64, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidParameter("moment order must be >= 1".into()));
    }
    let a = (j as f64 + 1.0) / 2.0;
    let r = rho as f64;
    Ok((ln_gamma(a) + ln_gamma(r + 1.5) - ln_gamma(0.5) - ln_gamma(a + r + 1.0)).exp())
}
