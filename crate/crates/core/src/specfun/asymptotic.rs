//! Large-argument expansions. Each returns `None` when the expansion cannot
//! reach full double precision at the requested (ν, x).

use std::f64::consts::PI;

/// Hankel expansion J_ν(x) ~ √(2/πx)(P cos χ − Q sin χ), χ = x − (ν/2 + ¼)π.
pub(super) fn j_hankel(v: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * v * v;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut converged = false;
    for k in 1..400 {
        let odd = (2 * k - 1) as f64;
        let ratio = (mu - odd * odd) / (8.0 * k as f64 * x);
        if odd * odd > mu && ratio.abs() >= 1.0 {
            return None;
        }
        term *= ratio;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() > 10.0 {
            return None;
        }
        if term == 0.0 || term.abs() < 1e-17 * (p.abs() + q.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let phi = (0.5 * v + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// e^{−x} I_ν(x) ~ (2πx)^{−½} Σ_k (−1)^k a_k(ν) x^{−k}.
pub(super) fn i_scaled_large(v: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * v * v;
    let mut sum = 1.0;
    let mut term: f64 = 1.0;
    for k in 1..400 {
        let odd = (2 * k - 1) as f64;
        let ratio = -(mu - odd * odd) / (8.0 * k as f64 * x);
        if odd * odd > mu && ratio.abs() >= 1.0 {
            return None;
        }
        term *= ratio;
        sum += term;
        if term.abs() > 10.0 {
            return None;
        }
        if term == 0.0 || term.abs() < 1e-17 * sum.abs() {
            return Some(sum / (2.0 * PI * x).sqrt());
        }
    }
    None
}
