//! Power series about the origin.

use statrs::function::gamma::{gamma, ln_gamma};

/// (x/2)^ν / Γ(ν+1), computed through logarithms for large ν.
fn leading(v: f64, half: f64) -> f64 {
    if v == 0.0 {
        1.0
    } else if v < 120.0 {
        half.powf(v) / gamma(v + 1.0)
    } else {
        (v * half.ln() - ln_gamma(v + 1.0)).exp()
    }
}

/// J_ν(x) = (x/2)^ν Σ_m (−x²/4)^m / (m! Γ(ν+m+1)).
pub(super) fn j_series(v: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..1000 {
        let m = m as f64;
        term *= -q / (m * (v + m));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    leading(v, half) * sum
}

/// e^{−x} I_ν(x) from the all-positive series, with running rescaling so
/// that large x neither overflows nor loses terms.
pub(super) fn i_series_scaled(v: f64, x: f64) -> f64 {
    const BIG: f64 = 1e250;
    let half = 0.5 * x;
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for m in 1..20_000 {
        let m = m as f64;
        term *= q / (m * (v + m));
        sum += term;
        if sum > BIG {
            sum /= BIG;
            term /= BIG;
            log_scale += BIG.ln();
        }
        if term < 1e-17 * sum && m > half {
            break;
        }
    }
    let log_lead = if v == 0.0 { 0.0 } else { v * half.ln() - ln_gamma(v + 1.0) };
    (log_lead - x + log_scale + sum.ln()).exp()
}
