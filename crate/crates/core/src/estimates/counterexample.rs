//! Blow-up of the weightless L^q norm of the singular channel for q ≥ 4.

use crate::eigenbasis::ConeParams;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{oscillatory_nodes, GaussLegendre};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// The bump χ(ρ) = exp(1 − 1/(1 − x²)), x = 2ρ − 3: smooth, supported in
/// [1, 2], values in [0, 1].
pub fn bump(rho: f64) -> f64 {
    let x = 2.0 * rho - 3.0;
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Outer radius of the norm integral beyond |t|.
const OUTER: f64 = 40.0;

/// ρ-quadrature for ∫_1^2 e^{itρ} (·) χ(ρ) ρ^{½} dρ at radius r.
fn rho_nodes(t: f64, r: f64, rule: &GaussLegendre) -> Vec<(f64, Complex64)> {
    oscillatory_nodes(1.0, 2.0, t.abs() + r + 1.0, TAU, rule)
        .into_iter()
        .map(|(rho, w)| (rho, Complex64::from_polar(w * bump(rho) * rho.sqrt(), t * rho)))
        .collect()
}

/// u(t, r) = ∫ e^{itρ} J_{−½}(rρ) χ(ρ) ρ dρ, with J_{−½}(x) = (2/πx)^{½} cos x.
pub fn singular_wave(t: f64, r: f64) -> Complex64 {
    let rule = GaussLegendre::new(16);
    let s: Complex64 = rho_nodes(t, r, &rule).iter().map(|&(rho, c)| c * (r * rho).cos()).sum();
    s * (2.0 / (PI * r)).sqrt()
}

/// C(t) = ∫ e^{itρ} χ(ρ) ρ^{½} dρ, so that u ≈ (2/πr)^{½} C(t) near r = 0.
fn origin_amplitude(t: f64) -> Complex64 {
    let rule = GaussLegendre::new(16);
    rho_nodes(t, 0.0, &rule).iter().map(|&(_, c)| c).sum()
}

/// 2πσ ∫_a^b |u(t, r)|^q r dr by Gauss-Legendre in ln r, on panels of at most
/// half a unit in ln r and at most one unit in r.
fn radial_piece(t: f64, q: f64, a: f64, b: f64, rule: &GaussLegendre) -> f64 {
    let mut edges = vec![a];
    let mut r = a;
    while r < b {
        let next = (r * 0.5f64.exp()).min(r + 1.0).min(b);
        edges.push(next);
        r = next;
    }
    edges
        .windows(2)
        .map(|e| {
            rule.mapped(e[0].ln(), e[1].ln())
                .map(|(s, w)| {
                    let r = s.exp();
                    w * singular_wave(t, r).norm().powf(q) * r * r
                })
                .sum::<f64>()
        })
        .sum()
}

/// Norms at one time for every inner cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSeries {
    pub t: f64,
    pub epsilons: Vec<f64>,
    /// (2πσ ∫_ε^R |u|^q r dr)^{1/q}.
    pub norms: Vec<f64>,
    /// q = 4: growth of N⁴ per unit of log(1/ε) between consecutive cutoffs,
    /// divided by the predicted 2πσ (4/π²)|C(t)|⁴.
    pub log_rate_ratios: Vec<f64>,
    /// q > 4: slope of log N against log(1/ε).
    pub fitted_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub q: f64,
    pub sigma: f64,
    /// (q − 4)/(2q); zero at q = 4, where the growth is logarithmic.
    pub predicted_exponent: f64,
    pub series: Vec<CounterexampleSeries>,
}

impl CounterexampleReport {
    /// Largest |ratio − 1| (q = 4) or |fitted − predicted| (q > 4) over all
    /// series.
    pub fn worst_deviation(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| {
                let a = s.log_rate_ratios.iter().map(|r| (r - 1.0).abs());
                let b = s.fitted_exponent.map(|e| (e - self.predicted_exponent).abs());
                a.chain(b)
            })
            .fold(0.0, f64::max)
    }
}

/// Inner-truncated L^q norms of the evolution of f = (H_{−½}χ, 0) from the
/// J_{−½} channel, at each time and each cutoff ε: the norm integral is
/// restricted to [ε, R], R = 40 + |t|, while the data stays fixed.
pub fn counterexample_run(cone: ConeParams, q: f64, inner_cutoffs: &[f64], times: &[f64]) -> Result<CounterexampleReport> {
    if q.is_nan() || q < 4.0 {
        return Err(Error::Regime(format!("the counterexample needs q >= 4 (got q = {q}); for q < 4 the norm is finite")));
    }
    if q.is_infinite() {
        return Err(invalid("q", "must be finite"));
    }
    if inner_cutoffs.len() < 2 {
        return Err(invalid("inner_cutoffs", "need at least two cutoffs"));
    }
    if inner_cutoffs.windows(2).any(|w| !(w[1] < w[0])) || inner_cutoffs.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(invalid("inner_cutoffs", "must be strictly decreasing and lie in (0, 1)"));
    }
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "need at least one finite time"));
    }
    let rule = GaussLegendre::new(16);
    let scale = TAU * cone.sigma();
    let series = times
        .iter()
        .map(|&t| {
            let outer = radial_piece(t, q, 1.0, OUTER + t.abs(), &rule);
            let mut acc = outer;
            let mut upper = 1.0;
            let mut powers = Vec::with_capacity(inner_cutoffs.len());
            for &eps in inner_cutoffs {
                acc += radial_piece(t, q, eps, upper, &rule);
                upper = eps;
                powers.push(scale * acc);
            }
            let norms: Vec<f64> = powers.iter().map(|p| p.powf(1.0 / q)).collect();
            let (log_rate_ratios, fitted_exponent) = if q == 4.0 {
                let c = origin_amplitude(t).norm();
                let predicted = scale * 4.0 / (PI * PI) * c.powi(4);
                let ratios = (1..powers.len())
                    .map(|i| (powers[i] - powers[i - 1]) / (inner_cutoffs[i - 1] / inner_cutoffs[i]).ln() / predicted)
                    .collect();
                (ratios, None)
            } else {
                let x: Vec<f64> = inner_cutoffs.iter().map(|e| -e.ln()).collect();
                let y: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
                (Vec::new(), Some(slope(&x, &y)))
            };
            CounterexampleSeries { t, epsilons: inner_cutoffs.to_vec(), norms, log_rate_ratios, fitted_exponent }
        })
        .collect();
    Ok(CounterexampleReport { q, sigma: cone.sigma(), predicted_exponent: (q - 4.0) / (2.0 * q), series })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
