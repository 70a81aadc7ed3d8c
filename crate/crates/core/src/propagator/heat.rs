//! Heat and Schrödinger kernels of H = D² on the cone.
//!
//! The heat kernel is summed two ways: as the angular series of modified
//! Bessel functions, and in closed form as a finite sum over geodesic images
//! plus a background integral against B_±.

use crate::eigenbasis::ConeParams;
use crate::error::{invalid, Result};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{self, Order};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Which component of H: orders ν₊(k) = |k/σ + ½| or ν₋(k) = |k/σ − ½|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSign {
    Plus,
    Minus,
}

impl ChannelSign {
    pub fn nu(self, cone: ConeParams, k: i64) -> f64 {
        match self {
            ChannelSign::Plus => cone.nu_plus(k),
            ChannelSign::Minus => cone.nu_minus(k),
        }
    }

    fn factor(self) -> f64 {
        match self {
            ChannelSign::Plus => 1.0,
            ChannelSign::Minus => -1.0,
        }
    }
}

/// A point (r, θ) of the cone, θ ∈ [−πσ, πσ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub theta: f64,
}

impl ConePoint {
    pub fn new(r: f64, theta: f64) -> Self {
        ConePoint { r, theta }
    }
}

/// Geodesic distance on the cone of angle 2πσ (straight lines through the
/// apex once the angular gap exceeds π).
pub fn cone_distance(cone: ConeParams, x: ConePoint, y: ConePoint) -> f64 {
    let gap = angular_gap(cone, x.theta - y.theta);
    let c = if gap >= PI { -1.0 } else { gap.cos() };
    (x.r * x.r + y.r * y.r - 2.0 * x.r * y.r * c).max(0.0).sqrt()
}

/// min_j |α + 2πσj|.
fn angular_gap(cone: ConeParams, alpha: f64) -> f64 {
    let period = TAU * cone.sigma();
    let a = alpha.rem_euclid(period);
    a.min(period - a)
}

/// One geodesic image β = α + 2πσj with |β| ≤ π and its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Image {
    pub j: i64,
    pub beta: f64,
    pub weight: f64,
}

/// Images of the angular offset α = θ − ω with |α + 2πσj| ≤ π; those on
/// the boundary |β| = π carry weight ½.
pub fn image_set(cone: ConeParams, alpha: f64) -> Vec<Image> {
    let period = TAU * cone.sigma();
    let lo = ((-PI - alpha) / period).ceil() as i64;
    let hi = ((PI - alpha) / period).floor() as i64;
    (lo..=hi)
        .map(|j| {
            let beta = alpha + period * j as f64;
            let weight = if (beta.abs() - PI).abs() <= 1e-13 * PI { 0.5 } else { 1.0 };
            Image { j, beta, weight }
        })
        .filter(|im| im.beta.abs() <= PI * (1.0 + 1e-13))
        .collect()
}

/// Series value with truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub k_trunc: usize,
    /// Magnitude of the last retained term relative to the sum.
    pub last_term: f64,
}

const MAX_TERMS: usize = 400;

fn check_heat_args(t: f64, x: ConePoint, y: ConePoint) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("t", format!("heat kernel needs t > 0, got {t}")));
    }
    for (name, p) in [("x.r", x), ("y.r", y)] {
        if !(p.r > 0.0) || !p.r.is_finite() {
            return Err(invalid(name, format!("must be positive and finite, got {}", p.r)));
        }
        if !p.theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
    }
    Ok(())
}

/// (1/2πσ)(e^{−(r²+s²)/4t}/2t) Σ_{|k|≤K} e^{−ik(θ−ω)/σ} I_{ν_±(k)}(rs/2t).
///
/// With `k_trunc = None` the series stops at the first K whose terms fall
/// below 1e-16 of the running sum (at most 400).
pub fn heat_kernel_series(
    cone: ConeParams,
    sign: ChannelSign,
    t: f64,
    x: ConePoint,
    y: ConePoint,
    k_trunc: Option<usize>,
) -> Result<SeriesValue> {
    check_heat_args(t, x, y)?;
    if k_trunc == Some(0) {
        return Err(invalid("k_trunc", "must be at least 1"));
    }
    let sigma = cone.sigma();
    let z = x.r * y.r / (2.0 * t);
    let alpha = x.theta - y.theta;
    let term = |k: i64| -> Result<Complex64> {
        let i = specfun::bessel_i_scaled(Order::new(sign.nu(cone, k))?, z)?;
        Ok(Complex64::from_polar(i, -(k as f64) * alpha / sigma))
    };
    let mut sum = term(0)?;
    let mut k_used = 0;
    let mut last = 0.0;
    let cap = k_trunc.unwrap_or(MAX_TERMS);
    for m in 1..=cap as i64 {
        let (a, b) = (term(m)?, term(-m)?);
        sum += a + b;
        k_used = m as usize;
        last = a.norm().max(b.norm());
        if k_trunc.is_none() && last < 1e-16 * sum.norm() {
            break;
        }
    }
    let rel_last = if sum.norm() > 0.0 { last / sum.norm() } else { 0.0 };
    if rel_last > 1e-14 {
        log::warn!("heat kernel series truncated at K = {k_used} with last term {rel_last:.2e} of the sum");
    }
    let pref = (-(x.r - y.r).powi(2) / (4.0 * t)).exp() / (2.0 * t) / (TAU * sigma);
    Ok(SeriesValue { value: sum * pref, k_trunc: k_used, last_term: rel_last })
}

/// One of the two geometric sums in G: for β ∈ {α ± π},
/// ½[e^{−τ/2}/(1 − q) − e^{τ/2} q̄/(1 − q̄)], q = e^{−(τ + iβ)/σ},
/// over the common real denominator (1 − E)² + 4E sin²(β/2σ), E = e^{−τ/σ}.
fn background_term(tau: f64, beta: f64, sigma: f64) -> Complex64 {
    let e = (-tau / sigma).exp();
    let one_minus_e = -(-tau / sigma).exp_m1();
    let sh = (beta / (2.0 * sigma)).sin();
    let sh2 = sh * sh;
    let ch = (0.5 * tau).cosh();
    let gap = -(-0.5 * tau).exp() * (tau * (1.0 - 1.0 / sigma)).exp_m1();
    let den = one_minus_e * one_minus_e + 4.0 * e * sh2;
    let re = one_minus_e * gap + 4.0 * ch * e * sh2;
    let im = -2.0 * ch * e * (beta / sigma).sin();
    Complex64::new(re, im) * (0.5 / den)
}

/// Σ_k e^{−ikα/σ} sin(ν_k π) e^{−ν_k τ} for the ν₊ orders.
fn background_sum(tau: f64, alpha: f64, sigma: f64) -> Complex64 {
    background_term(tau, alpha + PI, sigma) + background_term(tau, alpha - PI, sigma)
}

/// B_±(τ, θ, ω, σ): the background density minus its e^{−τ/2} part.
pub fn b_pm(tau: f64, theta: f64, omega: f64, cone: ConeParams, sign: ChannelSign) -> Result<Complex64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("must be positive and finite, got {tau}")));
    }
    let alpha = sign.factor() * (theta - omega);
    Ok(background_sum(tau, alpha, cone.sigma()) - (-0.5 * tau).exp())
}

/// Heat kernel from the image sum and the background integral:
/// pref·[(1/2π) Σ_A w e^{±iβ/2} e^{z cos β} − (1/2π²σ) ∫_0^∞ e^{−z cosh τ}(e^{−τ/2} + B_±) dτ].
pub fn heat_kernel_closed(cone: ConeParams, sign: ChannelSign, t: f64, x: ConePoint, y: ConePoint) -> Result<Complex64> {
    check_heat_args(t, x, y)?;
    let sigma = cone.sigma();
    let (r, s) = (x.r, y.r);
    let z = r * s / (2.0 * t);
    let alpha = sign.factor() * (x.theta - y.theta);
    let base = (r * r + s * s) / (4.0 * t);

    let geometric: Complex64 = image_set(cone, alpha)
        .iter()
        .map(|im| Complex64::from_polar(im.weight * (z * im.beta.cos() - base).exp(), 0.5 * im.beta))
        .sum::<Complex64>()
        / TAU;

    // Near-poles of the background sit at τ ~ σ·dist((α ± π)/σ, 2πℤ).
    let tau_max = (60.0 / z).max(1.0).acosh() + 1.0;
    let mut breaks = vec![0.0];
    for b in [alpha + PI, alpha - PI] {
        let u = (b / sigma).rem_euclid(TAU);
        let d = sigma * u.min(TAU - u);
        for f in [1.0, 10.0, 100.0] {
            if d * f > 1e-12 && d * f < tau_max {
                breaks.push(d * f);
            }
        }
    }
    breaks.push(tau_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integral = integrate_adaptive(
        |tau| background_sum(tau, alpha, sigma) * (-(base + z * tau.cosh())).exp(),
        &breaks,
        1e-12,
        0.0,
        2000,
    );
    let background = integral.value / (2.0 * PI * PI * sigma);
    Ok((geometric - background) / (2.0 * t))
}

/// Heat kernel of mode k: e^{−(r²+s²)/4t}/(2t) · I_ν(rs/2t), ν = ν_±(k),
/// evaluated through the scaled I_ν to avoid overflow.
pub fn heat_mode_kernel(k: i64, cone: ConeParams, sign: ChannelSign, t: f64, r: f64, s: f64) -> Result<f64> {
    check_heat_args(t, ConePoint::new(r, 0.0), ConePoint::new(s, 0.0))?;
    let nu = Order::new(sign.nu(cone, k))?;
    let i = specfun::bessel_i_scaled(nu, r * s / (2.0 * t))?;
    Ok(i * (-(r - s).powi(2) / (4.0 * t)).exp() / (2.0 * t))
}

/// Schrödinger kernel of mode k:
/// e^{−(r²+s²)/(4it)}/(2it) · I_ν(rs/(2it)), ν = ν_±(k).
pub fn schrodinger_mode_kernel(k: i64, cone: ConeParams, sign: ChannelSign, t: f64, r: f64, s: f64) -> Result<Complex64> {
    if t == 0.0 || !t.is_finite() {
        return Err(invalid("t", format!("Schrödinger kernel needs t ≠ 0, got {t}")));
    }
    for (name, v) in [("r", r), ("s", s)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be positive and finite, got {v}")));
        }
    }
    if t < 0.0 {
        return Ok(schrodinger_mode_kernel(k, cone, sign, -t, r, s)?.conj());
    }
    let nu = Order::new(sign.nu(cone, k))?;
    let i = specfun::bessel_i(nu, Complex64::new(0.0, -r * s / (2.0 * t)))?;
    let phase = Complex64::from_polar(1.0, (r * r + s * s) / (4.0 * t));
    Ok(phase * i / Complex64::new(0.0, 2.0 * t))
}
