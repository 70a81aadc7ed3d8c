//! Decay fits for frequency-localized evolutions.

use super::Weight;
use crate::eigenbasis::{angular_eigen, mode_channels, project, ConeParams, ModeChannels, ModeSpectrum, Projection, SpinorProfile};
use crate::error::{invalid, Error, Result};
use crate::extension::ExtensionParam;
use crate::grid::{AngularGrid, RadialGrid};
use crate::hankel::PowerTail;
use crate::propagator::DyadicBand;
use crate::quadrature::{oscillatory_nodes, GaussLegendre};
use crate::specfun::{self, Order};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Which decay law to measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersiveKind {
    /// Sup norm of the k ≠ 0 part; rate −½.
    Perp,
    /// Sup norm of W_j u for the k = 0 part; rate −½.
    P0Weighted,
    /// L^q norm of the k = 0 part for 2 ≤ q < 4; rate −½(1 − 2/q).
    P0Lq { q: f64 },
}

impl DispersiveKind {
    pub fn expected_exponent(&self) -> f64 {
        match *self {
            DispersiveKind::Perp | DispersiveKind::P0Weighted => -0.5,
            DispersiveKind::P0Lq { q } => -0.5 * (1.0 - 2.0 / q),
        }
    }

    /// Acceptance band around the expected exponent.
    pub fn tolerance(&self) -> f64 {
        match self {
            DispersiveKind::Perp | DispersiveKind::P0Weighted => 0.05,
            DispersiveKind::P0Lq { .. } => 0.03,
        }
    }

    fn projection(&self) -> Projection {
        match self {
            DispersiveKind::Perp => Projection::Pperp,
            _ => Projection::P0,
        }
    }

    fn model(&self) -> DecayModel {
        match *self {
            DispersiveKind::Perp => DecayModel::SupNorm,
            DispersiveKind::P0Weighted => DecayModel::WeightedSupNorm,
            DispersiveKind::P0Lq { q } => DecayModel::LqNorm { q },
        }
    }

    /// Checks 2 ≤ q < 4 for the L^q case.
    pub fn validate(&self) -> Result<()> {
        if let DispersiveKind::P0Lq { q } = *self {
            if q.is_nan() || q < 2.0 {
                return Err(invalid("q", format!("must be at least 2, got {q}")));
            }
            if q >= 4.0 {
                return Err(Error::Regime(format!(
                    "weightless decay for the k = 0 component holds only for q < 4 (got q = {q}); \
                     the singular J_(-1/2) channel is not in L^q near the origin for q >= 4"
                )));
            }
        }
        Ok(())
    }
}

/// What the fitted norms measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DecayModel {
    /// Norms supplied by the caller.
    Samples,
    SupNorm,
    WeightedSupNorm,
    LqNorm { q: f64 },
}

/// Log-spaced sample times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        if !(start > 0.0 && start.is_finite()) {
            return Err(invalid("time_window.start", format!("must be positive, got {start}")));
        }
        if !(end > start && end.is_finite()) {
            return Err(invalid("time_window.end", format!("must exceed start = {start}, got {end}")));
        }
        if samples < 2 {
            return Err(invalid("time_window.samples", format!("need at least 2, got {samples}")));
        }
        Ok(TimeWindow { start, end, samples })
    }

    /// 2^j t ∈ [10, 10³] with 32 samples.
    pub fn for_band(j: i32) -> Self {
        let s = 2f64.powi(-j);
        TimeWindow { start: 10.0 * s, end: 1e3 * s, samples: 32 }
    }

    pub fn times(&self) -> Vec<f64> {
        let ratio = (self.end / self.start).ln();
        let n = self.samples - 1;
        (0..self.samples)
            .map(|i| if i == n { self.end } else { self.start * (ratio * i as f64 / n as f64).exp() })
            .collect()
    }
}

/// Least-squares fit of log norm against log(1 + 2^j t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport {
    pub band_j: i32,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub model: DecayModel,
    pub fitted_exponent: f64,
    /// log of the prefactor C in C (1 + 2^j t)^exponent.
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub expected_exponent: Option<f64>,
}

impl DecayFitReport {
    pub fn model_norm(&self, t: f64) -> f64 {
        (self.intercept + self.fitted_exponent * (1.0 + 2f64.powi(self.band_j) * t).ln()).exp()
    }

    /// |fitted − expected|, when an expectation is attached.
    pub fn deviation(&self) -> Option<f64> {
        self.expected_exponent.map(|e| (self.fitted_exponent - e).abs())
    }

    pub fn within(&self, tol: f64) -> bool {
        self.deviation().is_some_and(|d| d <= tol)
    }
}

/// Smallest usable scaled time 2^j t.
pub const MIN_SCALED_TIME: f64 = 10.0;
const MIN_SAMPLES: usize = 8;
const MIN_DECADES: f64 = 1.5;

/// Fits norms ≈ C (1 + 2^j t)^a over the samples with 2^j t ≥ 10, which must
/// number at least 8 and span at least 1.5 decades.
pub fn fit_decay(times: &[f64], norms: &[f64], band_j: i32) -> Result<DecayFitReport> {
    if times.len() != norms.len() {
        return Err(Error::GridMismatch(format!("{} times for {} norms", times.len(), norms.len())));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "must be strictly increasing"));
    }
    if norms.iter().any(|n| !(*n > 0.0 && n.is_finite())) {
        return Err(invalid("norms", "must be positive and finite"));
    }
    let scale = 2f64.powi(band_j);
    let (t, n): (Vec<f64>, Vec<f64>) =
        times.iter().zip(norms).filter(|(t, _)| scale * **t >= MIN_SCALED_TIME).map(|(a, b)| (*a, *b)).unzip();
    if t.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSpan(format!(
            "{} samples with 2^j t >= {MIN_SCALED_TIME}, need {MIN_SAMPLES}",
            t.len()
        )));
    }
    let decades = (t[t.len() - 1] / t[0]).log10();
    if decades < MIN_DECADES {
        return Err(Error::InsufficientSpan(format!("samples span {decades:.3} decades, need {MIN_DECADES}")));
    }
    let x: Vec<f64> = t.iter().map(|t| (1.0 + scale * t).ln()).collect();
    let y: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / m).sqrt();
    Ok(DecayFitReport {
        band_j,
        times: t,
        norms: n,
        model: DecayModel::Samples,
        fitted_exponent: slope,
        intercept,
        residual,
        expected_exponent: None,
    })
}

/// Barycentric interpolant on Chebyshev points of the second kind.
struct Chebyshev {
    nodes: Vec<f64>,
    values: Vec<Complex64>,
    weights: Vec<f64>,
}

impl Chebyshev {
    const DEGREE: usize = 48;

    fn nodes(a: f64, b: f64) -> Vec<f64> {
        let n = Self::DEGREE;
        (0..=n).map(|i| 0.5 * (a + b) - 0.5 * (b - a) * (PI * i as f64 / n as f64).cos()).collect()
    }

    fn new(nodes: Vec<f64>, values: Vec<Complex64>) -> Self {
        let n = nodes.len() - 1;
        let weights = (0..=n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                if i == 0 || i == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Chebyshev { nodes, values, weights }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let mut num = Complex64::default();
        let mut den = 0.0;
        for ((&xi, &vi), &wi) in self.nodes.iter().zip(&self.values).zip(&self.weights) {
            let d = x - xi;
            if d == 0.0 {
                return vi;
            }
            let c = wi / d;
            num += vi * c;
            den += c;
        }
        num / den
    }
}

/// Hankel images of both components of one mode, on the band support.
struct ModeBand {
    k: i64,
    ch: ModeChannels,
    upper: Chebyshev,
    lower: Chebyshev,
}

fn hankel_at(nu: Order, grid: &RadialGrid, f: &[Complex64], rhos: &[f64]) -> Vec<Complex64> {
    let v = nu.value();
    let tail = PowerTail::fit(v, f, grid.points()[0], grid.log_step());
    let weighted: Vec<Complex64> = f.iter().zip(grid.weights()).map(|(a, w)| a * w).collect();
    rhos.iter()
        .map(|&rho| {
            let body: Complex64 = grid
                .points()
                .iter()
                .zip(&weighted)
                .map(|(&r, w)| w * specfun::bessel_j_unchecked(v, r * rho))
                .sum();
            body + tail.eval(rho)
        })
        .collect()
}

impl ModeBand {
    fn new(p: &SpinorProfile, ch: ModeChannels, band: DyadicBand) -> Self {
        let (a, b) = band.support();
        let nodes = Chebyshev::nodes(a, b);
        let grid = p.grid();
        let upper = hankel_at(ch.upper, grid, &p.upper, &nodes);
        let lower = hankel_at(ch.lower, grid, &p.lower, &nodes);
        ModeBand { k: p.k, ch, upper: Chebyshev::new(nodes.clone(), upper), lower: Chebyshev::new(nodes, lower) }
    }
}

/// u(t, r) for every mode and radius: e^{−itD} φ_j(D) f in the channel form
/// u₁ = H_u[cos(tρ) a − i c_u c_l sin(tρ) b], u₂ = H_l[cos(tρ) b − i c_u c_l sin(tρ) a].
fn evolve_band(modes: &[ModeBand], band: DyadicBand, t: f64, radii: &[f64]) -> Vec<Vec<[Complex64; 2]>> {
    let (a, b) = band.support();
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let rule = GaussLegendre::new(16);
    let quad = oscillatory_nodes(a, b, t.abs() + r_max + 1.0, TAU, &rule);
    modes
        .iter()
        .map(|m| {
            let s = m.ch.upper_sign * m.ch.lower_sign;
            let i = Complex64::new(0.0, 1.0);
            let coef: Vec<(f64, Complex64, Complex64)> = quad
                .iter()
                .map(|&(rho, w)| {
                    let c = w * band.eval(rho) * rho;
                    let (sn, cs) = (t * rho).sin_cos();
                    let ua = m.upper.eval(rho);
                    let lb = m.lower.eval(rho);
                    (rho, (ua * cs - i * s * sn * lb) * c, (lb * cs - i * s * sn * ua) * c)
                })
                .filter(|(_, u, l)| u.norm_sqr() + l.norm_sqr() > 0.0)
                .collect();
            let (nu_u, nu_l) = (m.ch.upper.value(), m.ch.lower.value());
            radii
                .par_iter()
                .map(|&r| {
                    let mut out = [Complex64::default(); 2];
                    for &(rho, cu, cl) in &coef {
                        out[0] += cu * specfun::bessel_j_unchecked(nu_u, r * rho);
                        out[1] += cl * specfun::bessel_j_unchecked(nu_l, r * rho);
                    }
                    out
                })
                .collect()
        })
        .collect()
}

/// Half-width of the front window, in units of 2^{−j}.
const FRONT_HALF_WIDTH: f64 = 24.0;
/// Front window spacing, in units of 2^{−j}.
const FRONT_STEP: f64 = 0.125;
const INTERIOR_NODES: usize = 96;

/// Sampling radii at time t: a log-spaced interior set on [10^{−3} L, s0]
/// and a uniform window [s0, t + 24 L] around the front r = t, L = 2^{−j},
/// s0 = max(t − 24 L, L).
struct Radii {
    interior: Vec<f64>,
    front: Vec<f64>,
    log_step: f64,
    step: f64,
}

impl Radii {
    fn new(j: i32, t: f64) -> Self {
        let l = 2f64.powi(-j);
        let lo = 1e-3 * l;
        let s0 = (t - FRONT_HALF_WIDTH * l).max(l);
        let hi = t + FRONT_HALF_WIDTH * l;
        let log_step = (s0 / lo).ln() / (INTERIOR_NODES - 1) as f64;
        let interior = (0..INTERIOR_NODES - 1).map(|i| lo * (i as f64 * log_step).exp()).collect();
        let n = ((hi - s0) / (FRONT_STEP * l)).ceil() as usize;
        let step = (hi - s0) / n as f64;
        let front = (0..=n).map(|i| s0 + i as f64 * step).collect();
        Radii { interior, front, log_step, step }
    }

    fn all(&self) -> Vec<f64> {
        self.interior.iter().chain(&self.front).copied().collect()
    }

    /// ∫_0^∞ g r dr from samples at [`Radii::all`], with a power-law piece
    /// below the first node.
    fn integrate(&self, g: &[f64]) -> f64 {
        let n = self.interior.len();
        let (gi, gf) = g.split_at(n);
        // Interior: trapezoid in u = ln r on [r_0, s0], the last node being front[0].
        let mut interior = 0.0;
        for i in 0..n {
            let r = self.interior[i];
            let w = if i == 0 { 0.5 } else { 1.0 };
            interior += w * gi[i] * r * r;
        }
        interior += 0.5 * gf[0] * self.front[0] * self.front[0];
        interior *= self.log_step;
        let tail = crate::grid::power_tail(gi[0], gi[1], self.interior[0], self.log_step);
        let m = gf.len() - 1;
        let front: f64 = gf
            .iter()
            .zip(&self.front)
            .enumerate()
            .map(|(i, (v, r))| if i == 0 || i == m { 0.5 } else { 1.0 } * v * r)
            .sum::<f64>()
            * self.step;
        tail + interior + front
    }
}

/// Evolves band-localized data and fits the decay of the chosen norm over
/// the time window.
///
/// The data is projected onto the component the kind refers to (k ≠ 0 for
/// `Perp`, k = 0 otherwise) and multiplied by φ(2^{−j}|D|). Norms are
/// measured on a log-spaced interior set plus a fine uniform window around
/// the front r = t, which carries the solution at late times.
pub fn verify_dispersive(
    kind: DispersiveKind,
    cone: ConeParams,
    gamma: ExtensionParam,
    band: DyadicBand,
    data: &ModeSpectrum,
    window: &TimeWindow,
) -> Result<DecayFitReport> {
    kind.validate()?;
    let data = project(data, kind.projection());
    let mut modes = Vec::new();
    for (&k, p) in data.modes() {
        gamma.require_admissible_for(k)?;
        if p.norm_sq() > 0.0 {
            modes.push(ModeBand::new(p, mode_channels(k, cone, gamma)?, band));
        }
    }
    if modes.is_empty() {
        return Err(Error::ZeroNorm);
    }
    let weight = match kind {
        DispersiveKind::P0Weighted => Some(Weight::dyadic(band.j, gamma)?),
        _ => None,
    };
    let k_max = modes.iter().map(|m| m.k.unsigned_abs() as usize).max().unwrap_or(0);
    let angular = AngularGrid::for_modes(k_max, cone.sigma())?;
    let harmonics: Vec<Vec<Complex64>> = modes
        .iter()
        .map(|m| angular.thetas().iter().map(|&th| angular_eigen(m.k, cone, th).1[0]).collect())
        .collect();
    let times = window.times();
    let norms = times
        .iter()
        .map(|&t| {
            let radii = Radii::new(band.j, t);
            let r = radii.all();
            let values = evolve_band(&modes, band, t, &r);
            // |W u(r, θ)| on the angular grid.
            let pointwise: Vec<Vec<f64>> = (0..r.len())
                .map(|i| {
                    let w = weight.map_or([1.0; 2], |w| w.entries(r[i]));
                    (0..angular.m)
                        .map(|a| {
                            let mut v = [Complex64::default(); 2];
                            for (mv, h) in values.iter().zip(&harmonics) {
                                v[0] += mv[i][0] * h[a];
                                v[1] += mv[i][1] * h[a];
                            }
                            ((w[0] * w[0]) * v[0].norm_sqr() + (w[1] * w[1]) * v[1].norm_sqr()).sqrt()
                        })
                        .collect()
                })
                .collect();
            match kind {
                DispersiveKind::P0Lq { q } => {
                    let g: Vec<f64> =
                        pointwise.iter().map(|row| row.iter().map(|v| v.powf(q)).sum::<f64>() * angular.weight()).collect();
                    radii.integrate(&g).powf(1.0 / q)
                }
                _ => pointwise.iter().flatten().copied().fold(0.0, f64::max),
            }
        })
        .collect::<Vec<f64>>();
    let mut report = fit_decay(&times, &norms, band.j)?;
    report.model = kind.model();
    report.expected_exponent = Some(kind.expected_exponent());
    Ok(report)
}

/// Reference data for a decay run at band j: Gaussian profiles
/// x^ν e^{−x²/2}, x = 2^j r, in each channel (Hankel self-reciprocal, so the
/// band sees a smooth, nonvanishing spectrum). `Perp` uses modes 1 and −2;
/// the k = 0 kinds use mode 0.
pub fn dispersive_data(kind: DispersiveKind, cone: ConeParams, gamma: ExtensionParam, j: i32) -> Result<ModeSpectrum> {
    let l = 2f64.powi(-j);
    let grid = Arc::new(RadialGrid::geometric(1e-4 * l, 12.0 * l, 2048)?);
    let (modes, k_max): (&[(i64, Complex64)], usize) = match kind {
        DispersiveKind::Perp => (&[(1, Complex64::new(1.0, 0.0)), (-2, Complex64::new(0.0, 0.6))], 2),
        _ => (&[(0, Complex64::new(1.0, 0.0))], 0),
    };
    let mut spec = ModeSpectrum::new(grid.clone(), k_max);
    for &(k, amp) in modes {
        let ch = mode_channels(k, cone, gamma)?;
        let (nu, nl) = (ch.upper.value(), ch.lower.value());
        spec.insert(SpinorProfile::from_fn(k, grid.clone(), |r| {
            let x = r / l;
            let g = (-0.5 * x * x).exp();
            [amp * (x.powf(nu) * g), amp * Complex64::new(0.0, 0.7) * (x.powf(nl) * g)]
        }))?;
    }
    Ok(spec)
}
