//! Space-time Lebesgue norms, Sobolev norms and dyadic localization.

use super::Weight;
use crate::eigenbasis::{ConeParams, ModeSpectrum, SpinorField};
use crate::error::{invalid, Error, Result};
use crate::extension::ExtensionParam;
use crate::propagator::{DyadicBand, Propagator};
use num_complex::Complex64;
use rayon::prelude::*;

fn check_exponent(name: &'static str, x: f64) -> Result<()> {
    if x >= 1.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(invalid(name, format!("Lebesgue exponent must lie in [1, inf], got {x}")))
    }
}

/// Pointwise Euclidean modulus of W u at (r, ·).
fn modulus(v: &[Complex64; 2], w: [f64; 2]) -> f64 {
    ((w[0] * w[0]) * v[0].norm_sqr() + (w[1] * w[1]) * v[1].norm_sqr()).sqrt()
}

/// ‖W u‖_{L^q(X)} by log-trapezoid in r and trapezoid in θ; q = ∞ takes the
/// maximum over the grid.
pub fn lq_norm(field: &SpinorField, q: f64, weight: Option<&Weight>) -> Result<f64> {
    check_exponent("q", q)?;
    let grid = field.radial();
    let m = field.angular.m;
    let entries = |r: f64| weight.map_or([1.0; 2], |w| w.entries(r));
    if q.is_infinite() {
        let max = grid
            .points()
            .iter()
            .zip(field.values().chunks(m))
            .flat_map(|(&r, row)| {
                let w = entries(r);
                row.iter().map(move |v| modulus(v, w))
            })
            .fold(0.0, f64::max);
        return Ok(max);
    }
    let dens: Vec<f64> = grid
        .points()
        .iter()
        .zip(field.values().chunks(m))
        .map(|(&r, row)| {
            let w = entries(r);
            row.iter().map(|v| modulus(v, w).powf(q)).sum::<f64>() * field.angular.weight()
        })
        .collect();
    Ok(grid.integrate_density(&dens).powf(1.0 / q))
}

/// ‖W u‖_{L^p_t L^q_x} over samples on a uniform time grid: composite
/// trapezoid in t of ‖W u(t)‖_q^p, or the maximum when p = ∞.
pub fn mixed_norm(times: &[f64], fields: &[SpinorField], p: f64, q: f64, weight: Option<&Weight>) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if times.is_empty() || fields.is_empty() {
        return Err(Error::EmptyGrid("time samples"));
    }
    if times.len() != fields.len() {
        return Err(Error::GridMismatch(format!("{} times for {} fields", times.len(), fields.len())));
    }
    if let Some(w) = weight {
        if q.is_finite() {
            w.require_exponent_for(q)?;
        }
    }
    let norms = fields.par_iter().map(|u| lq_norm(u, q, weight)).collect::<Result<Vec<f64>>>()?;
    if p.is_infinite() {
        return Ok(norms.iter().copied().fold(0.0, f64::max));
    }
    if times.len() < 2 {
        return Err(Error::EmptyGrid("a finite time exponent needs at least two samples"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(invalid("times", "must be strictly increasing"));
    }
    for (i, t) in times.iter().enumerate() {
        if (t - (times[0] + i as f64 * dt)).abs() > 1e-9 * dt.max(t.abs()) {
            return Err(invalid("times", "time grid must be uniform"));
        }
    }
    let n = norms.len();
    let sum: f64 = norms
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 } else { 1.0 } * v.powf(p))
        .sum();
    Ok((sum * dt).powf(1.0 / p))
}

/// Homogeneous (Σ_k ∫ |ρ|^{2s} |P_k f_k|² |ρ| dρ)^{½}, or the inhomogeneous
/// ‖(1 + H^{s/2}) f‖ with H = D².
pub fn hs_norm(spec: &ModeSpectrum, cone: ConeParams, gamma: ExtensionParam, s: f64, homogeneous: bool) -> Result<f64> {
    let prop = Propagator::with_default_spectrum(spec.grid().clone(), cone, gamma);
    sobolev_norm(&prop, spec, s, homogeneous)
}

/// [`hs_norm`] on the spectral grid of an existing propagator.
pub fn sobolev_norm(prop: &Propagator, spec: &ModeSpectrum, s: f64, homogeneous: bool) -> Result<f64> {
    if !s.is_finite() {
        return Err(invalid("s", "must be finite"));
    }
    let dens = prop.energy_densities(spec)?;
    let symbol = |rho: f64| {
        let a = rho.abs().powf(s);
        Complex64::new(if homogeneous { a } else { 1.0 + a }, 0.0)
    };
    Ok(dens.values().map(|v| v.multiply(symbol).norm_sq()).sum::<f64>().sqrt())
}

/// φ(2^{−j}|D|) f.
pub fn dyadic_localize(spec: &ModeSpectrum, band: DyadicBand, cone: ConeParams, gamma: ExtensionParam) -> Result<ModeSpectrum> {
    Propagator::with_default_spectrum(spec.grid().clone(), cone, gamma).localize(spec, band)
}
