#![allow(dead_code)]

use cone_dirac::eigenbasis::{ModeSpectrum, SpinorProfile};
use cone_dirac::grid::RadialGrid;
use num_complex::Complex64;
use std::sync::Arc;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn grid(radius: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::with_radius(radius).unwrap())
}

/// Smooth two-component bump centred at r0 with mode-dependent phases.
pub fn bump_profile(k: i64, grid: &Arc<RadialGrid>, r0: f64, width: f64) -> SpinorProfile {
    let a = 0.3 * k as f64;
    SpinorProfile::from_fn(k, grid.clone(), |r| {
        let x = (r - r0) / width;
        let g = (-x * x).exp();
        [c(g, a * g), c(-0.4 * g * x, 0.7 * g)]
    })
}

/// Spectrum with bump profiles on every mode |k| ≤ k_max.
pub fn bump_spectrum(grid: &Arc<RadialGrid>, k_max: usize, r0: f64, width: f64) -> ModeSpectrum {
    let mut s = ModeSpectrum::new(grid.clone(), k_max);
    let km = k_max as i64;
    for k in -km..=km {
        let p = bump_profile(k, grid, r0 + 0.2 * k as f64, width);
        s.insert(p.scaled(c(1.0 / (1.0 + k.abs() as f64), 0.0))).unwrap();
    }
    s
}

/// Least-squares slope of y against x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Spectrum whose energy density on mode k is `v(k, ρ)` for signed ρ,
/// synthesized through the propagator's spectral context.
pub fn spectral_data<F>(prop: &cone_dirac::propagator::Propagator, modes: &[i64], k_max: usize, v: F) -> ModeSpectrum
where
    F: Fn(i64, f64) -> Complex64,
{
    let ctx = prop.context();
    let mut s = ModeSpectrum::new(ctx.radial().clone(), k_max);
    for &k in modes {
        let dens = cone_dirac::hankel::EnergyDensity::from_fn(ctx.spectral().clone(), |rho| v(k, rho));
        s.insert(ctx.relativistic_inverse(k, prop.cone(), prop.gamma(), &dens).unwrap()).unwrap();
    }
    s
}
