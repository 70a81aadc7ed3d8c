//! Frequency-localized half-wave kernels
//! m_{ν,j}(t, r, s) = ∫ e^{−itρ} J_ν(rρ) J_ν(sρ) φ(2^{−j}ρ) ρ dρ.

use super::DyadicBand;
use crate::eigenbasis::{mode_channels, ConeParams, SpinorProfile};
use crate::error::{invalid, Result};
use crate::extension::ExtensionParam;
use crate::hankel::PowerTail;
use crate::quadrature::{oscillatory_nodes, GaussLegendre};
use crate::specfun::{self, Order};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const PANEL_NODES: usize = 8;
/// Resolves the cutoff itself, whatever the phase rate.
const MIN_PANELS: f64 = 32.0;

/// Quadrature nodes for the band with weights w·φ(2^{−j}ρ)·ρ·e^{−itρ}.
fn band_nodes(band: DyadicBand, t: f64, spatial_rate: f64) -> Vec<(f64, Complex64)> {
    let (a, b) = band.support();
    let phase = PI / 4.0;
    let rate = (t.abs() + spatial_rate + 1.0).max(MIN_PANELS * phase / (b - a));
    let rule = GaussLegendre::new(PANEL_NODES);
    oscillatory_nodes(a, b, rate, phase, &rule)
        .into_iter()
        .map(|(rho, w)| (rho, Complex64::from_polar(w * band.eval(rho) * rho, -t * rho)))
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .collect()
}

fn check_point(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {x}")))
    }
}

fn check_argument(band: DyadicBand, x: f64) -> Result<()> {
    let arg = band.support().1 * x;
    if arg > specfun::MAX_ARGUMENT {
        return Err(specfun::SpecFunError::Overflow { x: arg, max: specfun::MAX_ARGUMENT }.into());
    }
    Ok(())
}

/// m_{ν,j}(t, r, s) by composite Gauss-Legendre quadrature over the band.
pub fn m_nu_localized(nu: Order, band: DyadicBand, t: f64, r: f64, s: f64) -> Result<Complex64> {
    check_point("r", r)?;
    check_point("s", s)?;
    if !t.is_finite() {
        return Err(invalid("t", "must be finite"));
    }
    check_argument(band, r.max(s))?;
    let v = nu.value();
    Ok(band_nodes(band, t, r + s)
        .into_iter()
        .map(|(rho, c)| c * (specfun::bessel_j_unchecked(v, r * rho) * specfun::bessel_j_unchecked(v, s * rho)))
        .sum())
}

/// The 2×2 diagonal kernel of a mode on a product of radial points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMatrix {
    pub t: f64,
    pub k: i64,
    pub j: i32,
    pub orders: [Order; 2],
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    /// m_{ν_upper}(t, r_a, s_b), row-major in a.
    pub upper: Vec<Complex64>,
    /// m_{ν_lower}(t, r_a, s_b), row-major in a.
    pub lower: Vec<Complex64>,
}

impl KernelMatrix {
    /// Full 2×2 block at (r_a, s_b); the off-diagonal entries are zero.
    pub fn entry(&self, a: usize, b: usize) -> [[Complex64; 2]; 2] {
        let i = a * self.s.len() + b;
        let zero = Complex64::default();
        [[self.upper[i], zero], [zero, self.lower[i]]]
    }
}

/// Bessel table J_ν(x_a ρ_q), row-major in a.
fn bessel_table(nu: Order, xs: &[f64], nodes: &[(f64, Complex64)]) -> Vec<f64> {
    let v = nu.value();
    xs.par_iter()
        .flat_map_iter(|&x| nodes.iter().map(move |&(rho, _)| specfun::bessel_j_unchecked(v, x * rho)))
        .collect()
}

/// Localized kernel of e^{−it|D|} on mode k:
/// diag(m_{ν_u,j}, m_{ν_l,j}) evaluated on r × s.
pub fn mode_kernel(
    k: i64,
    cone: ConeParams,
    gamma: ExtensionParam,
    band: DyadicBand,
    t: f64,
    r: &[f64],
    s: &[f64],
) -> Result<KernelMatrix> {
    gamma.require_admissible_for(k)?;
    let ch = mode_channels(k, cone, gamma)?;
    for &x in r.iter().chain(s) {
        check_point("r", x)?;
    }
    let r_max = r.iter().copied().fold(0.0, f64::max);
    let s_max = s.iter().copied().fold(0.0, f64::max);
    check_argument(band, r_max.max(s_max))?;
    let nodes = band_nodes(band, t, r_max + s_max);
    let q = nodes.len();
    let matrix = |nu: Order| -> Vec<Complex64> {
        let jr = bessel_table(nu, r, &nodes);
        let js = bessel_table(nu, s, &nodes);
        (0..r.len())
            .into_par_iter()
            .flat_map_iter(|a| {
                let row_r = &jr[a * q..(a + 1) * q];
                let js = &js;
                let nodes = &nodes;
                (0..s.len()).map(move |b| {
                    let row_s = &js[b * q..(b + 1) * q];
                    (0..q).map(|i| nodes[i].1 * (row_r[i] * row_s[i])).sum()
                })
            })
            .collect()
    };
    Ok(KernelMatrix {
        t,
        k,
        j: band.j,
        orders: [ch.upper, ch.lower],
        r: r.to_vec(),
        s: s.to_vec(),
        upper: matrix(ch.upper),
        lower: matrix(ch.lower),
    })
}

/// T_j p(r) = ∫ K_j(t, r, s) p(s) s ds for the diagonal mode kernel, with
/// the s- and ρ-integrals factorized.
pub fn apply_localized_kernel(
    band: DyadicBand,
    k: i64,
    cone: ConeParams,
    gamma: ExtensionParam,
    t: f64,
    p: &SpinorProfile,
) -> Result<SpinorProfile> {
    gamma.require_admissible_for(k)?;
    let ch = mode_channels(k, cone, gamma)?;
    let grid = p.grid();
    check_argument(band, grid.r_max())?;
    let nodes = band_nodes(band, t, 2.0 * grid.r_max());
    let q = nodes.len();
    let apply = |nu: Order, f: &[Complex64]| -> Vec<Complex64> {
        let table = bessel_table(nu, grid.points(), &nodes);
        let weighted: Vec<Complex64> = f.iter().zip(grid.weights()).map(|(v, w)| v * w).collect();
        let tail = PowerTail::fit(nu.value(), f, grid.points()[0], grid.log_step());
        // Hankel coefficients at the ρ nodes, then the weighted synthesis.
        let coef: Vec<Complex64> = (0..q)
            .into_par_iter()
            .map(|i| {
                let mut acc = tail.eval(nodes[i].0);
                for (a, w) in weighted.iter().enumerate() {
                    acc += w * table[a * q + i];
                }
                acc * nodes[i].1
            })
            .collect();
        (0..grid.len())
            .into_par_iter()
            .map(|a| table[a * q..(a + 1) * q].iter().zip(&coef).map(|(j, c)| c * j).sum())
            .collect()
    };
    SpinorProfile::new(k, grid.clone(), apply(ch.upper, &p.upper), apply(ch.lower, &p.lower))
}
