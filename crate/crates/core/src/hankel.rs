//! Scalar Hankel transforms H_ν and the relativistic transform P_k that
//! diagonalizes the radial Dirac operator d_k.

use crate::eigenbasis::{apply_dk, mode_channels, ConeParams, ModeChannels, SpinorProfile};
use crate::error::{Error, Result};
use crate::extension::ExtensionParam;
use crate::grid::{RadialGrid, SpectralGrid};
use crate::specfun::{self, ln_gamma, Order};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Arc, Mutex};

pub use crate::grid::SpectralGridSpec;

/// Tabulated J_ν(r_i ρ_b).
#[derive(Debug)]
enum KernelTable {
    /// r_i ρ_b = r_1 ρ_1 e^{(i + stride·b) h}: one entry per lattice index.
    Lattice { stride: usize, values: Vec<f64> },
    /// Row-major [b][i].
    Dense { values: Vec<f64> },
}

/// H_ν between a radial grid and a spectral grid:
/// (H_ν f)(ρ) = ∫_0^∞ J_ν(rρ) f(r) r dr, an involution on L²(r dr).
#[derive(Debug)]
pub struct HankelTransform {
    order: Order,
    radial: Arc<RadialGrid>,
    spectral: Arc<SpectralGrid>,
    table: KernelTable,
}

fn lattice_stride(radial: &RadialGrid, spectral: &SpectralGrid) -> Option<usize> {
    let ratio = spectral.log_step() / radial.log_step();
    let m = ratio.round();
    if m >= 1.0 && (ratio - m).abs() < 1e-9 * m {
        Some(m as usize)
    } else {
        None
    }
}

impl HankelTransform {
    pub fn new(order: Order, radial: Arc<RadialGrid>, spectral: Arc<SpectralGrid>) -> Result<Self> {
        let nu = order.value();
        let r = radial.points();
        let p = spectral.points();
        let x_max = r[r.len() - 1] * p[p.len() - 1];
        if x_max > specfun::MAX_ARGUMENT {
            return Err(specfun::SpecFunError::Overflow { x: x_max, max: specfun::MAX_ARGUMENT }.into());
        }
        let table = match lattice_stride(&radial, &spectral) {
            Some(stride) => {
                let n = r.len() + stride * (p.len() - 1);
                let h = radial.log_step();
                let x0 = r[0] * p[0];
                let values = (0..n).map(|j| specfun::bessel_j_unchecked(nu, x0 * (j as f64 * h).exp())).collect();
                KernelTable::Lattice { stride, values }
            }
            None => {
                let mut values = Vec::with_capacity(r.len() * p.len());
                for &rho in p {
                    values.extend(r.iter().map(|&ri| specfun::bessel_j_unchecked(nu, ri * rho)));
                }
                KernelTable::Dense { values }
            }
        };
        Ok(HankelTransform { order, radial, spectral, table })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn spectral(&self) -> &Arc<SpectralGrid> {
        &self.spectral
    }

    /// Row b of the kernel as a contiguous slice over radial nodes.
    fn row(&self, b: usize) -> &[f64] {
        let n = self.radial.len();
        match &self.table {
            KernelTable::Lattice { stride, values } => &values[stride * b..stride * b + n],
            KernelTable::Dense { values } => &values[b * n..(b + 1) * n],
        }
    }

    /// H_ν f on the spectral nodes.
    pub fn forward(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.radial.len() {
            return Err(Error::GridMismatch(format!("{} values for {} radial nodes", f.len(), self.radial.len())));
        }
        let w = self.radial.weights();
        let re: Vec<f64> = f.iter().zip(w).map(|(z, w)| z.re * w).collect();
        let im: Vec<f64> = f.iter().zip(w).map(|(z, w)| z.im * w).collect();
        let tail = PowerTail::fit(self.order.value(), f, self.radial.points()[0], self.radial.log_step());
        let out = self
            .spectral
            .points()
            .iter()
            .enumerate()
            .map(|(b, &rho)| {
                let row = self.row(b);
                let (mut a, mut c) = (0.0, 0.0);
                for i in 0..row.len() {
                    a += row[i] * re[i];
                    c += row[i] * im[i];
                }
                Complex64::new(a, c) + tail.eval(rho)
            })
            .collect::<Vec<_>>();
        self.check_budget(&out);
        Ok(out)
    }

    /// H_ν g on the radial nodes, for g given on the spectral nodes.
    pub fn inverse(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != self.spectral.len() {
            return Err(Error::GridMismatch(format!("{} values for {} spectral nodes", g.len(), self.spectral.len())));
        }
        let n = self.radial.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for (b, (&v, &wb)) in g.iter().zip(self.spectral.weights()).enumerate() {
            let c = v * wb;
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let row = self.row(b);
            for i in 0..n {
                re[i] += row[i] * c.re;
                im[i] += row[i] * c.im;
            }
        }
        let tail = PowerTail::fit(self.order.value(), g, self.spectral.points()[0], self.spectral.log_step());
        Ok(self
            .radial
            .points()
            .iter()
            .enumerate()
            .map(|(i, &r)| Complex64::new(re[i], im[i]) + tail.eval(r))
            .collect())
    }

    /// Logs a warning when the transform has content beyond the oscillation
    /// budget ρ R ≤ N π/8 of the radial grid. Returns true when degraded.
    pub fn check_budget(&self, spectrum: &[Complex64]) -> bool {
        let peak = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return false;
        }
        let rho_eff = self
            .spectral
            .points()
            .iter()
            .zip(spectrum)
            .filter(|(_, z)| z.norm() > 1e-10 * peak)
            .map(|(&p, _)| p)
            .fold(0.0, f64::max);
        let budget = self.radial.len() as f64 * PI / 8.0;
        let degraded = rho_eff * self.radial.r_max() > budget;
        if degraded {
            log::warn!(
                "Hankel transform of order {} has content up to rho = {rho_eff:.3e}, beyond the grid budget {:.3e}",
                self.order,
                budget / self.radial.r_max()
            );
        }
        degraded
    }
}

/// Integral of J_ν(y x) v(x) x over (0, x0) for samples whose first node is
/// x0, by termwise integration of the Bessel series.
///
/// Each of the real and imaginary parts is modelled separately. When the
/// local exponent at x0 is close to ν the part is taken as x^ν(a + b x²),
/// the small-x form of a Hankel image, with a and b read off two nodes an
/// octave apart; otherwise as a bare power law a (x/x0)^β.
pub(crate) struct PowerTail {
    nu: f64,
    x0: f64,
    /// Terms c (x/x0)^β of each part.
    parts: [Vec<(f64, f64)>; 2],
    log_gamma: Vec<f64>,
}

impl PowerTail {
    const TERMS: usize = 12;

    pub(crate) fn fit(nu: f64, values: &[Complex64], x0: f64, h: f64) -> Self {
        let m = ((std::f64::consts::LN_2 / h).round() as usize).clamp(1, values.len() - 1);
        let u = (m as f64 * h).exp();
        let fit_part = |v0: f64, v1: f64, vm: f64| -> Vec<(f64, f64)> {
            if v0 == 0.0 || v1 == 0.0 || v0.signum() != v1.signum() {
                return Vec::new();
            }
            let beta = (v1 / v0).ln() / h;
            if beta + nu + 2.0 <= 0.2 {
                return Vec::new();
            }
            if (beta - nu).abs() < 0.05 && m > 1 {
                let wm = vm / u.powf(nu);
                let b = (wm - v0) / (u * u - 1.0);
                return vec![(v0 - b, nu), (b, nu + 2.0)];
            }
            vec![(v0, beta)]
        };
        let parts = [
            fit_part(values[0].re, values[1].re, values[m].re),
            fit_part(values[0].im, values[1].im, values[m].im),
        ];
        let log_gamma = (0..Self::TERMS).map(|m| ln_gamma(m as f64 + 1.0) + ln_gamma(nu + m as f64 + 1.0)).collect();
        PowerTail { nu, x0, parts, log_gamma }
    }

    pub(crate) fn eval(&self, y: f64) -> Complex64 {
        if self.parts.iter().all(Vec::is_empty) {
            return Complex64::default();
        }
        let z = 0.5 * y * self.x0;
        if z > 4.0 {
            return Complex64::default();
        }
        let lz = z.ln();
        let mut out = [0.0; 2];
        for (slot, part) in out.iter_mut().zip(&self.parts) {
            for &(c, beta) in part {
                let mut s = 0.0;
                for m in 0..Self::TERMS {
                    let p = self.nu + 2.0 * m as f64;
                    let t = (p * lz - self.log_gamma[m]).exp() / (beta + p + 2.0);
                    s += if m % 2 == 0 { t } else { -t };
                }
                *slot += c * self.x0 * self.x0 * s;
            }
        }
        Complex64::new(out[0], out[1])
    }
}

/// Signed-energy spectral data: values at +ρ_b and −ρ_b for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDensity {
    grid: Arc<SpectralGrid>,
    pub positive: Vec<Complex64>,
    pub negative: Vec<Complex64>,
}

impl EnergyDensity {
    pub fn new(grid: Arc<SpectralGrid>, positive: Vec<Complex64>, negative: Vec<Complex64>) -> Result<Self> {
        if positive.len() != grid.len() || negative.len() != grid.len() {
            return Err(Error::GridMismatch("energy density branches must match the spectral grid".into()));
        }
        Ok(EnergyDensity { grid, positive, negative })
    }

    pub fn zeros(grid: Arc<SpectralGrid>) -> Self {
        let n = grid.len();
        EnergyDensity { grid, positive: vec![Complex64::default(); n], negative: vec![Complex64::default(); n] }
    }

    /// Samples v(ρ) for signed ρ on both branches.
    pub fn from_fn<F: FnMut(f64) -> Complex64>(grid: Arc<SpectralGrid>, mut f: F) -> Self {
        let positive = grid.points().iter().map(|&p| f(p)).collect();
        let negative = grid.points().iter().map(|&p| f(-p)).collect();
        EnergyDensity { grid, positive, negative }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Multiplies by m(ρ) for signed ρ.
    pub fn multiply<F: Fn(f64) -> Complex64>(&self, m: F) -> EnergyDensity {
        let p = self.grid.points();
        EnergyDensity {
            grid: self.grid.clone(),
            positive: self.positive.iter().zip(p).map(|(v, &r)| v * m(r)).collect(),
            negative: self.negative.iter().zip(p).map(|(v, &r)| v * m(-r)).collect(),
        }
    }

    pub fn axpy(&self, a: Complex64, other: &EnergyDensity) -> EnergyDensity {
        EnergyDensity {
            grid: self.grid.clone(),
            positive: self.positive.iter().zip(&other.positive).map(|(x, y)| x + a * y).collect(),
            negative: self.negative.iter().zip(&other.negative).map(|(x, y)| x + a * y).collect(),
        }
    }

    fn branch_norm_sq(&self, v: &[Complex64]) -> f64 {
        let dens: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
        self.grid.integrate_density(&dens)
    }

    /// ∫_{ρ>0} |v|² |ρ| dρ.
    pub fn positive_norm_sq(&self) -> f64 {
        self.branch_norm_sq(&self.positive)
    }

    /// ∫_{ρ<0} |v|² |ρ| dρ.
    pub fn negative_norm_sq(&self) -> f64 {
        self.branch_norm_sq(&self.negative)
    }

    /// ‖v‖² in L²(ℝ, |ρ| dρ).
    pub fn norm_sq(&self) -> f64 {
        self.positive_norm_sq() + self.negative_norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn rel_distance(&self, other: &EnergyDensity) -> f64 {
        self.axpy(Complex64::new(-1.0, 0.0), other).norm() / other.norm()
    }
}

/// Hankel transforms of every order needed on one pair of grids, built on
/// demand and shared.
#[derive(Debug)]
pub struct SpectralContext {
    radial: Arc<RadialGrid>,
    spectral: Arc<SpectralGrid>,
    cache: Mutex<HashMap<u64, Arc<HankelTransform>>>,
}

impl SpectralContext {
    pub fn new(radial: Arc<RadialGrid>, spectral: Arc<SpectralGrid>) -> Self {
        SpectralContext { radial, spectral, cache: Mutex::new(HashMap::new()) }
    }

    /// Context with the default spectral grid for `radial`.
    pub fn with_default_spectrum(radial: Arc<RadialGrid>) -> Self {
        let spectral = Arc::new(SpectralGrid::default_for(&radial));
        Self::new(radial, spectral)
    }

    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn spectral(&self) -> &Arc<SpectralGrid> {
        &self.spectral
    }

    pub fn transform(&self, order: Order) -> Result<Arc<HankelTransform>> {
        let key = order.value().to_bits();
        if let Some(t) = self.cache.lock().expect("transform cache poisoned").get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(HankelTransform::new(order, self.radial.clone(), self.spectral.clone())?);
        self.cache.lock().expect("transform cache poisoned").insert(key, t.clone());
        Ok(t)
    }

    fn check_profile(&self, p: &SpinorProfile) -> Result<()> {
        if **p.grid() != *self.radial {
            return Err(Error::GridMismatch("profile is not on the context's radial grid".into()));
        }
        Ok(())
    }

    fn check_density(&self, v: &EnergyDensity) -> Result<()> {
        if **v.grid() != *self.spectral {
            return Err(Error::GridMismatch("density is not on the context's spectral grid".into()));
        }
        Ok(())
    }

    /// H_ν of radial samples.
    pub fn hankel_forward(&self, nu: Order, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.transform(nu)?.forward(f)
    }

    /// H_ν of spectral samples, returned on the radial grid.
    pub fn hankel_inverse(&self, nu: Order, g: &[Complex64]) -> Result<Vec<Complex64>> {
        self.transform(nu)?.inverse(g)
    }

    /// P_k p(ρ) = ∫ Ψ_k(ρ r)ᵀ p(r) r dr on both energy branches.
    pub fn relativistic_forward(
        &self,
        k: i64,
        cone: ConeParams,
        gamma: ExtensionParam,
        p: &SpinorProfile,
    ) -> Result<EnergyDensity> {
        self.check_profile(p)?;
        let ch = mode_channels(k, cone, gamma)?;
        let a = self.hankel_forward(ch.upper, &p.upper)?;
        let b = self.hankel_forward(ch.lower, &p.lower)?;
        Ok(combine_forward(&ch, &a, &b, self.spectral.clone()))
    }

    /// P_k^{-1} v(r) = ∫_ℝ Ψ_k(ρ r) v(ρ) |ρ| dρ.
    pub fn relativistic_inverse(
        &self,
        k: i64,
        cone: ConeParams,
        gamma: ExtensionParam,
        v: &EnergyDensity,
    ) -> Result<SpinorProfile> {
        self.check_density(v)?;
        let ch = mode_channels(k, cone, gamma)?;
        let s = FRAC_1_SQRT_2;
        let sum: Vec<Complex64> = v.positive.iter().zip(&v.negative).map(|(p, m)| (p + m) * (s * ch.upper_sign)).collect();
        let diff: Vec<Complex64> = v.positive.iter().zip(&v.negative).map(|(p, m)| (p - m) * (s * ch.lower_sign)).collect();
        let upper = self.hankel_inverse(ch.upper, &sum)?;
        let lower = self.hankel_inverse(ch.lower, &diff)?;
        SpinorProfile::new(k, self.radial.clone(), upper, lower)
    }

    /// ‖P_k(d_k p) − ρ P_k p‖ / ‖ρ P_k p‖ for a regular profile p.
    pub fn diagonalization_residual(
        &self,
        k: i64,
        cone: ConeParams,
        gamma: ExtensionParam,
        p: &SpinorProfile,
    ) -> Result<f64> {
        gamma.require_admissible_for(k)?;
        let dp = apply_dk(k, cone, p)?;
        let lhs = self.relativistic_forward(k, cone, gamma, &dp)?;
        let rhs = self.relativistic_forward(k, cone, gamma, p)?.multiply(|rho| Complex64::new(rho, 0.0));
        let den = rhs.norm();
        if den == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(lhs.axpy(Complex64::new(-1.0, 0.0), &rhs).norm() / den)
    }
}

fn combine_forward(ch: &ModeChannels, a: &[Complex64], b: &[Complex64], grid: Arc<SpectralGrid>) -> EnergyDensity {
    let s = FRAC_1_SQRT_2;
    let positive = a.iter().zip(b).map(|(x, y)| (x * ch.upper_sign + y * ch.lower_sign) * s).collect();
    let negative = a.iter().zip(b).map(|(x, y)| (x * ch.upper_sign - y * ch.lower_sign) * s).collect();
    EnergyDensity { grid, positive, negative }
}

/// H_ν f on `out` for samples f on `radial` (builds a one-off transform).
pub fn hankel_forward(nu: Order, radial: Arc<RadialGrid>, f: &[Complex64], out: Arc<SpectralGrid>) -> Result<Vec<Complex64>> {
    HankelTransform::new(nu, radial, out)?.forward(f)
}

/// H_ν g on `out` for samples g on `spectral` (builds a one-off transform).
pub fn hankel_inverse(nu: Order, spectral: Arc<SpectralGrid>, g: &[Complex64], out: Arc<RadialGrid>) -> Result<Vec<Complex64>> {
    HankelTransform::new(nu, out, spectral)?.inverse(g)
}

/// P_k p on the default spectral grid of p's radial grid.
pub fn relativistic_forward(k: i64, cone: ConeParams, gamma: ExtensionParam, p: &SpinorProfile) -> Result<EnergyDensity> {
    SpectralContext::with_default_spectrum(p.grid().clone()).relativistic_forward(k, cone, gamma, p)
}

/// P_k^{-1} v on the given radial grid.
pub fn relativistic_inverse(
    k: i64,
    cone: ConeParams,
    gamma: ExtensionParam,
    v: &EnergyDensity,
    radial: Arc<RadialGrid>,
) -> Result<SpinorProfile> {
    SpectralContext::new(radial, v.grid().clone()).relativistic_inverse(k, cone, gamma, v)
}

/// Diagonalization residual on the default spectral grid.
pub fn diagonalization_residual(k: i64, cone: ConeParams, gamma: ExtensionParam, p: &SpinorProfile) -> Result<f64> {
    SpectralContext::with_default_spectrum(p.grid().clone()).diagonalization_residual(k, cone, gamma, p)
}
