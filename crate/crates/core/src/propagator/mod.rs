//! Exact flows of D_{σ,γ}, frequency-localized wave kernels, and the
//! closed-form heat and Schrödinger kernels.

mod heat;
mod kernel;

pub use heat::{
    b_pm, cone_distance, heat_kernel_closed, heat_kernel_series, heat_mode_kernel, image_set, schrodinger_mode_kernel, ChannelSign,
    ConePoint, Image, SeriesValue,
};
pub use kernel::{apply_localized_kernel, m_nu_localized, mode_kernel, KernelMatrix};

use crate::eigenbasis::{mode_channels, ConeParams, ModeSpectrum, SpinorProfile};
use crate::error::Result;
use crate::extension::ExtensionParam;
use crate::grid::RadialGrid;
use crate::hankel::{EnergyDensity, SpectralContext};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// S(x) = e^{−1/x}/(e^{−1/x} + e^{−1/(1−x)}), the smooth step from 0 at
/// x ≤ 0 to 1 at x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

/// χ: 1 on [0, 1], 0 on [2, ∞), smooth and nonincreasing.
pub fn low_pass(x: f64) -> f64 {
    1.0 - smooth_step(x.abs() - 1.0)
}

/// Which dyadic cutoff a band uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// φ(λ) = χ(λ) − χ(2λ), supported in [½, 2].
    Standard,
    /// φ̃(λ) = χ(λ/2) − χ(4λ), supported in [¼, 4] and equal to 1 on [½, 2].
    Enlarged,
}

/// Frequency band j: the multiplier λ ↦ φ(2^{−j}|λ|).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicBand {
    pub j: i32,
    pub cutoff: Cutoff,
}

impl DyadicBand {
    pub fn new(j: i32) -> Self {
        DyadicBand { j, cutoff: Cutoff::Standard }
    }

    pub fn enlarged(j: i32) -> Self {
        DyadicBand { j, cutoff: Cutoff::Enlarged }
    }

    /// The enlarged band with φ̃φ = φ.
    pub fn widened(self) -> Self {
        DyadicBand { j: self.j, cutoff: Cutoff::Enlarged }
    }

    pub fn scale(&self) -> f64 {
        2f64.powi(self.j)
    }

    /// Closed interval outside of which the multiplier vanishes.
    pub fn support(&self) -> (f64, f64) {
        let s = self.scale();
        match self.cutoff {
            Cutoff::Standard => (0.5 * s, 2.0 * s),
            Cutoff::Enlarged => (0.25 * s, 4.0 * s),
        }
    }

    /// φ(2^{−j}|λ|).
    pub fn eval(&self, lambda: f64) -> f64 {
        let x = lambda.abs() / self.scale();
        match self.cutoff {
            Cutoff::Standard => low_pass(x) - low_pass(2.0 * x),
            Cutoff::Enlarged => low_pass(0.5 * x) - low_pass(4.0 * x),
        }
    }
}

/// Flows of D_{σ,γ} computed mode by mode through the relativistic transform.
#[derive(Debug)]
pub struct Propagator {
    ctx: SpectralContext,
    cone: ConeParams,
    gamma: ExtensionParam,
}

impl Propagator {
    pub fn new(ctx: SpectralContext, cone: ConeParams, gamma: ExtensionParam) -> Self {
        Propagator { ctx, cone, gamma }
    }

    /// Propagator on the default spectral grid for `radial`.
    pub fn with_default_spectrum(radial: Arc<RadialGrid>, cone: ConeParams, gamma: ExtensionParam) -> Self {
        Self::new(SpectralContext::with_default_spectrum(radial), cone, gamma)
    }

    pub fn context(&self) -> &SpectralContext {
        &self.ctx
    }

    pub fn cone(&self) -> ConeParams {
        self.cone
    }

    pub fn gamma(&self) -> ExtensionParam {
        self.gamma
    }

    /// Signed energy density P_k f_k of every stored mode.
    pub fn energy_densities(&self, spec: &ModeSpectrum) -> Result<BTreeMap<i64, EnergyDensity>> {
        let modes: Vec<(&i64, &SpinorProfile)> = spec.modes().collect();
        let dens = modes
            .par_iter()
            .map(|(&k, p)| {
                self.gamma.require_admissible_for(k)?;
                Ok((k, self.ctx.relativistic_forward(k, self.cone, self.gamma, p)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(dens.into_iter().collect())
    }

    /// P_k^{−1} m(ρ) P_k on every mode, for a multiplier m of signed energy.
    pub fn apply_multiplier<M>(&self, spec: &ModeSpectrum, m: M) -> Result<ModeSpectrum>
    where
        M: Fn(f64) -> Complex64 + Sync,
    {
        let modes: Vec<(&i64, &SpinorProfile)> = spec.modes().collect();
        let out = modes
            .par_iter()
            .map(|(&k, p)| {
                self.gamma.require_admissible_for(k)?;
                let v = self.ctx.relativistic_forward(k, self.cone, self.gamma, p)?;
                self.ctx.relativistic_inverse(k, self.cone, self.gamma, &v.multiply(&m))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec_out = ModeSpectrum::new(spec.grid().clone(), spec.k_max());
        for p in out {
            spec_out.insert(p)?;
        }
        Ok(spec_out)
    }

    /// e^{−itD} f; the identity at t = 0.
    pub fn evolve(&self, spec: &ModeSpectrum, t: f64) -> Result<ModeSpectrum> {
        if t == 0.0 {
            for (&k, _) in spec.modes() {
                self.gamma.require_admissible_for(k)?;
            }
            return Ok(spec.clone());
        }
        self.apply_multiplier(spec, |rho| Complex64::from_polar(1.0, -t * rho))
    }

    /// e^{−it|D|} f.
    pub fn evolve_abs(&self, spec: &ModeSpectrum, t: f64) -> Result<ModeSpectrum> {
        self.apply_multiplier(spec, |rho| Complex64::from_polar(1.0, -t * rho.abs()))
    }

    /// e^{−itH} f with H = D².
    pub fn schrodinger(&self, spec: &ModeSpectrum, t: f64) -> Result<ModeSpectrum> {
        self.apply_multiplier(spec, |rho| Complex64::from_polar(1.0, -t * rho * rho))
    }

    /// φ(2^{−j}|D|) f.
    pub fn localize(&self, spec: &ModeSpectrum, band: DyadicBand) -> Result<ModeSpectrum> {
        self.apply_multiplier(spec, |rho| Complex64::new(band.eval(rho), 0.0))
    }

    /// Projection onto positive (or negative) energies.
    pub fn energy_sector(&self, spec: &ModeSpectrum, positive: bool) -> Result<ModeSpectrum> {
        self.apply_multiplier(spec, |rho| Complex64::new(if (rho > 0.0) == positive { 1.0 } else { 0.0 }, 0.0))
    }

    /// e^{−it√H} f, computed componentwise from the scalar Hankel
    /// diagonalization H = H_ν ρ² H_ν of each channel.
    pub fn half_wave(&self, spec: &ModeSpectrum, t: f64) -> Result<ModeSpectrum> {
        let modes: Vec<(&i64, &SpinorProfile)> = spec.modes().collect();
        let phase: Vec<Complex64> =
            self.ctx.spectral().points().iter().map(|&rho| Complex64::from_polar(1.0, -t * rho)).collect();
        let out = modes
            .par_iter()
            .map(|(&k, p)| {
                let ch = mode_channels(k, self.cone, self.gamma)?;
                let flow = |nu, f: &[Complex64]| -> Result<Vec<Complex64>> {
                    let g: Vec<Complex64> =
                        self.ctx.hankel_forward(nu, f)?.iter().zip(&phase).map(|(a, b)| a * b).collect();
                    self.ctx.hankel_inverse(nu, &g)
                };
                SpinorProfile::new(k, p.grid().clone(), flow(ch.upper, &p.upper)?, flow(ch.lower, &p.lower)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spec_out = ModeSpectrum::new(spec.grid().clone(), spec.k_max());
        for p in out {
            spec_out.insert(p)?;
        }
        Ok(spec_out)
    }
}

/// e^{−itD_{σ,γ}} f on the default spectral grid of the spectrum's radial grid.
pub fn evolve(spec: &ModeSpectrum, cone: ConeParams, gamma: ExtensionParam, t: f64) -> Result<ModeSpectrum> {
    Propagator::with_default_spectrum(spec.grid().clone(), cone, gamma).evolve(spec, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_partition_and_support() {
        let mut x = 1e-3;
        while x < 1e3 {
            let total: f64 = (-12..=12).map(|j| DyadicBand::new(j).eval(x)).sum();
            assert!((total - 1.0).abs() < 1e-12, "x = {x}: {total}");
            let b = DyadicBand::new(0);
            if !(0.5..=2.0).contains(&x) {
                assert_eq!(b.eval(x), 0.0);
            }
            if (0.5..=2.0).contains(&x) {
                assert_eq!(b.widened().eval(x), 1.0);
            }
            x *= 1.013;
        }
    }
}
