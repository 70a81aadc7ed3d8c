//! Cone geometry, spinor data, the angular harmonic decomposition and the
//! radial Dirac operators d_k.

use crate::error::{invalid, Error, Result};
use crate::extension::{Branch, ExtensionParam};
use crate::grid::{AngularGrid, RadialGrid};
use crate::specfun::{self, Order};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

/// Cone opening: the angular variable ranges over a circle of length 2πσ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConeParams {
    sigma: f64,
}

impl ConeParams {
    pub const FLAT: ConeParams = ConeParams { sigma: 1.0 };

    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma <= 1.0 {
            Ok(ConeParams { sigma })
        } else {
            Err(invalid("sigma", format!("must lie in (0, 1], got {sigma}")))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Eigenvalue k/σ of the boundary operator on mode k.
    pub fn lambda(&self, k: i64) -> f64 {
        k as f64 / self.sigma
    }

    /// ν₊(k) = |k/σ + ½|.
    pub fn nu_plus(&self, k: i64) -> f64 {
        (self.lambda(k) + 0.5).abs()
    }

    /// ν₋(k) = |k/σ − ½|.
    pub fn nu_minus(&self, k: i64) -> f64 {
        (self.lambda(k) - 0.5).abs()
    }
}

impl TryFrom<f64> for ConeParams {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        ConeParams::new(v)
    }
}

impl From<ConeParams> for f64 {
    fn from(c: ConeParams) -> f64 {
        c.sigma
    }
}

/// The Bessel orders and signs carried by each spinor component of the
/// positive-energy eigenfunction of mode k:
/// Ψ_k(r) = 2^{−½}(c_u J_{ν_u}(r), c_l J_{ν_l}(r)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeChannels {
    pub upper: Order,
    pub lower: Order,
    pub upper_sign: f64,
    pub lower_sign: f64,
}

/// Channel data for mode k; fails for k = 0 with an inadmissible γ.
pub fn mode_channels(k: i64, cone: ConeParams, gamma: ExtensionParam) -> Result<ModeChannels> {
    if k == 0 {
        return match gamma.branch() {
            Branch::SinZero { cos } => Ok(ModeChannels {
                upper: Order::MINUS_HALF,
                lower: Order::HALF,
                upper_sign: cos,
                lower_sign: -cos,
            }),
            Branch::CosZero { sin } => Ok(ModeChannels {
                upper: Order::HALF,
                lower: Order::MINUS_HALF,
                upper_sign: sin,
                lower_sign: sin,
            }),
            Branch::Mixed => Err(Error::Inadmissible { gamma: gamma.gamma() }),
        };
    }
    Ok(ModeChannels {
        upper: Order::new(cone.nu_plus(k))?,
        lower: Order::new(cone.nu_minus(k))?,
        upper_sign: 1.0,
        lower_sign: if k > 0 { 1.0 } else { -1.0 },
    })
}

/// Two-component radial data of a single angular mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorProfile {
    pub k: i64,
    grid: Arc<RadialGrid>,
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
}

impl SpinorProfile {
    pub fn new(k: i64, grid: Arc<RadialGrid>, upper: Vec<Complex64>, lower: Vec<Complex64>) -> Result<Self> {
        if upper.len() != grid.len() || lower.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "profile components have {} and {} values for a grid of {} nodes",
                upper.len(),
                lower.len(),
                grid.len()
            )));
        }
        if upper.iter().chain(&lower).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("profile", "components must be finite"));
        }
        Ok(SpinorProfile { k, grid, upper, lower })
    }

    pub fn zeros(k: i64, grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        SpinorProfile { k, grid, upper: vec![Complex64::default(); n], lower: vec![Complex64::default(); n] }
    }

    /// Samples `f(r) = (upper, lower)` at every radial node.
    pub fn from_fn<F: FnMut(f64) -> [Complex64; 2]>(k: i64, grid: Arc<RadialGrid>, mut f: F) -> Self {
        let (upper, lower) = grid.points().iter().map(|&r| f(r)).map(|[a, b]| (a, b)).unzip();
        SpinorProfile { k, grid, upper, lower }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Pointwise density |u₁|² + |u₂|².
    pub fn density(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    /// ‖p‖² in L²(r dr)², including the small-r tail estimate.
    pub fn norm_sq(&self) -> f64 {
        self.grid.integrate_density(&self.density())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// ⟨self, other⟩ = ∫ (u₁ v̄₁ + u₂ v̄₂) r dr by grid quadrature.
    pub fn inner(&self, other: &SpinorProfile) -> Complex64 {
        let w = self.grid.weights();
        (0..self.len())
            .map(|i| (self.upper[i] * other.upper[i].conj() + self.lower[i] * other.lower[i].conj()) * w[i])
            .sum()
    }

    /// self + a·other, keeping self's mode index.
    pub fn axpy(&self, a: Complex64, other: &SpinorProfile) -> SpinorProfile {
        let upper = self.upper.iter().zip(&other.upper).map(|(x, y)| x + a * y).collect();
        let lower = self.lower.iter().zip(&other.lower).map(|(x, y)| x + a * y).collect();
        SpinorProfile { k: self.k, grid: self.grid.clone(), upper, lower }
    }

    pub fn scaled(&self, a: Complex64) -> SpinorProfile {
        SpinorProfile {
            k: self.k,
            grid: self.grid.clone(),
            upper: self.upper.iter().map(|x| a * x).collect(),
            lower: self.lower.iter().map(|x| a * x).collect(),
        }
    }

    /// Relative L² distance ‖self − other‖/‖other‖.
    pub fn rel_distance(&self, other: &SpinorProfile) -> f64 {
        self.axpy(Complex64::new(-1.0, 0.0), other).norm() / other.norm()
    }
}

/// Mode-indexed collection of profiles; absent modes are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    grid: Arc<RadialGrid>,
    k_max: usize,
    modes: BTreeMap<i64, SpinorProfile>,
}

impl ModeSpectrum {
    pub fn new(grid: Arc<RadialGrid>, k_max: usize) -> Self {
        ModeSpectrum { grid, k_max, modes: BTreeMap::new() }
    }

    pub fn insert(&mut self, profile: SpinorProfile) -> Result<()> {
        if profile.k.unsigned_abs() as usize > self.k_max {
            return Err(invalid("k", format!("mode {} exceeds K_max = {}", profile.k, self.k_max)));
        }
        if profile.grid != self.grid {
            return Err(Error::GridMismatch("profile grid differs from spectrum grid".into()));
        }
        self.modes.insert(profile.k, profile);
        Ok(())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn get(&self, k: i64) -> Option<&SpinorProfile> {
        self.modes.get(&k)
    }

    pub fn modes(&self) -> impl Iterator<Item = (&i64, &SpinorProfile)> {
        self.modes.iter()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.modes.values().map(SpinorProfile::norm_sq).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Applies `f` to every stored profile.
    pub fn try_map<F>(&self, mut f: F) -> Result<ModeSpectrum>
    where
        F: FnMut(&SpinorProfile) -> Result<SpinorProfile>,
    {
        let mut out = ModeSpectrum::new(self.grid.clone(), self.k_max);
        for p in self.modes.values() {
            out.insert(f(p)?)?;
        }
        Ok(out)
    }

    /// Relative distance ‖self − other‖/‖other‖ over the union of modes.
    pub fn rel_distance(&self, other: &ModeSpectrum) -> f64 {
        let keys: BTreeSet<i64> = self.modes.keys().chain(other.modes.keys()).copied().collect();
        let num: f64 = keys
            .iter()
            .map(|k| match (self.modes.get(k), other.modes.get(k)) {
                (Some(a), Some(b)) => a.axpy(Complex64::new(-1.0, 0.0), b).norm_sq(),
                (Some(a), None) => a.norm_sq(),
                (None, Some(b)) => b.norm_sq(),
                (None, None) => 0.0,
            })
            .sum();
        num.sqrt() / other.norm()
    }
}

/// Two-component complex field on the radial × angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub cone: ConeParams,
    radial: Arc<RadialGrid>,
    pub angular: AngularGrid,
    values: Vec<[Complex64; 2]>,
}

impl SpinorField {
    pub fn new(cone: ConeParams, radial: Arc<RadialGrid>, angular: AngularGrid, values: Vec<[Complex64; 2]>) -> Result<Self> {
        if values.len() != radial.len() * angular.m {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, grid needs {} x {}",
                values.len(),
                radial.len(),
                angular.m
            )));
        }
        if (angular.sigma - cone.sigma()).abs() > 0.0 {
            return Err(Error::GridMismatch("angular grid sigma differs from cone sigma".into()));
        }
        Ok(SpinorField { cone, radial, angular, values })
    }

    pub fn from_fn<F: FnMut(f64, f64) -> [Complex64; 2]>(
        cone: ConeParams,
        radial: Arc<RadialGrid>,
        angular: AngularGrid,
        mut f: F,
    ) -> Result<Self> {
        let thetas = angular.thetas();
        let mut values = Vec::with_capacity(radial.len() * angular.m);
        for &r in radial.points() {
            for &t in &thetas {
                values.push(f(r, t));
            }
        }
        Self::new(cone, radial, angular, values)
    }

    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn values(&self) -> &[[Complex64; 2]] {
        &self.values
    }

    /// Sample at radial node `i`, angular node `j`.
    pub fn at(&self, i: usize, j: usize) -> [Complex64; 2] {
        self.values[i * self.angular.m + j]
    }

    /// ‖f‖² in L²(X)² by trapezoid in θ and log-trapezoid in r.
    pub fn norm_sq(&self) -> f64 {
        let dens = self.angular_integrals(|v| v[0].norm_sqr() + v[1].norm_sqr());
        self.radial.integrate_density(&dens)
    }

    /// ∫ g(f(r,θ)) dθ at every radial node.
    pub fn angular_integrals<G: Fn(&[Complex64; 2]) -> f64>(&self, g: G) -> Vec<f64> {
        let w = self.angular.weight();
        self.values.chunks(self.angular.m).map(|row| row.iter().map(&g).sum::<f64>() * w).collect()
    }
}

/// Which part of the angular decomposition to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// Mode k = 0.
    P0,
    /// All modes k ≠ 0.
    Pperp,
    /// Modes k > 0.
    Pgt,
    /// Modes k < 0.
    Plt,
}

impl Projection {
    pub fn keeps(self, k: i64) -> bool {
        match self {
            Projection::P0 => k == 0,
            Projection::Pperp => k != 0,
            Projection::Pgt => k > 0,
            Projection::Plt => k < 0,
        }
    }
}

/// Eigenvalue k/σ and normalized harmonic (2πσ)^{−½}(e^{−ikθ/σ}, e^{−ikθ/σ}).
pub fn angular_eigen(k: i64, cone: ConeParams, theta: f64) -> (f64, [Complex64; 2]) {
    let lambda = cone.lambda(k);
    let h = Complex64::from_polar((2.0 * PI * cone.sigma()).sqrt().recip(), -lambda * theta);
    (lambda, [h, h])
}

/// Angular mode coefficients f_k(r) = ∫ conj(Φ_k(θ)) f(r, θ) dθ, |k| ≤ K_max.
pub fn decompose(field: &SpinorField, k_max: usize) -> Result<ModeSpectrum> {
    let m = field.angular.m;
    if m < 4 * k_max + 1 {
        return Err(Error::Resolution { m, k_max, needed: 4 * k_max + 1 });
    }
    let thetas = field.angular.thetas();
    let w = field.angular.weight();
    let cone = field.cone;
    let n = field.radial.len();
    let mut spec = ModeSpectrum::new(field.radial.clone(), k_max);
    for k in -(k_max as i64)..=(k_max as i64) {
        let conj: Vec<Complex64> = thetas.iter().map(|&t| angular_eigen(k, cone, t).1[0].conj() * w).collect();
        let mut upper = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n);
        for row in field.values.chunks(m) {
            let mut a = Complex64::default();
            let mut b = Complex64::default();
            for (v, c) in row.iter().zip(&conj) {
                a += v[0] * c;
                b += v[1] * c;
            }
            upper.push(a);
            lower.push(b);
        }
        spec.insert(SpinorProfile { k, grid: field.radial.clone(), upper, lower })?;
    }
    Ok(spec)
}

/// f(r, θ) = Σ_k Φ_k(θ) f_k(r) on the given angular grid.
pub fn synthesize(spec: &ModeSpectrum, cone: ConeParams, angular: AngularGrid) -> Result<SpinorField> {
    let thetas = angular.thetas();
    let n = spec.grid.len();
    let mut values = vec![[Complex64::default(); 2]; n * angular.m];
    for (&k, p) in spec.modes() {
        let harm: Vec<Complex64> = thetas.iter().map(|&t| angular_eigen(k, cone, t).1[0]).collect();
        for i in 0..n {
            let row = &mut values[i * angular.m..(i + 1) * angular.m];
            for (v, h) in row.iter_mut().zip(&harm) {
                v[0] += p.upper[i] * h;
                v[1] += p.lower[i] * h;
            }
        }
    }
    SpinorField::new(cone, spec.grid.clone(), angular, values)
}

/// Keeps the modes selected by `which`.
pub fn project(spec: &ModeSpectrum, which: Projection) -> ModeSpectrum {
    let mut out = ModeSpectrum::new(spec.grid.clone(), spec.k_max);
    for (&k, p) in spec.modes() {
        if which.keeps(k) {
            out.modes.insert(k, p.clone());
        }
    }
    out
}

/// d/du of samples on a uniform grid in u = ln r: 4th-order centered
/// stencils, one-sided 4th-order stencils at the two ends.
fn log_derivative(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let f = values;
    let c = 1.0 / (12.0 * h);
    let mut d = vec![Complex64::default(); n];
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * c;
    }
    d[0] = (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * c;
    d[1] = (f[0] * -3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * c;
    let m = n - 1;
    d[m] = (f[m] * 25.0 - f[m - 1] * 48.0 + f[m - 2] * 36.0 - f[m - 3] * 16.0 + f[m - 4] * 3.0) * c;
    d[m - 1] = (f[m] * 3.0 + f[m - 1] * 10.0 - f[m - 2] * 18.0 + f[m - 3] * 6.0 - f[m - 4]) * c;
    d
}

/// Estimated relative truncation error of the 4th-order derivative, from the
/// fifth differences of the samples.
pub fn dmu_truncation_estimate(grid: &RadialGrid, values: &[Complex64]) -> f64 {
    let h = grid.log_step();
    let n = values.len();
    if n < 6 {
        return f64::INFINITY;
    }
    let deriv = log_derivative(values, h);
    let scale = deriv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let f = values;
    let mut worst: f64 = 0.0;
    for i in 0..n - 5 {
        let d5 = f[i + 5] - f[i + 4] * 5.0 + f[i + 3] * 10.0 - f[i + 2] * 10.0 + f[i + 1] * 5.0 - f[i];
        worst = worst.max(d5.norm() / (30.0 * h));
    }
    worst / scale
}

/// ∂_μ f = ∂_r f + (μ/r) f on the radial grid.
pub fn apply_dmu(grid: &RadialGrid, mu: f64, values: &[Complex64]) -> Result<Vec<Complex64>> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} values for {} radial nodes", values.len(), grid.len())));
    }
    let est = dmu_truncation_estimate(grid, values);
    if est > 1e-4 {
        log::warn!("radial grid too coarse for the data: estimated derivative truncation error {est:.2e}");
    }
    let du = log_derivative(values, grid.log_step());
    Ok(grid
        .points()
        .iter()
        .zip(du.iter().zip(values))
        .map(|(&r, (d, f))| (d + f * mu) / r)
        .collect())
}

/// Radial Dirac operator of mode k:
/// (φ, ψ) ↦ (−∂_{½−k/σ} ψ, ∂_{½+k/σ} φ).
pub fn apply_dk(k: i64, cone: ConeParams, p: &SpinorProfile) -> Result<SpinorProfile> {
    let lam = cone.lambda(k);
    let upper: Vec<Complex64> = apply_dmu(&p.grid, 0.5 - lam, &p.lower)?.into_iter().map(|z| -z).collect();
    let lower = apply_dmu(&p.grid, 0.5 + lam, &p.upper)?;
    Ok(SpinorProfile { k: p.k, grid: p.grid.clone(), upper, lower })
}

/// Real-valued Ψ_k(ρ r) including the 2^{−½} prefactor and the sign flip of
/// the lower component for negative energies.
pub(crate) fn eigenfunction_real(ch: &ModeChannels, rho: f64, r: f64) -> [f64; 2] {
    let x = rho.abs() * r;
    let a = specfun::bessel_j_unchecked(ch.upper.value(), x);
    let b = specfun::bessel_j_unchecked(ch.lower.value(), x);
    let s = if rho < 0.0 { -1.0 } else { 1.0 };
    [FRAC_1_SQRT_2 * ch.upper_sign * a, FRAC_1_SQRT_2 * ch.lower_sign * s * b]
}

/// Generalized eigenfunction Ψ_k(|ρ| r) of d_k^γ with eigenvalue ρ.
pub fn generalized_eigenfunction(
    k: i64,
    cone: ConeParams,
    gamma: ExtensionParam,
    rho: f64,
    r: f64,
) -> Result<[Complex64; 2]> {
    if rho == 0.0 || !rho.is_finite() {
        return Err(invalid("rho", format!("must be finite and nonzero, got {rho}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("r", format!("must be positive, got {r}")));
    }
    let ch = mode_channels(k, cone, gamma)?;
    if rho.abs() * r > specfun::MAX_ARGUMENT {
        return Err(specfun::SpecFunError::Overflow { x: rho.abs() * r, max: specfun::MAX_ARGUMENT }.into());
    }
    let [a, b] = eigenfunction_real(&ch, rho, r);
    Ok([Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
}
