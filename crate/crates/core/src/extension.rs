//! Self-adjoint extensions of the k = 0 radial operator: deficiency
//! indices, deficiency elements, the γ-family of domains and the boundary
//! form.

use crate::eigenbasis::{apply_dk, ConeParams, SpinorProfile};
use crate::error::{invalid, Error, Result};
use crate::grid::RadialGrid;
use crate::specfun::{bessel_k, Order};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

/// Tolerance on sin γ cos γ for dispersive admissibility.
pub const ADMISSIBILITY_TOL: f64 = 1e-14;

/// Extension angle γ ∈ [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExtensionParamRepr")]
pub struct ExtensionParam {
    gamma: f64,
    dispersive_admissible: bool,
}

#[derive(Deserialize)]
struct ExtensionParamRepr {
    gamma: f64,
}

impl TryFrom<ExtensionParamRepr> for ExtensionParam {
    type Error = Error;
    fn try_from(r: ExtensionParamRepr) -> Result<Self> {
        ExtensionParam::new(r.gamma)
    }
}

/// How the k = 0 eigenfunctions pair J_{±½} with the two components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// sin γ = 0; carries the sign of cos γ.
    SinZero { cos: f64 },
    /// cos γ = 0; carries the sign of sin γ.
    CosZero { sin: f64 },
    /// sin γ cos γ ≠ 0.
    Mixed,
}

impl ExtensionParam {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be finite, got {gamma}")));
        }
        let gamma = gamma.rem_euclid(TAU);
        let (s, c) = gamma.sin_cos();
        Ok(ExtensionParam { gamma, dispersive_admissible: (s * c).abs() <= ADMISSIBILITY_TOL })
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::new(deg.to_radians())
    }

    /// γ = 0.
    pub fn sin_zero() -> Self {
        ExtensionParam { gamma: 0.0, dispersive_admissible: true }
    }

    /// γ = π/2.
    pub fn cos_zero() -> Self {
        ExtensionParam { gamma: FRAC_PI_2, dispersive_admissible: true }
    }

    /// γ = π.
    pub fn sin_zero_reflected() -> Self {
        ExtensionParam { gamma: PI, dispersive_admissible: true }
    }

    /// γ = 3π/2.
    pub fn cos_zero_reflected() -> Self {
        ExtensionParam { gamma: 3.0 * FRAC_PI_2, dispersive_admissible: true }
    }

    /// The four admissible angles.
    pub fn canonical() -> [ExtensionParam; 4] {
        [Self::sin_zero(), Self::cos_zero(), Self::sin_zero_reflected(), Self::cos_zero_reflected()]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_admissible(&self) -> bool {
        self.dispersive_admissible
    }

    pub fn branch(&self) -> Branch {
        let (s, c) = self.gamma.sin_cos();
        if !self.dispersive_admissible {
            Branch::Mixed
        } else if s.abs() < c.abs() {
            Branch::SinZero { cos: c.signum() }
        } else {
            Branch::CosZero { sin: s.signum() }
        }
    }

    /// (cos γ, sin γ), with exact zeros on the admissible branches.
    pub fn cos_sin(&self) -> (f64, f64) {
        match self.branch() {
            Branch::SinZero { cos } => (cos, 0.0),
            Branch::CosZero { sin } => (0.0, sin),
            Branch::Mixed => {
                let (s, c) = self.gamma.sin_cos();
                (c, s)
            }
        }
    }

    pub(crate) fn require_admissible_for(&self, k: i64) -> Result<()> {
        if k == 0 && !self.dispersive_admissible {
            Err(Error::Inadmissible { gamma: self.gamma })
        } else {
            Ok(())
        }
    }
}

/// Deficiency indices (n₊, n₋) of d_k: (1, 1) when both K_{|k/σ±½|} are
/// square integrable near the origin, else (0, 0).
pub fn deficiency_indices(k: i64, cone: ConeParams) -> (u32, u32) {
    if cone.nu_plus(k) < 1.0 && cone.nu_minus(k) < 1.0 {
        (1, 1)
    } else {
        (0, 0)
    }
}

/// Sign selecting ker(d* − i) or ker(d* + i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeficiencySign {
    Plus,
    Minus,
}

impl DeficiencySign {
    /// ±i.
    pub fn unit(self) -> Complex64 {
        match self {
            DeficiencySign::Plus => Complex64::i(),
            DeficiencySign::Minus => -Complex64::i(),
        }
    }
}

/// g_± = (K_½(r), ±i K_½(r)).
#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyElement {
    pub sign: DeficiencySign,
    pub profile: SpinorProfile,
}

impl DeficiencyElement {
    pub fn new(sign: DeficiencySign, grid: Arc<RadialGrid>) -> Self {
        let u = sign.unit();
        let profile = SpinorProfile::from_fn(0, grid, |r| {
            let kh = k_half(r);
            [Complex64::new(kh, 0.0), u * kh]
        });
        DeficiencyElement { sign, profile }
    }
}

fn k_half(r: f64) -> f64 {
    bessel_k(Order::HALF, r).expect("r > 0 on radial grids")
}

/// ‖d_k c ∓ i c‖/‖c‖ over interior nodes.
pub fn deficiency_solution_residual(
    k: i64,
    cone: ConeParams,
    candidate: &SpinorProfile,
    sign: DeficiencySign,
) -> Result<f64> {
    let d = apply_dk(k, cone, candidate)?;
    let res = d.axpy(-sign.unit(), candidate);
    let w = candidate.grid().weights();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in candidate.grid().interior() {
        num += w[i] * (res.upper[i].norm_sqr() + res.lower[i].norm_sqr());
        den += w[i] * (candidate.upper[i].norm_sqr() + candidate.lower[i].norm_sqr());
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Limits of the boundary form r (χ₁ φ̄₂ − χ₂ φ̄₁) at both grid ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryForm {
    pub at_zero: Complex64,
    pub at_infinity: Complex64,
    /// max_r r (|χ₁||φ₂| + |χ₂||φ₁|): the size of the terms that cancel.
    pub scale: f64,
}

impl BoundaryForm {
    pub fn relative_at_zero(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.at_zero.norm() / self.scale
        }
    }
}

/// Polynomial extrapolation to x = 0 through the given samples (Neville).
fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i] * xs[i + m] - p[i + 1] * xs[i]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Boundary form of two profiles, extrapolated to r → 0 and r → ∞ from four
/// nodes spanning one octave at each end of the grid.
pub fn boundary_form(chi: &SpinorProfile, phi: &SpinorProfile) -> Result<BoundaryForm> {
    if chi.grid() != phi.grid() {
        return Err(Error::GridMismatch("boundary form needs profiles on the same grid".into()));
    }
    let grid = chi.grid();
    let r = grid.points();
    let n = r.len();
    let form = |i: usize| (chi.upper[i] * phi.lower[i].conj() - chi.lower[i] * phi.upper[i].conj()) * r[i];
    let stride = ((2f64.ln() / (3.0 * grid.log_step())).round() as usize).clamp(1, (n - 1) / 6);
    let inner: Vec<usize> = (0..4).map(|j| j * stride).collect();
    let outer: Vec<usize> = (0..4).map(|j| n - 1 - j * stride).collect();
    let at_zero = extrapolate_to_zero(
        &inner.iter().map(|&i| r[i]).collect::<Vec<_>>(),
        &inner.iter().map(|&i| form(i)).collect::<Vec<_>>(),
    );
    let at_infinity = extrapolate_to_zero(
        &outer.iter().map(|&i| 1.0 / r[i]).collect::<Vec<_>>(),
        &outer.iter().map(|&i| form(i)).collect::<Vec<_>>(),
    );
    let scale = (0..n)
        .map(|i| r[i] * (chi.upper[i].norm() * phi.lower[i].norm() + chi.lower[i].norm() * phi.upper[i].norm()))
        .fold(0.0, f64::max);
    Ok(BoundaryForm { at_zero, at_infinity, scale })
}

/// (cos γ K_½, sin γ K_½): the singular part of elements of the γ-domain.
pub fn singular_profile(grid: Arc<RadialGrid>, gamma: ExtensionParam) -> SpinorProfile {
    let (c, s) = gamma.cos_sin();
    SpinorProfile::from_fn(0, grid, |r| {
        let kh = k_half(r);
        [Complex64::new(c * kh, 0.0), Complex64::new(s * kh, 0.0)]
    })
}

/// An element c (cos γ K_½, sin γ K_½) + regular of the γ-domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainElement {
    pub c: Complex64,
    pub regular: SpinorProfile,
    pub gamma: ExtensionParam,
}

impl DomainElement {
    pub fn new(c: Complex64, regular: SpinorProfile, gamma: ExtensionParam) -> Result<Self> {
        if regular.k != 0 {
            return Err(invalid("regular", format!("domain elements live in mode 0, got mode {}", regular.k)));
        }
        Ok(DomainElement { c, regular, gamma })
    }

    /// The represented profile.
    pub fn value(&self) -> SpinorProfile {
        self.regular.axpy(self.c, &singular_profile(self.regular.grid().clone(), self.gamma))
    }
}

/// d_0^γ u = c (sin γ K_½, −cos γ K_½) + d_0(regular).
pub fn apply_d0_gamma(elem: &DomainElement) -> Result<SpinorProfile> {
    let reg = apply_dk(0, ConeParams::FLAT, &elem.regular)?;
    let (c, s) = elem.gamma.cos_sin();
    let grid = elem.regular.grid().clone();
    let action = SpinorProfile::from_fn(0, grid, |r| {
        let kh = k_half(r);
        [Complex64::new(s * kh, 0.0), Complex64::new(-c * kh, 0.0)]
    });
    Ok(reg.axpy(elem.c, &action))
}
