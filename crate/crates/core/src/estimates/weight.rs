//! Diagonal weights taming the r^{−½} singularity of the J_{−½} channel.

use crate::error::{invalid, Error, Result};
use crate::extension::{Branch, ExtensionParam};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// W_j: (1 + (2^j r)^{−½})^{−1} on the singular component.
    Dyadic { j: i32 },
    /// W^θ: (1 + r^{−½−ε})^{−θ} on the singular component.
    Fixed { epsilon: f64, theta: f64 },
}

/// A weight diag(w(r), 1) or diag(1, w(r)), the nontrivial entry sitting on
/// the component that carries J_{−½} for the extension γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weight {
    kind: WeightKind,
    gamma: ExtensionParam,
    /// 0 for the upper component (sin γ = 0), 1 for the lower (cos γ = 0).
    singular: usize,
}

impl Weight {
    fn build(kind: WeightKind, gamma: ExtensionParam) -> Result<Self> {
        let singular = match gamma.branch() {
            Branch::SinZero { .. } => 0,
            Branch::CosZero { .. } => 1,
            Branch::Mixed => return Err(Error::Inadmissible { gamma: gamma.gamma() }),
        };
        Ok(Weight { kind, gamma, singular })
    }

    pub fn dyadic(j: i32, gamma: ExtensionParam) -> Result<Self> {
        Self::build(WeightKind::Dyadic { j }, gamma)
    }

    /// The fixed weight raised to θ; needs 0 < ε < ½ and θ ≥ 0.
    pub fn fixed(epsilon: f64, theta: f64, gamma: ExtensionParam) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(invalid("epsilon", format!("must lie in (0, 1/2), got {epsilon}")));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(invalid("theta", format!("must be finite and nonnegative, got {theta}")));
        }
        Self::build(WeightKind::Fixed { epsilon, theta }, gamma)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn gamma(&self) -> ExtensionParam {
        self.gamma
    }

    /// Index of the weighted spinor component.
    pub fn singular_component(&self) -> usize {
        self.singular
    }

    /// The nontrivial diagonal entry at radius r > 0, in (0, 1].
    pub fn factor(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Dyadic { j } => {
                let x = (2f64.powi(j) * r).sqrt();
                x / (1.0 + x)
            }
            WeightKind::Fixed { epsilon, theta } => {
                let x = r.powf(0.5 + epsilon);
                (x / (1.0 + x)).powf(theta)
            }
        }
    }

    /// Diagonal entries (upper, lower) at radius r.
    pub fn entries(&self, r: f64) -> [f64; 2] {
        let mut e = [1.0; 2];
        e[self.singular] = self.factor(r);
        e
    }

    /// Checks θ > 1 − 4/q for the fixed weight; the dyadic weight has no
    /// exponent condition.
    pub fn require_exponent_for(&self, q: f64) -> Result<()> {
        if let WeightKind::Fixed { theta, .. } = self.kind {
            let min = 1.0 - 4.0 / q;
            if theta <= min {
                return Err(invalid("theta", format!("weighted L^{q} estimates need theta > {min}, got {theta}")));
            }
        }
        Ok(())
    }
}
