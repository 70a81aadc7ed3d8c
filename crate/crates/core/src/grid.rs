//! Discretizations of the radial half-line, the spectral half-line and the
//! angular circle of circumference 2πσ.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Geometric sequence x_i = x_min e^{i h} with trapezoid weights for
/// ∫ g(x) x dx taken in the log variable (Jacobian x²).
#[derive(Debug, Clone, PartialEq)]
struct LogLattice {
    points: Vec<f64>,
    weights: Vec<f64>,
    log_step: f64,
}

impl LogLattice {
    fn new(x_min: f64, log_step: f64, n: usize) -> Self {
        let points: Vec<f64> = (0..n).map(|i| x_min * (i as f64 * log_step).exp()).collect();
        let mut weights: Vec<f64> = points.iter().map(|x| log_step * x * x).collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        LogLattice { points, weights, log_step }
    }

    /// ∫_0^{x_N} v x dx for a nonnegative density v, with the piece below x_0
    /// extrapolated as a power law when that is integrable.
    fn integrate_density(&self, v: &[f64]) -> f64 {
        let body: f64 = v.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
        body + power_tail(v[0], v[1], self.points[0], self.log_step)
    }
}

/// ∫_0^{x0} v(x) x dx assuming v(x) = v0 (x/x0)^b with b read off from
/// v1 = v(x0 e^h). Returns 0 when the fit is unusable.
pub(crate) fn power_tail(v0: f64, v1: f64, x0: f64, h: f64) -> f64 {
    if !(v0 > 0.0 && v1 > 0.0) {
        return 0.0;
    }
    let b = (v1 / v0).ln() / h;
    if b + 2.0 > 0.2 {
        v0 * x0 * x0 / (b + 2.0)
    } else {
        0.0
    }
}

/// Log-spaced radial nodes r_1 < … < r_N with weights for ∫_0^∞ f(r) r dr.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    lattice: LogLattice,
}

/// Compact description of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

impl Default for RadialGridSpec {
    fn default() -> Self {
        RadialGridSpec { r_min: 1e-4 * RadialGrid::DEFAULT_RADIUS, r_max: RadialGrid::DEFAULT_RADIUS, n: RadialGrid::DEFAULT_NODES }
    }
}

impl RadialGrid {
    pub const DEFAULT_NODES: usize = 4096;
    pub const DEFAULT_RADIUS: f64 = 40.0;

    /// N log-spaced nodes on [r_min, r_max].
    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0) || !r_min.is_finite() {
            return Err(invalid("r_min", format!("must be positive and finite, got {r_min}")));
        }
        if !(r_max > r_min) || !r_max.is_finite() {
            return Err(invalid("r_max", format!("must exceed r_min = {r_min}, got {r_max}")));
        }
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 radial nodes, got {n}")));
        }
        let h = (r_max / r_min).ln() / (n - 1) as f64;
        Ok(RadialGrid { lattice: LogLattice::new(r_min, h, n) })
    }

    /// The default layout r ∈ [1e-4 R, R] with 4096 nodes.
    pub fn with_radius(radius: f64) -> Result<Self> {
        Self::geometric(1e-4 * radius, radius, Self::DEFAULT_NODES)
    }

    pub fn from_spec(spec: &RadialGridSpec) -> Result<Self> {
        Self::geometric(spec.r_min, spec.r_max, spec.n)
    }

    pub fn spec(&self) -> RadialGridSpec {
        RadialGridSpec { r_min: self.r_min(), r_max: self.r_max(), n: self.len() }
    }

    pub fn len(&self) -> usize {
        self.lattice.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.lattice.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.lattice.weights
    }

    /// Spacing h of the nodes in the variable ln r.
    pub fn log_step(&self) -> f64 {
        self.lattice.log_step
    }

    pub fn r_min(&self) -> f64 {
        self.lattice.points[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.lattice.points.last().expect("grid has nodes")
    }

    /// Indices whose finite-difference stencils are centered.
    pub fn interior(&self) -> std::ops::Range<usize> {
        2..self.len() - 2
    }

    /// Plain quadrature Σ w_i g_i ≈ ∫ g(r) r dr over [r_1, r_N].
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().zip(self.weights()).map(|(a, w)| a * w).sum()
    }

    /// ∫_0^{r_N} v(r) r dr for a nonnegative density v, including a power-law
    /// estimate of the piece on (0, r_1).
    pub fn integrate_density(&self, v: &[f64]) -> f64 {
        self.lattice.integrate_density(v)
    }
}

/// Positive spectral nodes ρ_1 < … < ρ_n, log-spaced; each node stands for
/// the pair ±ρ_b.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    lattice: LogLattice,
}

/// Compact description of a spectral grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Ratio between the spectral and radial log steps (commensurate grids).
    pub stride: usize,
}

impl Default for SpectralGridSpec {
    fn default() -> Self {
        SpectralGridSpec { rho_min: SpectralGrid::DEFAULT_RHO_MIN, rho_max: SpectralGrid::DEFAULT_RHO_MAX, stride: 1 }
    }
}

impl SpectralGrid {
    pub const DEFAULT_RHO_MIN: f64 = 1e-6;
    pub const DEFAULT_RHO_MAX: f64 = 64.0;

    /// n log-spaced nodes on [rho_min, rho_max].
    pub fn geometric(rho_min: f64, rho_max: f64, n: usize) -> Result<Self> {
        if !(rho_min > 0.0) || !rho_min.is_finite() {
            return Err(invalid("rho_min", format!("must be positive and finite, got {rho_min}")));
        }
        if !(rho_max > rho_min) || !rho_max.is_finite() {
            return Err(invalid("rho_max", format!("must exceed rho_min = {rho_min}, got {rho_max}")));
        }
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 spectral nodes, got {n}")));
        }
        let h = (rho_max / rho_min).ln() / (n - 1) as f64;
        Ok(SpectralGrid { lattice: LogLattice::new(rho_min, h, n) })
    }

    /// A grid whose log step is `stride` times the radial log step, starting
    /// at rho_min and reaching at least rho_max. On such grids the products
    /// r_i ρ_b form a single geometric sequence, so Bessel tables are 1-D.
    pub fn commensurate(radial: &RadialGrid, rho_min: f64, rho_max: f64, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride", "must be at least 1"));
        }
        if !(rho_min > 0.0) || !(rho_max > rho_min) {
            return Err(invalid("rho_min", format!("need 0 < rho_min < rho_max, got [{rho_min}, {rho_max}]")));
        }
        let h = radial.log_step() * stride as f64;
        let n = ((rho_max / rho_min).ln() / h).ceil() as usize + 1;
        Ok(SpectralGrid { lattice: LogLattice::new(rho_min, h, n.max(8)) })
    }

    /// Default spectral grid for a radial grid: [1e-6, 64], same log step.
    pub fn default_for(radial: &RadialGrid) -> Self {
        Self::commensurate(radial, Self::DEFAULT_RHO_MIN, Self::DEFAULT_RHO_MAX, 1).expect("default spectral grid is valid")
    }

    pub fn from_spec(radial: &RadialGrid, spec: &SpectralGridSpec) -> Result<Self> {
        Self::commensurate(radial, spec.rho_min, spec.rho_max, spec.stride)
    }

    pub fn len(&self) -> usize {
        self.lattice.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.lattice.points
    }

    /// Weights for ∫_0^∞ g(ρ) ρ dρ on the positive branch.
    pub fn weights(&self) -> &[f64] {
        &self.lattice.weights
    }

    pub fn log_step(&self) -> f64 {
        self.lattice.log_step
    }

    pub fn rho_min(&self) -> f64 {
        self.lattice.points[0]
    }

    pub fn rho_max(&self) -> f64 {
        *self.lattice.points.last().expect("grid has nodes")
    }

    /// ∫_0^{ρ_n} v(ρ) ρ dρ for a nonnegative density, with power-law tail.
    pub fn integrate_density(&self, v: &[f64]) -> f64 {
        self.lattice.integrate_density(v)
    }
}

/// M equispaced angles θ_m = −πσ + 2πσ m/M on the circle of length 2πσ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    pub m: usize,
    pub sigma: f64,
}

impl AngularGrid {
    pub fn new(m: usize, sigma: f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "angular grid needs at least one node"));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(invalid("sigma", format!("must lie in (0, 1], got {sigma}")));
        }
        Ok(AngularGrid { m, sigma })
    }

    /// Smallest grid resolving modes |k| ≤ k_max exactly: M = 4 K_max + 1.
    pub fn for_modes(k_max: usize, sigma: f64) -> Result<Self> {
        Self::new(4 * k_max + 1, sigma)
    }

    pub fn theta(&self, i: usize) -> f64 {
        -PI * self.sigma + 2.0 * PI * self.sigma * i as f64 / self.m as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.theta(i)).collect()
    }

    /// Trapezoid weight 2πσ/M.
    pub fn weight(&self) -> f64 {
        2.0 * PI * self.sigma / self.m as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_ranges() {
        assert!(RadialGrid::geometric(0.0, 1.0, 100).is_err());
        assert!(RadialGrid::geometric(1.0, 0.5, 100).is_err());
        assert!(RadialGrid::geometric(1e-3, 1.0, 4).is_err());
        assert!(AngularGrid::new(5, 1.5).is_err());
    }

    #[test]
    fn commensurate_steps() {
        let r = RadialGrid::with_radius(40.0).unwrap();
        let s = SpectralGrid::commensurate(&r, 1e-3, 64.0, 2).unwrap();
        assert!((s.log_step() - 2.0 * r.log_step()).abs() < 1e-15);
        assert!(s.rho_max() >= 64.0);
        assert!(s.rho_max() < 64.0 * (s.log_step().exp()) * 1.0000001);
    }

    #[test]
    fn angular_nodes() {
        let a = AngularGrid::for_modes(3, 0.5).unwrap();
        assert_eq!(a.m, 13);
        assert!((a.theta(0) + PI * 0.5).abs() < 1e-15);
        assert!((a.weight() * 13.0 - PI).abs() < 1e-14);
    }
}
