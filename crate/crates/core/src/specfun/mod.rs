//! Bessel functions J_ν, I_ν and K_ν for the orders that occur on the cone.
//!
//! Orders are restricted to ν = −½ or ν ≥ 0. Evaluation picks between a
//! power series, the Hankel asymptotic expansion, and Steed/Temme continued
//! fractions, whichever is accurate for the given (ν, x).

mod asymptotic;
mod series;
mod steed;

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Largest argument accepted by [`bessel_j`]; beyond it phase reduction
/// loses more accuracy than the library promises.
pub const MAX_ARGUMENT: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    #[error("invalid Bessel order {0}: expected -1/2 or a finite value >= 0")]
    InvalidOrder(f64),
    #[error("argument {x} outside the domain of {func} for order {nu}")]
    Domain { func: &'static str, nu: f64, x: f64 },
    #[error("argument {x} exceeds the supported range ({max})")]
    Overflow { x: f64, max: f64 },
    #[error("complex argument {re}{im:+}i is off the supported rays (positive real, negative imaginary)")]
    UnsupportedArgument { re: f64, im: f64 },
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// A Bessel order ν ∈ {−½} ∪ [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    pub const MINUS_HALF: Order = Order(-0.5);
    pub const ZERO: Order = Order(0.0);
    pub const HALF: Order = Order(0.5);

    pub fn new(nu: f64) -> Result<Self> {
        if nu == -0.5 || (nu.is_finite() && nu >= 0.0) {
            Ok(Order(nu))
        } else {
            Err(SpecFunError::InvalidOrder(nu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The order ν + 1 (always valid).
    pub fn succ(self) -> Order {
        Order(self.0 + 1.0)
    }
}

impl TryFrom<f64> for Order {
    type Error = SpecFunError;
    fn try_from(v: f64) -> Result<Self> {
        Order::new(v)
    }
}

impl From<Order> for f64 {
    fn from(o: Order) -> f64 {
        o.0
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bessel function of the first kind J_ν(x), x ≥ 0.
pub fn bessel_j(nu: Order, x: f64) -> Result<f64> {
    let v = nu.value();
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain { func: "bessel_j", nu: v, x });
    }
    if x > MAX_ARGUMENT {
        return Err(SpecFunError::Overflow { x, max: MAX_ARGUMENT });
    }
    if x == 0.0 {
        return if v < 0.0 {
            Err(SpecFunError::Domain { func: "bessel_j", nu: v, x })
        } else if v == 0.0 {
            Ok(1.0)
        } else {
            Ok(0.0)
        };
    }
    Ok(bessel_j_unchecked(v, x))
}

/// J_ν(x) for x > 0 and a valid order, without argument checks.
pub(crate) fn bessel_j_unchecked(v: f64, x: f64) -> f64 {
    if v == -0.5 {
        return (2.0 / (PI * x)).sqrt() * x.cos();
    }
    if v == 0.5 {
        return (2.0 / (PI * x)).sqrt() * x.sin();
    }
    if x <= 8.0 || x * x <= 4.0 * (v + 1.0) {
        return series::j_series(v, x);
    }
    if x >= 25.0 {
        if let Some(j) = asymptotic::j_hankel(v, x) {
            return j;
        }
    }
    steed::bessel_jy(v, x)
}

/// Modified Bessel function of the second kind K_ν(x), x > 0; K_{−½} = K_½.
pub fn bessel_k(nu: Order, x: f64) -> Result<f64> {
    let v = nu.value().abs();
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_k", nu: v, x });
    }
    if v == 0.5 {
        return Ok((PI / (2.0 * x)).sqrt() * (-x).exp());
    }
    let (_, ks) = steed::bessel_ik_scaled(v, x);
    Ok(ks * (-x).exp())
}

/// Exponentially scaled e^{x} K_ν(x), x > 0.
pub fn bessel_k_scaled(nu: Order, x: f64) -> Result<f64> {
    let v = nu.value().abs();
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_k_scaled", nu: v, x });
    }
    if v == 0.5 {
        return Ok((PI / (2.0 * x)).sqrt());
    }
    Ok(steed::bessel_ik_scaled(v, x).1)
}

/// Exponentially scaled e^{−x} I_ν(x) for real x ≥ 0, ν ≥ 0.
pub fn bessel_i_scaled(nu: Order, x: f64) -> Result<f64> {
    let v = nu.value();
    if v < 0.0 {
        return Err(SpecFunError::InvalidOrder(v));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain { func: "bessel_i_scaled", nu: v, x });
    }
    if x == 0.0 {
        return Ok(if v == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= 700.0 {
        return Ok(series::i_series_scaled(v, x));
    }
    if let Some(i) = asymptotic::i_scaled_large(v, x) {
        return Ok(i);
    }
    Ok(steed::bessel_ik_scaled(v, x).0)
}

/// Modified Bessel function I_ν(z) on the positive real axis and on the
/// negative imaginary axis.
///
/// On the negative imaginary axis z = −i w the connection formula
/// I_ν(−i w) = e^{−iνπ/2} J_ν(w) is used.
pub fn bessel_i(nu: Order, z: Complex64) -> Result<Complex64> {
    let v = nu.value();
    if v < 0.0 {
        return Err(SpecFunError::InvalidOrder(v));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Ok(Complex64::new(if v == 0.0 { 1.0 } else { 0.0 }, 0.0));
    }
    if z.im == 0.0 && z.re > 0.0 {
        let x = z.re;
        if x > 700.0 {
            return Err(SpecFunError::Overflow { x, max: 700.0 });
        }
        let s = bessel_i_scaled(nu, x)?;
        return Ok(Complex64::new(s * x.exp(), 0.0));
    }
    if z.re == 0.0 && z.im < 0.0 {
        let w = -z.im;
        let j = bessel_j(nu, w)?;
        return Ok(Complex64::from_polar(1.0, -v * FRAC_PI_2) * j);
    }
    Err(SpecFunError::UnsupportedArgument { re: z.re, im: z.im })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn order_validation() {
        assert!(Order::new(-0.5).is_ok());
        assert!(Order::new(0.0).is_ok());
        assert!(Order::new(3.25).is_ok());
        assert!(Order::new(-0.25).is_err());
        assert!(Order::new(f64::NAN).is_err());
        assert!(Order::new(f64::INFINITY).is_err());
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(Order::ZERO, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(Order::new(2.5).unwrap(), 0.0).unwrap(), 0.0);
        assert!(matches!(
            bessel_j(Order::MINUS_HALF, 0.0),
            Err(SpecFunError::Domain { .. })
        ));
        assert!(matches!(
            bessel_j(Order::ZERO, 2.0 * MAX_ARGUMENT),
            Err(SpecFunError::Overflow { .. })
        ));
    }

    // Values below were generated with mpmath at 30 digits.
    #[test]
    fn j_reference_values() {
        let cases = [
            (0.0, 1.0, 0.765_197_686_557_966_55),
            (0.0, 10.0, -0.245_935_764_451_348_34),
            (0.0, 30.0, -0.086_367_983_581_040_211),
            (1.0, 12.0, -0.223_447_104_490_627_61),
            (2.25, 17.5, 0.139_924_622_057_317_86),
            (7.0, 3.0, 0.002_547_294_451_804_693_8),
            (7.0, 14.0, -0.150_804_919_641_267_07),
            (20.0, 21.0, 0.214_525_963_271_686_65),
            (40.5, 60.0, -0.108_261_159_202_551_45),
            (55.0, 5000.0, 0.010_683_909_797_586_794),
            (1.5, 1000.0, -0.014_168_706_104_322_2),
        ];
        for (nu, x, want) in cases {
            let got = bessel_j(Order::new(nu).unwrap(), x).unwrap();
            assert!(rel(got, want) < 1e-10, "J_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn k_reference_values() {
        let cases = [
            (0.0, 0.1, 2.427_069_024_702_016_6),
            (0.0, 5.0, 0.003_691_098_334_042_594_3),
            (1.0, 1.5, 0.277_387_800_456_843_82),
            (2.3, 0.4, 22.939_582_154_526_638),
            (2.3, 8.0, 1.998_396_782_665_576_6e-4),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(Order::new(nu).unwrap(), x).unwrap();
            assert!(rel(got, want) < 1e-10, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn i_reference_values() {
        let cases = [
            (0.0, 0.5, 1.063_483_370_741_323_5),
            (1.0, 10.0, 2670.988_303_701_254_7),
            (3.7, 2.2, 0.118_618_267_858_720_84),
            (60.0, 30.0, 1.595_577_325_363_670_1e-10),
        ];
        for (nu, x, want) in cases {
            let got = bessel_i(Order::new(nu).unwrap(), Complex64::new(x, 0.0)).unwrap();
            assert!(rel(got.re, want) < 1e-10, "I_{nu}({x}) = {got}, want {want}");
            assert_eq!(got.im, 0.0);
        }
    }

    #[test]
    fn i_rays() {
        let nu = Order::new(1.0).unwrap();
        assert!(matches!(
            bessel_i(nu, Complex64::new(1.0, 1.0)),
            Err(SpecFunError::UnsupportedArgument { .. })
        ));
        assert!(matches!(
            bessel_i(nu, Complex64::new(0.0, 1.0)),
            Err(SpecFunError::UnsupportedArgument { .. })
        ));
        assert!(matches!(
            bessel_i(nu, Complex64::new(-1.0, 0.0)),
            Err(SpecFunError::UnsupportedArgument { .. })
        ));
    }
}
