//! Strichartz admissibility in the (1/p, 1/q) plane.

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Tolerance for comparisons when an exponent is not a small rational.
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Largest denominator accepted as an exact rational input.
const MAX_DENOM: i64 = 1_000_000;

/// Reciprocal 1/p of an exponent, exact when p is a small rational.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Recip {
    Exact(Ratio<i64>),
    Approx(f64),
}

impl Recip {
    fn of(x: f64) -> Recip {
        if x.is_infinite() && x > 0.0 {
            return Recip::Exact(Ratio::from_integer(0));
        }
        match Ratio::<i64>::approximate_float(x) {
            Some(r) if *r.numer() != 0 && *r.denom() <= MAX_DENOM && *r.numer() as f64 / *r.denom() as f64 == x => {
                Recip::Exact(r.recip())
            }
            _ => Recip::Approx(1.0 / x),
        }
    }

    fn value(self) -> f64 {
        match self {
            Recip::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Recip::Approx(v) => v,
        }
    }
}

/// Sign of ca·a + cb·b − c.
fn compare(ca: i64, a: Recip, cb: i64, b: Recip, c: Ratio<i64>) -> Ordering {
    match (a, b) {
        (Recip::Exact(a), Recip::Exact(b)) => (a * ca + b * cb).cmp(&c),
        _ => {
            let v = ca as f64 * a.value() + cb as f64 * b.value() - *c.numer() as f64 / *c.denom() as f64;
            if v.abs() <= CLASSIFY_TOL {
                Ordering::Equal
            } else if v < 0.0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    }
}

fn frac(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

/// The strongest component for which a pair is admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Component {
    /// Modes k ≠ 0.
    Perp,
    /// The singular mode k = 0, weightless.
    P0,
    /// The whole field.
    Full,
}

/// A region of the admissibility diagram a pair can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "region", rename_all = "snake_case")]
pub enum Region {
    Perp,
    P0,
    Full,
    /// Weighted estimates for k = 0, valid for weight exponents θ > theta_min.
    Weighted { theta_min: f64 },
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Perp => write!(f, "Perp-admissible"),
            Region::P0 => write!(f, "P0-admissible"),
            Region::Full => write!(f, "Full-admissible"),
            Region::Weighted { theta_min } => write!(f, "Weighted-admissible (theta > {})", fmt_num(*theta_min)),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else if x == x.round() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn exponent<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*x)
    }
}

/// Classification of an exponent pair (p, q).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissiblePair {
    #[serde(serialize_with = "exponent")]
    pub p: f64,
    #[serde(serialize_with = "exponent")]
    pub q: f64,
    pub perp: bool,
    pub p0: bool,
    pub full: bool,
    /// Exclusive lower bound 1 − 4/q on the weight exponent, when the pair
    /// admits the weighted k = 0 estimate.
    pub weighted_theta_min: Option<f64>,
    /// s = 1 − 1/p − 2/q.
    pub sobolev_s: f64,
}

impl AdmissiblePair {
    pub fn component(&self) -> Option<Component> {
        match (self.full, self.perp, self.p0) {
            (true, _, _) => Some(Component::Full),
            (_, true, _) => Some(Component::Perp),
            (_, _, true) => Some(Component::P0),
            _ => None,
        }
    }

    /// Every region containing the pair, strongest first.
    pub fn regions(&self) -> Vec<Region> {
        let mut out = Vec::new();
        if self.full {
            out.push(Region::Full);
        }
        if self.perp {
            out.push(Region::Perp);
        }
        if self.p0 {
            out.push(Region::P0);
        }
        if let Some(theta_min) = self.weighted_theta_min {
            out.push(Region::Weighted { theta_min });
        }
        out
    }

    /// The strongest component and any weighted range, e.g.
    /// "Full-admissible, s=0".
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if let Some(c) = self.component() {
            let r = match c {
                Component::Full => Region::Full,
                Component::Perp => Region::Perp,
                Component::P0 => Region::P0,
            };
            parts.push(r.to_string());
        }
        if let Some(theta_min) = self.weighted_theta_min {
            parts.push(Region::Weighted { theta_min }.to_string());
        }
        if parts.is_empty() {
            parts.push("not admissible".into());
        }
        format!("{}, s={}", parts.join(", "), fmt_num(self.sobolev_s))
    }
}

/// Labels (p, q) with every region of the admissibility diagram it lies in.
///
/// Perp: (p, q) ∈ (2, ∞]² with 2/p + 1/q ≤ ½, or (∞, 2).
/// P0: (p, q) ∈ (2, ∞]² with 1/p + 1/q < ½, or (∞, 2); and q < 4.
/// Full: both. Weighted: the P0 range with 4 ≤ q < ∞ instead of q < 4.
///
/// Exponents that are rationals with denominator ≤ 10⁶ are compared exactly;
/// others with tolerance 1e-12. Exponents outside [2, ∞] are classified as
/// not admissible.
pub fn classify(p: f64, q: f64) -> AdmissiblePair {
    let a = Recip::of(p);
    let b = Recip::of(q);
    let zero = Recip::Exact(frac(0, 1));
    let half = frac(1, 2);
    let in_range = |x: Recip| {
        x.value().is_finite()
            && compare(1, x, 0, zero, frac(0, 1)) != Ordering::Less
            && compare(1, x, 0, zero, half) != Ordering::Greater
    };
    let valid = in_range(a) && in_range(b);
    // (p, q) ∈ (2, ∞]²
    let open = valid && compare(1, a, 0, zero, half) == Ordering::Less && compare(1, b, 0, zero, half) == Ordering::Less;
    let endpoint = valid && compare(1, a, 0, zero, frac(0, 1)) == Ordering::Equal && compare(1, b, 0, zero, half) == Ordering::Equal;

    let perp = endpoint || (open && compare(2, a, 1, b, half) != Ordering::Greater);
    let p0_range = endpoint || (open && compare(1, a, 1, b, half) == Ordering::Less);
    let q_below_4 = compare(1, b, 0, zero, frac(1, 4)) == Ordering::Greater;
    let q_finite = compare(1, b, 0, zero, frac(0, 1)) == Ordering::Greater;
    let p0 = p0_range && q_below_4;
    let weighted = p0_range && !q_below_4 && q_finite;
    let sobolev_s = match (a, b) {
        (Recip::Exact(a), Recip::Exact(b)) => {
            let s = Ratio::from_integer(1) - a - b * 2;
            *s.numer() as f64 / *s.denom() as f64
        }
        _ => 1.0 - a.value() - 2.0 * b.value(),
    };
    let weighted_theta_min = weighted.then(|| match b {
        Recip::Exact(b) => {
            let t = Ratio::from_integer(1) - b * 4;
            *t.numer() as f64 / *t.denom() as f64
        }
        Recip::Approx(b) => 1.0 - 4.0 * b,
    });
    AdmissiblePair { p, q, perp, p0, full: perp && p0, weighted_theta_min, sobolev_s }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_rationals() {
        assert_eq!(Recip::of(3.0), Recip::Exact(frac(1, 3)));
        assert_eq!(Recip::of(f64::INFINITY), Recip::Exact(frac(0, 1)));
        assert!(matches!(Recip::of(std::f64::consts::PI), Recip::Approx(_)));
    }

    #[test]
    fn strict_boundary_is_exact() {
        // 1/6 + 1/3 = 1/2 exactly; 1/p + 1/q < 1/2 fails.
        let c = classify(6.0, 3.0);
        assert!(!c.p0 && !c.perp);
        let c = classify(8.0, 3.0);
        assert!(c.p0 && !c.perp);
    }

    #[test]
    fn labels() {
        assert_eq!(classify(f64::INFINITY, 2.0).label(), "Full-admissible, s=0");
        assert_eq!(classify(8.0, 4.0).label(), "Perp-admissible, Weighted-admissible (theta > 0), s=0.375");
        assert_eq!(classify(2.0, 2.0).label(), "not admissible, s=-0.5");
    }
}
