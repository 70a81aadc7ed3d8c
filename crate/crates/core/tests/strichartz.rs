mod common;

use common::c;
use cone_dirac::eigenbasis::{synthesize, ConeParams, ModeSpectrum, SpinorField};
use cone_dirac::estimates::*;
use cone_dirac::extension::ExtensionParam;
use cone_dirac::grid::{AngularGrid, RadialGrid, SpectralGrid};
use cone_dirac::hankel::{EnergyDensity, SpectralContext};
use cone_dirac::propagator::Propagator;
use num_complex::Complex64;
use std::sync::Arc;

const T: f64 = 16.0;
const DT: f64 = 0.5;

struct Run {
    f: ModeSpectrum,
    fields: Vec<SpinorField>,
}

/// Evolves data with energy density `v` on `modes` over [0, 2T].
fn run(prop: &Propagator, modes: &[i64], v: impl Fn(i64, f64) -> Complex64) -> Run {
    let ctx = prop.context();
    let k_max = modes.iter().map(|k| k.unsigned_abs() as usize).max().unwrap();
    let angular = AngularGrid::for_modes(k_max, prop.cone().sigma()).unwrap();
    let dens: Vec<(i64, EnergyDensity)> =
        modes.iter().map(|&k| (k, EnergyDensity::from_fn(ctx.spectral().clone(), |rho| v(k, rho)))).collect();
    let at = |t: f64| {
        let mut s = ModeSpectrum::new(ctx.radial().clone(), k_max);
        for (k, d) in &dens {
            let d = d.multiply(|rho| Complex64::from_polar(1.0, -t * rho));
            s.insert(ctx.relativistic_inverse(*k, prop.cone(), prop.gamma(), &d).unwrap()).unwrap();
        }
        s
    };
    let n = (2.0 * T / DT).round() as usize;
    let fields = (0..=n).map(|i| synthesize(&at(i as f64 * DT), prop.cone(), angular).unwrap()).collect();
    Run { f: at(0.0), fields }
}

/// mixed_norm / hs_norm over [0, T] and [0, 2T].
fn quotients(prop: &Propagator, r: &Run, p: f64, q: f64, w: Option<&Weight>) -> (f64, f64) {
    let s = classify(p, q).sobolev_s;
    let h = sobolev_norm(prop, &r.f, s, true).unwrap();
    let n = r.fields.len();
    let half = (n - 1) / 2 + 1;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * DT).collect();
    let a = mixed_norm(&times[..half], &r.fields[..half], p, q, w).unwrap();
    let b = mixed_norm(&times, &r.fields, p, q, w).unwrap();
    (a / h, b / h)
}

#[test]
fn strichartz_quotients_saturate() {
    let cone = ConeParams::new(0.75).unwrap();
    let gamma = ExtensionParam::sin_zero();
    let radial = Arc::new(RadialGrid::geometric(1e-3, 80.0, 2048).unwrap());
    let spectral = Arc::new(SpectralGrid::commensurate(&radial, 1e-3, 6.0, 1).unwrap());
    let prop = Propagator::new(SpectralContext::new(radial, spectral), cone, gamma);

    // Ten band-limited data: six on k ≠ 0, four on k = 0.
    let bump = |rho0: f64, phase: f64| {
        move |k: i64, rho: f64| Complex64::from_polar((-4.0 * (rho.abs() - rho0).powi(2)).exp(), phase * k as f64 + 0.3 * rho)
    };
    let perp: Vec<Run> = [(&[1][..], 1.5), (&[-1], 2.0), (&[2], 2.5), (&[1, -2], 2.0), (&[-1, 3], 1.8), (&[1, 2], 2.2)]
        .iter()
        .enumerate()
        .map(|(i, (m, r0))| run(&prop, m, bump(*r0, 0.2 * i as f64)))
        .collect();
    let singular: Vec<Run> = [1.5, 2.0, 2.5, 3.0].iter().map(|&r0| run(&prop, &[0], bump(r0, 0.0))).collect();

    let check = |runs: &[Run], p: f64, q: f64, w: Option<&Weight>, label: &str| {
        let mut worst: f64 = 0.0;
        for r in runs {
            let (a, b) = quotients(&prop, r, p, q, w);
            assert!(a.is_finite() && a > 0.0);
            worst = worst.max(b / a - 1.0);
        }
        println!("{label} ({p}, {q}): worst growth under doubling {:.2}%", 100.0 * worst);
        assert!(worst <= 0.05);
    };
    for (p, q) in [(f64::INFINITY, 2.0), (4.0, f64::INFINITY), (8.0, 4.0), (12.0, 3.0)] {
        assert!(classify(p, q).perp);
        check(&perp, p, q, None, "perp");
    }
    for (p, q) in [(f64::INFINITY, 2.0), (8.0, 3.0), (12.0, 3.0)] {
        assert!(classify(p, q).p0);
        check(&singular, p, q, None, "singular");
    }
    for (p, q) in [(8.0, 4.0), (20.0, 6.0)] {
        let theta_min = classify(p, q).weighted_theta_min.unwrap();
        for theta in [theta_min + 0.05, 1.0] {
            let w = Weight::fixed(0.01, theta, gamma).unwrap();
            check(&singular, p, q, Some(&w), &format!("weighted theta={theta:.3}"));
        }
    }
}

#[test]
fn l4_quotient_diverges_on_the_counterexample() {
    // u(t, r) for f = (H_{-1/2} chi, 0), sampled on grids reaching ever closer to the origin.
    let cone = ConeParams::new(1.0).unwrap();
    let angular = AngularGrid::new(1, 1.0).unwrap();
    let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
    let mut prev = 0.0;
    for r_min in [1e-2, 1e-4, 1e-6, 1e-8] {
        let radial = Arc::new(RadialGrid::geometric(r_min, 40.0, 4096).unwrap());
        let fields: Vec<SpinorField> = times
            .iter()
            .map(|&t| {
                SpinorField::from_fn(cone, radial.clone(), angular, |r, _| [singular_wave(t, r), c(0.0, 0.0)]).unwrap()
            })
            .collect();
        let n = mixed_norm(&times, &fields, 4.0, 4.0, None).unwrap();
        println!("r_min = {r_min:.0e}: L^4_t L^4_x = {n:.5}");
        assert!(n > prev * 1.02);
        prev = n;
    }
}
