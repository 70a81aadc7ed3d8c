mod common;

use common::{c, grid, spectral_data};
use cone_dirac::eigenbasis::{synthesize, ConeParams, SpinorField};
use cone_dirac::estimates::*;
use cone_dirac::extension::ExtensionParam;
use cone_dirac::grid::AngularGrid;
use cone_dirac::propagator::{low_pass, DyadicBand, Propagator};
use num_complex::Complex64;

/// Smooth bump with support [a, b].
fn window(x: f64, a: f64, b: f64) -> f64 {
    if x <= a || x >= b {
        return 0.0;
    }
    let y = (2.0 * x - a - b) / (b - a);
    (1.0 - 1.0 / (1.0 - y * y)).exp()
}

#[test]
fn localization_partition_and_support() {
    let cone = ConeParams::new(0.6).unwrap();
    let gamma = ExtensionParam::sin_zero();
    let prop = Propagator::with_default_spectrum(grid(40.0), cone, gamma);
    // Energies in [2^-5, 2^5].
    let f = spectral_data(&prop, &[-1, 0, 2], 2, |k, rho| {
        c(window(rho.abs(), 0.032, 31.0), 0.2 * k as f64 * window(rho.abs(), 0.032, 31.0))
    });
    let v0 = prop.energy_densities(&f).unwrap();
    // The reconstruction target is f after one transform round trip.
    let round_trip = prop.apply_multiplier(&f, |_| c(1.0, 0.0)).unwrap();

    let mut total = f.try_map(|p| Ok(p.scaled(c(0.0, 0.0)))).unwrap();
    for j in -6..=6 {
        let part = prop.localize(&f, DyadicBand::new(j)).unwrap();
        total = total.try_map(|p| Ok(p.axpy(c(1.0, 0.0), part.get(p.k).unwrap()))).unwrap();
    }
    let err = total.rel_distance(&round_trip);
    println!("partition of unity: {err:.2e} (distance to f itself {:.2e})", total.rel_distance(&f));
    assert!(err < 1e-8);

    // The multiplier itself annihilates energies outside [2^{j-1}, 2^{j+1}].
    let band = DyadicBand::new(1);
    let rho = prop.context().spectral().points();
    for v in v0.values() {
        let loc = v.multiply(|r| c(band.eval(r), 0.0));
        for (i, &r) in rho.iter().enumerate() {
            if !(1.0..=4.0).contains(&r) {
                assert_eq!(loc.positive[i], c(0.0, 0.0));
                assert_eq!(loc.negative[i], c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn localization_is_a_multiplier_algebra() {
    let cone = ConeParams::new(0.8).unwrap();
    let gamma = ExtensionParam::cos_zero();
    let prop = Propagator::with_default_spectrum(grid(160.0), cone, gamma);
    let f = spectral_data(&prop, &[0, 1], 1, |_, rho| c(window(rho.abs(), 0.2, 5.0), 0.0));
    let band = DyadicBand::new(0);
    let v = prop.energy_densities(&f).unwrap();
    for d in v.values() {
        let twice = d.multiply(|r| c(band.eval(r), 0.0)).multiply(|r| c(band.eval(r), 0.0));
        let square = d.multiply(|r| c(band.eval(r).powi(2), 0.0));
        assert!(twice.rel_distance(&square) < 1e-12);
        // φ̃φ = φ
        let wide = d.multiply(|r| c(band.eval(r), 0.0)).multiply(|r| c(band.widened().eval(r), 0.0));
        assert!(wide.rel_distance(&d.multiply(|r| c(band.eval(r), 0.0))) < 1e-12);
    }
    let twice = prop.localize(&prop.localize(&f, band).unwrap(), band).unwrap();
    let square = prop.apply_multiplier(&f, |r| c(band.eval(r).powi(2), 0.0)).unwrap();
    let err = twice.rel_distance(&square);
    println!("localize twice vs phi^2 through the flow: {err:.2e}");
    assert!(err < 1e-5);
    // After a full round trip the energy outside the band is small.
    let dens = prop.energy_densities(&prop.localize(&f, band).unwrap()).unwrap();
    let (a, b) = band.support();
    let mut outside = 0.0;
    let mut total = 0.0;
    for v in dens.values() {
        let out = v.multiply(|r| c(if (a..=b).contains(&r.abs()) { 0.0 } else { 1.0 }, 0.0));
        outside += out.norm_sq();
        total += v.norm_sq();
    }
    let leak = outside / total;
    println!("energy fraction outside the band after a round trip: {leak:.2e}");
    assert!(leak < 1e-5);
    let once = dyadic_localize(&f, band, cone, gamma).unwrap();
    assert!(once.rel_distance(&prop.localize(&f, band).unwrap()) < 1e-14);
}

#[test]
fn sobolev_norms() {
    let cone = ConeParams::new(0.5).unwrap();
    let gamma = ExtensionParam::sin_zero();
    let prop = Propagator::with_default_spectrum(grid(40.0), cone, gamma);
    let f = spectral_data(&prop, &[-2, 0, 1], 2, |k, rho| {
        Complex64::from_polar((-40.0 * (rho.abs() - 3.0).powi(2)).exp(), 0.3 * k as f64)
    });
    let l2 = f.norm();
    let h0 = hs_norm(&f, cone, gamma, 0.0, true).unwrap();
    println!("s = 0: {h0} vs {l2}");
    assert!((h0 / l2 - 1.0).abs() < 1e-6);
    let h1 = hs_norm(&f, cone, gamma, 1.0, true).unwrap();
    println!("s = 1: ratio {}", h1 / (3.0 * l2));
    assert!((h1 / (3.0 * l2) - 1.0).abs() < 0.05);
    let mut prev = 0.0;
    for s in [-0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
        let h = sobolev_norm(&prop, &f, s, true).unwrap();
        assert!(h > prev);
        prev = h;
    }
    let inhom = hs_norm(&f, cone, gamma, 1.0, false).unwrap();
    assert!(inhom > h1 && inhom < h1 + h0 + 1e-12);
}

fn field_at(prop: &Propagator, f: &cone_dirac::eigenbasis::ModeSpectrum, t: f64, angular: AngularGrid) -> SpinorField {
    synthesize(&prop.evolve(f, t).unwrap(), prop.cone(), angular).unwrap()
}

#[test]
fn mixed_norm_definition() {
    let cone = ConeParams::new(0.7).unwrap();
    let gamma = ExtensionParam::sin_zero();
    let prop = Propagator::with_default_spectrum(grid(40.0), cone, gamma);
    let f = spectral_data(&prop, &[-1, 1], 1, |k, rho| {
        Complex64::from_polar((-4.0 * (rho.abs() - 2.0).powi(2)).exp(), 0.1 * k as f64)
    });
    let angular = AngularGrid::for_modes(1, 0.7).unwrap();
    let times = [0.0, 0.5, 1.0, 1.5, 2.0];
    let fields: Vec<SpinorField> = times.iter().map(|&t| field_at(&prop, &f, t, angular)).collect();

    let zero: Vec<SpinorField> = fields
        .iter()
        .map(|u| SpinorField::new(cone, u.radial().clone(), angular, vec![[c(0.0, 0.0); 2]; u.values().len()]).unwrap())
        .collect();
    assert_eq!(mixed_norm(&times, &zero, 4.0, 4.0, None).unwrap(), 0.0);

    let l2 = mixed_norm(&times, &fields, 2.0, 2.0, None).unwrap();
    let sq: Vec<f64> = fields.iter().map(|u| u.norm_sq()).collect();
    let direct = (0.5 * (0.5 * sq[0] + sq[1] + sq[2] + sq[3] + 0.5 * sq[4])).sqrt();
    assert!((l2 / direct - 1.0).abs() < 1e-12);
    // Unitarity: the L² norm is f's norm at every time.
    assert!((l2 / (2.0f64.sqrt() * f.norm()) - 1.0).abs() < 1e-6);

    let scaled: Vec<SpinorField> = fields
        .iter()
        .map(|u| {
            let v = u.values().iter().map(|[a, b]| [a * c(0.0, -3.0), b * c(0.0, -3.0)]).collect();
            SpinorField::new(cone, u.radial().clone(), angular, v).unwrap()
        })
        .collect();
    for (p, q) in [(2.0, 2.0), (8.0, 4.0), (f64::INFINITY, 3.0), (4.0, f64::INFINITY)] {
        let a = mixed_norm(&times, &fields, p, q, None).unwrap();
        let b = mixed_norm(&times, &scaled, p, q, None).unwrap();
        assert!((b / a - 3.0).abs() < 1e-12, "({p}, {q})");
    }
    assert!(mixed_norm(&[0.0, 0.5, 1.5], &fields[..3], 2.0, 2.0, None).is_err());
    assert!(matches!(mixed_norm(&[], &[], 2.0, 2.0, None), Err(cone_dirac::Error::EmptyGrid(_))));
}

#[test]
fn decay_fit_on_exact_models() {
    let times: Vec<f64> = (0..24).map(|i| 10.0 * 10f64.powf(i as f64 / 8.0)).collect();
    let norms: Vec<f64> = times.iter().map(|t| 3.0 * (1.0 + t).powf(-0.5)).collect();
    let r = fit_decay(&times, &norms, 0).unwrap();
    assert!((r.fitted_exponent + 0.5).abs() < 1e-12);
    assert!((r.model_norm(50.0) / (3.0 * 51f64.powf(-0.5)) - 1.0).abs() < 1e-12);

    let times: Vec<f64> = (0..24).map(|i| 1e6 * 10f64.powf(i as f64 / 8.0)).collect();
    let norms: Vec<f64> = times.iter().map(|t| 1.0 / t).collect();
    assert!((fit_decay(&times, &norms, 0).unwrap().fitted_exponent + 1.0).abs() < 1e-6);

    // Too few samples, too short a span, samples below 2^j t = 10.
    assert!(matches!(fit_decay(&times[..7], &norms[..7], 0), Err(cone_dirac::Error::InsufficientSpan(_))));
    let short: Vec<f64> = (0..10).map(|i| 10.0 + i as f64).collect();
    assert!(matches!(fit_decay(&short, &short, 0), Err(cone_dirac::Error::InsufficientSpan(_))));
    let early: Vec<f64> = (0..10).map(|i| 0.1 * 1.5f64.powi(i)).collect();
    assert!(matches!(fit_decay(&early, &early, 0), Err(cone_dirac::Error::InsufficientSpan(_))));
}

#[test]
fn weight_algebra() {
    for gamma in [ExtensionParam::sin_zero(), ExtensionParam::cos_zero()] {
        for j in [-3, 0, 4] {
            let w = Weight::dyadic(j, gamma).unwrap();
            let s = w.singular_component();
            let mut x = 1e-8;
            while x < 1e8 {
                let r = x / 2f64.powi(j);
                let e = w.entries(r);
                assert!(e[s] > 0.0 && e[s] <= 1.0 && e[1 - s] == 1.0);
                // 1 − W_j = (2^j r)^{−½} / (1 + (2^j r)^{−½})
                let gap = 1.0 - e[s];
                let exact = 1.0 / (1.0 + x.sqrt());
                assert!((gap - exact).abs() < 1e-12 * exact.max(1e-4));
                x *= 3.7;
            }
            // Convergence to the identity is only algebraic.
            let r = 1e6 / 2f64.powi(j);
            assert!((1.0 - w.factor(r) - 1.0 / 1001.0).abs() < 1e-12);
        }
    }
}

#[test]
fn dispersive_gates() {
    let cone = ConeParams::new(0.7).unwrap();
    let gamma = ExtensionParam::sin_zero();
    let data = dispersive_data(DispersiveKind::P0Weighted, cone, gamma, 0).unwrap();
    let w = TimeWindow::for_band(0);
    let band = DyadicBand::new(0);
    let err = verify_dispersive(DispersiveKind::P0Lq { q: 4.0 }, cone, gamma, band, &data, &w).unwrap_err();
    assert!(err.to_string().contains("q < 4"));
    // Perp data has no k = 0 part.
    let perp = dispersive_data(DispersiveKind::Perp, cone, gamma, 0).unwrap();
    assert!(matches!(
        verify_dispersive(DispersiveKind::P0Weighted, cone, gamma, band, &perp, &w),
        Err(cone_dirac::Error::ZeroNorm)
    ));
    let mixed = ExtensionParam::new(0.4).unwrap();
    assert!(matches!(
        verify_dispersive(DispersiveKind::P0Weighted, cone, mixed, band, &data, &w),
        Err(cone_dirac::Error::Inadmissible { .. })
    ));
    assert!(low_pass(0.5) == 1.0);
}

#[test]
fn counterexample_growth() {
    let cone = ConeParams::new(0.8).unwrap();
    let eps = [1e-2, 1e-3, 1e-4];
    let r4 = counterexample_run(cone, 4.0, &eps, &[0.0, 0.5]).unwrap();
    for s in &r4.series {
        println!("q=4 t={}: norms {:?} log-rate ratios {:?}", s.t, s.norms, s.log_rate_ratios);
        assert!(s.norms.windows(2).all(|w| w[1] > w[0]));
        assert!(s.log_rate_ratios.iter().all(|r| (r - 1.0).abs() < 0.1));
    }
    let r6 = counterexample_run(cone, 6.0, &eps, &[0.0, 0.5]).unwrap();
    for s in &r6.series {
        println!("q=6 t={}: norms {:?} exponent {:?}", s.t, s.norms, s.fitted_exponent);
        assert!((s.fitted_exponent.unwrap() - 1.0 / 6.0).abs() < 0.02);
    }
    assert!(r6.worst_deviation() < 0.02);
    assert!(matches!(counterexample_run(cone, 3.9, &eps, &[0.0]), Err(cone_dirac::Error::Regime(_))));
    assert!(counterexample_run(cone, 4.0, &[1e-3, 1e-2], &[0.0]).is_err());
}

/// (1/p, 1/q) → (p, q).
fn pair(a: f64, b: f64) -> AdmissiblePair {
    let inv = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    classify(inv(a), inv(b))
}

#[test]
fn admissibility_diagram() {
    // Vertices: A = (0, ½), B = (½, 0), C = (¼, 0), D = (0, ¼), F = (¼, ¼), O = (0, 0).
    let a = pair(0.0, 0.5);
    assert!(a.perp && a.p0 && a.full && a.sobolev_s == 0.0);
    assert_eq!(a.label(), "Full-admissible, s=0");
    let b = pair(0.5, 0.0);
    assert!(!b.perp && !b.p0 && b.weighted_theta_min.is_none());
    let c = pair(0.25, 0.0);
    assert!(c.perp && !c.p0 && c.weighted_theta_min.is_none());
    let d = pair(0.0, 0.25);
    assert!(d.perp && !d.p0 && d.weighted_theta_min == Some(0.0));
    let f = pair(0.25, 0.25);
    assert!(!f.perp && !f.p0 && !f.full && f.weighted_theta_min.is_none());
    let o = pair(0.0, 0.0);
    assert!(o.perp && !o.p0 && o.weighted_theta_min.is_none());

    // AC: 2/p + 1/q = ½ is Perp-admissible, and Full below q = 4.
    let on_ac = classify(12.0, 3.0);
    assert!(on_ac.perp && on_ac.p0 && on_ac.full);
    assert!(classify(8.0, 4.0).perp && !classify(8.0, 4.0).p0);
    // AB: 1/p + 1/q = ½ is excluded from the singular-component ranges.
    let on_ab = classify(6.0, 3.0);
    assert!(!on_ab.p0 && !on_ab.perp && on_ab.weighted_theta_min.is_none());
    let on_ab = classify(5.0, 10.0 / 3.0);
    assert!(!on_ab.p0);
    // Inside ADF: P0 only.
    let adf = classify(8.0, 3.0);
    assert!(adf.p0 && !adf.perp && adf.component() == Some(Component::P0));
    // Weighted range 4 ≤ q < ∞ below AB.
    let w = classify(8.0, 4.0);
    assert_eq!(w.weighted_theta_min, Some(0.0));
    let w = classify(20.0, 6.0);
    assert!((w.weighted_theta_min.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    // Sobolev exponent.
    assert_eq!(classify(4.0, f64::INFINITY).sobolev_s, 0.75);
    assert_eq!(classify(8.0, 4.0).sobolev_s, 0.375);
}
