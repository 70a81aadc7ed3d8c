//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Pass
//! criterion numbers as arguments to run a subset. The process fails when a
//! criterion fails unexpectedly, or when a known-unattainable check passes.

mod common;

use common::{bump_profile, bump_spectrum, c, grid, spectral_data};
use cone_dirac::eigenbasis::{apply_dk, generalized_eigenfunction, project, ConeParams, ModeSpectrum, Projection, SpinorProfile};
use cone_dirac::estimates::*;
use cone_dirac::extension::{deficiency_indices, ExtensionParam};
use cone_dirac::grid::RadialGrid;
use cone_dirac::hankel::SpectralContext;
use cone_dirac::propagator::*;
use cone_dirac::quadrature::GaussLegendre;
use cone_dirac::specfun::{bessel_j, Order};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the failure is the documented, analytically explained one.
    known: bool,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, known: false }
    }
}

fn worst(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn hankel_involution() -> Outcome {
    let start = Instant::now();
    let ctx = SpectralContext::with_default_spectrum(grid(40.0));
    let f: Vec<Complex64> = ctx
        .radial()
        .points()
        .iter()
        .map(|&r| c((-(r - 6.0).powi(2) / 2.0).exp(), 0.5 * (-(r - 3.0).powi(2)).exp()))
        .collect();
    let w = ctx.radial().weights();
    let mut errs = Vec::new();
    for nu in [-0.5, 0.5, 1.5, 3.5] {
        let o = Order::new(nu).unwrap();
        let back = ctx.hankel_inverse(o, &ctx.hankel_forward(o, &f).unwrap()).unwrap();
        let num: f64 = f.iter().zip(&back).zip(w).map(|((a, b), w)| (a - b).norm_sqr() * w).sum();
        let den: f64 = f.iter().zip(w).map(|(a, w)| a.norm_sqr() * w).sum();
        errs.push((nu, (num / den).sqrt()));
    }
    let elapsed = start.elapsed();
    let e = worst(errs.iter().map(|p| p.1));
    let detail = errs.iter().map(|(nu, e)| format!("nu={nu}: {e:.1e}")).collect::<Vec<_>>().join(", ");
    Outcome::check(e <= 1e-6 && elapsed <= Duration::from_secs(30), format!("{detail}; {elapsed:.1?}"))
}

fn relativistic_parseval() -> Outcome {
    let ctx = SpectralContext::with_default_spectrum(grid(40.0));
    let mut e: f64 = 0.0;
    for sigma in [0.4, 1.0] {
        let cone = ConeParams::new(sigma).unwrap();
        for k in -3..=3 {
            let p = bump_profile(k, ctx.radial(), 5.0, 1.2);
            for gamma in ExtensionParam::canonical() {
                let v = ctx.relativistic_forward(k, cone, gamma, &p).unwrap();
                e = e.max((v.norm() / p.norm() - 1.0).abs());
            }
        }
    }
    Outcome::check(e <= 1e-6, format!("max Parseval error {e:.1e} over 56 cases"))
}

fn eigenfunction_residual() -> Outcome {
    let g = Arc::new(RadialGrid::geometric(4e-3, 40.0, 16384).unwrap());
    let mut e: f64 = 0.0;
    let mut at = (0, 0.0, 0.0);
    for sigma in [0.4, 0.7, 1.0] {
        let cone = ConeParams::new(sigma).unwrap();
        for k in -2..=2 {
            for gamma in [ExtensionParam::sin_zero(), ExtensionParam::cos_zero()] {
                for rho in [0.5, 1.0, 2.0] {
                    let psi = SpinorProfile::from_fn(k, g.clone(), |r| generalized_eigenfunction(k, cone, gamma, rho, r).unwrap());
                    let d = apply_dk(k, cone, &psi).unwrap();
                    let mut num: f64 = 0.0;
                    let mut den: f64 = 0.0;
                    for i in g.interior() {
                        let (upper, lower) = psi_components(&psi, i);
                        let (du, dl) = psi_components(&d, i);
                        num = num.max((du - upper * rho).norm()).max((dl - lower * rho).norm());
                        den = den.max((upper * rho).norm()).max((lower * rho).norm());
                    }
                    if num / den > e {
                        e = num / den;
                        at = (k, sigma, rho);
                    }
                }
            }
        }
    }
    Outcome::check(e <= 1e-6, format!("max relative residual {e:.1e} at (k, sigma, rho) = {at:?}; N = 16384"))
}

fn psi_components(p: &SpinorProfile, i: usize) -> (Complex64, Complex64) {
    (p.upper[i], p.lower[i])
}

fn deficiency() -> Outcome {
    let mut bad = Vec::new();
    for sigma in [0.3, 0.5, 0.9, 1.0] {
        let cone = ConeParams::new(sigma).unwrap();
        for k in -5..=5 {
            let got = deficiency_indices(k, cone);
            if (got == (1, 1)) != (k == 0) || (k != 0 && got != (0, 0)) {
                bad.push((k, sigma, got));
            }
        }
    }
    Outcome::check(bad.is_empty(), format!("44 cases, mismatches {bad:?}"))
}

/// Σ|terms| / |Σ terms| of the angular series: the series oracle carries
/// round-off of about 1e-16 times this.
fn series_condition(cone: ConeParams, sign: ChannelSign, t: f64, x: ConePoint, y: ConePoint, s: &SeriesValue) -> f64 {
    let k = s.k_trunc as i64;
    let abs: f64 = (-k..=k).map(|k| heat_mode_kernel(k, cone, sign, t, x.r, y.r).unwrap()).sum();
    abs / (2.0 * PI * cone.sigma()) / s.value.norm()
}

fn heat_dual_path() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut rejected = 0;
    while rows.len() < 100 {
        let sigma = rng.gen_range(0.25..1.0);
        let cone = ConeParams::new(sigma).unwrap();
        let t = rng.gen_range(0.05..4.0);
        let x = ConePoint::new(rng.gen_range(0.05..4.0), rng.gen_range(-PI * sigma..PI * sigma));
        let y = ConePoint::new(rng.gen_range(0.05..4.0), rng.gen_range(-PI * sigma..PI * sigma));
        let pair = [ChannelSign::Plus, ChannelSign::Minus].map(|sign| {
            let s = heat_kernel_series(cone, sign, t, x, y, None).unwrap();
            let k = heat_kernel_closed(cone, sign, t, x, y).unwrap();
            let d = cone_distance(cone, x, y);
            let cond = series_condition(cone, sign, t, x, y, &s);
            ((s.value - k).norm() / s.value.norm(), k.norm() * t * (d * d / (8.0 * t)).exp(), cond)
        });
        // The oracle must resolve the tolerance: skip draws where cancellation
        // in the series alone exceeds 1e-8.
        if pair.iter().any(|p| p.2 > 1e8) {
            rejected += 1;
            continue;
        }
        rows.extend(pair.iter().map(|p| (p.0, p.1)));
    }
    let elapsed = start.elapsed();
    let e = worst(rows.iter().map(|r| r.0));
    let fit = worst(rows.iter().map(|r| r.1));
    Outcome::check(
        e <= 1e-6 && fit <= 10.0 && elapsed <= Duration::from_secs(120),
        format!(
            "max relative gap {e:.1e} on 50 samples x 2 channels, fitted Gaussian constant {fit:.3}, \
             {rejected} ill-conditioned draws skipped, {elapsed:.1?}"
        ),
    )
}

/// ∫_0^∞ e^{−itρ²} e^{−ερ²} J_ν(rρ) J_ν(sρ) ρ dρ for each ε, on one set of
/// nodes, extrapolated to ε = 0.
fn regularized_schrodinger(nu: Order, t: f64, r: f64, s: f64) -> Complex64 {
    let eps: [f64; 4] = [2e-2, 1e-2, 5e-3, 2.5e-3];
    let rho_max = (40.0 / eps[eps.len() - 1]).sqrt();
    let rule = GaussLegendre::new(8);
    let mut sums = [c(0.0, 0.0); 4];
    let mut lo = 0.0;
    while lo < rho_max {
        let hi = (lo + 1.0 / (2.0 * t * lo + 1.0)).min(rho_max);
        for (rho, w) in rule.mapped(lo, hi) {
            let base = Complex64::from_polar(w * rho * bessel_j(nu, r * rho).unwrap() * bessel_j(nu, s * rho).unwrap(), -t * rho * rho);
            for (sum, e) in sums.iter_mut().zip(eps) {
                *sum += base * (-e * rho * rho).exp();
            }
        }
        lo = hi;
    }
    let mut out = c(0.0, 0.0);
    for i in 0..eps.len() {
        let l: f64 = (0..eps.len()).filter(|&j| j != i).map(|j| eps[j] / (eps[j] - eps[i])).product();
        out += sums[i] * l;
    }
    out
}

fn schrodinger_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples: Vec<(i64, f64, ChannelSign, f64, f64, f64)> = (0..20)
        .map(|i| {
            let sign = if i % 2 == 0 { ChannelSign::Plus } else { ChannelSign::Minus };
            (rng.gen_range(-2..=2), rng.gen_range(0.3..1.0), sign, rng.gen_range(1.0..3.0), rng.gen_range(0.3..2.0), rng.gen_range(0.3..2.0))
        })
        .collect();
    let errs: Vec<f64> = samples
        .par_iter()
        .map(|&(k, sigma, sign, t, r, s)| {
            let cone = ConeParams::new(sigma).unwrap();
            let nu = Order::new(sign.nu(cone, k)).unwrap();
            let oracle = regularized_schrodinger(nu, t, r, s);
            let got = schrodinger_mode_kernel(k, cone, sign, t, r, s).unwrap();
            (got - oracle).norm() / oracle.norm()
        })
        .collect();
    let e = worst(errs);
    Outcome::check(e <= 1e-5, format!("max relative gap {e:.1e} over 20 samples"))
}

fn dispersive_rates() -> Outcome {
    let cone = ConeParams::new(0.7).unwrap();
    let mut runs = vec![(DispersiveKind::Perp, 0, ExtensionParam::sin_zero()), (DispersiveKind::Perp, 2, ExtensionParam::sin_zero())];
    for gamma in [ExtensionParam::sin_zero(), ExtensionParam::cos_zero()] {
        runs.push((DispersiveKind::P0Weighted, 0, gamma));
        runs.push((DispersiveKind::P0Lq { q: 2.0 }, 0, gamma));
        runs.push((DispersiveKind::P0Lq { q: 3.0 }, 0, gamma));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, j, gamma) in runs {
        let data = dispersive_data(kind, cone, gamma, j).unwrap();
        let report = verify_dispersive(kind, cone, gamma, DyadicBand::new(j), &data, &TimeWindow::for_band(j)).unwrap();
        let ok = report.within(kind.tolerance());
        pass &= ok;
        let name = match kind {
            DispersiveKind::Perp => format!("perp j={j}"),
            DispersiveKind::P0Weighted => format!("weighted gamma={:.2}", gamma.gamma()),
            DispersiveKind::P0Lq { q } => format!("L^{q} gamma={:.2}", gamma.gamma()),
        };
        parts.push(format!("{name}: {:.3} (want {:.3})", report.fitted_exponent, kind.expected_exponent()));
    }
    Outcome::check(pass, parts.join("; "))
}

fn counterexample() -> Outcome {
    let cone = ConeParams::new(0.8).unwrap();
    let eps = [1e-2, 1e-3, 1e-4];
    let r4 = counterexample_run(cone, 4.0, &eps, &[0.0, 0.5]).unwrap();
    let r6 = counterexample_run(cone, 6.0, &eps, &[0.0, 0.5]).unwrap();
    let growing = r4.series.iter().all(|s| s.norms.windows(2).all(|w| w[1] > w[0]));
    let d4 = r4.worst_deviation();
    let d6 = r6.worst_deviation();
    let powers: Vec<String> = r6.series.iter().map(|s| format!("{:.4}", s.fitted_exponent.unwrap())).collect();
    Outcome::check(
        growing && d4 < 0.1 && d6 <= 0.02,
        format!("q=4 log-rate ratio off by {d4:.1e}; q=6 powers [{}] (want 0.1667)", powers.join(", ")),
    )
}

/// (1/p, 1/q) → classification.
fn at(a: f64, b: f64) -> AdmissiblePair {
    let inv = |x: f64| if x == 0.0 { f64::INFINITY } else { 1.0 / x };
    classify(inv(a), inv(b))
}

fn admissibility() -> Outcome {
    let mut bad: Vec<&str> = Vec::new();
    let mut expect = |name: &'static str, ok: bool| {
        if !ok {
            bad.push(name);
        }
    };
    let a = at(0.0, 0.5);
    expect("A in every region, s = 0", a.full && a.perp && a.p0 && a.sobolev_s == 0.0);
    let b = at(0.5, 0.0);
    expect("B excluded", !b.perp && !b.p0 && b.weighted_theta_min.is_none());
    let cv = at(0.25, 0.0);
    expect("C on the Perp boundary only", cv.perp && !cv.p0 && cv.weighted_theta_min.is_none());
    let d = at(0.0, 0.25);
    expect("D Perp, not weightless P0, weighted", d.perp && !d.p0 && d.weighted_theta_min == Some(0.0));
    let e = at(0.125, 0.25);
    expect("E on AC, q = 4", e.perp && !e.p0 && !e.full && e.weighted_theta_min == Some(0.0));
    let f = at(0.25, 0.25);
    expect("F on the open edge AB", !f.perp && !f.p0 && f.weighted_theta_min.is_none());
    let o = at(0.0, 0.0);
    expect("O Perp only", o.perp && !o.p0 && o.weighted_theta_min.is_none());
    for (x, y) in [(1.0 / 12.0, 1.0 / 3.0), (0.1, 0.3), (0.2, 0.1)] {
        let p = at(x, y);
        expect("AC closed for Perp", p.perp && (2.0 * x + y - 0.5).abs() < 1e-15);
    }
    expect("AC, q < 4 is Full", at(1.0 / 12.0, 1.0 / 3.0).full);
    for (p, q) in [(6.0, 3.0), (5.0, 10.0 / 3.0), (3.0, 6.0)] {
        let c = classify(p, q);
        expect("AB excluded from P0 and weighted", !c.p0 && c.weighted_theta_min.is_none());
    }
    expect("inside ADF is P0 only", {
        let c = classify(8.0, 3.0);
        c.p0 && !c.perp && c.component() == Some(Component::P0)
    });
    expect("inside ADE is Full", classify(20.0, 3.0).full);
    expect("AD is Full", classify(f64::INFINITY, 3.0).full);
    expect("DF weighted, not weightless", {
        let c = classify(8.0, 4.0);
        !c.p0 && c.weighted_theta_min == Some(0.0)
    });
    expect("below DF the weight exponent is 1 - 4/q", classify(20.0, 6.0).weighted_theta_min == Some(1.0 / 3.0));
    expect("s = 1 - 1/p - 2/q", classify(8.0, 4.0).sobolev_s == 0.375 && classify(4.0, f64::INFINITY).sobolev_s == 0.75);
    Outcome::check(bad.is_empty(), if bad.is_empty() { "7 vertices and edges AB, AC, AD, DF".into() } else { format!("wrong: {bad:?}") })
}

fn flow_identities() -> Outcome {
    let g = grid(160.0);
    let cone = ConeParams::new(0.7).unwrap();
    let prop = Propagator::with_default_spectrum(g.clone(), cone, ExtensionParam::sin_zero());
    let f = bump_spectrum(&g, 2, 5.0, 1.0);
    let n0 = f.norm();
    let drift = worst([1.0, 10.0, 100.0].map(|t| (prop.evolve(&f, t).unwrap().norm() / n0 - 1.0).abs()));
    let group = prop.evolve(&prop.evolve(&f, 3.0).unwrap(), 4.0).unwrap().rel_distance(&prop.evolve(&f, 7.0).unwrap());

    // e^{−itD}P⊥ against e^{−it√H}P⊥ on P⊥ data carrying both energy signs.
    let g40 = grid(40.0);
    let prop40 = Propagator::with_default_spectrum(g40.clone(), cone, ExtensionParam::sin_zero());
    let perp = project(&bump_spectrum(&g40, 2, 6.0, 1.0), Projection::Pperp);
    let t = 4.0;
    let dirac = prop40.evolve(&perp, t).unwrap();
    let sqrt_h = prop40.half_wave(&perp, t).unwrap();
    let gap = dirac.rel_distance(&sqrt_h);
    // The flows differ by e^{−itρ} − e^{itρ} on negative energies.
    let predicted = negative_energy_gap(&prop40, &perp, t) / perp.norm();
    let pos = positive_energy_perp(&prop40);
    let pos_gap = prop40.evolve(&pos, t).unwrap().rel_distance(&prop40.half_wave(&pos, t).unwrap());

    let ab = drift <= 1e-6 && group <= 1e-6;
    let detail = format!(
        "unitarity drift {drift:.1e}, group law {group:.1e}; e^(-itD)P vs e^(-it sqrt H)P: {gap:.2e} \
         (predicted from the negative-energy part {predicted:.2e}; on positive energies {pos_gap:.1e})"
    );
    let explained = (gap - predicted).abs() <= 1e-6 * predicted.max(1.0) && pos_gap <= 1e-6;
    Outcome { pass: ab && gap <= 1e-6, detail, known: ab && explained }
}

/// ‖(e^{−itD} − e^{−it|D|}) f‖ computed on the energy side: 2|sin tρ| on ρ < 0.
fn negative_energy_gap(prop: &Propagator, f: &ModeSpectrum, t: f64) -> f64 {
    let dens = prop.energy_densities(f).unwrap();
    let mut sq = 0.0;
    for v in dens.values() {
        let w = v.multiply(|rho| c(if rho < 0.0 { 2.0 * (t * rho).sin().abs() } else { 0.0 }, 0.0));
        sq += w.norm_sq();
    }
    sq.sqrt()
}

fn positive_energy_perp(prop: &Propagator) -> ModeSpectrum {
    spectral_data(prop, &[-2, -1, 1, 2], 2, |k, rho| {
        if rho > 0.0 {
            Complex64::from_polar((-4.0 * (rho - 3.0).powi(2)).exp(), 0.4 * k as f64 * rho)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "Hankel involution", hankel_involution),
        (2, "relativistic Parseval", relativistic_parseval),
        (3, "generalized eigenfunction residual", eigenfunction_residual),
        (4, "deficiency indices", deficiency),
        (5, "heat kernel dual path and Gaussian bound", heat_dual_path),
        (6, "Schrodinger mode kernel", schrodinger_kernel),
        (7, "dispersive rates", dispersive_rates),
        (8, "q >= 4 counterexample", counterexample),
        (9, "admissibility geometry", admissibility),
        (10, "flow identities", flow_identities),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (n, name, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && o.known { " [known: unattainable as stated]" } else { "" };
        println!("criterion {n}: {status} {name}{note} ({:.1?}): {}", start.elapsed(), o.detail);
        if !o.pass && !o.known {
            unexpected += 1;
        }
        if o.pass && n == 10 {
            println!("criterion 10 was expected to fail; the analysis needs revisiting");
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected outcome(s)");
        std::process::exit(1);
    }
}
