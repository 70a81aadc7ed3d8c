//! The four commands. Each validates its inputs first, then computes, then
//! writes its files.

use crate::config::{reject, KernelKind, RunConfig};
use anyhow::{bail, Context, Result};
use cone_dirac::eigenbasis::{decompose, synthesize, ConeParams, ModeSpectrum, SpinorField, SpinorProfile};
use cone_dirac::estimates::{
    classify, counterexample_run, dispersive_data, verify_dispersive, AdmissiblePair, CounterexampleReport,
    DecayFitReport, DispersiveKind,
};
use cone_dirac::extension::ExtensionParam;
use cone_dirac::grid::AngularGrid;
use cone_dirac::hankel::SpectralContext;
use cone_dirac::io::{self, KernelRow, SCHEMA_VERSION};
use cone_dirac::propagator::{heat_mode_kernel, mode_kernel, schrodinger_mode_kernel, ChannelSign, DyadicBand, Propagator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// A run that completed but missed its tolerance.
#[derive(Debug)]
pub struct ToleranceFailure(pub String);

impl fmt::Display for ToleranceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tolerance check failed: {}", self.0)
    }
}

impl std::error::Error for ToleranceFailure {}

/// Where files go and whether to print summaries.
pub struct Output {
    pub dir: PathBuf,
    pub quiet: bool,
}

impl Output {
    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    fn write<F>(&self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> cone_dirac::Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w).with_context(|| format!("writing {name}"))?;
        w.flush()?;
        log::info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn require_k0(gamma: ExtensionParam, what: &str) -> Result<()> {
    if !gamma.is_admissible() {
        return Err(reject(
            "gamma",
            format!("{what} needs sin(gamma)cos(gamma) = 0, got gamma = {}", gamma.gamma()),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct KernelSidecar<'a> {
    schema_version: u32,
    kind: &'a str,
    sigma: f64,
    gamma: String,
    gamma_radians: f64,
    t: f64,
    band_j: Option<i32>,
    ks: &'a [i64],
    /// Orders of the (upper, lower) or (plus, minus) components, by mode.
    orders: BTreeMap<String, [f64; 2]>,
    r: &'a [f64],
    s: &'a [f64],
}

pub fn kernel(cfg: &RunConfig, kind: Option<KernelKind>, out: &Output) -> Result<()> {
    let cone = cfg.cone()?;
    let gamma = cfg.gamma()?;
    let j = cfg.band_j()?;
    let kc = cfg.kernel()?;
    let kind = kind.unwrap_or(kc.kind);
    match kind {
        KernelKind::Wave if kc.ks.contains(&0) => require_k0(gamma, "the k = 0 wave kernel")?,
        KernelKind::Heat if !(kc.t > 0.0) => return Err(reject("kernel.t", format!("heat kernel needs t > 0, got {}", kc.t))),
        KernelKind::Schrodinger if kc.t == 0.0 => return Err(reject("kernel.t", "Schrödinger kernel needs t != 0")),
        _ => {}
    }

    let mut rows: Vec<KernelRow<'static>> = Vec::new();
    let mut orders = BTreeMap::new();
    for &k in &kc.ks {
        match kind {
            KernelKind::Wave => {
                let m = mode_kernel(k, cone, gamma, DyadicBand::new(j), kc.t, &kc.r, &kc.s)?;
                orders.insert(k.to_string(), [m.orders[0].value(), m.orders[1].value()]);
                rows.extend(io::kernel_rows(&m));
            }
            KernelKind::Schrodinger | KernelKind::Heat => {
                let signs = [(ChannelSign::Plus, "plus"), (ChannelSign::Minus, "minus")];
                orders.insert(k.to_string(), signs.map(|(sign, _)| sign.nu(cone, k)));
                for (sign, name) in signs {
                    for &r in &kc.r {
                        for &s in &kc.s {
                            let value = if kind == KernelKind::Heat {
                                Complex64::new(heat_mode_kernel(k, cone, sign, kc.t, r, s)?, 0.0)
                            } else {
                                schrodinger_mode_kernel(k, cone, sign, kc.t, r, s)?
                            };
                            rows.push(KernelRow { t: kc.t, k, j: None, component: name, nu: sign.nu(cone, k), r, s, value });
                        }
                    }
                }
            }
        }
    }
    out.write("kernel.csv", |w| io::write_kernel_rows(&rows, w))?;
    let sidecar = KernelSidecar {
        schema_version: SCHEMA_VERSION,
        kind: kind.name(),
        sigma: cone.sigma(),
        gamma: cfg.gamma_label(),
        gamma_radians: gamma.gamma(),
        t: kc.t,
        band_j: (kind == KernelKind::Wave).then_some(j),
        ks: &kc.ks,
        orders,
        r: &kc.r,
        s: &kc.s,
    };
    out.write("kernel.json", |w| io::write_json(&sidecar, w))?;
    out.say(format!("{} kernel: {} modes, {} entries", kind.name(), kc.ks.len(), rows.len()));
    Ok(())
}

/// What `--cmd verify` checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    DispersivePerp,
    DispersiveP0Weighted,
    DispersiveP0Lq,
    Counterexample,
    Classify,
}

impl VerifyKind {
    pub const NAMES: [&'static str; 5] =
        ["dispersive-perp", "dispersive-p0-weighted", "dispersive-p0-lq", "counterexample", "classify"];

    pub fn parse(s: &str) -> Option<Self> {
        use VerifyKind::*;
        [DispersivePerp, DispersiveP0Weighted, DispersiveP0Lq, Counterexample, Classify]
            .into_iter()
            .find(|k| k.name() == s)
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }
}

#[derive(Serialize)]
struct VerifyDocument<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    sigma: f64,
    gamma: String,
    tolerance: f64,
    deviation: Option<f64>,
    passed: bool,
    report: &'a T,
}

pub fn verify(cfg: &RunConfig, kind: VerifyKind, out: &Output) -> Result<()> {
    match kind {
        VerifyKind::Classify => return classify_pairs(cfg, out),
        VerifyKind::Counterexample => return counterexample(cfg, out),
        _ => {}
    }
    let cone = cfg.cone()?;
    let gamma = cfg.gamma()?;
    let j = cfg.band_j()?;
    let window = cfg.time_window(j)?;
    let tolerance = cfg.tolerance()?;
    let dk = match kind {
        VerifyKind::DispersivePerp => DispersiveKind::Perp,
        VerifyKind::DispersiveP0Weighted => DispersiveKind::P0Weighted,
        _ => {
            let q = cfg.q.ok_or_else(|| reject("q", "required by dispersive-p0-lq"))?;
            let dk = DispersiveKind::P0Lq { q };
            dk.validate().map_err(|e| reject("q", e.to_string()))?;
            dk
        }
    };
    if dk != DispersiveKind::Perp {
        require_k0(gamma, "the k = 0 dispersive check")?;
    }
    let tolerance = tolerance.unwrap_or(dk.tolerance());

    let data = dispersive_data(dk, cone, gamma, j)?;
    let report = verify_dispersive(dk, cone, gamma, DyadicBand::new(j), &data, &window)?;
    let deviation = report.deviation();
    let passed = report.within(tolerance);
    let name = kind.name();
    out.write(&format!("verify_{name}.csv"), |w| io::write_decay_csv(&report, w))?;
    let doc = VerifyDocument {
        schema_version: SCHEMA_VERSION,
        kind: name,
        sigma: cone.sigma(),
        gamma: cfg.gamma_label(),
        tolerance,
        deviation,
        passed,
        report: &report,
    };
    out.write(&format!("verify_{name}.json"), |w| io::write_json(&doc, w))?;
    summarize_fit(out, name, &report, tolerance, passed);
    if !passed {
        bail!(ToleranceFailure(format!(
            "{name}: fitted exponent {} vs expected {} (tolerance {tolerance})",
            report.fitted_exponent,
            dk.expected_exponent()
        )));
    }
    Ok(())
}

fn summarize_fit(out: &Output, name: &str, r: &DecayFitReport, tol: f64, passed: bool) {
    out.say(format!(
        "{name}: j = {}, {} samples, fitted exponent {:.4}, expected {:.4}, tolerance {tol}: {}",
        r.band_j,
        r.times.len(),
        r.fitted_exponent,
        r.expected_exponent.unwrap_or(f64::NAN),
        if passed { "PASS" } else { "FAIL" }
    ));
}

fn counterexample(cfg: &RunConfig, out: &Output) -> Result<()> {
    let cone = cfg.cone()?;
    let q = cfg.q.unwrap_or(4.0);
    if !(q >= 4.0 && q.is_finite()) {
        return Err(reject("q", format!("the counterexample needs 4 <= q < inf, got {q}")));
    }
    let times = cfg.times()?;
    let tolerance = cfg.tolerance()?.unwrap_or(if q == 4.0 { 0.1 } else { 0.02 });
    let report: CounterexampleReport =
        counterexample_run(cone, q, &cfg.inner_cutoffs, times).map_err(|e| reject("inner_cutoffs", e.to_string()))?;
    let deviation = report.worst_deviation();
    let passed = deviation <= tolerance;
    out.write("verify_counterexample.csv", |w| io::write_counterexample_csv(&report, w))?;
    let doc = VerifyDocument {
        schema_version: SCHEMA_VERSION,
        kind: "counterexample",
        sigma: cone.sigma(),
        gamma: cfg.gamma_label(),
        tolerance,
        deviation: Some(deviation),
        passed,
        report: &report,
    };
    out.write("verify_counterexample.json", |w| io::write_json(&doc, w))?;

    out.say(format!("counterexample q = {q}: inner-truncated L^q norms"));
    out.say(format!("{:>10} {:>10} {:>14} {:>10}", "t", "epsilon", "norm", "ratio"));
    for s in &report.series {
        for (i, (e, n)) in s.epsilons.iter().zip(&s.norms).enumerate() {
            let ratio = i.checked_sub(1).and_then(|i| s.log_rate_ratios.get(i));
            let ratio = ratio.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into());
            out.say(format!("{:>10} {:>10.1e} {:>14.6e} {:>10}", s.t, e, n, ratio));
        }
        if let Some(f) = s.fitted_exponent {
            out.say(format!("  t = {}: divergence power {f:.4} (predicted {:.4})", s.t, report.predicted_exponent));
        }
    }
    out.say(format!(
        "worst deviation {deviation:.4}, tolerance {tolerance}: {}",
        if passed { "PASS" } else { "FAIL" }
    ));
    if !passed {
        bail!(ToleranceFailure(format!("counterexample q = {q}: deviation {deviation} exceeds {tolerance}")));
    }
    Ok(())
}

/// Default lattice when the config lists no pairs.
const LATTICE: [f64; 8] = [2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 20.0, f64::INFINITY];

pub fn classify_pairs(cfg: &RunConfig, out: &Output) -> Result<()> {
    let mut pairs = cfg.pairs()?;
    if pairs.is_empty() {
        pairs = LATTICE.iter().flat_map(|&p| LATTICE.iter().map(move |&q| (p, q))).collect();
    }
    let rows: Vec<AdmissiblePair> = pairs.iter().map(|&(p, q)| classify(p, q)).collect();
    out.write("classify.csv", |w| io::write_classification_csv(&rows, w))?;
    let labelled: Vec<_> = rows.iter().map(|c| (c, c.label())).collect();
    #[derive(Serialize)]
    struct Row<'a> {
        #[serde(flatten)]
        pair: &'a AdmissiblePair,
        label: String,
    }
    let doc: Vec<Row> = labelled.into_iter().map(|(pair, label)| Row { pair, label }).collect();
    out.write("classify.json", |w| io::write_json(&doc, w))?;
    for c in &rows {
        out.say(format!("(p, q) = ({}, {}): {}", fmt_exp(c.p), fmt_exp(c.q), c.label()));
    }
    Ok(())
}

fn fmt_exp(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// Synthetic data: seeded complex amplitudes on modes |k| ≤ 2 times a
/// Gaussian of width r_max/40 centred at r_max/8, negligible at both ends
/// of the grid.
fn synthetic_field(cfg: &RunConfig, cone: ConeParams, k_max: usize) -> Result<SpinorField> {
    let radial = Arc::new(cfg.radial_grid()?);
    let (c, w) = (radial.r_max() / 8.0, radial.r_max() / 40.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut spec = ModeSpectrum::new(radial.clone(), k_max);
    let k_data = k_max.min(2) as i64;
    for k in -k_data..=k_data {
        let mut amp = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (a, b) = (amp(), amp());
        let g: Vec<f64> = radial.points().iter().map(|r| (-((r - c) / w).powi(2)).exp()).collect();
        let upper = g.iter().map(|&x| a * x).collect();
        let lower = g.iter().map(|&x| b * x).collect();
        spec.insert(SpinorProfile::new(k, radial.clone(), upper, lower)?)?;
    }
    Ok(synthesize(&spec, cone, AngularGrid::for_modes(k_max, cone.sigma())?)?)
}

fn read_input(path: &Path) -> Result<SpinorField> {
    let f = File::open(path).with_context(|| format!("opening input field {}", path.display()))?;
    io::read_field(BufReader::new(f)).map_err(|e| match e {
        cone_dirac::Error::Io(e) => anyhow::Error::new(e).context(format!("reading {}", path.display())),
        e => reject("input", format!("{}: {e}", path.display())),
    })
}

/// Removes modes carrying nothing but quadrature round-off, so that the
/// transforms are not asked to resolve noise.
fn drop_roundoff_modes(spec: ModeSpectrum) -> Result<ModeSpectrum> {
    let floor = 1e-13 * spec.norm();
    let mut out = ModeSpectrum::new(spec.grid().clone(), spec.k_max());
    for (_, p) in spec.modes() {
        if p.norm() > floor {
            out.insert(p.clone())?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct EvolveSummary<'a> {
    schema_version: u32,
    sigma: f64,
    gamma: String,
    k_max: usize,
    times: &'a [f64],
    norms: &'a [f64],
    input_norm: f64,
    max_drift: f64,
}

pub fn evolve(cfg: &RunConfig, input: Option<&Path>, out: &Output) -> Result<()> {
    let cone = cfg.cone()?;
    let gamma = cfg.gamma()?;
    require_k0(gamma, "evolution of the k = 0 component")?;
    let k_max = cfg.k_max()?;
    let times = cfg.times()?;
    let input = input.or(cfg.input.as_deref());
    let field = match input {
        Some(path) => {
            let f = read_input(path)?;
            if f.cone.sigma() != cone.sigma() {
                return Err(reject("sigma", format!("config has {} but the input field has {}", cone.sigma(), f.cone.sigma())));
            }
            if f.angular.m < 4 * k_max + 1 {
                return Err(reject(
                    "k_max",
                    format!("the input's {} angular nodes resolve |k| <= {}, got k_max = {k_max}", f.angular.m, (f.angular.m - 1) / 4),
                ));
            }
            f
        }
        None => {
            let f = synthetic_field(cfg, cone, k_max)?;
            out.write("evolve_input.csv", |w| io::write_field(&f, w))?;
            f
        }
    };
    let spectral = cfg.spectral_grid(field.radial())?;
    let ctx = SpectralContext::new(field.radial().clone(), Arc::new(spectral));
    let prop = Propagator::new(ctx, cone, gamma);

    let data = drop_roundoff_modes(decompose(&field, k_max)?)?;
    let input_norm = data.norm();
    let mut snapshots = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let u = synthesize(&prop.evolve(&data, t)?, cone, field.angular)?;
        norms.push(u.norm_sq().sqrt());
        snapshots.push((t, u));
    }
    let max_drift = if input_norm > 0.0 {
        norms.iter().map(|n| (n / input_norm - 1.0).abs()).fold(0.0, f64::max)
    } else {
        norms.iter().copied().fold(0.0, f64::max)
    };

    out.write("evolve.csv", |w| io::write_snapshots(&snapshots, w))?;
    out.write("evolve_norms.csv", |w| io::write_norm_series(times, &norms, w))?;
    let summary = EvolveSummary {
        schema_version: SCHEMA_VERSION,
        sigma: cone.sigma(),
        gamma: cfg.gamma_label(),
        k_max,
        times,
        norms: &norms,
        input_norm,
        max_drift,
    };
    out.write("evolve.json", |w| io::write_json(&summary, w))?;
    out.say(format!("evolved {} snapshots; input norm {input_norm:.12e}, max relative drift {max_drift:.3e}", times.len()));
    Ok(())
}
