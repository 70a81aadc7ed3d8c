//! Line-oriented CSV and JSON files. Floats are written with 17 significant
//! digits and '.' as the decimal point, so equal inputs give equal bytes.

use crate::eigenbasis::{ConeParams, SpinorField};
use crate::error::{Error, Result};
use crate::estimates::{AdmissiblePair, CounterexampleReport, DecayFitReport};
use crate::grid::{AngularGrid, RadialGrid, RadialGridSpec};
use crate::propagator::KernelMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Version tag of every JSON document written here.
pub const SCHEMA_VERSION: u32 = 1;

/// Round-trip float formatting: 17 significant digits in scientific form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// First line of a field file, after "# ".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub schema_version: u32,
    pub sigma: f64,
    pub radial: RadialGridSpec,
    pub angular_m: usize,
}

#[derive(Debug, Deserialize)]
struct FieldRow {
    r: f64,
    theta: f64,
    re_u1: f64,
    im_u1: f64,
    re_u2: f64,
    im_u2: f64,
}

const FIELD_COLUMNS: [&str; 6] = ["r", "theta", "re_u1", "im_u1", "re_u2", "im_u2"];

fn field_rows<W: Write>(out: &mut csv::Writer<W>, field: &SpinorField, prefix: &[String]) -> Result<()> {
    let thetas = field.angular.thetas();
    for (i, &r) in field.radial().points().iter().enumerate() {
        for (j, &theta) in thetas.iter().enumerate() {
            let v = field.at(i, j);
            let mut rec: Vec<String> = prefix.to_vec();
            rec.extend([r, theta, v[0].re, v[0].im, v[1].re, v[1].im].map(fmt_f64));
            out.write_record(&rec)?;
        }
    }
    Ok(())
}

/// Writes a JSON header line "# {...}" followed by one CSV row per grid node,
/// radius-major.
pub fn write_field<W: Write>(field: &SpinorField, mut w: W) -> Result<()> {
    let header = FieldHeader {
        schema_version: SCHEMA_VERSION,
        sigma: field.cone.sigma(),
        radial: field.radial().spec(),
        angular_m: field.angular.m,
    };
    writeln!(w, "# {}", serde_json::to_string(&header)?)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FIELD_COLUMNS)?;
    field_rows(&mut out, field, &[])?;
    out.flush()?;
    Ok(())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Reads a file written by [`write_field`], checking every row against the
/// grid described in the header.
pub fn read_field<R: BufRead>(mut r: R) -> Result<SpinorField> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let json = first
        .trim_end()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("field file must start with a '# {json}' header line".into()))?;
    let header: FieldHeader = serde_json::from_str(json.trim())?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported field schema_version {}", header.schema_version)));
    }
    let cone = ConeParams::new(header.sigma)?;
    let radial = Arc::new(RadialGrid::from_spec(&header.radial)?);
    let angular = AngularGrid::new(header.angular_m, header.sigma)?;
    let thetas = angular.thetas();
    let m = angular.m;
    let mut values = Vec::with_capacity(radial.len() * m);
    for (idx, row) in csv::Reader::from_reader(r).deserialize::<FieldRow>().enumerate() {
        let row = row?;
        let (i, j) = (idx / m, idx % m);
        let line = idx + 3;
        if i >= radial.len() {
            return Err(Error::GridMismatch(format!("line {line}: more rows than the header's grid holds")));
        }
        if !close(row.r, radial.points()[i]) || !close(row.theta, thetas[j]) {
            return Err(Error::GridMismatch(format!(
                "line {line}: node (r, theta) = ({}, {}) does not match the header grid ({}, {})",
                row.r,
                row.theta,
                radial.points()[i],
                thetas[j]
            )));
        }
        values.push([Complex64::new(row.re_u1, row.im_u1), Complex64::new(row.re_u2, row.im_u2)]);
    }
    SpinorField::new(cone, radial, angular, values)
}

/// Snapshots of an evolved field: columns t, r, theta and the two components.
pub fn write_snapshots<W: Write>(snapshots: &[(f64, SpinorField)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut head = vec!["t"];
    head.extend(FIELD_COLUMNS);
    out.write_record(head)?;
    for (t, field) in snapshots {
        field_rows(&mut out, field, &[fmt_f64(*t)])?;
    }
    out.flush()?;
    Ok(())
}

/// One entry of a radial kernel dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow<'a> {
    pub t: f64,
    pub k: i64,
    pub j: Option<i32>,
    pub component: &'a str,
    pub nu: f64,
    pub r: f64,
    pub s: f64,
    pub value: Complex64,
}

/// Rows of a wave kernel, upper component first, r-major.
pub fn kernel_rows(m: &KernelMatrix) -> Vec<KernelRow<'static>> {
    let mut rows = Vec::with_capacity(2 * m.upper.len());
    for (c, (name, values)) in [("upper", &m.upper), ("lower", &m.lower)].into_iter().enumerate() {
        for (a, &r) in m.r.iter().enumerate() {
            for (b, &s) in m.s.iter().enumerate() {
                rows.push(KernelRow {
                    t: m.t,
                    k: m.k,
                    j: Some(m.j),
                    component: name,
                    nu: m.orders[c].value(),
                    r,
                    s,
                    value: values[a * m.s.len() + b],
                });
            }
        }
    }
    rows
}

/// Columns t, k, j, component, nu, r, s, re, im; j is empty for unlocalized
/// kernels.
pub fn write_kernel_rows<W: Write>(rows: &[KernelRow<'_>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "k", "j", "component", "nu", "r", "s", "re", "im"])?;
    for row in rows {
        out.write_record([
            fmt_f64(row.t),
            row.k.to_string(),
            row.j.map(|j| j.to_string()).unwrap_or_default(),
            row.component.to_string(),
            fmt_f64(row.nu),
            fmt_f64(row.r),
            fmt_f64(row.s),
            fmt_f64(row.value.re),
            fmt_f64(row.value.im),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns t, norm, model_norm.
pub fn write_decay_csv<W: Write>(report: &DecayFitReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "norm", "model_norm"])?;
    for (&t, &n) in report.times.iter().zip(&report.norms) {
        out.write_record([fmt_f64(t), fmt_f64(n), fmt_f64(report.model_norm(t))])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns t, norm.
pub fn write_norm_series<W: Write>(times: &[f64], norms: &[f64], w: W) -> Result<()> {
    if times.len() != norms.len() {
        return Err(Error::GridMismatch(format!("{} times for {} norms", times.len(), norms.len())));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "norm"])?;
    for (&t, &n) in times.iter().zip(norms) {
        out.write_record([fmt_f64(t), fmt_f64(n)])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns t, epsilon, norm, log_rate_ratio; the ratio (q = 4 only) compares
/// a cutoff with the previous one and is empty on the first.
pub fn write_counterexample_csv<W: Write>(report: &CounterexampleReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "epsilon", "norm", "log_rate_ratio"])?;
    for s in &report.series {
        for (i, (&eps, &n)) in s.epsilons.iter().zip(&s.norms).enumerate() {
            let ratio = i.checked_sub(1).and_then(|i| s.log_rate_ratios.get(i).copied());
            out.write_record([fmt_f64(s.t), fmt_f64(eps), fmt_f64(n), fmt_opt(ratio)])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn fmt_exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        fmt_f64(x)
    }
}

/// Columns p, q, perp, p0, full, weighted_theta_min, s, label.
pub fn write_classification_csv<W: Write>(pairs: &[AdmissiblePair], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["p", "q", "perp", "p0", "full", "weighted_theta_min", "s", "label"])?;
    for c in pairs {
        out.write_record([
            fmt_exponent(c.p),
            fmt_exponent(c.q),
            c.perp.to_string(),
            c.p0.to_string(),
            c.full.to_string(),
            fmt_opt(c.weighted_theta_min),
            fmt_f64(c.sobolev_s),
            c.label(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}
