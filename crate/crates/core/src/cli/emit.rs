//! CSV, JSON and SVG outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Format;
use super::scan::{Manifest, ScanRecord};
use crate::error::{io_err, Error, Result};

pub const CSV_HEADER: &str = "model_hash,n,beta,A,B,R,quantity,value,bound,pass";

/// 17 significant digits, no locale.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn sites(s: &[usize]) -> String {
    s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn to_csv(records: &[ScanRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.model_hash.clone(),
            r.n.to_string(),
            num(r.beta),
            sites(&r.a),
            sites(&r.b),
            r.r.to_string(),
            r.quantity.clone(),
            opt(r.value),
            opt(r.bound),
            r.pass.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Series {
    /// R -> largest value at that distance.
    values: BTreeMap<usize, f64>,
    /// R -> smallest bound at that distance.
    bounds: BTreeMap<usize, f64>,
}

fn series(records: &[ScanRecord]) -> BTreeMap<String, Series> {
    let mut out: BTreeMap<String, Series> = BTreeMap::new();
    for r in records {
        let ok = |x: Option<f64>| x.filter(|v| v.is_finite() && *v > 0.0);
        let Some(v) = ok(r.value) else { continue };
        let s = out
            .entry(r.quantity.clone())
            .or_insert_with(|| Series { values: BTreeMap::new(), bounds: BTreeMap::new() });
        let e = s.values.entry(r.r).or_insert(v);
        *e = e.max(v);
        if let Some(b) = ok(r.bound) {
            let e = s.bounds.entry(r.r).or_insert(b);
            *e = e.min(b);
        }
    }
    out
}

/// Semilog plot of value against R: one polyline per quantity, bounds as dashed paths.
pub fn to_svg(records: &[ScanRecord]) -> String {
    let all = series(records);
    let (ml, mr, mt, mb) = (70.0, 200.0, 30.0, 50.0);
    let (pw, ph) = (490.0, 400.0);
    let w = ml + pw + mr;
    // the legend may outgrow the plot
    let h = f64::max(mt + ph + mb, mt + 24.0 + 16.0 * all.len() as f64);

    let xs: Vec<f64> = all.values().flat_map(|s| s.values.keys().chain(s.bounds.keys())).map(|&r| r as f64).collect();
    let ys: Vec<f64> =
        all.values().flat_map(|s| s.values.values().chain(s.bounds.values())).map(|v| v.log10()).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 1.0, hi + 1.0)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let (y0, y1) = (y0.floor(), y1.ceil());
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| mt + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r##"<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
    // decade ticks
    let step = ((y1 - y0) / 10.0).ceil().max(1.0);
    let mut y = y0;
    while y <= y1 + 1e-9 {
        let yy = py(y);
        let _ = writeln!(s, r##"<line x1="{ml}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/>"##, ml + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, ml - 6.0, yy + 4.0, y as i64);
        y += step;
    }
    let xstep = ((x1 - x0) / 10.0).ceil().max(1.0);
    let mut x = x0.ceil();
    while x <= x1 + 1e-9 {
        let xx = px(x);
        let _ = writeln!(s, r#"<text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, mt + ph + 16.0, x as i64);
        x += xstep;
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">distance R</text>"#, ml + pw / 2.0, mt + ph + 40.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">value (log scale)</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0
    );
    if all.is_empty() {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">no data</text>"#, ml + pw / 2.0, mt + ph / 2.0);
    }
    for (i, (name, ser)) in all.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> =
            ser.values.iter().map(|(&r, &v)| format!("{:.2},{:.2}", px(r as f64), py(v.log10()))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            xml_escape(name)
        );
        if !ser.bounds.is_empty() {
            let d: Vec<String> = ser
                .bounds
                .iter()
                .enumerate()
                .map(|(k, (&r, &b))| format!("{}{:.2},{:.2}", if k == 0 { "M" } else { "L" }, px(r as f64), py(b.log10())))
                .collect();
            let _ = writeln!(
                s,
                r#"<path class="bound" fill="none" stroke="{color}" stroke-dasharray="5,4" d="{}"/>"#,
                d.join(" ")
            );
        }
        let ly = mt + 12.0 + 16.0 * i as f64;
        let lx = ml + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, ly + 4.0, xml_escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    std::fs::write(&path, body).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes records.csv, records.json and decay.svg as requested; returns the paths written.
pub fn emit_outputs(records: &[ScanRecord], formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut fmts = formats.to_vec();
    fmts.sort();
    fmts.dedup();
    let mut out = Vec::new();
    for f in fmts {
        out.push(match f {
            Format::Csv => write(dir.join("records.csv"), &to_csv(records)?)?,
            Format::Json => write(dir.join("records.json"), &to_json(records)?)?,
            Format::Svg => write(dir.join("decay.svg"), &to_svg(records))?,
        });
    }
    Ok(out)
}

pub fn write_manifest(manifest: &Manifest, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write(dir.join("manifest.json"), &to_json(manifest)?)
}

pub fn read_records(path: &Path) -> Result<Vec<ScanRecord>> {
    let s = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
