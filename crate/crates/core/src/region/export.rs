//! CSV and SVG serialization of regions.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use super::{fmt_q, parse_q, qi, Closure, RatPoint, Region, Status, Q};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::Config(format!("unknown format {other:?}, expected csv or svg"))),
        }
    }
}

pub fn export_region(region: &Region, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Csv => to_csv(region).into_bytes(),
        ExportFormat::Svg => to_svg(region).into_bytes(),
    }
}

fn to_csv(r: &Region) -> String {
    let mut out = String::new();
    out.push_str("# schema=1\n");
    let _ = writeln!(out, "# region={}", r.name);
    for note in &r.notes {
        let _ = writeln!(out, "# note={note}");
    }
    out.push_str("kind,label,ip,iq,strong,rwt\n");
    for (k, v) in r.vertices.iter().enumerate() {
        let c = r.vertex_closure[k];
        let _ = writeln!(out, "vertex,{},{},{},{},{}", r.labels[k], fmt_q(&v.ip), fmt_q(&v.iq), c.strong.as_str(), c.rwt.as_str());
    }
    let k = r.vertices.len();
    for (i, c) in r.edge_closure.iter().enumerate() {
        let label = format!("{}-{}", r.labels[i], r.labels[(i + 1) % k]);
        let _ = writeln!(out, "edge,{label},,,{},{}", c.strong.as_str(), c.rwt.as_str());
    }
    out
}

/// Inverse of the CSV export.
pub fn parse_region_csv(text: &str) -> Result<Region> {
    let mut r = Region {
        name: String::new(),
        vertices: Vec::new(),
        labels: Vec::new(),
        vertex_closure: Vec::new(),
        edge_closure: Vec::new(),
        notes: Vec::new(),
    };
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# region=") {
            r.name = rest.to_string();
            continue;
        }
        if let Some(rest) = line.strip_prefix("# note=") {
            r.notes.push(rest.to_string());
            continue;
        }
        if line.starts_with('#') || line.starts_with("kind,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Config(format!("expected 6 columns in region row {line:?}")));
        }
        let closure = Closure { strong: Status::parse(cols[4])?, rwt: Status::parse(cols[5])? };
        match cols[0] {
            "vertex" => {
                r.labels.push(cols[1].to_string());
                r.vertices.push(RatPoint::new(parse_q(cols[2])?, parse_q(cols[3])?));
                r.vertex_closure.push(closure);
            }
            "edge" => r.edge_closure.push(closure),
            other => return Err(Error::Config(format!("unknown row kind {other:?}"))),
        }
    }
    if r.edge_closure.len() != r.vertices.len() {
        return Err(Error::Config("edge and vertex counts differ".into()));
    }
    Ok(r)
}

/// Exact decimal rendering with three fractional digits (rounded half up).
fn decimal(x: &Q) -> String {
    let scaled = x * qi(1000);
    let num = scaled.numer();
    let den = scaled.denom();
    let twice = BigInt::from(2) * num + den;
    let (rounded, _) = twice.div_mod_floor(&(BigInt::from(2) * den));
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (int, frac) = abs.div_rem(&BigInt::from(1000));
    format!("{}{}.{:03}", if neg { "-" } else { "" }, int, frac.to_string().parse::<u32>().unwrap_or(0))
}

const SIZE: i64 = 400;
const MARGIN: i64 = 40;

fn px(v: &Q) -> Q {
    qi(MARGIN) + v * qi(SIZE)
}

fn py(v: &Q) -> Q {
    qi(MARGIN + SIZE) - v * qi(SIZE)
}

fn to_svg(r: &Region) -> String {
    let total = SIZE + 2 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#);
    let _ = writeln!(out, "<title>{}</title>", r.name);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    // diagonal 1/p = 1/q
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN}" y1="{}" x2="{}" y2="{MARGIN}" stroke="#999" stroke-dasharray="4 4"/>"##,
        MARGIN + SIZE,
        MARGIN + SIZE
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="14">1/p</text>"#, MARGIN + SIZE - 20, MARGIN + SIZE + 25);
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="14">1/q</text>"#, MARGIN + 15);
    let points: Vec<String> = r.vertices.iter().map(|v| format!("{},{}", decimal(&px(&v.ip)), decimal(&py(&v.iq)))).collect();
    let _ = writeln!(out, r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.6" stroke="#08519c" stroke-width="2"/>"##, points.join(" "));
    for (k, v) in r.vertices.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="3"/><text x="{}" y="{}" font-size="12">{} ({}, {})</text>"#,
            decimal(&px(&v.ip)),
            decimal(&py(&v.iq)),
            decimal(&(px(&v.ip) + qi(6))),
            decimal(&(py(&v.iq) - qi(6))),
            r.labels[k],
            fmt_q(&v.ip),
            fmt_q(&v.iq)
        );
    }
    out.push_str("</svg>\n");
    out
}
