//! Flat `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments win,
//! and `--set key=value` overrides are applied after the file. Unknown keys are
//! rejected.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::counterexamples::{BallParams, Exponent, Family, KnappParams, MomentParams, ScalingParams};
use crate::error::{Error, Result};
use crate::group::{quaternionic_htype, standard_heisenberg, unit_heisenberg, MetivierStructure};
use crate::region::ExportFormat;

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("structure", "heisenberg", "heisenberg | unit-heisenberg | quaternionic"),
    ("n", "2", "half the horizontal dimension (quaternionic: 2 x blocks)"),
    ("m", "1", "center dimension (quaternionic only, 1..3)"),
    ("lambda", "", "comma-separated entries of the m x 2n matrix, row-major; empty means 0"),
    ("seed", "0", "64-bit seed for every sampled quantity"),
    ("format", "csv", "csv | svg"),
    ("out", "", "output path; empty writes to stdout"),
    ("samples", "1000", "group-check: samples per property"),
    ("tolerance", "1e-12", "group-check: absolute tolerance after scaling"),
    ("points", "100", "geometry: generic chart points"),
    ("diagonal_points", "50", "geometry: chart points with x' = y'"),
    ("fold_points", "50", "geometry: chart points on sigma = 0"),
    ("family", "ball", "counterexample: ball | scaling | knapp | stein | moment"),
    ("p", "1", "counterexample: Lebesgue exponent of the input (rational or inf)"),
    ("q", "inf", "counterexample: Lebesgue exponent of the output"),
    ("delta", "3..7", "counterexample: dyadic ladder a..b, delta = 2^-a .. 2^-b"),
    ("slope_tolerance", "0.15", "counterexample: allowed |slope - predicted|"),
    ("min_r2", "0.98", "counterexample: minimal r^2 of the fit"),
    ("ball.radius", "1", "f is the indicator of the ball of radius radius*delta"),
    ("ball.region_constant", "", "test slab half-width delta/C; empty uses 10(1+|Lambda|+max|J_i|)"),
    ("ball.quadrature", "", "cap rule points per axis; empty uses 192 (n=1) or 20"),
    ("ball.directions", "", "sphere rule resolution for the test shell; empty uses 8 (n=1) or 4"),
    ("ball.radial", "6", "radial cells of the test shell"),
    ("ball.offsets", "7", "center cells of the test shell"),
    ("ball.field", "12", "lattice points per axis for the norm of f"),
    ("scaling.t", "1.5", "fixed time"),
    ("scaling.c0", "", "shell width constant; empty uses 10 sum |J_i|"),
    ("scaling.quadrature", "", "global sphere rule resolution; empty uses 64 (n=1) or 8"),
    ("scaling.directions", "", "direction resolution of both shells; empty uses 8 (n=1) or 4"),
    ("scaling.radial", "4", "radial cells"),
    ("scaling.offsets", "3", "center cells"),
    ("knapp.field", "1,1,1", "a,b,c: f lives on |perp| <= a sqrt(delta), |plane| <= b delta, |center| <= c delta"),
    ("knapp.region", "0.5,0.5", "a',c': test region widths"),
    ("knapp.counts", "3,2,6,5", "lattice counts for r, phi, each perpendicular coordinate, s"),
    ("knapp.quadrature", "", "split rule points per axis; empty uses 192 (n=1) or 16"),
    ("knapp.field_count", "12", "lattice points per axis for the norm of f"),
    ("moment.counts", "8", "lattice points per axis on the test box"),
    ("moment.field", "8", "lattice points per axis for the norm of f"),
    ("moment.quadrature", "256", "cap rule points"),
    ("stein.alpha", "0.9", "log exponent, in ((2n-1)/2n, 1)"),
    ("stein.levels", "10..30", "eps = 2^-j for j in the range"),
    ("stein.tolerance", "0.2", "allowed |growth - (1 - alpha)|"),
    ("region", "maximal", "region: maximal | averaging"),
    ("lemma.samples", "200", "lemma-check: random skew matrices"),
    ("lemma.dims", "2..8", "lemma-check: matrix sizes"),
    ("lemma.tolerance", "1e-10", "lemma-check: relative error bound"),
];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| cfg(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_num(key, x)).collect()
}

fn parse_range(key: &str, v: &str) -> Result<(u32, u32)> {
    let (a, b) = v.split_once("..").ok_or_else(|| cfg(format!("{key}: expected a range a..b, got {v:?}")))?;
    let (a, b): (u32, u32) = (parse_num(key, a)?, parse_num(key, b)?);
    if a > b {
        return Err(cfg(format!("{key}: empty range {v:?}")));
    }
    Ok((a, b))
}

fn optional<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(key, v).map(Some)
    }
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(cfg(format!("{key} must be positive")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Heisenberg,
    UnitHeisenberg,
    Quaternionic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Maximal,
    Averaging,
}

/// Every setting of a harness run, already validated.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub structure_kind: StructureKind,
    pub n: usize,
    pub m: usize,
    pub lambda: Vec<f64>,
    pub seed: u64,
    pub format: ExportFormat,
    pub out: Option<String>,
    pub samples: usize,
    pub tolerance: f64,
    pub points: usize,
    pub diagonal_points: usize,
    pub fold_points: usize,
    pub family: Family,
    pub p: Exponent,
    pub q: Exponent,
    pub delta_range: (u32, u32),
    pub slope_tolerance: f64,
    pub min_r2: f64,
    pub ball: BallParams,
    pub scaling: ScalingParams,
    pub knapp: KnappParams,
    pub moment: MomentParams,
    pub stein_alpha: f64,
    pub stein_levels: (u32, u32),
    pub stein_tolerance: f64,
    pub region: RegionKind,
    pub lemma_samples: usize,
    pub lemma_dims: (u32, u32),
    pub lemma_tolerance: f64,
    /// The effective `key = value` table, including defaults.
    pub table: BTreeMap<String, String>,
}

/// Reads `key = value` lines into `table`.
pub fn parse_assignments(text: &str, table: &mut BTreeMap<String, String>) -> Result<()> {
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| cfg(format!("line {}: expected key = value, got {raw:?}", no + 1)))?;
        set_key(table, k, v)?;
    }
    Ok(())
}

pub fn set_key(table: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<()> {
    let key = key.trim();
    if !KEYS.iter().any(|(k, _, _)| *k == key) {
        return Err(cfg(format!("unknown key {key:?}")));
    }
    table.insert(key.to_string(), value.trim().to_string());
    Ok(())
}

/// `key=value` as given on the command line.
pub fn parse_override(arg: &str, table: &mut BTreeMap<String, String>) -> Result<()> {
    let (k, v) = arg.split_once('=').ok_or_else(|| cfg(format!("--set expects key=value, got {arg:?}")))?;
    set_key(table, k, v)
}

pub fn default_table() -> BTreeMap<String, String> {
    KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect()
}

impl ExperimentConfig {
    pub fn from_table(table: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| table.get(k).map(String::as_str).unwrap_or("");
        let structure_kind = match get("structure") {
            "heisenberg" => StructureKind::Heisenberg,
            "unit-heisenberg" => StructureKind::UnitHeisenberg,
            "quaternionic" => StructureKind::Quaternionic,
            other => return Err(cfg(format!("structure: unknown kind {other:?}"))),
        };
        let n: usize = positive("n", parse_num("n", get("n"))?)?;
        let m: usize = positive("m", parse_num("m", get("m"))?)?;
        let lambda: Vec<f64> = parse_list("lambda", get("lambda"))?;
        let family = Family::parse(get("family"))?;

        let mut ball = BallParams::new(n);
        ball.radius = parse_num("ball.radius", get("ball.radius"))?;
        ball.region_constant = optional("ball.region_constant", get("ball.region_constant"))?;
        if let Some(v) = optional("ball.quadrature", get("ball.quadrature"))? {
            ball.quadrature = v;
        }
        if let Some(v) = optional("ball.directions", get("ball.directions"))? {
            ball.directions = v;
        }
        ball.radial_count = positive("ball.radial", parse_num("ball.radial", get("ball.radial"))?)?;
        ball.offset_count = positive("ball.offsets", parse_num("ball.offsets", get("ball.offsets"))?)?;
        ball.field_count = positive("ball.field", parse_num("ball.field", get("ball.field"))?)?;

        let mut scaling = ScalingParams::new(n);
        scaling.t = parse_num("scaling.t", get("scaling.t"))?;
        scaling.c0 = optional("scaling.c0", get("scaling.c0"))?;
        if let Some(v) = optional("scaling.quadrature", get("scaling.quadrature"))? {
            scaling.quadrature = v;
        }
        if let Some(v) = optional("scaling.directions", get("scaling.directions"))? {
            scaling.directions = v;
        }
        scaling.radial_count = positive("scaling.radial", parse_num("scaling.radial", get("scaling.radial"))?)?;
        scaling.offset_count = positive("scaling.offsets", parse_num("scaling.offsets", get("scaling.offsets"))?)?;

        let mut knapp = KnappParams::new(n);
        knapp.field = fixed_list("knapp.field", get("knapp.field"))?;
        knapp.region = fixed_list("knapp.region", get("knapp.region"))?;
        knapp.counts = fixed_list("knapp.counts", get("knapp.counts"))?;
        if knapp.counts.contains(&0) {
            return Err(cfg("knapp.counts must be positive"));
        }
        if let Some(v) = optional("knapp.quadrature", get("knapp.quadrature"))? {
            knapp.quadrature = v;
        }
        knapp.field_count = positive("knapp.field_count", parse_num("knapp.field_count", get("knapp.field_count"))?)?;

        let moment = MomentParams {
            counts: positive("moment.counts", parse_num("moment.counts", get("moment.counts"))?)?,
            field_count: positive("moment.field", parse_num("moment.field", get("moment.field"))?)?,
            quadrature: positive("moment.quadrature", parse_num("moment.quadrature", get("moment.quadrature"))?)?,
        };

        let region = match get("region") {
            "maximal" => RegionKind::Maximal,
            "averaging" => RegionKind::Averaging,
            other => return Err(cfg(format!("region: expected maximal or averaging, got {other:?}"))),
        };
        let out = Some(get("out").to_string()).filter(|s| !s.is_empty());
        let lemma_dims = parse_range("lemma.dims", get("lemma.dims"))?;
        if lemma_dims.0 < 1 {
            return Err(cfg("lemma.dims must start at 1 or more"));
        }
        let config = Self {
            structure_kind,
            n,
            m,
            lambda,
            seed: parse_num("seed", get("seed"))?,
            format: ExportFormat::from_str(get("format"))?,
            out,
            samples: positive("samples", parse_num("samples", get("samples"))?)?,
            tolerance: parse_num("tolerance", get("tolerance"))?,
            points: parse_num("points", get("points"))?,
            diagonal_points: parse_num("diagonal_points", get("diagonal_points"))?,
            fold_points: parse_num("fold_points", get("fold_points"))?,
            family,
            p: Exponent::parse(get("p"))?,
            q: Exponent::parse(get("q"))?,
            delta_range: parse_range("delta", get("delta"))?,
            slope_tolerance: parse_num("slope_tolerance", get("slope_tolerance"))?,
            min_r2: parse_num("min_r2", get("min_r2"))?,
            ball,
            scaling,
            knapp,
            moment,
            stein_alpha: parse_num("stein.alpha", get("stein.alpha"))?,
            stein_levels: parse_range("stein.levels", get("stein.levels"))?,
            stein_tolerance: parse_num("stein.tolerance", get("stein.tolerance"))?,
            region,
            lemma_samples: positive("lemma.samples", parse_num("lemma.samples", get("lemma.samples"))?)?,
            lemma_dims,
            lemma_tolerance: parse_num("lemma.tolerance", get("lemma.tolerance"))?,
            table,
        };
        config.structure()?;
        Ok(config)
    }

    /// The group datum described by `structure`, `n`, `m` and `lambda`.
    pub fn structure(&self) -> Result<MetivierStructure> {
        let base = match self.structure_kind {
            StructureKind::Heisenberg | StructureKind::UnitHeisenberg if self.m != 1 => {
                return Err(cfg(format!("Heisenberg structures have m = 1, got m = {}", self.m)))
            }
            StructureKind::Heisenberg => standard_heisenberg(self.n),
            StructureKind::UnitHeisenberg => unit_heisenberg(self.n),
            StructureKind::Quaternionic => {
                if !self.n.is_multiple_of(2) {
                    return Err(cfg(format!("quaternionic structures need even n, got n = {}", self.n)));
                }
                quaternionic_htype(self.n / 2, self.m).map_err(|e| cfg(e.to_string()))?
            }
        };
        if self.lambda.is_empty() {
            return Ok(base);
        }
        let (m, hn) = (base.m(), 2 * base.n());
        if self.lambda.len() != m * hn {
            return Err(cfg(format!("lambda needs {} entries (m x 2n = {m} x {hn}), got {}", m * hn, self.lambda.len())));
        }
        base.with_lambda(DMatrix::from_row_slice(m, hn, &self.lambda)).map_err(|e| cfg(e.to_string()))
    }

    /// One-line description for CSV headers.
    pub fn structure_label(&self) -> String {
        let kind = match self.structure_kind {
            StructureKind::Heisenberg => "heisenberg",
            StructureKind::UnitHeisenberg => "unit-heisenberg",
            StructureKind::Quaternionic => "quaternionic",
        };
        let lambda = if self.lambda.is_empty() { "0".to_string() } else { self.table.get("lambda").cloned().unwrap_or_default() };
        format!("{kind} n={} m={} lambda={}", self.n, self.m, lambda.replace(' ', ""))
    }
}

fn fixed_list<T: FromStr + Copy + Default, const K: usize>(key: &str, v: &str) -> Result<[T; K]> {
    let items: Vec<T> = parse_list(key, v)?;
    if items.len() != K {
        return Err(cfg(format!("{key}: expected {K} comma-separated values, got {}", items.len())));
    }
    let mut out = [T::default(); K];
    out.copy_from_slice(&items);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<ExperimentConfig> {
        let mut t = default_table();
        parse_assignments(text, &mut t)?;
        ExperimentConfig::from_table(t)
    }

    #[test]
    fn defaults_parse() {
        let c = load("").unwrap();
        assert_eq!(c.structure().unwrap().d(), 5);
        assert_eq!(c.family, Family::Ball);
        assert_eq!(c.q, Exponent::infinity());
        assert_eq!(c.delta_range, (3, 7));
    }

    #[test]
    fn assignments_and_comments() {
        let c = load("# comment\n structure = quaternionic \nn=2\nm=3\n\nseed = 42\nknapp.counts = 1,2,3,4\n").unwrap();
        assert_eq!(c.structure().unwrap().m(), 3);
        assert_eq!(c.seed, 42);
        assert_eq!(c.knapp.counts, [1, 2, 3, 4]);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "bogus = 1",
            "n = two",
            "just a line",
            "structure = quaternionic\nn = 3",
            "m = 2",
            "lambda = 1,2",
            "p = 1/2",
            "delta = 7..3",
            "format = png",
            "knapp.field = 1,1",
        ] {
            assert!(matches!(load(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut t = default_table();
        parse_assignments("n = 1", &mut t).unwrap();
        parse_override("n=3", &mut t).unwrap();
        assert!(parse_override("n", &mut t).is_err());
        assert_eq!(ExperimentConfig::from_table(t).unwrap().n, 3);
    }
}
