use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::fourier::TransformKind;
use crate::geometry::{body_from_density, SphereField, StarBody};
use crate::lattice::DEFAULT_BUDGET;
use crate::{Error, Result};

/// Every key the config understands.
pub const KEYS: &[&str] = &[
    "kind", "body", "dim", "k", "axes", "radius", "normals", "offsets", "density", "f", "rho", "rho-start",
    "rho-stop", "per-octave", "jitter", "seed", "rotations", "angle", "out", "workers", "samples", "sigmas",
    "r-start", "r-stop", "r-step", "directions", "transform", "budget", "fit-start", "fit-stop",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Count,
    Converge,
    RotateAverage,
    FourierDecay,
    VerifyIdentity,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "count" => Self::Count,
            "converge" => Self::Converge,
            "rotate-average" => Self::RotateAverage,
            "fourier-decay" => Self::FourierDecay,
            "verify-identity" => Self::VerifyIdentity,
            other => return Err(Error::config("kind", format!("unknown experiment kind '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum BodySpec {
    Ball { radius: f64 },
    Ellipsoid { axes: Vec<f64> },
    Superellipsoid { k: u32 },
    Polygon { normals: Vec<[f64; 2]>, offsets: Vec<f64> },
    Square,
    DensityBody { expr: String },
}

impl BodySpec {
    pub fn build(&self, dim: usize) -> Result<StarBody> {
        match self {
            BodySpec::Ball { radius } => StarBody::ball(dim, *radius),
            BodySpec::Ellipsoid { axes } => {
                if axes.len() != dim {
                    return Err(Error::config("axes", format!("{} axes given for dim {dim}", axes.len())));
                }
                StarBody::ellipsoid(axes.clone())
            }
            BodySpec::Superellipsoid { k } => StarBody::superellipsoid(dim, *k),
            BodySpec::Polygon { normals, offsets } => {
                require_planar(dim)?;
                StarBody::polygon(normals.clone(), offsets.clone())
            }
            BodySpec::Square => {
                require_planar(dim)?;
                Ok(StarBody::square())
            }
            BodySpec::DensityBody { expr } => body_from_density(&SphereField::builtin(expr)?, dim),
        }
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self, BodySpec::Polygon { .. } | BodySpec::Square)
    }
}

fn require_planar(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::config("dim", format!("polygons are planar, got dim {dim}")));
    }
    Ok(())
}

/// Validated experiment description.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub body: BodySpec,
    pub dim: usize,
    /// Test function id.
    pub f: String,
    /// Single radius for `count`.
    pub rho: Option<f64>,
    pub rho_start: f64,
    pub rho_stop: f64,
    pub per_octave: u32,
    pub jitter: bool,
    pub seed: u64,
    pub rotations: usize,
    pub angle: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub samples: u64,
    pub sigmas: f64,
    pub r_start: f64,
    pub r_stop: f64,
    pub r_step: f64,
    /// Direction angles in radians.
    pub directions: Vec<f64>,
    pub transform: TransformKind,
    pub budget: u64,
    pub fit_window: Option<(f64, f64)>,
    /// Resolved `key=value` pairs, for the run record.
    pub snapshot: BTreeMap<String, String>,
}

/// `key=value` pairs with the line they came from (0 for flags).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    /// Parse a flat `key=value` file; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {line_no}"), format!("expected key=value, got '{line}'")))?;
            raw.insert_at(key.trim(), value.trim(), line_no)?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn insert_at(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if !KEYS.contains(&key) {
            let at = if line > 0 { format!("line {line}") } else { format!("--{key}") };
            return Err(Error::config(at, format!("unknown key '{key}'")));
        }
        self.entries.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    /// Set a value, overriding anything read from a file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        self.insert_at(key, &value.into(), 0)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn location(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some((_, line)) if *line > 0 => format!("{key} (line {line})"),
            _ => key.to_string(),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(self.location(key), format!("cannot parse '{v}'"))),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_number(v).map(Some).map_err(|m| Error::config(self.location(key), m)),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some).map_err(|m| Error::config(self.location(key), m)),
        }
    }

    pub fn into_config(self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_raw(self)
    }
}

/// Numbers may be written as decimals, `1e4`, `2^10`, `pi`, or `sqrt(x)`.
fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    if s == "pi" {
        return Ok(std::f64::consts::PI);
    }
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return parse_number(inner).map(f64::sqrt);
    }
    if let Some((b, e)) = s.split_once('^') {
        return Ok(parse_number(b)?.powf(parse_number(e)?));
    }
    if let Some(rest) = s.strip_prefix('-') {
        return parse_number(rest).map(|v| -v);
    }
    Err(format!("not a number: '{s}'"))
}

/// `[a, b, (c, d), ...]` flattened to numbers.
fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .map(|t| {
            let t = t.trim_start_matches(['[', '(']).trim_end_matches([']', ')']);
            if t.starts_with("sqrt(") { format!("{t})") } else { t.to_string() }
        })
        .filter(|t| !t.is_empty())
        .map(|t| parse_number(&t))
        .collect()
}

/// Split on whitespace that is not inside brackets.
fn tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth <= 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.into_config()
    }

    fn from_raw(mut raw: RawConfig) -> Result<Self> {
        let kind: ExperimentKind = raw
            .get("kind")
            .ok_or_else(|| Error::config("kind", "missing experiment kind"))?
            .parse()?;

        // Inline parameters in the body spec behave like top-level keys.
        let body_text = raw.get("body").map(str::to_string);
        let mut family = None;
        if let Some(text) = &body_text {
            let line = raw.entries.get("body").map_or(0, |e| e.1);
            let mut parts = tokens(text).into_iter();
            family = parts.next();
            for part in parts {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::config(raw.location("body"), format!("expected key=value in body spec, got '{part}'")))?;
                let k = if k == "expr" { "density" } else { k };
                raw.insert_at(k, v, line)?;
            }
        }
        let dim: usize = raw.parsed("dim")?.unwrap_or(2);
        if !(2..=4).contains(&dim) {
            return Err(Error::config(raw.location("dim"), format!("dimension must be 2, 3 or 4, got {dim}")));
        }
        let family = match family {
            Some(f) => f,
            None if raw.get("density").is_some() => "density-body".to_string(),
            None => "ball".to_string(),
        };
        let body = match family.as_str() {
            "ball" => BodySpec::Ball {
                radius: raw.number("radius")?.unwrap_or(1.0),
            },
            "ellipsoid" => BodySpec::Ellipsoid {
                axes: raw.list("axes")?.ok_or_else(|| Error::config("axes", "ellipsoid needs axes=[...]"))?,
            },
            "superellipsoid" | "superellipse" => BodySpec::Superellipsoid {
                k: raw.parsed("k")?.ok_or_else(|| Error::config("k", "superellipsoid needs k=<int>"))?,
            },
            "polygon" => {
                let flat = raw.list("normals")?.ok_or_else(|| Error::config("normals", "polygon needs normals=[...]"))?;
                if flat.len() % 2 != 0 {
                    return Err(Error::config(raw.location("normals"), "normals need an even count of numbers"));
                }
                let normals = flat.chunks(2).map(|c| [c[0], c[1]]).collect();
                let offsets = raw.list("offsets")?.ok_or_else(|| Error::config("offsets", "polygon needs offsets=[...]"))?;
                BodySpec::Polygon { normals, offsets }
            }
            "square" => BodySpec::Square,
            "density-body" => BodySpec::DensityBody {
                expr: raw.get("density").ok_or_else(|| Error::config("density", "density-body needs expr=<id>"))?.to_string(),
            },
            other => return Err(Error::config(raw.location("body"), format!("unknown body '{other}'"))),
        };

        let f = raw.get("f").unwrap_or("one").to_string();
        SphereField::builtin(&f).map_err(|e| Error::config(raw.location("f"), e.to_string()))?;
        if let BodySpec::DensityBody { expr } = &body {
            SphereField::builtin(expr).map_err(|e| Error::config(raw.location("density"), e.to_string()))?;
        }

        let rho = raw.number("rho")?;
        let rho_start = raw.number("rho-start")?.unwrap_or(16.0);
        let rho_stop = raw.number("rho-stop")?.unwrap_or(1024.0);
        if matches!(kind, ExperimentKind::Converge | ExperimentKind::RotateAverage) && !(rho_start > 0.0 && rho_start < rho_stop) {
            return Err(Error::config(
                raw.location("rho-stop"),
                format!("need 0 < rho-start < rho-stop, got {rho_start} and {rho_stop}"),
            ));
        }
        if kind == ExperimentKind::Count {
            match rho {
                Some(r) if r > 0.0 => {}
                Some(r) => return Err(Error::config(raw.location("rho"), format!("rho must be positive, got {r}"))),
                None => return Err(Error::config("rho", "count needs rho=<value>")),
            }
        }
        let per_octave: u32 = raw.parsed("per-octave")?.unwrap_or(8);
        if per_octave == 0 {
            return Err(Error::config(raw.location("per-octave"), "must be at least 1"));
        }
        let jitter: bool = raw.parsed("jitter")?.unwrap_or(true);
        let seed: u64 = raw.parsed("seed")?.unwrap_or(1);
        let rotations: usize = raw.parsed("rotations")?.unwrap_or(16);
        if kind == ExperimentKind::RotateAverage {
            if rotations == 0 {
                return Err(Error::config(raw.location("rotations"), "need at least one rotation"));
            }
            if dim > 3 {
                return Err(Error::config("dim", "rotation ensembles need dim 2 or 3"));
            }
        }
        let angle = raw.number("angle")?;
        if angle.is_some() && dim != 2 {
            return Err(Error::config(raw.location("angle"), "a single angle only defines a planar rotation"));
        }
        let workers: usize = raw.parsed("workers")?.unwrap_or(0);
        let samples: u64 = match raw.number("samples")? {
            None => 1_000_000,
            Some(v) if v >= 1.0 && v.fract() == 0.0 => v as u64,
            Some(v) => return Err(Error::config(raw.location("samples"), format!("need a positive integer, got {v}"))),
        };
        let sigmas = raw.number("sigmas")?.unwrap_or(3.0);
        let r_start = raw.number("r-start")?.unwrap_or(16.0);
        let r_stop = raw.number("r-stop")?.unwrap_or(256.0);
        let r_step = raw.number("r-step")?.unwrap_or(0.05);
        if kind == ExperimentKind::FourierDecay {
            if !(r_start > 0.0 && r_start < r_stop && r_step > 0.0) {
                return Err(Error::config(raw.location("r-stop"), "need 0 < r-start < r-stop and r-step > 0"));
            }
            if dim != 2 {
                return Err(Error::config("dim", "Fourier transforms are planar"));
            }
        }
        let directions = raw.list("directions")?.unwrap_or_else(|| vec![0.0, 1.0]);
        let transform: TransformKind = match raw.get("transform") {
            None => TransformKind::Surface,
            Some(t) => t.parse().map_err(|_| Error::config(raw.location("transform"), format!("unknown transform '{t}'")))?,
        };
        let budget = match raw.number("budget")? {
            None => DEFAULT_BUDGET,
            Some(v) if v >= 1.0 => v as u64,
            Some(v) => return Err(Error::config(raw.location("budget"), format!("budget must be ≥ 1, got {v}"))),
        };
        let fit_window = match (raw.number("fit-start")?, raw.number("fit-stop")?) {
            (None, None) => None,
            (a, b) => Some((a.unwrap_or(rho_start), b.unwrap_or(rho_stop))),
        };
        // Fail early on bodies that cannot be built.
        body.build(dim)?;

        let snapshot = raw.entries.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect();
        Ok(Self {
            kind,
            body,
            dim,
            f,
            rho,
            rho_start,
            rho_stop,
            per_octave,
            jitter,
            seed,
            rotations,
            angle,
            out: raw.get("out").map(PathBuf::from),
            workers,
            samples,
            sigmas,
            r_start,
            r_stop,
            r_step,
            directions,
            transform,
            budget,
            fit_window,
            snapshot,
        })
    }
}
