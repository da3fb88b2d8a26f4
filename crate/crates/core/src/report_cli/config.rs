//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! map = piecewise_kannan
//! conditions = kannan, generalized
//! lambda = fit
//! seed = 7
//! include = extra_maps.conf
//!
//! map.tilted.family = affine
//! map.tilted.space = interval:0:1
//! map.tilted.slope = 0.3
//! map.tilted.intercept = 0.1
//! map.tilted.status = kannan, banach, generalized_b
//! ```
//!
//! `include` paths are resolved relative to the including file. Later keys
//! override earlier ones. Command-line flags override the file, and the
//! `FIXPOINT_LAB_SEED` environment variable is consulted only when neither
//! sets a seed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::conditions::{EpsilonGrid, PataParams, PsiFunction};
use crate::error::{Error, Result};
use crate::maps::{AffinePiece, Catalog, CatalogEntry, MapFamily, SelfMap, Status};
use crate::metric::{MetricSpace, Point, SamplePlan};
use crate::tolerances as tol;

pub const SEED_ENV: &str = "FIXPOINT_LAB_SEED";

const MAX_INCLUDE_DEPTH: usize = 8;

/// Values given on the command line, taking precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct CliOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Metric,
    Closure,
    Fit,
    Kannan,
    Pata,
    Generalized,
    Bernoulli,
}

impl Condition {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "metric" => Condition::Metric,
            "closure" => Condition::Closure,
            "fit" => Condition::Fit,
            "kannan" => Condition::Kannan,
            "pata" => Condition::Pata,
            "generalized" => Condition::Generalized,
            "bernoulli" => Condition::Bernoulli,
            other => return Err(Error::Config(format!("unknown condition `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Condition::Metric => "metric",
            Condition::Closure => "closure",
            Condition::Fit => "fit",
            Condition::Kannan => "kannan",
            Condition::Pata => "pata",
            Condition::Generalized => "generalized",
            Condition::Bernoulli => "bernoulli",
        }
    }
}

/// Where the Kannan constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Fit,
    Value(f64),
}

/// Where the Pata-type parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamsSpec {
    /// Power embedding of the Kannan constant.
    Embedded,
    /// Threshold embedding of the Kannan constant.
    Threshold,
    Explicit(PataParams),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub catalog: Catalog,
    pub map: Option<String>,
    pub conditions: Vec<Condition>,
    pub lambda: LambdaSpec,
    /// `None` lets each command pick its default.
    pub params: Option<ParamsSpec>,
    pub grid: usize,
    pub plan: SamplePlan,
    pub seed: u64,
    pub tol_cert: f64,
    pub tol_metric: f64,
    pub tol_fix: f64,
    pub max_steps: usize,
    pub starts: usize,
    pub horizon: usize,
    pub start: Option<String>,
    pub zero: Option<String>,
    /// Suite selection: map names, or `status:<flag>` selectors.
    pub select: Vec<String>,
    pub out: Option<PathBuf>,
    pub trajectory_out: Option<PathBuf>,
    raw: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            catalog: Catalog::builtin(),
            map: None,
            conditions: Vec::new(),
            lambda: LambdaSpec::Fit,
            params: None,
            grid: tol::DEFAULT_GRID,
            plan: SamplePlan::default(),
            seed: tol::DEFAULT_SEED,
            tol_cert: tol::TOL_CERT,
            tol_metric: tol::TOL_METRIC,
            tol_fix: tol::TOL_FIX,
            max_steps: tol::MAX_STEPS,
            starts: tol::DEFAULT_STARTS,
            horizon: tol::DEFAULT_HORIZON,
            start: None,
            zero: None,
            select: Vec::new(),
            out: None,
            trajectory_out: None,
            raw: BTreeMap::new(),
        }
    }
}

fn read_pairs(path: &Path, depth: usize, out: &mut Vec<(String, String)>) -> Result<()> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(Error::Config(format!("include nesting too deep at {}", path.display())));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected `key = value`", path.display(), lineno + 1))
        })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k == "include" {
            read_pairs(&base.join(&v), depth + 1, out)?;
        } else {
            out.push((k, v));
        }
    }
    Ok(())
}

/// Parse `key = value` text (no includes).
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        if k.trim() == "include" {
            return Err(Error::Config("include needs a file-based config".into()));
        }
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// `power:<gamma>` or `tabulated:<eps>:<value>;<eps>:<value>;...`.
pub fn parse_psi(v: &str) -> Result<PsiFunction> {
    let (kind, rest) = v
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("psi `{v}`: expected power:<g> or tabulated:...")))?;
    match kind.trim() {
        "power" => Ok(PsiFunction::power(num("psi", rest.trim())?)?),
        "tabulated" => {
            let knots = rest
                .split(';')
                .map(|kv| {
                    let (e, val) = kv
                        .split_once(':')
                        .ok_or_else(|| Error::Config(format!("psi knot `{kv}`: expected eps:value")))?;
                    Ok((num("psi", e.trim())?, num("psi", val.trim())?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PsiFunction::tabulated(knots)?)
        }
        other => Err(Error::Config(format!("unknown psi family `{other}`"))),
    }
}

/// `interval:<lo>:<hi>`, `box:<lo>:<hi>,<lo>:<hi>,...`, `discrete:<n>`, or
/// `rational:<lo>:<hi>`.
pub fn parse_space(v: &str) -> Result<MetricSpace> {
    let (kind, rest) = v.split_once(':').unwrap_or((v, ""));
    let range = |s: &str| -> Result<(f64, f64)> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("space `{v}`: expected lo:hi")))?;
        Ok((num("space", a.trim())?, num("space", b.trim())?))
    };
    let space = match kind.trim() {
        "interval" => {
            let (lo, hi) = range(rest)?;
            MetricSpace::interval(lo, hi)
        }
        "rational" => {
            let (lo, hi) = range(rest)?;
            MetricSpace::rational_interval(lo, hi)
        }
        "box" => {
            let (lo, hi): (Vec<f64>, Vec<f64>) = rest
                .split(',')
                .map(|r| range(r.trim()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            MetricSpace::cube(lo, hi)
        }
        "discrete" => MetricSpace::discrete(num("space", rest.trim())?),
        other => return Err(Error::Config(format!("unknown space kind `{other}`"))),
    };
    space.map_err(|e| Error::Config(format!("space `{v}`: {e}")))
}

/// A point of `space`: a label (`3` or `#3`) for discrete spaces, otherwise
/// comma-separated coordinates.
pub fn parse_point(space: &MetricSpace, v: &str) -> Result<Point> {
    let p = match space.domain() {
        crate::metric::Domain::Discrete { .. } => {
            Point::Label(num("point", v.trim().trim_start_matches('#'))?)
        }
        _ => Point::Coords(
            v.split(',')
                .map(|c| num("point", c.trim()))
                .collect::<Result<Vec<f64>>>()?,
        ),
    };
    space
        .ensure_contains(&p)
        .map_err(|e| Error::Config(format!("point `{v}`: {e}")))?;
    Ok(p)
}

fn parse_piece(key: &str, v: &str) -> Result<AffinePiece> {
    let (a, b) = v
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("`{key}`: expected slope:intercept")))?;
    Ok(AffinePiece::new(num(key, a.trim())?, num(key, b.trim())?))
}

fn build_entry(name: &str, fields: &BTreeMap<String, String>) -> Result<CatalogEntry> {
    let get = |k: &str| fields.get(k).map(String::as_str);
    let key = |k: &str| format!("map.{name}.{k}");
    let mut space = parse_space(get("space").unwrap_or("interval:0:1"))?;
    if let Some(z) = get("zero") {
        let p = parse_point(&space, z)?;
        space = space.with_zero(p)?;
    }
    let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing `{}`", key(k))));
    let family = match need("family")? {
        "constant" => MapFamily::Constant {
            value: parse_point(&space, need("value")?)?,
        },
        "affine" => MapFamily::Affine {
            piece: AffinePiece::new(
                num(&key("slope"), need("slope")?)?,
                num(&key("intercept"), get("intercept").unwrap_or("0"))?,
            ),
        },
        "piecewise_affine" => MapFamily::PiecewiseAffine {
            breakpoint: num(&key("breakpoint"), need("breakpoint")?)?,
            left: parse_piece(&key("left"), need("left")?)?,
            right: parse_piece(&key("right"), need("right")?)?,
        },
        "table" => MapFamily::Table {
            table: list(need("table")?)
                .iter()
                .map(|t| num(&key("table"), t))
                .collect::<Result<Vec<u32>>>()?,
        },
        other => return Err(Error::Config(format!("`{}`: unknown family `{other}`", key("family")))),
    };
    for k in fields.keys() {
        if !matches!(
            k.as_str(),
            "family" | "space" | "zero" | "value" | "slope" | "intercept" | "breakpoint" | "left"
                | "right" | "table" | "status" | "fixed_point" | "notes"
        ) {
            return Err(Error::Config(format!("unknown key `{}`", key(k))));
        }
    }
    let expected = Status::parse(get("status").unwrap_or("neither"))?;
    let known_fixed_point = get("fixed_point").map(|v| parse_point(&space, v)).transpose()?;
    Ok(CatalogEntry {
        map: SelfMap::new(name, space, family, expected),
        known_fixed_point,
        notes: get("notes").unwrap_or("").to_string(),
    })
}

impl RunConfig {
    /// Build from a config file (if any), command-line overrides, and the
    /// value of the seed environment variable.
    pub fn load(path: Option<&Path>, overrides: &CliOverrides, env_seed: Option<&str>) -> Result<Self> {
        let mut pairs = Vec::new();
        if let Some(p) = path {
            read_pairs(p, 0, &mut pairs)?;
        }
        Self::from_pairs(pairs, overrides, env_seed)
    }

    pub fn from_pairs(
        pairs: Vec<(String, String)>,
        overrides: &CliOverrides,
        env_seed: Option<&str>,
    ) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut raw = BTreeMap::new();
        for (k, v) in pairs {
            raw.insert(k, v);
        }

        let mut extensions: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut pata_fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut seed_from_file = None;
        for (k, v) in &raw {
            if let Some(rest) = k.strip_prefix("map.") {
                let (name, field) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| Error::Config(format!("malformed key `{k}`")))?;
                extensions
                    .entry(name.to_string())
                    .or_default()
                    .insert(field.to_string(), v.clone());
                continue;
            }
            match k.as_str() {
                "map" => cfg.map = Some(v.clone()),
                "conditions" => {
                    cfg.conditions = list(v).iter().map(|c| Condition::parse(c)).collect::<Result<_>>()?
                }
                "lambda" => {
                    cfg.lambda = if v == "fit" {
                        LambdaSpec::Fit
                    } else {
                        LambdaSpec::Value(num(k, v)?)
                    }
                }
                "params" => {
                    cfg.params = Some(match v.as_str() {
                        "embedded" => ParamsSpec::Embedded,
                        "threshold" => ParamsSpec::Threshold,
                        "explicit" => ParamsSpec::Embedded, // replaced below once pata.* is read
                        other => return Err(Error::Config(format!("unknown params source `{other}`"))),
                    })
                }
                "pata.Lambda" | "pata.alpha" | "pata.beta" | "pata.psi" => {
                    pata_fields.insert(k.as_str(), v.as_str());
                }
                "grid" => cfg.grid = num(k, v)?,
                "samples" => cfg.plan.pairs = num(k, v)?,
                "points" => cfg.plan.points = num(k, v)?,
                "seed" => seed_from_file = Some(num::<u64>(k, v)?),
                "tol_cert" => cfg.tol_cert = num(k, v)?,
                "tol_metric" => cfg.tol_metric = num(k, v)?,
                "tol_fix" => cfg.tol_fix = num(k, v)?,
                "max_steps" => cfg.max_steps = num(k, v)?,
                "starts" => cfg.starts = num(k, v)?,
                "horizon" => cfg.horizon = num(k, v)?,
                "start" => cfg.start = Some(v.clone()),
                "zero" => cfg.zero = Some(v.clone()),
                "catalog" => cfg.select = list(v),
                "out" => cfg.out = Some(PathBuf::from(v)),
                "trajectory_out" => cfg.trajectory_out = Some(PathBuf::from(v)),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }

        let explicit_requested = raw.get("params").map(String::as_str) == Some("explicit");
        if !pata_fields.is_empty() || explicit_requested {
            let field = |k: &str| {
                pata_fields
                    .get(k)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("missing `{k}`")))
            };
            let params = PataParams::new(
                num("pata.Lambda", field("pata.Lambda")?)?,
                num("pata.alpha", field("pata.alpha")?)?,
                num("pata.beta", field("pata.beta")?)?,
                parse_psi(field("pata.psi")?)?,
            )
            .map_err(|e| Error::Config(e.to_string()))?;
            match &cfg.params {
                Some(ParamsSpec::Embedded) if !explicit_requested && raw.contains_key("params") => {
                    return Err(Error::Config("pata.* given but params is not explicit".into()))
                }
                Some(ParamsSpec::Threshold) => {
                    return Err(Error::Config("pata.* given but params is not explicit".into()))
                }
                _ => cfg.params = Some(ParamsSpec::Explicit(params)),
            }
        }

        for (name, fields) in &extensions {
            cfg.catalog
                .insert(build_entry(name, fields).map_err(|e| match e {
                    Error::Config(m) => Error::Config(m),
                    other => Error::Config(format!("map.{name}: {other}")),
                })?);
        }

        cfg.seed = match (overrides.seed, seed_from_file, env_seed) {
            (Some(s), _, _) | (None, Some(s), _) => s,
            (None, None, Some(e)) => num(SEED_ENV, e.trim())?,
            (None, None, None) => tol::DEFAULT_SEED,
        };
        if let Some(g) = overrides.grid {
            cfg.grid = g;
        }
        if let Some(s) = overrides.samples {
            cfg.plan.pairs = s;
        }
        if let Some(t) = overrides.tol {
            cfg.tol_cert = t;
        }
        if let Some(o) = &overrides.out {
            cfg.out = Some(o.clone());
        }
        cfg.raw = raw;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        EpsilonGrid::uniform(self.grid).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(name) = &self.map {
            self.catalog.get(name).map_err(|e| Error::Config(e.to_string()))?;
        }
        for sel in &self.select {
            match sel.strip_prefix("status:") {
                Some(flag) => {
                    Status::parse(flag)?;
                }
                None => {
                    self.catalog.get(sel).map_err(|e| Error::Config(e.to_string()))?;
                }
            }
        }
        for (k, v) in [("tol_cert", self.tol_cert), ("tol_metric", self.tol_metric), ("tol_fix", self.tol_fix)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("`{k}` must be a nonnegative number")));
            }
        }
        if self.tol_fix == 0.0 {
            return Err(Error::Config("`tol_fix` must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("`max_steps` must be at least 1".into()));
        }
        if let LambdaSpec::Value(l) = self.lambda {
            if !(0.0..1.0).contains(&l) {
                return Err(Error::Config(format!("`lambda` {l} not in [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn epsilon_grid(&self) -> EpsilonGrid {
        EpsilonGrid::uniform(self.grid).expect("validated grid")
    }

    /// The selected catalog entry, with the zero override applied.
    pub fn entry(&self) -> Result<CatalogEntry> {
        let name = self
            .map
            .as_deref()
            .ok_or_else(|| Error::Config("no `map` selected".into()))?;
        let mut entry = self.catalog.get(name).map_err(|e| Error::Config(e.to_string()))?.clone();
        if let Some(z) = &self.zero {
            let p = parse_point(&entry.map.space, z)?;
            entry.map = entry.map.with_zero(p)?;
        }
        Ok(entry)
    }

    /// Entries chosen by the suite selection (the whole catalog when empty),
    /// in catalog order.
    pub fn selected_entries(&self) -> Result<Vec<CatalogEntry>> {
        if self.select.is_empty() {
            return Ok(self.catalog.entries().to_vec());
        }
        let mut out = Vec::new();
        for e in self.catalog.entries() {
            let hit = self.select.iter().any(|sel| match sel.strip_prefix("status:") {
                Some("neither") => e.map.expected.is_neither(),
                Some("kannan") => e.map.expected.kannan,
                Some("banach") => e.map.expected.banach,
                Some("generalized_b") | Some("generalized") => e.map.expected.generalized_b,
                Some(_) => false,
                None => sel == &e.map.name,
            });
            if hit {
                out.push(e.clone());
            }
        }
        Ok(out)
    }

    /// Resolved settings for the report header. Output paths are left out so
    /// that identical runs written to different files stay byte-identical.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> = self
            .raw
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "out" | "trajectory_out"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        m.insert("seed".into(), self.seed.to_string());
        m.insert("grid".into(), self.grid.to_string());
        m.insert("samples".into(), self.plan.pairs.to_string());
        m.insert("points".into(), self.plan.points.to_string());
        m.insert("tol_cert".into(), format!("{:e}", self.tol_cert));
        m.insert("tol_metric".into(), format!("{:e}", self.tol_metric));
        m.insert("tol_fix".into(), format!("{:e}", self.tol_fix));
        m.insert("max_steps".into(), self.max_steps.to_string());
        m.insert("starts".into(), self.starts.to_string());
        m.insert("horizon".into(), self.horizon.to_string());
        m
    }
}
