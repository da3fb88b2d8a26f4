//! Catalog of named self-maps used as test subjects and counterexamples.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::certificate::{CertificateReport, Witness, Worst};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub slope: f64,
    pub intercept: f64,
}

impl AffinePiece {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    fn apply(&self, c: &[f64]) -> Vec<f64> {
        c.iter().map(|v| self.slope * v + self.intercept).collect()
    }
}

/// Built-in map families. Affine pieces act coordinate-wise; the piecewise
/// family selects its piece from the first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapFamily {
    Constant { value: Point },
    Affine { piece: AffinePiece },
    /// `left` below `breakpoint`, `right` at or above it.
    PiecewiseAffine {
        breakpoint: f64,
        left: AffinePiece,
        right: AffinePiece,
    },
    /// Label lookup for discrete spaces: `i -> table[i]`.
    Table { table: Vec<u32> },
}

impl MapFamily {
    fn eval(&self, x: &Point) -> Option<Point> {
        match (self, x) {
            (MapFamily::Constant { value }, _) => Some(value.clone()),
            (MapFamily::Affine { piece }, Point::Coords(c)) => Some(Point::Coords(piece.apply(c))),
            (
                MapFamily::PiecewiseAffine {
                    breakpoint,
                    left,
                    right,
                },
                Point::Coords(c),
            ) => {
                let piece = if c.first()? < breakpoint { left } else { right };
                Some(Point::Coords(piece.apply(c)))
            }
            (MapFamily::Table { table }, Point::Label(l)) => table.get(*l as usize).copied().map(Point::Label),
            _ => None,
        }
    }
}

/// Contractive classes a catalog entry claims to belong to.
///
/// These are declarations; the conditions module confirms or refutes them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub kannan: bool,
    pub banach: bool,
    pub generalized_b: bool,
}

impl Status {
    pub const NEITHER: Status = Status {
        kannan: false,
        banach: false,
        generalized_b: false,
    };

    pub fn is_neither(&self) -> bool {
        !self.kannan && !self.banach && !self.generalized_b
    }

    /// Parse a comma-separated flag list such as `kannan, generalized_b`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut st = Status::NEITHER;
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "kannan" => st.kannan = true,
                "banach" => st.banach = true,
                "generalized_b" | "generalized" => st.generalized_b = true,
                "neither" => {}
                other => return Err(Error::Config(format!("unknown status flag `{other}`"))),
            }
        }
        Ok(st)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut flags = Vec::new();
        if self.kannan {
            flags.push("kannan");
        }
        if self.banach {
            flags.push("banach");
        }
        if self.generalized_b {
            flags.push("generalized_b");
        }
        if flags.is_empty() {
            flags.push("neither");
        }
        write!(f, "{}", flags.join(","))
    }
}

/// A named map `T: X -> X`.
#[derive(Debug, Clone)]
pub struct SelfMap {
    pub name: String,
    pub space: MetricSpace,
    pub family: MapFamily,
    pub expected: Status,
}

impl SelfMap {
    pub fn new(name: impl Into<String>, space: MetricSpace, family: MapFamily, expected: Status) -> Self {
        Self {
            name: name.into(),
            space,
            family,
            expected,
        }
    }

    /// T(x), checking that `x` is in the domain and that its image is too.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.space.ensure_contains(x)?;
        let y = self
            .family
            .eval(x)
            .ok_or_else(|| Error::Domain(format!("{}: cannot evaluate at {x}", self.name)))?;
        if !self.space.contains(&y) {
            return Err(Error::Range(format!("{}: image {y} of {x} escapes the domain", self.name)));
        }
        Ok(y)
    }

    pub fn with_zero(mut self, zero: Point) -> Result<Self> {
        self.space = self.space.with_zero(zero)?;
        Ok(self)
    }
}

pub fn apply_map(map: &SelfMap, x: &Point) -> Result<Point> {
    map.apply(x)
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub map: SelfMap,
    pub known_fixed_point: Option<Point>,
    pub notes: String,
}

/// Ordered collection of catalog entries, looked up by name.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

/// Name of the flagship discontinuous Kannan map.
pub const FLAGSHIP: &str = "piecewise_kannan";

fn scalar_piecewise(breakpoint: f64, left: (f64, f64), right: (f64, f64)) -> MapFamily {
    MapFamily::PiecewiseAffine {
        breakpoint,
        left: AffinePiece::new(left.0, left.1),
        right: AffinePiece::new(right.0, right.1),
    }
}

impl Catalog {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let unit = MetricSpace::unit_interval;
        let kannan = Status {
            kannan: true,
            banach: false,
            generalized_b: true,
        };
        let all = Status {
            kannan: true,
            banach: true,
            generalized_b: true,
        };
        let banach_only = Status {
            banach: true,
            ..Status::NEITHER
        };
        let square = MetricSpace::cube(vec![0.0, 0.0], vec![1.0, 1.0]).expect("unit square");

        let entries = vec![
            CatalogEntry {
                map: SelfMap::new(
                    "constant_0.3",
                    unit(),
                    MapFamily::Constant { value: Point::scalar(0.3) },
                    all,
                ),
                known_fixed_point: Some(Point::scalar(0.3)),
                notes: "x -> 0.3 on [0,1]".into(),
            },
            CatalogEntry {
                map: SelfMap::new(FLAGSHIP, unit(), scalar_piecewise(0.5, (0.25, 0.0), (0.2, 0.0)), kannan),
                known_fixed_point: Some(Point::scalar(0.0)),
                notes: "x/4 below 1/2, x/5 from 1/2 on [0,1]; discontinuous at 1/2".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "piecewise_kannan_2d",
                    square,
                    scalar_piecewise(0.5, (0.25, 0.0), (0.2, 0.0)),
                    kannan,
                ),
                known_fixed_point: Some(Point::Coords(vec![0.0, 0.0])),
                notes: "x/4 when x[0] < 1/2, x/5 otherwise, on the unit square".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "discrete_collapse",
                    MetricSpace::discrete(6).expect("discrete space"),
                    MapFamily::Table { table: vec![0; 6] },
                    all,
                ),
                known_fixed_point: Some(Point::Label(0)),
                notes: "every label to #0 under the discrete metric".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "half_scaling",
                    unit(),
                    MapFamily::Affine { piece: AffinePiece::new(0.5, 0.0) },
                    banach_only,
                ),
                known_fixed_point: Some(Point::scalar(0.0)),
                notes: "x/2 on [0,1]; a contraction that is not Kannan".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "identity",
                    unit(),
                    MapFamily::Affine { piece: AffinePiece::new(1.0, 0.0) },
                    Status::NEITHER,
                ),
                known_fixed_point: None,
                notes: "every point is fixed".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "expanding",
                    unit(),
                    scalar_piecewise(0.5, (2.0, 0.0), (0.0, 1.0)),
                    Status::NEITHER,
                ),
                known_fixed_point: None,
                notes: "min(2x, 1) on [0,1]; fixed points 0 and 1".into(),
            },
            CatalogEntry {
                map: SelfMap::new(
                    "rational_half",
                    MetricSpace::rational_interval(0.0, 1.0).expect("rational interval"),
                    MapFamily::Affine { piece: AffinePiece::new(0.5, 0.0) },
                    banach_only,
                ),
                known_fixed_point: None,
                notes: "x/2 on the rationals of (0,1]; incomplete, the orbit limit 0 is missing".into(),
            },
        ];
        Self { entries }
    }

    /// Add an entry, replacing any existing entry with the same name.
    pub fn insert(&mut self, entry: CatalogEntry) {
        match self.entries.iter_mut().find(|e| e.map.name == entry.map.name) {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.map.name == name)
            .ok_or_else(|| Error::Lookup(name.to_string()))
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.map.name.as_str()).collect()
    }
}

/// Look up a built-in catalog entry.
pub fn catalog_get(name: &str) -> Result<CatalogEntry> {
    Catalog::builtin().get(name).cloned()
}

/// Checks that `map` sends every sampled point into its domain.
pub fn verify_closure(map: &SelfMap, samples: &SampleSet) -> Result<CertificateReport> {
    if samples.points.is_empty() {
        return Err(Error::Argument("empty sample set".into()));
    }
    samples.ensure_within(&map.space)?;
    let mut worst = Worst::EMPTY;
    for (i, x) in samples.points.iter().enumerate() {
        let escaped = match map.apply(x) {
            Ok(_) => 0.0,
            Err(Error::Range(_)) => 1.0,
            Err(e) => return Err(e),
        };
        worst = worst.merge(Worst::at(escaped, i));
    }
    let witness = Witness::Point {
        x: samples.points[worst.index].clone(),
    };
    Ok(CertificateReport::new(
        "closure",
        worst.slack,
        Some(witness),
        samples.points.len(),
        0.0,
    ))
}

/// Residual d(T p, p) of a declared fixed point.
pub fn verify_known_fixed_point(entry: &CatalogEntry, tol: f64) -> Result<Option<CertificateReport>> {
    let Some(p) = &entry.known_fixed_point else {
        return Ok(None);
    };
    let tp = entry.map.apply(p)?;
    let residual = entry.map.space.d(&tp, p);
    Ok(Some(CertificateReport::new(
        "known_fixed_point",
        residual,
        Some(Witness::Point { x: p.clone() }),
        1,
        tol,
    )))
}
