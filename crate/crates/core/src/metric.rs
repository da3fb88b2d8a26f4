//! Points, metric spaces with a designated zero point, and seeded sampling.
//!
//! A [`MetricSpace`] couples a [`Domain`] with a [`Metric`] and a zero point
//! `x0`. The zero induces the norm `|x| = d(x, x0)` used by the perturbation
//! terms of the contractive conditions. Which point plays the zero is a free
//! choice; it defaults to the domain's canonical origin and can be moved with
//! [`MetricSpace::with_zero`].

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{CertificateReport, Witness, Worst};
use crate::error::{Error, Result};

/// A point of a space: real coordinates, or a label in a finite set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Coords(Vec<f64>),
    Label(u32),
}

impl Point {
    pub fn scalar(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Label(_) => None,
        }
    }

    /// The single coordinate of a one-dimensional point.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Coords(c) if c.len() == 1 => Some(c[0]),
            _ => None,
        }
    }

    pub fn label(&self) -> Option<u32> {
        match self {
            Point::Label(l) => Some(*l),
            Point::Coords(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Point::Coords(c) => c.iter().all(|v| v.is_finite()),
            Point::Label(_) => true,
        }
    }

    /// Bit-exact identity key, used to detect revisited iterates.
    pub(crate) fn bits(&self) -> Vec<u64> {
        match self {
            Point::Coords(c) => c.iter().map(|v| v.to_bits()).collect(),
            Point::Label(l) => vec![u64::MAX, *l as u64],
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Coords(c) if c.len() == 1 => write!(f, "{}", c[0]),
            Point::Coords(c) => {
                write!(f, "(")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Point::Label(l) => write!(f, "#{l}"),
        }
    }
}

/// Point domain of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Closed interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Closed axis-aligned box in R^d.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Labels `0..size` under the discrete metric.
    Discrete { size: u32 },
    /// Rationals in the half-open interval `(lo, hi]`. Not complete.
    RationalInterval { lo: f64, hi: f64 },
}

impl Domain {
    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (Domain::Interval { lo, hi }, Point::Coords(c)) => {
                c.len() == 1 && c[0].is_finite() && *lo <= c[0] && c[0] <= *hi
            }
            (Domain::Box { lo, hi }, Point::Coords(c)) => {
                c.len() == lo.len()
                    && c.iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(v, (l, h))| v.is_finite() && l <= v && v <= h)
            }
            (Domain::Discrete { size }, Point::Label(l)) => l < size,
            (Domain::RationalInterval { lo, hi }, Point::Coords(c)) => {
                // every finite double is a dyadic rational
                c.len() == 1 && c[0].is_finite() && *lo < c[0] && c[0] <= *hi
            }
            _ => false,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Interval { lo, hi } | Domain::RationalInterval { lo, hi } => {
                lo.is_finite() && hi.is_finite() && lo < hi
            }
            Domain::Box { lo, hi } => {
                !lo.is_empty()
                    && lo.len() == hi.len()
                    && lo
                        .iter()
                        .zip(hi)
                        .all(|(l, h)| l.is_finite() && h.is_finite() && l < h)
            }
            Domain::Discrete { size } => *size > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("degenerate domain {self:?}")))
        }
    }

    /// Projection of the origin onto the domain, or the upper end when the
    /// projection falls on an open end.
    fn canonical_origin(&self) -> Point {
        match self {
            Domain::Interval { lo, hi } => Point::scalar(0f64.clamp(*lo, *hi)),
            Domain::Box { lo, hi } => Point::Coords(
                lo.iter().zip(hi).map(|(l, h)| 0f64.clamp(*l, *h)).collect(),
            ),
            Domain::Discrete { .. } => Point::Label(0),
            Domain::RationalInterval { lo, hi } => {
                let p = Point::scalar(0f64.clamp(*lo, *hi));
                if self.contains(&p) {
                    p
                } else {
                    Point::scalar(*hi)
                }
            }
        }
    }

    /// Deterministic extreme points included in every generated sample set,
    /// lower end first.
    fn anchors(&self) -> Vec<Point> {
        match self {
            Domain::Interval { lo, hi } => vec![
                Point::scalar(*lo),
                Point::scalar(*hi),
                Point::scalar(lo + 0.5 * (hi - lo)),
            ],
            Domain::Box { lo, hi } => {
                let d = lo.len();
                let mut out = Vec::new();
                if d <= 3 {
                    for mask in 0..(1usize << d) {
                        out.push(Point::Coords(
                            (0..d)
                                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                                .collect(),
                        ));
                    }
                } else {
                    out.push(Point::Coords(lo.clone()));
                    out.push(Point::Coords(hi.clone()));
                }
                out.push(Point::Coords(
                    lo.iter().zip(hi).map(|(l, h)| l + 0.5 * (h - l)).collect(),
                ));
                out
            }
            Domain::Discrete { size } => (0..(*size).min(8)).map(Point::Label).collect(),
            Domain::RationalInterval { lo, hi } => vec![
                Point::scalar(lo + (hi - lo) / 1000.0),
                Point::scalar(*hi),
                Point::scalar(lo + 0.5 * (hi - lo)),
            ],
        }
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        match self {
            Domain::Interval { lo, hi } => Point::scalar(uniform(rng, *lo, *hi)),
            Domain::Box { lo, hi } => {
                Point::Coords(lo.iter().zip(hi).map(|(l, h)| uniform(rng, *l, *h)).collect())
            }
            Domain::Discrete { size } => Point::Label(rng.random_range(0..*size)),
            Domain::RationalInterval { lo, hi } => {
                let q: u32 = rng.random_range(1..=1000);
                let p: u32 = rng.random_range(1..=q);
                Point::scalar(lo + (hi - lo) * (p as f64 / q as f64))
            }
        }
    }

    /// A point close to `x`, at a log-uniform relative offset in [1e-5, 1e-1].
    fn nearby_point(&self, x: &Point, rng: &mut ChaCha8Rng) -> Point {
        let mut offset = |width: f64| {
            let scale = 10f64.powf(-rng.random_range(1.0..5.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * scale * width
        };
        match (self, x) {
            (Domain::Interval { lo, hi }, Point::Coords(c)) => {
                Point::scalar((c[0] + offset(hi - lo)).clamp(*lo, *hi))
            }
            (Domain::Box { lo, hi }, Point::Coords(c)) => Point::Coords(
                c.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| (v + offset(h - l)).clamp(*l, *h))
                    .collect(),
            ),
            (Domain::RationalInterval { lo, hi }, Point::Coords(c)) => {
                let q: u32 = rng.random_range(1000..=1_000_000);
                let t = (c[0] - lo) / (hi - lo);
                let base = (t * q as f64).round() as i64;
                let step = if rng.random_bool(0.5) { 1 } else { -1 };
                let p = (base + step).clamp(1, q as i64);
                Point::scalar(lo + (hi - lo) * (p as f64 / q as f64))
            }
            _ => self.random_point(rng),
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    (lo + u * (hi - lo)).clamp(lo, hi)
}

type DistanceFn = dyn Fn(&Point, &Point) -> f64 + Send + Sync;

/// Distance function of a space.
#[derive(Clone)]
pub enum Metric {
    /// Euclidean distance on coordinates (absolute value in one dimension).
    Euclidean,
    /// 0 on equal points, 1 otherwise.
    Discrete,
    /// Arbitrary function. Used to feed deliberately broken metrics to the
    /// axiom checker.
    Custom { name: String, f: Arc<DistanceFn> },
}

impl Metric {
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Metric::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Discrete => "discrete",
            Metric::Custom { name, .. } => name,
        }
    }

    fn eval(&self, x: &Point, y: &Point) -> f64 {
        match self {
            Metric::Euclidean => match (x, y) {
                (Point::Coords(a), Point::Coords(b)) if a.len() == 1 && b.len() == 1 => {
                    (a[0] - b[0]).abs()
                }
                (Point::Coords(a), Point::Coords(b)) => a
                    .iter()
                    .zip(b)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt(),
                _ => f64::NAN,
            },
            Metric::Discrete => {
                if x == y {
                    0.0
                } else {
                    1.0
                }
            }
            Metric::Custom { f, .. } => f(x, y),
        }
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Metric({})", self.name())
    }
}

/// A domain, a distance on it, and a designated zero point.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    domain: Domain,
    metric: Metric,
    zero: Point,
    complete: bool,
}

impl MetricSpace {
    pub fn new(domain: Domain, metric: Metric) -> Result<Self> {
        domain.validate()?;
        let complete = !matches!(domain, Domain::RationalInterval { .. });
        let zero = domain.canonical_origin();
        Ok(Self {
            domain,
            metric,
            zero,
            complete,
        })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Domain::Interval { lo, hi }, Metric::Euclidean)
    }

    pub fn unit_interval() -> Self {
        Self::interval(0.0, 1.0).expect("unit interval")
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(Domain::Box { lo, hi }, Metric::Euclidean)
    }

    pub fn discrete(size: u32) -> Result<Self> {
        Self::new(Domain::Discrete { size }, Metric::Discrete)
    }

    /// Rationals of `(lo, hi]`, flagged incomplete.
    pub fn rational_interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Domain::RationalInterval { lo, hi }, Metric::Euclidean)
    }

    /// Move the zero point. The new zero must lie in the domain.
    pub fn with_zero(mut self, zero: Point) -> Result<Self> {
        if !self.domain.contains(&zero) {
            return Err(Error::Domain(format!("zero point {zero} outside domain")));
        }
        self.zero = zero;
        Ok(self)
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn zero(&self) -> &Point {
        &self.zero
    }

    /// Declared completeness; never proved.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.domain.contains(p)
    }

    pub fn ensure_contains(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {p} outside {:?}", self.domain)))
        }
    }

    /// d(x, y) without the membership check.
    pub(crate) fn d(&self, x: &Point, y: &Point) -> f64 {
        self.metric.eval(x, y)
    }

    /// |x| = d(x, x0) without the membership check.
    pub(crate) fn n(&self, x: &Point) -> f64 {
        self.metric.eval(x, &self.zero)
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.ensure_contains(x)?;
        self.ensure_contains(y)?;
        Ok(self.d(x, y))
    }

    pub fn norm(&self, x: &Point) -> Result<f64> {
        self.distance(x, &self.zero)
    }

    /// `n` seeded random points of the domain.
    pub fn random_points(&self, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.domain.random_point(&mut rng)).collect()
    }
}

pub fn distance(space: &MetricSpace, x: &Point, y: &Point) -> Result<f64> {
    space.distance(x, y)
}

pub fn norm(space: &MetricSpace, x: &Point) -> Result<f64> {
    space.norm(x)
}

/// Sizes of a generated [`SampleSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub points: usize,
    pub pairs: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            points: crate::tolerances::DEFAULT_POINTS,
            pairs: crate::tolerances::DEFAULT_PAIRS,
        }
    }
}

/// Points and pairs at which inequalities are checked.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub pairs: Vec<(Point, Point)>,
    pub seed: u64,
}

impl SampleSet {
    /// Seeded sample of `space`.
    ///
    /// Points are the domain anchors (ends, corners, midpoint, zero point)
    /// followed by `plan.points` uniform draws. Pairs are all
    /// lower-triangular anchor pairs `(a_i, a_j)`, `j < i`, followed by
    /// `plan.pairs` random pairs, alternating between independent draws and
    /// a point with a close neighbour.
    pub fn generate(space: &MetricSpace, plan: SamplePlan, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = space.domain();

        let mut anchors: Vec<Point> = Vec::new();
        for p in domain.anchors().into_iter().chain([space.zero().clone()]) {
            if domain.contains(&p) && !anchors.contains(&p) {
                anchors.push(p);
            }
        }

        let mut pairs = Vec::with_capacity(anchors.len() * anchors.len() / 2 + plan.pairs);
        for i in 0..anchors.len() {
            for j in 0..i {
                pairs.push((anchors[i].clone(), anchors[j].clone()));
            }
        }

        let mut points = anchors;
        for _ in 0..plan.points {
            points.push(domain.random_point(&mut rng));
        }
        for k in 0..plan.pairs {
            let x = domain.random_point(&mut rng);
            let y = if k % 2 == 0 {
                domain.random_point(&mut rng)
            } else {
                domain.nearby_point(&x, &mut rng)
            };
            pairs.push((x, y));
        }
        Self { points, pairs, seed }
    }

    /// Explicit pairs; points are the distinct pair members in order of
    /// first appearance.
    pub fn from_pairs(pairs: Vec<(Point, Point)>) -> Self {
        let mut points: Vec<Point> = Vec::new();
        for (x, y) in &pairs {
            for p in [x, y] {
                if !points.contains(p) {
                    points.push(p.clone());
                }
            }
        }
        Self {
            points,
            pairs,
            seed: 0,
        }
    }

    /// Explicit points; pairs are all lower-triangular pairs `(p_i, p_j)`, `j < i`.
    pub fn from_points(points: Vec<Point>) -> Self {
        let mut pairs = Vec::new();
        for i in 0..points.len() {
            for j in 0..i {
                pairs.push((points[i].clone(), points[j].clone()));
            }
        }
        Self {
            points,
            pairs,
            seed: 0,
        }
    }

    pub fn ensure_within(&self, space: &MetricSpace) -> Result<()> {
        for p in self.points.iter().chain(self.pairs.iter().flat_map(|(x, y)| [x, y])) {
            space.ensure_contains(p)?;
        }
        Ok(())
    }
}

/// Sampled check of the metric axioms.
///
/// Identity and non-negativity are checked on every point, symmetry on every
/// pair, and the triangle inequality on every ordered triple of the first
/// few points plus a cyclic triple starting at each point.
pub fn verify_metric_axioms(
    space: &MetricSpace,
    samples: &SampleSet,
    tol: f64,
) -> Result<CertificateReport> {
    if samples.points.is_empty() {
        return Err(Error::Argument("empty sample set".into()));
    }
    samples.ensure_within(space)?;

    enum Site {
        Point(usize),
        Pair(usize),
        Triple(usize, usize, usize),
    }

    let pts = &samples.points;
    let mut sites = Vec::new();
    let mut worst = Worst::EMPTY;
    let mut push = |slack: f64, site: Site, worst: &mut Worst| {
        *worst = worst.merge(Worst::at(slack, sites.len()));
        sites.push(site);
    };

    for (i, x) in pts.iter().enumerate() {
        let dxx = space.d(x, x);
        push(dxx.abs(), Site::Point(i), &mut worst);
    }
    for (k, (x, y)) in samples.pairs.iter().enumerate() {
        let dxy = space.d(x, y);
        let dyx = space.d(y, x);
        push((dxy - dyx).abs().max(-dxy), Site::Pair(k), &mut worst);
    }

    let m = pts.len().min(16);
    let mut triples: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                triples.push((a, b, c));
            }
        }
    }
    let n = pts.len();
    if n > m {
        triples.extend((0..n).map(|i| (i, (i + 1) % n, (i + 2) % n)));
    }
    let mut seen = HashSet::new();
    for (a, b, c) in triples {
        if !seen.insert((a, b, c)) {
            continue;
        }
        let (x, y, z) = (&pts[a], &pts[b], &pts[c]);
        let slack = space.d(x, z) - space.d(x, y) - space.d(y, z);
        push(slack, Site::Triple(a, b, c), &mut worst);
    }

    let witness = if worst.is_empty() {
        None
    } else {
        Some(match sites[worst.index] {
            Site::Point(i) => Witness::Point { x: pts[i].clone() },
            Site::Pair(k) => Witness::Pair {
                x: samples.pairs[k].0.clone(),
                y: samples.pairs[k].1.clone(),
                eps: None,
            },
            Site::Triple(a, b, c) => Witness::Triple {
                x: pts[a].clone(),
                y: pts[b].clone(),
                z: pts[c].clone(),
            },
        })
    };
    Ok(CertificateReport::new(
        "metric_axioms",
        worst.slack,
        witness,
        sites.len(),
        tol,
    ))
}
