//! The catalog battery behind `suite` and the acceptance criteria.

use serde::Serialize;

use crate::certificate::{CertificateReport, Witness};
use crate::conditions::{
    bernoulli_check, check_generalized, check_kannan, embed_kannan_threshold, embed_kannan_to_pata,
    fit_contraction_ratio, fit_lambda, EpsilonGrid, KannanParams, PataParams,
};
use crate::error::Result;
use crate::maps::{catalog_get, verify_closure, verify_known_fixed_point, CatalogEntry, SelfMap, FLAGSHIP};
use crate::metric::{verify_metric_axioms, Point, SamplePlan, SampleSet};
use crate::solver::{
    check_norm_bound, check_p_step_bound, check_step_bound, check_step_monotonicity, orbit,
    uniqueness_probe, BoundParams, SolveResult, StopReason,
};
use crate::tolerances as tol;

use super::config::RunConfig;

/// Kannan constant used to probe maps that have no fitted constant below 1.
pub const KANNAN_PROBE_LAMBDA: f64 = 0.999;

/// Stand-in constant for maps whose fitted Kannan constant is 0, where the
/// power embedding is undefined.
pub const ZERO_LAMBDA_STAND_IN: f64 = 0.5;

pub const P_STEP_NS: [usize; 4] = [2, 5, 10, 20];
pub const P_STEP_PS: [usize; 4] = [1, 2, 5, 10];

const START_SEED_SALT: u64 = 0x5eed_0001;

#[derive(Debug, Clone)]
pub struct BatteryOptions {
    pub seed: u64,
    pub plan: SamplePlan,
    pub grid: EpsilonGrid,
    pub tol_cert: f64,
    pub tol_metric: f64,
    pub tol_fix: f64,
    pub max_steps: usize,
    pub starts: usize,
    pub horizon: usize,
}

impl BatteryOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            seed: cfg.seed,
            plan: cfg.plan,
            grid: cfg.epsilon_grid(),
            tol_cert: cfg.tol_cert,
            tol_metric: cfg.tol_metric,
            tol_fix: cfg.tol_fix,
            max_steps: cfg.max_steps,
            starts: cfg.starts,
            horizon: cfg.horizon,
        }
    }
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self::from_config(&RunConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
    /// Informational; any outcome matches.
    Any,
}

impl Expect {
    fn from_flag(flag: bool) -> Self {
        if flag {
            Expect::Pass
        } else {
            Expect::Fail
        }
    }

    pub fn matches(&self, r: &CertificateReport) -> bool {
        match self {
            Expect::Pass => r.pass,
            Expect::Fail => !r.pass && !r.inconclusive,
            Expect::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub subject: String,
    pub expect: Expect,
    pub matched: bool,
    #[serde(flatten)]
    pub report: CertificateReport,
}

impl CheckRecord {
    pub fn new(subject: impl Into<String>, expect: Expect, report: CertificateReport) -> Self {
        Self {
            subject: subject.into(),
            matched: expect.matches(&report),
            expect,
            report,
        }
    }
}

/// Fitted constants of one map against its declared status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub subject: String,
    pub declared: String,
    /// Smallest Kannan constant on the sample, when below 1.
    pub lambda_star: Option<f64>,
    pub kannan_sup_ratio: f64,
    pub kannan_witness: Option<Witness>,
    /// Sup of `d(Tx,Ty) / d(x,y)` on the sample.
    pub contraction_ratio: f64,
    pub contraction_witness: Option<Witness>,
    /// Passed the generalized condition under the threshold embedding.
    pub certified: bool,
    pub kannan_matched: bool,
    pub banach_matched: bool,
    pub generalized_matched: bool,
}

impl FitRecord {
    pub fn matched(&self) -> bool {
        self.kannan_matched && self.banach_matched && self.generalized_matched
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub subject: String,
    pub start: Point,
    pub fixed_point: Point,
    pub residual: f64,
    pub steps: usize,
    pub stop_reason: StopReason,
}

impl SolveSummary {
    pub fn new(subject: &str, start: &Point, run: &SolveResult) -> Self {
        Self {
            subject: subject.to_string(),
            start: start.clone(),
            fixed_point: run.fixed_point.clone(),
            residual: run.residual,
            steps: run.steps,
            stop_reason: run.trajectory.stop_reason,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    /// Cases examined; 0 means the criterion did not apply to the selection.
    pub cases: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BatteryOutcome {
    pub checks: Vec<CheckRecord>,
    pub fits: Vec<FitRecord>,
    pub solves: Vec<SolveSummary>,
    pub criteria: Vec<CriterionResult>,
}

impl BatteryOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.matched)
            && self.fits.iter().all(FitRecord::matched)
            && self.criteria.iter().all(|c| c.pass)
    }
}

/// Running state of one criterion.
#[derive(Debug)]
struct Tally {
    pass: bool,
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            pass: true,
            cases: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.pass = false;
            if self.failures.len() < 5 {
                self.failures.push(what());
            }
        }
    }

    fn finish(self, id: u32, name: &str, unit: &str) -> CriterionResult {
        let detail = if self.cases == 0 {
            format!("no {unit} in selection")
        } else if self.pass {
            format!("{} {unit} checked", self.cases)
        } else {
            format!("{} {unit} checked; failed: {}", self.cases, self.failures.join("; "))
        };
        CriterionResult {
            id,
            name: name.to_string(),
            pass: self.pass,
            cases: self.cases,
            detail,
        }
    }
}

struct Criteria {
    unique_limit: Tally,
    monotone: Tally,
    norm_bound: Tally,
    step_bound: Tally,
    p_step: Tally,
    embedding: Tally,
    bernoulli: Tally,
    controls: Tally,
    reduction: Tally,
}

/// Starts for multi-start runs: the zero point, then seeded draws.
pub fn seeded_starts(map: &SelfMap, count: usize, seed: u64) -> Vec<Point> {
    let mut starts = vec![map.space.zero().clone()];
    if count > 1 {
        starts.extend(map.space.random_points(count - 1, seed ^ START_SEED_SALT));
    }
    starts
}

/// Runs every check on `entries` plus the fixed negative controls and the
/// Bernoulli sweep, and evaluates acceptance criteria 1 to 9.
pub fn run_battery(entries: &[CatalogEntry], opts: &BatteryOptions) -> Result<BatteryOutcome> {
    let mut out = BatteryOutcome::default();
    let mut cr = Criteria {
        unique_limit: Tally::new(),
        monotone: Tally::new(),
        norm_bound: Tally::new(),
        step_bound: Tally::new(),
        p_step: Tally::new(),
        embedding: Tally::new(),
        bernoulli: Tally::new(),
        controls: Tally::new(),
        reduction: Tally::new(),
    };

    for entry in entries {
        map_checks(entry, opts, &mut out, &mut cr)?;
    }
    bernoulli_sweep(&mut out, &mut cr)?;
    negative_controls(opts, &mut out, &mut cr)?;

    out.criteria = vec![
        cr.unique_limit.finish(1, "unique_limit", "certified maps"),
        cr.monotone.finish(2, "step_monotonicity", "trajectories"),
        cr.norm_bound.finish(3, "norm_bound", "trajectories"),
        cr.step_bound.finish(4, "step_bound", "trajectories"),
        cr.p_step.finish(5, "p_step_bound", "trajectories"),
        cr.embedding.finish(6, "kannan_embedding", "kannan maps"),
        cr.bernoulli.finish(7, "bernoulli", "lambda values"),
        cr.controls.finish(8, "negative_controls", "controls"),
        cr.reduction.finish(9, "epsilon_zero_reduction", "maps"),
    ];
    Ok(out)
}

fn map_checks(
    entry: &CatalogEntry,
    opts: &BatteryOptions,
    out: &mut BatteryOutcome,
    cr: &mut Criteria,
) -> Result<()> {
    let map = &entry.map;
    let name = map.name.as_str();
    let declared = map.expected;
    let samples = SampleSet::generate(&map.space, opts.plan, opts.seed);
    let grid = &opts.grid;
    let t = opts.tol_cert;

    out.checks.push(CheckRecord::new(
        name,
        Expect::Pass,
        verify_metric_axioms(&map.space, &samples, opts.tol_metric)?,
    ));
    out.checks
        .push(CheckRecord::new(name, Expect::Pass, verify_closure(map, &samples)?));
    if let Some(r) = verify_known_fixed_point(entry, tol::TOL_KNOWN_FIXED_POINT)? {
        out.checks.push(CheckRecord::new(name, Expect::Pass, r));
    }

    let fit = fit_lambda(map, &samples)?;
    let (q, q_witness) = fit_contraction_ratio(map, &samples)?;
    let lambda_star = fit.lambda();

    let kannan_lambda = lambda_star.unwrap_or(KANNAN_PROBE_LAMBDA);
    out.checks.push(CheckRecord::new(
        name,
        Expect::from_flag(declared.kannan),
        check_kannan(map, KannanParams::new(kannan_lambda)?, &samples, t)?,
    ));

    // epsilon = 0 instance against Kannan with lambda = 1
    let zero_grid = EpsilonGrid::restricted(vec![0.0])?;
    let any_params = embed_kannan_threshold(0.0)?;
    let at_zero = check_generalized(map, &any_params, &samples, &zero_grid, t)?;
    let kannan_one = check_kannan(map, KannanParams::probe(1.0)?, &samples, t)?;
    let same_pair = at_zero.witness.as_ref().and_then(Witness::pair)
        == kannan_one.witness.as_ref().and_then(Witness::pair);
    cr.reduction.record(
        at_zero.pass == kannan_one.pass
            && at_zero.max_slack_violation == kannan_one.max_slack_violation
            && same_pair,
        || format!("{name}: eps=0 slack {} vs {}", at_zero.max_slack_violation, kannan_one.max_slack_violation),
    );
    let zero_expect = if declared.generalized_b { Expect::Pass } else { Expect::Any };
    out.checks.push(CheckRecord::new(
        format!("{name}@eps0"),
        zero_expect,
        relabel(at_zero, "generalized_eps0"),
    ));
    out.checks.push(CheckRecord::new(
        format!("{name}@eps0"),
        zero_expect,
        relabel(kannan_one, "kannan_lambda1"),
    ));

    let mut certified_params: Option<PataParams> = None;
    if let Some(ls) = lambda_star {
        let le = if ls > 0.0 { ls } else { ZERO_LAMBDA_STAND_IN };
        let power = embed_kannan_to_pata(le)?;
        let r = check_generalized(map, &power, &samples, grid, t)?;
        cr.embedding.record(r.max_slack_violation <= tol::TOL_EMBEDDING, || {
            format!("{name}: slack {:e} at lambda {le}", r.max_slack_violation)
        });
        out.checks
            .push(CheckRecord::new(name, Expect::Pass, relabel(r, "generalized_power_embedding")));

        let sharp = embed_kannan_threshold(ls)?;
        let r = check_generalized(map, &sharp, &samples, grid, t)?;
        let pass = r.pass;
        out.checks.push(CheckRecord::new(
            name,
            Expect::from_flag(declared.generalized_b),
            relabel(r, "generalized_threshold_embedding"),
        ));
        if pass {
            certified_params = Some(sharp);
        }
    }

    let certified = certified_params.is_some();
    out.fits.push(FitRecord {
        subject: name.to_string(),
        declared: declared.to_string(),
        lambda_star,
        kannan_sup_ratio: fit.sup_ratio(),
        kannan_witness: fit.witness().cloned(),
        contraction_ratio: q,
        contraction_witness: q_witness,
        certified,
        kannan_matched: lambda_star.is_some() == declared.kannan,
        banach_matched: (q < 1.0) == declared.banach,
        generalized_matched: certified == declared.generalized_b,
    });

    if opts.starts < 2 {
        return Ok(());
    }
    let starts = seeded_starts(map, opts.starts, opts.seed);
    let probe = uniqueness_probe(map, &starts, opts.tol_fix, opts.max_steps)?;
    for (x0, run) in starts.iter().zip(&probe.runs) {
        out.solves.push(SolveSummary::new(name, x0, run));
    }
    let probe_expect = if certified { Expect::Pass } else { Expect::Any };
    let probe_pass = probe.report.pass;
    out.checks.push(CheckRecord::new(name, probe_expect, probe.report.clone()));

    let Some(params) = certified_params else {
        return Ok(());
    };
    let worst_residual = probe.runs.iter().map(|r| r.residual).fold(0.0, f64::max);
    cr.unique_limit.record(
        probe_pass && worst_residual <= tol::TOL_RESIDUAL && spread(&probe.runs, map) <= tol::TOL_LIMIT_AGREEMENT,
        || format!("{name}: probe {probe_pass}, worst residual {worst_residual:e}"),
    );

    let power_params = embed_kannan_to_pata(match lambda_star {
        Some(l) if l > 0.0 => l,
        _ => ZERO_LAMBDA_STAND_IN,
    })?;
    for (i, x0) in starts.iter().enumerate() {
        let subject = format!("{name}@start{i}");
        let traj = orbit(map, x0, opts.horizon)?;

        let r = check_step_monotonicity(&traj, t)?;
        cr.monotone.record(r.pass, || format!("{subject}: slack {:e}", r.max_slack_violation));
        out.checks.push(CheckRecord::new(&subject, Expect::Pass, r));

        let r = check_norm_bound(&traj, t)?;
        cr.norm_bound.record(r.pass, || format!("{subject}: slack {:e}", r.max_slack_violation));
        out.checks.push(CheckRecord::new(&subject, Expect::Pass, r));

        let bp = BoundParams::a_priori(&traj, &params)?;
        let sb = check_step_bound(&traj, &bp, grid, t)?;
        let env = sb.final_envelope();
        let env_ok = name != FLAGSHIP || env < tol::ENVELOPE_TARGET;
        cr.step_bound.record(sb.report.pass && env_ok, || {
            format!("{subject}: slack {:e}, final envelope {env:e}", sb.report.max_slack_violation)
        });
        out.checks.push(CheckRecord::new(&subject, Expect::Pass, sb.report));

        if i == 0 {
            let bp_power = BoundParams::a_priori(&traj, &power_params)?;
            let r = check_step_bound(&traj, &bp_power, grid, t)?;
            out.checks
                .push(CheckRecord::new(&subject, Expect::Pass, relabel(r.report, "step_bound_power_embedding")));
        }

        let r = check_p_step_bound(&traj, &bp, grid, &P_STEP_NS, &P_STEP_PS, t)?;
        cr.p_step.record(r.pass, || format!("{subject}: slack {:e}", r.max_slack_violation));
        out.checks.push(CheckRecord::new(&subject, Expect::Pass, r));
    }
    Ok(())
}

fn spread(runs: &[SolveResult], map: &SelfMap) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[i + 1..] {
            worst = worst.max(map.space.d(&a.fixed_point, &b.fixed_point));
        }
    }
    worst
}

fn relabel(mut r: CertificateReport, id: &str) -> CertificateReport {
    r.condition_id = id.to_string();
    r
}

/// Bernoulli inequality for lambda = 0.01, ..., 0.99, folded into one record.
fn bernoulli_sweep(out: &mut BatteryOutcome, cr: &mut Criteria) -> Result<()> {
    let grid = EpsilonGrid::uniform(tol::DEFAULT_GRID)?;
    let mut worst: Option<CertificateReport> = None;
    let mut total = 0;
    for i in 1..=99 {
        let lambda = i as f64 / 100.0;
        let r = bernoulli_check(lambda, &grid, tol::TOL_BERNOULLI)?;
        cr.bernoulli
            .record(r.pass, || format!("lambda {lambda}: slack {:e}", r.max_slack_violation));
        total += r.samples_checked;
        if worst
            .as_ref()
            .is_none_or(|w| r.max_slack_violation > w.max_slack_violation)
        {
            worst = Some(r);
        }
    }
    let mut r = worst.expect("nonempty sweep");
    r.samples_checked = total;
    r.pass = cr.bernoulli.pass;
    out.checks.push(CheckRecord::new("bernoulli", Expect::Pass, r));
    Ok(())
}

fn negative_controls(opts: &BatteryOptions, out: &mut BatteryOutcome, cr: &mut Criteria) -> Result<()> {
    let half = catalog_get("half_scaling")?.map;
    let samples = SampleSet::generate(&half.space, opts.plan, opts.seed);
    let r = check_kannan(&half, KannanParams::new(KANNAN_PROBE_LAMBDA)?, &samples, opts.tol_cert)?;
    let at_ends = r.witness.as_ref().and_then(Witness::pair).is_some_and(|(x, y)| {
        let (x, y) = (x.as_scalar(), y.as_scalar());
        (x, y) == (Some(1.0), Some(0.0)) || (x, y) == (Some(0.0), Some(1.0))
    });
    let slack = r.max_slack_violation;
    cr.controls.record(!r.pass && at_ends && slack >= 0.25 - tol::TOL_CERT, || {
        format!("half_scaling: pass {}, slack {slack}, witness {:?}", r.pass, r.witness)
    });
    out.checks
        .push(CheckRecord::new("control:half_scaling", Expect::Fail, r));

    let id = catalog_get("identity")?.map;
    let starts = [Point::scalar(0.2), Point::scalar(0.8)];
    let probe = uniqueness_probe(&id, &starts, opts.tol_fix, opts.max_steps)?;
    let r = probe.report;
    cr.controls.record(!r.pass && !r.inconclusive, || {
        format!("identity: pass {}, inconclusive {}", r.pass, r.inconclusive)
    });
    out.checks.push(CheckRecord::new("control:identity", Expect::Fail, r));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::Catalog;

    fn small() -> BatteryOptions {
        BatteryOptions {
            plan: SamplePlan {
                points: 50,
                pairs: 400,
            },
            ..BatteryOptions::default()
        }
    }

    #[test]
    fn expectations() {
        let ok = CertificateReport::new("x", 0.0, None, 1, 0.0);
        let bad = CertificateReport::new("x", 1.0, None, 1, 0.0);
        let unsure = CertificateReport::inconclusive("x", 1);
        assert!(Expect::Pass.matches(&ok) && !Expect::Pass.matches(&bad));
        assert!(Expect::Fail.matches(&bad) && !Expect::Fail.matches(&unsure));
        assert!(Expect::Any.matches(&unsure));
    }

    #[test]
    fn starts_begin_at_zero() {
        let m = catalog_get(FLAGSHIP).unwrap().map;
        let s = seeded_starts(&m, 4, 1);
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], Point::scalar(0.0));
        assert_eq!(s, seeded_starts(&m, 4, 1));
    }

    #[test]
    fn small_battery_on_flagship() {
        let entries = vec![catalog_get(FLAGSHIP).unwrap()];
        let out = run_battery(&entries, &small()).unwrap();
        for c in &out.criteria {
            assert!(c.pass, "{c:?}");
        }
        assert!(out.pass());
        assert!(out.fits[0].certified);
    }

    #[test]
    fn wrong_declaration_is_flagged() {
        let mut e = catalog_get("half_scaling").unwrap();
        e.map.expected.kannan = true;
        let out = run_battery(&[e], &small()).unwrap();
        assert!(!out.fits[0].kannan_matched);
        assert!(!out.pass());
    }

    #[test]
    fn non_kannan_maps_leave_trajectory_criteria_vacuous() {
        let cat = Catalog::builtin();
        let entries = vec![cat.get("identity").unwrap().clone()];
        let out = run_battery(&entries, &small()).unwrap();
        let c1 = &out.criteria[0];
        assert!(c1.pass);
        assert_eq!(c1.cases, 0);
        assert!(c1.detail.starts_with("no certified maps"));
        assert!(out.fits[0].matched());
    }
}
