use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::battery::{
    run_battery, seeded_starts, BatteryOptions, CheckRecord, CriterionResult, Expect, FitRecord,
    SolveSummary, KANNAN_PROBE_LAMBDA, P_STEP_NS, P_STEP_PS,
};
use super::config::{parse_point, Condition, LambdaSpec, ParamsSpec, RunConfig};
use crate::conditions::{
    bernoulli_check, check_generalized, check_kannan, check_pata, embed_kannan_threshold,
    embed_kannan_to_pata, fit_contraction_ratio, fit_lambda, KannanParams, LambdaFit, PataParams,
};
use crate::error::{Error, Result};
use crate::maps::{verify_closure, CatalogEntry};
use crate::metric::{verify_metric_axioms, SampleSet};
use crate::solver::{
    check_norm_bound, check_p_step_bound, check_step_bound, check_step_monotonicity, orbit,
    residual_bound, uniqueness_probe, BoundParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const TOOLKIT: &str = "fixpoint-lab";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Solve,
    Suite,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve => "solve",
            Command::Suite => "suite",
        }
    }
}

/// JSON document written by every command. Field order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub fits: Vec<FitRecord>,
    pub solves: Vec<SolveSummary>,
    pub criteria: Vec<CriterionResult>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(cmd: Command, cfg: &RunConfig) -> Self {
        Self {
            toolkit: TOOLKIT.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: cmd.name().to_string(),
            config: cfg.echo(),
            pass: false,
            checks: Vec::new(),
            fits: Vec::new(),
            solves: Vec::new(),
            criteria: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn settle(&mut self, extra: bool) {
        self.pass = extra
            && self.checks.iter().all(|c| c.matched)
            && self.fits.iter().all(FitRecord::matched)
            && self.criteria.iter().all(|c| c.pass);
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

fn fit_record(entry: &CatalogEntry, fit: &LambdaFit, q: (f64, Option<crate::certificate::Witness>)) -> FitRecord {
    let declared = entry.map.expected;
    FitRecord {
        subject: entry.map.name.clone(),
        declared: declared.to_string(),
        lambda_star: fit.lambda(),
        kannan_sup_ratio: fit.sup_ratio(),
        kannan_witness: fit.witness().cloned(),
        contraction_ratio: q.0,
        contraction_witness: q.1,
        certified: false,
        kannan_matched: fit.lambda().is_some() == declared.kannan,
        banach_matched: (q.0 < 1.0) == declared.banach,
        generalized_matched: true,
    }
}

fn resolve_lambda(cfg: &RunConfig, fit: &LambdaFit, notes: &mut Vec<String>) -> f64 {
    match (cfg.lambda, fit.lambda()) {
        (LambdaSpec::Value(l), _) => l,
        (LambdaSpec::Fit, Some(l)) => l,
        (LambdaSpec::Fit, None) => {
            notes.push(format!(
                "no Kannan constant below 1 on the sample (sup ratio {}); probing with lambda {KANNAN_PROBE_LAMBDA}",
                fit.sup_ratio()
            ));
            KANNAN_PROBE_LAMBDA
        }
    }
}

fn resolve_params(spec: &ParamsSpec, lambda: f64) -> Result<PataParams> {
    match spec {
        ParamsSpec::Embedded => embed_kannan_to_pata(lambda),
        ParamsSpec::Threshold => embed_kannan_threshold(lambda),
        ParamsSpec::Explicit(p) => Ok(p.clone()),
    }
}

/// Checks the selected conditions on one map. Every check is expected to pass.
pub fn cmd_check(cfg: &RunConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Command::Check, cfg);
    let entry = cfg.entry()?;
    let map = &entry.map;
    let samples = SampleSet::generate(&map.space, cfg.plan, cfg.seed);
    let grid = cfg.epsilon_grid();
    let t = cfg.tol_cert;
    let conditions = if cfg.conditions.is_empty() {
        vec![Condition::Kannan, Condition::Generalized]
    } else {
        cfg.conditions.clone()
    };

    let fit = fit_lambda(map, &samples)?;
    let needs_lambda = conditions.iter().any(|c| {
        matches!(c, Condition::Kannan | Condition::Bernoulli)
            || (matches!(c, Condition::Pata | Condition::Generalized)
                && !matches!(cfg.params, Some(ParamsSpec::Explicit(_))))
    });
    let lambda = if needs_lambda {
        resolve_lambda(cfg, &fit, &mut rep.notes)
    } else {
        f64::NAN
    };
    let params_spec = cfg.params.clone().unwrap_or(ParamsSpec::Embedded);
    let name = map.name.as_str();

    for c in conditions {
        let report = match c {
            Condition::Metric => verify_metric_axioms(&map.space, &samples, cfg.tol_metric)?,
            Condition::Closure => verify_closure(map, &samples)?,
            Condition::Fit => {
                let q = fit_contraction_ratio(map, &samples)?;
                rep.fits.push(fit_record(&entry, &fit, q));
                continue;
            }
            Condition::Kannan => check_kannan(map, KannanParams::new(lambda)?, &samples, t)?,
            Condition::Pata => check_pata(map, &resolve_params(&params_spec, lambda)?, &samples, &grid, t)?,
            Condition::Generalized => {
                check_generalized(map, &resolve_params(&params_spec, lambda)?, &samples, &grid, t)?
            }
            Condition::Bernoulli => bernoulli_check(lambda, &grid, t)?,
        };
        rep.checks.push(CheckRecord::new(name, Expect::Pass, report));
    }
    rep.settle(true);
    Ok(rep)
}

/// Output of `solve`: the report and the trajectory CSV of the first start.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub report: SuiteReport,
    pub trajectory_csv: String,
}

/// Multi-start Picard iteration with trajectory certificates.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutput> {
    let mut rep = SuiteReport::new(Command::Solve, cfg);
    let entry = cfg.entry()?;
    let map = &entry.map;
    let name = map.name.as_str();
    let t = cfg.tol_cert;
    let grid = cfg.epsilon_grid();

    let mut starts = seeded_starts(map, cfg.starts.max(2), cfg.seed);
    if let Some(s) = &cfg.start {
        starts[0] = parse_point(&map.space, s)?;
    }
    let probe = uniqueness_probe(map, &starts, cfg.tol_fix, cfg.max_steps)?;
    let first = &probe.runs[0];
    let mut all_converged = true;
    for (x0, run) in starts.iter().zip(&probe.runs) {
        if !run.converged() {
            all_converged = false;
            rep.notes.push(format!(
                "run from {x0} stopped without converging ({:?} after {} steps)",
                run.trajectory.stop_reason, run.steps
            ));
        }
        rep.solves.push(SolveSummary::new(name, x0, run));
    }
    rep.checks.push(CheckRecord::new(name, Expect::Pass, probe.report.clone()));

    let samples = SampleSet::generate(&map.space, cfg.plan, cfg.seed);
    let fit = fit_lambda(map, &samples)?;
    let params = match (&cfg.params, fit.lambda(), cfg.lambda) {
        (Some(ParamsSpec::Explicit(p)), _, _) => Some(p.clone()),
        (spec, _, LambdaSpec::Value(l)) => Some(resolve_params(spec.as_ref().unwrap_or(&ParamsSpec::Threshold), l)?),
        (spec, Some(l), LambdaSpec::Fit) => {
            let spec = spec.as_ref().unwrap_or(&ParamsSpec::Threshold);
            let l = if l == 0.0 && *spec == ParamsSpec::Embedded { 0.5 } else { l };
            Some(resolve_params(spec, l)?)
        }
        (_, None, LambdaSpec::Fit) => {
            rep.notes.push(format!(
                "no Kannan constant below 1 on the sample (sup ratio {}); trajectory bounds skipped",
                fit.sup_ratio()
            ));
            None
        }
    };

    let traj = orbit(map, &starts[0], cfg.horizon)?;
    rep.checks
        .push(CheckRecord::new(name, Expect::Pass, check_step_monotonicity(&traj, t)?));
    rep.checks
        .push(CheckRecord::new(name, Expect::Pass, check_norm_bound(&traj, t)?));

    let mut envelope = None;
    if let Some(p) = &params {
        rep.checks.push(CheckRecord::new(
            name,
            Expect::Pass,
            check_generalized(map, p, &samples, &grid, t)?,
        ));
        let bp = BoundParams::a_priori(&traj, p)?;
        let sb = check_step_bound(&traj, &bp, &grid, t)?;
        rep.notes.push(format!("final envelope {:e} at n = {}", sb.final_envelope(), traj.steps() - 1));
        rep.checks.push(CheckRecord::new(name, Expect::Pass, sb.report));
        rep.checks.push(CheckRecord::new(
            name,
            Expect::Pass,
            check_p_step_bound(&traj, &bp, &grid, &P_STEP_NS, &P_STEP_PS, t)?,
        ));

        let run_bp = BoundParams::a_priori(&first.trajectory, p)?;
        let sb = check_step_bound(&first.trajectory, &run_bp, &grid, t)?;
        envelope = Some(sb.envelope);
    }
    let rb = residual_bound(&first.trajectory, &first.fixed_point)?;
    rep.notes.push(format!("residual bound at the first limit: {rb:e}"));

    let mut buf = Vec::new();
    first.trajectory.write_csv(&mut buf, envelope.as_deref())?;
    let trajectory_csv = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;

    rep.settle(all_converged);
    Ok(SolveOutput {
        report: rep,
        trajectory_csv,
    })
}

/// The full catalog battery with acceptance criteria.
pub fn cmd_suite(cfg: &RunConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new(Command::Suite, cfg);
    let entries = cfg.selected_entries()?;
    if entries.is_empty() {
        return Err(Error::Config("catalog selection is empty".into()));
    }
    let out = run_battery(&entries, &BatteryOptions::from_config(cfg))?;
    rep.checks = out.checks;
    rep.fits = out.fits;
    rep.solves = out.solves;
    rep.criteria = out.criteria;
    rep.settle(true);
    Ok(rep)
}

/// Writes `text` to `path` atomically, or to stdout when `path` is `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.flush()?;
            tmp.persist(p).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Range(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Runs `cmd`, writes its outputs, and returns the process exit code.
pub fn run(cmd: Command, cfg: &RunConfig) -> i32 {
    let result = (|| -> Result<bool> {
        let report = match cmd {
            Command::Check => cmd_check(cfg)?,
            Command::Suite => cmd_suite(cfg)?,
            Command::Solve => {
                let out = cmd_solve(cfg)?;
                if let Some(p) = &cfg.trajectory_out {
                    write_output(&out.trajectory_csv, Some(p))?;
                }
                out.report
            }
        };
        write_output(&report.to_json()?, cfg.out.as_deref())?;
        Ok(report.pass)
    })();
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
