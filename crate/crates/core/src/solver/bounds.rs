//! Quantitative bounds along a Picard trajectory.
//!
//! For a map satisfying the generalized condition, the Picard orbit from
//! `x_0` obeys:
//!
//! * `d_{n+1} <= d_n <= c_1`, with `c_1 = d(x_1, x_0)` (epsilon = 0 case);
//! * `d(x_n, x_0) <= 3 c_1`;
//! * `d_n <= k^n c_1 + C eps^(alpha-1) psi(eps)` for `eps in (0, 1]`,
//!   `k = (1-eps)/(1+eps)`, where `C` bounds `Lambda [1 + 4 sup_j |x_j|]^beta`;
//! * `d(x_n, x_{n+p}) <= (1-eps)/2 (d_{n-1} + d_{n+p-1}) + C eps^alpha psi(eps)`;
//! * `d(T y, y) <= d_n + 2 d(x_{n+1}, y)` for every `n` and every point `y`.

use serde::Serialize;

use super::trajectory::Trajectory;
use crate::certificate::{CertificateReport, Witness, Worst};
use crate::conditions::{EpsilonGrid, PataParams};
use crate::error::{Error, Result};
use crate::metric::Point;

/// The constant `C`, the first step `c_1`, and the certified parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundParams {
    #[serde(rename = "C")]
    pub c_bound: f64,
    pub c1: f64,
    pub pata: PataParams,
}

impl BoundParams {
    /// Requires `c1 >= 0` and `C >= Lambda`.
    pub fn new(c_bound: f64, c1: f64, pata: PataParams) -> Result<Self> {
        if !(c1 >= 0.0 && c1.is_finite()) {
            return Err(Error::Parameter(format!("c1 {c1} must be finite and >= 0")));
        }
        if !(c_bound >= pata.lambda_cap) {
            return Err(Error::Parameter(format!(
                "C {c_bound} below Lambda {}",
                pata.lambda_cap
            )));
        }
        Ok(Self { c_bound, c1, pata })
    }

    /// A priori constant from the norm bound `d(x_n, x_0) <= 3 c_1`:
    /// `C = Lambda (1 + 4(|x_0| + 3 c_1))^beta`. When the orbit starts at the
    /// zero point this is `Lambda (1 + 12 c_1)^beta`.
    pub fn a_priori(traj: &Trajectory, pata: &PataParams) -> Result<Self> {
        let c1 = first_step(traj)?;
        let sup_norm = traj.norms[0] + 3.0 * c1;
        let c = pata.lambda_cap * (1.0 + 4.0 * sup_norm).powf(pata.beta);
        Self::new(c, c1, pata.clone())
    }

    /// A posteriori constant from the realized orbit:
    /// `C = Lambda (1 + 4 max_n |x_n|)^beta`.
    pub fn a_posteriori(traj: &Trajectory, pata: &PataParams) -> Result<Self> {
        let c1 = first_step(traj)?;
        let sup_norm = traj.norms.iter().copied().fold(0.0, f64::max);
        let c = pata.lambda_cap * (1.0 + 4.0 * sup_norm).powf(pata.beta);
        Self::new(c, c1, pata.clone())
    }
}

fn first_step(traj: &Trajectory) -> Result<f64> {
    traj.c1()
        .ok_or_else(|| Error::Argument("trajectory has no steps".into()))
}

fn positive_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("eps {eps} not in (0, 1]")))
    }
}

/// `k^n c_1 + C eps^(alpha-1) psi(eps)` with `k = (1-eps)/(1+eps)`.
pub fn bound_eval(params: &BoundParams, n: usize, eps: f64) -> Result<f64> {
    positive_eps(eps)?;
    let k = (1.0 - eps) / (1.0 + eps);
    let geometric = k.powi(n.min(i32::MAX as usize) as i32) * params.c1;
    let tail = params.c_bound * eps.powf(params.pata.alpha - 1.0) * params.pata.psi.eval(eps);
    Ok(geometric + tail)
}

/// Min over the positive grid values of [`bound_eval`] at step `n`.
pub fn envelope(params: &BoundParams, n: usize, grid: &EpsilonGrid) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut any = false;
    for e in grid.positive() {
        any = true;
        best = best.min(bound_eval(params, n, e)?);
    }
    if any {
        Ok(best)
    } else {
        Err(Error::Argument("epsilon grid has no positive values".into()))
    }
}

fn min_steps(traj: &Trajectory, k: usize) -> Result<()> {
    if traj.steps() < k {
        Err(Error::Argument(format!(
            "trajectory has {} steps, need at least {k}",
            traj.steps()
        )))
    } else {
        Ok(())
    }
}

fn step_witness(n: usize) -> Witness {
    Witness::Step {
        n,
        p: None,
        eps: None,
    }
}

/// `d_{n+1} <= d_n` and `d_n <= c_1` for every `n`.
pub fn check_step_monotonicity(traj: &Trajectory, tol: f64) -> Result<CertificateReport> {
    min_steps(traj, 2)?;
    let d = &traj.step_distances;
    let c1 = d[0];
    let mut worst = Worst::EMPTY;
    for n in 0..d.len() {
        let growth = d.get(n + 1).map_or(f64::NEG_INFINITY, |next| next - d[n]);
        worst = worst.merge(Worst::at(growth.max(d[n] - c1), n));
    }
    Ok(CertificateReport::new(
        "step_monotonicity",
        worst.slack,
        Some(step_witness(worst.index)),
        d.len(),
        tol,
    ))
}

/// `d(x_n, x_0) <= 3 c_1` for every `n >= 1`.
pub fn check_norm_bound(traj: &Trajectory, tol: f64) -> Result<CertificateReport> {
    min_steps(traj, 2)?;
    let c1 = traj.step_distances[0];
    let worst = traj
        .start_distances
        .iter()
        .enumerate()
        .skip(1)
        .fold(Worst::EMPTY, |w, (n, c)| w.merge(Worst::at(c - 3.0 * c1, n)));
    Ok(CertificateReport::new(
        "norm_bound",
        worst.slack,
        Some(step_witness(worst.index)),
        traj.steps(),
        tol,
    ))
}

/// Step-bound certificate together with the per-step envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct StepBoundCertificate {
    pub report: CertificateReport,
    /// `envelope[n]` = min over positive grid eps of the bound on `d_n`.
    pub envelope: Vec<f64>,
}

impl StepBoundCertificate {
    pub fn final_envelope(&self) -> f64 {
        *self.envelope.last().expect("nonempty envelope")
    }
}

/// `d_n <= k^n c_1 + C eps^(alpha-1) psi(eps)` for every step and every
/// positive grid value.
pub fn check_step_bound(
    traj: &Trajectory,
    params: &BoundParams,
    grid: &EpsilonGrid,
    tol: f64,
) -> Result<StepBoundCertificate> {
    min_steps(traj, 1)?;
    let eps: Vec<f64> = grid.positive().collect();
    if eps.is_empty() {
        return Err(Error::Argument("epsilon grid has no positive values".into()));
    }
    let mut worst = Worst::EMPTY;
    let mut env = Vec::with_capacity(traj.steps());
    for (n, &dn) in traj.step_distances.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, &e) in eps.iter().enumerate() {
            let b = bound_eval(params, n, e)?;
            best = best.min(b);
            worst = worst.merge(Worst::at(dn - b, n * eps.len() + j));
        }
        env.push(best);
    }
    let (n, j) = (worst.index / eps.len(), worst.index % eps.len());
    Ok(StepBoundCertificate {
        report: CertificateReport::new(
            "step_bound",
            worst.slack,
            Some(Witness::Step {
                n,
                p: None,
                eps: Some(eps[j]),
            }),
            traj.steps() * eps.len(),
            tol,
        ),
        envelope: env,
    })
}

/// `d(x_n, x_{n+p}) <= (1-eps)/2 (d_{n-1} + d_{n+p-1}) + C eps^alpha psi(eps)`
/// for the requested `n >= 1`, `p >= 1`, and every grid value.
pub fn check_p_step_bound(
    traj: &Trajectory,
    params: &BoundParams,
    grid: &EpsilonGrid,
    ns: &[usize],
    ps: &[usize],
    tol: f64,
) -> Result<CertificateReport> {
    let last = traj.steps();
    let mut cases = Vec::new();
    for &n in ns {
        for &p in ps {
            if n == 0 || p == 0 || n + p > last {
                return Err(Error::Argument(format!(
                    "(n, p) = ({n}, {p}) out of range for a trajectory of {last} steps"
                )));
            }
            cases.push((n, p));
        }
    }
    if cases.is_empty() {
        return Err(Error::Argument("no (n, p) cases requested".into()));
    }
    let d = &traj.step_distances;
    let eps = grid.values();
    let pata = &params.pata;
    let mut worst = Worst::EMPTY;
    for (c, &(n, p)) in cases.iter().enumerate() {
        let lhs = traj.d(n, n + p);
        for (j, &e) in eps.iter().enumerate() {
            let tail = if e == 0.0 {
                0.0
            } else {
                params.c_bound * e.powf(pata.alpha) * pata.psi.eval(e)
            };
            let rhs = (1.0 - e) / 2.0 * (d[n - 1] + d[n + p - 1]) + tail;
            worst = worst.merge(Worst::at(lhs - rhs, c * eps.len() + j));
        }
    }
    let (c, j) = (worst.index / eps.len(), worst.index % eps.len());
    Ok(CertificateReport::new(
        "p_step_bound",
        worst.slack,
        Some(Witness::Step {
            n: cases[c].0,
            p: Some(cases[c].1),
            eps: Some(eps[j]),
        }),
        cases.len() * eps.len(),
        tol,
    ))
}

/// Upper bound on `d(T y, y)`: min over `n` of `d_n + 2 d(x_{n+1}, y)`.
pub fn residual_bound(traj: &Trajectory, candidate: &Point) -> Result<f64> {
    min_steps(traj, 1)?;
    traj.space().ensure_contains(candidate)?;
    let sp = traj.space();
    Ok(traj
        .step_distances
        .iter()
        .zip(&traj.iterates[1..])
        .map(|(dn, next)| dn + 2.0 * sp.d(next, candidate))
        .fold(f64::INFINITY, f64::min))
}
