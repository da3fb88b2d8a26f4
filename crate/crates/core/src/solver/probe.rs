use rayon::prelude::*;

use super::trajectory::{iterate, SolveResult};
use crate::certificate::{CertificateReport, Witness, Worst};
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::Point;

/// Multi-start uniqueness check and the runs it was based on.
#[derive(Debug, Clone)]
pub struct UniquenessProbe {
    pub report: CertificateReport,
    /// One result per start, in start order.
    pub runs: Vec<SolveResult>,
}

/// Runs [`iterate`] from every start and compares the limits.
///
/// Passes when every run converges and all limits lie within `10 tol_fix`
/// of each other. The reported slack is the largest pairwise limit distance
/// minus that threshold. If some run does not converge the report is
/// inconclusive rather than failed.
pub fn uniqueness_probe(
    map: &SelfMap,
    starts: &[Point],
    tol_fix: f64,
    max_steps: usize,
) -> Result<UniquenessProbe> {
    if starts.len() < 2 {
        return Err(Error::Argument("uniqueness probe needs at least two starts".into()));
    }
    let runs = starts
        .par_iter()
        .map(|x0| iterate(map, x0, tol_fix, max_steps))
        .collect::<Result<Vec<_>>>()?;

    if !runs.iter().all(SolveResult::converged) {
        return Ok(UniquenessProbe {
            report: CertificateReport::inconclusive("uniqueness", runs.len()),
            runs,
        });
    }

    let threshold = 10.0 * tol_fix;
    let sp = &map.space;
    let n = runs.len();
    let mut worst = Worst::EMPTY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sp.d(&runs[i].fixed_point, &runs[j].fixed_point);
            worst = worst.merge(Worst::at(d - threshold, i * n + j));
        }
    }
    let report = CertificateReport::new(
        "uniqueness",
        worst.slack,
        Some(Witness::Starts {
            i: worst.index / n,
            j: worst.index % n,
        }),
        n * (n - 1) / 2,
        0.0,
    );
    Ok(UniquenessProbe { report, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{catalog_get, FLAGSHIP};
    use crate::tolerances::{MAX_STEPS, TOL_FIX};

    #[test]
    fn flagship_has_one_limit() {
        let m = catalog_get(FLAGSHIP).unwrap().map;
        let starts = m.space.random_points(10, 4);
        let p = uniqueness_probe(&m, &starts, TOL_FIX, MAX_STEPS).unwrap();
        assert!(p.report.pass, "{:?}", p.report);
        for r in &p.runs {
            assert!(r.fixed_point.as_scalar().unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn constant_limits_identical() {
        let m = catalog_get("constant_0.3").unwrap().map;
        let starts = m.space.random_points(5, 9);
        let p = uniqueness_probe(&m, &starts, TOL_FIX, MAX_STEPS).unwrap();
        assert!(p.report.pass);
        assert!(p.runs.iter().all(|r| r.fixed_point == Point::scalar(0.3)));
    }

    #[test]
    fn identity_has_many_limits() {
        let m = catalog_get("identity").unwrap().map;
        let starts = [Point::scalar(0.2), Point::scalar(0.8)];
        let p = uniqueness_probe(&m, &starts, TOL_FIX, MAX_STEPS).unwrap();
        assert!(!p.report.pass);
        assert!(!p.report.inconclusive);
        assert_eq!(p.report.witness, Some(Witness::Starts { i: 0, j: 1 }));
    }

    #[test]
    fn unconverged_runs_are_inconclusive() {
        let m = catalog_get(FLAGSHIP).unwrap().map;
        let starts = [Point::scalar(1.0), Point::scalar(0.7)];
        let p = uniqueness_probe(&m, &starts, TOL_FIX, 2).unwrap();
        assert!(p.report.inconclusive);
        assert!(!p.report.pass);
    }

    #[test]
    fn needs_two_starts() {
        let m = catalog_get(FLAGSHIP).unwrap().map;
        assert!(matches!(
            uniqueness_probe(&m, &[Point::scalar(1.0)], TOL_FIX, 10),
            Err(Error::Argument(_))
        ));
    }
}
