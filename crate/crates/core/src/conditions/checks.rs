use rayon::prelude::*;

use super::params::{EpsilonGrid, KannanParams, PataParams};
use crate::certificate::{CertificateReport, Witness, Worst};
use crate::error::{Error, Result};
use crate::maps::SelfMap;
use crate::metric::SampleSet;

/// Distances needed by every two-point condition, for one sampled pair.
#[derive(Debug, Clone, Copy)]
struct PairStats {
    /// d(Tx, Ty)
    image: f64,
    /// d(x, y)
    base: f64,
    /// d(x, Tx) + d(y, Ty)
    displacement: f64,
    /// |x| + |y|
    norms: f64,
    /// |x| + |Tx| + |y| + |Ty|
    norms_with_images: f64,
}

fn pair_stats(map: &SelfMap, samples: &SampleSet) -> Result<Vec<PairStats>> {
    if samples.pairs.is_empty() {
        return Err(Error::Argument("sample set has no pairs".into()));
    }
    let sp = &map.space;
    samples
        .pairs
        .par_iter()
        .map(|(x, y)| {
            let tx = map.apply(x)?;
            let ty = map.apply(y)?;
            Ok(PairStats {
                image: sp.d(&tx, &ty),
                base: sp.d(x, y),
                displacement: sp.d(x, &tx) + sp.d(y, &ty),
                norms: sp.n(x) + sp.n(y),
                norms_with_images: sp.n(x) + sp.n(&tx) + sp.n(y) + sp.n(&ty),
            })
        })
        .collect()
}

fn pair_witness(samples: &SampleSet, k: usize, eps: Option<f64>) -> Witness {
    let (x, y) = &samples.pairs[k];
    Witness::Pair {
        x: x.clone(),
        y: y.clone(),
        eps,
    }
}

/// Max over pairs and grid values of `slack(pair, eps)`; ties go to the
/// lowest (pair, eps) index.
fn sweep(
    stats: &[PairStats],
    grid: &[f64],
    slack: impl Fn(&PairStats, f64) -> f64 + Sync,
) -> Worst {
    let width = grid.len();
    stats
        .par_iter()
        .enumerate()
        .map(|(k, st)| {
            grid.iter()
                .enumerate()
                .fold(Worst::EMPTY, |w, (j, &e)| w.merge(Worst::at(slack(st, e), k * width + j)))
        })
        .reduce(|| Worst::EMPTY, Worst::merge)
}

/// Kannan condition: slack `d(Tx,Ty) - lambda/2 (d(x,Tx) + d(y,Ty))` per pair.
pub fn check_kannan(
    map: &SelfMap,
    params: KannanParams,
    samples: &SampleSet,
    tol: f64,
) -> Result<CertificateReport> {
    let stats = pair_stats(map, samples)?;
    let half = params.lambda() / 2.0;
    let worst = sweep(&stats, &[0.0], |st, _| st.image - half * st.displacement);
    Ok(CertificateReport::new(
        "kannan",
        worst.slack,
        Some(pair_witness(samples, worst.index, None)),
        stats.len(),
        tol,
    ))
}

/// Result of estimating the smallest Kannan constant on a sample.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaFit {
    /// Sup of `2 d(Tx,Ty) / (d(x,Tx) + d(y,Ty))` over the sample, below 1.
    /// `witness` is the pair attaining it, if any pair has a nonzero ratio.
    Kannan { lambda: f64, witness: Option<Witness> },
    /// Ratio reached 1 (or the denominator vanished under a positive
    /// numerator) at `witness`. `sup_ratio` is infinite in the latter case.
    NotKannan { sup_ratio: f64, witness: Witness },
}

impl LambdaFit {
    pub fn lambda(&self) -> Option<f64> {
        match self {
            LambdaFit::Kannan { lambda, .. } => Some(*lambda),
            LambdaFit::NotKannan { .. } => None,
        }
    }

    pub fn sup_ratio(&self) -> f64 {
        match self {
            LambdaFit::Kannan { lambda, .. } => *lambda,
            LambdaFit::NotKannan { sup_ratio, .. } => *sup_ratio,
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            LambdaFit::Kannan { witness, .. } => witness.as_ref(),
            LambdaFit::NotKannan { witness, .. } => Some(witness),
        }
    }
}

/// Smallest Kannan constant consistent with the sample.
///
/// Pairs with `0/0` ratio (both points fixed) impose nothing and are skipped.
pub fn fit_lambda(map: &SelfMap, samples: &SampleSet) -> Result<LambdaFit> {
    let stats = pair_stats(map, samples)?;
    let worst = sweep(&stats, &[0.0], |st, _| {
        if st.displacement > 0.0 {
            2.0 * st.image / st.displacement
        } else if st.image > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    });
    if worst.slack == f64::NEG_INFINITY {
        return Ok(LambdaFit::Kannan {
            lambda: 0.0,
            witness: None,
        });
    }
    let witness = pair_witness(samples, worst.index, None);
    if worst.slack >= 1.0 {
        Ok(LambdaFit::NotKannan {
            sup_ratio: worst.slack,
            witness,
        })
    } else {
        Ok(LambdaFit::Kannan {
            lambda: worst.slack.max(0.0),
            witness: Some(witness),
        })
    }
}

/// Sup of `d(Tx,Ty) / d(x,y)` over pairs with `x != y`; below 1 on a
/// contraction.
pub fn fit_contraction_ratio(map: &SelfMap, samples: &SampleSet) -> Result<(f64, Option<Witness>)> {
    let stats = pair_stats(map, samples)?;
    let worst = sweep(&stats, &[0.0], |st, _| {
        if st.base > 0.0 {
            st.image / st.base
        } else {
            f64::NEG_INFINITY
        }
    });
    if worst.slack == f64::NEG_INFINITY {
        return Ok((0.0, None));
    }
    Ok((worst.slack, Some(pair_witness(samples, worst.index, None))))
}

fn check_grid(grid: &EpsilonGrid) -> Result<()> {
    if grid.is_empty() {
        Err(Error::Argument("empty epsilon grid".into()))
    } else {
        Ok(())
    }
}

/// Two-point Pata condition
/// `d(Tx,Ty) <= (1-eps) d(x,y) + Lambda eps^alpha psi(eps) [1 + |x| + |y|]^beta`.
pub fn check_pata(
    map: &SelfMap,
    params: &PataParams,
    samples: &SampleSet,
    grid: &EpsilonGrid,
    tol: f64,
) -> Result<CertificateReport> {
    params.ensure_beta_le_alpha()?;
    check_grid(grid)?;
    let stats = pair_stats(map, samples)?;
    let eps = grid.values();
    let worst = sweep(&stats, eps, |st, e| {
        st.image - (1.0 - e) * st.base - params.perturbation(e, 1.0 + st.norms)
    });
    let (k, j) = (worst.index / eps.len(), worst.index % eps.len());
    Ok(CertificateReport::new(
        "pata",
        worst.slack,
        Some(pair_witness(samples, k, Some(eps[j]))),
        stats.len() * eps.len(),
        tol,
    ))
}

/// Generalized Kannan-type condition
/// `d(Tx,Ty) <= (1-eps)/2 (d(x,Tx) + d(y,Ty))
///   + Lambda eps^alpha psi(eps) [1 + |x| + |Tx| + |y| + |Ty|]^beta`.
pub fn check_generalized(
    map: &SelfMap,
    params: &PataParams,
    samples: &SampleSet,
    grid: &EpsilonGrid,
    tol: f64,
) -> Result<CertificateReport> {
    check_grid(grid)?;
    let stats = pair_stats(map, samples)?;
    let eps = grid.values();
    let worst = sweep(&stats, eps, |st, e| {
        st.image - (1.0 - e) / 2.0 * st.displacement - params.perturbation(e, 1.0 + st.norms_with_images)
    });
    let (k, j) = (worst.index / eps.len(), worst.index % eps.len());
    Ok(CertificateReport::new(
        "generalized",
        worst.slack,
        Some(pair_witness(samples, k, Some(eps[j]))),
        stats.len() * eps.len(),
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::PsiFunction;
    use crate::maps::{catalog_get, AffinePiece, MapFamily, Status};
    use crate::metric::{MetricSpace, Point, SamplePlan};
    use crate::tolerances::TOL_CERT;

    fn s(x: f64) -> Point {
        Point::scalar(x)
    }

    fn map(name: &str) -> SelfMap {
        catalog_get(name).unwrap().map
    }

    fn grid_samples(step: f64) -> SampleSet {
        let n = (1.0 / step).round() as usize;
        SampleSet::from_points((0..=n).map(|i| s(i as f64 / n as f64)).collect())
    }

    fn zero_params() -> PataParams {
        PataParams::new(0.0, 1.0, 0.0, PsiFunction::power(1.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_map_is_kannan_with_zero() {
        let m = map("constant_0.3");
        let smp = SampleSet::generate(&m.space, SamplePlan { points: 10, pairs: 500 }, 1);
        let r = check_kannan(&m, KannanParams::new(0.0).unwrap(), &smp, TOL_CERT).unwrap();
        assert!(r.pass);
        assert!(r.max_slack_violation <= 0.0);
        assert_eq!(fit_lambda(&m, &smp).unwrap().lambda(), Some(0.0));
    }

    #[test]
    fn half_scaling_fails_kannan_at_one_zero() {
        let m = map("half_scaling");
        let smp = SampleSet::from_pairs(vec![(s(0.3), s(0.2)), (s(1.0), s(0.0))]);
        for lambda in [0.0, 0.5, 0.99] {
            let r = check_kannan(&m, KannanParams::new(lambda).unwrap(), &smp, TOL_CERT).unwrap();
            assert!(!r.pass);
            assert!((r.max_slack_violation - (0.5 - lambda * 0.25)).abs() < 1e-15);
            assert_eq!(r.witness.as_ref().unwrap().pair(), Some((&s(1.0), &s(0.0))));
        }
    }

    #[test]
    fn fit_lambda_examples() {
        let grid = grid_samples(1e-2);
        let half = fit_lambda(&map("half_scaling"), &grid).unwrap();
        assert!(matches!(half, LambdaFit::NotKannan { sup_ratio, .. } if (sup_ratio - 2.0).abs() < 1e-12));

        let id = fit_lambda(&map("identity"), &grid).unwrap();
        assert!(matches!(id, LambdaFit::NotKannan { sup_ratio, .. } if sup_ratio.is_infinite()));

        assert_eq!(fit_lambda(&map("constant_0.3"), &grid).unwrap().lambda(), Some(0.0));
    }

    #[test]
    fn fit_lambda_skips_pairs_of_fixed_points() {
        let m = map("identity");
        let smp = SampleSet::from_pairs(vec![(s(0.2), s(0.2))]);
        assert_eq!(fit_lambda(&m, &smp).unwrap().lambda(), Some(0.0));
    }

    #[test]
    fn empty_samples_are_argument_errors() {
        let m = map("constant_0.3");
        let empty = SampleSet::from_pairs(vec![]);
        assert!(matches!(
            check_kannan(&m, KannanParams::new(0.5).unwrap(), &empty, TOL_CERT),
            Err(Error::Argument(_))
        ));
        assert!(matches!(fit_lambda(&m, &empty), Err(Error::Argument(_))));
        assert!(matches!(EpsilonGrid::restricted(vec![]), Err(Error::Argument(_))));
    }

    #[test]
    fn pata_examples() {
        let smp = grid_samples(0.05);
        let half = map("half_scaling");
        let low = EpsilonGrid::restricted((0..=50).map(|i| i as f64 / 100.0).collect()).unwrap();
        assert!(check_pata(&half, &zero_params(), &smp, &low, TOL_CERT).unwrap().pass);

        let c = map("constant_0.3");
        let full = EpsilonGrid::default();
        assert!(check_pata(&c, &zero_params(), &smp, &full, TOL_CERT).unwrap().pass);

        let id = map("identity");
        let r = check_pata(&id, &zero_params(), &smp, &full, TOL_CERT).unwrap();
        assert!(!r.pass);
        match r.witness.unwrap() {
            Witness::Pair { x, y, eps } => {
                assert_eq!(eps, Some(1.0));
                assert!((r.max_slack_violation - (x.as_scalar().unwrap() - y.as_scalar().unwrap()).abs()).abs() < 1e-15);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn pata_rejects_beta_above_alpha() {
        let p = PataParams::new(1.0, 1.0, 1.5, PsiFunction::power(1.0).unwrap()).unwrap();
        let smp = grid_samples(0.5);
        let r = check_pata(&map("constant_0.3"), &p, &smp, &EpsilonGrid::default(), TOL_CERT);
        assert!(matches!(r, Err(Error::Parameter(_))));
        // the generalized condition admits any beta >= 0
        assert!(check_generalized(&map("constant_0.3"), &p, &smp, &EpsilonGrid::default(), TOL_CERT).is_ok());
    }

    #[test]
    fn generalized_half_scaling_fails_at_eps_zero() {
        let m = map("half_scaling");
        let smp = SampleSet::from_pairs(vec![(s(1.0), s(0.0))]);
        let p = PataParams::new(5.0, 1.0, 1.0, PsiFunction::power(0.5).unwrap()).unwrap();
        let r = check_generalized(&m, &p, &smp, &EpsilonGrid::default(), TOL_CERT).unwrap();
        assert!(!r.pass);
        assert!((r.max_slack_violation - 0.25).abs() < 1e-15);
        assert!(matches!(r.witness, Some(Witness::Pair { eps: Some(e), .. }) if e == 0.0));
    }

    #[test]
    fn escaping_map_surfaces_range_error() {
        let m = SelfMap::new(
            "up",
            MetricSpace::unit_interval(),
            MapFamily::Affine { piece: AffinePiece::new(2.0, 0.0) },
            Status::NEITHER,
        );
        let smp = SampleSet::from_pairs(vec![(s(0.9), s(0.1))]);
        assert!(matches!(fit_lambda(&m, &smp), Err(Error::Range(_))));
    }

    #[test]
    fn contraction_ratio() {
        let smp = grid_samples(0.01);
        let (q, _) = fit_contraction_ratio(&map("half_scaling"), &smp).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
        let (q, _) = fit_contraction_ratio(&map("piecewise_kannan"), &smp).unwrap();
        assert!(q > 1.0);
    }
}
