//! Parameters under which a Kannan map satisfies the generalized condition.

use super::params::{EpsilonGrid, PataParams, PsiFunction};
use crate::certificate::{CertificateReport, Witness, Worst};
use crate::error::{Error, Result};

fn open_unit(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("lambda {lambda} not in (0, 1)")))
    }
}

/// Power embedding of a Kannan constant `lambda in (0, 1)`:
/// `Lambda = lambda/2`, `alpha = 1`, `beta = 1`, `psi(eps) = eps^gamma`
/// with `1/lambda = 1 + gamma`.
///
/// Follows from `1 + (eps - 1)/lambda <= eps^(1/lambda)` (Bernoulli) and
/// `d(x,Tx) + d(y,Ty) <= 1 + |x| + |Tx| + |y| + |Ty|`.
pub fn embed_kannan_to_pata(lambda: f64) -> Result<PataParams> {
    open_unit(lambda)?;
    let gamma = 1.0 / lambda - 1.0;
    PataParams::new(lambda / 2.0, 1.0, 1.0, PsiFunction::power(gamma)?)
}

/// Threshold embedding of a Kannan constant `lambda in [0, 1)`:
/// `Lambda = 1/2`, `alpha = 1`, `beta = 1`, and the piecewise-linear
/// `psi(eps) = clamp((eps - e0)/e0, 0, 1)` with `e0 = 1 - lambda`.
///
/// For `eps <= e0` the Kannan bound gives
/// `d(Tx,Ty) <= (1-eps)/2 (d(x,Tx) + d(y,Ty))` outright. Above `e0` the
/// required weight `(eps - e0)/eps` lies under its tangent at `e0`.
pub fn embed_kannan_threshold(lambda: f64) -> Result<PataParams> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("lambda {lambda} not in [0, 1)")));
    }
    let e0 = 1.0 - lambda;
    let mut knots = vec![(0.0, 0.0)];
    if e0 < 1.0 {
        knots.push((e0, 0.0));
        let top = 2.0 * e0;
        if top < 1.0 {
            knots.push((top, 1.0));
            knots.push((1.0, 1.0));
        } else {
            knots.push((1.0, (1.0 - e0) / e0));
        }
    } else {
        knots.push((1.0, 0.0));
    }
    PataParams::new(0.5, 1.0, 1.0, PsiFunction::tabulated(knots)?)
}

/// Checks `1 + (eps - 1)/lambda <= eps^(1/lambda)` at every grid value.
pub fn bernoulli_check(lambda: f64, grid: &EpsilonGrid, tol: f64) -> Result<CertificateReport> {
    open_unit(lambda)?;
    let eps = grid.values();
    let worst = eps
        .iter()
        .enumerate()
        .fold(Worst::EMPTY, |w, (j, &e)| {
            w.merge(Worst::at(1.0 + (e - 1.0) / lambda - e.powf(1.0 / lambda), j))
        });
    Ok(CertificateReport::new(
        "bernoulli",
        worst.slack,
        Some(Witness::Bernoulli {
            lambda,
            eps: eps[worst.index],
        }),
        eps.len(),
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances::TOL_BERNOULLI;

    #[test]
    fn power_embedding_examples() {
        let p = embed_kannan_to_pata(0.5).unwrap();
        assert_eq!(p.lambda_cap, 0.25);
        assert_eq!((p.alpha, p.beta), (1.0, 1.0));
        assert_eq!(p.psi, PsiFunction::Power { gamma: 1.0 });

        let p = embed_kannan_to_pata(0.9).unwrap();
        assert!((p.lambda_cap - 0.45).abs() < 1e-15);
        match p.psi {
            PsiFunction::Power { gamma } => assert!((gamma - 0.111_111_111_111_111).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        assert!(matches!(embed_kannan_to_pata(0.0), Err(Error::Parameter(_))));
        assert!(matches!(embed_kannan_to_pata(1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn threshold_embedding_shapes() {
        let p = embed_kannan_threshold(2.0 / 3.0).unwrap();
        assert_eq!(p.psi.eval(0.3), 0.0);
        assert!((p.psi.eval(0.5) - 0.5).abs() < 1e-12);
        assert_eq!(p.psi.eval(0.9), 1.0);

        // lambda < 1/2: psi stops short of 1
        let p = embed_kannan_threshold(0.25).unwrap();
        assert!((p.psi.eval(1.0) - 1.0 / 3.0).abs() < 1e-12);

        let p = embed_kannan_threshold(0.0).unwrap();
        assert_eq!(p.psi.eval(1.0), 0.0);

        assert!(embed_kannan_threshold(1.0).is_err());
    }

    #[test]
    fn threshold_psi_dominates_required_weight() {
        // needed: eps * psi(eps) >= eps - (1 - lambda), checked densely
        for i in 1..100 {
            let lambda = i as f64 / 100.0;
            let p = embed_kannan_threshold(lambda).unwrap();
            for j in 0..=10_000 {
                let e = j as f64 / 10_000.0;
                let need = e - (1.0 - lambda);
                assert!(e * p.psi.eval(e) >= need - 1e-14, "lambda {lambda} eps {e}");
            }
        }
    }

    #[test]
    fn bernoulli_examples() {
        let one = EpsilonGrid::restricted(vec![1.0]).unwrap();
        for lambda in [0.1, 0.5, 0.9] {
            let r = bernoulli_check(lambda, &one, TOL_BERNOULLI).unwrap();
            assert!(r.pass);
            assert_eq!(r.max_slack_violation, 0.0);
        }
        let zero = EpsilonGrid::restricted(vec![0.0]).unwrap();
        let r = bernoulli_check(0.5, &zero, TOL_BERNOULLI).unwrap();
        assert_eq!(r.max_slack_violation, -1.0);

        // 1 + (0.25 - 1)/0.5 = -0.5 against 0.25^2 = 0.0625
        let q = EpsilonGrid::restricted(vec![0.25]).unwrap();
        let r = bernoulli_check(0.5, &q, TOL_BERNOULLI).unwrap();
        assert!((r.max_slack_violation - (-0.5 - 0.0625)).abs() < 1e-15);

        assert!(bernoulli_check(0.0, &q, TOL_BERNOULLI).is_err());
    }
}
