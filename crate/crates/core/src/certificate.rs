use serde::{Deserialize, Serialize};

use crate::metric::Point;

/// Location of the worst sample found by a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A sampled pair, optionally with the epsilon at which it was evaluated.
    Pair {
        x: Point,
        y: Point,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Triple { x: Point, y: Point, z: Point },
    Point { x: Point },
    /// A trajectory index, with the look-ahead `p` and epsilon where relevant.
    Step {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Bernoulli { lambda: f64, eps: f64 },
    /// Two runs of a multi-start probe, by start index.
    Starts { i: usize, j: usize },
}

impl Witness {
    pub fn pair(&self) -> Option<(&Point, &Point)> {
        match self {
            Witness::Pair { x, y, .. } => Some((x, y)),
            _ => None,
        }
    }
}

/// Outcome of checking an inequality over a finite sample.
///
/// `max_slack_violation` is the largest `lhs - rhs` seen; positive values are
/// violations. `pass` holds exactly when it does not exceed the tolerance the
/// check was run with. The one exception is an inconclusive report (a
/// multi-start probe whose runs did not all converge), which never passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub condition_id: String,
    pub pass: bool,
    pub max_slack_violation: f64,
    pub witness: Option<Witness>,
    pub samples_checked: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
}

impl CertificateReport {
    pub fn new(
        condition_id: impl Into<String>,
        max_slack_violation: f64,
        witness: Option<Witness>,
        samples_checked: usize,
        tol: f64,
    ) -> Self {
        Self {
            condition_id: condition_id.into(),
            pass: max_slack_violation <= tol,
            max_slack_violation,
            witness,
            samples_checked,
            inconclusive: false,
        }
    }

    pub fn inconclusive(condition_id: impl Into<String>, samples_checked: usize) -> Self {
        Self {
            condition_id: condition_id.into(),
            pass: false,
            max_slack_violation: f64::NAN,
            witness: None,
            samples_checked,
            inconclusive: true,
        }
    }
}

/// Running maximum of slacks keyed by sample index.
///
/// NaN slacks count as infinite violations. Ties keep the lower index, so the
/// result does not depend on the order in which partial maxima are merged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Worst {
    pub slack: f64,
    pub index: usize,
}

impl Worst {
    pub const EMPTY: Worst = Worst {
        slack: f64::NEG_INFINITY,
        index: usize::MAX,
    };

    pub fn at(slack: f64, index: usize) -> Self {
        let slack = if slack.is_nan() { f64::INFINITY } else { slack };
        Worst { slack, index }
    }

    pub fn merge(self, other: Worst) -> Worst {
        if other.slack > self.slack || (other.slack == self.slack && other.index < self.index) {
            other
        } else {
            self
        }
    }

    pub fn is_empty(&self) -> bool {
        self.index == usize::MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_prefers_larger_then_lower_index() {
        let a = Worst::at(1.0, 5);
        let b = Worst::at(1.0, 2);
        let c = Worst::at(0.5, 0);
        assert_eq!(a.merge(b), b);
        assert_eq!(b.merge(a), b);
        assert_eq!(c.merge(a).merge(b), b);
        assert_eq!(Worst::EMPTY.merge(c), c);
    }

    #[test]
    fn nan_counts_as_violation() {
        let w = Worst::at(f64::NAN, 3).merge(Worst::at(1e300, 0));
        assert_eq!(w.index, 3);
        let r = CertificateReport::new("x", w.slack, None, 2, 1e-10);
        assert!(!r.pass);
    }

    #[test]
    fn report_json_field_order() {
        let r = CertificateReport::new(
            "kannan",
            0.25,
            Some(Witness::Pair {
                x: Point::scalar(1.0),
                y: Point::scalar(0.0),
                eps: None,
            }),
            3,
            1e-10,
        );
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"condition_id":"kannan","pass":false,"max_slack_violation":0.25,"witness":{"kind":"pair","x":[1.0],"y":[0.0]},"samples_checked":3}"#
        );
    }
}
