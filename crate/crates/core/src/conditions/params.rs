use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kannan constant `lambda` in `d(Tx, Ty) <= lambda/2 (d(x, Tx) + d(y, Ty))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KannanParams {
    lambda: f64,
}

impl KannanParams {
    /// A Kannan constant, `0 <= lambda < 1`.
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(Error::Parameter(format!("kannan lambda {lambda} not in [0, 1)")))
        }
    }

    /// A probing bound `0 <= lambda <= 1`. `lambda = 1` is the epsilon = 0
    /// instance of the generalized condition.
    pub fn probe(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(Error::Parameter(format!("probe lambda {lambda} not in [0, 1]")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Weight `psi: [0, 1] -> [0, inf)` of the perturbation term.
///
/// Must vanish at 0, be nondecreasing, and tend to 0 from the right.
/// Tabulated functions are linearly interpolated between knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PsiFunction {
    Power { gamma: f64 },
    Tabulated { knots: Vec<(f64, f64)> },
}

impl PsiFunction {
    pub fn power(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Parameter(format!("psi power {gamma} must be positive")));
        }
        Ok(PsiFunction::Power { gamma })
    }

    /// Knots `(eps, value)` with eps strictly increasing from 0 to 1.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Parameter(format!("tabulated psi: {msg}")));
        if knots.len() < 2 {
            return bad("needs at least two knots");
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return bad("knots must span [0, 1]");
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return bad("knot abscissae must increase strictly");
        }
        if knots.iter().any(|(_, v)| !v.is_finite() || *v < 0.0) {
            return bad("values must be finite and nonnegative");
        }
        let psi = PsiFunction::Tabulated { knots };
        psi.check_invariants()?;
        Ok(psi)
    }

    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            PsiFunction::Power { gamma } => eps.powf(*gamma),
            PsiFunction::Tabulated { knots } => {
                let e = eps.clamp(0.0, 1.0);
                let i = knots.partition_point(|(k, _)| *k <= e);
                if i == 0 {
                    return knots[0].1;
                }
                if i == knots.len() {
                    return knots[knots.len() - 1].1;
                }
                let (e0, v0) = knots[i - 1];
                let (e1, v1) = knots[i];
                v0 + (v1 - v0) * (e - e0) / (e1 - e0)
            }
        }
    }

    /// psi(0) = 0 and nondecreasing on a 1001-point grid. Tabulated
    /// functions must also satisfy psi(10^-k) < 1e-3 for some k <= 12.
    pub fn check_invariants(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::Parameter("psi(0) must be 0".into()));
        }
        let mut prev = 0.0;
        for i in 0..=1000 {
            let v = self.eval(i as f64 / 1000.0);
            if v < prev {
                return Err(Error::Parameter(format!(
                    "psi decreases near eps = {}",
                    i as f64 / 1000.0
                )));
            }
            prev = v;
        }
        if matches!(self, PsiFunction::Tabulated { .. })
            && !(1..=12).any(|k| self.eval(10f64.powi(-k)) < 1e-3)
        {
            return Err(Error::Parameter("psi does not vanish at 0+".into()));
        }
        Ok(())
    }
}

/// Constants `(Lambda, alpha, beta, psi)` of the Pata-type perturbation
/// `Lambda eps^alpha psi(eps) [1 + norms]^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PataParams {
    #[serde(rename = "Lambda")]
    pub lambda_cap: f64,
    pub alpha: f64,
    pub beta: f64,
    pub psi: PsiFunction,
}

impl PataParams {
    /// Requires `Lambda >= 0`, `alpha >= 1`, `beta >= 0`. The tighter
    /// `beta <= alpha` needed by the two-point condition is checked by
    /// [`PataParams::ensure_beta_le_alpha`].
    pub fn new(lambda_cap: f64, alpha: f64, beta: f64, psi: PsiFunction) -> Result<Self> {
        if !(lambda_cap.is_finite() && lambda_cap >= 0.0) {
            return Err(Error::Parameter(format!("Lambda {lambda_cap} must be >= 0")));
        }
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::Parameter(format!("alpha {alpha} must be >= 1")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Parameter(format!("beta {beta} must be >= 0")));
        }
        psi.check_invariants()?;
        Ok(Self {
            lambda_cap,
            alpha,
            beta,
            psi,
        })
    }

    pub fn ensure_beta_le_alpha(&self) -> Result<()> {
        if self.beta > self.alpha {
            Err(Error::Parameter(format!(
                "beta {} exceeds alpha {}",
                self.beta, self.alpha
            )))
        } else {
            Ok(())
        }
    }

    /// `Lambda eps^alpha psi(eps) bracket^beta`.
    pub fn perturbation(&self, eps: f64, bracket: f64) -> f64 {
        if self.lambda_cap == 0.0 || eps == 0.0 {
            return 0.0;
        }
        self.lambda_cap * eps.powf(self.alpha) * self.psi.eval(eps) * bracket.powf(self.beta)
    }
}

/// Finite surrogate for `eps in [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    /// `n` uniform values `0, 1/(n-1), ..., 1`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("epsilon grid needs >= 2 values, got {n}")));
        }
        let last = (n - 1) as f64;
        Ok(Self {
            values: (0..n).map(|i| i as f64 / last).collect(),
        })
    }

    /// Full grid: nondecreasing values in [0, 1], first 0, last 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let g = Self::restricted(values)?;
        if g.values[0] != 0.0 || g.values[g.values.len() - 1] != 1.0 {
            return Err(Error::Parameter("epsilon grid must start at 0 and end at 1".into()));
        }
        Ok(g)
    }

    /// Probe grid over part of [0, 1], e.g. the singleton `{0}`.
    pub fn restricted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument("empty epsilon grid".into()));
        }
        if values.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::Parameter("epsilon values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter("epsilon values must be nondecreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn positive(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|e| *e > 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        Self::uniform(crate::tolerances::DEFAULT_GRID).expect("default grid")
    }
}
