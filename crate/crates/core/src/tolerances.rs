//! Default tolerances and run sizes.
//!
//! Every threshold used by the certificates and the acceptance battery lives
//! here. The inequalities being checked are all non-strict and exact, so the
//! tolerances only need to absorb floating-point rounding.

/// Slack allowed on the metric axioms (identity, symmetry, triangle).
pub const TOL_METRIC: f64 = 1e-12;

/// Slack allowed on contractive-condition and trajectory-bound certificates.
pub const TOL_CERT: f64 = 1e-10;

/// Picard stopping threshold on the step distance d(x_n, x_{n+1}).
pub const TOL_FIX: f64 = 1e-12;

/// Residual allowed on a catalog-declared fixed point.
pub const TOL_KNOWN_FIXED_POINT: f64 = 1e-12;

/// Slack allowed on the Bernoulli inequality sweep.
pub const TOL_BERNOULLI: f64 = 1e-12;

/// Allowed slack for the power-embedding check: no violations at all.
pub const TOL_EMBEDDING: f64 = 0.0;

pub const MAX_STEPS: usize = 100_000;

/// Number of uniform values in the default epsilon grid (0, 0.01, ..., 1).
pub const DEFAULT_GRID: usize = 101;

/// Random pairs drawn per sample set.
pub const DEFAULT_PAIRS: usize = 10_000;

/// Random points drawn per sample set.
pub const DEFAULT_POINTS: usize = 1_000;

/// Number of seeded starts for multi-start solves.
pub const DEFAULT_STARTS: usize = 10;

/// Steps in the fixed-horizon orbits used for trajectory certificates
/// (step distances d_0 through d_200).
pub const DEFAULT_HORIZON: usize = 201;

pub const DEFAULT_SEED: u64 = 20_121_119;

/// Envelope level the flagship map must reach by the end of its orbit.
pub const ENVELOPE_TARGET: f64 = 1e-6;

/// Multi-start limits must agree to within this distance.
pub const TOL_LIMIT_AGREEMENT: f64 = 1e-8;

/// Residual d(Tx*, x*) allowed on a converged solve in the acceptance battery.
pub const TOL_RESIDUAL: f64 = 1e-10;
