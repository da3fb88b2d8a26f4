//! Picard iteration, trajectory certificates, and the multi-start
//! uniqueness probe.

mod bounds;
mod probe;
mod trajectory;

pub use bounds::{
    bound_eval, check_norm_bound, check_p_step_bound, check_step_bound, check_step_monotonicity,
    envelope, residual_bound, BoundParams, StepBoundCertificate,
};
pub use probe::{uniqueness_probe, UniquenessProbe};
pub use trajectory::{iterate, orbit, SolveResult, StopReason, Trajectory};
