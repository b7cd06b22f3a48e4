//! Numerical analytic continuation of the Picard-Fuchs operator and recovery of the
//! integral monodromy representation.

pub mod integral;
pub mod paths;
pub mod roots;
pub mod taylor;

use rayon::prelude::*;
use thiserror::Error;

pub use integral::{integral_structure, IntegralStructure};
pub use paths::{build_distinguished_loops, PathPlan, Pt};
pub use roots::numeric_roots;
pub use taylor::{FactoredFunction, Mat2C, NumOperator, Transport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("root iteration did not converge")]
    RootsFailed,
    #[error("path comes too close to a singular point")]
    StepTooClose,
    #[error("operator has order {0}, expected 2")]
    Order(usize),
    #[error("integral lattice recovery failed: {0}")]
    LatticeRecoveryFailure(String),
    #[error("all vanishing cycles are proportional")]
    ProportionalVanishingCycles,
}

/// Extra working bits on top of the requested accuracy.
pub fn guard_bits(prec: u32) -> u32 {
    prec / 10 + 30
}

/// Bits needed for `digits` decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}

/// Transition matrix of every loop of the plan, in loop order.
pub fn numeric_monodromy(op: &NumOperator, plan: &PathPlan) -> Result<Vec<Mat2C>, ContinuationError> {
    plan.loops.par_iter().map(|l| op.transition_matrix(l)).collect()
}

/// Per-loop transition matrices with the integrals of `forms` along each loop.
pub fn loop_transports(op: &NumOperator, plan: &PathPlan, forms: &[FactoredFunction]) -> Result<Vec<Transport>, ContinuationError> {
    plan.loops.par_iter().map(|l| op.transport(l, forms)).collect()
}
