use thiserror::Error;

use crate::distance::DistanceError;
use crate::sig::SigError;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("message length {0} is too small for this code")]
    TTooSmall(usize),
    #[error("rate does not give an integral codeword length: {0}")]
    BadRate(String),
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("index {index} outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("target success probability is infeasible: {0}")]
    InfeasibleTarget(String),
    #[error("majority of an empty list")]
    EmptyList,
    #[error("attack {attack} exceeded its budget: {distance} > {budget}")]
    BudgetExceeded { attack: String, distance: f64, budget: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("locality bound violated: {queries} > {bound}")]
    BoundViolated { queries: u64, bound: u64 },
    #[error(transparent)]
    Signature(#[from] SigError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
