//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sector: L={strings} is not admissible for N={points}")]
    InvalidSector { points: usize, strings: usize },

    #[error("invalid link state: {0}")]
    InvalidState(String),

    #[error("generator e_{index} out of range for N={points}")]
    GeneratorIndex { index: usize, points: usize },

    #[error("ring error: {0}")]
    Ring(String),

    #[error("enumeration budget exceeded: M*(N-1) = {bits} > {limit}; reduce N or M")]
    Budget { bits: usize, limit: usize },

    #[error("unexpected monomial `{0}` while splitting by winding")]
    UnexpectedMonomial(String),

    #[error("singular parameter: {0}")]
    Singular(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("q-number [{0}] vanishes at the chosen x")]
    DegenerateQNumber(usize),

    #[error("eigenvalue iteration did not converge after {0} steps")]
    NoConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
