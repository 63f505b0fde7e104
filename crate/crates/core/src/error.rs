//! Crate-wide error type.

use thiserror::Error;

use crate::grid::Edge;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter domain: {0}")]
    InvalidDomain(String),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("invalid profile curve: {0}")]
    InvalidProfile(String),

    #[error("coordinate singularity at (alpha, beta) = ({alpha}, {beta}): |r_beta| = {a2} below the pole threshold")]
    PoleSingularity { alpha: f64, beta: f64, a2: f64 },

    #[error("chart is not orthogonal at (alpha, beta) = ({alpha}, {beta}): |e1.e2| = {dot}")]
    NonOrthogonalChart { alpha: f64, beta: f64, dot: f64 },

    #[error("grid too coarse for residual derivatives: need at least {min} nodes per direction, got {n_alpha} x {n_beta}")]
    GridTooCoarse { min: usize, n_alpha: usize, n_beta: usize },

    #[error("fields live on different domains ({0})")]
    DomainMismatch(String),

    #[error("edge {edge:?} is not a boundary edge: {reason}")]
    EdgeNotBoundary { edge: Edge, reason: String },

    #[error("degenerate metric on deformed surface at node ({i}, {j}): |R_alpha x R_beta| = {norm}")]
    DegenerateMetric { i: usize, j: usize, norm: f64 },

    #[error("profile degenerated during flow: f = {f} <= 0 at interior sample {index}")]
    DegenerateProfile { index: usize, f: f64 },

    #[error("backtracking exhausted at step {step}: energy increased even at step size {step_size}")]
    StepRejected { step: usize, step_size: f64 },

    #[error("error at grid node ({i}, {j}): {source}")]
    AtNode {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the grid node where it occurred.
    pub fn at_node(self, i: usize, j: usize) -> Error {
        Error::AtNode { i, j, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
