//! Gradient-tracking consensus optimization over time-varying, weight-balanced
//! digraphs with sector-bound link nonlinearities (for example logarithmically
//! quantized data exchange), together with the spectral machinery used to
//! certify stability of the coupled dynamics and an experiment harness.

pub mod eigen;
pub mod graph;
pub mod harness;
pub mod nonlinearity;
pub mod dynamics;
pub mod objectives;
pub mod linalg;
pub mod scalar;
pub mod spectral;

pub use scalar::Scalar;

/// Concrete double-precision aliases; the harness and CLI work in these.
pub type Graph64 = graph::DirectedWeightedGraph<f64>;
pub type Laplacian64 = graph::LaplacianMatrix<f64>;
pub type Schedule64 = graph::SwitchingSchedule<f64>;
pub type Nonlinearity64 = nonlinearity::LinkNonlinearity<f64>;
pub type Objective64 = objectives::LocalObjective<f64>;
pub type Suite64 = objectives::NodeCostSuite<f64>;
pub type State64 = dynamics::SimState<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type System64 = spectral::CompactSystem<f64>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("QR iteration failed to converge with {remaining} eigenvalues left")]
    EigenNoConvergence { remaining: usize },

    #[error("zero eigenvalue of the Laplacian is not simple (multiplicity {multiplicity})")]
    ZeroEigenvalueNotSimple { multiplicity: usize },

    #[error("non-finite gradient or Hessian at node {node}")]
    NonFiniteDerivative { node: usize },

    #[error("state diverged at t = {t}: |state|_inf = {norm}")]
    Divergence { t: f64, norm: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
