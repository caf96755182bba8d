//! Randomized identification of structural parameters in tree-shaped linear
//! structural causal models.
//!
//! Every non-root node `i` of a tree model carries one parameter, the
//! coefficient `λ` of the edge from its parent. [`identify::run_identification`]
//! decides for each of them whether it is generically identifiable from the
//! covariance matrix, identifiable up to two values, or unidentifiable, and
//! returns closed forms `(p + q·√s) / (r + t·√s)` in the covariances for the
//! first two cases.

pub mod cli;
pub mod covariance;
pub mod cyclefind;
pub mod error;
pub mod fastp;
pub mod identify;
pub mod model;
pub mod oracle;
pub mod pit;
pub mod probe;
pub mod rank;
pub mod ring;

pub use error::{IdentError, ModelError, OracleError, PitError};
pub use identify::{run_identification, IdentConfig, IdentReport, Status};
pub use model::{MissingEdge, NodeId, TreeScm};
