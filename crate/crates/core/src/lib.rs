//! Local state discrimination versus global properties of bipartite ensembles.
//!
//! The numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the CLI and the acceptance
//! suite use.

// `!(x > 0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod discrimination;
pub mod eig;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod scalar;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};
pub use scalar::{Scalar, Tolerances};

pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type PureState = quantum::PureState<f64>;
pub type Povm = quantum::Povm<f64>;
pub type BipartiteEnsemble = ensembles::BipartiteEnsemble<f64>;
pub type ChshBoundResult = bounds::ChshBoundResult<f64>;
pub type MeasurementAssignment = seesaw::MeasurementAssignment<f64>;
pub type SdpProblem = sdp::SdpProblem<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
