//! Convertibility of two-mode Gaussian states under local Gaussian
//! completely positive maps.
//!
//! States are 4×4 covariance matrices in the ordering `(x1, p1, x2, p2)`.
//! Each state is summarised by an invariant vector `ξ = (ξ1, ξ2, ξ3, ξ4)`,
//! and all decisions are made on those vectors.

pub mod criteria;
pub mod error;
pub mod gmaps;
pub mod matkernel;
pub mod oracle;
pub mod states;

pub use criteria::{
    compare, decide_general, decide_local_1, decide_local_2, DecideOptions, DegenerateMode,
    Relation, Route, TransformDecision, Witness,
};
pub use error::{Error, Result};
pub use gmaps::GaussianCPMap;
pub use states::{CovarianceMatrix, InvariantVector};
