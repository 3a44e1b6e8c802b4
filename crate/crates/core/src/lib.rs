//! Generalized inverses of complex square matrices, with an emphasis on the
//! weighted core-EP inverse, plus a randomized verification harness.

pub mod certificate;
pub mod classic;
pub mod error;
pub mod format;
pub mod harness;
mod lstsq;
pub mod matrix;
pub mod solver;
pub mod svd;
pub mod tolerance;
pub mod weighted;

pub use certificate::{InverseCertificate, InverseKind, Residual};
pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};
pub use tolerance::ToleranceConfig;
pub use weighted::WeightedPair;
