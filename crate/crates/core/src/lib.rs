//! Eigenspace perturbation of Reynolds stresses for turbulence-model
//! uncertainty quantification.
//!
//! The crate is organised bottom-up:
//!
//! - [`tensor`]: Reynolds stress algebra, anisotropy eigensystems and the
//!   barycentric realizability map.
//! - [`perturb`]: shifts of the barycentric point (toward a corner, by a learned
//!   magnitude, or by a componentwise correction) and reassembly of the stress.
//! - [`rotation`]: intrinsic z-y'-x'' Tait-Bryan angles between eigenvector frames.
//! - [`features`]: normalized flow features fed to the regression forest.
//! - [`forest`]: bagged CART regression forest with multi-output leaves.
//! - [`channel`]: 1D fully developed channel solver (SST k-omega) with
//!   Reynolds-stress injection.
//! - [`dns`]: reference profile ingestion, interpolation and training targets.
//! - [`pipeline`]: training and propagation workflows built on the above.

pub mod channel;
pub mod dns;
pub mod error;
pub mod features;
pub mod forest;
pub mod matrix;
pub mod perturb;
pub mod pipeline;
pub mod rotation;
pub mod tensor;

pub use error::{Error, ErrorKind, Result};
pub use matrix::Matrix;
