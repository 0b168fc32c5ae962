//! Monodromy data of rank-one linear systems `dY/dz = (A0 + A1/z) Y`.
//!
//! The irregular singularity at infinity is studied through the Fuchsian
//! system `(A0 - lambda) Psi' = (A1 + I) Psi` obtained by Laplace transform.
//! The crate builds Frobenius bases at every pole (all resonance cases),
//! continues them through the cut plane to obtain connection coefficients,
//! and assembles monodromy matrices, Stokes matrices and Stokes factors.
//! The [`oracle`] module computes the same Stokes data independently by
//! integrating the original system from asymptotic anchors.
#![allow(clippy::needless_range_loop)] // index loops mirror the matrix formulas
#![warn(missing_docs)]

pub mod continuation;
mod error;
pub mod frame;
pub mod linalg;
pub mod local;
pub mod monodromy;
pub mod oracle;
pub mod pipeline;
pub mod sample;
pub mod system;
pub mod taylor;

pub use continuation::{connection_matrix, ConnectionMatrix, ContinuationPath};
pub use error::{Error, Result};
pub use frame::{critical_directions, BranchPoint, CriticalDirections, DirectionFrame};
pub use local::{build_local_basis, LocalBasis};
pub use monodromy::MonodromyData;
pub use system::{classify, validate_system, CaseTag, RankOneSystem};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

/// `2 pi i`.
pub const TWO_PI_I: C64 = C64::new(0.0, std::f64::consts::TAU);
