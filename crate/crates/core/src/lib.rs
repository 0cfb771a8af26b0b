//! Pluriharmonic mappings of the unit ball of C^n: evaluation, distortion
//! and covering bounds, linear-invariant families, and seeded verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod extremal;
pub mod lif;
pub mod linalg;
pub mod mapfile;
pub mod mapping;
pub mod numerics;
pub mod report;
pub mod verify;

pub use bounds::{BoundParams, RootResult};
pub use error::{Error, Result};
pub use extremal::{build_extremal, ExtremalFamily, ExtremalSpec};
pub use lif::{BallAutomorphism, KoebeTransform, OrderBudget, OrderEstimate};
pub use linalg::{CMatrix, Matrix, RMatrix, SingularSpectrum};
pub use mapping::{BilinearForm, ClosedFormModel, HolomorphicModel, MapModel, MultiIndex, PolynomialModel};
pub use num_complex::Complex64;
pub use report::{CheckEntry, Summary, VerificationReport};
pub use verify::SampleConfig;
