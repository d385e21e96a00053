// `!(x <= tol)` rejects NaN deviations; keep that form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod born;
pub mod dynamics;
pub mod error;
pub mod gleason;
pub mod lattice;
pub mod matrix;
pub mod povm;
pub mod random;
pub mod report;
pub mod scenario;
pub mod tolerance;

pub use error::{Error, Result};
pub use matrix::{
    mat_exp_hermitian, partial_trace, tensor_product, validate, ComplexMatrix, DensityMatrix,
    HermitianMatrix, OperatorKind, ProjectorMatrix, Subsystem, UnitaryMatrix, C64,
};
pub use report::{Check, ValidationReport};
pub use tolerance::Tolerances;
