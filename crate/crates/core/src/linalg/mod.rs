//! Dense complex linear algebra: matrices, Hermitian eigensolver, QR, and the trace/operator norms.

mod eigen;
mod matrix;
mod qr;

pub use eigen::{
    hermitian_eigensystem, hermitian_eigensystem_with, operator_norm, trace_norm, EigenSystem,
};
pub use matrix::{inner, norm2, ComplexMatrix, HermitianMatrix};
pub use qr::{qr_decompose, qr_unitary_factor};
