//! Sparse shift-invert eigensolvers with adaptive inner-solve tolerances.
//!
//! The crate computes the eigenvalue of a large sparse complex matrix
//! nearest a target `sigma`, together with its eigenvector, by inner-outer
//! iteration: shift-invert residual Arnoldi (SIRA), fixed-target
//! Jacobi-Davidson (JD) and shift-invert Arnoldi (SIA), each pairing an
//! outer subspace iteration with preconditioned GMRES inner solves. The
//! `theory` module verifies the angle identities and error bounds that
//! justify the adaptive inner tolerances on dense instances with
//! brute-force oracles.
//!
//! All numerics are generic over the underlying real scalar (f32/f64)
//! through [`scalar::Real`]; concrete aliases for the common f64
//! instantiation live at the crate root.

pub mod dense;
pub mod eig;
pub mod gmres;
pub mod ilut;
pub mod matgen;
pub mod mm;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod theory;
pub mod vecops;

pub use scalar::{Cx, Real};

/// Complex scalar over f64.
pub type C64 = Cx<f64>;
/// Complex scalar over f32.
pub type C32 = Cx<f32>;

pub type SparseMatrix64 = sparse::SparseMatrix<f64>;
pub type SparseMatrix32 = sparse::SparseMatrix<f32>;
pub type DenseMatrix64 = dense::DenseMatrix<f64>;
pub type DenseMatrix32 = dense::DenseMatrix<f32>;
pub type RitzSet64 = eig::RitzSet<f64>;
pub type IlutFactors64 = ilut::IlutFactors<f64>;
pub type OuterConfig64 = solver::OuterConfig<f64>;
pub type ConvergenceRecord64 = solver::ConvergenceRecord<f64>;
