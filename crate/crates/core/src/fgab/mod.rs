//! Exact integer linear algebra: matrices, Smith normal form, and finitely generated
//! abelian groups.
//!
//! A `rows x cols` matrix is read as a map `Z^cols -> Z^rows`, so the cokernel is
//! `Z^rows / im(A)` with free rank `rows - rank(A)`.

mod group;
mod hnf;
mod matrix;
mod snf;

pub use group::{
    cokernel, exterior_power, kernel_basis, kernel_rank, lex_subsets, rank, FgAbGroup,
};
pub use hnf::{hermite_normal_form, lattice_contains};
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SnfDecomposition};
