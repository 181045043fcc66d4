//! Exact verification of BHK mirror pairs of K3 surfaces with a
//! non-symplectic automorphism of order 4, 8 or 12.
//!
//! The integer linear algebra in [`matrix`] and [`lattice`] is generic over
//! [`Scalar`]; the aliases below fix the arbitrary-precision instance used by
//! the verifier.

pub mod abelian;
pub mod curveconfig;
pub mod error;
pub mod invertible_poly;
pub mod lattice;
pub mod matrix;
pub mod quadform;
pub mod scalar;
pub mod symmetry_groups;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Int = num_bigint::BigInt;
pub type IntMatrix = matrix::Matrix<Int>;
pub type Lattice = lattice::GramLattice<Int>;
pub type Sublattice = lattice::AmbientSublattice<Int>;
