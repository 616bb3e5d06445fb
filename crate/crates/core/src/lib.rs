//! Exact construction of graded Cartan-type Lie algebras over finite fields.
//!
//! The crate builds the Witt, special, Hamiltonian, and contact algebras on a
//! divided power algebra in finitely many variables, each variable truncated
//! at a chosen p-power height. All arithmetic is exact. Everything downstream
//! of the field layer is deterministic: canonical bases, ordered maps, and
//! seeded sampling, so repeated runs produce identical output.

pub mod cartan;
pub mod derivations;
pub mod dpalgebra;
pub mod field;
pub mod generation;
pub mod grammar;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod structure;
pub mod suites;

pub use field::{Field, FieldError, Scalar};
pub use linalg::{Matrix, Subspace};
pub use poly::Poly;
