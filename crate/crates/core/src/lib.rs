//! Generation, certification and counting of MDS and involutory MDS
//! matrices over finite fields through the representative-matrix
//! decomposition `M = D1 * M1 * D2`.
//!
//! Module map:
//! - [`gf`]: arithmetic in F_{p^m}.
//! - [`matlin`]: dense square matrices, determinants, minors, diagonal sandwiches.
//! - [`mdscheck`]: MDS, involutory and representative predicates.
//! - [`decomp`]: the diagonal decomposition and involutory certificates.
//! - [`enumerate`]: streams and parallel, checkpointed counters.
//! - [`counting`]: closed-form counts, tabulated 4x4 counts and verification.

pub mod counting;
pub mod decomp;
pub mod enumerate;
pub mod error;
pub mod gf;
pub mod matlin;
pub mod mdscheck;

pub use error::{Error, ErrorKind, Result};
pub use gf::{Elem, Field, FieldSpec};
pub use matlin::{DiagonalMatrix, SquareMatrix};
