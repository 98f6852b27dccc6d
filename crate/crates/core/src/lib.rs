//! Exact symbolic preprocessing for F4-style Groebner basis computation over
//! prime fields.
//!
//! Batches of shifted reducers `t * g` are compiled into a write-once sparse
//! Macaulay matrix through a deterministic bulk pipeline
//! (count -> scan -> fill -> sort/unique -> join). The resulting matrix is then
//! reduced by panel-structured elimination or probed for left-kernel relations
//! with Wiedemann iterations.
//!
//! Module map:
//!
//! - [`fp_arith`]: residues mod `p < 2^31` with naive, Barrett and Montgomery
//!   reduction and a lazy accumulation window.
//! - [`monomial`]: exponent vectors, term orders and packed order-refining keys.
//! - [`poly`]: sparse polynomials, the structure-of-arrays set, text parsing.
//! - [`bulk`]: deterministic scan, radix sort, unique, merge join, compaction.
//! - [`fbsp`]: the two-pass symbolic preprocessing compiler.
//! - [`sparse_linalg`]: CSR matrices, elimination, SpMM, Wiedemann, kernels.
//! - [`groebner`]: S-polynomials, pair handling, the F4 loop and a reference
//!   Buchberger oracle.
//! - [`bench`]: benchmark families, system files, reports, microbenchmarks.

pub mod bench;
pub mod bulk;
mod error;
pub mod fbsp;
pub mod fp_arith;
pub mod groebner;
pub mod monomial;
pub mod poly;
pub mod rng;
pub mod sparse_linalg;

pub use error::{Error, Result};
pub use fp_arith::{Backend, Domain, FieldModulus, FpElem};
pub use monomial::{MonKey, Monomial, Ring, TermOrder};
pub use poly::{Poly, SoaPolySet};
