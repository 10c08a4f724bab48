//! Threshold function secret sharing toolkit.
//!
//! * [`field`]: prime-field arithmetic, polynomials and Lagrange interpolation.
//! * [`shamir`]: t-out-of-n Shamir sharing of elements and vectors.
//! * [`khprf`]: the key-homomorphic PRF interface and standard PRF/PRP primitives.
//! * [`dpf`]: n-out-of-n and t-out-of-n multi-evaluation distributed point functions.
//! * [`fpcds`]: function-private conditional disclosure of secrets with share refresh.
//! * [`fss`]: the compiler from function-private CDS to function secret sharing.
//! * [`poly_fss`]: threshold function secret sharing of polynomials.
//! * [`harness`]: protocol simulation, transcripts and distinguishing experiments.
//!
//! The bundled key-homomorphic PRF, [`khprf::LinearKhPrf`], is linear in its
//! key and therefore **not** a pseudorandom function. It satisfies the
//! homomorphism laws exactly and is meant for correctness testing. Arithmetic
//! is not constant time.

pub mod bits;
pub mod dpf;
pub mod encoding;
pub mod error;
pub mod field;
pub mod fpcds;
pub mod fss;
pub mod group;
pub mod harness;
pub mod khprf;
pub mod poly_fss;
pub mod primitives;
pub mod sampling;
pub mod shamir;

pub use bits::BitString;
pub use error::{Error, Result};
pub use field::{FieldElement, FieldVector, PrimeField};
