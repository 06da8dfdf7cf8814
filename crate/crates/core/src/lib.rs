//! Exact arithmetic for non-Archimedean and p-adic functional Welch bounds.
//!
//! Scalars are exact rationals (valued p-adically) or Laurent polynomials
//! over `Q` (valued t-adically). Absolute values are represented through
//! their valuations, so no floating point appears anywhere.

pub mod linalg;
pub mod scalar;
pub mod search;
pub mod symtensor;
pub mod welch;

pub use linalg::{frame_operator, gram, FrameConfig, Matrix};
pub use scalar::{AbsValue, Backend, Prime, Rational, Scalar, Valuation};
pub use symtensor::{sym_dim, sym_frame_operator};
pub use welch::{check_bound, check_unital, BoundReport, Variant, Verdict};
