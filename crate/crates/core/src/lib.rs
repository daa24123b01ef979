//! Schur products, norms and Toeplitz/Schur multipliers for matrices whose
//! entries are operators on a finite-dimensional Hilbert space `H = C^d`.
//!
//! Infinite matrices are studied through their finite `N × M` truncations.
//! Quantities with no closed-form algorithm (weak-ℓ² norms, multiplier
//! norms, semivariations) are reported as certified lower bounds; upper bounds
//! come from the variation of a measure or from an exact norm.

pub mod block;
pub mod error;
pub mod gallery;
pub mod io;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod rng;
pub mod toeplitz;
pub mod torus;
pub mod verify;

pub type C64 = num_complex::Complex<f64>;

pub use block::{sot_norm_seq, weak_l2_norm, HSeq, IndexMask, OpMatrix, Side};
pub use error::{Error, Result};
pub use measure::{Atom, Density, HMeasure, LazyKind, Measure, OpMeasure, VinfNorm};
pub use operator::{pairing_j, rank_one, HVector, Operator, TensorElement};
pub use torus::{Grid, TrigPoly, TrigPoly2};
