//! Analysis of single-block factors of finite-state Markov chains.
//!
//! A stationary Markov chain `X` on a subshift of finite type is observed
//! through a symbol-wise code `Y_n = π(X_n)`. This crate decides when the
//! observed process is Markov (lumpability), when the fibres `π⁻¹(y)` mix,
//! computes the conditional probabilities `ν(y_0 | y_1 … y_n)` of the observed
//! process exactly, and evaluates the fibre-disintegration representation of
//! its `g`-function together with finite-depth probes of the conditional
//! measures on fibres.
//!
//! All arithmetic is generic over [`Scalar`]: use [`Ratio`] for exact
//! equality tests (lumpability, normalization, closed forms) and `f64` for
//! long words and searches.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conditionals;
pub mod disintegration;
mod error;
pub mod factor;
pub mod markov;
pub mod matrix;
pub mod scalar;
pub mod sft;
pub mod zoo;

pub use conditionals::FactorProcess;
pub use error::{Error, Result};
pub use factor::{FactorMap, FactorSystem, FibreWindow, MixingVerdict};
pub use markov::{MarkovModel, StochasticMatrix};
pub use matrix::{BitMatrix, Matrix};
pub use scalar::{Ratio, Scalar};
pub use sft::{Alphabet, SubshiftSpec, Word};
