//! Laplace-domain analysis of linear time-invariant systems.
//!
//! The crate works on two closed signal classes:
//!
//! - [`TimeExpr`]: finite sums of gated modes `c·(t−a)ⁿ·e^(λ(t−a))·u(t−a)`,
//! - [`LaplaceExpr`]: finite sums of `e^(−a·s)·F(s)` with `F` a proper rational function.
//!
//! [`laplace::transform`] and [`laplace::inverse`] move between them exactly,
//! [`lerch`] decides equality of transforms, [`systems`] derives transfer
//! functions from linear ODEs and back, and [`crosstalk`] applies all of it to
//! the coupled 2-π RC interconnect model. Every symbolic result can be checked
//! against the independent numerical routines in [`oracle`].

pub mod algebra;
pub mod cli;
pub mod crosstalk;
mod error;
pub mod laplace;
pub mod lerch;
pub mod oracle;
pub mod systems;
pub mod timefun;

pub use algebra::{Polynomial, RationalFunction, RootSet};
pub use error::{Error, Result};
pub use laplace::{LaplaceExpr, LaplaceTerm};
pub use num_complex::Complex64;
pub use systems::{SystemSpec, TransferFunction};
pub use timefun::{GrowthBound, Mode, TimeExpr};
