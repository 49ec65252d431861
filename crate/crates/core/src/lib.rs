//! Computational laboratory for the arithmetic Demailly approximation on the
//! projective line over the integers.
//!
//! The pieces build on each other:
//!
//! * [`projective`]: points, quadrature on the sphere, Fubini–Study type
//!   metrics and section norms.
//! * [`bergman`]: orthonormal bases, Bergman kernels and the power-sum
//!   sequence whose normalized log-norms approach zero.
//! * [`lattice`]: the lattice of integral sections under the sup-norm, with
//!   exact ball enumeration, densities, minima and rounding.
//! * [`finite_field`]: smooth divisor densities over prime fields.
//! * [`arakelov`]: heights of closed points and intersection numbers computed
//!   from a single section.
//! * [`experiments`]: good-section search and the essential-minimum
//!   inequality experiment.
//! * [`cli`] and [`report`]: the `demailly-lab` batch runner.
//!
//! Conventions: a form of degree `n` stores `coeffs[k]` for `z0^k z1^(n-k)`;
//! the Fubini–Study measure has total mass one; a twist `eps` multiplies
//! degree-`n` norms by `exp(-eps n)` and adds `eps` to heights.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arakelov;
pub mod bergman;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod finite_field;
pub mod form;
pub mod lattice;
pub mod projective;
pub mod report;
pub mod roots;
pub mod verify;
pub mod zpoly;

pub use error::{Error, Result};
