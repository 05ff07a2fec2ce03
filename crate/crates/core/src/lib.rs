//! Truncated complex power series and constructive linearization of
//! holomorphic germs `f(z) = λz + O(z²)` fixing the origin.
//!
//! The crate is organized bottom-up:
//!
//! - [`series`]: dense truncated series with certified order bounds;
//! - [`composition`]: composition `f ∘ g` for `g(0) = 0`;
//! - [`inversion`]: compositional inverses and their majorant bounds;
//! - [`multipliers`]: classification of `λ`, small divisors, Bruno sums;
//! - [`precise`]: extended-precision compositions for residual checks;
//! - [`linearization`]: the conjugacy `h` with `h⁻¹ ∘ f ∘ h = λI`, radius
//!   certificates and the stage-wise radius schedule;
//! - [`cli`]: the `koenigs` command-line front end.

pub mod cli;
pub mod composition;
pub mod error;
pub mod inversion;
pub mod json;
pub mod linearization;
pub mod multipliers;
pub mod precise;
pub mod series;

pub use composition::{compose, power};
pub use error::{Error, Result};
pub use inversion::{invert, invert_series};
pub use linearization::{
    linearize, linearize_direct, linearize_quadratic, LinearizationResult, Settings,
};
pub use multipliers::{classify, multiplier_from_angle, Classification, Multiplier};
pub use series::{MajorantSeries, TruncatedSeries};
