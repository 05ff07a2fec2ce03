//! Linearization of germs `f = λI + F`, `F ∈ O_2`.
//!
//! Two constructions of the tangent-to-identity conjugacy `h` with
//! `h⁻¹ ∘ f ∘ h = λI` are provided: the order-by-order fixed point
//! [`linearize_direct`], and the quadratically convergent conjugation scheme
//! [`linearize_quadratic`] which also carries the radius schedule used to bound
//! the domain of convergence of `h` for multipliers on the unit circle.

mod direct;
mod homological;
mod hyperbolic;
mod quadratic;
mod schedule;
mod verify;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::germ;
use crate::json::complex_pair;
use crate::multipliers::{classify, Classification, DEFAULT_HORIZON, DEFAULT_TOLERANCE};
use crate::precise::conjugate_precise;
use crate::series::TruncatedSeries;

pub use direct::{direct_iteration, linearize_direct, DirectIteration};
pub use homological::{solve_homological, HomologicalOperator};
pub use hyperbolic::{
    hyperbolic_certificate, hyperbolic_omega, search_hyperbolic_certificate,
    HyperbolicCertificate, HyperbolicOmega,
};
pub use quadratic::{linearize_quadratic, QuadraticStage};
pub use schedule::{
    auto_r0, elliptic_schedule, stage_weight, EllipticSchedule, MAX_SCHEDULE_STAGES,
};
pub use verify::{verify_bounds, BoundsReport, StageBounds};

/// Numerical settings shared by the linearization routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Conjugacy residual must not exceed `residual_tol · (1 + max|h_m|)²`.
    pub residual_tol: f64,
    /// `|λ^m − λ|` at or below this is treated as a resonance.
    pub resonance_tol: f64,
    /// Minimum number of stages `K` in the elliptic radius schedule.
    pub schedule_stages: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            resonance_tol: DEFAULT_TOLERANCE,
            schedule_stages: 20,
        }
    }
}

impl Settings {
    /// Absolute residual tolerance for a conjugacy `h`.
    pub fn residual_bound(&self, h: &TruncatedSeries) -> f64 {
        self.residual_tol * (1.0 + h.max_abs()).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusCertificate {
    Hyperbolic(HyperbolicCertificate),
    Elliptic(EllipticSchedule),
}

/// Output of a linearization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizationResult {
    #[serde(with = "complex_pair")]
    pub lambda: Complex64,
    pub method: Method,
    /// `F`, the nonlinear part of the germ.
    pub nonlinearity: TruncatedSeries,
    /// `h = I + H`, with `h'(0) = 1`.
    pub h: TruncatedSeries,
    pub h_inverse: TruncatedSeries,
    /// Largest coefficient modulus of `[h⁻¹ ∘ f ∘ h − λI]_N`.
    pub residual: f64,
    pub tolerance: f64,
    /// Fixed-point iterations (direct) or conjugation stages (quadratic).
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<QuadraticStage>,
    pub certificate: Option<RadiusCertificate>,
}

impl LinearizationResult {
    pub fn converged(&self) -> bool {
        self.residual <= self.tolerance
    }

    pub fn schedule(&self) -> Option<&EllipticSchedule> {
        match &self.certificate {
            Some(RadiusCertificate::Elliptic(s)) => Some(s),
            _ => None,
        }
    }
}

/// Classifies `λ` and runs the matching construction: the direct iteration
/// with a majorant certificate when `|λ| ≠ 1`, the quadratic scheme with its
/// radius schedule when `|λ| = 1`. `r0 = None` takes [`auto_r0`].
pub fn linearize(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    r0: Option<f64>,
    settings: &Settings,
) -> Result<LinearizationResult> {
    match classify(lambda, DEFAULT_HORIZON, settings.resonance_tol).classification {
        Classification::Zero => Err(Error::ZeroMultiplier),
        Classification::RootOfUnity { period } => Err(Error::RootOfUnityDivisor { n: period }),
        Classification::Hyperbolic => {
            let mut result = linearize_direct(lambda, nonlinearity, settings)?;
            let tail = &result.h - &TruncatedSeries::identity(result.h.trunc_order());
            result.certificate =
                search_hyperbolic_certificate(lambda, nonlinearity, Some(&tail), settings)
                    .ok()
                    .map(RadiusCertificate::Hyperbolic);
            Ok(result)
        }
        Classification::Elliptic => {
            let r0 = match r0 {
                Some(r) => r,
                None => auto_r0(nonlinearity)?,
            };
            linearize_quadratic(lambda, nonlinearity, r0, settings)
        }
    }
}

/// `[h⁻¹ ∘ (λI + F) ∘ h − λI]_N`, with `h⁻¹` the inverse of `h` itself and all
/// compositions in extended precision.
pub fn conjugacy_defect(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    h: &TruncatedSeries,
) -> Result<TruncatedSeries> {
    let f = germ(lambda, nonlinearity);
    let conjugated = conjugate_precise(&f, h)?;
    let n = conjugated.trunc_order();
    Ok(&conjugated - &TruncatedSeries::monomial(n, 1, lambda))
}

/// Largest coefficient modulus of [`conjugacy_defect`].
pub fn conjugacy_residual(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    h: &TruncatedSeries,
) -> Result<f64> {
    Ok(conjugacy_defect(lambda, nonlinearity, h)?.max_abs())
}
