//! Compositional inverse of `f = λI + F` with `F ∈ O_2`.
//!
//! The inverse is `λ⁻¹I + G` where `G ∈ O_2` solves the fixed point
//! `G = −μ F ∘ (μI + G)`, `μ = λ⁻¹`. The polynomial iterates
//! `G̃_k = [−μ F ∘ (μI + G̃_{k−1})]_k` differ from one another by a single
//! term of degree `k`, so each step only computes that new coefficient.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::composition::compose;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Splits a germ `f` with `f(0) = 0` into its multiplier `λ = f'(0)` and `F = f − λI ∈ O_2`.
pub fn split_germ(f: &TruncatedSeries) -> Result<(Complex64, TruncatedSeries)> {
    if f.coeff(0) != ZERO {
        return Err(Error::NotAGerm {
            expected: "f(0) = 0".into(),
            reason: format!("constant term {}", f.coeff(0)),
        });
    }
    let lambda = f.coeff(1);
    let mut coeffs = f.coeffs().to_vec();
    if coeffs.len() > 1 {
        coeffs[1] = ZERO;
    }
    let nonlinearity = TruncatedSeries::new(coeffs, 2.min(f.trunc_order() + 1))?;
    Ok((lambda, nonlinearity))
}

/// `λI + F` at the working order of `F`.
pub fn germ(lambda: Complex64, nonlinearity: &TruncatedSeries) -> TruncatedSeries {
    let n = nonlinearity.trunc_order();
    &TruncatedSeries::monomial(n, 1, lambda) + nonlinearity
}

fn check_nonlinearity(nonlinearity: &TruncatedSeries) -> Result<()> {
    if nonlinearity.order() < 2 {
        return Err(Error::NotInO2 {
            order: nonlinearity.order(),
        });
    }
    Ok(())
}

/// The `G ∈ O_2` part of `(λI + F)⁻¹ = λ⁻¹I + G`.
pub fn inverse_tail(lambda: Complex64, nonlinearity: &TruncatedSeries) -> Result<TruncatedSeries> {
    if lambda == ZERO {
        return Err(Error::ZeroMultiplier);
    }
    check_nonlinearity(nonlinearity)?;
    let n = nonlinearity.trunc_order();
    let mu = lambda.inv();
    let mut tail = vec![ZERO; n + 1];
    for k in 2..=n {
        let f_k = nonlinearity.truncate(k)?;
        let mut inner = tail[..=k].to_vec();
        inner[1] = mu;
        let inner = TruncatedSeries::from_coeffs(inner);
        tail[k] = -mu * compose(&f_k, &inner)?.coeff(k);
    }
    TruncatedSeries::new(tail, nonlinearity.order().min(n + 1))
}

/// Compositional inverse `λ⁻¹I + G` of `λI + F`.
pub fn invert(lambda: Complex64, nonlinearity: &TruncatedSeries) -> Result<TruncatedSeries> {
    let tail = inverse_tail(lambda, nonlinearity)?;
    let n = tail.trunc_order();
    Ok(&TruncatedSeries::monomial(n, 1, lambda.inv()) + &tail)
}

/// Inverse of a germ given as a single series with `f(0) = 0`, `f'(0) ≠ 0`.
pub fn invert_series(f: &TruncatedSeries) -> Result<TruncatedSeries> {
    let (lambda, nonlinearity) = split_germ(f)?;
    invert(lambda, &nonlinearity)
}

/// Majorant bound for the inverse: if `F̂(r) ≤ |λ|αr` then `Ĝ(|λ|(1−α)r) ≤ αr`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCertificate {
    pub r: f64,
    pub alpha: f64,
    pub lambda_mod: f64,
    /// `|λ|(1−α)r`.
    pub bound_point: f64,
    /// `αr`.
    pub bound_value: f64,
    /// `Ĝ(|λ|(1−α)r)` evaluated on the computed truncation.
    pub lhs: f64,
    /// Whether `F` is a polynomial that fits strictly inside the working order.
    /// For a truncated transcendental `F` the check is heuristic.
    pub rigorous: bool,
}

impl InverseCertificate {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound_value
    }
}

impl Serialize for InverseCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            r: f64,
            alpha: f64,
            lhs: f64,
            rhs: f64,
            rigorous: bool,
        }
        Wire {
            r: self.r,
            alpha: self.alpha,
            lhs: self.lhs,
            rhs: self.bound_value,
            rigorous: self.rigorous,
        }
        .serialize(s)
    }
}

/// A series fits as an exact polynomial if its top retained coefficient vanishes.
pub(crate) fn is_exact_polynomial(s: &TruncatedSeries) -> bool {
    s.coeff(s.trunc_order()) == ZERO
}

pub fn inverse_majorant_certificate(
    nonlinearity: &TruncatedSeries,
    lambda: Complex64,
    r: f64,
    alpha: f64,
) -> Result<InverseCertificate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let lambda_mod = lambda.norm();
    let hypothesis_lhs = nonlinearity.majorant().eval(r)?;
    let hypothesis_rhs = lambda_mod * alpha * r;
    if hypothesis_lhs > hypothesis_rhs {
        return Err(Error::HypothesisFailed {
            lhs: hypothesis_lhs,
            rhs: hypothesis_rhs,
        });
    }
    let tail = inverse_tail(lambda, nonlinearity)?;
    let bound_point = lambda_mod * (1.0 - alpha) * r;
    Ok(InverseCertificate {
        r,
        alpha,
        lambda_mod,
        bound_point,
        bound_value: alpha * r,
        lhs: tail.majorant().eval(bound_point)?,
        rigorous: is_exact_polynomial(nonlinearity),
    })
}
