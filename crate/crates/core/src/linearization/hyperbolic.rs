use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{direct_iteration, Settings};
use crate::error::{Error, Result};
use crate::inversion::is_exact_polynomial;
use crate::series::TruncatedSeries;

const MAX_SCAN: usize = 1 << 24;

/// `ω = inf_{m≥2} |λ^m − λ|` with the last exponent scanned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicOmega {
    pub value: f64,
    pub scan_bound: usize,
}

/// Computes `ω` by a finite scan closed off by a tail bound.
///
/// For `|λ| > 1`, `|λ^m − λ| ≥ |λ|^m − |λ|`, which increases with `m`; the scan
/// runs at least to `⌈log(3|λ|)/log|λ|⌉` and stops once that lower bound passes
/// the running minimum. For `|λ| < 1`, `|λ^m − λ| ≥ |λ| − |λ|^m` and the values
/// tend to `|λ|`, so `ω = min(running minimum, |λ|)` once either the bound
/// passes the minimum or `|λ|^m` drops below the double-precision resolution.
pub fn hyperbolic_omega(lambda: Complex64, tol: f64) -> Result<HyperbolicOmega> {
    let rho = lambda.norm();
    if rho <= tol || (rho - 1.0).abs() <= tol {
        return Err(Error::NotHyperbolic);
    }
    let min_scan = if rho > 1.0 {
        ((3.0 * rho).ln() / rho.ln()).ceil().max(2.0) as usize
    } else {
        2
    };
    let mut best = f64::INFINITY;
    let mut power = lambda;
    let mut m = 1;
    while m < MAX_SCAN {
        m += 1;
        power *= lambda;
        best = best.min((power - lambda).norm());
        let next_modulus = rho.powi(m as i32 + 1);
        if m < min_scan {
            continue;
        }
        if rho > 1.0 {
            if next_modulus - rho >= best {
                return Ok(HyperbolicOmega {
                    value: best,
                    scan_bound: m,
                });
            }
        } else if rho - next_modulus >= best || next_modulus <= f64::EPSILON * rho {
            return Ok(HyperbolicOmega {
                value: best.min(rho),
                scan_bound: m,
            });
        }
    }
    Err(Error::InvalidParameter(format!(
        "|lambda| = {rho} is too close to 1 to bound omega within {MAX_SCAN} terms"
    )))
}

/// If `F̂(ω²r) ≤ αωr` with `α ∈ (0, ω²)`, then `Ĥ((ω²−α)r) ≤ αr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCertificate {
    pub omega: f64,
    pub scan_bound: usize,
    pub alpha: f64,
    pub r: f64,
    /// `(ω² − α)r`, a lower bound for the radius of convergence of `h`.
    pub radius: f64,
    /// `F̂(ω²r)`.
    pub hypothesis_lhs: f64,
    /// `αωr`.
    pub hypothesis_rhs: f64,
    /// `Ĥ((ω²−α)r)` on the computed truncation.
    pub lhs: f64,
    /// `αr`.
    pub bound_value: f64,
    pub rigorous: bool,
}

impl HyperbolicCertificate {
    pub fn holds(&self) -> bool {
        self.hypothesis_lhs <= self.hypothesis_rhs && self.lhs <= self.bound_value
    }
}

fn certificate_with_tail(
    omega: HyperbolicOmega,
    nonlinearity: &TruncatedSeries,
    tail: &TruncatedSeries,
    alpha: f64,
    r: f64,
) -> Result<HyperbolicCertificate> {
    let w = omega.value;
    let radius = (w * w - alpha) * r;
    Ok(HyperbolicCertificate {
        omega: w,
        scan_bound: omega.scan_bound,
        alpha,
        r,
        radius,
        hypothesis_lhs: nonlinearity.majorant().eval(w * w * r)?,
        hypothesis_rhs: alpha * w * r,
        lhs: tail.majorant().eval(radius)?,
        bound_value: alpha * r,
        rigorous: is_exact_polynomial(nonlinearity),
    })
}

fn check_alpha(omega: f64, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < omega * omega {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, omega^2) = (0, {}), got {alpha}",
            omega * omega
        )))
    }
}

pub fn hyperbolic_certificate(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    alpha: f64,
    r: f64,
    settings: &Settings,
) -> Result<HyperbolicCertificate> {
    let omega = hyperbolic_omega(lambda, settings.resonance_tol)?;
    check_alpha(omega.value, alpha)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let w = omega.value;
    let lhs = nonlinearity.majorant().eval(w * w * r)?;
    let rhs = alpha * w * r;
    if lhs > rhs {
        return Err(Error::HypothesisFailed { lhs, rhs });
    }
    let tail = direct_iteration(lambda, nonlinearity, settings)?.tail;
    certificate_with_tail(omega, nonlinearity, &tail, alpha, r)
}

/// Certificate with `α = ω²/2` and the largest `r = 2^{−j}`, `j ≤ 60`,
/// satisfying the hypothesis. `tail` is `H` if already computed.
pub fn search_hyperbolic_certificate(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    tail: Option<&TruncatedSeries>,
    settings: &Settings,
) -> Result<HyperbolicCertificate> {
    let omega = hyperbolic_omega(lambda, settings.resonance_tol)?;
    let w = omega.value;
    let alpha = w * w / 2.0;
    let f_hat = nonlinearity.majorant();
    let r = (0..=60)
        .map(|j| 0.5f64.powi(j))
        .find(|&r| matches!(f_hat.eval(w * w * r), Ok(v) if v <= alpha * w * r))
        .ok_or(Error::NoValidRadius)?;
    let computed;
    let tail = match tail {
        Some(t) => t,
        None => {
            computed = direct_iteration(lambda, nonlinearity, settings)?.tail;
            &computed
        }
    };
    certificate_with_tail(omega, nonlinearity, tail, alpha, r)
}
