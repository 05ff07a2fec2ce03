//! The radius schedule `r_0 > r_1 > ... → r_∞` attached to the quadratic scheme.
//!
//! With `α_k = Ω_{2^{k+1}}`, `a_k = min(1/10, 1/k²)` (`a_0 = 1/10`) and
//! `γ_k = (α_k a_k)^{2^{−k}}`:
//!
//! ```text
//! r_{k+1} = (1 − a_k) (1 + α_k a_k)⁻¹ (1 + a_k)⁻¹ γ_k r_k
//! ```
//!
//! Since `α_k ≤ 2`, the partial product is bounded below by
//! `C_K r_0 exp(−2 b_K(λ))` where
//! `C_K = Π_{k<K} (1 − a_k)(1 + 2a_k)⁻¹(1 + a_k)⁻¹ a_k^{2^{−k}}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multipliers::{dyadic_minima, BrunoEstimate, DEFAULT_TOLERANCE};
use crate::series::TruncatedSeries;

/// Largest supported stage count; `Ω_{2^K}` is found by streaming `2^K` powers.
pub const MAX_SCHEDULE_STAGES: usize = 34;

/// `a_k = min(1/10, 1/k²)`, with `a_0 = 1/10`.
pub fn stage_weight(k: usize) -> f64 {
    if k == 0 {
        0.1
    } else {
        (1.0 / (k * k) as f64).min(0.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticSchedule {
    pub r0: f64,
    #[serde(rename = "K")]
    pub k: usize,
    /// `α_k = Ω_{2^{k+1}}`, `k = 0..K`.
    pub alpha: Vec<f64>,
    /// `a_k`, `k = 0..K`.
    pub a: Vec<f64>,
    /// `γ_k`, `k = 0..K`.
    pub gamma: Vec<f64>,
    /// `r_0, ..., r_K`.
    pub radii: Vec<f64>,
    /// `r_K`, the `K`-stage partial product standing in for `r_∞`.
    pub r_infinity: f64,
    pub c_partial: f64,
    pub bruno: BrunoEstimate,
    /// `C_K r_0 exp(−2 b_K(λ))`.
    pub bruno_bound: f64,
}

impl EllipticSchedule {
    /// `r_K ≥ C_K r_0 exp(−2 b_K)`, up to rounding in the two products.
    pub fn bound_holds(&self) -> bool {
        self.r_infinity >= self.bruno_bound * (1.0 - 1e-12)
    }

    /// `Π_{k<K} α_k^{2^{−k}}`, the multiplier-dependent factor of `r_K / r_0`.
    pub fn divisor_factor(&self) -> f64 {
        self.alpha
            .iter()
            .enumerate()
            .map(|(k, a)| 0.5f64.powi(k as i32) * a.ln())
            .sum::<f64>()
            .exp()
    }
}

pub fn elliptic_schedule(lambda: Complex64, r0: f64, k: usize) -> Result<EllipticSchedule> {
    if (lambda.norm() - 1.0).abs() > DEFAULT_TOLERANCE {
        return Err(Error::NotElliptic);
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    if k == 0 || k > MAX_SCHEDULE_STAGES {
        return Err(Error::InvalidParameter(format!(
            "stage count must lie in 1..={MAX_SCHEDULE_STAGES}, got {k}"
        )));
    }
    let minima = dyadic_minima(lambda, k as u32);
    let mut alpha = Vec::with_capacity(k);
    let mut a = Vec::with_capacity(k);
    let mut gamma = Vec::with_capacity(k);
    let mut radii = Vec::with_capacity(k + 1);
    radii.push(r0);
    let mut c_partial = 1.0;
    for stage in 0..k {
        let alpha_k = minima[stage + 1];
        if alpha_k <= DEFAULT_TOLERANCE {
            return Err(Error::ScheduleCollapse { stage });
        }
        let a_k = stage_weight(stage);
        let dyadic = 0.5f64.powi(stage as i32);
        let gamma_k = (alpha_k * a_k).powf(dyadic);
        let r_k = radii[stage];
        radii.push((1.0 - a_k) / (1.0 + alpha_k * a_k) / (1.0 + a_k) * gamma_k * r_k);
        c_partial *= (1.0 - a_k) / (1.0 + 2.0 * a_k) / (1.0 + a_k) * a_k.powf(dyadic);
        alpha.push(alpha_k);
        a.push(a_k);
        gamma.push(gamma_k);
    }
    let bruno = BrunoEstimate::from_dyadic_minima(&minima, k)?;
    let bruno_bound = c_partial * r0 * (-2.0 * bruno.partial_sum).exp();
    Ok(EllipticSchedule {
        r0,
        k,
        alpha,
        a,
        gamma,
        r_infinity: radii[k],
        radii,
        c_partial,
        bruno,
        bruno_bound,
    })
}

/// Largest `r ∈ {2^{−j} : j = 0..60}` with `F̂(r) ≤ r`.
pub fn auto_r0(nonlinearity: &TruncatedSeries) -> Result<f64> {
    let f_hat = nonlinearity.majorant();
    (0..=60)
        .map(|j| 0.5f64.powi(j))
        .find(|&r| matches!(f_hat.eval(r), Ok(v) if v <= r))
        .ok_or(Error::NoValidRadius)
}
