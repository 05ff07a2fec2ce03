use serde::Serialize;

use super::LinearizationResult;
use crate::error::{Error, Result};

/// Majorant inequalities of one conjugation stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageBounds {
    pub stage: usize,
    pub r_k: f64,
    pub r_next: f64,
    /// `F̂_k(r_k)`, required `≤ r_k`.
    pub f_hat_at_r_k: f64,
    /// `F̂_k(γ_k r_k)`, required `≤ a_k α_k γ_k r_k`.
    pub f_hat_at_gamma_r_k: f64,
    pub f_scaled_bound: f64,
    /// `P̂_k(r_{k+1})`, required `≤ a_k r_k ≤ r_k − r_{k+1}`.
    pub p_hat_at_r_next: f64,
    pub a_k_r_k: f64,
    pub gap: f64,
    pub f_bound_holds: bool,
    pub f_scaled_holds: bool,
    pub p_bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub stages: Vec<StageBounds>,
    pub r0: f64,
    pub r_infinity: f64,
    /// `ĥ(r_∞)`, required `≤ r_0`.
    pub h_hat_at_r_infinity: f64,
    pub h_bound_holds: bool,
}

impl BoundsReport {
    pub fn all_hold(&self) -> bool {
        self.h_bound_holds
            && self
                .stages
                .iter()
                .all(|s| s.f_bound_holds && s.f_scaled_holds && s.p_bound_holds)
    }
}

/// Evaluates the radius-schedule inequalities on the computed truncations.
///
/// Truncation only drops nonnegative terms from each majorant, so a failure
/// here is a genuine failure of the bound.
pub fn verify_bounds(result: &LinearizationResult) -> Result<BoundsReport> {
    let schedule = result.schedule().ok_or_else(|| {
        Error::InvalidParameter("bounds need the radius schedule of a quadratic run".into())
    })?;
    if schedule.k < result.stages.len() {
        return Err(Error::InvalidParameter(format!(
            "schedule has {} stages but the run has {}",
            schedule.k,
            result.stages.len()
        )));
    }
    let mut stages = Vec::with_capacity(result.stages.len());
    for st in &result.stages {
        let k = st.stage;
        let (r_k, r_next) = (schedule.radii[k], schedule.radii[k + 1]);
        let (a_k, alpha_k, gamma_k) = (schedule.a[k], schedule.alpha[k], schedule.gamma[k]);
        let f_hat = st.nonlinearity.majorant();
        let f_hat_at_r_k = f_hat.eval(r_k)?;
        let f_hat_at_gamma_r_k = f_hat.eval(gamma_k * r_k)?;
        let f_scaled_bound = a_k * alpha_k * gamma_k * r_k;
        let p_hat_at_r_next = st.correction.majorant().eval(r_next)?;
        let a_k_r_k = a_k * r_k;
        let gap = r_k - r_next;
        stages.push(StageBounds {
            stage: k,
            r_k,
            r_next,
            f_hat_at_r_k,
            f_hat_at_gamma_r_k,
            f_scaled_bound,
            p_hat_at_r_next,
            a_k_r_k,
            gap,
            f_bound_holds: f_hat_at_r_k <= r_k,
            f_scaled_holds: f_hat_at_gamma_r_k <= f_scaled_bound,
            p_bound_holds: p_hat_at_r_next <= a_k_r_k && a_k_r_k <= gap,
        });
    }
    let h_hat_at_r_infinity = result.h.majorant().eval(schedule.r_infinity)?;
    Ok(BoundsReport {
        stages,
        r0: schedule.r0,
        r_infinity: schedule.r_infinity,
        h_hat_at_r_infinity,
        h_bound_holds: h_hat_at_r_infinity <= schedule.r0,
    })
}
