//! Quadratically convergent conjugation scheme.
//!
//! Starting from `F_0 = F`, each stage solves the homological equation to
//! twice the current order, `P_k = [L_λ⁻¹ F_k]_{2^{k+1}}`, and conjugates:
//! `F_{k+1} = (I + P_k)⁻¹ ∘ (λI + F_k) ∘ (I + P_k) − λI`. Then
//! `F_k ∈ O_{1+2^k}`, `P_k ∈ O_{1+2^k}`, and `h_k = (I + P_0) ∘ ... ∘ (I + P_{k−1})`
//! agrees with the conjugacy `h` up to degree `2^k`.

use std::cmp::min;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    conjugacy_residual, elliptic_schedule, HomologicalOperator, LinearizationResult, Method,
    RadiusCertificate, Settings,
};
use crate::composition::compose;
use crate::error::{Error, Result};
use crate::inversion::{germ, invert};
use crate::series::TruncatedSeries;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// One conjugation stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticStage {
    pub stage: usize,
    /// `F_k`.
    pub nonlinearity: TruncatedSeries,
    /// `P_k`.
    pub correction: TruncatedSeries,
    /// `h_k`, the conjugacy accumulated before this stage.
    pub conjugacy: TruncatedSeries,
    /// Largest round-off residue zeroed when certifying `F_{k+1} ∈ O_{1+2^{k+1}}`.
    pub discarded: f64,
    /// Largest coefficient modulus of `F_{k+1}`, the residual after this stage.
    pub residual: f64,
}

impl QuadraticStage {
    /// `order_of(F_k)`.
    pub fn f_order(&self) -> usize {
        self.nonlinearity.order()
    }

    /// Degree of `P_k` (0 for `P_k = 0`).
    pub fn p_degree(&self) -> usize {
        self.correction.degree().unwrap_or(0)
    }
}

/// Number of stages `k` with `1 + 2^k ≤ N`.
pub(crate) fn stage_count(trunc_order: usize) -> usize {
    (0..usize::BITS as usize)
        .take_while(|&k| 1 + (1usize << k) <= trunc_order)
        .count()
}

pub fn linearize_quadratic(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    r0: f64,
    settings: &Settings,
) -> Result<LinearizationResult> {
    if nonlinearity.order() < 2 {
        return Err(Error::NotInO2 {
            order: nonlinearity.order(),
        });
    }
    if (lambda.norm() - 1.0).abs() > settings.resonance_tol {
        return Err(Error::NotElliptic);
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!("r0 must be positive, got {r0}")));
    }
    let f_at_r0 = nonlinearity.majorant().eval(r0)?;
    if f_at_r0 > r0 {
        return Err(Error::HypothesisFailed {
            lhs: f_at_r0,
            rhs: r0,
        });
    }

    let n = nonlinearity.trunc_order();
    let op = HomologicalOperator::new(lambda, n, settings.resonance_tol)?;
    let count = stage_count(n);
    let schedule = elliptic_schedule(lambda, r0, settings.schedule_stages.max(count))?;

    let id = TruncatedSeries::identity(n);
    let linear = TruncatedSeries::monomial(n, 1, lambda);
    let mut f_k = nonlinearity.clone();
    let mut h_k = id.clone();
    let mut stages = Vec::with_capacity(count);
    for k in 0..count {
        debug_assert!(f_k.order() > 1 << k);
        let p_k = op
            .solve(&f_k)?
            .truncate(min(1 << (k + 1), n))?
            .with_trunc_order(n);
        let id_plus_p = &id + &p_k;
        let inverse = invert(ONE, &p_k)?;
        let conjugated = compose(&inverse, &compose(&germ(lambda, &f_k), &id_plus_p)?)?;
        let (f_next, discarded) =
            (&conjugated - &linear).force_order(min(n + 1, 1 + (1 << (k + 1))));
        let h_next = compose(&h_k, &id_plus_p)?;
        stages.push(QuadraticStage {
            stage: k,
            residual: f_next.max_abs(),
            nonlinearity: std::mem::replace(&mut f_k, f_next),
            correction: p_k,
            conjugacy: std::mem::replace(&mut h_k, h_next),
            discarded,
        });
    }

    let h = h_k;
    let h_inverse = invert(ONE, &(&h - &id))?;
    let residual = conjugacy_residual(lambda, nonlinearity, &h)?;
    Ok(LinearizationResult {
        lambda,
        method: Method::Quadratic,
        nonlinearity: nonlinearity.clone(),
        tolerance: settings.residual_bound(&h),
        h,
        h_inverse,
        residual,
        iterations: stages.len(),
        stages,
        certificate: Some(RadiusCertificate::Elliptic(schedule)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::{auto_r0, linearize_direct};
    use crate::multipliers::multiplier_from_angle;

    fn golden() -> Complex64 {
        multiplier_from_angle((5f64.sqrt() - 1.0) / 2.0)
    }

    fn quadratic_map(n: usize) -> TruncatedSeries {
        TruncatedSeries::monomial(n, 2, ONE)
    }

    #[test]
    fn stage_counts() {
        assert_eq!(stage_count(1), 0);
        assert_eq!(stage_count(2), 1);
        assert_eq!(stage_count(3), 2);
        assert_eq!(stage_count(33), 6);
        assert_eq!(stage_count(64), 6);
        assert_eq!(stage_count(65), 7);
    }

    #[test]
    fn zero_nonlinearity() {
        let r = linearize_quadratic(golden(), &TruncatedSeries::zero(16), 1.0, &Settings::default())
            .unwrap();
        assert_eq!(r.h, TruncatedSeries::identity(16));
        assert!(r.stages.iter().all(|s| s.correction.is_zero()));
        assert_eq!(r.residual, 0.0);
        let schedule = r.schedule().unwrap();
        assert_eq!(schedule.radii.len(), 21);
    }

    #[test]
    fn agrees_with_direct_construction() {
        let f = quadratic_map(33);
        let s = Settings::default();
        let q = linearize_quadratic(golden(), &f, auto_r0(&f).unwrap(), &s).unwrap();
        let d = linearize_direct(golden(), &f, &s).unwrap();
        for m in 0..=33 {
            let (a, b) = (q.h.coeff(m), d.h.coeff(m));
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1e-300), "m = {m}: {a} vs {b}");
        }
        assert_eq!(q.h.coeff(1), ONE);
    }

    #[test]
    fn structural_orders_and_quadratic_convergence() {
        let f = quadratic_map(65);
        let r = linearize_quadratic(golden(), &f, 1.0, &Settings::default()).unwrap();
        assert_eq!(r.stages.len(), 7);
        for st in &r.stages {
            let k = st.stage;
            assert!(st.f_order() >= 1 + (1 << k));
            assert!(st.correction.order() >= 1 + (1 << k) || st.correction.is_zero());
            assert!(st.p_degree() <= 1 << (k + 1));
            let upto = min(1 << k, 65);
            for m in 0..=upto {
                let (a, b) = (st.conjugacy.coeff(m), r.h.coeff(m));
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0), "stage {k}, m = {m}");
            }
        }
    }

    #[test]
    fn stage_decomposition_identity() {
        // F_{k+1} = λP_k + F_k ∘ (I + P_k) + R_k ∘ (λI + F_k) ∘ (I + P_k), I + R_k = (I + P_k)⁻¹
        let n = 24;
        let lambda = golden();
        let f = &quadratic_map(n) + &TruncatedSeries::monomial(n, 3, Complex64::new(0.2, -0.1));
        let r = linearize_quadratic(lambda, &f, auto_r0(&f).unwrap(), &Settings::default()).unwrap();
        let id = TruncatedSeries::identity(n);
        for (k, st) in r.stages.iter().enumerate() {
            let next = r.stages.get(k + 1).map(|s| s.nonlinearity.clone());
            let id_plus_p = &id + &st.correction;
            let r_k = &invert(ONE, &st.correction).unwrap() - &id;
            let inner = compose(&germ(lambda, &st.nonlinearity), &id_plus_p).unwrap();
            let rhs = &(&st.correction.scale(lambda) + &compose(&st.nonlinearity, &id_plus_p).unwrap())
                + &compose(&r_k, &inner).unwrap();
            // the stage coefficients grow like r^{-m}; round-off is relative to them
            let scale = 1.0 + rhs.max_abs().max(st.nonlinearity.max_abs()).max(st.correction.max_abs());
            if let Some(next) = next {
                for m in 0..=n {
                    assert!((next.coeff(m) - rhs.coeff(m)).norm() <= 1e-12 * scale, "stage {k}, m = {m}");
                }
            } else {
                assert!(rhs.max_abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = quadratic_map(16);
        let s = Settings::default();
        assert_eq!(
            linearize_quadratic(golden(), &f, 2.0, &s).unwrap_err(),
            Error::HypothesisFailed { lhs: 4.0, rhs: 2.0 }
        );
        assert_eq!(
            linearize_quadratic(Complex64::new(2.0, 0.0), &f, 1.0, &s).unwrap_err(),
            Error::NotElliptic
        );
        assert_eq!(
            linearize_quadratic(Complex64::new(0.0, 1.0), &f, 1.0, &s).unwrap_err(),
            Error::ResonantDivisor { m: 5 }
        );
    }
}
