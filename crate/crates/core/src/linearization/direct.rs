use num_complex::Complex64;

use super::{conjugacy_residual, HomologicalOperator, LinearizationResult, Method, Settings};
use crate::composition::compose;
use crate::error::{Error, Result};
use crate::inversion::invert;
use crate::series::TruncatedSeries;

/// Iterates of `H_{k+1} = L_λ⁻¹(F ∘ (I + H_k))` from `H_1 = 0`.
#[derive(Debug, Clone)]
pub struct DirectIteration {
    /// The stabilized `H`.
    pub tail: TruncatedSeries,
    /// Order of `H_{k+1} − H_k` for each iteration, read off the exact zeros.
    /// The final entry is `N + 1`: the iteration stopped on a zero update.
    pub update_orders: Vec<usize>,
}

/// Runs the fixed point until an update vanishes at the working order.
///
/// Coefficient `m` of an iterate depends only on coefficients below `m` of
/// the previous one, so the iteration stabilizes bit for bit after at most
/// `N` steps.
pub fn direct_iteration(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    settings: &Settings,
) -> Result<DirectIteration> {
    if nonlinearity.order() < 2 {
        return Err(Error::NotInO2 {
            order: nonlinearity.order(),
        });
    }
    let n = nonlinearity.trunc_order();
    let op = HomologicalOperator::new(lambda, n, settings.resonance_tol)?;
    let id = TruncatedSeries::identity(n);
    let mut tail = TruncatedSeries::zero(n);
    let mut update_orders = Vec::new();
    for _ in 0..=n + 1 {
        let next = op.solve(&compose(nonlinearity, &(&id + &tail))?)?;
        let update = TruncatedSeries::from_coeffs((&next - &tail).into_coeffs());
        tail = next;
        update_orders.push(update.order());
        if update.is_zero() {
            break;
        }
    }
    Ok(DirectIteration {
        tail,
        update_orders,
    })
}

/// `h = I + H` by the fixed-point iteration, with its inverse and residual.
pub fn linearize_direct(
    lambda: Complex64,
    nonlinearity: &TruncatedSeries,
    settings: &Settings,
) -> Result<LinearizationResult> {
    let iteration = direct_iteration(lambda, nonlinearity, settings)?;
    let n = nonlinearity.trunc_order();
    let h = &TruncatedSeries::identity(n) + &iteration.tail;
    let h_inverse = invert(Complex64::new(1.0, 0.0), &iteration.tail)?;
    let residual = conjugacy_residual(lambda, nonlinearity, &h)?;
    Ok(LinearizationResult {
        lambda,
        method: Method::Direct,
        nonlinearity: nonlinearity.clone(),
        tolerance: settings.residual_bound(&h),
        h,
        h_inverse,
        residual,
        iterations: iteration.update_orders.len(),
        stages: Vec::new(),
        certificate: None,
    })
}
