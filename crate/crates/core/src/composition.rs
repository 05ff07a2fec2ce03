//! Composition of truncated series.

use std::cmp::min;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// `g^k` at the working order of `g`; `g^0 = 1`.
pub fn power(g: &TruncatedSeries, k: usize) -> TruncatedSeries {
    let mut acc = TruncatedSeries::one(g.trunc_order());
    let mut base = g.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// `f ∘ g` for `g ∈ O_1`, truncated at the smaller working order.
///
/// Horner nesting `(((f_d g + f_{d-1}) g + ...) g + f_n) g^n`, where `n` is the
/// order of `f`. Coefficients of `f` above `N / order(g)` cannot reach degree
/// `N` and are skipped. The result lies in `O_{n·order(g)}`.
pub fn compose(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    if g.coeff(0) != Complex64::new(0.0, 0.0) {
        return Err(Error::ConstantTermNonzero);
    }
    let n = min(f.trunc_order(), g.trunc_order());
    let g = g.with_trunc_order(n);
    let f_order = f.order();
    if f_order > n {
        return Ok(TruncatedSeries::zero(n));
    }
    // g.order() >= 1 here; it is n + 1 for the zero truncation
    let reach = n / g.order();
    let top = match f.degree() {
        Some(d) => min(min(d, n), reach),
        None => return Ok(TruncatedSeries::zero(n)),
    };
    if top < f_order {
        return Ok(TruncatedSeries::zero(n));
    }
    let mut acc = TruncatedSeries::constant(n, f.coeff(top));
    for i in (f_order..top).rev() {
        acc = (&acc * &g).add_constant(f.coeff(i));
    }
    for _ in 0..f_order {
        acc = &acc * &g;
    }
    Ok(acc)
}

/// Discrepancy between the truncated composition and nested evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionCheck {
    /// `[f ∘ g]_N(z)`.
    #[serde(with = "crate::json::complex_pair")]
    pub composed: Complex64,
    /// `f(g(z))` with both partial sums.
    #[serde(with = "crate::json::complex_pair")]
    pub nested: Complex64,
    pub discrepancy: f64,
    /// `f̂(ĝ(|z|))`, the summability witness.
    pub majorant_value: f64,
    /// Bound on the terms of degree `> N` dropped by the truncated composition,
    /// plus a rounding allowance.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Compares `[f ∘ g]_N(z)` with `f(g(z))`.
///
/// The truncations `[f]_N` and `[g]_N` are polynomials, so `f(g(z))` equals the
/// full polynomial composition; the truncated composition drops only its terms
/// of degree above `N`, which are bounded by the matching tail of `f̂ ∘ ĝ` at `|z|`.
pub fn eval_composition_check(
    f: &TruncatedSeries,
    g: &TruncatedSeries,
    z: Complex64,
) -> Result<CompositionCheck> {
    let n = min(f.trunc_order(), g.trunc_order());
    let f = f.with_trunc_order(n);
    let g = g.with_trunc_order(n);
    let f_hat = f.majorant();
    let g_hat = g.majorant();
    let majorant_value = f_hat.eval(g_hat.eval(z.norm())?)?;

    let composed = compose(&f, &g)?.eval(z);
    let nested = f.eval(g.eval(z));
    let discrepancy = (composed - nested).norm();

    let truncated_majorant = compose(&f_hat.to_series(), &g_hat.to_series())?
        .majorant()
        .eval(z.norm())?;
    let tail = (majorant_value - truncated_majorant).max(0.0);
    let rounding = 8.0 * (n as f64 + 1.0).powi(2) * f64::EPSILON * majorant_value;
    let tolerance = tail + rounding;
    Ok(CompositionCheck {
        composed,
        nested,
        discrepancy,
        majorant_value,
        tolerance,
        within_tolerance: discrepancy <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_in(rng: &mut ChaCha8Rng, n: usize, order: usize, scale: f64) -> TruncatedSeries {
        let coeffs = (0..=n)
            .map(|k| {
                if k < order {
                    c(0.0, 0.0)
                } else {
                    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
                }
            })
            .collect();
        TruncatedSeries::new(coeffs, order).unwrap()
    }

    /// Composition by the defining formula `Σ_k f_k (g^k)_m`.
    fn compose_by_powers(f: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
        let n = f.trunc_order();
        let mut out = vec![c(0.0, 0.0); n + 1];
        for k in 0..=n {
            let gk = power(g, k);
            for (m, slot) in out.iter_mut().enumerate() {
                *slot += f.coeff(k) * gk.coeff(m);
            }
        }
        TruncatedSeries::from_coeffs(out)
    }

    #[test]
    fn power_cases() {
        assert_eq!(power(&TruncatedSeries::identity(5), 3), TruncatedSeries::monomial(5, 3, ONE));
        let g = TruncatedSeries::from_real(&[0.0, 2.0, 3.0]);
        assert_eq!(power(&g, 0), TruncatedSeries::one(2));
        let one_plus_z = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            power(&one_plus_z, 2),
            TruncatedSeries::from_real(&[1.0, 2.0, 1.0, 0.0, 0.0])
        );
        let z2 = TruncatedSeries::monomial(10, 2, ONE);
        assert_eq!(power(&z2, 4).order(), 8);
        assert_eq!(power(&z2, 6).order(), 11);
    }

    #[test]
    fn compose_cases() {
        let z2 = TruncatedSeries::monomial(4, 2, ONE);
        let two_z = TruncatedSeries::monomial(4, 1, c(2.0, 0.0));
        assert_eq!(compose(&z2, &two_z).unwrap(), TruncatedSeries::monomial(4, 2, c(4.0, 0.0)));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_in(&mut rng, 10, 0, 1.0);
        let g = random_in(&mut rng, 10, 1, 1.0);
        let id = TruncatedSeries::identity(10);
        assert_eq!(compose(&f, &id).unwrap(), f);
        assert_eq!(compose(&id, &g).unwrap(), g);

        let geometric = TruncatedSeries::from_real(&[1.0; 9]);
        let z_sq = TruncatedSeries::monomial(8, 2, ONE);
        let expected = TruncatedSeries::from_real(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(compose(&geometric, &z_sq).unwrap(), expected);
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = TruncatedSeries::identity(3);
        let g = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(compose(&f, &g), Err(Error::ConstantTermNonzero));
    }

    #[test]
    fn horner_matches_power_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for order_g in 1..4 {
            let f = random_in(&mut rng, 14, 0, 1.0);
            let g = random_in(&mut rng, 14, order_g, 1.0);
            let a = compose(&f, &g).unwrap();
            let b = compose_by_powers(&f, &g);
            for m in 0..=14 {
                assert!((a.coeff(m) - b.coeff(m)).norm() <= 1e-10 * (1.0 + b.coeff(m).norm()));
            }
        }
    }

    #[test]
    fn composition_order_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, k) in [(2, 1), (2, 3), (3, 2), (4, 4), (0, 2)] {
            let f = random_in(&mut rng, 16, n, 1.0);
            let g = random_in(&mut rng, 16, k, 1.0);
            let fg = compose(&f, &g).unwrap();
            assert_eq!(fg.order(), min(17, n * k));
        }
    }

    #[test]
    fn composition_check_cases() {
        // f = 1/(1-z), g = z/(1-z), truncated at 32
        let f = TruncatedSeries::from_real(&[1.0; 33]);
        let mut g_coeffs = vec![1.0; 33];
        g_coeffs[0] = 0.0;
        let g = TruncatedSeries::from_real(&g_coeffs);
        let report = eval_composition_check(&f, &g, c(0.1, 0.0)).unwrap();
        assert!(report.discrepancy < 1e-10);
        assert!(report.within_tolerance);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = random_in(&mut rng, 12, 0, 1.0);
        let id = TruncatedSeries::identity(12);
        let report = eval_composition_check(&f, &id, c(0.3, -0.2)).unwrap();
        assert_eq!(report.discrepancy, 0.0);

        let z2 = TruncatedSeries::monomial(2, 2, ONE);
        let two_z = TruncatedSeries::monomial(2, 1, c(2.0, 0.0));
        let report = eval_composition_check(&z2, &two_z, c(1.0, 1.0)).unwrap();
        assert_eq!(report.composed, c(0.0, 8.0));
        assert_eq!(report.nested, c(0.0, 8.0));
        assert_eq!(report.discrepancy, 0.0);
    }

    #[test]
    fn composition_check_detects_divergence() {
        let f = TruncatedSeries::from_real(&[1.0; 60]);
        let g = TruncatedSeries::monomial(59, 1, c(1e200, 0.0));
        assert_eq!(
            eval_composition_check(&f, &g, c(1e200, 0.0)).unwrap_err(),
            Error::MajorantOverflow
        );
    }
}
