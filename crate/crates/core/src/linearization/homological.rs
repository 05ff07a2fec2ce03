use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multipliers::{Powers, DEFAULT_TOLERANCE};
use crate::series::TruncatedSeries;

/// The diagonal operator `L_λ : H ↦ H ∘ (λI) − λH`, `(L_λ H)_m = (λ^m − λ)(H)_m`.
#[derive(Debug, Clone)]
pub struct HomologicalOperator {
    lambda: Complex64,
    /// `λ^m − λ` for `m = 0..=N`; entries `0` and `1` are unused.
    divisors: Vec<Complex64>,
}

impl HomologicalOperator {
    /// Fails with [`Error::ResonantDivisor`] at the first `m ≤ N` with
    /// `|λ^m − λ| ≤ tol`.
    pub fn new(lambda: Complex64, trunc_order: usize, tol: f64) -> Result<Self> {
        if lambda.norm() <= tol {
            return Err(Error::ResonantDivisor { m: 2 });
        }
        let mut divisors = vec![Complex64::new(0.0, 0.0); trunc_order + 1];
        let powers = Powers::new(lambda).take(trunc_order).skip(1);
        for (i, p) in powers.enumerate() {
            let m = i + 2;
            let d = p - lambda;
            if d.norm() <= tol {
                return Err(Error::ResonantDivisor { m });
            }
            divisors[m] = d;
        }
        Ok(Self { lambda, divisors })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn trunc_order(&self) -> usize {
        self.divisors.len() - 1
    }

    /// `λ^m − λ`, for `2 ≤ m ≤ N`.
    pub fn divisor(&self, m: usize) -> Complex64 {
        self.divisors[m]
    }

    /// `L_λ⁻¹ F`, coefficientwise; `F` must lie in `O_2`.
    pub fn solve(&self, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        if f.order() < 2 {
            return Err(Error::NotInO2 { order: f.order() });
        }
        let n = f.trunc_order().min(self.trunc_order());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for m in f.order()..=n {
            coeffs[m] = f.coeff(m) / self.divisors[m];
        }
        TruncatedSeries::new(coeffs, f.order().min(n + 1))
    }

    /// `L_λ H` (used to check solutions).
    pub fn apply(&self, h: &TruncatedSeries) -> Result<TruncatedSeries> {
        if h.order() < 2 {
            return Err(Error::NotInO2 { order: h.order() });
        }
        let n = h.trunc_order().min(self.trunc_order());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for m in h.order()..=n {
            coeffs[m] = h.coeff(m) * self.divisors[m];
        }
        TruncatedSeries::new(coeffs, h.order().min(n + 1))
    }
}

/// `P = L_λ⁻¹ F` with `(P)_m = (F)_m / (λ^m − λ)`.
pub fn solve_homological(f: &TruncatedSeries, lambda: Complex64) -> Result<TruncatedSeries> {
    HomologicalOperator::new(lambda, f.trunc_order(), DEFAULT_TOLERANCE)?.solve(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::compose;
    use crate::multipliers::{multiplier_from_angle, small_divisors};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn simple_solutions() {
        let f = TruncatedSeries::monomial(5, 2, c(1.0, 0.0));
        let p = solve_homological(&f, c(2.0, 0.0)).unwrap();
        assert_eq!(p, TruncatedSeries::monomial(5, 2, c(0.5, 0.0)));

        let f = TruncatedSeries::monomial(5, 3, c(1.0, 0.0));
        assert_eq!(
            solve_homological(&f, c(-1.0, 0.0)),
            Err(Error::ResonantDivisor { m: 3 })
        );
        assert_eq!(
            solve_homological(&f, c(0.0, 1.0)),
            Err(Error::ResonantDivisor { m: 5 })
        );
        assert_eq!(
            solve_homological(&f, c(1.0, 0.0)),
            Err(Error::ResonantDivisor { m: 2 })
        );
    }

    #[test]
    fn divisors_are_shifted_small_divisors_on_the_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let lambda = multiplier_from_angle((5f64.sqrt() - 1.0) / 2.0);
        let n = 40;
        let coeffs = (0..=n)
            .map(|k| if k < 2 { c(0.0, 0.0) } else { c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) })
            .collect();
        let f = TruncatedSeries::new(coeffs, 2).unwrap();
        let p = solve_homological(&f, lambda).unwrap();
        let table = small_divisors(lambda, n);
        for m in 2..=n {
            let expected = f.coeff(m).norm() / table.omega(m - 1);
            assert!((p.coeff(m).norm() - expected).abs() <= 1e-12 * expected.max(1.0), "m = {m}");
        }
    }

    #[test]
    fn operator_matches_its_definition() {
        // L_λ H = H ∘ (λI) − λH
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let lambda = c(0.7, 0.9);
        let n = 12;
        let coeffs = (0..=n)
            .map(|k| if k < 2 { c(0.0, 0.0) } else { c(rng.gen_range(-1.0..1.0), 0.0) })
            .collect();
        let h = TruncatedSeries::new(coeffs, 2).unwrap();
        let op = HomologicalOperator::new(lambda, n, 1e-12).unwrap();
        let direct = &compose(&h, &TruncatedSeries::monomial(n, 1, lambda)).unwrap() - &h.scale(lambda);
        let applied = op.apply(&h).unwrap();
        for m in 0..=n {
            assert!((direct.coeff(m) - applied.coeff(m)).norm() < 1e-13);
        }
        let back = op.solve(&applied).unwrap();
        for m in 0..=n {
            assert!((back.coeff(m) - h.coeff(m)).norm() < 1e-13);
        }
    }

    #[test]
    fn order_is_preserved() {
        let f = TruncatedSeries::monomial(10, 6, c(1.0, 1.0));
        let p = solve_homological(&f, c(3.0, 0.0)).unwrap();
        assert_eq!(p.order(), 6);
        assert_eq!(
            solve_homological(&TruncatedSeries::identity(4), c(2.0, 0.0)),
            Err(Error::NotInO2 { order: 1 })
        );
    }
}
