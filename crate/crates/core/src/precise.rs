//! Compositions and inverses evaluated in extended binary precision.
//!
//! Composing a series of finite radius with one whose coefficients grow can
//! cancel terms far larger than the result: `log(1 + z) ∘ (e^{2z} − 1)` sums
//! terms of size `≈ 2.9^m` to produce `0` at degree `m`. Rounding the outer
//! series to doubles already perturbs those terms by `2^{−53}` each, so the
//! conjugacy residual is formed from the exact inverse of `h`, carried with
//! `precision_for(N)` bits, and only the result is rounded.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

type Real = FBig<HalfEven, 2>;

/// Working precision in bits for series truncated at `n`.
pub fn precision_for(n: usize) -> usize {
    128 + 4 * n
}

#[derive(Clone)]
struct Wide {
    re: Vec<Real>,
    im: Vec<Real>,
}

fn real(x: f64, bits: usize) -> Real {
    // finite doubles convert exactly
    Real::try_from(x)
        .expect("series coefficients are finite")
        .with_precision(bits)
        .value()
}

fn is_zero(re: &Real, im: &Real) -> bool {
    *re == Real::ZERO && *im == Real::ZERO
}

impl Wide {
    fn zero(n: usize) -> Self {
        Self {
            re: vec![Real::ZERO; n + 1],
            im: vec![Real::ZERO; n + 1],
        }
    }

    fn from_series(s: &TruncatedSeries, n: usize, bits: usize) -> Self {
        let (re, im) = (0..=n)
            .map(|k| {
                let c = s.coeff(k);
                (real(c.re, bits), real(c.im, bits))
            })
            .unzip();
        Self { re, im }
    }

    fn trunc_order(&self) -> usize {
        self.re.len() - 1
    }

    fn is_zero_at(&self, k: usize) -> bool {
        is_zero(&self.re[k], &self.im[k])
    }

    fn degree(&self) -> usize {
        (0..=self.trunc_order()).rev().find(|&k| !self.is_zero_at(k)).unwrap_or(0)
    }

    /// Truncated product; `other` has no constant term.
    fn mul_shift(&self, other: &Self) -> Self {
        let n = self.trunc_order();
        let mut out = Self::zero(n);
        let live_a: Vec<usize> = (0..=n).filter(|&i| !self.is_zero_at(i)).collect();
        let live_b: Vec<usize> = (1..=n).filter(|&j| !other.is_zero_at(j)).collect();
        for &i in &live_a {
            for &j in live_b.iter().take_while(|&&j| i + j <= n) {
                let (a, b) = (&self.re[i], &self.im[i]);
                let (c, d) = (&other.re[j], &other.im[j]);
                out.re[i + j] = &out.re[i + j] + (a * c - b * d);
                out.im[i + j] = &out.im[i + j] + (a * d + b * c);
            }
        }
        out
    }

    fn into_series(self) -> TruncatedSeries {
        let coeffs = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(a, b)| Complex64::new(a.to_f64().value(), b.to_f64().value()))
            .collect();
        TruncatedSeries::from_coeffs(coeffs)
    }
}

/// `f ∘ g` by Horner's scheme; `g` has no constant term.
fn compose_wide(f: &Wide, g: &Wide) -> Wide {
    let n = g.trunc_order();
    let top = f.degree().min(n);
    let mut acc = Wide::zero(n);
    acc.re[0] = f.re[top].clone();
    acc.im[0] = f.im[top].clone();
    for i in (0..top).rev() {
        acc = acc.mul_shift(g);
        acc.re[0] = &acc.re[0] + &f.re[i];
        acc.im[0] = &acc.im[0] + &f.im[i];
    }
    acc
}

/// Compositional inverse of `h` with `h(0) = 0`, `h'(0) ≠ 0`.
///
/// With `g = h⁻¹`, `[h ∘ g]_m = Σ_k h_k [g^k]_m = 0` for `m ≥ 2`, and
/// `[g^k]_m` involves only `g_1, ..., g_{m−k+1}`, so the table of powers is
/// filled degree by degree.
fn invert_wide(h: &Wide) -> Result<Wide> {
    let n = h.trunc_order();
    if h.is_zero_at(1) {
        return Err(Error::ZeroMultiplier);
    }
    let (a, b) = (&h.re[1], &h.im[1]);
    let norm = a * a + b * b;
    let inv = (a / &norm, -(b / &norm));
    // powers[k] = g^k, k = 1..=n
    let mut powers = vec![Wide::zero(n); n + 1];
    powers[1].re[1] = inv.0.clone();
    powers[1].im[1] = inv.1.clone();
    for m in 2..=n {
        for k in 2..=m {
            let (mut re, mut im) = (Real::ZERO, Real::ZERO);
            for i in 1..=m - k + 1 {
                let (x, y) = (&powers[1].re[i], &powers[1].im[i]);
                let (u, v) = (&powers[k - 1].re[m - i], &powers[k - 1].im[m - i]);
                if is_zero(x, y) || is_zero(u, v) {
                    continue;
                }
                re = re + (x * u - y * v);
                im = im + (x * v + y * u);
            }
            powers[k].re[m] = re;
            powers[k].im[m] = im;
        }
        let (mut re, mut im) = (Real::ZERO, Real::ZERO);
        for k in 2..=m {
            let (x, y) = (&h.re[k], &h.im[k]);
            let (u, v) = (&powers[k].re[m], &powers[k].im[m]);
            if is_zero(x, y) || is_zero(u, v) {
                continue;
            }
            re = re + (x * u - y * v);
            im = im + (x * v + y * u);
        }
        // g_m = −(Σ_k h_k [g^k]_m) / h_1
        let g_re = -(&re * &inv.0 - &im * &inv.1);
        let g_im = -(&re * &inv.1 + &im * &inv.0);
        powers[1].re[m] = g_re;
        powers[1].im[m] = g_im;
    }
    Ok(powers.swap_remove(1))
}

fn check_inner(g: &TruncatedSeries) -> Result<()> {
    if g.coeff(0) != Complex64::new(0.0, 0.0) {
        return Err(Error::ConstantTermNonzero);
    }
    Ok(())
}

/// `[f ∘ g]_N` with `precision_for(N)` working bits, rounded to nearest.
pub fn compose_precise(f: &TruncatedSeries, g: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_inner(g)?;
    let n = f.trunc_order().min(g.trunc_order());
    let bits = precision_for(n);
    let f = Wide::from_series(f, n, bits);
    Ok(compose_wide(&f, &Wide::from_series(g, n, bits)).into_series())
}

/// `[h⁻¹]_N` for `h(0) = 0`, `h'(0) ≠ 0`, computed with `precision_for(N)` bits.
pub fn invert_precise(h: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_inner(h)?;
    let n = h.trunc_order();
    Ok(invert_wide(&Wide::from_series(h, n, precision_for(n)))?.into_series())
}

/// `[h⁻¹ ∘ f ∘ h]_N`, where `h⁻¹` is the exact inverse of the given `h`
/// rather than a rounded copy of it; nothing is rounded before the result.
pub fn conjugate_precise(f: &TruncatedSeries, h: &TruncatedSeries) -> Result<TruncatedSeries> {
    check_inner(f)?;
    check_inner(h)?;
    let n = f.trunc_order().min(h.trunc_order());
    let bits = precision_for(n);
    let h = Wide::from_series(h, n, bits);
    let h_inv = invert_wide(&h)?;
    let inner = compose_wide(&Wide::from_series(f, n, bits), &h);
    Ok(compose_wide(&h_inv, &inner).into_series())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::compose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_minus_one(n: usize, scale: f64) -> TruncatedSeries {
        let mut c = vec![0.0; n + 1];
        let mut term = 1.0;
        for (k, slot) in c.iter_mut().enumerate().skip(1) {
            term *= scale / k as f64;
            *slot = term;
        }
        TruncatedSeries::from_real(&c)
    }

    fn log_one_plus(n: usize) -> TruncatedSeries {
        let c: Vec<f64> = (0..=n)
            .map(|k| if k == 0 { 0.0 } else { (-1f64).powi(k as i32 + 1) / k as f64 })
            .collect();
        TruncatedSeries::from_real(&c)
    }

    #[test]
    fn agrees_with_double_precision_on_benign_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rand_series = |rng: &mut ChaCha8Rng, order: usize| {
            let c: Vec<Complex64> = (0..=12)
                .map(|k| {
                    if k < order {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    }
                })
                .collect();
            TruncatedSeries::from_coeffs(c)
        };
        let f = rand_series(&mut rng, 0);
        let g = rand_series(&mut rng, 1);
        let a = compose_precise(&f, &g).unwrap();
        let b = compose(&f, &g).unwrap();
        for m in 0..=12 {
            assert!((a.coeff(m) - b.coeff(m)).norm() <= 1e-12 * (1.0 + b.coeff(m).norm()));
        }
    }

    #[test]
    fn inverse_of_exp_minus_one_is_log() {
        let n = 40;
        let g = invert_precise(&exp_minus_one(n, 1.0)).unwrap();
        let log = log_one_plus(n);
        for m in 0..=n {
            assert!((g.coeff(m) - log.coeff(m)).norm() <= 4e-15 * log.coeff(m).norm(), "m = {m}");
        }
        let g = invert_precise(&TruncatedSeries::from_real(&[0.0, 2.0, 0.0, 0.0])).unwrap();
        assert_eq!(g, TruncatedSeries::from_real(&[0.0, 0.5, 0.0, 0.0]));
        assert_eq!(
            invert_precise(&TruncatedSeries::monomial(4, 2, Complex64::new(1.0, 0.0))),
            Err(Error::ZeroMultiplier)
        );
    }

    #[test]
    fn inverse_matches_double_precision_inversion() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut c: Vec<Complex64> = (0..=20)
            .map(|_| Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)))
            .collect();
        c[0] = Complex64::new(0.0, 0.0);
        c[1] = Complex64::new(1.0, 0.0);
        let h = TruncatedSeries::from_coeffs(c);
        let wide = invert_precise(&h).unwrap();
        let narrow = crate::inversion::invert_series(&h).unwrap();
        for m in 0..=20 {
            let scale = 1.0 + narrow.coeff(m).norm();
            assert!((wide.coeff(m) - narrow.coeff(m)).norm() <= 1e-12 * scale, "m = {m}");
        }
    }

    #[test]
    fn conjugation_of_the_doubling_map() {
        // h = e^z − 1 conjugates 2z + z² to 2z; the double-precision route
        // cancels terms of size ≈ 2.9^m and is off by far more than the result
        let n = 64;
        let h = exp_minus_one(n, 1.0);
        let f = TruncatedSeries::from_real(&[0.0, 2.0, 1.0]).with_trunc_order(n);
        let two_z = TruncatedSeries::monomial(n, 1, Complex64::new(2.0, 0.0));
        let wide = conjugate_precise(&f, &h).unwrap();
        assert!((&wide - &two_z).max_abs() < 1e-14);
        let h_inv = log_one_plus(n);
        let narrow = compose(&h_inv, &compose(&f, &h).unwrap()).unwrap();
        assert!((&narrow - &two_z).max_abs() > 1.0);
    }

    #[test]
    fn rejects_constant_term() {
        let f = TruncatedSeries::identity(3);
        let g = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(compose_precise(&f, &g), Err(Error::ConstantTermNonzero));
    }
}
