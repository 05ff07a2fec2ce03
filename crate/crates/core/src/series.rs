//! Dense truncated power series over the complex numbers.
//!
//! A [`TruncatedSeries`] stores the coefficients `c_0..c_N` of `[f]_N` together
//! with a certified order bound `k`: every coefficient below `k` is an exact
//! zero. Order bounds propagate structurally through every operation (a product
//! of series in `O_n` and `O_k` lies in `O_{n+k}`), and the coefficients they
//! cover are stored as exact zeros, never as round-off residue.

use std::cmp::min;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// The truncation `[f]_N` of a complex power series, with membership in `O_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesWire", into = "SeriesWire")]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
    order: usize,
}

impl TruncatedSeries {
    /// Builds a series from `coeffs`, certifying that it lies in `O_{order_claim}`.
    ///
    /// Fails if a coefficient below `order_claim` is not exactly zero.
    pub fn new(coeffs: Vec<Complex64>, order_claim: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "a truncated series needs at least one coefficient".into(),
            ));
        }
        if order_claim > coeffs.len() {
            return Err(Error::OrderClaimOutOfRange {
                claim: order_claim,
                trunc_order: coeffs.len() - 1,
            });
        }
        if let Some(index) = coeffs[..order_claim].iter().position(|c| *c != ZERO) {
            return Err(Error::OrderClaimViolated {
                index,
                claim: order_claim,
            });
        }
        Ok(Self {
            coeffs,
            order: order_claim,
        })
    }

    /// Builds a series whose order bound is the number of leading exact zeros.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        let order = coeffs
            .iter()
            .position(|c| *c != ZERO)
            .unwrap_or(coeffs.len());
        Self { coeffs, order }
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(trunc_order: usize) -> Self {
        Self {
            coeffs: vec![ZERO; trunc_order + 1],
            order: trunc_order + 1,
        }
    }

    pub fn one(trunc_order: usize) -> Self {
        Self::constant(trunc_order, ONE)
    }

    pub fn constant(trunc_order: usize, c: Complex64) -> Self {
        Self::monomial(trunc_order, 0, c)
    }

    /// The identity map `I`, i.e. the series `z`.
    pub fn identity(trunc_order: usize) -> Self {
        Self::monomial(trunc_order, 1, ONE)
    }

    /// `c z^degree`, or the zero truncation if `degree > trunc_order`.
    pub fn monomial(trunc_order: usize, degree: usize, c: Complex64) -> Self {
        let mut s = Self::zero(trunc_order);
        if degree <= trunc_order && c != ZERO {
            s.coeffs[degree] = c;
            s.order = degree;
        }
        s
    }

    /// Truncation order `N`.
    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Certified order bound: the series lies in `O_k` for the returned `k`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^i`; zero beyond the truncation.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or(ZERO)
    }

    /// Whether this is the zero truncation.
    pub fn is_zero(&self) -> bool {
        self.order > self.trunc_order()
    }

    /// Index of the highest nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != ZERO)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `[f]_d`, keeping the order bound (capped at `d + 1`).
    pub fn truncate(&self, d: usize) -> Result<Self> {
        if d > self.trunc_order() {
            return Err(Error::DegreeOutOfRange {
                degree: d,
                trunc_order: self.trunc_order(),
            });
        }
        Ok(self.truncated(d))
    }

    /// Re-truncates at `n`: drops coefficients above `n` or pads with zeros.
    pub fn with_trunc_order(&self, n: usize) -> Self {
        if n <= self.trunc_order() {
            return self.truncated(n);
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, ZERO);
        let order = if self.is_zero() { n + 1 } else { self.order };
        Self { coeffs, order }
    }

    fn truncated(&self, d: usize) -> Self {
        Self {
            coeffs: self.coeffs[..=d].to_vec(),
            order: min(self.order, d + 1),
        }
    }

    /// Raises the order bound to `k` after checking the coefficients below are exact zeros.
    pub fn claim_order(self, k: usize) -> Result<Self> {
        if k <= self.order {
            return Ok(self);
        }
        Self::new(self.coeffs, k)
    }

    /// Sets every coefficient below `k` to an exact zero and certifies `O_k`.
    ///
    /// Returns the largest modulus that was discarded. This is how quantities
    /// that vanish in exact arithmetic are reinstated as structural zeros after
    /// a floating-point computation.
    pub fn force_order(mut self, k: usize) -> (Self, f64) {
        let k = min(k, self.coeffs.len());
        let mut discarded = 0.0f64;
        for c in &mut self.coeffs[..k] {
            discarded = discarded.max(c.norm());
            *c = ZERO;
        }
        if k > self.order {
            self.order = self.coeffs[k..]
                .iter()
                .position(|c| *c != ZERO)
                .map_or(self.coeffs.len(), |p| p + k);
        }
        (self, discarded)
    }

    /// Cauchy product `f · g`, truncated at the smaller of the two orders.
    ///
    /// The result lies in `O_{n+k}` when `f ∈ O_n` and `g ∈ O_k`.
    pub fn cauchy_product(&self, other: &Self) -> Self {
        let n = min(self.trunc_order(), other.trunc_order());
        let order = min(n + 1, self.order + other.order);
        let mut coeffs = vec![ZERO; n + 1];
        if order <= n {
            let a_top = self.degree().unwrap_or(0);
            for (k, slot) in coeffs.iter_mut().enumerate().skip(order) {
                let hi = min(k - other.order, a_top);
                let mut acc = ZERO;
                for i in self.order..=hi {
                    acc += self.coeffs[i] * other.coeffs[k - i];
                }
                *slot = acc;
            }
        }
        Self { coeffs, order }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self::zero(self.trunc_order());
        }
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            order: self.order,
        }
    }

    /// Adds `c` to the constant coefficient.
    pub fn add_constant(mut self, c: Complex64) -> Self {
        if c != ZERO {
            self.coeffs[0] += c;
            self.order = if self.coeffs[0] != ZERO {
                0
            } else {
                self.coeffs.iter().position(|c| *c != ZERO).unwrap_or(self.coeffs.len())
            };
        }
        self
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = min(self.trunc_order(), other.trunc_order());
        let order = min(self.order, other.order);
        let mut coeffs = vec![ZERO; n + 1];
        for k in order..=n {
            coeffs[k] = op(self.coeffs[k], other.coeffs[k]);
        }
        // exact cancellation of leading terms raises the order
        let order = coeffs[min(order, n + 1)..]
            .iter()
            .position(|c| *c != ZERO)
            .map_or(n + 1, |p| p + order);
        Self { coeffs, order }
    }

    /// Majorant series: coefficient moduli.
    pub fn majorant(&self) -> MajorantSeries {
        MajorantSeries {
            coeffs: self.coeffs.iter().map(|c| c.norm()).collect(),
            order: self.order,
        }
    }

    /// Value of the partial sum `Σ_{k≤N} c_k z^k` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        self.cauchy_product(rhs)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        self.scale(-ONE)
    }
}

/// Series with nonnegative real coefficients, used to bound moduli.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSeries {
    coeffs: Vec<f64>,
    order: usize,
}

impl MajorantSeries {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates at `r ≥ 0`; a non-finite value is reported as [`Error::MajorantOverflow`].
    pub fn eval(&self, r: f64) -> Result<f64> {
        let v = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::MajorantOverflow)
        }
    }

    /// Same coefficients viewed as a complex series (for composing majorants).
    pub fn to_series(&self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
            order: self.order,
        }
    }
}

/// JSON wire format: `{"N": int, "order": int, "coeffs": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct SeriesWire {
    #[serde(rename = "N")]
    n: usize,
    order: usize,
    coeffs: Vec<[f64; 2]>,
}

impl From<TruncatedSeries> for SeriesWire {
    fn from(s: TruncatedSeries) -> Self {
        SeriesWire {
            n: s.trunc_order(),
            order: s.order,
            coeffs: s.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<SeriesWire> for TruncatedSeries {
    type Error = Error;
    fn try_from(w: SeriesWire) -> Result<Self> {
        if w.coeffs.len() != w.n + 1 {
            return Err(Error::InvalidParameter(format!(
                "series has N = {} but {} coefficients",
                w.n,
                w.coeffs.len()
            )));
        }
        let coeffs = w
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        TruncatedSeries::new(coeffs, w.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_series(rng: &mut ChaCha8Rng, n: usize) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(
            (0..=n)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn make_series_checks_order_claim() {
        let s = TruncatedSeries::new(vec![ZERO, ZERO, ONE], 2).unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.trunc_order(), 2);

        assert_eq!(
            TruncatedSeries::new(vec![ZERO, ONE, ZERO], 2),
            Err(Error::OrderClaimViolated { index: 1, claim: 2 })
        );

        let z = TruncatedSeries::new(vec![ZERO; 5], 5).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.order(), 5);
        assert!(TruncatedSeries::new(vec![ZERO; 5], 6).is_err());
    }

    #[test]
    fn product_small_cases() {
        let one_plus_z = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
        let sq = &one_plus_z * &one_plus_z;
        assert_eq!(sq.coeffs(), TruncatedSeries::from_real(&[1.0, 2.0, 1.0, 0.0]).coeffs());

        let z2 = TruncatedSeries::monomial(10, 2, ONE);
        let z3 = TruncatedSeries::monomial(10, 3, ONE);
        let z5 = &z2 * &z3;
        assert_eq!(z5.order(), 5);
        assert_eq!(z5, TruncatedSeries::monomial(10, 5, ONE));
    }

    #[test]
    fn product_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = random_series(&mut rng, 16);
        let g = random_series(&mut rng, 16);
        let fg = &f * &g;
        for k in 0..=16 {
            let mut expected = ZERO;
            for i in 0..=k {
                expected += f.coeff(i) * g.coeff(k - i);
            }
            assert_eq!(fg.coeff(k), expected, "coefficient {k}");
        }
    }

    #[test]
    fn product_of_orders_keeps_exact_zeros() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (f, _) = random_series(&mut rng, 12).force_order(3);
        let (g, _) = random_series(&mut rng, 12).force_order(4);
        let fg = &f * &g;
        assert_eq!(fg.order(), 7);
        assert!(fg.coeffs()[..7].iter().all(|c| *c == ZERO));

        let (h, _) = random_series(&mut rng, 12).force_order(8);
        assert!((&fg * &h).is_zero());
        assert_eq!((&fg * &h).order(), 13);
    }

    #[test]
    fn truncate_cases() {
        let f = TruncatedSeries::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(f.truncate(1).unwrap(), TruncatedSeries::from_real(&[1.0, 1.0]));

        let z3 = TruncatedSeries::monomial(3, 3, ONE);
        let t = z3.truncate(2).unwrap();
        assert!(t.is_zero());
        assert_eq!(t.order(), 3);

        assert_eq!(
            f.truncate(3),
            Err(Error::DegreeOutOfRange {
                degree: 3,
                trunc_order: 2
            })
        );
    }

    #[test]
    fn truncation_commutes_with_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_series(&mut rng, 16);
        let g = random_series(&mut rng, 16);
        let lhs = (&f * &g).truncate(8).unwrap();
        let rhs = (&f.truncate(8).unwrap() * &g.truncate(8).unwrap()).truncate(8).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn majorant_cases() {
        let f = TruncatedSeries::from_coeffs(vec![ZERO, c(-1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(f.majorant().coeffs(), &[0.0, 1.0, 1.0]);
        assert_eq!(TruncatedSeries::zero(3).majorant().coeffs(), &[0.0; 4]);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_series(&mut rng, 20);
        let g = random_series(&mut rng, 20);
        let lhs = (&f * &g).majorant().eval(0.3).unwrap();
        let rhs = f.majorant().eval(0.3).unwrap() * g.majorant().eval(0.3).unwrap();
        assert!(lhs <= rhs);
    }

    #[test]
    fn majorant_overflow_is_signalled() {
        let f = TruncatedSeries::from_real(&[1.0; 40]);
        assert_eq!(f.majorant().eval(1e300), Err(Error::MajorantOverflow));
        assert!(f.majorant().eval(0.5).is_ok());
    }

    #[test]
    fn eval_cases() {
        let f = TruncatedSeries::from_real(&[1.0, 1.0, 1.0]);
        assert_eq!(f.eval(ONE), c(3.0, 0.0));
        let z2 = TruncatedSeries::monomial(2, 2, ONE);
        assert_eq!(z2.eval(c(0.0, 2.0)), c(-4.0, 0.0));

        let geometric = TruncatedSeries::from_real(&[1.0; 21]);
        let v = geometric.eval(c(0.5, 0.0));
        // tail of 1/(1-z) beyond degree 20 at z = 1/2 is 2^-20
        assert!((v.re - 2.0).abs() <= 0.5f64.powi(21) / 0.5);
        assert!((v.re - 2.0).abs() < 1e-6);
    }

    #[test]
    fn order_of_is_structural() {
        assert_eq!(TruncatedSeries::monomial(4, 2, ONE).order(), 2);
        assert_eq!(TruncatedSeries::from_real(&[1.0, 1.0]).order(), 0);
        let p = &TruncatedSeries::monomial(8, 2, ONE) * &TruncatedSeries::monomial(8, 3, ONE);
        assert_eq!(p.order(), 5);
    }

    #[test]
    fn force_order_reports_residue() {
        let s = TruncatedSeries::from_coeffs(vec![c(1e-17, 0.0), c(0.0, -3e-17), ONE]);
        let (t, residue) = s.force_order(2);
        assert_eq!(t.order(), 2);
        assert_eq!(residue, 3e-17);
        assert_eq!(t.coeff(0), ZERO);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (f, _) = random_series(&mut rng, 12).force_order(2);
        let text = serde_json::to_string(&f).unwrap();
        let back: TruncatedSeries = serde_json::from_str(&text).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert_eq!(back.order(), 2);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        let bad_len = r#"{"N": 3, "order": 0, "coeffs": [[1.0, 0.0]]}"#;
        assert!(serde_json::from_str::<TruncatedSeries>(bad_len).is_err());
        let bad_order = r#"{"N": 1, "order": 1, "coeffs": [[1.0, 0.0], [0.0, 0.0]]}"#;
        assert!(serde_json::from_str::<TruncatedSeries>(bad_order).is_err());
    }
}
