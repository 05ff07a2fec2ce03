//! Multiplier classification and small-divisor arithmetic.
//!
//! For a multiplier `λ` the small divisors are `ω_n = |λⁿ − 1|` and their
//! running minima `Ω_n = min_{ℓ≤n} ω_ℓ`. The Bruno sum
//! `b(λ) = Σ_{k≥1} 2^{−k} ln Ω_{2^k}^{−1}` is finite exactly for Bruno multipliers.

use std::f64::consts::TAU;
use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for unit-circle and root-of-unity detection.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default horizon `n_max` for root-of-unity detection.
pub const DEFAULT_HORIZON: usize = 1 << 16;
/// Powers on the unit circle are renormalized to modulus one this often.
const RENORMALIZE_EVERY: usize = 1 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Zero,
    Hyperbolic,
    Elliptic,
    RootOfUnity { period: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplier {
    #[serde(with = "crate::json::complex_pair")]
    pub value: Complex64,
    pub classification: Classification,
}

impl Multiplier {
    pub fn is_resonant(&self) -> bool {
        matches!(
            self.classification,
            Classification::Zero | Classification::RootOfUnity { .. }
        )
    }
}

/// Successive powers `λ, λ², λ³, ...`.
///
/// When `λ` lies on the unit circle the running power is rescaled to modulus
/// one every 2¹⁰ steps so that drift in the modulus cannot pollute `|λⁿ − 1|`.
#[derive(Debug, Clone)]
pub struct Powers {
    lambda: Complex64,
    current: Complex64,
    n: usize,
    renormalize: bool,
}

impl Powers {
    pub fn new(lambda: Complex64) -> Self {
        Self {
            lambda,
            current: Complex64::new(1.0, 0.0),
            n: 0,
            renormalize: (lambda.norm() - 1.0).abs() <= DEFAULT_TOLERANCE,
        }
    }
}

impl Iterator for Powers {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        self.current *= self.lambda;
        self.n += 1;
        if self.renormalize && self.n % RENORMALIZE_EVERY == 0 {
            let m = self.current.norm();
            if m > 0.0 {
                self.current /= m;
            }
        }
        Some(self.current)
    }
}

pub fn classify(lambda: Complex64, n_max: usize, tol: f64) -> Multiplier {
    let modulus = lambda.norm();
    let classification = if modulus <= tol {
        Classification::Zero
    } else if (modulus - 1.0).abs() > tol {
        Classification::Hyperbolic
    } else {
        Powers::new(lambda)
            .take(n_max)
            .position(|p| (p - 1.0).norm() <= tol)
            .map_or(Classification::Elliptic, |i| Classification::RootOfUnity {
                period: i + 1,
            })
    };
    Multiplier {
        value: lambda,
        classification,
    }
}

/// `λ = e^{2πiθ}` with `θ` in turns.
///
/// The angle is reduced to the nearest quarter turn first, so multiples of 1/4
/// come out exact.
pub fn multiplier_from_angle(theta: f64) -> Complex64 {
    let t = theta - theta.floor();
    let quarter = (t * 4.0).round();
    let (s, c) = (TAU * (t - quarter / 4.0)).sin_cos();
    match quarter as u8 % 4 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(0.0 - s, c),
        2 => Complex64::new(0.0 - c, 0.0 - s),
        _ => Complex64::new(s, 0.0 - c),
    }
}

/// `ω_n` and `Ω_n` for `n = 1..n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallDivisorTable {
    omega: Vec<f64>,
    running_min: Vec<f64>,
}

impl SmallDivisorTable {
    pub fn n_max(&self) -> usize {
        self.omega.len()
    }

    /// `ω_n`, for `1 ≤ n ≤ n_max`.
    pub fn omega(&self, n: usize) -> f64 {
        self.omega[n - 1]
    }

    /// `Ω_n`, for `1 ≤ n ≤ n_max`.
    pub fn running_min(&self, n: usize) -> f64 {
        self.running_min[n - 1]
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    pub fn running_mins(&self) -> &[f64] {
        &self.running_min
    }

    /// CSV with header `n,omega,Omega`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "omega", "Omega"])?;
        for (i, (o, m)) in self.omega.iter().zip(&self.running_min).enumerate() {
            w.write_record(&[(i + 1).to_string(), format!("{o:.16e}"), format!("{m:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn small_divisors(lambda: Complex64, n_max: usize) -> SmallDivisorTable {
    let omega: Vec<f64> = Powers::new(lambda).take(n_max).map(|p| (p - 1.0).norm()).collect();
    let running_min = omega
        .iter()
        .scan(f64::INFINITY, |m, &o| {
            *m = m.min(o);
            Some(*m)
        })
        .collect();
    SmallDivisorTable { omega, running_min }
}

/// `Ω_{2^j}` for `j = 0..=k_max`, streaming the powers without storing a table.
pub fn dyadic_minima(lambda: Complex64, k_max: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut min_sq = f64::INFINITY;
    let mut best = Complex64::new(0.0, 0.0);
    let mut next_mark = 1usize;
    for (i, p) in Powers::new(lambda).enumerate() {
        let d = p - 1.0;
        let sq = d.re * d.re + d.im * d.im;
        if sq < min_sq {
            min_sq = sq;
            best = d;
        }
        if i + 1 == next_mark {
            out.push(best.norm());
            if out.len() > k_max as usize {
                break;
            }
            next_mark <<= 1;
        }
    }
    out
}

/// Partial Bruno sum `b_K(λ) = Σ_{k=1}^{K} 2^{−k} ln Ω_{2^k}^{−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrunoEstimate {
    #[serde(rename = "K")]
    pub k: usize,
    /// `2^{−k} ln Ω_{2^k}^{−1}` for `k = 1..K`.
    pub terms: Vec<f64>,
    pub partial_sum: f64,
}

impl BrunoEstimate {
    /// Builds the estimate from `Ω_{2^j}`, `j = 0..=K` as returned by [`dyadic_minima`].
    pub fn from_dyadic_minima(minima: &[f64], k: usize) -> Result<Self> {
        let mut terms = Vec::with_capacity(k);
        for j in 1..=k {
            let m = minima[j];
            if m <= DEFAULT_TOLERANCE {
                return Err(Error::RootOfUnityDivisor { n: 1 << j });
            }
            terms.push(0.5f64.powi(j as i32) * (-m.ln()));
        }
        let partial_sum = terms.iter().sum();
        Ok(Self {
            k,
            terms,
            partial_sum,
        })
    }

    /// `b_j` for `j = 1..=K`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.terms
            .iter()
            .scan(0.0, |s, t| {
                *s += t;
                Some(*s)
            })
            .collect()
    }
}

pub fn bruno_sum(lambda: Complex64, k: usize) -> Result<BrunoEstimate> {
    if k == 0 || k > 40 {
        return Err(Error::InvalidParameter(format!("K must lie in 1..=40, got {k}")));
    }
    BrunoEstimate::from_dyadic_minima(&dyadic_minima(lambda, k as u32), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub holds: bool,
    pub first_violation: Option<usize>,
}

/// Checks `Ω_n ≥ a n^{−b}` for `n ≤ n_max`.
pub fn diophantine_check(lambda: Complex64, a: f64, b: f64, n_max: usize) -> DiophantineReport {
    let table = small_divisors(lambda, n_max);
    let first_violation = table
        .running_mins()
        .iter()
        .enumerate()
        .position(|(i, &m)| m < a * ((i + 1) as f64).powf(-b))
        .map(|i| i + 1);
    DiophantineReport {
        holds: first_violation.is_none(),
        first_violation,
    }
}
