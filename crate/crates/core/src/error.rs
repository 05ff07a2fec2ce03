use thiserror::Error;

/// Errors raised by series arithmetic, inversion and linearization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient {index} is nonzero but the order claim is {claim}")]
    OrderClaimViolated { index: usize, claim: usize },

    #[error("order claim {claim} exceeds truncation order {trunc_order} + 1")]
    OrderClaimOutOfRange { claim: usize, trunc_order: usize },

    #[error("degree {degree} is beyond the truncation order {trunc_order}")]
    DegreeOutOfRange { degree: usize, trunc_order: usize },

    #[error("inner series has a nonzero constant term")]
    ConstantTermNonzero,

    #[error("majorant series evaluation overflowed")]
    MajorantOverflow,

    #[error("the multiplier is zero")]
    ZeroMultiplier,

    #[error("nonlinearity must lie in O_2 but has order {order}")]
    NotInO2 { order: usize },

    #[error("series does not fix the origin with multiplier {expected}: {reason}")]
    NotAGerm { expected: String, reason: String },

    #[error("hypothesis failed: {lhs} > {rhs}")]
    HypothesisFailed { lhs: f64, rhs: f64 },

    #[error("small divisor Omega_{n} vanishes: the multiplier is a root of unity")]
    RootOfUnityDivisor { n: usize },

    #[error("resonant divisor: lambda^{m} = lambda")]
    ResonantDivisor { m: usize },

    #[error("multiplier is not hyperbolic")]
    NotHyperbolic,

    #[error("multiplier is not on the unit circle")]
    NotElliptic,

    #[error("no radius r = 2^-j (j <= 60) satisfies F^(r) <= r")]
    NoValidRadius,

    #[error("radius schedule collapses at stage {stage}: Omega_(2^{}) = 0", stage + 1)]
    ScheduleCollapse { stage: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
