//! Closed-form thresholds and inequalities, evaluated in log2 space with a
//! 256-bit mantissa.
//!
//! Quantities that are naturally tiny (sparsity thresholds, the two union-bound
//! terms) are carried as their base-2 logarithm. Quantities that are rational
//! in the inputs (the swap margin) are evaluated exactly.

use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ratio::{self, Rational};
use crate::solver::LemmaParams;

/// Mantissa width in bits for every evaluation.
pub const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;
/// Smallest `s` covered by the main theorem and its corollaries.
pub const MIN_S: usize = 11;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("tau must exceed 2*beta (tau={tau}, beta={beta})")]
    DegenerateTau { tau: String, beta: String },
    #[error("hypothesis s >= {MIN_S} violated (s = {0})")]
    HypothesisViolated(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The base-2 logarithm of a non-negative real; `None` stands for log2(0).
#[derive(Debug, Clone)]
pub struct Log2(pub Option<BigFloat>);

impl Log2 {
    pub fn of_zero() -> Self {
        Log2(None)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_none()
    }

    /// Nearest `f64`; `-inf` for zero.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            None => f64::NEG_INFINITY,
            Some(x) => to_f64(x),
        }
    }

    /// Compares the underlying real with `2^k`.
    pub fn cmp_pow2(&self, k: i64) -> Ordering {
        match &self.0 {
            None => Ordering::Less,
            Some(x) => bf_cmp(x, &BigFloat::from_i64(k, PRECISION)),
        }
    }

    pub fn cmp_log(&self, other: &Log2) -> Ordering {
        match (&self.0, &other.0) {
            (None, None) => Ordering::Equal,
            (None, _) => Ordering::Less,
            (_, None) => Ordering::Greater,
            (Some(a), Some(b)) => bf_cmp(a, b),
        }
    }

    /// Decimal text of the exponent.
    pub fn to_decimal(&self) -> String {
        match &self.0 {
            None => "-inf".to_string(),
            Some(x) => decimal(x),
        }
    }
}

impl fmt::Display for Log2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^({})", self.to_decimal())
    }
}

#[derive(Debug, Clone)]
pub enum Quantity {
    Log2(Log2),
    Exact(Rational),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Log2(l) => write!(f, "{l}"),
            Quantity::Exact(r) => write!(f, "{} (~{})", ratio::format(r), ratio::to_f64(r)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: String,
    pub value: Quantity,
    pub satisfied: bool,
    pub components: Vec<(String, Quantity)>,
}

impl BoundReport {
    pub fn component(&self, name: &str) -> Option<&Quantity> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, q)| q)
    }
}

/// A non-negative real given either exactly or as `2^x`.
#[derive(Debug, Clone)]
pub enum Real {
    Exact(Rational),
    Pow2(BigFloat),
}

fn bf_cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(x) if x < 0 => Ordering::Less,
        Some(0) => Ordering::Equal,
        Some(_) => Ordering::Greater,
        None => panic!("comparison with NaN"),
    }
}

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

fn decimal(x: &BigFloat) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.format(Radix::Dec, RM, &mut consts())
        .unwrap_or_else(|_| "nan".to_string())
}

fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    decimal(x).parse().unwrap_or(f64::NAN)
}

fn int(k: i64) -> BigFloat {
    BigFloat::from_i64(k, PRECISION)
}

fn big(n: &BigInt, cc: &mut Consts) -> BigFloat {
    BigFloat::parse(&n.to_string(), Radix::Dec, PRECISION, RM, cc)
}

fn rational(r: &Rational, cc: &mut Consts) -> BigFloat {
    big(r.numer(), cc).div(&big(r.denom(), cc), PRECISION, RM)
}

/// Exact when `n` is a power of two.
fn log2_int(n: &BigInt, cc: &mut Consts) -> BigFloat {
    assert!(n.is_positive(), "log2 of a non-positive integer");
    let bits = n.bits();
    if n == &(BigInt::one() << (bits - 1)) {
        return int(bits as i64 - 1);
    }
    big(n, cc).log2(PRECISION, RM, cc)
}

fn log2_u(n: usize, cc: &mut Consts) -> BigFloat {
    log2_int(&BigInt::from(n), cc)
}

/// log2 of a positive rational; exact for powers of two.
fn log2_rational(r: &Rational, cc: &mut Consts) -> BigFloat {
    log2_int(r.numer(), cc).sub(&log2_int(r.denom(), cc), PRECISION, RM)
}

/// log2(e), the constant entering the first-moment bound.
pub fn log2_e(cc: &mut Consts) -> BigFloat {
    int(1).div(&cc.ln_2(PRECISION, RM), PRECISION, RM)
}

fn pow2(x: &BigFloat, cc: &mut Consts) -> BigFloat {
    x.mul(&cc.ln_2(PRECISION, RM), PRECISION, RM).exp(PRECISION, RM, cc)
}

/// log2(2^a + 2^b).
fn log2_sum(a: &Log2, b: &Log2, cc: &mut Consts) -> Log2 {
    match (&a.0, &b.0) {
        (None, _) => b.clone(),
        (_, None) => a.clone(),
        (Some(x), Some(y)) => {
            let (hi, lo) = if bf_cmp(x, y) == Ordering::Less { (y, x) } else { (x, y) };
            let diff = lo.sub(hi, PRECISION, RM);
            let tail = int(1).add(&pow2(&diff, cc), PRECISION, RM).log2(PRECISION, RM, cc);
            Log2(Some(hi.add(&tail, PRECISION, RM)))
        }
    }
}

fn check_positive(name: &str, v: usize) -> Result<(), BoundsError> {
    if v == 0 {
        return Err(BoundsError::InvalidInput(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// log2 of the largest β for which the main theorem applies:
/// `-11 + log2 s - log2 d - (2^9 d / s^2) log2(2n)`.
pub fn beta_threshold(n: usize, d: usize, s: usize) -> Result<BigFloat, BoundsError> {
    check_positive("n", n)?;
    check_positive("d", d)?;
    check_positive("s", s)?;
    let cc = &mut consts();
    let slope = rational(&Rational::new(BigInt::from(512 * d), BigInt::from(s * s)), cc);
    let tail = slope.mul(&log2_u(2 * n, cc), PRECISION, RM);
    Ok(int(-11)
        .add(&log2_u(s, cc), PRECISION, RM)
        .sub(&log2_u(d, cc), PRECISION, RM)
        .sub(&tail, PRECISION, RM))
}

/// Evaluates `n(eβ/γ)^{γs} + (nd/2)(2eβ/(τ-2β))^{(τ-2β)s}` against 1.
/// Components: `term1`, `term2`, `sum`.
pub fn lemma1_lhs(
    n: usize,
    d: usize,
    s: usize,
    beta: &Real,
    gamma: &Rational,
    tau: &Rational,
) -> Result<BoundReport, BoundsError> {
    check_positive("n", n)?;
    check_positive("d", d)?;
    check_positive("s", s)?;
    if !gamma.is_positive() {
        return Err(BoundsError::InvalidInput("gamma must be positive".into()));
    }
    let cc = &mut consts();
    let tau_f = rational(tau, cc);
    let (log2_beta, beta_f, beta_text) = match beta {
        Real::Exact(b) if b.is_negative() => {
            return Err(BoundsError::InvalidInput("beta must be non-negative".into()));
        }
        Real::Exact(b) if b.is_zero() => (None, int(0), "0".to_string()),
        Real::Exact(b) => (Some(log2_rational(b, cc)), rational(b, cc), ratio::format(b)),
        Real::Pow2(x) => (Some(x.clone()), pow2(x, cc), format!("2^({})", decimal(x))),
    };
    let gap = tau_f.sub(&beta_f.mul(&int(2), PRECISION, RM), PRECISION, RM);
    let degenerate = match beta {
        Real::Exact(b) => *tau <= ratio::int(2) * b,
        Real::Pow2(_) => !gap.is_positive(),
    };
    if degenerate {
        return Err(BoundsError::DegenerateTau {
            tau: ratio::format(tau),
            beta: beta_text,
        });
    }

    let (term1, term2) = match log2_beta {
        None => (Log2::of_zero(), Log2::of_zero()),
        Some(lb) => {
            let le = log2_e(cc);
            let s_f = int(s as i64);
            let gs = rational(gamma, cc).mul(&s_f, PRECISION, RM);
            let inner1 = le.add(&lb, PRECISION, RM).sub(&log2_rational(gamma, cc), PRECISION, RM);
            let t1 = log2_u(n, cc).add(&gs.mul(&inner1, PRECISION, RM), PRECISION, RM);

            let gap_s = gap.mul(&s_f, PRECISION, RM);
            let inner2 = int(1)
                .add(&le, PRECISION, RM)
                .add(&lb, PRECISION, RM)
                .sub(&gap.log2(PRECISION, RM, cc), PRECISION, RM);
            let nd_half = log2_u(n, cc).add(&log2_u(d, cc), PRECISION, RM).sub(&int(1), PRECISION, RM);
            let t2 = nd_half.add(&gap_s.mul(&inner2, PRECISION, RM), PRECISION, RM);
            (Log2(Some(t1)), Log2(Some(t2)))
        }
    };
    let sum = log2_sum(&term1, &term2, cc);
    let satisfied = sum.cmp_pow2(0) == Ordering::Less;
    Ok(BoundReport {
        name: "lemma1_lhs".into(),
        value: Quantity::Log2(sum.clone()),
        satisfied,
        components: vec![
            ("term1".into(), Quantity::Log2(term1)),
            ("term2".into(), Quantity::Log2(term2)),
            ("sum".into(), Quantity::Log2(sum)),
        ],
    })
}

/// `s - τs - 9γs - 3εs - 20γd/ε - 3`, exactly; satisfied iff positive.
pub fn lemma2_margin(
    d: usize,
    s: usize,
    gamma: &Rational,
    tau: &Rational,
    epsilon: &Rational,
) -> Result<BoundReport, BoundsError> {
    if !epsilon.is_positive() {
        return Err(BoundsError::InvalidInput("epsilon must be positive".into()));
    }
    let s_r = ratio::int(s as i64);
    let parts = [
        ("s", s_r.clone()),
        ("tau_s", tau * &s_r),
        ("nine_gamma_s", ratio::int(9) * gamma * &s_r),
        ("three_epsilon_s", ratio::int(3) * epsilon * &s_r),
        ("twenty_gamma_d_over_epsilon", ratio::int(20) * gamma * ratio::int(d as i64) / epsilon),
        ("three", ratio::int(3)),
    ];
    let margin = parts[1..].iter().fold(parts[0].1.clone(), |acc, (_, x)| acc - x);
    let satisfied = margin.is_positive();
    let mut components: Vec<(String, Quantity)> = parts
        .into_iter()
        .map(|(n, x)| (n.to_string(), Quantity::Exact(x)))
        .collect();
    components.push(("margin".into(), Quantity::Exact(margin.clone())));
    Ok(BoundReport {
        name: "lemma2_margin".into(),
        value: Quantity::Exact(margin),
        satisfied,
        components,
    })
}

/// `(γ, τ, ε) = (2^-9 s/d, 2^-7, 2^-3)` with β = 0.
pub fn default_params(d: usize, s: usize) -> Result<LemmaParams, BoundsError> {
    if s == 0 || s > d {
        return Err(BoundsError::InvalidInput(format!("need 1 <= s <= d, got s={s}, d={d}")));
    }
    let gamma = Rational::new(BigInt::from(s), BigInt::from(512 * d));
    LemmaParams::new(d, s, ratio::int(0), gamma, ratio::pow2(-7), ratio::pow2(-3))
        .map_err(|e| BoundsError::InvalidInput(e.to_string()))
}

/// `(c1, c2) = (κ/2^11, 2^9/κ^2)`, so that for `s = κd` the threshold is
/// `c1 (2n)^{-c2/d}`.
pub fn corollary_constants(kappa: &Rational) -> Result<(Rational, Rational), BoundsError> {
    if !kappa.is_positive() || *kappa > ratio::int(1) {
        return Err(BoundsError::InvalidInput("kappa must lie in (0, 1]".into()));
    }
    Ok((kappa * ratio::pow2(-11), ratio::pow2(9) / (kappa * kappa)))
}

/// log2 of `c1 (2n)^{-c2/d}`.
pub fn corollary_threshold(c1: &Rational, c2: &Rational, n: usize, d: usize) -> Result<BigFloat, BoundsError> {
    check_positive("n", n)?;
    check_positive("d", d)?;
    if !c1.is_positive() {
        return Err(BoundsError::InvalidInput("c1 must be positive".into()));
    }
    let cc = &mut consts();
    let slope = rational(&(c2 / ratio::int(d as i64)), cc);
    Ok(log2_rational(c1, cc).sub(&slope.mul(&log2_u(2 * n, cc), PRECISION, RM), PRECISION, RM))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corollary {
    /// Lists that are `c/s`-sparse.
    Four,
    /// Lists that are `s^{c-1}`-sparse.
    Five,
}

/// Evaluates `(1/2)(X)^{s^2/(2^9 d)} >= n` in log2 space, where `X` is
/// `2^-11 c^-1 s^2 d^-1` (variant four) or `2^-11 s^{2-c} d^-1` (variant
/// five). Equality counts as satisfied. Components: `lhs`, `n`.
pub fn corollary45_check(n: usize, d: usize, s: usize, c: &Rational, variant: Corollary) -> Result<BoundReport, BoundsError> {
    if s < MIN_S {
        return Err(BoundsError::HypothesisViolated(s));
    }
    check_positive("n", n)?;
    check_positive("d", d)?;
    let cc = &mut consts();
    let log_s = log2_u(s, cc);
    let base = match variant {
        Corollary::Four => {
            if !c.is_positive() {
                return Err(BoundsError::InvalidInput("c must be positive".into()));
            }
            int(-11)
                .sub(&log2_rational(c, cc), PRECISION, RM)
                .add(&log_s.mul(&int(2), PRECISION, RM), PRECISION, RM)
        }
        Corollary::Five => {
            let two_minus_c = rational(&(ratio::int(2) - c), cc);
            int(-11).add(&two_minus_c.mul(&log_s, PRECISION, RM), PRECISION, RM)
        }
    }
    .sub(&log2_u(d, cc), PRECISION, RM);
    let power = rational(&Rational::new(BigInt::from(s * s), BigInt::from(512 * d)), cc);
    let lhs = int(-1).add(&power.mul(&base, PRECISION, RM), PRECISION, RM);
    let log_n = log2_u(n, cc);
    let satisfied = bf_cmp(&lhs, &log_n) != Ordering::Less;
    Ok(BoundReport {
        name: match variant {
            Corollary::Four => "corollary4".into(),
            Corollary::Five => "corollary5".into(),
        },
        value: Quantity::Log2(Log2(Some(lhs.clone()))),
        satisfied,
        components: vec![
            ("lhs".into(), Quantity::Log2(Log2(Some(lhs)))),
            ("n".into(), Quantity::Log2(Log2(Some(log_n)))),
        ],
    })
}

/// log2 of a positive rational, for callers comparing sparsity levels
/// against thresholds.
pub fn log2_of(r: &Rational) -> Result<BigFloat, BoundsError> {
    if !r.is_positive() {
        return Err(BoundsError::InvalidInput("log2 of a non-positive value".into()));
    }
    Ok(log2_rational(r, &mut consts()))
}

/// `a - b` as an `f64`, for tolerance checks between log2 values.
pub fn difference(a: &BigFloat, b: &BigFloat) -> f64 {
    to_f64(&a.sub(b, PRECISION, RM))
}

/// Exact comparison of two log2 values.
pub fn compare(a: &BigFloat, b: &BigFloat) -> Ordering {
    bf_cmp(a, b)
}

pub fn from_int(k: i64) -> BigFloat {
    int(k)
}

pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    to_f64(x)
}

pub fn bigfloat_decimal(x: &BigFloat) -> String {
    decimal(x)
}
