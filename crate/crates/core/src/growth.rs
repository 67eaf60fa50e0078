//! Growth functions sampled on finite tables.
//!
//! A [`GrowthFunction`] is a non-decreasing integer table `n ↦ v(n)` on
//! `{0, …, N}`. This module certifies bounded growth of derivative, rewrites
//! tables into the canonical form the tree construction needs, and searches
//! for growth-type witnesses `A` with
//!
//! ```text
//! f(n) ≤ A·h(An + A) + A   and   h(n) ≤ A·f(An + A) + A.
//! ```
//!
//! Every verdict is a statement about the finite table. Whenever `An + A`
//! runs past the horizon of the right-hand table, the right-hand side is
//! bounded below by the last tabulated value (monotonicity), so an accepted
//! witness holds for *every* non-decreasing extension of the tables. A
//! missing witness is evidence of inequivalence, never a proof.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Default base of the exponential envelope for canonical tables.
pub fn default_lambda() -> Rational64 {
    Rational64::new(19, 10)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrowthError {
    #[error("growth table is empty")]
    Empty,
    #[error("growth table decreases between n={0} and n={next}", next = .0 + 1)]
    Decreasing(usize),
    #[error("horizon {horizon} is too short (need at least {needed})")]
    TooShort { horizon: usize, needed: usize },
    #[error("not a bgd function: {reason} at n={n}")]
    NotBgd { n: usize, reason: &'static str },
    #[error("lambda must lie strictly between 1 and 2, got {0}")]
    InvalidLambda(Rational64),
    #[error("table is not canonical: {0}")]
    NotCanonical(String),
    #[error("normalization failed: {0}")]
    NormalizationFailed(NormalizationFailure),
    #[error("An+A exceeds the horizon at n=0 for every A ≤ {a_max}")]
    HorizonTooShort { a_max: u64 },
}

/// Why [`normalize`] gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalizationFailure {
    /// `v(n)/λ^n` is still rising at the horizon: no scale is certified.
    ScaleUnbounded { lambda: Rational64, horizon: usize },
    /// The scale witness exceeds the configured budget.
    ScaleBudget { scale: u64, budget: u64 },
    /// No witness `A ≤ a_max` links the rewrite to the input.
    NotEquivalent { a_max: u64 },
}

impl fmt::Display for NormalizationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ScaleUnbounded { lambda, horizon } => {
                write!(f, "v(n)/{lambda}^n is still increasing at the horizon N={horizon}; scale budget exhausted")
            }
            Self::ScaleBudget { scale, budget } => {
                write!(f, "scale witness C={scale} exceeds budget {budget}")
            }
            Self::NotEquivalent { a_max } => {
                write!(f, "no growth-type witness A ≤ {a_max} for the rewritten table")
            }
        }
    }
}

/// A non-decreasing table `n ↦ v(n)` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthFunction {
    values: Vec<u64>,
    bgd_constant: Option<u64>,
}

impl GrowthFunction {
    pub fn new(values: Vec<u64>) -> Result<Self, GrowthError> {
        if values.is_empty() {
            return Err(GrowthError::Empty);
        }
        if let Some(n) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(GrowthError::Decreasing(n));
        }
        Ok(Self { values, bgd_constant: None })
    }

    /// Samples `f` on `0..=horizon`.
    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> u64) -> Result<Self, GrowthError> {
        Self::new((0..=horizon).map(f).collect())
    }

    /// Builds a table from `v(0)` and the increments `v(n+1) - v(n)`.
    pub fn from_increments(start: u64, increments: &[u64]) -> Self {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = start;
        values.push(acc);
        for &d in increments {
            acc += d;
            values.push(acc);
        }
        Self { values, bgd_constant: None }
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn value(&self, n: usize) -> u64 {
        self.values[n]
    }

    /// `v(min(n, N))`; the tightest lower bound for `v(n)` the table provides.
    pub fn clamped(&self, n: u64) -> u64 {
        let last = self.horizon() as u64;
        self.values[n.min(last) as usize]
    }

    /// `d(n) = v(n+1) - v(n)` for `n = 0..N`.
    pub fn increments(&self) -> Vec<u64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn bgd_constant(&self) -> Option<u64> {
        self.bgd_constant
    }

    /// Restricts the table to `0..=horizon`.
    pub fn truncated(&self, horizon: usize) -> Self {
        let end = horizon.min(self.horizon());
        Self { values: self.values[..=end].to_vec(), bgd_constant: None }
    }

    /// Computes the least bgd constant and stores it on the table.
    pub fn check_bgd(&mut self) -> Result<u64, GrowthError> {
        let l = check_bgd(self)?;
        self.bgd_constant = Some(l);
        Ok(l)
    }
}

/// Least `L ≥ 1` with `1/L ≤ d(n+1) ≤ L·d(n)` for every `n ≤ N-2`.
///
/// On integer tables the lower bound reduces to `d(n+1) ≥ 1`, so a zero
/// increment anywhere after the first step means the function stalls and no
/// `L` exists.
pub fn check_bgd(v: &GrowthFunction) -> Result<u64, GrowthError> {
    if v.horizon() < 3 {
        return Err(GrowthError::TooShort { horizon: v.horizon(), needed: 3 });
    }
    let d = v.increments();
    let mut l = 1u64;
    for n in 0..d.len() - 1 {
        let (cur, next) = (d[n], d[n + 1]);
        if next == 0 {
            return Err(GrowthError::NotBgd { n, reason: "zero increment v(n+2)-v(n+1)" });
        }
        if cur == 0 {
            return Err(GrowthError::NotBgd { n, reason: "growth after a zero increment" });
        }
        l = l.max(next.div_ceil(cur));
    }
    Ok(l)
}

/// Least integer `C` with `v(n) ≤ C·λ^n` on the table, and where the ratio peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleWitness {
    pub scale: u64,
    /// The `n` at which `v(n)/λ^n` is largest (first one on ties).
    pub argmax: usize,
}

/// Scans `v(n)/λ^n` exactly and returns the least integer scale above it.
///
/// Saturates at `u64::MAX` for astronomically large ratios.
pub fn subexponential_check(values: &[u64], lambda: Rational64) -> ScaleWitness {
    let p = BigUint::from(*lambda.numer() as u64);
    let q = BigUint::from(*lambda.denom() as u64);
    let mut p_pow = BigUint::from(1u32);
    let mut q_pow = BigUint::from(1u32);
    // ratio_n = v(n)·q^n / p^n; compare fractions by cross-multiplication
    let mut best: Option<(BigUint, BigUint, usize)> = None;
    for (n, &v) in values.iter().enumerate() {
        if n > 0 {
            p_pow *= &p;
            q_pow *= &q;
        }
        let num = BigUint::from(v) * &q_pow;
        let better = match &best {
            None => true,
            Some((bn, bd, _)) => &num * bd > bn * &p_pow,
        };
        if better {
            best = Some((num, p_pow.clone(), n));
        }
    }
    let (num, den, argmax) = best.expect("non-empty table");
    let scale = if num.is_zero() { BigUint::from(1u32) } else { num.div_ceil(&den) };
    ScaleWitness { scale: scale.to_u64().unwrap_or(u64::MAX).max(1), argmax }
}

/// Whether `v(n)/λ^n` strictly increases over the last step of the table.
fn ratio_rising_at_horizon(values: &[u64], lambda: Rational64) -> bool {
    let n = values.len() - 1;
    if n == 0 {
        return false;
    }
    // v(n)/λ^n > v(n-1)/λ^(n-1)  ⇔  v(n)·q > v(n-1)·p
    let p = *lambda.numer() as u128;
    let q = *lambda.denom() as u128;
    values[n] as u128 * q > values[n - 1] as u128 * p
}

/// Independent check of the three canonical-form conditions.
pub fn check_canonical(values: &[u64], lambda: Rational64, scale: u64) -> Result<(), String> {
    if values.first() != Some(&1) {
        return Err(format!("v(0) = {:?}, expected 1", values.first()));
    }
    if let Some(n) = values.windows(2).position(|w| w[1] < w[0]) {
        return Err(format!("table decreases at n={n}"));
    }
    for n in 0..values.len().saturating_sub(2) {
        let cur = values[n + 1] - values[n];
        let next = values[n + 2] - values[n + 1];
        if next < 2 || next > 2 * cur {
            return Err(format!("increment condition 2 ≤ {next} ≤ 2·{cur} fails at n={n}"));
        }
    }
    let p = BigUint::from(*lambda.numer() as u64);
    let q = BigUint::from(*lambda.denom() as u64);
    let mut p_pow = BigUint::from(1u32);
    let mut q_pow = BigUint::from(1u32);
    for (n, &v) in values.iter().enumerate() {
        if n > 0 {
            p_pow *= &p;
            q_pow *= &q;
        }
        if BigUint::from(v) * &q_pow > BigUint::from(scale) * &p_pow {
            return Err(format!("v({n}) = {v} exceeds {scale}·{lambda}^{n}"));
        }
    }
    Ok(())
}

/// A table in the canonical form consumed by the tree construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGrowthFunction {
    table: GrowthFunction,
    lambda: Rational64,
    scale: ScaleWitness,
    witness: Option<GrowthClassWitness>,
}

impl CanonicalGrowthFunction {
    /// Validates a table that is already canonical.
    pub fn new(values: Vec<u64>, lambda: Rational64) -> Result<Self, GrowthError> {
        validate_lambda(lambda)?;
        let table = GrowthFunction::new(values)?;
        let scale = subexponential_check(table.values(), lambda);
        check_canonical(table.values(), lambda, scale.scale).map_err(GrowthError::NotCanonical)?;
        Ok(Self { table, lambda, scale, witness: None })
    }

    pub fn table(&self) -> &GrowthFunction {
        &self.table
    }

    pub fn values(&self) -> &[u64] {
        self.table.values()
    }

    pub fn horizon(&self) -> usize {
        self.table.horizon()
    }

    pub fn lambda(&self) -> Rational64 {
        self.lambda
    }

    pub fn scale_witness(&self) -> ScaleWitness {
        self.scale
    }

    /// The growth-type witness linking this table to the input of [`normalize`].
    pub fn witness(&self) -> Option<GrowthClassWitness> {
        self.witness
    }

    /// Level counts `c(0) = 1`, `c(n) = v(n) - v(n-1)`.
    pub fn level_counts(&self) -> Vec<u64> {
        let mut counts = vec![self.values()[0]];
        counts.extend(self.table.increments());
        counts
    }

    pub fn truncated(&self, horizon: usize) -> Self {
        let table = self.table.truncated(horizon);
        let scale = subexponential_check(table.values(), self.lambda);
        Self { table, lambda: self.lambda, scale, witness: self.witness }
    }
}

fn validate_lambda(lambda: Rational64) -> Result<(), GrowthError> {
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    if lambda <= one || lambda >= two {
        return Err(GrowthError::InvalidLambda(lambda));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeConfig {
    pub lambda: Rational64,
    pub a_max: u64,
    pub scale_budget: u64,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        Self { lambda: default_lambda(), a_max: 64, scale_budget: 4096 }
    }
}

/// Rewrites a bgd table into canonical form and certifies the rewrite.
///
/// Canonical input with `v(1) = 3` is returned unchanged. Otherwise the table
/// is re-based to `v'(0) = 1, v'(1) = 3` and its later increments are clamped
/// from below by 2 and from above by twice the previous (clamped) increment. The result is then checked
/// against the input with [`same_growth_type`].
pub fn normalize(v: &GrowthFunction, config: &NormalizeConfig) -> Result<CanonicalGrowthFunction, GrowthError> {
    validate_lambda(config.lambda)?;
    check_bgd(v)?;

    let values = if is_canonical_shape(v.values()) { v.values().to_vec() } else { clamp_increments(&v.increments()) };

    let fail = |why| GrowthError::NormalizationFailed(why);
    if ratio_rising_at_horizon(&values, config.lambda) {
        return Err(fail(NormalizationFailure::ScaleUnbounded { lambda: config.lambda, horizon: values.len() - 1 }));
    }
    let scale = subexponential_check(&values, config.lambda);
    if scale.scale > config.scale_budget {
        return Err(fail(NormalizationFailure::ScaleBudget { scale: scale.scale, budget: config.scale_budget }));
    }

    let table = GrowthFunction::new(values).expect("clamped increments are non-negative");
    let witness = same_growth_type(v, &table, config.a_max)?
        .ok_or(fail(NormalizationFailure::NotEquivalent { a_max: config.a_max }))?;

    // never trust the rewrite: re-check the three conditions from scratch
    check_canonical(table.values(), config.lambda, scale.scale).map_err(GrowthError::NotCanonical)?;

    Ok(CanonicalGrowthFunction { table, lambda: config.lambda, scale, witness: Some(witness) })
}

fn is_canonical_shape(values: &[u64]) -> bool {
    values[0] == 1
        && values.get(1).is_none_or(|&v1| v1 == 3)
        && values.windows(3).all(|w| {
            let (cur, next) = (w[1] - w[0], w[2] - w[1]);
            next >= 2 && next <= 2 * cur
        })
}

fn clamp_increments(increments: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(1u64);
    let mut prev: Option<u64> = None;
    for &d in increments {
        let clamped = match prev {
            // the root has two branches
            None => 2,
            Some(p) => d.max(2).min(2 * p),
        };
        out.push(out.last().unwrap() + clamped);
        prev = Some(clamped);
    }
    out
}

/// Evidence that two tables have the same growth type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthClassWitness {
    pub a: u64,
    /// Both inequalities hold for every `n` up to here (the shorter horizon).
    pub checked_range: usize,
}

/// Which of the two growth-type inequalities a refutation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `f(n) > A·h(An+A) + A`
    Forward,
    /// `h(n) > A·f(An+A) + A`
    Backward,
}

/// First `n` at which `lhs(n) ≤ a·rhs(an+a) + a` cannot be established.
fn first_undominated(lhs: &GrowthFunction, rhs: &GrowthFunction, a: u64) -> Option<usize> {
    let a128 = a as u128;
    (0..=lhs.horizon()).find(|&n| {
        let idx = a.saturating_mul(n as u64 + 1);
        let bound = a128 * rhs.clamped(idx) as u128 + a128;
        lhs.value(n) as u128 > bound
    })
}

/// The first failing inequality for a candidate `a`, if any.
pub fn refutation(f: &GrowthFunction, h: &GrowthFunction, a: u64) -> Option<(Direction, usize)> {
    first_undominated(f, h, a)
        .map(|n| (Direction::Forward, n))
        .or_else(|| first_undominated(h, f, a).map(|n| (Direction::Backward, n)))
}

/// Least `A ≤ a_max` certifying that `f` and `h` have the same growth type.
///
/// `Ok(None)` means no candidate survived on the tables: evidence of
/// inequivalence, not a proof.
pub fn same_growth_type(
    f: &GrowthFunction,
    h: &GrowthFunction,
    a_max: u64,
) -> Result<Option<GrowthClassWitness>, GrowthError> {
    let checked_range = f.horizon().min(h.horizon());
    if checked_range < 1 {
        return Err(GrowthError::HorizonTooShort { a_max });
    }
    Ok((1..=a_max).find(|&a| refutation(f, h, a).is_none()).map(|a| GrowthClassWitness { a, checked_range }))
}

/// Integer ceiling of a non-negative rational.
pub(crate) fn ceil_u64(x: Rational64) -> u64 {
    debug_assert!(*x.numer() >= 0);
    x.ceil().to_integer() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(values: &[u64]) -> GrowthFunction {
        GrowthFunction::new(values.to_vec()).unwrap()
    }

    #[test]
    fn bgd_of_linear_is_one() {
        let mut v = GrowthFunction::from_fn(10, |n| n as u64 + 1).unwrap();
        assert_eq!(v.check_bgd(), Ok(1));
        assert_eq!(v.bgd_constant(), Some(1));
    }

    #[test]
    fn bgd_of_doubling_is_two() {
        assert_eq!(check_bgd(&table(&[1, 2, 4, 8, 16, 32])), Ok(2));
    }

    #[test]
    fn stalling_table_is_not_bgd() {
        assert!(matches!(check_bgd(&table(&[1, 2, 2, 2])), Err(GrowthError::NotBgd { .. })));
        assert!(matches!(check_bgd(&table(&[1, 1, 2, 3])), Err(GrowthError::NotBgd { n: 0, .. })));
    }

    #[test]
    fn bgd_needs_four_points() {
        assert!(matches!(check_bgd(&table(&[1, 2, 3])), Err(GrowthError::TooShort { .. })));
    }

    #[test]
    fn decreasing_tables_are_rejected() {
        assert_eq!(GrowthFunction::new(vec![1, 3, 2]), Err(GrowthError::Decreasing(1)));
        assert_eq!(GrowthFunction::new(vec![]), Err(GrowthError::Empty));
    }

    #[test]
    fn canonical_input_is_kept() {
        let v = GrowthFunction::from_fn(20, |n| 2 * n as u64 + 1).unwrap();
        let c = normalize(&v, &NormalizeConfig::default()).unwrap();
        assert_eq!(c.values(), v.values());
        assert_eq!(c.witness().unwrap().a, 1);
    }

    #[test]
    fn linear_is_clamped_to_odd_numbers() {
        let v = GrowthFunction::from_fn(30, |n| n as u64 + 1).unwrap();
        let c = normalize(&v, &NormalizeConfig::default()).unwrap();
        let expected: Vec<u64> = (0..=30).map(|n| 2 * n + 1).collect();
        assert_eq!(c.values(), expected.as_slice());
        assert_eq!(c.witness().unwrap().a, 2);
    }

    #[test]
    fn exponential_fails_with_lambda_below_two() {
        let v = GrowthFunction::from_fn(30, |n| 1 << n).unwrap();
        let cfg = NormalizeConfig { lambda: Rational64::new(19, 10), ..Default::default() };
        assert!(matches!(
            normalize(&v, &cfg),
            Err(GrowthError::NormalizationFailed(NormalizationFailure::ScaleUnbounded { .. }))
        ));
    }

    #[test]
    fn scale_budget_is_enforced() {
        let v = GrowthFunction::from_fn(20, |n| 2 * n as u64 + 1).unwrap();
        let cfg = NormalizeConfig { scale_budget: 1, ..Default::default() };
        assert!(matches!(
            normalize(&v, &cfg),
            Err(GrowthError::NormalizationFailed(NormalizationFailure::ScaleBudget { scale: 2, .. }))
        ));
    }

    #[test]
    fn lambda_outside_unit_interval_is_rejected() {
        let v = GrowthFunction::from_fn(10, |n| 2 * n as u64 + 1).unwrap();
        let cfg = NormalizeConfig { lambda: Rational64::from_integer(2), ..Default::default() };
        assert!(matches!(normalize(&v, &cfg), Err(GrowthError::InvalidLambda(_))));
    }

    #[test]
    fn scale_of_odd_numbers_at_three_halves() {
        let v: Vec<u64> = (0..=20).map(|n| 2 * n + 1).collect();
        let s = subexponential_check(&v, Rational64::new(3, 2));
        assert_eq!(s, ScaleWitness { scale: 3, argmax: 2 });
    }

    #[test]
    fn scale_of_constant_is_one() {
        let s = subexponential_check(&[1; 12], default_lambda());
        assert_eq!(s, ScaleWitness { scale: 1, argmax: 0 });
    }

    #[test]
    fn scale_of_doubling_increments_peaks_at_horizon() {
        // 1, 3, 5, 9, 17, … : increments 2, 2, 4, 8, …
        let mut inc = vec![2u64, 2];
        for _ in 0..18 {
            inc.push(inc.last().unwrap() * 2);
        }
        let v = GrowthFunction::from_increments(1, &inc);
        let short = subexponential_check(&v.values()[..11], default_lambda());
        let long = subexponential_check(v.values(), default_lambda());
        assert_eq!(short.argmax, 10);
        assert_eq!(long.argmax, 20);
        assert!(long.scale > short.scale);
    }

    #[test]
    fn identity_has_witness_one() {
        let f = GrowthFunction::from_fn(50, |n| n as u64).unwrap();
        let w = same_growth_type(&f, &f, 8).unwrap().unwrap();
        assert_eq!(w, GrowthClassWitness { a: 1, checked_range: 50 });
    }

    #[test]
    fn doubling_the_values_needs_two() {
        let f = GrowthFunction::from_fn(100, |n| n as u64).unwrap();
        let h = GrowthFunction::from_fn(100, |n| 2 * n as u64).unwrap();
        assert!(refutation(&f, &h, 1).is_some());
        assert_eq!(same_growth_type(&f, &h, 64).unwrap().unwrap().a, 2);
    }

    #[test]
    fn linear_and_exponential_are_separated() {
        let f = GrowthFunction::from_fn(40, |n| n as u64).unwrap();
        let h = GrowthFunction::from_fn(40, |n| 1u64 << n).unwrap();
        for a in 1..=64 {
            assert_eq!(refutation(&f, &h, a).map(|r| r.0), Some(Direction::Backward), "A={a}");
        }
        assert_eq!(same_growth_type(&f, &h, 64).unwrap(), None);
    }

    #[test]
    fn single_point_tables_are_too_short() {
        let f = table(&[1]);
        assert_eq!(same_growth_type(&f, &f, 4), Err(GrowthError::HorizonTooShort { a_max: 4 }));
    }

    #[test]
    fn canonical_constructor_rejects_bad_tables() {
        assert!(CanonicalGrowthFunction::new(vec![2, 4, 6, 8], default_lambda()).is_err());
        assert!(CanonicalGrowthFunction::new(vec![1, 3, 4, 6], default_lambda()).is_err());
        assert!(CanonicalGrowthFunction::new(vec![1, 2, 4, 8], default_lambda()).is_ok());
    }
}
