//! Exact prime-interval products and the logarithmic bound envelopes built
//! from them.
//!
//! The central quantity is the exact integer
//! T(n) = prod over primes sqrt(n) < p <= n of (floor(n/p) + 1),
//! the number of ways to pick at most one multiple of each large prime.
//! Envelopes combine log T(n) with explicit correction terms; everything is
//! in natural logarithms.

use serde::Serialize;

use crate::arith::PrimeTable;
use crate::enumeration::BigCount;
use crate::error::{Error, Result};

/// A positive quantity stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        LogValue(ln)
    }

    /// Logarithm of a plain positive value.
    pub fn from_value(v: f64) -> Self {
        assert!(v > 0.0, "LogValue requires a positive value, got {v}");
        LogValue(v.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }
}

/// Natural log of a positive big integer via its top 53 bits; accurate to a
/// few ulps regardless of magnitude.
pub fn log_of_bigcount(x: &BigCount) -> LogValue {
    let bits = x.bits();
    assert!(bits > 0, "log of zero");
    if bits <= 53 {
        let v: u64 = x.try_into().expect("fits in u64");
        return LogValue((v as f64).ln());
    }
    let shift = bits - 53;
    let top: u64 = (x >> shift).try_into().expect("53 bits fit in u64");
    LogValue((top as f64).ln() + shift as f64 * std::f64::consts::LN_2)
}

/// Big product accumulator that batches small factors through u128 before
/// touching the arbitrary-precision result.
pub(crate) struct ChunkedProduct {
    acc: u128,
    result: BigCount,
}

impl ChunkedProduct {
    pub fn new() -> Self {
        ChunkedProduct {
            acc: 1,
            result: BigCount::from(1u32),
        }
    }

    pub fn push(&mut self, factor: u64) {
        debug_assert!(factor >= 1);
        let f = factor as u128;
        if self.acc > u128::MAX / f {
            self.result *= BigCount::from(self.acc);
            self.acc = f;
        } else {
            self.acc *= f;
        }
    }

    /// Multiplies in base^exp without materializing the exponentiation.
    pub fn push_pow(&mut self, base: u64, exp: u64) {
        debug_assert!(base >= 2);
        let b = base as u128;
        let mut chunk: u128 = b;
        let mut chunk_len: u64 = 1;
        while chunk <= u128::MAX / b {
            chunk *= b;
            chunk_len += 1;
        }
        let mut remaining = exp;
        while remaining >= chunk_len {
            self.result *= BigCount::from(self.acc);
            self.acc = 1;
            self.result *= BigCount::from(chunk);
            remaining -= chunk_len;
        }
        for _ in 0..remaining {
            self.push(base);
        }
    }

    pub fn finish(mut self) -> BigCount {
        self.result *= BigCount::from(self.acc);
        self.result
    }
}

/// Compensated (Kahan) summation.
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Compensated { sum: 0.0, carry: 0.0 }
    }

    pub fn add(&mut self, term: f64) {
        let t = term - self.carry;
        let next = self.sum + t;
        self.carry = (next - self.sum) - t;
        self.sum = next;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

fn check_tn_domain(n: u64, table: &PrimeTable) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds table limit {}",
            table.limit()
        )));
    }
    Ok(())
}

/// Exact T(n): product over primes sqrt(n) < p <= n of (floor(n/p) + 1).
/// The boundary is exact: p > sqrt(n) iff p > isqrt(n) for integer p.
pub fn tn_exact(n: u64, table: &PrimeTable) -> Result<BigCount> {
    check_tn_domain(n, table)?;
    let mut prod = ChunkedProduct::new();
    for &p in table.primes_in(n.isqrt(), n) {
        prod.push(n / p + 1);
    }
    Ok(prod.finish())
}

/// T(n) regrouped by the value of floor(n/p): product over i of
/// (i+1)^(number of primes p > sqrt(n) with floor(n/p) = i). Must agree
/// with [`tn_exact`] bit for bit.
pub fn tn_grouped(n: u64, table: &PrimeTable) -> Result<BigCount> {
    check_tn_domain(n, table)?;
    let s = n.isqrt();
    let mut prod = ChunkedProduct::new();
    for i in 1..=s {
        // floor(n/p) = i iff n/(i+1) < p <= n/i; clip from below at sqrt(n).
        let hi = n / i;
        let lo = (n / (i + 1)).max(s);
        if hi > lo {
            let m = table.pi(hi) - table.pi(lo);
            if m > 0 {
                prod.push_pow(i + 1, m);
            }
        }
    }
    Ok(prod.finish())
}

/// log T(n) as a compensated sum of ln(floor(n/p) + 1); cross-checks the
/// exact product without building it.
pub fn tn_log_sum(n: u64, table: &PrimeTable) -> Result<f64> {
    check_tn_domain(n, table)?;
    let primes = table.primes_in(n.isqrt(), n);
    let mut sum = Compensated::new();
    for &p in primes.iter().rev() {
        sum.add(((n / p + 1) as f64).ln());
    }
    Ok(sum.value())
}

/// Bracket for the infinite product prod over i >= 1 of (1 + 1/i)^(1/i),
/// from its first `terms` factors: the tail sum over i > N of ln(1+1/i)/i
/// is below sum over i > N of 1/i^2 < 1/N, so
/// low = exp(partial) and high = low * exp(1/terms) enclose the limit.
///
/// Requires terms >= 1.
pub fn alpha_bracket(terms: u64) -> (f64, f64) {
    assert!(terms >= 1, "alpha_bracket requires at least one term");
    let mut sum = Compensated::new();
    for i in (1..=terms).rev() {
        sum.add((1.0 / i as f64).ln_1p() / i as f64);
    }
    let low = sum.value().exp();
    let high = low * (1.0 / terms as f64).exp();
    (low, high)
}

/// Multipliers for the order-2 envelope correction term; the low and high
/// envelopes use c1 and c2 respectively.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundParams {
    pub c1: f64,
    pub c2: f64,
}

impl BoundParams {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c1 <= c2) {
            return Err(Error::InvalidArgument(format!(
                "bound parameters need 0 < c1 <= c2, got c1={c1}, c2={c2}"
            )));
        }
        Ok(BoundParams { c1, c2 })
    }
}

/// Envelope for the log-count of order-2 sets in [1, n]:
/// log T(n) + c * n^(2/3) / ln n with c in [c1, c2].
///
/// Requires 3 <= n <= table limit.
pub fn envelope_h2(
    n: u64,
    params: BoundParams,
    table: &PrimeTable,
) -> Result<(LogValue, LogValue)> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "order-2 envelope requires n >= 3, got {n}"
        )));
    }
    let log_t = log_of_bigcount(&tn_exact(n, table)?).ln();
    let term = (n as f64).powf(2.0 / 3.0) / (n as f64).ln();
    Ok((
        LogValue::from_ln(log_t + params.c1 * term),
        LogValue::from_ln(log_t + params.c2 * term),
    ))
}

/// Envelope for the log-count of order-h sets (h >= 3) in [1, n]:
/// log T(n) + sqrt(n) + c * sqrt(n) ln ln n / ln n with c in [-11, 4].
///
/// Requires 16 <= n <= table limit (so ln ln n is safely positive).
pub fn envelope_h3plus(n: u64, table: &PrimeTable) -> Result<(LogValue, LogValue)> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "order-3+ envelope requires n >= 16, got {n}"
        )));
    }
    let log_t = log_of_bigcount(&tn_exact(n, table)?).ln();
    let sq = (n as f64).sqrt();
    let ln = (n as f64).ln();
    let swing = sq * ln.ln() / ln;
    Ok((
        LogValue::from_ln(log_t + sq - 11.0 * swing),
        LogValue::from_ln(log_t + sq + 4.0 * swing),
    ))
}

/// Exact logs of the two medium-prime factors appearing in the order-h
/// upper bound (h >= 3), together with the analytic caps they are expected
/// to stay under. The caps are reported, never assumed.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct UpperFactorTerms {
    /// log prod (floor(n/p)+1) over primes n^(2/(h+1))/ln n < p <= sqrt(n)/ln n.
    pub ap2: LogValue,
    /// log prod (floor(n/p)+1) over primes sqrt(n)/ln n < p <= sqrt(n).
    pub ap3: LogValue,
    /// Analytic cap 3 sqrt(n)/ln n for ap2.
    pub ap2_cap: LogValue,
    /// Analytic cap sqrt(n) + 3 sqrt(n) ln ln n / ln n for ap3.
    pub ap3_cap: LogValue,
}

impl UpperFactorTerms {
    pub fn ap2_within_cap(&self) -> bool {
        self.ap2 <= self.ap2_cap
    }

    pub fn ap3_within_cap(&self) -> bool {
        self.ap3 <= self.ap3_cap
    }
}

/// Computes [`UpperFactorTerms`] exactly. Interval endpoints other than
/// sqrt(n) are reals; an integer prime lies in an interval iff it does
/// under f64 comparison of the endpoints.
///
/// Requires h >= 3, n >= 16, and isqrt(n) <= table limit.
pub fn upper_factor_terms(n: u64, h: u32, table: &PrimeTable) -> Result<UpperFactorTerms> {
    if h < 3 {
        return Err(Error::InvalidArgument(format!(
            "upper factor terms require h >= 3, got {h}"
        )));
    }
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "upper factor terms require n >= 16, got {n}"
        )));
    }
    let s = n.isqrt();
    if s > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "sqrt({n}) exceeds table limit {}",
            table.limit()
        )));
    }
    let ln = (n as f64).ln();
    let sq = (n as f64).sqrt();
    let lo2 = (n as f64).powf(2.0 / (h as f64 + 1.0)) / ln;
    let hi2 = sq / ln;

    let ap2 = log_prime_interval_product(n, lo2, hi2.floor() as u64, table);
    let ap3 = log_prime_interval_product(n, hi2, s, table);

    Ok(UpperFactorTerms {
        ap2,
        ap3,
        ap2_cap: LogValue::from_ln(3.0 * sq / ln),
        ap3_cap: LogValue::from_ln(sq + 3.0 * sq * ln.ln() / ln),
    })
}

/// log prod (floor(n/p)+1) over primes lo < p <= hi, exact product first.
fn log_prime_interval_product(n: u64, lo: f64, hi: u64, table: &PrimeTable) -> LogValue {
    let lo_int = if lo < 0.0 { 0 } else { lo.floor() as u64 };
    let mut prod = ChunkedProduct::new();
    for &p in table.primes_in(lo_int.min(hi), hi) {
        if (p as f64) > lo {
            prod.push(n / p + 1);
        }
    }
    log_of_bigcount(&prod.finish())
}

/// Signed gap between the harmonic regrouping
/// sum over i >= 1 of ln(1+1/i) * pi(n/i) and log T(n). By telescoping the
/// gap equals sum over primes p <= sqrt(n) of ln(floor(n/p)+1), so it is
/// positive and empirically below 2 sqrt(n) (checked in tests, not assumed).
pub fn grouped_formula_discrepancy(n: u64, table: &PrimeTable) -> Result<f64> {
    check_tn_domain(n, table)?;
    let mut sum = Compensated::new();
    for i in (1..=n).rev() {
        let count = table.pi(n / i);
        if count > 0 {
            sum.add((1.0 / i as f64).ln_1p() * count as f64);
        }
    }
    Ok(sum.value() - tn_log_sum(n, table)?)
}
