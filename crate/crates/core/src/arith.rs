//! Prime infrastructure: linear sieve, factorization, prime counting, and
//! reciprocal prime sums.

use crate::error::{Error, Result};

/// Largest `limit` accepted by [`build_table`]. The sieve stores two
/// `u32` arrays of that length (about 170 MB at the cap).
pub const TABLE_LIMIT_CAP: u64 = 20_000_000;

/// Sieve-backed oracle for the primes up to a fixed limit.
///
/// Immutable after construction; all queries are read-only and cheap, so a
/// single table can be shared across threads.
pub struct PrimeTable {
    limit: u64,
    /// spf[m] = smallest prime factor of m for 2 <= m <= limit; 0 below 2.
    spf: Vec<u32>,
    /// All primes <= limit, increasing.
    primes: Vec<u64>,
    /// pi[x] = number of primes <= x for 0 <= x <= limit.
    pi: Vec<u32>,
}

/// Builds a [`PrimeTable`] for the range [2, limit] with a linear sieve.
pub fn build_table(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "table limit must be at least 2, got {limit}"
        )));
    }
    if limit > TABLE_LIMIT_CAP {
        return Err(Error::ResourceLimit(format!(
            "table limit {limit} exceeds cap {TABLE_LIMIT_CAP}"
        )));
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u64> = Vec::new();
    for m in 2..=n {
        if spf[m] == 0 {
            spf[m] = m as u32;
            primes.push(m as u64);
        }
        let spf_m = spf[m] as usize;
        for &p in &primes {
            let p = p as usize;
            if p > spf_m || p * m > n {
                break;
            }
            spf[p * m] = p as u32;
        }
    }
    let mut pi = vec![0u32; n + 1];
    let mut count = 0u32;
    for x in 2..=n {
        if spf[x] == x as u32 {
            count += 1;
        }
        pi[x] = count;
    }
    Ok(PrimeTable {
        limit,
        spf,
        primes,
        pi,
    })
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes <= limit, increasing.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes p with lo < p <= hi, as a slice of [`primes`](Self::primes).
    ///
    /// Requires hi <= limit.
    pub fn primes_in(&self, lo_exclusive: u64, hi_inclusive: u64) -> &[u64] {
        assert!(
            hi_inclusive <= self.limit,
            "primes_in upper bound {hi_inclusive} exceeds table limit {}",
            self.limit
        );
        let start = self.primes.partition_point(|&p| p <= lo_exclusive);
        let end = self.primes.partition_point(|&p| p <= hi_inclusive);
        if start >= end {
            return &[];
        }
        &self.primes[start..end]
    }

    /// Whether m is prime. Requires m <= limit.
    pub fn is_prime(&self, m: u64) -> bool {
        assert!(m <= self.limit, "is_prime({m}) beyond table limit {}", self.limit);
        m >= 2 && self.spf[m as usize] == m as u32
    }

    /// Number of primes <= x. Requires x <= limit.
    pub fn pi(&self, x: u64) -> u64 {
        assert!(x <= self.limit, "pi({x}) beyond table limit {}", self.limit);
        self.pi[x as usize] as u64
    }

    /// Smallest prime factor of m. Requires 2 <= m <= limit.
    pub fn smallest_prime_factor(&self, m: u64) -> u64 {
        assert!(
            m >= 2 && m <= self.limit,
            "smallest_prime_factor({m}) outside [2, {}]",
            self.limit
        );
        self.spf[m as usize] as u64
    }

    /// Prime factorization of m as (prime, exponent) pairs with increasing
    /// primes; factorize(1) = []. Errors if m = 0 or m > limit.
    pub fn factorize(&self, m: u64) -> Result<Vec<(u64, u32)>> {
        if m == 0 || m > self.limit {
            return Err(Error::InvalidArgument(format!(
                "factorize({m}) outside [1, {}]",
                self.limit
            )));
        }
        let mut rest = m as usize;
        let mut out = Vec::new();
        while rest > 1 {
            let p = self.spf[rest] as usize;
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// All divisors of m, increasing. Errors as [`factorize`](Self::factorize).
    pub fn divisors(&self, m: u64) -> Result<Vec<u64>> {
        let fact = self.factorize(m)?;
        let mut divs = vec![1u64];
        for (p, e) in fact {
            let prev = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..prev {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }

    /// Sum of 1/p over primes p <= x, by compensated (Kahan) summation in
    /// descending order of p so the smallest terms accumulate first.
    ///
    /// Requires 2 <= x <= limit.
    pub fn mertens_sum(&self, x: u64) -> Result<f64> {
        if x < 2 || x > self.limit {
            return Err(Error::InvalidArgument(format!(
                "mertens_sum({x}) outside [2, {}]",
                self.limit
            )));
        }
        let end = self.primes.partition_point(|&p| p <= x);
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for &p in self.primes[..end].iter().rev() {
            let term = 1.0 / p as f64 - carry;
            let next = sum + term;
            carry = (next - sum) - term;
            sum = next;
        }
        Ok(sum)
    }

    /// Evaluates the two-sided prime-count comparison
    /// x/ln x + x/(ln x)^2 <= pi(x) <= x/ln x + 2x/(ln x)^2
    /// and returns (lower holds, upper holds). Nothing in this crate assumes
    /// the outcome; callers check it where they rely on it.
    ///
    /// Requires 17 <= x <= limit.
    pub fn check_pi_bounds(&self, x: u64) -> Result<(bool, bool)> {
        if x < 17 || x > self.limit {
            return Err(Error::InvalidArgument(format!(
                "check_pi_bounds({x}) outside [17, {}]",
                self.limit
            )));
        }
        let pi = self.pi(x) as f64;
        let xf = x as f64;
        let ln = xf.ln();
        let main = xf / ln;
        let second = xf / (ln * ln);
        Ok((pi >= main + second, pi <= main + 2.0 * second))
    }
}

/// Advances an index combination to its lexicographic successor; false when
/// exhausted. Indices are strictly increasing positions into [0, n).
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Binomial coefficient, saturating at u128::MAX on overflow.
pub(crate) fn binom_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_lists_small_primes() {
        let t = build_table(10).unwrap();
        assert_eq!(t.primes(), &[2, 3, 5, 7]);
        let t = build_table(2).unwrap();
        assert_eq!(t.primes(), &[2]);
    }

    #[test]
    fn pi_matches_known_values() {
        let t = build_table(1_000_000).unwrap();
        assert_eq!(t.pi(10), 4);
        assert_eq!(t.pi(100), 25);
        assert_eq!(t.pi(1_000), 168);
        assert_eq!(t.pi(10_000), 1_229);
        assert_eq!(t.pi(100_000), 9_592);
        assert_eq!(t.pi(1_000_000), 78_498);
    }

    #[test]
    fn pi_is_cumulative_and_jumps_at_primes() {
        let t = build_table(200).unwrap();
        assert_eq!(t.pi(0), 0);
        assert_eq!(t.pi(1), 0);
        for x in 2..=200u64 {
            let step = t.pi(x) - t.pi(x - 1);
            assert_eq!(step == 1, t.is_prime(x), "pi step wrong at {x}");
        }
    }

    #[test]
    fn factorize_reconstructs_exhaustively() {
        let t = build_table(10_000).unwrap();
        assert_eq!(t.factorize(1).unwrap(), vec![]);
        assert_eq!(t.factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert_eq!(t.factorize(97).unwrap(), vec![(97, 1)]);
        for m in 1..=10_000u64 {
            let f = t.factorize(m).unwrap();
            let mut prod = 1u64;
            for (p, e) in &f {
                assert!(t.is_prime(*p));
                prod *= p.pow(*e);
            }
            assert_eq!(prod, m);
            for w in f.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
        }
    }

    #[test]
    fn divisors_are_sorted_and_complete() {
        let t = build_table(1000).unwrap();
        assert_eq!(t.divisors(1).unwrap(), vec![1]);
        assert_eq!(t.divisors(12).unwrap(), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(t.divisors(97).unwrap(), vec![1, 97]);
        for m in 1..=600u64 {
            let divs = t.divisors(m).unwrap();
            let naive: Vec<u64> = (1..=m).filter(|d| m % d == 0).collect();
            assert_eq!(divs, naive, "divisors({m})");
        }
    }

    #[test]
    fn mertens_sum_small_values() {
        let t = build_table(100).unwrap();
        assert_eq!(t.mertens_sum(2).unwrap(), 0.5);
        let expected = 0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0;
        assert!((t.mertens_sum(10).unwrap() - expected).abs() < 1e-12);
        assert!((t.mertens_sum(10).unwrap() - 1.176190476190476).abs() < 1e-12);
    }

    #[test]
    fn mertens_sum_is_nondecreasing() {
        let t = build_table(500).unwrap();
        let mut prev = 0.0;
        for x in 2..=500u64 {
            let s = t.mertens_sum(x).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn mertens_sum_tracks_lnln_at_a_million() {
        let t = build_table(1_000_000).unwrap();
        let s = t.mertens_sum(1_000_000).unwrap();
        let gap = s - (1_000_000f64).ln().ln();
        assert!(gap > 0.25 && gap < 0.27, "gap = {gap}");
    }

    #[test]
    fn pi_bounds_hold_at_checked_points() {
        let t = build_table(1_000_000).unwrap();
        for x in [10_000u64, 100_000, 1_000_000] {
            assert_eq!(t.check_pi_bounds(x).unwrap(), (true, true), "x = {x}");
        }
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(matches!(build_table(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            build_table(TABLE_LIMIT_CAP + 1),
            Err(Error::ResourceLimit(_))
        ));
        let t = build_table(100).unwrap();
        assert!(matches!(t.factorize(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.factorize(101), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.mertens_sum(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.mertens_sum(101), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.check_pi_bounds(16), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn primes_in_respects_open_closed_endpoints() {
        let t = build_table(100).unwrap();
        assert_eq!(t.primes_in(5, 13), &[7, 11, 13]);
        assert_eq!(t.primes_in(4, 5), &[5]);
        assert_eq!(t.primes_in(5, 5), &[] as &[u64]);
        assert_eq!(t.primes_in(97, 100), &[] as &[u64]);
    }

}
