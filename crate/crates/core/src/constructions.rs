//! Deterministic generators for large families with the divisibility
//! property, together with exact counts of how many families each
//! construction yields.
//!
//! Two constructions are provided. For order 2 the family is a union of
//! one chosen multiple per prime above `sqrt(n)` with products of triples
//! from a linear 3-uniform hypergraph on mid-sized primes. For order at
//! least 3 the family picks at most one multiple per prime in a cut
//! interval `(lower, n]`, subject to that prime being the unique interval
//! prime of the chosen multiple. Every constructed set is re-verified with
//! the property checker before it is returned.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::PrimeTable;
use crate::asymptotics::ChunkedProduct;
use crate::enumeration::BigCount;
use crate::error::{Error, Result};
use crate::property::{possesses_ph, IntegerSet};

/// Hard cap on the number of candidate triples the hypergraph generator
/// will enumerate and shuffle.
pub const TRIPLE_ENUM_CAP: u128 = 10_000_000;

/// Lower endpoint of the large-prime interval `I = (lower, n]`.
///
/// The default cut is `sqrt(n)/ln n`. The `Sqrt` cut uses the exact
/// integer predicate `p*p > n`; the other two compare against a float
/// threshold, which is unambiguous for the prime sizes this crate
/// supports (primes are exactly representable as `f64` far beyond the
/// table cap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cut {
    /// `lower = sqrt(n) / ln n` (the default).
    SqrtOverLog,
    /// `lower = sqrt(n)`, decided exactly via `p*p > n`.
    Sqrt,
    /// A fixed numeric lower endpoint.
    Fixed(f64),
}

impl Cut {
    /// Numeric value of the lower endpoint for universe `n`.
    pub fn lower_bound(&self, n: u64) -> f64 {
        match self {
            Cut::SqrtOverLog => (n as f64).sqrt() / (n as f64).ln(),
            Cut::Sqrt => (n as f64).sqrt(),
            Cut::Fixed(v) => *v,
        }
    }

    /// Whether prime `p` lies in `I = (lower, n]`.
    pub fn contains(&self, p: u64, n: u64) -> bool {
        if p > n {
            return false;
        }
        match self {
            Cut::Sqrt => (p as u128) * (p as u128) > n as u128,
            _ => (p as f64) > self.lower_bound(n),
        }
    }

    /// Stable textual label, recorded in family file headers. The
    /// resolved numeric endpoint is embedded so the boundary decision is
    /// documented in the output itself.
    pub fn label(&self, n: u64) -> String {
        match self {
            Cut::SqrtOverLog => format!("sqrt-over-log({})", self.lower_bound(n)),
            Cut::Sqrt => "sqrt".to_string(),
            Cut::Fixed(v) => format!("fixed({v})"),
        }
    }

    /// Parse a cut description: `sqrt-over-log`, `sqrt`, or a number.
    pub fn parse(text: &str) -> Result<Cut> {
        match text {
            "sqrt-over-log" => Ok(Cut::SqrtOverLog),
            "sqrt" => Ok(Cut::Sqrt),
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "cut must be 'sqrt-over-log', 'sqrt', or a number, got '{other}'"
                    ))
                })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "fixed cut must be a finite non-negative number, got {v}"
                    )));
                }
                Ok(Cut::Fixed(v))
            }
        }
    }
}

impl Default for Cut {
    fn default() -> Self {
        Cut::SqrtOverLog
    }
}

/// Parameters of a family construction: universe size, property order,
/// large-prime cut, and the seed driving all randomized steps.
#[derive(Debug, Clone, Copy)]
pub struct FamilySpec {
    pub n: u64,
    pub h: u32,
    pub cut: Cut,
    pub seed: u64,
}

impl FamilySpec {
    /// Validates `n >= 1`, `h >= 2`, and (for orders that use the cut
    /// interval) `lower < n`.
    pub fn new(n: u64, h: u32, cut: Cut, seed: u64) -> Result<FamilySpec> {
        if n == 0 {
            return Err(Error::InvalidArgument("universe must be at least 1".into()));
        }
        if h < 2 {
            return Err(Error::InvalidArgument(format!(
                "family constructions require order at least 2, got {h}"
            )));
        }
        if h >= 3 {
            let lower = cut.lower_bound(n);
            if !lower.is_finite() || lower >= n as f64 {
                return Err(Error::InvalidArgument(format!(
                    "cut interval is empty: lower endpoint {lower} must be below n = {n}"
                )));
            }
        }
        Ok(FamilySpec { n, h, cut, seed })
    }

    /// Whether prime `p` lies in this spec's interval `I = (lower, n]`.
    pub fn in_interval(&self, p: u64) -> bool {
        self.cut.contains(p, self.n)
    }
}

/// All primes `p <= n` inside the spec's interval, as a slice of the
/// table's prime list. Cut predicates are monotone in `p`, so the
/// interval primes form a contiguous block.
pub fn interval_primes<'t>(spec: &FamilySpec, table: &'t PrimeTable) -> Result<&'t [u64]> {
    if spec.n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {} exceeds prime table limit {}",
            spec.n, table.limit()
        )));
    }
    let upto = table.primes_in(0, spec.n);
    let start = upto.partition_point(|&p| !spec.in_interval(p));
    Ok(&upto[start..])
}

/// A 3-uniform hypergraph on prime vertices in which any two triples
/// share at most one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearHypergraph {
    /// Strictly increasing vertex list.
    pub vertices: Vec<u64>,
    /// Each triple strictly increasing; the list is sorted.
    pub triples: Vec<[u64; 3]>,
}

impl LinearHypergraph {
    /// An empty hypergraph on the given vertices.
    pub fn empty(vertices: Vec<u64>) -> LinearHypergraph {
        LinearHypergraph { vertices, triples: Vec::new() }
    }

    /// Checks that every triple consists of three distinct listed
    /// vertices in increasing order and that no vertex pair appears in
    /// two triples.
    pub fn validate_linear(&self) -> Result<()> {
        if self.vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "hypergraph vertices must be strictly increasing".into(),
            ));
        }
        let mut pairs = std::collections::HashSet::new();
        for t in &self.triples {
            if !(t[0] < t[1] && t[1] < t[2]) {
                return Err(Error::InvalidArgument(format!(
                    "triple {t:?} is not strictly increasing"
                )));
            }
            for v in t {
                if self.vertices.binary_search(v).is_err() {
                    return Err(Error::InvalidArgument(format!(
                        "triple {t:?} uses unlisted vertex {v}"
                    )));
                }
            }
            for pair in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                if !pairs.insert(pair) {
                    return Err(Error::InvalidArgument(format!(
                        "vertex pair {pair:?} appears in two triples"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Primes `p` with `8*p^3 > n` and `p^3 < n` — the mid-sized band whose
/// triple products stay below `n`. Both predicates are exact in integers.
pub fn cube_interval_primes(n: u64, table: &PrimeTable) -> Result<Vec<u64>> {
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {n} exceeds prime table limit {}",
            table.limit()
        )));
    }
    Ok(table
        .primes_in(0, n)
        .iter()
        .copied()
        .filter(|&p| {
            let cube = (p as u128).pow(3);
            8 * cube > n as u128 && cube < n as u128
        })
        .collect())
}

/// Greedy seeded generator for a linear 3-uniform hypergraph on the
/// primes strictly between `primes_lo` and `primes_hi`.
///
/// Candidate triples are visited in a seeded random order and accepted
/// whenever all three of their vertex pairs are still unused, so the
/// result is maximal under the greedy pass and deterministic for a fixed
/// seed. Fewer than three vertices yield an empty triple list.
pub fn generate_linear_hypergraph(
    primes_lo: u64,
    primes_hi: u64,
    seed: u64,
    table: &PrimeTable,
) -> Result<LinearHypergraph> {
    if primes_lo >= primes_hi {
        return Err(Error::InvalidArgument(format!(
            "vertex interval ({primes_lo}, {primes_hi}) is empty"
        )));
    }
    if primes_hi > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "vertex bound {primes_hi} exceeds prime table limit {}",
            table.limit()
        )));
    }
    // Open at both ends: primes p with primes_lo < p < primes_hi.
    let vertices: Vec<u64> = table.primes_in(primes_lo, primes_hi - 1).to_vec();
    generate_linear_on(vertices, seed)
}

/// Greedy seeded linear hypergraph on an explicit vertex list.
pub fn generate_linear_on(vertices: Vec<u64>, seed: u64) -> Result<LinearHypergraph> {
    let k = vertices.len();
    if k < 3 {
        return Ok(LinearHypergraph::empty(vertices));
    }
    if k > u16::MAX as usize {
        return Err(Error::ResourceLimit(format!(
            "hypergraph generator supports at most {} vertices, got {k}",
            u16::MAX
        )));
    }
    let candidates = crate::arith::binom_u128(k as u64, 3);
    if candidates > TRIPLE_ENUM_CAP {
        return Err(Error::ResourceLimit(format!(
            "{candidates} candidate triples exceed the enumeration cap {TRIPLE_ENUM_CAP}"
        )));
    }

    let mut triples: Vec<[u16; 3]> = Vec::with_capacity(candidates as usize);
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                triples.push([i as u16, j as u16, l as u16]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    triples.shuffle(&mut rng);

    // pair_used[i*k + j] marks vertex pair {i, j} (i < j) as consumed.
    let mut pair_used = vec![false; k * k];
    let mut accepted: Vec<[u64; 3]> = Vec::new();
    for t in triples {
        let (i, j, l) = (t[0] as usize, t[1] as usize, t[2] as usize);
        let slots = [i * k + j, i * k + l, j * k + l];
        if slots.iter().any(|&s| pair_used[s]) {
            continue;
        }
        for s in slots {
            pair_used[s] = true;
        }
        accepted.push([vertices[i], vertices[j], vertices[l]]);
    }
    accepted.sort_unstable();
    Ok(LinearHypergraph { vertices, triples: accepted })
}

/// Builds the order-2 family: one chosen multiple per prime above
/// `sqrt(n)` (absent key means "none") united with the triple products of
/// a linear hypergraph on primes below the cube-root of `n`.
///
/// Hypergraph vertices must be primes with `p^3 < n`, so triple products
/// stay below `n`. Choices must map a prime `p` with `p^2 > n`, `p <= n`
/// to one of its positive multiples at most `n`. The result is verified
/// with the order-2 checker before being returned; a failed verification
/// reports the violation witness.
pub fn construct_h2(
    spec: &FamilySpec,
    a1_choices: &BTreeMap<u64, u64>,
    g: &LinearHypergraph,
    table: &PrimeTable,
) -> Result<IntegerSet> {
    if spec.h != 2 {
        return Err(Error::InvalidArgument(format!(
            "this construction is for order 2, spec has order {}",
            spec.h
        )));
    }
    let n = spec.n;
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {n} exceeds prime table limit {}",
            table.limit()
        )));
    }
    g.validate_linear()?;
    for &v in &g.vertices {
        if !table.is_prime(v) {
            return Err(Error::InvalidArgument(format!(
                "hypergraph vertex {v} is not prime"
            )));
        }
        if (v as u128).pow(3) >= n as u128 {
            return Err(Error::InvalidArgument(format!(
                "hypergraph vertex {v} is out of range: its cube must stay below n = {n}"
            )));
        }
    }

    let mut elements: Vec<u64> = Vec::with_capacity(a1_choices.len() + g.triples.len());
    for (&p, &m) in a1_choices {
        if !table.is_prime(p) || (p as u128) * (p as u128) <= n as u128 || p > n {
            return Err(Error::InvalidArgument(format!(
                "choice key {p} must be a prime with p^2 > n and p <= n"
            )));
        }
        if m == 0 || m > n || m % p != 0 {
            return Err(Error::InvalidArgument(format!(
                "choice {m} for prime {p} must be a positive multiple of {p} at most {n}"
            )));
        }
        elements.push(m);
    }
    for t in &g.triples {
        elements.push(t[0] * t[1] * t[2]);
    }
    elements.sort_unstable();
    if elements.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Internal(
            "construction produced colliding elements".into(),
        ));
    }

    let set = IntegerSet::with_universe(elements, n)?;
    match possesses_ph(&set, 2, table)? {
        (true, _) => Ok(set),
        (false, witness) => Err(Error::Precondition {
            message: "constructed family fails the order-2 divisibility property".into(),
            witness,
        }),
    }
}

/// Number of order-2 base families: one factor `floor(n/p) + 1` per prime
/// `p` with `sqrt(n) < p <= n` (the extra 1 is the "none" option).
pub fn count_a1_families(n: u64, table: &PrimeTable) -> Result<BigCount> {
    if n == 0 {
        return Err(Error::InvalidArgument("universe must be at least 1".into()));
    }
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {n} exceeds prime table limit {}",
            table.limit()
        )));
    }
    let mut product = ChunkedProduct::new();
    for &p in table.primes_in(0, n) {
        if (p as u128) * (p as u128) > n as u128 {
            product.push(n / p + 1);
        }
    }
    Ok(product.finish())
}

/// Builds the order-`h` family for `h >= 3`: the union of the chosen
/// multiples, one per interval prime (absent key means "none").
///
/// Each choice for `p` must be a positive multiple of `p` at most `n`
/// whose unique distinct prime factor in the interval is `p` itself; a
/// second interval prime is reported in the error. The result is verified
/// with the order-`h` checker before being returned.
pub fn construct_h3plus(
    spec: &FamilySpec,
    choices: &BTreeMap<u64, u64>,
    table: &PrimeTable,
) -> Result<IntegerSet> {
    if spec.h < 3 {
        return Err(Error::InvalidArgument(format!(
            "this construction requires order at least 3, spec has order {}",
            spec.h
        )));
    }
    let n = spec.n;
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {n} exceeds prime table limit {}",
            table.limit()
        )));
    }
    let mut elements: Vec<u64> = Vec::with_capacity(choices.len());
    for (&p, &m) in choices {
        if !table.is_prime(p) || !spec.in_interval(p) {
            return Err(Error::InvalidArgument(format!(
                "choice key {p} is not a prime in the cut interval"
            )));
        }
        if m == 0 || m > n || m % p != 0 {
            return Err(Error::InvalidArgument(format!(
                "choice {m} for prime {p} must be a positive multiple of {p} at most {n}"
            )));
        }
        for (q, _) in table.factorize(m)? {
            if q != p && spec.in_interval(q) {
                return Err(Error::InvalidArgument(format!(
                    "choice {m} for prime {p} has a second interval prime {q}"
                )));
            }
        }
        elements.push(m);
    }
    elements.sort_unstable();
    if elements.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Internal(
            "construction produced colliding elements".into(),
        ));
    }

    let set = IntegerSet::with_universe(elements, n)?;
    match possesses_ph(&set, spec.h, table)? {
        (true, _) => Ok(set),
        (false, witness) => Err(Error::Precondition {
            message: format!(
                "constructed family fails the order-{} divisibility property",
                spec.h
            ),
            witness,
        }),
    }
}

/// Per-prime admissible-multiple counts `c_p` for the order-3-and-up
/// construction, computed by a sieve pass: for each `m <= n` count its
/// distinct prime factors in the interval, and bucket `m` under its
/// unique interval prime when that count is exactly 1.
///
/// Returns `(p, c_p)` pairs for every interval prime in increasing order.
pub fn h3plus_factor_counts(spec: &FamilySpec, table: &PrimeTable) -> Result<Vec<(u64, u64)>> {
    let primes = interval_primes(spec, table)?;
    let n = spec.n as usize;
    if primes.is_empty() {
        return Ok(Vec::new());
    }
    // Number of distinct interval primes dividing m, and the last one seen.
    let mut hits = vec![0u8; n + 1];
    let mut last = vec![0u32; n + 1];
    for (idx, &p) in primes.iter().enumerate() {
        let mut m = p as usize;
        while m <= n {
            hits[m] = hits[m].saturating_add(1);
            last[m] = idx as u32;
            m += p as usize;
        }
    }
    let mut counts = vec![0u64; primes.len()];
    for m in 1..=n {
        if hits[m] == 1 {
            counts[last[m] as usize] += 1;
        }
    }
    Ok(primes.iter().copied().zip(counts).collect())
}

/// Exact number of families the order-3-and-up construction can produce:
/// the product of `c_p + 1` over interval primes (the `+1` is "none").
pub fn count_h3plus_families(spec: &FamilySpec, table: &PrimeTable) -> Result<BigCount> {
    let mut product = ChunkedProduct::new();
    for (_, c) in h3plus_factor_counts(spec, table)? {
        product.push(c + 1);
    }
    Ok(product.finish())
}

/// All admissible choices for interval prime `p`, in increasing order:
/// multiples `m <= n` of `p` whose only distinct interval prime is `p`.
pub fn h3plus_admissible(spec: &FamilySpec, p: u64, table: &PrimeTable) -> Result<Vec<u64>> {
    if spec.n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {} exceeds prime table limit {}",
            spec.n, table.limit()
        )));
    }
    if !table.is_prime(p) || !spec.in_interval(p) {
        return Err(Error::InvalidArgument(format!(
            "{p} is not a prime in the cut interval"
        )));
    }
    let mut out = Vec::new();
    let mut m = p;
    'multiples: while m <= spec.n {
        for (q, _) in table.factorize(m)? {
            if q != p && spec.in_interval(q) {
                m += p;
                continue 'multiples;
            }
        }
        out.push(m);
        m += p;
    }
    Ok(out)
}

/// Seeded choice vector for the order-2 base family: for each prime
/// `sqrt(n) < p <= n`, picks uniformly among "none" and the multiples of
/// `p` at most `n`. Absent keys encode "none".
pub fn seeded_a1_choices(n: u64, seed: u64, table: &PrimeTable) -> Result<BTreeMap<u64, u64>> {
    if n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe {n} exceeds prime table limit {}",
            table.limit()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut choices = BTreeMap::new();
    for &p in table.primes_in(0, n) {
        if (p as u128) * (p as u128) <= n as u128 {
            continue;
        }
        let k = n / p;
        let pick = rng.gen_range(0..=k);
        if pick > 0 {
            choices.insert(p, pick * p);
        }
    }
    Ok(choices)
}

/// Seeded choice vector for the order-3-and-up construction: for each
/// interval prime, picks uniformly among "none" and its admissible
/// multiples. Absent keys encode "none".
pub fn seeded_h3plus_choices(spec: &FamilySpec, table: &PrimeTable) -> Result<BTreeMap<u64, u64>> {
    let primes: Vec<u64> = interval_primes(spec, table)?.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut choices = BTreeMap::new();
    for p in primes {
        let admissible = h3plus_admissible(spec, p, table)?;
        let pick = rng.gen_range(0..=admissible.len());
        if pick > 0 {
            choices.insert(p, admissible[pick - 1]);
        }
    }
    Ok(choices)
}

/// Canonical seeded order-2 family for `(n, seed)`: a seeded hypergraph
/// on the mid-sized prime band combined with seeded base choices. The
/// hypergraph and the choices draw from independent streams derived from
/// the seed.
pub fn seeded_h2_family(n: u64, seed: u64, table: &PrimeTable) -> Result<IntegerSet> {
    let spec = FamilySpec::new(n, 2, Cut::default(), seed)?;
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let graph_seed: u64 = seeder.gen();
    let choice_seed: u64 = seeder.gen();
    let g = generate_linear_on(cube_interval_primes(n, table)?, graph_seed)?;
    let choices = seeded_a1_choices(n, choice_seed, table)?;
    construct_h2(&spec, &choices, &g, table)
}

/// Canonical seeded family for order `h >= 3`.
pub fn seeded_h3plus_family(spec: &FamilySpec, table: &PrimeTable) -> Result<IntegerSet> {
    let choices = seeded_h3plus_choices(spec, table)?;
    construct_h3plus(spec, &choices, table)
}

/// Seeded random set with the order-`h` property, built greedily: visit
/// `1..=n` in a seeded random order and keep each element whenever the
/// set stays good, stopping at `max_size` elements.
pub fn seeded_greedy_good_set(
    n: u64,
    h: u32,
    max_size: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<IntegerSet> {
    if n == 0 || n > table.limit() {
        return Err(Error::InvalidArgument(format!(
            "universe must lie in [1, {}], got {n}",
            table.limit()
        )));
    }
    let mut order: Vec<u64> = (1..=n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut current: Vec<u64> = Vec::new();
    for x in order {
        if current.len() >= max_size {
            break;
        }
        let mut trial = current.clone();
        trial.push(x);
        trial.sort_unstable();
        let candidate = IntegerSet::with_universe(trial, n)?;
        if possesses_ph(&candidate, h, table)?.0 {
            current = candidate.elements().to_vec();
        }
    }
    IntegerSet::with_universe(current, n)
}
