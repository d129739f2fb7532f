//! Divisibility-violation checking for finite integer sets.
//!
//! A set A of positive integers has the order-h property when no element of
//! A divides the product of h other pairwise-distinct elements of A. The
//! split-form generalization replaces the single element by a product of r
//! elements dividing a product of s further elements.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{binom_u128, next_combination, PrimeTable};
use crate::error::{Error, Result};

/// Work cap for the split-form search: number of (left, right) pairs.
pub const RS_SEARCH_CAP: u128 = 20_000_000;

/// A finite set of positive integers, stored strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSet {
    elements: Vec<u64>,
    universe_hint: Option<u64>,
}

impl IntegerSet {
    /// Sorts the input; rejects zeros and duplicates.
    pub fn new(mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        if elements.first() == Some(&0) {
            return Err(Error::InvalidArgument("set elements must be positive".into()));
        }
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("set elements must be distinct".into()));
        }
        Ok(IntegerSet {
            elements,
            universe_hint: None,
        })
    }

    /// As [`new`](Self::new), additionally recording that A is a subset of
    /// [1, n] and rejecting elements above n.
    pub fn with_universe(elements: Vec<u64>, n: u64) -> Result<Self> {
        let mut set = Self::new(elements)?;
        if let Some(&mx) = set.elements.last() {
            if mx > n {
                return Err(Error::InvalidArgument(format!(
                    "element {mx} exceeds universe bound {n}"
                )));
            }
        }
        set.universe_hint = Some(n);
        Ok(set)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    pub fn universe_hint(&self) -> Option<u64> {
        self.universe_hint
    }

    pub fn contains(&self, m: u64) -> bool {
        self.elements.binary_search(&m).is_ok()
    }
}

/// A concrete violating configuration found by a checker.
///
/// Cofactor and split lists are strictly increasing; every listed value is a
/// member of the checked set and appears in only one role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    /// pivot divides the product of the cofactors.
    Pivot { pivot: u64, cofactors: Vec<u64> },
    /// The product of `left` divides the product of `right`.
    Split { left: Vec<u64>, right: Vec<u64> },
}

impl Witness {
    /// Re-checks this witness against a set from first principles:
    /// membership, disjointness, canonical ordering, and the divisibility
    /// itself. Independent of the search that produced it.
    pub fn validate(&self, set: &IntegerSet) -> std::result::Result<(), String> {
        match self {
            Witness::Pivot { pivot, cofactors } => {
                if cofactors.is_empty() {
                    return Err("empty cofactor list".into());
                }
                if !set.contains(*pivot) {
                    return Err(format!("pivot {pivot} not in set"));
                }
                check_ascending_members(set, cofactors, "cofactor")?;
                if cofactors.binary_search(pivot).is_ok() {
                    return Err(format!("pivot {pivot} reused as cofactor"));
                }
                let mut residual = *pivot;
                for &c in cofactors {
                    residual /= residual.gcd(&c);
                }
                if residual != 1 {
                    return Err(format!(
                        "pivot {pivot} does not divide the cofactor product"
                    ));
                }
                Ok(())
            }
            Witness::Split { left, right } => {
                if left.is_empty() || right.is_empty() {
                    return Err("empty split side".into());
                }
                check_ascending_members(set, left, "left")?;
                check_ascending_members(set, right, "right")?;
                for v in left {
                    if right.binary_search(v).is_ok() {
                        return Err(format!("element {v} appears on both sides"));
                    }
                }
                let lp = product_big(left);
                let rp = product_big(right);
                if !(rp % &lp).is_zero() {
                    return Err("left product does not divide right product".into());
                }
                Ok(())
            }
        }
    }
}

fn check_ascending_members(
    set: &IntegerSet,
    values: &[u64],
    role: &str,
) -> std::result::Result<(), String> {
    for w in values.windows(2) {
        if w[0] >= w[1] {
            return Err(format!("{role} list not strictly increasing"));
        }
    }
    for &v in values {
        if !set.contains(v) {
            return Err(format!("{role} {v} not in set"));
        }
    }
    Ok(())
}

fn product_big(values: &[u64]) -> BigUint {
    let mut p = BigUint::one();
    for &v in values {
        p *= v;
    }
    p
}

/// Whether A has the order-h property: no element of A divides the product
/// of h other pairwise-distinct elements of A.
///
/// Returns `(true, None)` or `(false, Some(witness))` where the witness has
/// the smallest possible pivot and, for that pivot, the lexicographically
/// smallest cofactor set. Requires h >= 1 and max(A) <= table limit.
pub fn possesses_ph(
    a: &IntegerSet,
    h: u32,
    table: &PrimeTable,
) -> Result<(bool, Option<Witness>)> {
    if h == 0 {
        return Err(Error::InvalidArgument("order h must be at least 1".into()));
    }
    let elems = a.elements();
    let h = h as usize;
    if elems.len() <= h {
        return Ok((true, None));
    }
    if let Some(&mx) = elems.last() {
        if mx > table.limit() {
            return Err(Error::InvalidArgument(format!(
                "set element {mx} exceeds table limit {}",
                table.limit()
            )));
        }
    }

    let facts: Vec<Vec<(u64, u32)>> = elems
        .iter()
        .map(|&m| table.factorize(m))
        .collect::<Result<_>>()?;
    let mut total_mult: HashMap<u64, u64> = HashMap::new();
    for f in &facts {
        for &(p, e) in f {
            *total_mult.entry(p).or_insert(0) += e as u64;
        }
    }

    let mut candidates = Vec::with_capacity(elems.len() - 1);
    for (i, &pivot) in elems.iter().enumerate() {
        // The rest of the set must carry every prime power of the pivot,
        // otherwise no cofactor multiset can work.
        let feasible = facts[i]
            .iter()
            .all(|&(p, e)| total_mult[&p] - e as u64 >= e as u64);
        if !feasible {
            continue;
        }
        candidates.clear();
        candidates.extend(elems.iter().take(i).copied());
        candidates.extend(elems.iter().skip(i + 1).copied());
        let mut chosen = Vec::with_capacity(h);
        if let Some(cofactors) = search_cofactors(pivot, &candidates, 0, h, &mut chosen) {
            return Ok((false, Some(Witness::Pivot { pivot, cofactors })));
        }
    }
    Ok((true, None))
}

/// Whether the residual can be exhausted by the given candidates, each used
/// at most once. Saturating per-prime extraction is order-independent.
fn residual_coverable(mut residual: u64, candidates: &[u64]) -> bool {
    for &c in candidates {
        if residual == 1 {
            return true;
        }
        residual /= residual.gcd(&c);
    }
    residual == 1
}

/// Lexicographic DFS over ascending candidate combinations. `residual` is
/// the pivot with every prime power already covered by `chosen` removed.
/// Once the residual reaches 1 the set is completed with the smallest
/// remaining candidates, so the first solution found is the
/// lexicographically smallest one.
fn search_cofactors(
    residual: u64,
    candidates: &[u64],
    pos: usize,
    h: usize,
    chosen: &mut Vec<u64>,
) -> Option<Vec<u64>> {
    let slots = h - chosen.len();
    if candidates.len() - pos < slots {
        return None;
    }
    if residual == 1 {
        let mut out = chosen.clone();
        out.extend(candidates[pos..pos + slots].iter().copied());
        return Some(out);
    }
    if slots == 0 || !residual_coverable(residual, &candidates[pos..]) {
        return None;
    }
    for next in pos..candidates.len() {
        let c = candidates[next];
        chosen.push(c);
        let found = search_cofactors(residual / residual.gcd(&c), candidates, next + 1, h, chosen);
        chosen.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Whether A has the split-form property: no r pairwise-distinct elements
/// have a product dividing the product of s further pairwise-distinct
/// elements. Both sides are searched in lexicographic order, so a returned
/// witness is the first (left, right) pair in that order.
///
/// Requires r >= 1 and s >= 1. Errors with a resource limit when the
/// combination count C(|A|, r) * C(|A| - r, s) exceeds [`RS_SEARCH_CAP`].
pub fn possesses_rs(a: &IntegerSet, r: u32, s: u32) -> Result<(bool, Option<Witness>)> {
    if r == 0 || s == 0 {
        return Err(Error::InvalidArgument(
            "split sizes r and s must be at least 1".into(),
        ));
    }
    let elems = a.elements();
    let r = r as usize;
    let s = s as usize;
    if elems.len() < r + s {
        return Ok((true, None));
    }
    let n = elems.len() as u64;
    let work = binom_u128(n, r as u64).saturating_mul(binom_u128(n - r as u64, s as u64));
    if work > RS_SEARCH_CAP {
        return Err(Error::ResourceLimit(format!(
            "split search over {work} combination pairs exceeds cap {RS_SEARCH_CAP}"
        )));
    }

    let mut left_idx: Vec<usize> = (0..r).collect();
    loop {
        let left: Vec<u64> = left_idx.iter().map(|&i| elems[i]).collect();
        let left_prod = product_big(&left);
        let rest: Vec<u64> = (0..elems.len())
            .filter(|i| left_idx.binary_search(i).is_err())
            .map(|i| elems[i])
            .collect();

        let mut right_idx: Vec<usize> = (0..s).collect();
        loop {
            let right: Vec<u64> = right_idx.iter().map(|&i| rest[i]).collect();
            if (product_big(&right) % &left_prod).is_zero() {
                return Ok((false, Some(Witness::Split { left, right })));
            }
            if !next_combination(&mut right_idx, rest.len()) {
                break;
            }
        }
        if !next_combination(&mut left_idx, elems.len()) {
            break;
        }
    }
    Ok((true, None))
}
