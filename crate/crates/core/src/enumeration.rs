//! Exact subset counting and extremal search.
//!
//! A subset of [1, n] fails the order-h property exactly when it contains
//! some violating (h+1)-subset, so the good subsets are the independent sets
//! of a (h+1)-uniform hypergraph on [1, n]. Counting splits off the subsets
//! containing 1 (closed form) and runs a component-wise branching count over
//! the rest; the extremal search is a branch-and-bound over the same edges.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_integer::{binomial, Integer};
use num_traits::One;

use crate::arith::{binom_u128, next_combination};
use crate::error::{Error, Result};
use crate::property::IntegerSet;

/// Arbitrary-precision subset count.
pub type BigCount = BigUint;

/// Universe cap for [`count_brute`] (full 2^n scan).
pub const BRUTE_UNIVERSE_CAP: u64 = 25;
/// Universe cap for [`count_exact`] and [`extremal_size`]; component states
/// are tracked in 128-bit masks and counts in u128.
pub const EXACT_UNIVERSE_CAP: u64 = 120;
/// Cap on C(n, h+1) when enumerating candidate edges.
pub const EDGE_ENUM_CAP: u128 = 200_000_000;
/// Approximate cap on search-tree nodes for counting and extremal search.
pub const SEARCH_NODE_BUDGET: u64 = 2_000_000_000;

/// Whether some member of the subset divides the product of the others.
/// Saturating gcd extraction avoids computing the product itself.
pub fn is_violating_subset(subset: &[u64]) -> bool {
    for (i, &pivot) in subset.iter().enumerate() {
        let mut residual = pivot;
        for (j, &c) in subset.iter().enumerate() {
            if residual == 1 {
                break;
            }
            if j != i {
                residual /= residual.gcd(&c);
            }
        }
        if residual == 1 {
            return true;
        }
    }
    false
}

/// The (h+1)-uniform hypergraph of violating subsets of [1, n].
pub struct ViolationHypergraph {
    pub n: u64,
    pub h: u32,
    /// Violating (h+1)-subsets, each ascending, in lexicographic order.
    pub edges: Vec<Vec<u64>>,
    /// Elements of [1, n] contained in no edge, ascending.
    pub free_vertices: Vec<u64>,
}

/// Enumerates every violating (h+1)-subset of [1, n].
///
/// Errors with a resource limit when C(n, h+1) exceeds [`EDGE_ENUM_CAP`].
pub fn build_violation_hypergraph(n: u64, h: u32) -> Result<ViolationHypergraph> {
    check_n_h(n, h)?;
    let k = h as usize + 1;
    let work = binom_u128(n, k as u64);
    if work > EDGE_ENUM_CAP {
        return Err(Error::ResourceLimit(format!(
            "edge enumeration over C({n}, {k}) = {work} subsets exceeds cap {EDGE_ENUM_CAP}"
        )));
    }
    let mut edges = Vec::new();
    let mut covered = vec![false; n as usize + 1];
    if n as usize >= k {
        let mut idx: Vec<usize> = (0..k).collect();
        let mut subset = vec![0u64; k];
        loop {
            for (slot, &i) in idx.iter().enumerate() {
                subset[slot] = i as u64 + 1;
            }
            if is_violating_subset(&subset) {
                for &v in &subset {
                    covered[v as usize] = true;
                }
                edges.push(subset.clone());
            }
            if !next_combination(&mut idx, n as usize) {
                break;
            }
        }
    }
    let free_vertices = (1..=n).filter(|&v| !covered[v as usize]).collect();
    Ok(ViolationHypergraph {
        n,
        h,
        edges,
        free_vertices,
    })
}

fn check_n_h(n: u64, h: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("universe bound n must be at least 1".into()));
    }
    if h < 1 {
        return Err(Error::InvalidArgument("order h must be at least 1".into()));
    }
    Ok(())
}

/// Counts the subsets of [1, n] with the order-h property by scanning all
/// 2^n subsets against directly computed violating subsets (products in
/// u128, no gcd tricks). Deliberately independent of [`count_exact`].
///
/// Requires n <= [`BRUTE_UNIVERSE_CAP`].
pub fn count_brute(n: u64, h: u32) -> Result<BigCount> {
    check_n_h(n, h)?;
    if n > BRUTE_UNIVERSE_CAP {
        return Err(Error::ResourceLimit(format!(
            "brute count over 2^{n} subsets exceeds cap 2^{BRUTE_UNIVERSE_CAP}"
        )));
    }
    let n = n as usize;
    let k = h as usize + 1;
    // Violating subsets as bitmasks, found by direct product divisibility.
    let mut edge_masks: Vec<u32> = Vec::new();
    if n >= k {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let mut mask = 0u32;
            for &i in &idx {
                mask |= 1 << i;
            }
            let mut violating = false;
            for pivot_pos in 0..k {
                let mut prod: u128 = 1;
                for (j, &i) in idx.iter().enumerate() {
                    if j != pivot_pos {
                        prod *= (i + 1) as u128;
                    }
                }
                if prod % (idx[pivot_pos] + 1) as u128 == 0 {
                    violating = true;
                    break;
                }
            }
            if violating {
                edge_masks.push(mask);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    let mut good = 0u64;
    for subset in 0u32..(1u32 << n) {
        if edge_masks.iter().all(|&e| subset & e != e) {
            good += 1;
        }
    }
    Ok(BigCount::from(good))
}

/// Number of subsets of [1, n] that contain 1 and have the order-h
/// property: 1 forbids h further elements, so these are exactly {1} joined
/// with fewer than h elements of [2, n].
pub fn count_containing_one(n: u64, h: u32) -> BigCount {
    assert!(n >= 1 && h >= 1, "count_containing_one requires n >= 1 and h >= 1");
    let mut total = BigCount::from(0u32);
    for k in 0..h as u64 {
        if k > n - 1 {
            break;
        }
        total += binomial(BigCount::from(n - 1), BigCount::from(k));
    }
    total
}

/// Breakdown of a [`count_exact`] run.
pub struct CountReport {
    pub count: BigCount,
    /// Violating (h+1)-subsets of [2, n].
    pub edge_count: usize,
    /// Vertex counts of the connected edge components, largest first.
    pub component_sizes: Vec<usize>,
}

/// Exact number of subsets of [1, n] with the order-h property.
///
/// Deterministic for fixed (n, h) regardless of `workers`. Requires
/// workers >= 1 and n <= [`EXACT_UNIVERSE_CAP`]; errors with a resource
/// limit if the branching count exceeds [`SEARCH_NODE_BUDGET`] nodes.
pub fn count_exact(n: u64, h: u32, workers: usize) -> Result<BigCount> {
    Ok(count_exact_report(n, h, workers)?.count)
}

/// As [`count_exact`], also reporting edge and component statistics.
pub fn count_exact_report(n: u64, h: u32, workers: usize) -> Result<CountReport> {
    check_n_h(n, h)?;
    if workers < 1 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    if n > EXACT_UNIVERSE_CAP {
        return Err(Error::ResourceLimit(format!(
            "exact count universe {n} exceeds cap {EXACT_UNIVERSE_CAP}"
        )));
    }
    let k = h as usize + 1;
    let work = binom_u128(n.saturating_sub(1), k as u64);
    if work > EDGE_ENUM_CAP {
        return Err(Error::ResourceLimit(format!(
            "edge enumeration over {work} subsets exceeds cap {EDGE_ENUM_CAP}"
        )));
    }

    // Edges among [2, n]; subsets containing 1 are counted in closed form.
    let mut edges: Vec<Vec<u64>> = Vec::new();
    let vertices: Vec<u64> = (2..=n).collect();
    if vertices.len() >= k {
        let mut idx: Vec<usize> = (0..k).collect();
        let mut subset = vec![0u64; k];
        loop {
            for (slot, &i) in idx.iter().enumerate() {
                subset[slot] = vertices[i];
            }
            if is_violating_subset(&subset) {
                edges.push(subset.clone());
            }
            if !next_combination(&mut idx, vertices.len()) {
                break;
            }
        }
    }
    let edge_count = edges.len();

    // Union-find over covered vertices; uncovered ones contribute 2^free.
    let mut parent: Vec<usize> = (0..=n as usize).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let mut covered = vec![false; n as usize + 1];
    for e in &edges {
        let r0 = find(&mut parent, e[0] as usize);
        for &v in e {
            covered[v as usize] = true;
            let rv = find(&mut parent, v as usize);
            parent[rv] = r0;
        }
    }
    let free = vertices.iter().filter(|&&v| !covered[v as usize]).count();

    // Group edges by component root, components ordered by smallest vertex.
    let mut roots: Vec<usize> = Vec::new();
    let mut comp_edges: Vec<Vec<&Vec<u64>>> = Vec::new();
    for e in &edges {
        let r = find(&mut parent, e[0] as usize);
        match roots.iter().position(|&x| x == r) {
            Some(i) => comp_edges[i].push(e),
            None => {
                roots.push(r);
                comp_edges.push(vec![e]);
            }
        }
    }

    let budget = AtomicU64::new(SEARCH_NODE_BUDGET);
    let mut component_sizes: Vec<usize> = Vec::new();
    let mut total = BigCount::one() << free;
    for group in &comp_edges {
        let mut verts: Vec<u64> = group.iter().flat_map(|e| e.iter().copied()).collect();
        verts.sort_unstable();
        verts.dedup();
        component_sizes.push(verts.len());
        let masks: Vec<u128> = group
            .iter()
            .map(|e| {
                e.iter()
                    .map(|v| 1u128 << verts.binary_search(v).unwrap())
                    .fold(0u128, |acc, b| acc | b)
            })
            .collect();
        let undecided = if verts.len() == 128 {
            u128::MAX
        } else {
            (1u128 << verts.len()) - 1
        };
        let comp_count = count_component(masks, undecided, workers, &budget).map_err(|e| {
            match e {
                Error::ResourceLimit(msg) => Error::ResourceLimit(format!(
                    "{msg} (component sizes: {component_sizes:?})"
                )),
                other => other,
            }
        })?;
        total *= BigCount::from(comp_count);
    }
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    total += count_containing_one(n, h);
    Ok(CountReport {
        count: total,
        edge_count,
        component_sizes,
    })
}

/// Counts independent sets of one edge component. Splits the search tree
/// into a deterministic task list, evaluates tasks (in parallel when
/// workers > 1), and sums the exact u128 partial counts, so the result is
/// identical for any worker count.
fn count_component(
    edges: Vec<u128>,
    undecided: u128,
    workers: usize,
    budget: &AtomicU64,
) -> Result<u128> {
    let mut tasks: Vec<(Vec<u128>, u128)> = Vec::new();
    let mut settled: u128 = 0;
    // Enough tasks to occupy every worker even with skewed subtrees.
    let split_depth = if workers > 1 {
        (usize::BITS - (workers * 8).leading_zeros()) as usize
    } else {
        0
    };
    split_tasks(edges, undecided, split_depth, &mut tasks, &mut settled, budget)?;

    if workers == 1 || tasks.len() <= 1 {
        let mut total = settled;
        for (edges, undecided) in tasks {
            total += count_subtree(edges, undecided, budget)?;
        }
        return Ok(total);
    }

    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let partials: Result<Vec<u128>> = pool.install(|| {
        tasks
            .into_par_iter()
            .map(|(edges, undecided)| count_subtree(edges, undecided, budget))
            .collect()
    });
    let mut total = settled;
    for part in partials? {
        total += part;
    }
    Ok(total)
}

/// Expands the branching tree to a bounded depth, accumulating resolved
/// leaves into `settled` and emitting unresolved subproblems in order.
fn split_tasks(
    mut edges: Vec<u128>,
    mut undecided: u128,
    depth: usize,
    tasks: &mut Vec<(Vec<u128>, u128)>,
    settled: &mut u128,
    budget: &AtomicU64,
) -> Result<()> {
    charge_node(budget)?;
    propagate_forced(&mut edges, &mut undecided);
    if edges.is_empty() {
        *settled += 1u128 << undecided.count_ones();
        return Ok(());
    }
    if depth == 0 {
        tasks.push((edges, undecided));
        return Ok(());
    }
    let v = branch_vertex(&edges);
    let included: Vec<u128> = edges.iter().map(|&e| e & !v).collect();
    let excluded: Vec<u128> = edges.iter().copied().filter(|&e| e & v == 0).collect();
    split_tasks(included, undecided & !v, depth - 1, tasks, settled, budget)?;
    split_tasks(excluded, undecided & !v, depth - 1, tasks, settled, budget)
}

/// Serial branching count over one subproblem.
fn count_subtree(mut edges: Vec<u128>, mut undecided: u128, budget: &AtomicU64) -> Result<u128> {
    charge_node(budget)?;
    propagate_forced(&mut edges, &mut undecided);
    if edges.is_empty() {
        return Ok(1u128 << undecided.count_ones());
    }
    let v = branch_vertex(&edges);
    let included: Vec<u128> = edges.iter().map(|&e| e & !v).collect();
    let excluded: Vec<u128> = edges.iter().copied().filter(|&e| e & v == 0).collect();
    Ok(count_subtree(included, undecided & !v, budget)?
        + count_subtree(excluded, undecided & !v, budget)?)
}

/// An edge reduced to a single undecided vertex forces that vertex out
/// (its other members are all included); edges touching a forced-out vertex
/// are satisfied. Iterates to a fixed point.
fn propagate_forced(edges: &mut Vec<u128>, undecided: &mut u128) {
    loop {
        let mut forced: u128 = 0;
        for &e in edges.iter() {
            if e.count_ones() == 1 {
                forced |= e;
            }
        }
        if forced == 0 {
            return;
        }
        *undecided &= !forced;
        edges.retain(|&e| e & forced == 0);
    }
}

/// Highest-degree undecided vertex, smallest index on ties. Edge masks only
/// contain undecided vertices, so degrees are counted straight off them.
fn branch_vertex(edges: &[u128]) -> u128 {
    let mut degree = [0u32; 128];
    for &e in edges {
        let mut rest = e;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            degree[b] += 1;
            rest &= rest - 1;
        }
    }
    let mut best = 0usize;
    let mut best_deg = 0u32;
    for (i, &d) in degree.iter().enumerate() {
        if d > best_deg {
            best_deg = d;
            best = i;
        }
    }
    1u128 << best
}

fn charge_node(budget: &AtomicU64) -> Result<()> {
    // Approximate global cap: concurrent decrements may overshoot slightly.
    if budget.fetch_sub(1, Ordering::Relaxed) == 0 {
        return Err(Error::ResourceLimit(format!(
            "search exceeded node budget {SEARCH_NODE_BUDGET}"
        )));
    }
    Ok(())
}

/// Largest subset of [1, n] with the order-h property, with the
/// lexicographically smallest maximum-size subset as a witness.
///
/// Include-first depth-first search in ascending vertex order with the
/// standard size bound, so the first maximum found is the lexicographically
/// smallest one. Same caps as [`count_exact`].
pub fn extremal_size(n: u64, h: u32) -> Result<(usize, IntegerSet)> {
    check_n_h(n, h)?;
    if n > EXACT_UNIVERSE_CAP {
        return Err(Error::ResourceLimit(format!(
            "extremal search universe {n} exceeds cap {EXACT_UNIVERSE_CAP}"
        )));
    }
    let graph = build_violation_hypergraph(n, h)?;
    let covered: Vec<u64> = (1..=n)
        .filter(|v| graph.free_vertices.binary_search(v).is_err())
        .collect();

    // Remaining state per edge: mask of undecided vertices, dead once some
    // member is excluded. Vertices indexed by position in `covered`.
    let mut edge_masks: Vec<u128> = Vec::with_capacity(graph.edges.len());
    let mut edges_at: Vec<Vec<u32>> = vec![Vec::new(); covered.len()];
    for e in &graph.edges {
        let id = edge_masks.len() as u32;
        let mut mask = 0u128;
        for v in e {
            let i = covered.binary_search(v).unwrap();
            mask |= 1u128 << i;
            edges_at[i].push(id);
        }
        edge_masks.push(mask);
    }

    let mut search = ExtremalSearch {
        covered: &covered,
        edges_at: &edges_at,
        masks: edge_masks,
        alive: vec![true; graph.edges.len()],
        chosen: Vec::new(),
        best: None,
        nodes: SEARCH_NODE_BUDGET,
    };
    search.run(0)?;
    let best = search.best.unwrap_or_default();

    let mut elements = graph.free_vertices.clone();
    elements.extend_from_slice(&best);
    let size = elements.len();
    Ok((size, IntegerSet::new(elements)?))
}

struct ExtremalSearch<'a> {
    covered: &'a [u64],
    edges_at: &'a [Vec<u32>],
    masks: Vec<u128>,
    alive: Vec<bool>,
    chosen: Vec<u64>,
    best: Option<Vec<u64>>,
    nodes: u64,
}

impl ExtremalSearch<'_> {
    fn run(&mut self, pos: usize) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::ResourceLimit(format!(
                "extremal search exceeded node budget {SEARCH_NODE_BUDGET}"
            )));
        }
        self.nodes -= 1;
        let best_len = self.best.as_ref().map_or(0, |b| b.len());
        if pos == self.covered.len() {
            if self.best.is_none() || self.chosen.len() > best_len {
                self.best = Some(self.chosen.clone());
            }
            return Ok(());
        }
        if self.best.is_some() && self.chosen.len() + (self.covered.len() - pos) <= best_len {
            return Ok(());
        }
        let bit = 1u128 << pos;

        // Include branch, unless it would complete a live edge.
        let blocked = self.edges_at[pos]
            .iter()
            .any(|&id| self.alive[id as usize] && self.masks[id as usize] == bit);
        if !blocked {
            let mut touched: Vec<u32> = Vec::new();
            for &id in &self.edges_at[pos] {
                if self.alive[id as usize] {
                    self.masks[id as usize] &= !bit;
                    touched.push(id);
                }
            }
            self.chosen.push(self.covered[pos]);
            self.run(pos + 1)?;
            self.chosen.pop();
            for &id in &touched {
                self.masks[id as usize] |= bit;
            }
        }

        // Exclude branch: edges through this vertex can no longer complete.
        let mut killed: Vec<u32> = Vec::new();
        for &id in &self.edges_at[pos] {
            if self.alive[id as usize] {
                self.alive[id as usize] = false;
                killed.push(id);
            }
        }
        self.run(pos + 1)?;
        for &id in &killed {
            self.alive[id as usize] = true;
        }
        Ok(())
    }
}
