//! Exact ground truth for tiny instances by exhaustive enumeration.
//!
//! Influence spread is computed over all `2^m` live-edge worlds, optima over
//! all `k`-subsets. Every function refuses (rather than approximates) when
//! an instance exceeds the enumeration bounds below.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::rr::RRSet;
use crate::NodeId;

/// Largest edge count for world enumeration.
pub const MAX_EDGES: usize = 20;
/// Node sets are bitmasks.
pub const MAX_NODES: usize = 64;
/// Largest number of `k`-subsets enumerated.
pub const MAX_SUBSETS: u64 = 1_000_000;

/// Worlds per block. Block sums are added in block order, so results do not
/// depend on the execution strategy.
const WORLD_BLOCK: u64 = 4096;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc * (n as u128 - k as u128 + i) / i;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn check_graph(g: &Graph) -> Result<()> {
    if g.m() > MAX_EDGES {
        return Err(Error::OracleRefused(format!("m = {} > {MAX_EDGES}", g.m())));
    }
    if g.n() > MAX_NODES {
        return Err(Error::OracleRefused(format!("n = {} > {MAX_NODES}", g.n())));
    }
    Ok(())
}

fn check_subsets(n: usize, k: usize) -> Result<u64> {
    let c = binomial(n as u64, k as u64);
    if c > MAX_SUBSETS {
        return Err(Error::OracleRefused(format!("C({n}, {k}) = {c} > {MAX_SUBSETS}")));
    }
    Ok(c)
}

fn mask_of(g: &Graph, set: &[NodeId]) -> Result<u64> {
    set.iter().try_fold(0u64, |acc, &v| {
        if v as usize >= g.n() {
            Err(Error::domain(format!("node {v} out of range for n = {}", g.n())))
        } else {
            Ok(acc | 1 << v)
        }
    })
}

/// One live-edge world: its probability and per-node live adjacency masks.
struct World {
    prob: f64,
    out: Vec<u64>,
    inc: Vec<u64>,
}

impl World {
    fn new(g: &Graph, w: u64) -> Self {
        let mut prob = 1.0;
        let mut out = vec![0u64; g.n()];
        let mut inc = vec![0u64; g.n()];
        for (j, e) in g.edges().iter().enumerate() {
            if w >> j & 1 == 1 {
                prob *= e.p;
                out[e.src as usize] |= 1 << e.dst;
                inc[e.dst as usize] |= 1 << e.src;
            } else {
                prob *= 1.0 - e.p;
            }
        }
        World { prob, out, inc }
    }

    fn closure(adj: &[u64], start: u64) -> u64 {
        let mut reached = start;
        let mut frontier = start;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros();
                f &= f - 1;
                next |= adj[v as usize];
            }
            frontier = next & !reached;
            reached |= frontier;
        }
        reached
    }

    fn forward(&self, start: u64) -> u64 {
        Self::closure(&self.out, start)
    }

    fn backward(&self, start: u64) -> u64 {
        Self::closure(&self.inc, start)
    }
}

/// Sums `f(world)` over all worlds in fixed blocks.
fn sum_over_worlds<F>(g: &Graph, exec: Exec, f: F) -> f64
where
    F: Fn(&World) -> f64 + Sync + Send,
{
    let total = 1u64 << g.m();
    let blocks = total.div_ceil(WORLD_BLOCK);
    exec.map(0..blocks, |b| {
        let lo = b * WORLD_BLOCK;
        let hi = (lo + WORLD_BLOCK).min(total);
        (lo..hi).map(|w| f(&World::new(g, w))).sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Exact `sigma(S)`: expected number of nodes reached from `seeds`.
pub fn exact_sigma(g: &Graph, seeds: &[NodeId]) -> Result<f64> {
    check_graph(g)?;
    let start = mask_of(g, seeds)?;
    Ok(sum_over_worlds(g, Exec::default(), |w| w.prob * w.forward(start).count_ones() as f64))
}

/// Exact probability that a random RR set intersects `seeds`, by
/// enumerating every (root, world) pair and reverse-reaching from the root.
/// Multiplied by `n` this equals `sigma(S)`.
pub fn exact_rr_hit_probability(g: &Graph, seeds: &[NodeId]) -> Result<f64> {
    check_graph(g)?;
    let target = mask_of(g, seeds)?;
    let n = g.n();
    let per_world = |w: &World| {
        let hits = (0..n).filter(|&r| w.backward(1 << r) & target != 0).count();
        w.prob * hits as f64
    };
    Ok(sum_over_worlds(g, Exec::default(), per_world) / n as f64)
}

/// Exact `sigma` of every `k`-subset, in lexicographic subset order.
#[derive(Debug, Clone)]
pub struct SigmaTable {
    pub k: usize,
    subsets: Vec<Vec<NodeId>>,
    values: Vec<f64>,
}

impl SigmaTable {
    pub fn build(g: &Graph, k: usize) -> Result<Self> {
        Self::build_with(g, k, Exec::default())
    }

    pub fn build_with(g: &Graph, k: usize, exec: Exec) -> Result<Self> {
        check_graph(g)?;
        let n = g.n();
        if k == 0 || k > n {
            return Err(Error::domain(format!("k = {k} must lie in [1, n = {n}]")));
        }
        let count = check_subsets(n, k)?;
        let subsets: Vec<Vec<NodeId>> = (0..n as NodeId).combinations(k).collect();
        let masks: Vec<u64> = subsets.iter().map(|s| s.iter().fold(0u64, |m, &v| m | 1 << v)).collect();

        // Fewer, larger blocks when the subset count is large, to bound the
        // per-block accumulators. Depends only on (m, count).
        let total = 1u64 << g.m();
        let blocks = (1u64 << 24).div_ceil(count).clamp(1, 256).min(total);
        let per_block = total.div_ceil(blocks);
        let partial = exec.map(0..blocks, |b| {
            let mut acc = vec![0.0f64; masks.len()];
            let lo = b * per_block;
            let hi = (lo + per_block).min(total);
            let mut reach = vec![0u64; n];
            for w in lo..hi {
                let world = World::new(g, w);
                for (v, r) in reach.iter_mut().enumerate() {
                    *r = world.forward(1 << v);
                }
                for (a, &mask) in acc.iter_mut().zip(&masks) {
                    let mut union = 0;
                    let mut m = mask;
                    while m != 0 {
                        union |= reach[m.trailing_zeros() as usize];
                        m &= m - 1;
                    }
                    *a += world.prob * union.count_ones() as f64;
                }
            }
            acc
        });
        let mut values = vec![0.0f64; masks.len()];
        for acc in partial {
            for (v, a) in values.iter_mut().zip(acc) {
                *v += a;
            }
        }
        Ok(SigmaTable { k, subsets, values })
    }

    /// `sigma` of a `k`-subset given in any order.
    pub fn get(&self, set: &[NodeId]) -> Option<f64> {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.subsets.binary_search(&key).ok().map(|i| self.values[i])
    }

    /// `(OPT, argmax)`; ties go to the lexicographically smallest set.
    pub fn opt(&self) -> (f64, Vec<NodeId>) {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        (self.values[best], self.subsets[best].clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[NodeId], f64)> {
        self.subsets.iter().map(Vec::as_slice).zip(self.values.iter().copied())
    }
}

/// `max sigma(S)` over `|S| = k` and a lexicographically smallest argmax.
pub fn exact_opt(g: &Graph, k: usize) -> Result<(f64, Vec<NodeId>)> {
    Ok(SigmaTable::build(g, k)?.opt())
}

/// Exact k-max-coverage of `sets` over nodes `0..n`: the best coverage
/// fraction and a lexicographically smallest optimal set. `k > n` is
/// clamped to `n`.
pub fn exact_max_coverage(sets: &[RRSet], n: usize, k: usize) -> Result<(f64, Vec<NodeId>)> {
    if sets.is_empty() {
        return Err(Error::domain("coverage of an empty prefix is undefined"));
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let k = k.min(n);
    check_subsets(n, k)?;
    let words = sets.len().div_ceil(64);
    let mut bits = vec![0u64; n * words];
    for (i, r) in sets.iter().enumerate() {
        for &v in &r.members {
            bits[v as usize * words + i / 64] |= 1 << (i % 64);
        }
    }
    let mut best = (0u64, Vec::new());
    let mut union = vec![0u64; words];
    for combo in (0..n as NodeId).combinations(k) {
        union.fill(0);
        for &v in &combo {
            let row = &bits[v as usize * words..(v as usize + 1) * words];
            for (u, b) in union.iter_mut().zip(row) {
                *u |= b;
            }
        }
        let covered: u64 = union.iter().map(|w| w.count_ones() as u64).sum();
        if best.1.is_empty() || covered > best.0 {
            best = (covered, combo);
        }
    }
    Ok((best.0 as f64 / sets.len() as f64, best.1))
}

/// Exact quantities for one graph and `k`.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub k: usize,
    /// `sigma(S)` for each queried set.
    pub exact_sigma: Vec<(Vec<NodeId>, f64)>,
    pub opt_value: f64,
    pub opt_set: Vec<NodeId>,
    /// Exact max coverage for an RR prefix, when one was supplied.
    pub coverage_opt: Option<(f64, Vec<NodeId>)>,
}

impl OracleReport {
    pub fn compute(g: &Graph, k: usize, queries: &[Vec<NodeId>], prefix: Option<&[RRSet]>) -> Result<Self> {
        let (opt_value, opt_set) = exact_opt(g, k)?;
        let exact_sigma = queries
            .iter()
            .map(|q| exact_sigma(g, q).map(|s| (q.clone(), s)))
            .collect::<Result<Vec<_>>>()?;
        let coverage_opt = prefix.map(|p| exact_max_coverage(p, g.n(), k)).transpose()?;
        Ok(OracleReport { k, exact_sigma, opt_value, opt_set, coverage_opt })
    }
}
