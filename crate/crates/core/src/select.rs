//! Greedy k-max-coverage over a prefix of RR sets (node selection).
//!
//! Each round picks the node that covers the most RR sets not yet covered;
//! ties go to the lowest node id. Rounds continue after coverage saturates,
//! so the result always holds `min(k, n)` seeds.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use log::warn;

use crate::error::{Error, Result};
use crate::rr::{CoverageIndex, RRSet};
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    /// Seeds in pick order.
    pub seeds: Vec<NodeId>,
    /// Number of newly covered sets per pick.
    pub marginal_counts: Vec<u64>,
    /// Number of sets in the prefix the seeds were selected on.
    pub theta: usize,
    /// The `k` asked for, before clamping to `n`.
    pub requested_k: usize,
}

impl SeedResult {
    pub fn covered(&self) -> u64 {
        self.marginal_counts.iter().sum()
    }

    /// Coverage fraction `F(S)` of the selected seeds.
    pub fn coverage(&self) -> f64 {
        self.covered() as f64 / self.theta as f64
    }

    /// Per-pick coverage increments as fractions of `theta`.
    pub fn marginal_gains(&self) -> Vec<f64> {
        self.marginal_counts.iter().map(|&c| c as f64 / self.theta as f64).collect()
    }

    pub fn was_clamped(&self) -> bool {
        self.requested_k > self.seeds.len()
    }

    /// Seeds in ascending id order.
    pub fn sorted_seeds(&self) -> Vec<NodeId> {
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s
    }
}

fn check_args(sets: &[RRSet], n: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if sets.is_empty() {
        return Err(Error::domain("node selection needs a nonempty RR-set prefix"));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if k > n {
        warn!("k = {k} exceeds n = {n}; selecting all {n} nodes");
        return Ok(n);
    }
    Ok(k)
}

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    gain: u64,
    node: Reverse<NodeId>,
    round: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on gain, then lowest id.
        (self.gain, self.node).cmp(&(other.gain, other.node))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lazy (CELF) greedy. Produces exactly the same picks as
/// [`node_selection_naive`] because cached gains only ever overestimate.
pub fn node_selection(sets: &[RRSet], n: usize, k: usize) -> Result<SeedResult> {
    let picks = check_args(sets, n, k)?;
    let index = CoverageIndex::build(sets, n);
    let mut covered = vec![false; sets.len()];
    let mut heap: BinaryHeap<Candidate> = (0..n as NodeId)
        .map(|v| Candidate { gain: index.sets_of(v).len() as u64, node: Reverse(v), round: 0 })
        .collect();

    let mut seeds = Vec::with_capacity(picks);
    let mut marginal_counts = Vec::with_capacity(picks);
    while seeds.len() < picks {
        let mut top = heap.pop().expect("heap holds every unpicked node");
        let round = seeds.len();
        if top.round == round {
            let v = top.node.0;
            for &i in index.sets_of(v) {
                covered[i as usize] = true;
            }
            seeds.push(v);
            marginal_counts.push(top.gain);
        } else {
            top.gain = index.sets_of(top.node.0).iter().filter(|&&i| !covered[i as usize]).count() as u64;
            top.round = round;
            heap.push(top);
        }
    }
    Ok(SeedResult { seeds, marginal_counts, theta: sets.len(), requested_k: k })
}

/// Plain greedy that rescans every node each round.
pub fn node_selection_naive(sets: &[RRSet], n: usize, k: usize) -> Result<SeedResult> {
    let picks = check_args(sets, n, k)?;
    let index = CoverageIndex::build(sets, n);
    let mut covered = vec![false; sets.len()];
    let mut picked = vec![false; n];
    let mut seeds = Vec::with_capacity(picks);
    let mut marginal_counts = Vec::with_capacity(picks);
    for _ in 0..picks {
        let mut best: Option<(u64, NodeId)> = None;
        for v in 0..n as NodeId {
            if picked[v as usize] {
                continue;
            }
            let gain = index.sets_of(v).iter().filter(|&&i| !covered[i as usize]).count() as u64;
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, v));
            }
        }
        let (gain, v) = best.expect("picks <= n");
        picked[v as usize] = true;
        for &i in index.sets_of(v) {
            covered[i as usize] = true;
        }
        seeds.push(v);
        marginal_counts.push(gain);
    }
    Ok(SeedResult { seeds, marginal_counts, theta: sets.len(), requested_k: k })
}
