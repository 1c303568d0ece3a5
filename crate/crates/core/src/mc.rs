//! Forward Monte Carlo estimation of influence spread under independent
//! cascade. Used to evaluate seed sets, never to select them.

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::rr::Marks;
use crate::seed;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub runs: u64,
}

struct Scratch {
    marks: Marks,
    queue: Vec<NodeId>,
}

/// Size of the activated set in one forward cascade from `seeds`. Each newly
/// activated node tries each of its out-edges exactly once.
pub fn simulate_once<R: Rng + ?Sized>(g: &Graph, seeds: &[NodeId], rng: &mut R) -> usize {
    let mut scratch = Scratch { marks: Marks::new(g.n()), queue: Vec::new() };
    cascade(g, seeds, rng, &mut scratch)
}

fn cascade<R: Rng + ?Sized>(g: &Graph, seeds: &[NodeId], rng: &mut R, scratch: &mut Scratch) -> usize {
    scratch.marks.reset();
    scratch.queue.clear();
    for &s in seeds {
        if scratch.marks.mark(s) {
            scratch.queue.push(s);
        }
    }
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        for arc in g.out_arcs(u) {
            if arc.p > 0.0 && !scratch.marks.is_marked(arc.node) && rng.gen::<f64>() < arc.p {
                scratch.marks.mark(arc.node);
                scratch.queue.push(arc.node);
            }
        }
    }
    scratch.queue.len()
}

pub fn estimate_spread(g: &Graph, seeds: &[NodeId], runs: u64, seed: u64) -> Result<SpreadEstimate> {
    estimate_spread_with(g, seeds, runs, seed, Exec::default())
}

/// Mean activated-set size over `runs` cascades. Run `r` draws from stream
/// `(seed, r)`, and the sums are exact integers, so the estimate does not
/// depend on `exec`.
pub fn estimate_spread_with(g: &Graph, seeds: &[NodeId], runs: u64, seed: u64, exec: Exec) -> Result<SpreadEstimate> {
    if runs == 0 {
        return Err(Error::domain("runs must be at least 1"));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s as usize >= g.n()) {
        return Err(Error::domain(format!("seed node {bad} out of range for n = {}", g.n())));
    }
    let sizes = exec.map_init(
        0..runs,
        || Scratch { marks: Marks::new(g.n()), queue: Vec::new() },
        |scratch, r| {
            let mut rng = seed::stream(seed, r);
            cascade(g, seeds, &mut rng, scratch) as u64
        },
    );
    let sum: u128 = sizes.iter().map(|&x| x as u128).sum();
    let sum_sq: u128 = sizes.iter().map(|&x| (x as u128) * (x as u128)).sum();
    let r = runs as f64;
    let mean = sum as f64 / r;
    let stderr = if runs > 1 {
        // n * sum_sq - sum^2 is exact in integers
        let num = (runs as u128 * sum_sq - sum * sum) as f64;
        (num / (r * (r - 1.0)) / r).sqrt()
    } else {
        0.0
    };
    Ok(SpreadEstimate { mean, stderr, runs })
}
