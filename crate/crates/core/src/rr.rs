//! Reverse-reachable (RR) sets and the lazily materialized RR-set sequence.
//!
//! An [`RRSequence`] stands for one infinite i.i.d. sequence `R_1, R_2, ...`.
//! Set `R_i` is drawn from its own counter-based stream keyed by
//! `(master_seed, i)`, so a prefix of length `theta` is the same no matter
//! how it was materialized (serially, in parallel, in several extensions).

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::seed;
use crate::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RRSet {
    pub root: NodeId,
    /// Sorted node ids; always contains `root`.
    pub members: Vec<NodeId>,
}

impl RRSet {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Visited marks that are reset in O(1) by bumping an epoch.
#[derive(Debug, Clone)]
pub(crate) struct Marks {
    epoch: Vec<u32>,
    current: u32,
}

impl Marks {
    pub(crate) fn new(n: usize) -> Self {
        Marks { epoch: vec![0; n], current: 0 }
    }

    pub(crate) fn reset(&mut self) {
        self.current = self.current.wrapping_add(1);
        if self.current == 0 {
            self.epoch.fill(0);
            self.current = 1;
        }
    }

    #[inline]
    pub(crate) fn is_marked(&self, v: NodeId) -> bool {
        self.epoch[v as usize] == self.current
    }

    /// Marks `v`; returns false if it was already marked.
    #[inline]
    pub(crate) fn mark(&mut self, v: NodeId) -> bool {
        let slot = &mut self.epoch[v as usize];
        if *slot == self.current {
            false
        } else {
            *slot = self.current;
            true
        }
    }
}

/// Per-worker buffers for RR-set sampling.
#[derive(Debug, Clone)]
pub struct Scratch {
    marks: Marks,
    queue: Vec<NodeId>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch { marks: Marks::new(n), queue: Vec::new() }
    }
}

/// Samples one RR set: a uniform root, then a reverse BFS in which every
/// in-edge `(u, v)` of a reached node `v` is flipped once with probability
/// `p` when `u` has not been reached yet.
pub fn sample_rr<R: Rng + ?Sized>(g: &Graph, rng: &mut R, scratch: &mut Scratch) -> RRSet {
    let root = rng.gen_range(0..g.n()) as NodeId;
    scratch.marks.reset();
    scratch.queue.clear();
    scratch.marks.mark(root);
    scratch.queue.push(root);
    let mut head = 0;
    while head < scratch.queue.len() {
        let v = scratch.queue[head];
        head += 1;
        for arc in g.in_arcs(v) {
            // gen::<f64>() is in [0, 1), so p = 1 always fires and p = 0 never does.
            if arc.p > 0.0 && !scratch.marks.is_marked(arc.node) && rng.gen::<f64>() < arc.p {
                scratch.marks.mark(arc.node);
                scratch.queue.push(arc.node);
            }
        }
    }
    let mut members = scratch.queue.clone();
    members.sort_unstable();
    RRSet { root, members }
}

/// The RR set at 0-based position `index` of the sequence keyed by `seed`.
pub fn sample_at(g: &Graph, seed: u64, index: u64, scratch: &mut Scratch) -> RRSet {
    let mut rng = seed::stream(seed, index);
    sample_rr(g, &mut rng, scratch)
}

#[derive(Debug, Clone)]
pub struct RRSequence<'g> {
    graph: &'g Graph,
    seed: u64,
    exec: Exec,
    sets: Vec<RRSet>,
}

impl<'g> RRSequence<'g> {
    pub fn new(graph: &'g Graph, seed: u64) -> Self {
        RRSequence { graph, seed, exec: Exec::default(), sets: Vec::new() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    /// Number of sets materialized so far.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Materializes sets up to length `theta`. Existing entries are never
    /// touched.
    pub fn extend_to(&mut self, theta: usize) {
        let start = self.sets.len() as u64;
        let end = theta as u64;
        if end <= start {
            return;
        }
        let g = self.graph;
        let seed = self.seed;
        let fresh = self
            .exec
            .map_init(start..end, || Scratch::new(g.n()), |scratch, i| sample_at(g, seed, i, scratch));
        self.sets.extend(fresh);
    }

    /// The first `theta` sets, generating missing ones.
    pub fn prefix(&mut self, theta: usize) -> Result<&[RRSet]> {
        if theta == 0 {
            return Err(Error::domain("prefix length must be at least 1"));
        }
        self.extend_to(theta);
        Ok(&self.sets[..theta])
    }

    /// Already materialized sets.
    pub fn materialized(&self) -> &[RRSet] {
        &self.sets
    }

    const MAGIC: &'static [u8; 8] = b"IMMRRSEQ";
    const VERSION: u32 = 1;

    /// Writes the first `theta` sets with a header carrying the format
    /// version, master seed, graph hash and `theta`.
    pub fn dump(&mut self, theta: usize, mut w: impl Write) -> Result<()> {
        let graph_hash = self.graph.content_hash();
        let seed = self.seed;
        let sets = self.prefix(theta)?;
        w.write_all(Self::MAGIC)?;
        w.write_u32::<LittleEndian>(Self::VERSION)?;
        w.write_u64::<LittleEndian>(seed)?;
        w.write_all(&graph_hash)?;
        w.write_u64::<LittleEndian>(theta as u64)?;
        for set in sets {
            w.write_u32::<LittleEndian>(set.root)?;
            w.write_u32::<LittleEndian>(set.members.len() as u32)?;
            for &v in &set.members {
                w.write_u32::<LittleEndian>(v)?;
            }
        }
        Ok(())
    }

    /// Reads a dump produced by [`RRSequence::dump`] for the same graph. The
    /// returned sequence continues deterministically past the loaded prefix.
    pub fn load(graph: &'g Graph, mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::Dump("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != Self::VERSION {
            return Err(Error::Dump(format!("unsupported version {version}")));
        }
        let seed = r.read_u64::<LittleEndian>()?;
        let mut hash = [0u8; 32];
        r.read_exact(&mut hash)?;
        if hash != graph.content_hash() {
            return Err(Error::Dump("graph hash mismatch".into()));
        }
        let theta = r.read_u64::<LittleEndian>()? as usize;
        let n = graph.n() as u32;
        let mut sets = Vec::with_capacity(theta.min(1 << 20));
        for _ in 0..theta {
            let root = r.read_u32::<LittleEndian>()?;
            let len = r.read_u32::<LittleEndian>()? as usize;
            let mut members = Vec::with_capacity(len.min(n as usize));
            for _ in 0..len {
                members.push(r.read_u32::<LittleEndian>()?);
            }
            let valid = root < n
                && members.iter().all(|&v| v < n)
                && members.windows(2).all(|w| w[0] < w[1])
                && members.binary_search(&root).is_ok();
            if !valid {
                return Err(Error::Dump("malformed rr set".into()));
            }
            sets.push(RRSet { root, members });
        }
        Ok(RRSequence { graph, seed, exec: Exec::default(), sets })
    }
}

/// Fraction of sets in `sets` that intersect `seeds`. `n * F` estimates the
/// influence spread of `seeds`.
pub fn coverage_fraction(sets: &[RRSet], seeds: &[NodeId]) -> f64 {
    if sets.is_empty() {
        return 0.0;
    }
    let size = seeds.iter().map(|&s| s as usize + 1).max().unwrap_or(0);
    let mut in_seeds = vec![false; size];
    for &s in seeds {
        in_seeds[s as usize] = true;
    }
    let hit = sets
        .iter()
        .filter(|r| r.members.iter().any(|&v| (v as usize) < size && in_seeds[v as usize]))
        .count();
    hit as f64 / sets.len() as f64
}

/// Inverted index from node to the positions of the RR sets containing it.
#[derive(Debug, Clone)]
pub struct CoverageIndex {
    offsets: Vec<usize>,
    set_ids: Vec<u32>,
    num_sets: usize,
}

impl CoverageIndex {
    pub fn build(sets: &[RRSet], n: usize) -> Self {
        let mut counts = vec![0usize; n + 1];
        for r in sets {
            for &v in &r.members {
                counts[v as usize + 1] += 1;
            }
        }
        for v in 0..n {
            counts[v + 1] += counts[v];
        }
        let offsets = counts;
        let mut fill = offsets[..n].to_vec();
        let mut set_ids = vec![0u32; offsets[n]];
        for (i, r) in sets.iter().enumerate() {
            for &v in &r.members {
                set_ids[fill[v as usize]] = i as u32;
                fill[v as usize] += 1;
            }
        }
        CoverageIndex { offsets, set_ids, num_sets: sets.len() }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_sets(&self) -> usize {
        self.num_sets
    }

    /// Positions (ascending) of the sets containing `v`.
    #[inline]
    pub fn sets_of(&self, v: NodeId) -> &[u32] {
        let v = v as usize;
        &self.set_ids[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Model;

    fn set(root: NodeId, members: &[NodeId]) -> RRSet {
        RRSet { root, members: members.to_vec() }
    }

    fn one_edge(p: f64) -> Graph {
        Graph::from_edges(2, [(0, 1, p)], Model::Explicit).unwrap()
    }

    #[test]
    fn deterministic_edge() {
        let g = one_edge(1.0);
        let mut scratch = Scratch::new(2);
        let mut seen = [false; 2];
        for i in 0..64 {
            let r = sample_at(&g, 5, i, &mut scratch);
            match r.root {
                1 => assert_eq!(r.members, vec![0, 1]),
                0 => assert_eq!(r.members, vec![0]),
                _ => unreachable!(),
            }
            seen[r.root as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn half_edge_joint_frequency() {
        // Pr{root = 1 and 0 in R} = 0.5 * 0.5.
        let g = one_edge(0.5);
        let mut seq = RRSequence::new(&g, 17);
        let sets = seq.prefix(100_000).unwrap();
        let hits = sets.iter().filter(|r| r.root == 1 && r.contains(0)).count();
        let freq = hits as f64 / sets.len() as f64;
        assert!((freq - 0.25).abs() <= 0.01, "{freq}");
    }

    #[test]
    fn prefix_is_stable_under_extension() {
        let g = Graph::from_edges(4, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.7), (3, 0, 0.2)], Model::Explicit).unwrap();
        let mut seq = RRSequence::new(&g, 3);
        let five = seq.prefix(5).unwrap().to_vec();
        let three = seq.prefix(3).unwrap().to_vec();
        assert_eq!(&five[..3], &three[..]);
        let mut again = RRSequence::new(&g, 3);
        assert_eq!(again.prefix(5).unwrap(), &five[..]);
    }

    #[test]
    fn zero_prefix_rejected() {
        let g = one_edge(1.0);
        assert!(matches!(RRSequence::new(&g, 0).prefix(0), Err(Error::Domain(_))));
    }

    #[test]
    fn different_seeds_differ_early() {
        let g = Graph::from_edges(
            6,
            [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5), (3, 4, 0.5), (4, 5, 0.5), (5, 0, 0.5), (0, 3, 0.5)],
            Model::Explicit,
        )
        .unwrap();
        let a = RRSequence::new(&g, 1).prefix(100).unwrap().to_vec();
        let b = RRSequence::new(&g, 2).prefix(100).unwrap().to_vec();
        let first_diff = a.iter().zip(&b).position(|(x, y)| x != y);
        assert!(first_diff.is_some());
    }

    #[test]
    fn coverage_examples() {
        let sets = vec![set(0, &[0]), set(1, &[0, 1]), set(2, &[2]), set(1, &[1])];
        assert_eq!(coverage_fraction(&sets, &[]), 0.0);
        assert_eq!(coverage_fraction(&sets, &[1]), 0.5);
        assert_eq!(coverage_fraction(&sets, &[0, 1, 2]), 1.0);
    }

    #[test]
    fn coverage_index_matches_members() {
        let sets = vec![set(0, &[0]), set(1, &[0, 1]), set(2, &[2]), set(1, &[1])];
        let idx = CoverageIndex::build(&sets, 4);
        assert_eq!(idx.sets_of(0), &[0, 1]);
        assert_eq!(idx.sets_of(1), &[1, 3]);
        assert_eq!(idx.sets_of(2), &[2]);
        assert!(idx.sets_of(3).is_empty());
        assert_eq!(idx.num_sets(), 4);
    }

    #[test]
    fn marks_wraparound() {
        let mut m = Marks::new(3);
        m.current = u32::MAX - 1;
        m.reset();
        assert!(m.mark(1));
        m.reset();
        assert!(m.mark(1));
        assert!(!m.mark(1));
    }
}
