//! Immutable directed graph with per-edge activation probabilities.
//!
//! Edge-list text format: a header line `n m`, then `m` edge lines `u v`
//! (weighted cascade) or `u v p` (explicit probabilities). Tokens are
//! whitespace separated, blank lines and lines starting with `#` are
//! ignored. Node ids must already be dense in `0..n`.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::NodeId;

/// How edge probabilities are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Weighted cascade: `p(u, v) = 1 / in_degree(v)`.
    WeightedCascade,
    /// Probabilities read from the third column.
    Explicit,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wc" => Ok(Model::WeightedCascade),
            "explicit" => Ok(Model::Explicit),
            other => Err(Error::domain(format!("unknown model {other:?} (expected wc|explicit)"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::WeightedCascade => "wc",
            Model::Explicit => "explicit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub p: f64,
}

/// One entry of an adjacency list: the node on the other end and the edge
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub node: NodeId,
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    model: Model,
    edges: Vec<Edge>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<Arc>,
    out_offsets: Vec<usize>,
    out_arcs: Vec<Arc>,
}

impl Graph {
    /// Builds a graph from `(src, dst, p)` triples. Under
    /// [`Model::WeightedCascade`] the given probabilities are ignored and
    /// replaced by `1 / in_degree(dst)`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId, f64)>, model: Model) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph must have at least one node"));
        }
        if n > NodeId::MAX as usize {
            return Err(Error::domain(format!("n = {n} exceeds the node id range")));
        }
        let mut list = Vec::new();
        for (i, (src, dst, p)) in edges.into_iter().enumerate() {
            for id in [src, dst] {
                if id as usize >= n {
                    return Err(Error::NodeOutOfBounds { line: i + 1, id: id as u64, n });
                }
            }
            if model == Model::Explicit && !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability { line: i + 1, p });
            }
            list.push(Edge { src, dst, p });
        }
        Ok(Self::build(n, list, model))
    }

    fn build(n: usize, mut edges: Vec<Edge>, model: Model) -> Self {
        let mut in_deg = vec![0usize; n];
        let mut out_deg = vec![0usize; n];
        for e in &edges {
            in_deg[e.dst as usize] += 1;
            out_deg[e.src as usize] += 1;
            if e.src == e.dst {
                warn!("self-loop on node {}", e.src);
            }
        }
        if model == Model::WeightedCascade {
            for e in &mut edges {
                e.p = 1.0 / in_deg[e.dst as usize] as f64;
            }
        }

        let in_offsets = prefix_sums(&in_deg);
        let out_offsets = prefix_sums(&out_deg);
        let placeholder = Arc { node: 0, p: 0.0 };
        let mut in_arcs = vec![placeholder; edges.len()];
        let mut out_arcs = vec![placeholder; edges.len()];
        let mut in_fill = in_offsets[..n].to_vec();
        let mut out_fill = out_offsets[..n].to_vec();
        for e in &edges {
            let slot = &mut in_fill[e.dst as usize];
            in_arcs[*slot] = Arc { node: e.src, p: e.p };
            *slot += 1;
            let slot = &mut out_fill[e.src as usize];
            out_arcs[*slot] = Arc { node: e.dst, p: e.p };
            *slot += 1;
        }

        Graph { n, model, edges, in_offsets, in_arcs, out_offsets, out_arcs }
    }

    pub fn load(path: impl AsRef<Path>, model: Model) -> Result<Self> {
        let file = File::open(path)?;
        Self::read(BufReader::new(file), model)
    }

    pub fn read(reader: impl BufRead, model: Model) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let Some((n, m)) = header else {
                if tokens.len() != 2 {
                    return Err(parse_err(lineno, "expected header \"n m\""));
                }
                let n = parse_int(tokens[0], lineno)? as usize;
                let m = parse_int(tokens[1], lineno)? as usize;
                if n == 0 {
                    return Err(parse_err(lineno, "n must be positive"));
                }
                header = Some((n, m));
                edges.reserve(m);
                continue;
            };
            if edges.len() == m {
                return Err(parse_err(lineno, format!("more than the declared {m} edges")));
            }
            let arity_ok = match model {
                Model::WeightedCascade => tokens.len() == 2 || tokens.len() == 3,
                Model::Explicit => tokens.len() == 3,
            };
            if !arity_ok {
                let want = if model == Model::Explicit { "\"u v p\"" } else { "\"u v\"" };
                return Err(parse_err(lineno, format!("expected {want}, got {} fields", tokens.len())));
            }
            let mut ids = [0 as NodeId; 2];
            for (slot, tok) in ids.iter_mut().zip(&tokens[..2]) {
                let id = parse_int(tok, lineno)?;
                if id >= n as u64 {
                    return Err(Error::NodeOutOfBounds { line: lineno, id, n });
                }
                *slot = id as NodeId;
            }
            let p = match model {
                Model::Explicit => {
                    let p: f64 = tokens[2]
                        .parse()
                        .map_err(|_| parse_err(lineno, format!("bad probability {:?}", tokens[2])))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Probability { line: lineno, p });
                    }
                    p
                }
                Model::WeightedCascade => 0.0,
            };
            edges.push(Edge { src: ids[0], dst: ids[1], p });
        }
        let Some((n, m)) = header else {
            return Err(parse_err(0, "missing header line"));
        };
        if edges.len() != m {
            return Err(parse_err(0, format!("header declares {m} edges, found {}", edges.len())));
        }
        Ok(Self::build(n, edges, model))
    }

    /// Writes the graph in the explicit-probability format. Reading the
    /// output back with [`Model::Explicit`] reproduces the same edge list.
    pub fn write_edge_list(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{} {}", self.n, self.edges.len())?;
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.src, e.dst, e.p)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// In-edges of `v` as `(u, p)` pairs over edges `(u, v)`.
    #[inline]
    pub fn in_arcs(&self, v: NodeId) -> &[Arc] {
        let v = v as usize;
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// Out-edges of `u` as `(v, p)` pairs over edges `(u, v)`.
    #[inline]
    pub fn out_arcs(&self, u: NodeId) -> &[Arc] {
        let u = u as usize;
        &self.out_arcs[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_arcs(v).len()
    }

    /// The graph with every edge reversed, probabilities kept. Always
    /// explicit, since weighted-cascade weights depend on edge direction.
    pub fn transposed(&self) -> Graph {
        let edges = self.edges.iter().map(|e| Edge { src: e.dst, dst: e.src, p: e.p }).collect();
        Self::build(self.n, edges, Model::Explicit)
    }

    /// SHA-256 over `n` and the edge list, used to tie RR-set dumps to the
    /// graph they were sampled from.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.edges.len() as u64).to_le_bytes());
        for e in &self.edges {
            h.update(e.src.to_le_bytes());
            h.update(e.dst.to_le_bytes());
            h.update(e.p.to_bits().to_le_bytes());
        }
        h.finalize().into()
    }
}

fn prefix_sums(counts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len() + 1);
    let mut acc = 0;
    out.push(0);
    for c in counts {
        acc += c;
        out.push(acc);
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_int(tok: &str, line: usize) -> Result<u64> {
    tok.parse().map_err(|_| parse_err(line, format!("bad integer {tok:?}")))
}
