mod common;

use imm_core::{Graph, Model};
use proptest::prelude::*;

fn multiset(g: &Graph) -> Vec<(u32, u32, u64)> {
    let mut e: Vec<_> = g.edges().iter().map(|e| (e.src, e.dst, e.p.to_bits())).collect();
    e.sort_unstable();
    e
}

proptest! {
    #[test]
    fn serialize_round_trip(seed in any::<u64>(), n in 1usize..30, m in 0usize..60) {
        let g = if n == 1 {
            Graph::from_edges(1, (0..m).map(|_| (0, 0, 0.5)), Model::Explicit).unwrap()
        } else {
            common::random_graph(seed, n, m)
        };
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = Graph::read(buf.as_slice(), Model::Explicit).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(back.content_hash(), g.content_hash());
    }

    #[test]
    fn degrees_and_wc_weights(seed in any::<u64>(), n in 2usize..30, m in 0usize..80) {
        let g = common::random_graph(seed, n, m);
        let mut text = Vec::new();
        g.write_edge_list(&mut text).unwrap();
        let wc = Graph::read(text.as_slice(), Model::WeightedCascade).unwrap();
        let total: usize = (0..n as u32).map(|v| wc.in_degree(v)).sum();
        prop_assert_eq!(total, m);
        for v in 0..n as u32 {
            let arcs = wc.in_arcs(v);
            if !arcs.is_empty() {
                let s: f64 = arcs.iter().map(|a| a.p).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
            for a in arcs {
                prop_assert_eq!(a.p, 1.0 / wc.in_degree(v) as f64);
            }
        }
    }

    #[test]
    fn transpose_twice_is_identity(seed in any::<u64>(), m in 0usize..30) {
        let g = common::random_graph(seed, 8, m);
        let tt = g.transposed().transposed();
        prop_assert_eq!(multiset(&tt), multiset(&g));
        // in-arcs enumerate exactly the in-edges
        for v in 0..8u32 {
            let mut from_index: Vec<_> = g.in_arcs(v).iter().map(|a| (a.node, a.p.to_bits())).collect();
            let mut from_edges: Vec<_> =
                g.edges().iter().filter(|e| e.dst == v).map(|e| (e.src, e.p.to_bits())).collect();
            from_index.sort_unstable();
            from_edges.sort_unstable();
            prop_assert_eq!(from_index, from_edges);
        }
    }
}

#[test]
fn load_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "# tiny\n3 3\n0 1\n2 1\n1 2\n").unwrap();
    let g = Graph::load(&path, Model::WeightedCascade).unwrap();
    assert_eq!(g.in_arcs(1).len(), 2);
    assert!(g.in_arcs(1).iter().all(|a| a.p == 0.5));
    assert_eq!(g.in_arcs(2)[0].p, 1.0);
    assert!(Graph::load(dir.path().join("missing.txt"), Model::WeightedCascade).is_err());
}
