use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use imm_core::imm::run_detailed;
use imm_core::mc::estimate_spread_with;
use imm_core::oracle::SigmaTable;
use imm_core::{Exec, Graph, ImmParams, Model, NodeId, RRSequence, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

/// Preferential-attachment-ish graph under weighted cascade.
fn synthetic(n: usize, out_deg: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets: Vec<NodeId> = vec![0];
    let mut edges = Vec::new();
    for v in 1..n as NodeId {
        for _ in 0..out_deg.min(v as usize) {
            let u = targets[rng.gen_range(0..targets.len())];
            edges.push((v, u, 0.0));
            edges.push((u, v, 0.0));
            targets.push(u);
        }
        targets.push(v);
    }
    Graph::from_edges(n, edges, Model::WeightedCascade).unwrap()
}

fn rr_generation(c: &mut Criterion) {
    let g = synthetic(20_000, 3, 1);
    let mut group = c.benchmark_group("rr_generation");
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, 50_000), |b| {
            b.iter(|| {
                let mut seq = RRSequence::new(&g, 7).with_exec(exec);
                black_box(seq.prefix(50_000).unwrap().len())
            })
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let g = synthetic(20_000, 3, 2);
    let seeds: Vec<NodeId> = (0..50).collect();
    let mut group = c.benchmark_group("monte_carlo");
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, 2_000), |b| {
            b.iter(|| black_box(estimate_spread_with(&g, &seeds, 2_000, 3, exec).unwrap().mean))
        });
    }
    group.finish();
}

fn world_enumeration(c: &mut Criterion) {
    let g = synthetic(10, 1, 3);
    let mut group = c.benchmark_group("sigma_table");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::new(name, g.m()), |b| {
            b.iter(|| black_box(SigmaTable::build_with(&g, 2, exec).unwrap().opt().0))
        });
    }
    group.finish();
}

fn imm_end_to_end(c: &mut Criterion) {
    let g = synthetic(5_000, 2, 4);
    let mut group = c.benchmark_group("imm_run");
    group.sample_size(10);
    for variant in Variant::ALL {
        let params = ImmParams::new(g.n() as u64, 20, 0.3, 1.0, variant).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_function(BenchmarkId::new(name, variant), |b| {
                b.iter(|| black_box(run_detailed(&g, &params, 11, exec).unwrap().0.rr_sets_total))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, rr_generation, monte_carlo, world_enumeration, imm_end_to_end);
criterion_main!(benches);
