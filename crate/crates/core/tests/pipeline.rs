use clusterpart::graph::sbm_generate;
use clusterpart::metrics::{avg_graph_bandwidth, edge_cut_ratio, vertex_balance};
use clusterpart::partitioner::{ldg_partition, partition, random_partition, EmbeddingSource, PipelineConfig};
use clusterpart::reorder::{apply_ordering, ordering_from_partition, reorder_unbalanced};
use clusterpart::{Graph, Ordering, PartitionAssignment, VertexClass};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn separated_blocks_beat_random() {
    let (g, f, s) = sbm_generate(&[100; 4], 0.2, 0.005, 3).unwrap();
    let cfg = PipelineConfig::new(4, 3);
    let ours = edge_cut_ratio(&g, &partition(&g, EmbeddingSource::Features(&f), &s, &cfg).unwrap()).unwrap();
    let random: Vec<f64> = (0..10)
        .map(|seed| edge_cut_ratio(&g, &random_partition(400, 4, seed).unwrap()).unwrap())
        .collect();
    assert!(ours < mean(&random), "{ours} vs {}", mean(&random));
}

#[test]
fn ldg_beats_random_on_sbm() {
    let mut ldg = Vec::new();
    let mut rnd = Vec::new();
    for seed in 0..10 {
        let (g, _, _) = sbm_generate(&[100; 4], 0.2, 0.005, seed).unwrap();
        ldg.push(edge_cut_ratio(&g, &ldg_partition(&g, 4, 1.05, seed).unwrap()).unwrap());
        rnd.push(edge_cut_ratio(&g, &random_partition(400, 4, seed).unwrap()).unwrap());
    }
    assert!(mean(&ldg) < mean(&rnd));
}

#[test]
fn pipeline_output_respects_balance() {
    for seed in 0..5 {
        // Uneven blocks force migration.
        let (g, f, s) = sbm_generate(&[300, 60, 40], 0.1, 0.01, seed).unwrap();
        let a = partition(&g, EmbeddingSource::Features(&f), &s, &PipelineConfig::new(3, seed)).unwrap();
        for class in VertexClass::ALL {
            let b = vertex_balance(&a, Some((&s, class))).unwrap().value;
            assert!(b <= 1.05, "seed {seed} {class}: {b}");
        }
    }
}

#[test]
fn all_partitioners_are_total() {
    let (g, f, s) = sbm_generate(&[30, 30, 30], 0.2, 0.01, 1).unwrap();
    let parts = [
        partition(&g, EmbeddingSource::Features(&f), &s, &PipelineConfig::new(5, 1)).unwrap(),
        random_partition(90, 5, 1).unwrap(),
        ldg_partition(&g, 5, 1.05, 1).unwrap(),
    ];
    for a in parts {
        assert_eq!(a.len(), 90);
        assert_eq!(a.k(), 5);
        assert!(a.parts().iter().all(|&p| p < 5));
    }
}

#[test]
fn random_ecr_approaches_one_minus_inverse_k() {
    let (g, _, _) = sbm_generate(&[2000], 0.005, 0.0, 5).unwrap();
    assert!(g.num_edges() > 9000);
    for k in [2usize, 4, 8] {
        let ecr = edge_cut_ratio(&g, &random_partition(2000, k, 17).unwrap()).unwrap();
        assert!((ecr - (1.0 - 1.0 / k as f64)).abs() < 0.02, "k={k}: {ecr}");
    }
}

#[test]
fn disconnected_cliques_are_contiguous() {
    let clique = |base: usize| (0..6).flat_map(move |i| (i + 1..6).map(move |j| (base + i, base + j)));
    // Interleave the cliques' ids so contiguity is not free.
    let map = |v: usize| if v < 6 { 2 * v } else { 2 * (v - 6) + 1 };
    let g = Graph::from_edges(12, clique(0).chain(clique(6)).map(|(u, v)| (map(u), map(v)))).unwrap();
    let mut rows = vec![vec![0.0; 2]; 12];
    for v in 0..12 {
        rows[v] = if v % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
    }
    let f = clusterpart::Matrix::from_rows(&rows).unwrap();
    let o = reorder_unbalanced(&g, EmbeddingSource::Features(&f), &PipelineConfig::new(2, 0)).unwrap();
    for (u, v) in g.edges() {
        assert!(clusterpart::metrics::gap(&o, u, v) < 6);
    }
    assert_eq!(reorder_unbalanced(&g, EmbeddingSource::Features(&f), &PipelineConfig::new(1, 0)).unwrap(), Ordering::identity(12));
}

#[test]
fn apply_ordering_is_isomorphism() {
    let (g, f, s) = sbm_generate(&[10, 10], 0.4, 0.05, 2).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for _ in 0..10 {
        let mut perm: Vec<usize> = (0..20).collect();
        perm.shuffle(&mut rng);
        let o = Ordering::new(perm).unwrap();
        let (g2, f2, s2) = apply_ordering(&g, &f, &s, &o).unwrap();
        g2.validate().unwrap();
        assert_eq!(g2.num_edges(), g.num_edges());
        let mut d1 = g.degrees();
        let mut d2 = g2.degrees();
        d1.sort_unstable();
        d2.sort_unstable();
        assert_eq!(d1, d2);
        for (u, v) in g.edges() {
            assert!(g2.neighbors(o.new_id(u)).contains(&o.new_id(v)));
        }
        for v in 0..20 {
            assert_eq!(f.row(v), f2.row(o.new_id(v)));
            assert_eq!(s.class_of(v), s2.class_of(o.new_id(v)));
        }
        let a = random_partition(20, 3, 9).unwrap();
        assert_eq!(
            edge_cut_ratio(&g, &a).unwrap(),
            edge_cut_ratio(&g2, &a.permute(&o).unwrap()).unwrap()
        );
    }
}

#[test]
fn cluster_blocks_beat_random_order_bandwidth() {
    let mut wins = 0;
    for seed in 0..10 {
        let (g, f, s) = sbm_generate(&[100; 4], 0.1, 0.002, seed).unwrap();
        let a = partition(&g, EmbeddingSource::Features(&f), &s, &PipelineConfig::new(4, seed)).unwrap();
        let blocks = avg_graph_bandwidth(&g, &ordering_from_partition(&a)).unwrap();
        let mut perm: Vec<usize> = (0..400).collect();
        perm.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
        let random = avg_graph_bandwidth(&g, &Ordering::new(perm).unwrap()).unwrap();
        if blocks < random {
            wins += 1;
        }
    }
    assert!(wins >= 9, "{wins}/10");
}

#[test]
fn ingested_embeddings_skip_encoder() {
    let (g, f, s) = sbm_generate(&[20, 20], 0.3, 0.01, 1).unwrap();
    let a = partition(&g, EmbeddingSource::Embeddings(&f), &s, &PipelineConfig::new(2, 1)).unwrap();
    assert_eq!(a, PartitionAssignment::new(a.parts().to_vec(), 2).unwrap());
    let short = clusterpart::Matrix::zeros(5, 2);
    assert!(partition(&g, EmbeddingSource::Embeddings(&short), &s, &PipelineConfig::new(2, 1)).is_err());
}
