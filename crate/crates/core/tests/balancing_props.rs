use clusterpart::balancing::{balance_all, capacity, migrate, BalanceConfig};
use clusterpart::metrics::vertex_balance;
use clusterpart::{NodeSplit, PartitionAssignment, VertexClass};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    k: usize,
    parts: Vec<usize>,
    classes: Vec<VertexClass>,
    degrees: Vec<usize>,
    beta: f64,
    seed: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=8, 1usize..=300).prop_flat_map(|(k, n)| {
        (
            // Skewed toward low partition ids so overloads are common.
            prop::collection::vec((0..k, 0..k).prop_map(|(a, b)| a.min(b)), n),
            prop::collection::vec(0u8..3, n),
            prop::collection::vec(0usize..6, n),
            1.01f64..1.5,
            any::<u64>(),
        )
            .prop_map(move |(parts, cls, degrees, beta, seed)| Case {
                k,
                parts,
                classes: cls.into_iter().map(|c| VertexClass::ALL[c as usize]).collect(),
                degrees,
                beta,
                seed,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn balance_all_postconditions(c in case()) {
        let a = PartitionAssignment::new(c.parts.clone(), c.k).unwrap();
        let split = NodeSplit::new(c.classes.clone());
        let cfg = BalanceConfig::uniform(c.beta);
        let out = balance_all(&a, &split, &cfg, &c.degrees, c.seed).unwrap();
        prop_assert_eq!(&out, &balance_all(&a, &split, &cfg, &c.degrees, c.seed).unwrap());

        for class in VertexClass::ALL {
            let members = split.vertices_of(class);
            if members.is_empty() {
                continue;
            }
            let cap = capacity(members.len(), c.k, c.beta);
            let mut before = vec![0usize; c.k];
            let mut after = vec![0usize; c.k];
            for &v in &members {
                before[a.part_of(v)] += 1;
                after[out.part_of(v)] += 1;
            }
            prop_assert!(after.iter().all(|&l| l <= cap));

            // Per-class max/mean, bounded by the integer-capacity repair.
            let mean = members.len() as f64 / c.k as f64;
            let bound = c.beta.max(cap as f64 / mean);
            let b = vertex_balance(&out, Some((&split, class))).unwrap().value;
            prop_assert!(b <= bound + 1e-12, "balance {} > {}", b, bound);

            let moved: Vec<usize> = members.iter().copied().filter(|&v| a.part_of(v) != out.part_of(v)).collect();
            let minimum: usize = before.iter().map(|&l| l.saturating_sub(cap)).sum();
            prop_assert_eq!(moved.len(), minimum);
            for &v in &moved {
                prop_assert!(before[a.part_of(v)] > cap, "moved out of a non-overloaded partition");
                prop_assert!(before[out.part_of(v)] < cap, "moved into a non-underloaded partition");
                for &w in &members {
                    if a.part_of(w) == a.part_of(v) && a.part_of(w) == out.part_of(w) {
                        prop_assert!((c.degrees[v], v) < (c.degrees[w], w));
                    }
                }
            }
        }
    }

    #[test]
    fn migrate_leaves_non_candidates(c in case()) {
        let a = PartitionAssignment::new(c.parts.clone(), c.k).unwrap();
        let candidates: Vec<usize> = (0..c.parts.len()).filter(|v| v % 2 == 0).collect();
        let cap = capacity(candidates.len(), c.k, c.beta);
        let out = migrate(&a, &candidates, &vec![cap; c.k], &c.degrees, c.seed).unwrap();
        for v in (0..c.parts.len()).filter(|v| v % 2 == 1) {
            prop_assert_eq!(out.part_of(v), a.part_of(v));
        }
    }
}

#[test]
fn skewed_three_way_split_uses_both_targets() {
    // Loads [8, 0, 0] with capacity 4: across seeds both empty partitions receive vertices.
    let a = PartitionAssignment::new(vec![0; 8], 3).unwrap();
    let cand: Vec<usize> = (0..8).collect();
    let mut seen = [false; 3];
    for seed in 0..50 {
        let out = migrate(&a, &cand, &[4, 4, 4], &[1; 8], seed).unwrap();
        let sizes = out.sizes();
        assert_eq!(sizes[0], 4);
        assert!(sizes[1] <= 4 && sizes[2] <= 4);
        for (p, &s) in sizes.iter().enumerate() {
            seen[p] |= s > 0;
        }
    }
    assert_eq!(seen, [true; 3]);
}
