//! Per-class vertex balancing by degree-aware migration.
//!
//! Each class (train, val, rest) gets a uniform integer capacity per
//! partition. Overloaded partitions shed their lowest-degree candidates; every
//! shed vertex lands in an underloaded partition chosen with probability
//! proportional to its remaining free capacity.

use rand::Rng;

use crate::assignment::PartitionAssignment;
use crate::error::{Error, Result};
use crate::seed;
use crate::split::{NodeSplit, VertexClass};

/// Imbalance factors per vertex class, each strictly greater than 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceConfig {
    pub beta_train: f64,
    pub beta_val: f64,
    pub beta_rest: f64,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        Self::uniform(1.05)
    }
}

impl BalanceConfig {
    pub fn uniform(beta: f64) -> Self {
        Self {
            beta_train: beta,
            beta_val: beta,
            beta_rest: beta,
        }
    }

    pub fn beta(&self, class: VertexClass) -> f64 {
        match class {
            VertexClass::Train => self.beta_train,
            VertexClass::Val => self.beta_val,
            VertexClass::Rest => self.beta_rest,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for class in VertexClass::ALL {
            let b = self.beta(class);
            if !(b > 1.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "beta_{class} must be a finite value > 1, got {b}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-partition counts and capacities of one candidate class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassLoads {
    pub loads: Vec<usize>,
    pub capacities: Vec<usize>,
}

impl ClassLoads {
    pub fn compute(assignment: &PartitionAssignment, candidates: &[usize], capacities: &[usize]) -> Self {
        let mut loads = vec![0; assignment.k()];
        for &v in candidates {
            loads[assignment.part_of(v)] += 1;
        }
        Self {
            loads,
            capacities: capacities.to_vec(),
        }
    }

    pub fn is_overloaded(&self) -> bool {
        self.loads.iter().zip(&self.capacities).any(|(l, c)| l > c)
    }
}

/// Uniform per-partition capacity `floor(beta · class_size / k)`, raised to
/// `ceil(class_size / k)` when that would not fit the whole class.
pub fn capacity(class_size: usize, k: usize, beta: f64) -> usize {
    assert!(k >= 1, "k must be at least 1");
    let c = (beta * class_size as f64 / k as f64).floor() as usize;
    if c.saturating_mul(k) < class_size {
        class_size.div_ceil(k)
    } else {
        c
    }
}

/// One migration pass over `candidates`.
///
/// Each overloaded partition `i` moves exactly `L_i - C_i` of its candidates,
/// smallest degree first with ties by lower vertex id. Destinations are drawn
/// from partitions with `L_u < C_u` with probability `f_u / Σ f`, where the
/// free capacities `f` are refreshed after every placement.
pub fn migrate(
    assignment: &PartitionAssignment,
    candidates: &[usize],
    capacities: &[usize],
    degrees: &[usize],
    seed: u64,
) -> Result<PartitionAssignment> {
    let mut out = assignment.clone();
    migrate_in_place(&mut out, candidates, capacities, degrees, &mut seed::rng(seed))?;
    Ok(out)
}

fn migrate_in_place(
    assignment: &mut PartitionAssignment,
    candidates: &[usize],
    capacities: &[usize],
    degrees: &[usize],
    rng: &mut impl Rng,
) -> Result<()> {
    let k = assignment.k();
    if capacities.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} capacities for k={k}",
            capacities.len()
        )));
    }
    if degrees.len() != assignment.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} degrees for {} vertices",
            degrees.len(),
            assignment.len()
        )));
    }
    let total: usize = capacities.iter().sum();
    if total < candidates.len() {
        return Err(Error::Infeasible {
            capacity: total,
            candidates: candidates.len(),
        });
    }

    let ClassLoads { mut loads, .. } = ClassLoads::compute(assignment, candidates, capacities);
    let overloaded: Vec<usize> = (0..k).filter(|&i| loads[i] > capacities[i]).collect();
    if overloaded.is_empty() {
        return Ok(());
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &v in candidates {
        let p = assignment.part_of(v);
        if loads[p] > capacities[p] {
            members[p].push(v);
        }
    }

    for i in overloaded {
        let excess = loads[i] - capacities[i];
        let group = &mut members[i];
        group.sort_unstable_by_key(|&v| (degrees[v], v));
        for &v in &group[..excess] {
            let dest = sample_destination(&loads, capacities, rng);
            assignment.set(v, dest);
            loads[i] -= 1;
            loads[dest] += 1;
        }
    }
    Ok(())
}

fn sample_destination(loads: &[usize], capacities: &[usize], rng: &mut impl Rng) -> usize {
    let free = |u: usize| capacities[u].saturating_sub(loads[u]);
    let total: usize = (0..loads.len()).map(free).sum();
    debug_assert!(total > 0, "feasibility guarantees free capacity");
    let mut r = rng.random_range(0..total as u64) as usize;
    for u in 0..loads.len() {
        let f = free(u);
        if r < f {
            return u;
        }
        r -= f;
    }
    unreachable!("sampled index beyond total free capacity")
}

/// Enforces the train, val and rest constraints in that order.
///
/// Classes are disjoint, so later passes never disturb earlier ones.
pub fn balance_all(
    assignment: &PartitionAssignment,
    split: &NodeSplit,
    config: &BalanceConfig,
    degrees: &[usize],
    seed: u64,
) -> Result<PartitionAssignment> {
    config.validate()?;
    if split.len() != assignment.len() {
        return Err(Error::DimensionMismatch(format!(
            "split covers {} vertices, assignment {}",
            split.len(),
            assignment.len()
        )));
    }
    let k = assignment.k();
    let mut out = assignment.clone();
    for class in VertexClass::ALL {
        let candidates = split.vertices_of(class);
        let caps = vec![capacity(candidates.len(), k, config.beta(class)); k];
        let mut rng = seed::rng(seed::derive(seed, class.as_str()));
        while ClassLoads::compute(&out, &candidates, &caps).is_overloaded() {
            migrate_in_place(&mut out, &candidates, &caps, degrees, &mut rng)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(100, 4, 1.05), 26);
        assert_eq!(capacity(0, 4, 1.05), 0);
        assert_eq!(capacity(10, 3, 1.01), 4);
        assert_eq!(capacity(10, 1, 1.05), 10);
    }

    #[test]
    fn sole_underloaded_target() {
        // Partition 0 holds 0..6 with degrees 5,1,4,2,6,3; the two smallest are 1 and 3.
        let a = PartitionAssignment::new(vec![0, 0, 0, 0, 0, 0, 1, 1], 2).unwrap();
        let degrees = [5, 1, 4, 2, 6, 3, 1, 1];
        let cand: Vec<usize> = (0..8).collect();
        let out = migrate(&a, &cand, &[4, 4], &degrees, 0).unwrap();
        assert_eq!(out.parts(), &[0, 1, 0, 1, 0, 0, 1, 1]);
        assert_eq!(out.sizes(), vec![4, 4]);
    }

    #[test]
    fn no_overload_no_change() {
        let a = PartitionAssignment::new(vec![0, 0, 0, 1, 1, 1], 2).unwrap();
        let cand: Vec<usize> = (0..6).collect();
        assert_eq!(migrate(&a, &cand, &[4, 4], &[1; 6], 3).unwrap(), a);
    }

    #[test]
    fn splits_across_two_targets() {
        let a = PartitionAssignment::new(vec![0; 8], 3).unwrap();
        let cand: Vec<usize> = (0..8).collect();
        for seed in 0..20 {
            let out = migrate(&a, &cand, &[4, 4, 4], &[2; 8], seed).unwrap();
            let sizes = out.sizes();
            assert_eq!(sizes[0], 4);
            assert!(sizes.iter().all(|&s| s <= 4));
            // Equal degrees: the lowest ids leave.
            assert!((4..8).all(|v| out.part_of(v) == 0));
        }
    }

    #[test]
    fn non_candidates_untouched() {
        let a = PartitionAssignment::new(vec![0, 0, 0, 0, 1], 2).unwrap();
        let out = migrate(&a, &[0, 1, 2], &[2, 2], &[1; 5], 0).unwrap();
        assert_eq!(out.part_of(3), 0);
        assert_eq!(out.part_of(4), 1);
    }

    #[test]
    fn infeasible_capacities() {
        let a = PartitionAssignment::new(vec![0; 5], 2).unwrap();
        let cand: Vec<usize> = (0..5).collect();
        assert!(matches!(
            migrate(&a, &cand, &[2, 2], &[1; 5], 0),
            Err(Error::Infeasible { capacity: 4, candidates: 5 })
        ));
    }

    #[test]
    fn balance_all_rest_only() {
        let a = PartitionAssignment::new(vec![0; 10], 2).unwrap();
        let split = NodeSplit::all_rest(10);
        let out = balance_all(&a, &split, &BalanceConfig::default(), &[1; 10], 1).unwrap();
        assert_eq!(out.sizes(), vec![5, 5]);
    }

    #[test]
    fn balance_all_keeps_balanced_input() {
        let a = PartitionAssignment::new(vec![0, 1, 0, 1], 2).unwrap();
        let split = NodeSplit::new(vec![
            VertexClass::Train,
            VertexClass::Train,
            VertexClass::Rest,
            VertexClass::Rest,
        ]);
        assert_eq!(
            balance_all(&a, &split, &BalanceConfig::default(), &[1; 4], 0).unwrap(),
            a
        );
    }

    #[test]
    fn balance_all_class_isolation() {
        // Train: 0..4 balanced 2/2. Rest: 4..10 all in partition 0.
        let mut parts = vec![0, 1, 0, 1];
        parts.extend([0; 6]);
        let a = PartitionAssignment::new(parts, 2).unwrap();
        let mut classes = vec![VertexClass::Train; 4];
        classes.extend([VertexClass::Rest; 6]);
        let split = NodeSplit::new(classes);
        let out = balance_all(&a, &split, &BalanceConfig::default(), &[1; 10], 5).unwrap();
        assert_eq!(&out.parts()[..4], &a.parts()[..4]);
        let rest: Vec<usize> = out.parts()[4..].to_vec();
        assert_eq!(rest.iter().filter(|&&p| p == 0).count(), 3);
    }

    #[test]
    fn rejects_beta_at_most_one() {
        let a = PartitionAssignment::new(vec![0], 1).unwrap();
        let cfg = BalanceConfig::uniform(1.0);
        assert!(balance_all(&a, &NodeSplit::all_rest(1), &cfg, &[0], 0).is_err());
    }
}
