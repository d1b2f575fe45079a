//! Brute-force references. Everything here enumerates; nothing prunes.

use itertools::Itertools;

use crate::corrclust::{correlation_cost, SignedGraph};
use crate::error::{check_dims, Error, Result};
use crate::fairness::Fairness;
use crate::partition::{dist_unchecked, Clustering, InputSet};

pub const ENUM_GUARD: usize = 12;
pub const CONSENSUS_GUARD: usize = 8;
pub const CORRELATION_GUARD: usize = 10;
pub const TUPLE_GUARD: f64 = 1e6;

fn guard(what: &str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Capability(format!(
            "{what} oracle is limited to n <= {limit}, got n = {n}"
        )));
    }
    Ok(())
}

/// Every set partition of `0..n`, once each, as restricted-growth strings in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct PartitionEnumerator {
    rgs: Vec<u32>,
    done: bool,
}

impl PartitionEnumerator {
    pub fn new(n: usize) -> Result<PartitionEnumerator> {
        guard("partition", n, ENUM_GUARD)?;
        Ok(PartitionEnumerator {
            rgs: vec![0; n],
            done: false,
        })
    }
}

impl Iterator for PartitionEnumerator {
    type Item = Clustering;

    fn next(&mut self) -> Option<Clustering> {
        if self.done {
            return None;
        }
        let out = Clustering::try_from(self.rgs.clone()).expect("restricted-growth strings are canonical");
        // advance: bump the rightmost position that may grow, zero the tail
        let mut prefix_max = vec![0u32; self.rgs.len()];
        for i in 1..self.rgs.len() {
            prefix_max[i] = prefix_max[i - 1].max(self.rgs[i - 1]);
        }
        match (1..self.rgs.len()).rev().find(|&i| self.rgs[i] <= prefix_max[i]) {
            Some(i) => {
                self.rgs[i] += 1;
                self.rgs[i + 1..].fill(0);
            }
            None => self.done = true,
        }
        Some(out)
    }
}

pub fn enum_partitions(n: usize) -> Result<PartitionEnumerator> {
    PartitionEnumerator::new(n)
}

pub fn enum_fair_partitions(fairness: &Fairness) -> Result<impl Iterator<Item = Clustering> + '_> {
    Ok(PartitionEnumerator::new(fairness.n())?.filter(|c| fairness.is_fair(c).expect("same n")))
}

/// Distance from `c` to the nearest fair partition.
pub fn closest_fair_distance(c: &Clustering, fairness: &Fairness) -> Result<u64> {
    check_dims(fairness.n(), c.n())?;
    enum_fair_partitions(fairness)?
        .map(|f| dist_unchecked(c, &f))
        .min()
        .ok_or_else(|| Error::Infeasible("no fair partition".into()))
}

/// Exact fair k-median: the best `k` fair partitions, first in lexicographic
/// subset order among ties.
pub fn opt_fair_consensus(inputs: &InputSet, fairness: &Fairness, k: usize) -> Result<(Vec<Clustering>, u64)> {
    check_dims(fairness.n(), inputs.n())?;
    guard("consensus", inputs.n(), CONSENSUS_GUARD)?;
    let fair: Vec<Clustering> = enum_fair_partitions(fairness)?.collect();
    if k == 0 || k > fair.len() {
        return Err(Error::Argument(format!(
            "k = {k} must be in 1..={} (number of fair partitions)",
            fair.len()
        )));
    }
    if (fair.len() as f64).powi(k as i32) > TUPLE_GUARD {
        return Err(Error::Capability(format!(
            "{} fair partitions to the power k = {k} exceeds the tuple guard",
            fair.len()
        )));
    }
    let table: Vec<Vec<u64>> = fair
        .iter()
        .map(|f| inputs.iter().map(|c| dist_unchecked(c, f)).collect())
        .collect();
    let mut best: Option<(Vec<usize>, u64)> = None;
    for tuple in (0..fair.len()).combinations(k) {
        let value: u64 = (0..inputs.m())
            .map(|i| tuple.iter().map(|&t| table[t][i]).min().expect("k >= 1"))
            .sum();
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((tuple, value));
        }
    }
    let (tuple, value) = best.expect("at least one tuple");
    Ok((tuple.into_iter().map(|t| fair[t].clone()).collect(), value))
}

pub fn opt_correlation(g: &SignedGraph) -> Result<(Clustering, u64)> {
    guard("correlation", g.n(), CORRELATION_GUARD)?;
    argmin_cost(g, PartitionEnumerator::new(g.n())?)
}

pub fn opt_fair_correlation(g: &SignedGraph, fairness: &Fairness) -> Result<(Clustering, u64)> {
    check_dims(fairness.n(), g.n())?;
    guard("correlation", g.n(), CORRELATION_GUARD)?;
    argmin_cost(g, enum_fair_partitions(fairness)?)
}

fn argmin_cost(g: &SignedGraph, parts: impl Iterator<Item = Clustering>) -> Result<(Clustering, u64)> {
    let mut best: Option<(Clustering, u64)> = None;
    for c in parts {
        let cost = correlation_cost(g, &c)?;
        if best.as_ref().is_none_or(|(_, b)| cost < *b) {
            best = Some((c, cost));
        }
    }
    best.ok_or_else(|| Error::Infeasible("no admissible partition".into()))
}

/// Super-clusters of `centers` with no representative in `sample` within
/// the faraway bound
/// `sum dist(C, C') <= 2 (1 + 1/(1-kappa)) sum dist(C, center) + rho_f OPT / k`,
/// where `OPT` is the objective of `centers`. Inputs join their nearest
/// center, lowest index on ties; empty super-clusters are skipped.
pub fn faraway_violations(
    inputs: &InputSet,
    centers: &[Clustering],
    sample: &[Clustering],
    kappa: f64,
    rho_f: f64,
) -> Result<usize> {
    let mut groups: Vec<Vec<&Clustering>> = vec![Vec::new(); centers.len()];
    let mut opt = 0u64;
    for c in inputs.iter() {
        let (i, d) = crate::partition::nearest(c, centers)?;
        groups[i].push(c);
        opt += d;
    }
    let slack = rho_f * opt as f64 / centers.len() as f64;
    let factor = 2.0 * (1.0 + 1.0 / (1.0 - kappa));
    let mut violations = 0;
    for (group, center) in groups.iter().zip(centers) {
        if group.is_empty() {
            continue;
        }
        let to_center: u64 = group.iter().map(|c| dist_unchecked(c, center)).sum();
        let bound = factor * to_center as f64 + slack;
        let met = sample
            .iter()
            .any(|s| group.iter().map(|c| dist_unchecked(c, s)).sum::<u64>() as f64 <= bound);
        if !met {
            violations += 1;
        }
    }
    Ok(violations)
}
