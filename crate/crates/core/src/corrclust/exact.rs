//! Branch-and-bound over restricted-growth strings.

use crate::error::{check_dims, Error, Result};
use crate::fairness::{Fairness, EXACT_GUARD};
use crate::partition::Clustering;

use super::SignedGraph;

/// Minimum-cost partition of `g`, optionally restricted to fair partitions.
///
/// Vertices are placed in index order and blocks tried in label order, so
/// among optimal partitions the one with the lexicographically smallest
/// canonical label array is returned.
pub fn exact_min_partition(g: &SignedGraph, fairness: Option<&Fairness>) -> Result<(Clustering, u64)> {
    let n = g.n();
    if n > EXACT_GUARD {
        return Err(Error::Capability(format!(
            "exact correlation clustering is limited to n <= {EXACT_GUARD}, got n = {n}"
        )));
    }
    if let Some(f) = fairness {
        check_dims(f.n(), n)?;
    }
    let adj: Vec<u64> = (0..n).map(|v| g.row(v)[0]).collect();
    let (color, ratio, remaining) = match fairness {
        Some(f) => (
            f.colors().colors().iter().map(|&c| c as usize).collect(),
            f.constraint().ratio().iter().map(|&r| r as usize).collect(),
            f.colors().counts().to_vec(),
        ),
        None => (vec![0; n], Vec::new(), Vec::new()),
    };
    let mut s = Search {
        n,
        adj,
        color,
        ratio,
        remaining,
        blocks: Vec::new(),
        counts: Vec::new(),
        labels: vec![0; n],
        cost: 0,
        best_cost: u64::MAX,
        best: None,
    };
    s.descend(0);
    let best = s
        .best
        .ok_or_else(|| Error::Infeasible("no fair partition exists".into()))?;
    Ok((Clustering::from_u32(&best), s.best_cost))
}

struct Search {
    n: usize,
    adj: Vec<u64>,
    color: Vec<usize>,
    // empty when unconstrained
    ratio: Vec<usize>,
    remaining: Vec<usize>,
    blocks: Vec<u64>,
    counts: Vec<Vec<usize>>,
    labels: Vec<u32>,
    cost: u64,
    best_cost: u64,
    best: Option<Vec<u32>>,
}

impl Search {
    fn descend(&mut self, v: usize) {
        if v == self.n {
            if self.cost < self.best_cost {
                self.best_cost = self.cost;
                self.best = Some(self.labels.clone());
            }
            return;
        }
        let earlier = (1u64 << v) - 1;
        let plus_before = (self.adj[v] & earlier).count_ones() as u64;
        let col = self.color[v];
        for b in 0..=self.blocks.len() {
            let step = match self.blocks.get(b) {
                Some(&mask) => plus_before + mask.count_ones() as u64 - 2 * (self.adj[v] & mask).count_ones() as u64,
                None => plus_before,
            };
            if self.cost + step >= self.best_cost {
                continue;
            }
            if b == self.blocks.len() {
                self.blocks.push(0);
                self.counts.push(vec![0; self.ratio.len()]);
            }
            self.blocks[b] |= 1 << v;
            self.labels[v] = b as u32;
            self.cost += step;
            if !self.ratio.is_empty() {
                self.counts[b][col] += 1;
                self.remaining[col] -= 1;
            }
            if self.completable() {
                self.descend(v + 1);
            }
            if !self.ratio.is_empty() {
                self.counts[b][col] -= 1;
                self.remaining[col] += 1;
            }
            self.cost -= step;
            self.blocks[b] &= !(1 << v);
            if self.blocks[b] == 0 {
                self.blocks.pop();
                self.counts.pop();
            }
        }
    }

    /// Whether the unplaced points can still top every block up to a fair
    /// multiple of the ratio.
    fn completable(&self) -> bool {
        if self.ratio.is_empty() {
            return true;
        }
        let mut need = vec![0usize; self.ratio.len()];
        for counts in &self.counts {
            let a = counts
                .iter()
                .zip(&self.ratio)
                .map(|(&x, &r)| x.div_ceil(r))
                .max()
                .unwrap_or(0)
                .max(1);
            for (c, (&x, &r)) in counts.iter().zip(&self.ratio).enumerate() {
                need[c] += a * r - x;
            }
        }
        need.iter().zip(&self.remaining).all(|(x, r)| x <= r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrclust::correlation_cost;
    use crate::fairness::{ColorTable, FairnessConstraint};
    use crate::oracle;
    use crate::seed::Seed;

    #[test]
    fn unconstrained_matches_enumeration() {
        for s in 0..40u64 {
            let n = 1 + (s % 8) as usize;
            let g = SignedGraph::random(n, 0.45, &mut Seed(s).rng());
            let (c, cost) = exact_min_partition(&g, None).unwrap();
            assert_eq!(correlation_cost(&g, &c).unwrap(), cost);
            assert_eq!(oracle::opt_correlation(&g).unwrap(), (c, cost));
        }
    }

    #[test]
    fn fair_matches_enumeration() {
        for s in 0..40u64 {
            let n = 2 + 2 * (s % 4) as usize;
            let f = Fairness::global_ratio(ColorTable::new((0..n as u32).map(|v| (v * 7 + s as u32) % 2).collect()));
            let Ok(f) = f else { continue };
            let g = SignedGraph::random(n, 0.5, &mut Seed(s).rng());
            let got = exact_min_partition(&g, Some(&f)).unwrap();
            assert!(f.is_fair(&got.0).unwrap());
            assert_eq!(oracle::opt_fair_correlation(&g, &f).unwrap(), got);
        }
    }

    #[test]
    fn three_colors() {
        let colors = ColorTable::new(vec![0, 1, 2, 2, 1, 0, 2, 2]);
        let f = Fairness::new(colors, FairnessConstraint::new(vec![1, 1, 2]).unwrap()).unwrap();
        let g = SignedGraph::random(8, 0.5, &mut Seed(9).rng());
        let got = exact_min_partition(&g, Some(&f)).unwrap();
        assert_eq!(oracle::opt_fair_correlation(&g, &f).unwrap(), got);
    }

    #[test]
    fn guard() {
        let g = SignedGraph::all_minus(EXACT_GUARD + 1);
        assert!(matches!(exact_min_partition(&g, None), Err(Error::Capability(_))));
    }
}
