//! Offline candidate framework for fair 1-median and k-median consensus.
//!
//! Candidates are a closest-fair clustering per input plus a cluster fitting
//! per unordered input triple. The answer is the best candidate (or the best
//! `k`-subset of candidates) under the median objective.

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::corrclust::Fitter;
use crate::error::{check_dims, Error, Result};
use crate::fairness::{Backend, Fairness};
use crate::partition::{dist_unchecked, Clustering, InputSet, PairBits};
use crate::seed::Seed;

/// Guard on the number of `k`-tuples to evaluate.
pub const TUPLE_GUARD: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "snake_case")]
pub enum Provenance {
    Input { index: usize },
    Triple { i: usize, j: usize, k: usize },
    Faraway { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub clustering: Clustering,
    pub provenance: Provenance,
}

/// Number of candidates generated from `m` inputs.
pub fn candidate_count(m: usize) -> u64 {
    let m = m as u64;
    m + m * m.saturating_sub(1) * m.saturating_sub(2) / 6
}

/// Candidates in order: inputs, then triples in lexicographic order.
pub fn find_candidates(inputs: &InputSet, fairness: &Fairness, backend: Backend, seed: Seed) -> Result<Vec<Candidate>> {
    let ids: Vec<usize> = (0..inputs.m()).collect();
    let mut out = Vec::with_capacity(candidate_count(inputs.m()) as usize);
    visit_candidates(inputs, &ids, fairness, backend, seed, |c| {
        out.push(c);
    })?;
    Ok(out)
}

/// Streams the candidates of `inputs` to `visit`; provenance indices are
/// taken from `ids`.
pub(crate) fn visit_candidates(
    inputs: &[Clustering],
    ids: &[usize],
    fairness: &Fairness,
    backend: Backend,
    seed: Seed,
    mut visit: impl FnMut(Candidate),
) -> Result<()> {
    debug_assert_eq!(inputs.len(), ids.len());
    let mut fitter = Fitter::new(inputs, fairness, backend, seed.derive("fit"))?;
    for (i, &id) in ids.iter().enumerate() {
        visit(Candidate {
            clustering: fitter.closest(i)?,
            provenance: Provenance::Input { index: id },
        });
    }
    let m = inputs.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                visit(Candidate {
                    clustering: fitter.fit(i, j, k)?,
                    provenance: Provenance::Triple {
                        i: ids[i],
                        j: ids[j],
                        k: ids[k],
                    },
                });
            }
        }
    }
    Ok(())
}

/// Candidates with duplicates folded onto their first occurrence.
#[derive(Debug, Default, Clone)]
pub(crate) struct CandidatePool {
    pub distinct: Vec<Candidate>,
    seen: HashMap<Clustering, usize>,
    pub raw: u64,
}

impl CandidatePool {
    pub fn push(&mut self, c: Candidate) {
        self.raw += 1;
        if !self.seen.contains_key(&c.clustering) {
            self.seen.insert(c.clustering.clone(), self.distinct.len());
            self.distinct.push(c);
        }
    }

    pub fn len(&self) -> usize {
        self.distinct.len()
    }
}

/// Weighted median objective over a fixed point list.
pub(crate) struct Evaluator<'a> {
    points: &'a [Clustering],
    weights: Vec<f64>,
    bits: Option<Vec<PairBits>>,
}

const BITS_MAX_N: usize = 128;

impl<'a> Evaluator<'a> {
    pub fn new(points: &'a [Clustering], weights: Vec<f64>) -> Evaluator<'a> {
        debug_assert_eq!(points.len(), weights.len());
        let small = points.first().is_some_and(|c| c.n() <= BITS_MAX_N);
        let bits = small.then(|| points.iter().map(Clustering::pair_bits).collect());
        Evaluator { points, weights, bits }
    }

    pub fn distances(&self, center: &Clustering) -> Vec<u64> {
        match &self.bits {
            Some(bits) => {
                let cb = center.pair_bits();
                bits.iter().map(|b| b.xor_count(&cb) as u64).collect()
            }
            None => self.points.iter().map(|p| dist_unchecked(p, center)).collect(),
        }
    }

    pub fn value(&self, center: &Clustering) -> f64 {
        self.distances(center)
            .iter()
            .zip(&self.weights)
            .map(|(&d, &w)| w * d as f64)
            .sum()
    }

    /// Best `k`-subset of `candidates` (indices in lexicographic order, first
    /// minimum kept) and the number of tuples evaluated.
    pub fn best_tuple(&self, candidates: &[Clustering], k: usize) -> Result<(Vec<usize>, f64, u64)> {
        let d = candidates.len();
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if d == 0 {
            return Err(Error::Argument("no candidates".into()));
        }
        let k_eff = k.min(d);
        if k_eff == 1 {
            let mut best = (0, f64::INFINITY);
            for (i, c) in candidates.iter().enumerate() {
                let v = self.value(c);
                if v < best.1 {
                    best = (i, v);
                }
            }
            return Ok((vec![best.0], best.1, d as u64));
        }
        if (d as f64).powi(k_eff as i32) > TUPLE_GUARD {
            return Err(Error::Capability(format!(
                "{d} distinct candidates to the power k = {k_eff} exceeds the tuple guard"
            )));
        }
        let table: Vec<Vec<u64>> = candidates.iter().map(|c| self.distances(c)).collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut tuples = 0u64;
        for tuple in (0..d).combinations(k_eff) {
            tuples += 1;
            let v: f64 = self
                .weights
                .iter()
                .enumerate()
                .map(|(p, &w)| w * tuple.iter().map(|&t| table[t][p]).min().expect("k >= 1") as f64)
                .sum();
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((tuple, v));
            }
        }
        let (tuple, v) = best.expect("at least one tuple");
        Ok((tuple, v, tuples))
    }
}

/// Result of a candidate-framework run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub centers: Vec<Clustering>,
    pub provenance: Vec<Provenance>,
    /// Median objective on the evaluation set (the full input offline).
    pub objective: f64,
    pub candidates: u64,
    pub distinct_candidates: usize,
    pub tuples_evaluated: u64,
}

/// Expands the chosen distinct candidates to exactly `k` centers, repeating
/// from the front when fewer than `k` distinct candidates exist.
pub(crate) fn pad_centers(pool: &CandidatePool, chosen: &[usize], k: usize) -> (Vec<Clustering>, Vec<Provenance>) {
    let picks = chosen.iter().copied().chain((0..pool.len()).cycle()).take(k);
    picks
        .map(|i| (pool.distinct[i].clustering.clone(), pool.distinct[i].provenance))
        .unzip()
}

pub fn consensus_1median(inputs: &InputSet, fairness: &Fairness, backend: Backend, seed: Seed) -> Result<Solution> {
    consensus_kmedian(inputs, 1, fairness, backend, seed)
}

/// Best `k`-subset of the candidates under the full-input objective.
pub fn consensus_kmedian(
    inputs: &InputSet,
    k: usize,
    fairness: &Fairness,
    backend: Backend,
    seed: Seed,
) -> Result<Solution> {
    check_dims(fairness.n(), inputs.n())?;
    let total = candidate_count(inputs.m());
    if k == 0 || k as u64 > total {
        return Err(Error::Argument(format!(
            "k = {k} must be in 1..={total} (number of candidates)"
        )));
    }
    let ids: Vec<usize> = (0..inputs.m()).collect();
    let mut pool = CandidatePool::default();
    visit_candidates(inputs, &ids, fairness, backend, seed, |c| pool.push(c))?;
    log::debug!("{} candidates, {} distinct", pool.raw, pool.len());
    let eval = Evaluator::new(inputs, vec![1.0; inputs.m()]);
    let clusterings: Vec<Clustering> = pool.distinct.iter().map(|c| c.clustering.clone()).collect();
    let (chosen, objective, tuples) = eval.best_tuple(&clusterings, k)?;
    let (centers, provenance) = pad_centers(&pool, &chosen, k);
    Ok(Solution {
        centers,
        provenance,
        objective,
        candidates: pool.raw,
        distinct_candidates: pool.len(),
        tuples_evaluated: tuples,
    })
}
