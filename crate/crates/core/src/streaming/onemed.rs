use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consensus::{visit_candidates, CandidatePool, Evaluator, Provenance};
use crate::error::{Error, Result};
use crate::fairness::Backend;
use crate::partition::Clustering;
use crate::seed::Seed;

use super::{log2m, reconstruct, sample_indices, Consistency, StreamHeader, StreamTriple};

/// Triples of a fixed set of clustering indices chosen before the stream.
#[derive(Debug, Clone, Default)]
pub struct SampledStore {
    watched: BTreeMap<usize, Vec<StreamTriple>>,
    stored: usize,
    triples: u64,
}

impl SampledStore {
    pub fn new(indices: &[usize]) -> SampledStore {
        SampledStore {
            watched: indices.iter().map(|&j| (j, Vec::new())).collect(),
            stored: 0,
            triples: 0,
        }
    }

    pub fn observe(&mut self, t: &StreamTriple) {
        if let Some(list) = self.watched.get_mut(&(t.j as usize)) {
            if list.is_empty() {
                self.stored += 1;
            }
            list.push(*t);
            self.triples += 1;
        }
    }

    /// Clusterings with at least one stored triple.
    pub fn stored_clusterings(&self) -> usize {
        self.stored
    }

    pub fn stored_triples(&self) -> u64 {
        self.triples
    }

    pub fn indices(&self) -> Vec<usize> {
        self.watched.keys().copied().collect()
    }

    /// Reconstructed clusterings in index order.
    pub fn reconstruct(&self, n: usize, consistency: Consistency) -> Result<Vec<Clustering>> {
        self.watched
            .values()
            .map(|triples| reconstruct(n, triples, consistency))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneMedParams {
    /// Size of the candidate sample; derived from `g` when absent.
    pub sample1_count: Option<usize>,
    /// Sample-size multiplier: `ceil(4 g log2 m)` indices. Absent means
    /// `g = 1`.
    pub g: Option<f64>,
    /// Evaluation accuracy; the evaluation sample has
    /// `ceil(64 log2 m / epsilon^2)` indices.
    pub epsilon: f64,
    pub consistency: Consistency,
}

impl Default for OneMedParams {
    fn default() -> Self {
        OneMedParams {
            sample1_count: None,
            g: None,
            epsilon: 0.2,
            consistency: Consistency::Warn,
        }
    }
}

impl OneMedParams {
    /// Watch every index in both stores.
    pub fn exhaustive(m: usize) -> OneMedParams {
        OneMedParams {
            sample1_count: Some(m),
            epsilon: 1e-3,
            ..OneMedParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Argument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if let Some(g) = self.g {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Argument(format!("g must be positive, got {g}")));
            }
        }
        Ok(())
    }

    pub fn sample1_for(&self, m: usize) -> usize {
        let count = self
            .sample1_count
            .unwrap_or_else(|| (4.0 * self.g.unwrap_or(1.0) * log2m(m)).ceil() as usize);
        count.max(1)
    }

    pub fn sample2_for(&self, m: usize) -> usize {
        ((64.0 * log2m(m) / (self.epsilon * self.epsilon)).ceil() as usize).clamp(1, m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneMedReport {
    pub sample1_count: usize,
    pub sample2_count: usize,
    pub triples_seen: u64,
    pub triples_stored: u64,
    pub peak_store1: usize,
    pub peak_store2: usize,
    pub peak_stored_clusterings: usize,
    pub candidates: u64,
    pub distinct_candidates: usize,
    /// Sum of distances over the evaluation sample.
    pub evaluation_value: f64,
    /// `evaluation_value` scaled to `m` inputs.
    pub objective_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneMedSolution {
    pub center: Clustering,
    pub provenance: Provenance,
    /// Every distinct candidate considered, in generation order.
    pub candidates: Vec<Clustering>,
    pub report: OneMedReport,
}

/// Single-pass fair 1-median over a pair-relation stream.
///
/// Two index samples are fixed before the stream: candidates are built from
/// the first, the winner is chosen by its objective on the second.
pub fn st_1med<I>(
    header: &StreamHeader,
    triples: I,
    params: &OneMedParams,
    backend: Backend,
    seed: Seed,
) -> Result<OneMedSolution>
where
    I: IntoIterator<Item = Result<StreamTriple>>,
{
    params.validate()?;
    let m = header.m;
    let s1 = params.sample1_for(m).min(m);
    let s2 = params.sample2_for(m);
    let idx1 = sample_indices(m, s1, &mut seed.derive("store1").rng());
    let idx2 = sample_indices(m, s2, &mut seed.derive("store2").rng());
    let mut store1 = SampledStore::new(&idx1);
    let mut store2 = SampledStore::new(&idx2);
    let mut check = header.checker();
    let mut seen = 0u64;
    for t in triples {
        let t = t?;
        check.check(&t)?;
        seen += 1;
        store1.observe(&t);
        store2.observe(&t);
    }

    let sampled = store1.reconstruct(header.n, params.consistency)?;
    let mut pool = CandidatePool::default();
    visit_candidates(&sampled, &idx1, &header.fairness, backend, seed, |c| pool.push(c))?;
    let evaluation = store2.reconstruct(header.n, params.consistency)?;
    let eval = Evaluator::new(&evaluation, vec![1.0; evaluation.len()]);
    let candidates: Vec<Clustering> = pool.distinct.iter().map(|c| c.clustering.clone()).collect();
    let (best, value, _) = eval.best_tuple(&candidates, 1)?;
    let winner = &pool.distinct[best[0]];

    let report = OneMedReport {
        sample1_count: s1,
        sample2_count: s2,
        triples_seen: seen,
        triples_stored: store1.stored_triples() + store2.stored_triples(),
        peak_store1: store1.stored_clusterings(),
        peak_store2: store2.stored_clusterings(),
        peak_stored_clusterings: store1.stored_clusterings() + store2.stored_clusterings(),
        candidates: pool.raw,
        distinct_candidates: pool.len(),
        evaluation_value: value,
        objective_estimate: value * m as f64 / evaluation.len() as f64,
    };
    Ok(OneMedSolution {
        center: winner.clustering.clone(),
        provenance: winner.provenance,
        candidates,
        report,
    })
}
