use std::collections::HashMap;

use crate::error::{check_dims, Result};
use crate::fairness::{closest_fair, Backend, Fairness, EXACT_GUARD};
use crate::partition::Clustering;
use crate::seed::Seed;

use super::{best_pivot, exact_min_partition, SignedGraph};

pub const PIVOT_RESTARTS: usize = 32;

const CACHE_CAP: usize = 1 << 16;

/// Exact when `n <= EXACT_GUARD`, otherwise the best of [`PIVOT_RESTARTS`]
/// pivot runs.
///
/// The pivot stream is keyed by the graph content, so equal graphs always
/// get equal answers under the same seed.
pub fn correlation_clustering(g: &SignedGraph, seed: Seed) -> (Clustering, u64) {
    if g.n() <= EXACT_GUARD {
        return exact_min_partition(g, None).expect("within guard");
    }
    let mut rng = seed.derive("pivot").at(g.fingerprint()).rng();
    best_pivot(g, PIVOT_RESTARTS, &mut rng)
}

/// Correlation clustering followed by a closest-fair step.
pub fn fair_correlation(g: &SignedGraph, fairness: &Fairness, backend: Backend, seed: Seed) -> Result<Clustering> {
    check_dims(fairness.n(), g.n())?;
    let (c, _) = correlation_clustering(g, seed);
    Ok(closest_fair(&c, fairness, backend)?.0)
}

/// Fair correlation clustering of the majority graph of three clusterings.
pub fn cluster_fitting(t: &[Clustering], fairness: &Fairness, backend: Backend, seed: Seed) -> Result<Clustering> {
    let g = super::majority_graph(t)?;
    fair_correlation(&g, fairness, backend, seed)
}

/// Batch candidate builder over a fixed input list.
///
/// Precomputes the co-membership graph of every input and memoizes fitting
/// results by majority graph (bounded). Outputs equal [`cluster_fitting`]
/// and [`closest_fair`] on the same arguments.
pub struct Fitter<'a> {
    inputs: &'a [Clustering],
    graphs: Vec<SignedGraph>,
    fairness: &'a Fairness,
    backend: Backend,
    seed: Seed,
    cache: HashMap<SignedGraph, Clustering>,
    hits: u64,
}

impl<'a> Fitter<'a> {
    pub fn new(inputs: &'a [Clustering], fairness: &'a Fairness, backend: Backend, seed: Seed) -> Result<Fitter<'a>> {
        for c in inputs {
            check_dims(fairness.n(), c.n())?;
        }
        Ok(Fitter {
            inputs,
            graphs: inputs.iter().map(SignedGraph::consistent).collect(),
            fairness,
            backend,
            seed,
            cache: HashMap::new(),
            hits: 0,
        })
    }

    pub fn closest(&self, i: usize) -> Result<Clustering> {
        Ok(closest_fair(&self.inputs[i], self.fairness, self.backend)?.0)
    }

    pub fn fit(&mut self, i: usize, j: usize, k: usize) -> Result<Clustering> {
        let g = SignedGraph::majority_of(&self.graphs[i], &self.graphs[j], &self.graphs[k]);
        if let Some(c) = self.cache.get(&g) {
            self.hits += 1;
            return Ok(c.clone());
        }
        let c = fair_correlation(&g, self.fairness, self.backend, self.seed)?;
        if self.cache.len() < CACHE_CAP {
            self.cache.insert(g, c.clone());
        }
        Ok(c)
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits
    }
}
