//! Single-pass fair k-median over contiguous pair-relation streams.
//!
//! Each arriving clustering feeds three samplers: a threshold grid, a
//! faraway sampler and a merge-and-reduce coreset. After the stream, the
//! candidates are the closest-fair versions of everything the first two
//! kept plus cluster fittings of grid triples, and the best `k`-subset is
//! chosen on the coreset.

mod coreset;
mod faraway;
mod grid;

pub use coreset::{coreset_cap, Coreset, WeightedMember};
pub use faraway::{default_net_cap, FarawaySampler, NET_CAP_MAX};
pub use grid::{keep_rates, radii, GridCap, GridCell, GridSampler};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consensus::{pad_centers, Candidate, CandidatePool, Evaluator, Provenance};
use crate::corrclust::Fitter;
use crate::error::{Error, Result};
use crate::fairness::Backend;
use crate::params::KMedianParams;
use crate::partition::Clustering;
use crate::seed::Seed;
use crate::streaming::{reconstruct, Consistency, StreamHeader, StreamMode, StreamTriple};

/// Clusterings keyed by stream index, shared by several holders.
#[derive(Debug, Clone, Default)]
pub(crate) struct Store {
    items: BTreeMap<usize, (Clustering, usize)>,
    peak: usize,
}

impl Store {
    pub fn retain(&mut self, index: usize, c: &Clustering) {
        self.items.entry(index).or_insert_with(|| (c.clone(), 0)).1 += 1;
        self.peak = self.peak.max(self.items.len());
    }

    pub fn release(&mut self, index: usize) {
        let entry = self.items.get_mut(&index).expect("released index is held");
        entry.1 -= 1;
        if entry.1 == 0 {
            self.items.remove(&index);
        }
    }

    pub fn get(&self, index: usize) -> &Clustering {
        &self.items[&index].0
    }

    pub fn lookup(&self, index: usize) -> Option<&Clustering> {
        self.items.get(&index).map(|e| &e.0)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.items.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KStreamParams {
    /// Grid separation factor.
    pub delta: f64,
    /// Grid rate.
    pub lambda: f64,
    pub kappa: f64,
    /// Additive slack of the faraway sampler.
    pub rho_f: f64,
    /// Coreset accuracy.
    pub epsilon: f64,
    /// Reported only.
    pub epsilon1: f64,
    pub grid_cap: GridCap,
    pub net_cap: Option<usize>,
    pub reservoir_cap: Option<usize>,
    pub coreset_cap: Option<usize>,
    pub consistency: Consistency,
}

impl Default for KStreamParams {
    fn default() -> Self {
        KStreamParams {
            delta: 0.05,
            lambda: 0.1,
            kappa: 1.0 / 3.0,
            rho_f: 0.5,
            epsilon: 0.25,
            epsilon1: 0.25,
            grid_cap: GridCap::Default,
            net_cap: None,
            reservoir_cap: None,
            coreset_cap: None,
            consistency: Consistency::Warn,
        }
    }
}

impl KStreamParams {
    /// Every sampler keeps every arrival and the coreset never reduces.
    pub fn exhaustive(m: usize) -> KStreamParams {
        KStreamParams {
            delta: 0.0,
            grid_cap: GridCap::Unbounded,
            reservoir_cap: Some(m),
            coreset_cap: Some(m.max(1)),
            ..KStreamParams::default()
        }
    }

    /// Constants of the worst-case analysis for approximation factor `gamma`.
    pub fn analysis_constants(gamma: f64) -> KStreamParams {
        let reference = KMedianParams::reference(gamma);
        KStreamParams {
            delta: reference.delta,
            epsilon: reference.epsilon,
            epsilon1: reference.epsilon1,
            ..KStreamParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Argument(format!("{what} out of range: {v}")));
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta", self.delta);
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda", self.lambda);
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa", self.kappa);
        }
        if !(self.rho_f > 0.0 && self.rho_f.is_finite()) {
            return bad("rho_f", self.rho_f);
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", self.epsilon);
        }
        if !(self.epsilon1 > 0.0 && self.epsilon1.is_finite()) {
            return bad("epsilon1", self.epsilon1);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KStreamReport {
    pub k: usize,
    pub triples_seen: u64,
    pub clusterings_seen: usize,
    /// Distinct indices held by the grid at the end of the stream.
    pub grid_sampled: usize,
    pub faraway_sampled: usize,
    pub coreset_size: usize,
    pub candidates: u64,
    pub distinct_candidates: usize,
    pub tuples_evaluated: u64,
    pub grid_cells: usize,
    pub grid_live_cells: usize,
    /// Per-cell member limit; absent when unbounded.
    pub grid_cap: Option<usize>,
    pub faraway_cap: usize,
    pub coreset_cap: usize,
    pub coreset_budget: usize,
    pub coreset_reductions: u64,
    pub peak_grid: usize,
    pub peak_faraway: usize,
    pub peak_coreset: usize,
    /// Largest total held by the three samplers after any arrival.
    pub peak_stored_clusterings: usize,
    /// `grid cap x grid cells + faraway cap + coreset budget`.
    pub space_budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KStreamSolution {
    pub centers: Vec<Clustering>,
    pub provenance: Vec<Provenance>,
    /// Weighted objective on the coreset.
    pub objective_estimate: f64,
    pub coreset: Vec<WeightedMember>,
    pub report: KStreamReport,
}

/// Single-pass fair k-median over a contiguous stream.
pub fn stream_kmedian<I>(
    header: &StreamHeader,
    triples: I,
    k: usize,
    params: &KStreamParams,
    backend: Backend,
    seed: Seed,
) -> Result<KStreamSolution>
where
    I: IntoIterator<Item = Result<StreamTriple>>,
{
    if header.mode != StreamMode::Contiguous {
        return Err(Error::Capability(
            "streaming k-median needs each clustering as one contiguous block".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    params.validate()?;
    let (n, m) = (header.n, header.m);
    let mut grid = GridSampler::new(
        n,
        m,
        k,
        params.delta,
        params.lambda,
        params.grid_cap,
        seed.derive("grid"),
    )?;
    let net_cap = params
        .net_cap
        .unwrap_or_else(|| default_net_cap(k, params.kappa, params.rho_f));
    let reservoir_cap = params.reservoir_cap.unwrap_or(net_cap);
    let mut faraway = FarawaySampler::new(n, net_cap, reservoir_cap, seed.derive("faraway"))?;
    let cap = match params.coreset_cap {
        Some(c) => c,
        None => coreset_cap(m, k, params.epsilon)?,
    };
    let mut coreset = Coreset::new(cap, k, seed.derive("coreset"))?;

    let mut check = header.checker();
    let mut block: Vec<StreamTriple> = Vec::new();
    let mut triples_seen = 0u64;
    let mut clusterings_seen = 0usize;
    let mut peak = 0usize;
    let mut arrive = |block: &mut Vec<StreamTriple>| -> Result<()> {
        let Some(j) = block.first().map(|t| t.j as usize) else {
            return Ok(());
        };
        let c = reconstruct(n, block.iter(), params.consistency)?;
        block.clear();
        grid.update(j, &c);
        faraway.update(j, &c);
        coreset.update(j, &c);
        clusterings_seen += 1;
        peak = peak.max(grid.stored() + faraway.stored() + coreset.stored());
        Ok(())
    };
    for t in triples {
        let t = t?;
        check.check(&t)?;
        triples_seen += 1;
        if block.first().is_some_and(|b| b.j != t.j) {
            arrive(&mut block)?;
        }
        block.push(t);
    }
    arrive(&mut block)?;
    if clusterings_seen == 0 {
        return Err(Error::Malformed("stream contains no triples".into()));
    }

    let sampled = grid.member_set();
    let far = faraway.output();
    let mut union: Vec<usize> = sampled.iter().chain(&far).copied().collect();
    union.sort_unstable();
    union.dedup();
    let clusterings: Vec<Clustering> = union
        .iter()
        .map(|&j| {
            grid.clustering(j)
                .or_else(|| faraway.clustering(j))
                .expect("sampled index is stored")
                .clone()
        })
        .collect();

    let mut pool = CandidatePool::default();
    let mut fitter = Fitter::new(&clusterings, &header.fairness, backend, seed.derive("fit"))?;
    for (pos, &j) in union.iter().enumerate() {
        let provenance = if sampled.binary_search(&j).is_ok() {
            Provenance::Input { index: j }
        } else {
            Provenance::Faraway { index: j }
        };
        pool.push(Candidate {
            clustering: fitter.closest(pos)?,
            provenance,
        });
    }
    let s_pos: Vec<usize> = (0..union.len())
        .filter(|&p| sampled.binary_search(&union[p]).is_ok())
        .collect();
    for (a, &x) in s_pos.iter().enumerate() {
        for (b, &y) in s_pos.iter().enumerate().skip(a + 1) {
            for &z in &s_pos[b + 1..] {
                pool.push(Candidate {
                    clustering: fitter.fit(x, y, z)?,
                    provenance: Provenance::Triple {
                        i: union[x],
                        j: union[y],
                        k: union[z],
                    },
                });
            }
        }
    }
    if k as u64 > pool.raw {
        return Err(Error::Argument(format!(
            "k = {k} exceeds the {} candidates built from the samples",
            pool.raw
        )));
    }

    let members = coreset.query();
    let points: Vec<Clustering> = members.iter().map(|w| w.clustering.clone()).collect();
    let eval = Evaluator::new(&points, members.iter().map(|w| w.weight).collect());
    let candidates: Vec<Clustering> = pool.distinct.iter().map(|c| c.clustering.clone()).collect();
    let (chosen, objective, tuples) = eval.best_tuple(&candidates, k)?;
    let (centers, provenance) = pad_centers(&pool, &chosen, k);

    let grid_cap = grid.cap();
    let grid_budget = grid_cap.unwrap_or(m) * grid.cells().len();
    let report = KStreamReport {
        k,
        triples_seen,
        clusterings_seen,
        grid_sampled: sampled.len(),
        faraway_sampled: far.len(),
        coreset_size: members.len(),
        candidates: pool.raw,
        distinct_candidates: pool.len(),
        tuples_evaluated: tuples,
        grid_cells: grid.cells().len(),
        grid_live_cells: grid.live_cells(),
        grid_cap,
        faraway_cap: faraway.size_cap(),
        coreset_cap: cap,
        coreset_budget: coreset.size_budget(m),
        coreset_reductions: coreset.reductions(),
        peak_grid: grid.peak_stored(),
        peak_faraway: faraway.peak_stored(),
        peak_coreset: coreset.peak_stored(),
        peak_stored_clusterings: peak,
        space_budget: grid_budget + faraway.size_cap() + coreset.size_budget(m),
    };
    Ok(KStreamSolution {
        centers,
        provenance,
        objective_estimate: objective,
        coreset: members,
        report,
    })
}
