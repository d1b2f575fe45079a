use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{dist_unchecked, Clustering};
use crate::seed::{Rng, Seed};
use crate::streaming::log2m;

use super::Store;

/// Size limit of each grid set before it is emptied for good.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum GridCap {
    /// `k (log2 m)^3`.
    #[default]
    Default,
    Fixed(usize),
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    /// Distance scale `D`; members are at least `delta * D` apart.
    pub radius: f64,
    /// Probability `p` of considering an arrival.
    pub keep: f64,
    members: Vec<usize>,
    dead: bool,
}

impl GridCell {
    /// Stream indices of the current members, in insertion order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_live(&self) -> bool {
        !self.dead
    }
}

/// Threshold-grid sampler: one separated random subset per `(D, p)` pair.
#[derive(Debug, Clone)]
pub struct GridSampler {
    delta: f64,
    cap: Option<f64>,
    cells: Vec<GridCell>,
    store: Store,
    rng: Rng,
}

impl GridSampler {
    pub fn new(n: usize, m: usize, k: usize, delta: f64, lambda: f64, cap: GridCap, seed: Seed) -> Result<GridSampler> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Argument(format!(
                "delta must be a finite non-negative number, got {delta}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda must be positive, got {lambda}")));
        }
        let cap = match cap {
            GridCap::Default => Some(k as f64 * log2m(m).powi(3)),
            GridCap::Fixed(c) => Some(c as f64),
            GridCap::Unbounded => None,
        };
        let keeps = keep_rates(m, lambda);
        let cells = radii(n, lambda)
            .into_iter()
            .flat_map(|radius| {
                keeps.iter().map(move |&keep| GridCell {
                    radius,
                    keep,
                    members: Vec::new(),
                    dead: false,
                })
            })
            .collect();
        Ok(GridSampler {
            delta,
            cap,
            cells,
            store: Store::default(),
            rng: seed.rng(),
        })
    }

    /// One coin per live cell, in cell order; a kept arrival joins the cell
    /// when it is far enough from every member.
    pub fn update(&mut self, index: usize, c: &Clustering) {
        let GridSampler {
            delta,
            cap,
            cells,
            store,
            rng,
        } = self;
        let mut dists: HashMap<usize, u64> = HashMap::new();
        for cell in cells.iter_mut().filter(|cell| !cell.dead) {
            if rng.gen::<f64>() >= cell.keep {
                continue;
            }
            let bound = *delta * cell.radius;
            let far = cell.members.iter().all(|&j| {
                let d = *dists.entry(j).or_insert_with(|| dist_unchecked(store.get(j), c));
                d as f64 >= bound
            });
            if !far {
                continue;
            }
            cell.members.push(index);
            store.retain(index, c);
            if cap.is_some_and(|cap| cell.members.len() as f64 >= cap) {
                for j in cell.members.drain(..) {
                    store.release(j);
                }
                cell.dead = true;
            }
        }
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn live_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.dead).count()
    }

    /// Distinct stream indices over all live cells, ascending.
    pub fn member_set(&self) -> Vec<usize> {
        self.store.indices()
    }

    pub fn clustering(&self, index: usize) -> Option<&Clustering> {
        self.store.lookup(index)
    }

    /// Largest member count a cell can reach, or `None` when unbounded.
    pub fn cap(&self) -> Option<usize> {
        self.cap.map(|c| c.ceil() as usize)
    }

    pub fn stored(&self) -> usize {
        self.store.len()
    }

    pub fn peak_stored(&self) -> usize {
        self.store.peak()
    }
}

/// `1/2, (1+lambda)/2, ...` up to the largest possible distance
/// `n(n-1)/2`, which closes the list.
pub fn radii(n: usize, lambda: f64) -> Vec<f64> {
    let top = (n * n.saturating_sub(1) / 2) as f64;
    let mut out = Vec::new();
    let mut d = 0.5;
    while d < top {
        out.push(d);
        d *= 1.0 + lambda;
    }
    out.push(top.max(0.5));
    out
}

/// `1, 1/(1+lambda), ...` down to `1/m`, which closes the list.
pub fn keep_rates(m: usize, lambda: f64) -> Vec<f64> {
    let floor = 1.0 / m.max(1) as f64;
    let mut out = Vec::new();
    let mut p = 1.0;
    while p > floor {
        out.push(p);
        p /= 1.0 + lambda;
    }
    out.push(floor);
    out
}
