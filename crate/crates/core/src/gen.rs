//! Synthetic instances: planted fair centers plus per-input noise.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{ColorTable, Fairness, FairnessConstraint};
use crate::partition::{Clustering, InputSet};
use crate::seed::{Rng, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// Color ratio; `n` must be a multiple of its sum.
    pub ratio: Vec<u32>,
    /// Number of planted centers.
    pub centers: usize,
    /// Fraction of points moved in each input.
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub fairness: Fairness,
    pub inputs: InputSet,
    pub centers: Vec<Clustering>,
}

impl GenSpec {
    pub fn balanced(n: usize, m: usize) -> GenSpec {
        GenSpec {
            n,
            m,
            ratio: vec![1, 1],
            centers: 1,
            noise: 0.2,
        }
    }

    pub fn generate(&self, seed: Seed) -> Result<Instance> {
        let constraint = FairnessConstraint::new(self.ratio.clone())?;
        let unit: usize = self.ratio.iter().map(|&r| r as usize).sum();
        if self.n == 0 || !self.n.is_multiple_of(unit) {
            return Err(Error::Infeasible(format!(
                "n = {} is not a positive multiple of the ratio sum {unit}",
                self.n
            )));
        }
        if self.m == 0 || self.centers == 0 {
            return Err(Error::Argument("m and the number of centers must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Argument(format!("noise must lie in [0, 1], got {}", self.noise)));
        }
        let multiple = self.n / unit;
        let mut colors: Vec<u32> = self
            .ratio
            .iter()
            .enumerate()
            .flat_map(|(c, &r)| std::iter::repeat_n(c as u32, r as usize * multiple))
            .collect();
        colors.shuffle(&mut seed.derive("colors").rng());
        let table = ColorTable::with_num_colors(colors, self.ratio.len())?;
        let fairness = Fairness::new(table, constraint)?;

        let mut rng = seed.derive("centers").rng();
        let centers: Vec<Clustering> = (0..self.centers).map(|_| random_fair(&fairness, &mut rng)).collect();
        let moves = (self.noise * self.n as f64).ceil() as usize;
        let mut rng = seed.derive("inputs").rng();
        let inputs = (0..self.m)
            .map(|_| {
                let center = &centers[rng.gen_range(0..centers.len())];
                perturb(center, moves, &mut rng)
            })
            .collect();
        Ok(Instance {
            fairness,
            inputs: InputSet::new(inputs)?,
            centers,
        })
    }
}

/// A uniformly shuffled fair clustering whose cluster multipliers form a
/// random composition of the global multiplier.
pub fn random_fair(fairness: &Fairness, rng: &mut Rng) -> Clustering {
    let ratio = fairness.constraint().ratio();
    let total = fairness
        .constraint()
        .multiplier(fairness.colors().counts())
        .expect("validated");
    let mut parts = vec![1usize];
    for _ in 1..total {
        if rng.gen_bool(0.5) {
            parts.push(1);
        } else {
            *parts.last_mut().expect("non-empty") += 1;
        }
    }
    let mut labels = vec![0u32; fairness.n()];
    for (c, &r) in ratio.iter().enumerate() {
        let mut points: Vec<usize> = (0..fairness.n())
            .filter(|&v| fairness.colors().color(v) == c as u32)
            .collect();
        points.shuffle(rng);
        let mut it = points.into_iter();
        for (label, &a) in parts.iter().enumerate() {
            for v in it.by_ref().take(a * r as usize) {
                labels[v] = label as u32;
            }
        }
    }
    Clustering::from_labels(&labels)
}

/// Moves `moves` distinct random points, each to a random existing cluster
/// or to a fresh one.
pub fn perturb(c: &Clustering, moves: usize, rng: &mut Rng) -> Clustering {
    let mut labels = c.assign().to_vec();
    let mut next = c.num_clusters() as u32;
    let picked = rand::seq::index::sample(rng, c.n(), moves.min(c.n()));
    for v in picked.iter() {
        let target = rng.gen_range(0..=next);
        if target == next {
            next += 1;
        }
        labels[v] = target;
    }
    Clustering::from_labels(&labels)
}
