use std::collections::HashSet;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::partition::{dist_unchecked, Clustering};
use crate::seed::{Rng, Seed};

use super::Store;

/// Upper clamp on the per-radius net size.
pub const NET_CAP_MAX: usize = 256;

/// `max(k, ceil(k^2 log2(k+1) / (rho_f kappa)))`, clamped to [`NET_CAP_MAX`].
pub fn default_net_cap(k: usize, kappa: f64, rho_f: f64) -> usize {
    let k_f = k as f64;
    let raw = (k_f * k_f * (k_f + 1.0).log2() / (rho_f * kappa)).ceil();
    (raw.min(NET_CAP_MAX as f64) as usize).max(k).min(NET_CAP_MAX.max(k))
}

/// Single-pass faraway sampler.
///
/// For each radius `0, 1, 2, 4, ...` up to the largest possible distance it
/// keeps a greedy net of arrivals pairwise farther apart than the radius;
/// a net that outgrows its cap is dropped for the rest of the run. A
/// uniform reservoir runs alongside. The output is the union.
#[derive(Debug, Clone)]
pub struct FarawaySampler {
    radii: Vec<f64>,
    nets: Vec<Option<Vec<usize>>>,
    reservoir: Vec<usize>,
    seen: u64,
    net_cap: usize,
    reservoir_cap: usize,
    store: Store,
    rng: Rng,
}

impl FarawaySampler {
    pub fn new(n: usize, net_cap: usize, reservoir_cap: usize, seed: Seed) -> Result<FarawaySampler> {
        if net_cap == 0 {
            return Err(Error::Argument("faraway net cap must be positive".into()));
        }
        let top = (n * n.saturating_sub(1) / 2).max(1) as f64;
        let mut radii = vec![0.0];
        let mut r = 1.0;
        loop {
            radii.push(r);
            if r >= top {
                break;
            }
            r *= 2.0;
        }
        Ok(FarawaySampler {
            nets: vec![Some(Vec::new()); radii.len()],
            radii,
            reservoir: Vec::new(),
            seen: 0,
            net_cap,
            reservoir_cap,
            store: Store::default(),
            rng: seed.rng(),
        })
    }

    pub fn update(&mut self, index: usize, c: &Clustering) {
        let mut dists: Vec<(usize, u64)> = Vec::new();
        let mut dist_to = |store: &Store, j: usize| match dists.iter().find(|(i, _)| *i == j) {
            Some(&(_, d)) => d,
            None => {
                let d = dist_unchecked(store.get(j), c);
                dists.push((j, d));
                d
            }
        };
        for (net, &r) in self.nets.iter_mut().zip(&self.radii) {
            let Some(members) = net else { continue };
            if members.iter().all(|&j| dist_to(&self.store, j) as f64 > r) {
                members.push(index);
                self.store.retain(index, c);
                if members.len() > self.net_cap {
                    for j in members.drain(..) {
                        self.store.release(j);
                    }
                    *net = None;
                }
            }
        }
        let slot = if self.reservoir.len() < self.reservoir_cap {
            self.reservoir.push(index);
            self.store.retain(index, c);
            None
        } else if self.reservoir_cap > 0 {
            let j = self.rng.gen_range(0..=self.seen) as usize;
            (j < self.reservoir_cap).then_some(j)
        } else {
            None
        };
        if let Some(j) = slot {
            self.store.release(self.reservoir[j]);
            self.reservoir[j] = index;
            self.store.retain(index, c);
        }
        self.seen += 1;
    }

    /// Sampled stream indices, ascending, one per distinct clustering.
    pub fn output(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.store
            .indices()
            .into_iter()
            .filter(|&j| seen.insert(self.store.get(j)))
            .collect()
    }

    pub fn clustering(&self, index: usize) -> Option<&Clustering> {
        self.store.lookup(index)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn live_nets(&self) -> usize {
        self.nets.iter().filter(|n| n.is_some()).count()
    }

    /// Most clusterings the sampler can hold at once.
    pub fn size_cap(&self) -> usize {
        // a net may briefly hold net_cap + 1 before it is dropped
        self.radii.len() * (self.net_cap + 1) + self.reservoir_cap
    }

    pub fn stored(&self) -> usize {
        self.store.len()
    }

    pub fn peak_stored(&self) -> usize {
        self.store.peak()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::dist;

    #[test]
    fn net_cap_formula() {
        assert_eq!(default_net_cap(1, 1.0 / 3.0, 0.5), 6);
        assert_eq!(default_net_cap(2, 1.0 / 3.0, 0.5), 39);
        assert_eq!(default_net_cap(50, 1.0 / 3.0, 0.5), NET_CAP_MAX);
    }

    #[test]
    fn small_stream_kept_whole() {
        let mut rng = Seed(3).rng();
        let items: Vec<Clustering> = (0..6)
            .map(|_| Clustering::from_labels(&(0..6).map(|_| rng.gen_range(0..3)).collect::<Vec<u32>>()))
            .collect();
        let mut f = FarawaySampler::new(6, 4, 8, Seed(0)).unwrap();
        for (i, x) in items.iter().enumerate() {
            f.update(i, x);
        }
        let distinct: HashSet<&Clustering> = items.iter().collect();
        assert_eq!(f.output().len(), distinct.len());
    }

    #[test]
    fn copies_collapse() {
        let x = Clustering::from_labels(&[0, 0, 1, 1]);
        let mut f = FarawaySampler::new(4, 3, 5, Seed(0)).unwrap();
        for i in 0..20 {
            f.update(i, &x);
        }
        assert_eq!(f.output(), vec![0]);
    }

    #[test]
    fn nets_are_separated_and_bounded() {
        let mut rng = Seed(5).rng();
        let items: Vec<Clustering> = (0..60)
            .map(|_| Clustering::from_labels(&(0..8).map(|_| rng.gen_range(0..4)).collect::<Vec<u32>>()))
            .collect();
        let mut f = FarawaySampler::new(8, 5, 3, Seed(2)).unwrap();
        for (i, x) in items.iter().enumerate() {
            f.update(i, x);
            assert!(f.stored() <= f.size_cap());
        }
        assert!(f.live_nets() >= 1);
        for (net, &r) in f.nets.iter().zip(&f.radii) {
            let Some(net) = net else { continue };
            assert!(net.len() <= 5);
            for (a, &x) in net.iter().enumerate() {
                for &y in &net[a + 1..] {
                    assert!(dist(&items[x], &items[y]).unwrap() as f64 > r);
                }
            }
        }
        assert_eq!(f.reservoir.len(), 3);
    }
}
