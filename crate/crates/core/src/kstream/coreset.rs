use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{dist_unchecked, Clustering, PairBits};
use crate::seed::{Rng, Seed};

/// Largest cap the formula may produce; beyond this nothing is ever reduced.
const CAP_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMember {
    pub index: usize,
    pub clustering: Clustering,
    pub weight: f64,
}

/// `ceil(k log2(m + C(m,3)) / epsilon^2)`, the target size for an input of
/// `m` clusterings.
pub fn coreset_cap(m: usize, k: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Argument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let mf = m as f64;
    let universe = mf + mf * (mf - 1.0) * (mf - 2.0) / 6.0;
    let raw = (k as f64 * universe.max(2.0).log2() / (epsilon * epsilon)).ceil();
    Ok(raw.clamp(1.0, CAP_LIMIT) as usize)
}

/// Merge-and-reduce coreset over a stream of clusterings.
///
/// Arrivals fill a buffer of `cap` unit-weight members, which becomes a
/// level-0 bucket. Two buckets on one level are merged and reduced back to
/// `cap` members, carrying upward like a binary counter.
#[derive(Debug, Clone)]
pub struct Coreset {
    cap: usize,
    k: usize,
    buffer: Vec<WeightedMember>,
    levels: Vec<Option<Vec<WeightedMember>>>,
    seen: u64,
    peak: usize,
    reductions: u64,
    rng: Rng,
}

impl Coreset {
    pub fn new(cap: usize, k: usize, seed: Seed) -> Result<Coreset> {
        if cap == 0 {
            return Err(Error::Argument("coreset cap must be positive".into()));
        }
        Ok(Coreset {
            cap,
            k: k.max(1),
            buffer: Vec::new(),
            levels: Vec::new(),
            seen: 0,
            peak: 0,
            reductions: 0,
            rng: seed.rng(),
        })
    }

    pub fn update(&mut self, index: usize, c: &Clustering) {
        self.seen += 1;
        self.buffer.push(WeightedMember {
            index,
            clustering: c.clone(),
            weight: 1.0,
        });
        self.peak = self.peak.max(self.stored());
        if self.buffer.len() < self.cap {
            return;
        }
        let mut carry = std::mem::take(&mut self.buffer);
        for level in 0.. {
            if level == self.levels.len() {
                self.levels.push(None);
            }
            match self.levels[level].take() {
                None => {
                    self.levels[level] = Some(carry);
                    break;
                }
                Some(mut bucket) => {
                    bucket.append(&mut carry);
                    carry = reduce(bucket, self.cap, self.k, &mut self.rng);
                    self.reductions += 1;
                }
            }
        }
    }

    /// All members, ascending by stream index, weights summing to the number
    /// of arrivals.
    pub fn query(&self) -> Vec<WeightedMember> {
        let mut out: Vec<WeightedMember> = self
            .levels
            .iter()
            .flatten()
            .flatten()
            .chain(&self.buffer)
            .cloned()
            .collect();
        out.sort_by_key(|w| w.index);
        if self.reductions > 0 {
            let total: f64 = out.iter().map(|w| w.weight).sum();
            let scale = self.seen as f64 / total;
            for w in &mut out {
                w.weight *= scale;
            }
        }
        out
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn reductions(&self) -> u64 {
        self.reductions
    }

    pub fn stored(&self) -> usize {
        self.buffer.len() + self.levels.iter().flatten().map(Vec::len).sum::<usize>()
    }

    pub fn peak_stored(&self) -> usize {
        self.peak
    }

    /// Most members held at once over a stream of `m` arrivals: a full
    /// buffer plus one bucket per level.
    pub fn size_budget(&self, m: usize) -> usize {
        let buckets = m / self.cap;
        let levels = usize::BITS - buckets.leading_zeros();
        self.cap * (levels as usize + 1)
    }
}

/// Sensitivity sampling against `k` seed centers: the weighted medoid plus
/// `k - 1` distance-proportional picks. Member `i` gets score
/// `w_i d_i / cost + w_i / W_c(i)`; `cap` systematic draws follow the scores,
/// each reweighted by `w / (cap q)`, and the result is rescaled to the
/// original total weight.
fn reduce(members: Vec<WeightedMember>, cap: usize, k: usize, rng: &mut Rng) -> Vec<WeightedMember> {
    if members.len() <= cap {
        return members;
    }
    let dmat = distance_matrix(&members);
    let len = members.len();
    let d = |i: usize, j: usize| dmat[i * len + j] as f64;
    let total_w: f64 = members.iter().map(|w| w.weight).sum();
    let medoid = (0..len)
        .map(|i| (i, (0..len).map(|j| members[j].weight * d(i, j)).sum::<f64>()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0;
    let mut seeds = vec![medoid];
    let mut near: Vec<(usize, f64)> = (0..len).map(|i| (medoid, d(medoid, i))).collect();
    while seeds.len() < k {
        let mass: Vec<f64> = (0..len).map(|i| members[i].weight * near[i].1).collect();
        let Ok(pick) = WeightedIndex::new(&mass) else { break };
        let s = pick.sample(rng);
        seeds.push(s);
        for (i, slot) in near.iter_mut().enumerate() {
            if d(s, i) < slot.1 {
                *slot = (s, d(s, i));
            }
        }
    }
    let cost: f64 = (0..len).map(|i| members[i].weight * near[i].1).sum();
    let mut group_w: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, m) in members.iter().enumerate() {
        *group_w.entry(near[i].0).or_insert(0.0) += m.weight;
    }
    let score: Vec<f64> = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let spread = if cost > 0.0 { near[i].1 / cost } else { 0.0 };
            m.weight * (spread + 1.0 / group_w[&near[i].0])
        })
        .collect();
    let score_sum: f64 = score.iter().sum();
    let step = score_sum / cap as f64;
    let mut next = rng.gen::<f64>() * step;
    let mut acc = 0.0;
    let mut drawn: Vec<(usize, f64)> = Vec::new();
    for (i, &sc) in score.iter().enumerate() {
        acc += sc;
        let mut hits = 0usize;
        while next < acc {
            hits += 1;
            next += step;
        }
        if hits > 0 {
            let q = sc / score_sum;
            drawn.push((i, hits as f64 * members[i].weight / (cap as f64 * q)));
        }
    }
    let new_total: f64 = drawn.iter().map(|&(_, w)| w).sum();
    let scale = total_w / new_total;
    let mut members: Vec<Option<WeightedMember>> = members.into_iter().map(Some).collect();
    drawn
        .into_iter()
        .map(|(i, w)| {
            let mut m = members[i].take().expect("drawn once");
            m.weight = w * scale;
            m
        })
        .collect()
}

fn distance_matrix(members: &[WeightedMember]) -> Vec<u64> {
    let len = members.len();
    let mut out = vec![0u64; len * len];
    let small = members[0].clustering.n() <= 128;
    let bits: Vec<PairBits> = if small {
        members.iter().map(|w| w.clustering.pair_bits()).collect()
    } else {
        Vec::new()
    };
    for i in 0..len {
        for j in i + 1..len {
            let d = if small {
                bits[i].xor_count(&bits[j]) as u64
            } else {
                dist_unchecked(&members[i].clustering, &members[j].clustering)
            };
            out[i * len + j] = d;
            out[j * len + i] = d;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::weighted_obj;

    fn random_clusterings(m: usize, n: usize, seed: u64) -> Vec<Clustering> {
        let mut rng = Seed(seed).rng();
        (0..m)
            .map(|_| Clustering::from_labels(&(0..n).map(|_| rng.gen_range(0..3)).collect::<Vec<u32>>()))
            .collect()
    }

    #[test]
    fn cap_formula() {
        // 40 + C(40,3) = 9920
        let want = (2.0 * 9920f64.log2() / 0.0625).ceil() as usize;
        assert_eq!(coreset_cap(40, 2, 0.25).unwrap(), want);
        assert!(coreset_cap(40, 2, 0.0).is_err());
        assert_eq!(coreset_cap(1, 1, 0.5).unwrap(), 4);
    }

    #[test]
    fn large_cap_keeps_everything() {
        let items = random_clusterings(30, 6, 1);
        let mut cs = Coreset::new(64, 1, Seed(0)).unwrap();
        for (i, x) in items.iter().enumerate() {
            cs.update(i, x);
        }
        let q = cs.query();
        assert_eq!(q.len(), 30);
        assert!(q.iter().enumerate().all(|(i, w)| w.index == i && w.weight == 1.0));
        assert_eq!(cs.reductions(), 0);
    }

    #[test]
    fn reduction_preserves_weight_and_bounds_size() {
        let items = random_clusterings(100, 8, 2);
        let mut cs = Coreset::new(8, 2, Seed(4)).unwrap();
        for (i, x) in items.iter().enumerate() {
            cs.update(i, x);
            assert!(cs.stored() <= cs.size_budget(i + 1));
        }
        assert!(cs.reductions() > 0);
        assert!(cs.peak_stored() <= cs.size_budget(100));
        let q = cs.query();
        let total: f64 = q.iter().map(|w| w.weight).sum();
        assert!((total - 100.0).abs() < 1e-9);
        assert!(q.iter().all(|w| w.weight > 0.0 && w.clustering == items[w.index]));
        assert!(q.windows(2).all(|p| p[0].index < p[1].index));
    }

    #[test]
    fn copies_keep_exact_objective() {
        let x = Clustering::from_labels(&[0, 0, 1, 1, 2]);
        let mut cs = Coreset::new(4, 1, Seed(0)).unwrap();
        for i in 0..50 {
            cs.update(i, &x);
        }
        let q = cs.query();
        let centers = [Clustering::whole(5)];
        let est = weighted_obj(q.iter().map(|w| (&w.clustering, w.weight)), &centers).unwrap();
        let full = 50.0 * crate::partition::dist(&x, &centers[0]).unwrap() as f64;
        assert!((est - full).abs() < 1e-9);
    }
}
