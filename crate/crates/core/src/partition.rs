//! Clusterings, the pair-disagreement distance and median objectives.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Largest point count for which pair sets are materialized.
pub const PAIR_SET_GUARD: usize = 64;

/// A partition of the points `0..n`, stored as a canonical label array.
///
/// Labels are dense and appear in first-occurrence order starting at 0, so
/// two values are equal exactly when they describe the same partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Clustering {
    assign: Vec<u32>,
    clusters: u32,
}

impl Clustering {
    /// Canonical relabeling of an arbitrary label array.
    pub fn from_labels<T: Copy + Eq + Hash>(raw: &[T]) -> Clustering {
        let mut seen: HashMap<T, u32> = HashMap::with_capacity(raw.len().min(1024));
        let mut assign = Vec::with_capacity(raw.len());
        for &l in raw {
            let next = seen.len() as u32;
            assign.push(*seen.entry(l).or_insert(next));
        }
        Clustering {
            assign,
            clusters: seen.len() as u32,
        }
    }

    /// [`Clustering::from_labels`] specialized to small integer labels.
    pub fn from_u32(raw: &[u32]) -> Clustering {
        let max = raw.iter().copied().max().unwrap_or(0) as usize;
        if max > 4 * raw.len() + 64 {
            return Clustering::from_labels(raw);
        }
        let mut map = vec![u32::MAX; max + 1];
        let mut next = 0;
        let assign = raw
            .iter()
            .map(|&l| {
                let slot = &mut map[l as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    next += 1;
                }
                *slot
            })
            .collect();
        Clustering { assign, clusters: next }
    }

    /// Canonicalize a sparse point -> label map that must cover `0..n`.
    pub fn from_map(n: usize, raw: &BTreeMap<usize, u64>) -> Result<Clustering> {
        if let Some((&p, _)) = raw.iter().find(|(&p, _)| p >= n) {
            return Err(Error::Malformed(format!("point id {p} out of range for n={n}")));
        }
        let mut labels = Vec::with_capacity(n);
        for v in 0..n {
            match raw.get(&v) {
                Some(&l) => labels.push(l),
                None => return Err(Error::Malformed(format!("missing label for point {v}"))),
            }
        }
        Ok(Clustering::from_labels(&labels))
    }

    /// Build from explicit blocks. Every point must appear in exactly one block.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Clustering> {
        let mut labels = vec![u32::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &v in block {
                if v >= n {
                    return Err(Error::Malformed(format!("point id {v} out of range for n={n}")));
                }
                if labels[v] != u32::MAX {
                    return Err(Error::Malformed(format!("point {v} appears in two blocks")));
                }
                labels[v] = b as u32;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == u32::MAX) {
            return Err(Error::Malformed(format!("point {v} is not covered")));
        }
        Ok(Clustering::from_labels(&labels))
    }

    pub fn singletons(n: usize) -> Clustering {
        Clustering {
            assign: (0..n as u32).collect(),
            clusters: n as u32,
        }
    }

    pub fn whole(n: usize) -> Clustering {
        Clustering {
            assign: vec![0; n],
            clusters: u32::from(n > 0),
        }
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters as usize
    }

    pub fn assign(&self) -> &[u32] {
        &self.assign
    }

    pub fn label(&self, v: usize) -> u32 {
        self.assign[v]
    }

    pub fn together(&self, u: usize, v: usize) -> bool {
        self.assign[u] == self.assign[v]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters()];
        for &l in &self.assign {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Blocks in label order, each sorted by point id.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (v, &l) in self.assign.iter().enumerate() {
            out[l as usize].push(v);
        }
        out
    }

    /// Number of co-clustered pairs, `sum over clusters of C(size, 2)`.
    pub fn together_pairs(&self) -> u64 {
        self.cluster_sizes().iter().map(|&s| choose2(s as u64)).sum()
    }

    /// Co-membership relation as a pair bitset.
    pub fn pair_bits(&self) -> PairBits {
        let n = self.n();
        let mut bits = PairBits::new(n);
        for v in 1..n {
            for u in 0..v {
                if self.assign[u] == self.assign[v] {
                    bits.set(pair_index(u, v));
                }
            }
        }
        bits
    }
}

impl TryFrom<Vec<u32>> for Clustering {
    type Error = Error;

    fn try_from(raw: Vec<u32>) -> Result<Self> {
        let c = Clustering::from_labels(&raw);
        if c.assign != raw {
            return Err(Error::Malformed("label array is not in canonical form".into()));
        }
        Ok(c)
    }
}

impl From<Clustering> for Vec<u32> {
    fn from(c: Clustering) -> Self {
        c.assign
    }
}

/// Ordered list of `m >= 1` clusterings over a common point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSet {
    n: usize,
    clusterings: Vec<Clustering>,
}

impl InputSet {
    pub fn new(clusterings: Vec<Clustering>) -> Result<InputSet> {
        let first = clusterings
            .first()
            .ok_or_else(|| Error::Argument("input set must contain at least one clustering".into()))?;
        let n = first.n();
        for c in &clusterings {
            check_dims(n, c.n())?;
        }
        Ok(InputSet { n, clusterings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clusterings.len()
    }

    pub fn clusterings(&self) -> &[Clustering] {
        &self.clusterings
    }

    pub fn into_inner(self) -> Vec<Clustering> {
        self.clusterings
    }

    /// Sub-collection by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<InputSet> {
        InputSet::new(idx.iter().map(|&i| self.clusterings[i].clone()).collect())
    }
}

impl std::ops::Deref for InputSet {
    type Target = [Clustering];

    fn deref(&self) -> &[Clustering] {
        &self.clusterings
    }
}

pub(crate) fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Index of the unordered pair `{u, v}` in the triangular layout (`u != v`).
pub fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    b * (b - 1) / 2 + a
}

pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// A set of unordered pairs over `0..n` packed as bits in triangular order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairBits {
    n: usize,
    words: Vec<u64>,
}

impl PairBits {
    pub fn new(n: usize) -> PairBits {
        PairBits {
            n,
            words: vec![0; num_pairs(n).div_ceil(64)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, idx: usize) {
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn get(&self, idx: usize) -> bool {
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.get(pair_index(u, v))
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Pairs present in at least two of the three sets.
    pub fn majority(a: &PairBits, b: &PairBits, c: &PairBits) -> PairBits {
        let words = a
            .words
            .iter()
            .zip(&b.words)
            .zip(&c.words)
            .map(|((x, y), z)| (x & y) | (x & z) | (y & z))
            .collect();
        PairBits { n: a.n, words }
    }

    /// Size of the symmetric difference.
    pub fn xor_count(&self, other: &PairBits) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(x, y)| (x ^ y).count_ones() as usize)
            .sum()
    }
}

/// Set of unordered point pairs, each stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pairs: BTreeSet<(u32, u32)>,
}

impl PairSet {
    pub fn insert(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-pair");
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.pairs.insert((a as u32, b as u32));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.pairs.contains(&(a as u32, b as u32))
    }

    pub fn intersection_len(&self, other: &PairSet) -> usize {
        self.pairs.intersection(&other.pairs).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|&(a, b)| (a as usize, b as usize))
    }
}

/// Pair-disagreement distance: the number of unordered pairs co-clustered in
/// exactly one of the two clusterings.
///
/// Computed from the contingency table as `P1 + P2 - 2 * P12`, where `Px`
/// counts co-clustered pairs of each side and `P12` those of the meet.
pub fn dist(c1: &Clustering, c2: &Clustering) -> Result<u64> {
    check_dims(c1.n(), c2.n())?;
    Ok(dist_unchecked(c1, c2))
}

pub(crate) fn dist_unchecked(c1: &Clustering, c2: &Clustering) -> u64 {
    let l1 = c1.num_clusters();
    let l2 = c2.num_clusters();
    let p1 = c1.together_pairs();
    let p2 = c2.together_pairs();
    let n = c1.n();
    let p12: u64 = if l1 * l2 <= 4 * n + 64 {
        let mut table = vec![0u32; l1 * l2];
        for (&a, &b) in c1.assign.iter().zip(&c2.assign) {
            table[a as usize * l2 + b as usize] += 1;
        }
        table.iter().map(|&x| choose2(x as u64)).sum()
    } else {
        let mut codes: Vec<u64> = c1
            .assign
            .iter()
            .zip(&c2.assign)
            .map(|(&a, &b)| (a as u64) << 32 | b as u64)
            .collect();
        codes.sort_unstable();
        let mut total = 0;
        let mut run = 0u64;
        for (i, code) in codes.iter().enumerate() {
            if i > 0 && *code == codes[i - 1] {
                run += 1;
            } else {
                total += choose2(run);
                run = 1;
            }
        }
        total + choose2(run)
    };
    p1 + p2 - 2 * p12
}

/// Reference O(n^2) pair enumeration of [`dist`].
pub fn dist_naive(c1: &Clustering, c2: &Clustering) -> Result<u64> {
    check_dims(c1.n(), c2.n())?;
    let n = c1.n();
    let mut d = 0;
    for v in 1..n {
        for u in 0..v {
            if c1.together(u, v) != c2.together(u, v) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Pairs on which `c` disagrees with the reference clustering.
pub fn u_set(c: &Clustering, reference: &Clustering) -> Result<PairSet> {
    check_dims(reference.n(), c.n())?;
    if c.n() > PAIR_SET_GUARD {
        return Err(Error::Capability(format!(
            "pair sets are limited to n <= {PAIR_SET_GUARD}, got n = {}",
            c.n()
        )));
    }
    let mut set = PairSet::default();
    for v in 1..c.n() {
        for u in 0..v {
            if c.together(u, v) != reference.together(u, v) {
                set.insert(u, v);
            }
        }
    }
    Ok(set)
}

/// Index and distance of the nearest center. Ties go to the lowest index.
pub fn nearest(c: &Clustering, centers: &[Clustering]) -> Result<(usize, u64)> {
    if centers.is_empty() {
        return Err(Error::Argument("center list is empty".into()));
    }
    let mut best = (0, u64::MAX);
    for (i, z) in centers.iter().enumerate() {
        let d = dist(c, z)?;
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

/// k-median objective: each input pays its distance to the nearest center.
/// With a single center this is the 1-median objective.
pub fn obj<'a>(inputs: impl IntoIterator<Item = &'a Clustering>, centers: &[Clustering]) -> Result<u64> {
    if centers.is_empty() {
        return Err(Error::Argument("center list is empty".into()));
    }
    let mut total = 0;
    for c in inputs {
        total += nearest(c, centers)?.1;
    }
    Ok(total)
}

/// Weighted k-median objective over `(clustering, weight)` pairs.
pub fn weighted_obj<'a>(
    inputs: impl IntoIterator<Item = (&'a Clustering, f64)>,
    centers: &[Clustering],
) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::Argument("center list is empty".into()));
    }
    let mut total = 0.0;
    for (c, w) in inputs {
        total += w * nearest(c, centers)?.1 as f64;
    }
    Ok(total)
}
