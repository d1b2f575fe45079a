//! Correlation clustering on complete signed graphs.

mod exact;
mod fitting;
mod pivot;

pub use exact::exact_min_partition;
pub use fitting::{cluster_fitting, correlation_clustering, fair_correlation, Fitter, PIVOT_RESTARTS};
pub use pivot::{best_pivot, pivot_correlation};

use rand::Rng as _;

use crate::error::{check_dims, Error, Result};
use crate::partition::{num_pairs, pair_index, Clustering, PairBits};
use crate::seed::Rng;

/// Complete graph with every pair labeled plus or minus.
///
/// Stored as symmetric plus-neighbor rows, `words` 64-bit words per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl SignedGraph {
    pub fn all_minus(n: usize) -> SignedGraph {
        let words = n.div_ceil(64);
        SignedGraph {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn all_plus(n: usize) -> SignedGraph {
        let mut g = SignedGraph::all_minus(n);
        for v in 1..n {
            for u in 0..v {
                g.set_plus(u, v);
            }
        }
        g
    }

    /// Plus exactly on the co-clustered pairs of `c`.
    pub fn consistent(c: &Clustering) -> SignedGraph {
        let n = c.n();
        let mut g = SignedGraph::all_minus(n);
        let mut masks = vec![0u64; c.num_clusters() * g.words];
        for (v, &l) in c.assign().iter().enumerate() {
            masks[l as usize * g.words + v / 64] |= 1 << (v % 64);
        }
        for (v, &l) in c.assign().iter().enumerate() {
            let src = &masks[l as usize * g.words..(l as usize + 1) * g.words];
            g.rows[v * g.words..(v + 1) * g.words].copy_from_slice(src);
            g.rows[v * g.words + v / 64] &= !(1 << (v % 64));
        }
        g
    }

    pub fn from_pair_bits(bits: &PairBits) -> SignedGraph {
        let mut g = SignedGraph::all_minus(bits.n());
        for v in 1..bits.n() {
            for u in 0..v {
                if bits.contains(u, v) {
                    g.set_plus(u, v);
                }
            }
        }
        g
    }

    pub fn from_plus_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<SignedGraph> {
        let mut g = SignedGraph::all_minus(n);
        for (u, v) in pairs {
            if u == v || u >= n || v >= n {
                return Err(Error::Argument(format!("bad pair ({u}, {v}) for n = {n}")));
            }
            g.set_plus(u, v);
        }
        Ok(g)
    }

    /// Each pair is plus independently with probability `p`.
    pub fn random(n: usize, p: f64, rng: &mut Rng) -> SignedGraph {
        let mut g = SignedGraph::all_minus(n);
        for v in 1..n {
            for u in 0..v {
                if rng.gen_bool(p) {
                    g.set_plus(u, v);
                }
            }
        }
        g
    }

    /// Plus where at least two of the three graphs have plus.
    pub fn majority_of(a: &SignedGraph, b: &SignedGraph, c: &SignedGraph) -> SignedGraph {
        debug_assert!(a.n == b.n && b.n == c.n);
        let rows = a
            .rows
            .iter()
            .zip(&b.rows)
            .zip(&c.rows)
            .map(|((x, y), z)| (x & y) | (x & z) | (y & z))
            .collect();
        SignedGraph {
            n: a.n,
            words: a.words,
            rows,
        }
    }

    fn set_plus(&mut self, u: usize, v: usize) {
        self.rows[u * self.words + v / 64] |= 1 << (v % 64);
        self.rows[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_plus(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Plus-neighbors of `v` as a bitset.
    pub fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// All rows back to back; one word per vertex when `n <= 64`.
    pub(crate) fn raw_rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn plus_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn plus_bits(&self) -> PairBits {
        let mut bits = PairBits::new(self.n);
        for v in 1..self.n {
            for u in 0..v {
                if self.is_plus(u, v) {
                    bits.set(pair_index(u, v));
                }
            }
        }
        bits
    }

    /// Content hash, stable across platforms.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.n as u64;
        for &w in &self.rows {
            h = (h ^ w).wrapping_mul(0x0000_0100_0000_01b3);
            h ^= h >> 29;
        }
        h
    }
}

/// Majority vote of exactly three clusterings.
pub fn majority_graph(t: &[Clustering]) -> Result<SignedGraph> {
    let [a, b, c] = t else {
        return Err(Error::Argument(format!(
            "majority graph needs 3 clusterings, got {}",
            t.len()
        )));
    };
    check_dims(a.n(), b.n())?;
    check_dims(a.n(), c.n())?;
    Ok(SignedGraph::majority_of(
        &SignedGraph::consistent(a),
        &SignedGraph::consistent(b),
        &SignedGraph::consistent(c),
    ))
}

/// Split plus pairs plus joined minus pairs.
pub fn correlation_cost(g: &SignedGraph, c: &Clustering) -> Result<u64> {
    check_dims(g.n(), c.n())?;
    Ok(cost_unchecked(g, &SignedGraph::consistent(c)))
}

pub(crate) fn cost_unchecked(g: &SignedGraph, together: &SignedGraph) -> u64 {
    let flips: u64 = g
        .rows
        .iter()
        .zip(&together.rows)
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum();
    debug_assert!(flips as usize <= 2 * num_pairs(g.n));
    flips / 2
}
