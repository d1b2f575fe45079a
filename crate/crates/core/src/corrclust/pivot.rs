use rand::RngCore;

use crate::partition::Clustering;
use crate::seed::Rng;

use super::SignedGraph;

/// Random-pivot partition: while vertices remain, pick one uniformly at
/// random and cluster it with its remaining plus-neighbors.
pub fn pivot_correlation(g: &SignedGraph, rng: &mut Rng) -> Clustering {
    let mut run = PivotRun::new(g.n(), g.words());
    run.pivot(g, rng);
    run.clustering()
}

/// Cheapest of `restarts` pivot runs; earliest run wins ties.
pub fn best_pivot(g: &SignedGraph, restarts: usize, rng: &mut Rng) -> (Clustering, u64) {
    let mut run = PivotRun::new(g.n(), g.words());
    let mut best_masks = Vec::new();
    let mut best_cost = u64::MAX;
    for _ in 0..restarts.max(1) {
        let cost = run.pivot(g, rng);
        if cost < best_cost {
            best_cost = cost;
            best_masks.clone_from(&run.masks);
        }
    }
    run.masks = best_masks;
    (run.clustering(), best_cost)
}

/// Scratch buffers reused across restarts.
struct PivotRun {
    n: usize,
    w: usize,
    open: Vec<u64>,
    /// Cluster bitsets, `w` words each, in creation order.
    masks: Vec<u64>,
}

impl PivotRun {
    fn new(n: usize, w: usize) -> PivotRun {
        PivotRun {
            n,
            w,
            open: vec![0; w],
            masks: Vec::with_capacity(n * w),
        }
    }

    /// Fills `masks` and returns the correlation cost of the result.
    fn pivot(&mut self, g: &SignedGraph, rng: &mut Rng) -> u64 {
        if self.w == 1 {
            return self.pivot_word(g.raw_rows(), rng);
        }
        let (n, w) = (self.n, self.w);
        self.open.fill(u64::MAX);
        if n % 64 != 0 {
            self.open[w - 1] = (1 << (n % 64)) - 1;
        }
        self.masks.clear();
        let mut left = n;
        while left > 0 {
            let p = select(&self.open, below(rng, left));
            let base = self.masks.len();
            self.masks.resize(base + w, 0);
            let mut taken = 1;
            for (i, (o, r)) in self.open.iter_mut().zip(g.row(p)).enumerate() {
                let grab = *o & r;
                *o &= !grab;
                self.masks[base + i] = grab;
                taken += grab.count_ones() as usize;
            }
            self.masks[base + p / 64] |= 1 << (p % 64);
            self.open[p / 64] &= !(1 << (p % 64));
            left -= taken;
        }
        // each vertex's own bit shows up once in row xor cluster mask
        let mut flips = 0u64;
        for mask in self.masks.chunks_exact(w) {
            for (i, &word) in mask.iter().enumerate() {
                let mut rest = word;
                while rest != 0 {
                    let v = i * 64 + rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    flips += g
                        .row(v)
                        .iter()
                        .zip(mask)
                        .map(|(x, y)| (x ^ y).count_ones() as u64)
                        .sum::<u64>()
                        - 1;
                }
            }
        }
        flips / 2
    }

    /// Same draw sequence as the general path, for graphs that fit in one
    /// word per row.
    fn pivot_word(&mut self, rows: &[u64], rng: &mut Rng) -> u64 {
        let mut open = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        self.masks.clear();
        while open != 0 {
            let k = below(rng, open.count_ones() as usize);
            let p = select(&[open], k);
            let mask = (open & rows[p]) | 1 << p;
            open &= !mask;
            self.masks.push(mask);
        }
        let mut flips = 0u64;
        for &mask in &self.masks {
            let mut rest = mask;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                flips += (rows[v] ^ mask).count_ones() as u64 - 1;
            }
        }
        flips / 2
    }

    fn clustering(&self) -> Clustering {
        let mut labels = vec![0u32; self.n];
        for (c, mask) in self.masks.chunks_exact(self.w).enumerate() {
            for (i, &word) in mask.iter().enumerate() {
                let mut rest = word;
                while rest != 0 {
                    labels[i * 64 + rest.trailing_zeros() as usize] = c as u32;
                    rest &= rest - 1;
                }
            }
        }
        Clustering::from_u32(&labels)
    }
}

/// Near-uniform draw from `0..k` by multiply-shift; the bias is below
/// `k / 2^32`.
fn below(rng: &mut Rng, k: usize) -> usize {
    ((rng.next_u32() as u64 * k as u64) >> 32) as usize
}

/// Position of the `k`-th set bit.
fn select(words: &[u64], mut k: usize) -> usize {
    for (i, &word) in words.iter().enumerate() {
        let ones = word.count_ones() as usize;
        if k < ones {
            return i * 64 + select_word(word, k as u32);
        }
        k -= ones;
    }
    unreachable!("k exceeds the number of set bits")
}

fn select_word(mut x: u64, k: u32) -> usize {
    for _ in 0..k {
        x &= x - 1;
    }
    x.trailing_zeros() as usize
}
