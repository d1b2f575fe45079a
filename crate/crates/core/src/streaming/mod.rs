//! Pair-relation streams and the single-pass 1-median.

mod onemed;
mod reconstruct;

pub use onemed::{st_1med, OneMedParams, OneMedReport, OneMedSolution, SampledStore};
pub use reconstruct::{reconstruct, Consistency, UnionFind};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::Fairness;
use crate::partition::{Clustering, InputSet};
use crate::seed::{Rng, Seed};

/// One pairwise relation of input clustering `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamTriple {
    pub u: u32,
    pub v: u32,
    pub j: u32,
    /// The `b` bit: `true` when `u` and `v` are in different clusters.
    pub split: bool,
}

impl StreamTriple {
    pub fn new(u: usize, v: usize, j: usize, split: bool) -> StreamTriple {
        StreamTriple {
            u: u as u32,
            v: v as u32,
            j: j as u32,
            split,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamMode {
    /// All triples of a clustering arrive as one consecutive block.
    #[default]
    Contiguous,
    /// Arbitrary interleaving.
    General,
}

impl StreamMode {
    pub fn name(self) -> &'static str {
        match self {
            StreamMode::Contiguous => "contiguous",
            StreamMode::General => "general",
        }
    }
}

impl std::str::FromStr for StreamMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<StreamMode> {
        match s {
            "contiguous" => Ok(StreamMode::Contiguous),
            "general" => Ok(StreamMode::General),
            other => Err(Error::Malformed(format!("unknown stream mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamHeader {
    pub n: usize,
    pub m: usize,
    pub fairness: Fairness,
    pub mode: StreamMode,
}

impl StreamHeader {
    pub fn new(n: usize, m: usize, fairness: Fairness, mode: StreamMode) -> Result<StreamHeader> {
        if fairness.n() != n {
            return Err(Error::Dimension {
                expected: n,
                found: fairness.n(),
            });
        }
        if m == 0 {
            return Err(Error::Malformed("stream must announce m >= 1".into()));
        }
        Ok(StreamHeader { n, m, fairness, mode })
    }

    /// Range checks plus, in contiguous mode, the block-order rule.
    pub(crate) fn checker(&self) -> TripleChecker {
        TripleChecker {
            n: self.n,
            m: self.m,
            contiguous: self.mode == StreamMode::Contiguous,
            current: None,
            closed: vec![false; if self.mode == StreamMode::Contiguous { self.m } else { 0 }],
        }
    }
}

pub(crate) struct TripleChecker {
    n: usize,
    m: usize,
    contiguous: bool,
    current: Option<usize>,
    closed: Vec<bool>,
}

impl TripleChecker {
    pub fn check(&mut self, t: &StreamTriple) -> Result<()> {
        let (u, v, j) = (t.u as usize, t.v as usize, t.j as usize);
        if u >= self.n || v >= self.n || u == v {
            return Err(Error::Malformed(format!("bad pair ({u}, {v}) for n = {}", self.n)));
        }
        if j >= self.m {
            return Err(Error::Malformed(format!("clustering index {j} >= m = {}", self.m)));
        }
        if self.contiguous && self.current != Some(j) {
            if self.closed[j] {
                return Err(Error::Inconsistent(format!(
                    "clustering {j} resumes after its block ended in a contiguous stream"
                )));
            }
            if let Some(prev) = self.current {
                self.closed[prev] = true;
            }
            self.current = Some(j);
        }
        Ok(())
    }
}

/// Every pair of `c`, in triangular order.
pub fn encode(c: &Clustering, j: usize) -> Vec<StreamTriple> {
    let mut out = Vec::with_capacity(crate::partition::num_pairs(c.n()));
    for v in 1..c.n() {
        for u in 0..v {
            out.push(StreamTriple::new(u, v, j, !c.together(u, v)));
        }
    }
    out
}

/// Full pair encoding of every input. General mode shuffles the triples.
pub fn encode_all(inputs: &[Clustering], mode: StreamMode, seed: Seed) -> Vec<StreamTriple> {
    let mut out: Vec<StreamTriple> = inputs.iter().enumerate().flat_map(|(j, c)| encode(c, j)).collect();
    if mode == StreamMode::General {
        out.shuffle(&mut seed.derive("interleave").rng());
    }
    out
}

/// Every clustering of a stream, in any triple order. Clusterings without
/// triples come back as singletons.
pub fn collect_inputs<I>(header: &StreamHeader, triples: I, consistency: Consistency) -> Result<InputSet>
where
    I: IntoIterator<Item = Result<StreamTriple>>,
{
    let mut groups: Vec<Vec<StreamTriple>> = vec![Vec::new(); header.m];
    let mut check = header.checker();
    for t in triples {
        let t = t?;
        check.check(&t)?;
        groups[t.j as usize].push(t);
    }
    let clusterings = groups
        .iter()
        .map(|g| reconstruct(header.n, g, consistency))
        .collect::<Result<Vec<_>>>()?;
    InputSet::new(clusterings)
}

/// `count` distinct indices of `0..m`, uniformly, in increasing order.
pub fn sample_indices(m: usize, count: usize, rng: &mut Rng) -> Vec<usize> {
    let count = if count > m {
        log::warn!("sample of {count} indices clamped to m = {m}");
        m
    } else {
        count
    };
    let mut idx = rand::seq::index::sample(rng, m, count).into_vec();
    idx.sort_unstable();
    idx
}

/// Base-2 logarithm of `m`, zero for `m <= 1`.
pub(crate) fn log2m(m: usize) -> f64 {
    (m.max(1) as f64).log2()
}
