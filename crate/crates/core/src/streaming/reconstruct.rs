use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Clustering;

use super::StreamTriple;

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
    }

    pub fn into_clustering(mut self) -> Clustering {
        let roots: Vec<u32> = (0..self.parent.len()).map(|v| self.find(v) as u32).collect();
        Clustering::from_u32(&roots)
    }
}

/// Handling of split triples whose endpoints end up co-clustered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Consistency {
    Ignore,
    #[default]
    Warn,
    Reject,
}

/// Clustering whose clusters are the connected components of the together
/// (`split == false`) triples. Only triples of one clustering should be given.
pub fn reconstruct<'a>(
    n: usize,
    triples: impl IntoIterator<Item = &'a StreamTriple>,
    consistency: Consistency,
) -> Result<Clustering> {
    let mut uf = UnionFind::new(n);
    let mut splits = Vec::new();
    for t in triples {
        let (u, v) = (t.u as usize, t.v as usize);
        if u >= n || v >= n || u == v {
            return Err(Error::Malformed(format!("bad pair ({u}, {v}) for n = {n}")));
        }
        if !t.split {
            uf.union(u, v);
        } else if consistency != Consistency::Ignore {
            splits.push((u, v));
        }
    }
    let contradictions = splits.iter().filter(|&&(u, v)| uf.find(u) == uf.find(v)).count();
    if contradictions > 0 {
        let msg = format!("{contradictions} split triples join points that are connected by together triples");
        match consistency {
            Consistency::Reject => return Err(Error::Inconsistent(msg)),
            _ => log::warn!("{msg}"),
        }
    }
    Ok(uf.into_clustering())
}
