//! Exact-ratio fairness constraints and closest-fair-clustering backends.
//!
//! A cluster is fair when there is an integer `a >= 1` with
//! `count(cluster, c) == a * ratio[c]` for every color `c`. In particular a
//! cluster that misses a color is never fair unless there is only one color.

use serde::{Deserialize, Serialize};

use crate::corrclust::{exact_min_partition, SignedGraph};
use crate::error::{check_dims, Error, Result};
use crate::partition::{dist_unchecked, Clustering};

/// Largest `n` the exact backend will search.
pub const EXACT_GUARD: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorTable {
    color: Vec<u32>,
    counts: Vec<usize>,
}

impl ColorTable {
    /// Number of colors is taken as `max id + 1`.
    pub fn new(color: Vec<u32>) -> ColorTable {
        let c = color.iter().map(|&x| x as usize + 1).max().unwrap_or(0);
        Self::with_num_colors(color, c).expect("color ids are below max + 1")
    }

    pub fn with_num_colors(color: Vec<u32>, num_colors: usize) -> Result<ColorTable> {
        let mut counts = vec![0; num_colors];
        for (v, &x) in color.iter().enumerate() {
            let slot = counts
                .get_mut(x as usize)
                .ok_or_else(|| Error::Malformed(format!("point {v} has color {x} >= {num_colors}")))?;
            *slot += 1;
        }
        Ok(ColorTable { color, counts })
    }

    pub fn n(&self) -> usize {
        self.color.len()
    }

    pub fn num_colors(&self) -> usize {
        self.counts.len()
    }

    pub fn color(&self, v: usize) -> u32 {
        self.color[v]
    }

    pub fn colors(&self) -> &[u32] {
        &self.color
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per-color positive integer weights in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessConstraint {
    ratio: Vec<u32>,
}

impl FairnessConstraint {
    pub fn new(ratio: Vec<u32>) -> Result<FairnessConstraint> {
        if ratio.is_empty() || ratio.contains(&0) {
            return Err(Error::Argument(format!(
                "ratio weights must be positive, got {ratio:?}"
            )));
        }
        let g = ratio.iter().fold(0u64, |g, &r| gcd(g, r as u64));
        if g != 1 {
            return Err(Error::Argument(format!("ratio {ratio:?} is not in lowest terms")));
        }
        Ok(FairnessConstraint { ratio })
    }

    /// The global color ratio of a table, reduced to lowest terms.
    pub fn from_counts(counts: &[usize]) -> Result<FairnessConstraint> {
        let g = counts.iter().fold(0u64, |g, &x| gcd(g, x as u64));
        if g == 0 {
            return Err(Error::Infeasible("no colored points".into()));
        }
        Self::new(counts.iter().map(|&x| (x as u64 / g) as u32).collect())
    }

    pub fn ratio(&self) -> &[u32] {
        &self.ratio
    }

    /// `Some(a)` when `counts == a * ratio` with `a >= 1`.
    pub fn multiplier(&self, counts: &[usize]) -> Option<usize> {
        if counts.len() != self.ratio.len() {
            return None;
        }
        let a = counts[0] / self.ratio[0] as usize;
        (a >= 1 && counts.iter().zip(&self.ratio).all(|(&x, &r)| x == a * r as usize)).then_some(a)
    }

    pub fn cluster_is_fair(&self, counts: &[usize]) -> bool {
        self.multiplier(counts).is_some()
    }
}

impl std::fmt::Display for FairnessConstraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.ratio.iter().map(|r| r.to_string()).collect();
        write!(f, "{}", parts.join(":"))
    }
}

/// A color table together with a constraint its global counts satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fairness {
    colors: ColorTable,
    constraint: FairnessConstraint,
}

impl Fairness {
    /// Fails with an infeasibility error when no fair clustering exists.
    pub fn new(colors: ColorTable, constraint: FairnessConstraint) -> Result<Fairness> {
        if colors.num_colors() != constraint.ratio.len() {
            return Err(Error::Infeasible(format!(
                "{} colors but ratio {constraint} has {} weights",
                colors.num_colors(),
                constraint.ratio.len()
            )));
        }
        if constraint.multiplier(colors.counts()).is_none() {
            return Err(Error::Infeasible(format!(
                "global color counts {:?} do not follow ratio {constraint}",
                colors.counts()
            )));
        }
        Ok(Fairness { colors, constraint })
    }

    /// Constraint equal to the global ratio of `colors`.
    pub fn global_ratio(colors: ColorTable) -> Result<Fairness> {
        let constraint = FairnessConstraint::from_counts(colors.counts())?;
        Fairness::new(colors, constraint)
    }

    pub fn n(&self) -> usize {
        self.colors.n()
    }

    pub fn colors(&self) -> &ColorTable {
        &self.colors
    }

    pub fn constraint(&self) -> &FairnessConstraint {
        &self.constraint
    }

    pub fn num_colors(&self) -> usize {
        self.colors.num_colors()
    }

    /// Per-cluster color counts, indexed `[cluster][color]`.
    pub fn cluster_counts(&self, c: &Clustering) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.num_colors()]; c.num_clusters()];
        for (v, &l) in c.assign().iter().enumerate() {
            counts[l as usize][self.colors.color(v) as usize] += 1;
        }
        counts
    }

    pub fn is_fair(&self, c: &Clustering) -> Result<bool> {
        check_dims(self.n(), c.n())?;
        Ok(self
            .cluster_counts(c)
            .iter()
            .all(|counts| self.constraint.cluster_is_fair(counts)))
    }
}

/// Closest-fair-clustering backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Branch-and-bound over all fair partitions; optimal, `n <= EXACT_GUARD`.
    Exact,
    /// Two-color greedy surplus eviction and repacking.
    #[default]
    Repair,
}

impl Backend {
    /// Declared approximation factor, when one is proven.
    pub fn gamma_claim(self) -> Option<f64> {
        match self {
            Backend::Exact => Some(1.0),
            Backend::Repair => None,
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Repair => "repair",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "exact" => Ok(Backend::Exact),
            "repair" => Ok(Backend::Repair),
            other => Err(Error::Argument(format!("unknown backend {other:?}"))),
        }
    }
}

/// A fair clustering near `c` and its distance to `c`.
///
/// The exact backend returns a true closest fair clustering; the repair
/// backend returns some fair clustering (so its distance is an upper bound).
pub fn closest_fair(c: &Clustering, fairness: &Fairness, backend: Backend) -> Result<(Clustering, u64)> {
    check_dims(fairness.n(), c.n())?;
    let out = match backend {
        Backend::Exact => {
            if c.n() > EXACT_GUARD {
                return Err(Error::Capability(format!(
                    "exact closest-fair search is limited to n <= {EXACT_GUARD}, got n = {}",
                    c.n()
                )));
            }
            let graph = SignedGraph::consistent(c);
            exact_min_partition(&graph, Some(fairness))?.0
        }
        Backend::Repair => two_color_repair(c, fairness)?,
    };
    debug_assert!(fairness.is_fair(&out).unwrap_or(false));
    let d = dist_unchecked(c, &out);
    Ok((out, d))
}

/// Greedy two-color repair.
///
/// 1. Each cluster keeps its largest fair part: the lowest-id `a*p` points of
///    color 0 and `a*q` of color 1, with `a` as large as its counts allow.
/// 2. The rest is evicted. Clusters are visited fewest-evictions first (ties
///    by label) and evicted points are queued per color in that order.
/// 3. The queues are cut into atoms of `p` + `q` points. An atom joins the
///    kept part of the cluster most of its points came from (ties by label);
///    if that cluster kept nothing the atom becomes a cluster of its own.
pub fn two_color_repair(c: &Clustering, fairness: &Fairness) -> Result<Clustering> {
    check_dims(fairness.n(), c.n())?;
    match fairness.num_colors() {
        1 => return Ok(c.clone()),
        2 => {}
        k => {
            return Err(Error::Capability(format!(
                "two-color repair supports at most 2 colors, got {k}"
            )))
        }
    }
    let ratio = fairness.constraint().ratio();
    let (p, q) = (ratio[0] as usize, ratio[1] as usize);
    let colors = fairness.colors();

    let blocks = c.blocks();
    let mut kept = vec![false; blocks.len()];
    let mut evicted: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for (b, block) in blocks.iter().enumerate() {
        let (red, blue): (Vec<usize>, Vec<usize>) = block.iter().partition(|&&v| colors.color(v) == 0);
        let a = (red.len() / p).min(blue.len() / q);
        kept[b] = a > 0;
        let extra_red = red[a * p..].to_vec();
        let extra_blue = blue[a * q..].to_vec();
        if !extra_red.is_empty() || !extra_blue.is_empty() {
            evicted.push((b, extra_red, extra_blue));
        }
    }
    evicted.sort_by_key(|(b, r, u)| (r.len() + u.len(), *b));

    let origin: Vec<usize> = c.assign().iter().map(|&l| l as usize).collect();
    let mut labels = c.assign().to_vec();
    let red_queue: Vec<usize> = evicted.iter().flat_map(|(_, r, _)| r.iter().copied()).collect();
    let blue_queue: Vec<usize> = evicted.iter().flat_map(|(_, _, u)| u.iter().copied()).collect();
    debug_assert_eq!(red_queue.len() / p, blue_queue.len() / q);
    debug_assert_eq!(red_queue.len() % p, 0);

    let mut next_label = blocks.len();
    for (reds, blues) in red_queue.chunks(p).zip(blue_queue.chunks(q)) {
        let mut tally: Vec<(usize, usize)> = Vec::new();
        for &v in reds.iter().chain(blues) {
            match tally.iter_mut().find(|(b, _)| *b == origin[v]) {
                Some(slot) => slot.1 += 1,
                None => tally.push((origin[v], 1)),
            }
        }
        let (home, _) = tally
            .into_iter()
            .min_by_key(|&(b, cnt)| (std::cmp::Reverse(cnt), b))
            .expect("atoms are non-empty");
        let target = if kept[home] {
            home
        } else {
            next_label += 1;
            next_label - 1
        };
        for &v in reds.iter().chain(blues) {
            labels[v] = target as u32;
        }
    }
    Ok(Clustering::from_u32(&labels))
}
