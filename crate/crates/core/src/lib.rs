//! Fair consensus clustering.
//!
//! Given `m` clusterings of the same `n` colored points, find one fair
//! clustering (or `k` of them) minimizing the total pair-disagreement
//! distance to the inputs. Offline and single-pass streaming variants are
//! provided, together with brute-force references for small instances.

pub mod consensus;
pub mod corrclust;
pub mod error;
pub mod fairness;
pub mod format;
pub mod gen;
pub mod kstream;
pub mod oracle;
pub mod params;
pub mod partition;
pub mod seed;
pub mod streaming;

pub use consensus::{consensus_1median, consensus_kmedian, find_candidates, Candidate, Provenance, Solution};
pub use corrclust::{cluster_fitting, correlation_cost, fair_correlation, majority_graph, SignedGraph};
pub use error::{Error, Result};
pub use fairness::{closest_fair, two_color_repair, Backend, ColorTable, Fairness, FairnessConstraint};
pub use kstream::{stream_kmedian, KStreamParams, KStreamReport, KStreamSolution};
pub use params::{FrameworkParams, KMedianParams, Preset};
pub use partition::{dist, obj, u_set, weighted_obj, Clustering, InputSet, PairSet};
pub use seed::Seed;
