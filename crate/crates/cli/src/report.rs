use std::collections::BTreeMap;

use fairconsensus::params::{eta, RHO_REFERENCE};
use fairconsensus::{Clustering, Preset, Provenance, Result};
use serde::{Deserialize, Serialize};

/// Machine-readable result of `run` and `oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub k: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    pub n: usize,
    pub m: usize,
    /// Objective the algorithm optimized: exact offline, estimated when
    /// streaming.
    pub objective: f64,
    /// `objective / m`.
    pub average: f64,
    pub centers: Vec<Vec<u32>>,
    #[serde(default)]
    pub provenance: Vec<Provenance>,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinct_candidates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples_evaluated: Option<u64>,
    /// Peak number of clusterings held, per store.
    #[serde(default)]
    pub peak_stored: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

/// Constants and guarantees of a named parameter preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetEcho {
    pub name: String,
    pub gamma: f64,
    pub rho: f64,
    pub offline_ratio: f64,
    pub streaming_ratio: f64,
    pub kmedian_ratio: f64,
}

impl PresetEcho {
    pub fn of(p: Preset) -> Result<PresetEcho> {
        let gamma = p.gamma();
        let e = eta(gamma, RHO_REFERENCE);
        Ok(PresetEcho {
            name: p.name().into(),
            gamma,
            rho: RHO_REFERENCE,
            offline_ratio: p.offline().offline_ratio(gamma, e),
            streaming_ratio: p.streaming().streaming_ratio(gamma, e)?,
            kmedian_ratio: p.kmedian().ratio(gamma, RHO_REFERENCE)?,
        })
    }
}

/// Re-evaluation of the emitted centers against the full input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub full_objective: f64,
    pub centers_fair: bool,
    /// Worst closest-fair distance of the backend over the exact one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_emp: Option<f64>,
    /// Worst correlation cost of the solver over the optimum, on input
    /// triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_emp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_vs_oracle: Option<f64>,
}

pub fn labels(centers: &[Clustering]) -> Vec<Vec<u32>> {
    centers.iter().map(|c| c.assign().to_vec()).collect()
}

/// `x / y`, with `0 / 0 = 1` and a zero denominator otherwise read as 1.
pub fn ratio(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else if x == 0.0 {
        1.0
    } else {
        x
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

pub fn error_json(e: &fairconsensus::Error) -> String {
    let body = ErrorReport {
        error: ErrorBody {
            kind: e.kind(),
            message: e.to_string(),
        },
    };
    serde_json::to_string(&body).expect("plain strings serialize")
}
