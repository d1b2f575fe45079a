use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use fairconsensus::corrclust::correlation_clustering;
use fairconsensus::fairness::EXACT_GUARD;
use fairconsensus::format::{write_fcc, write_pcs};
use fairconsensus::gen::GenSpec;
use fairconsensus::kstream::{stream_kmedian, KStreamParams};
use fairconsensus::oracle::{opt_correlation, opt_fair_consensus, CORRELATION_GUARD};
use fairconsensus::streaming::{encode_all, st_1med, Consistency, OneMedParams, StreamHeader, StreamMode};
use fairconsensus::{
    closest_fair, consensus_kmedian, majority_graph, obj, Backend, Clustering, Error, Fairness, InputSet, Result, Seed,
};
use serde::Serialize;
use serde_json::json;

use crate::input::{load_inputs, open_stream};
use crate::report::{labels, ratio, PresetEcho, RunReport, Verification};
use crate::{emit, parse_ratio, to_json, BenchArgs, Constants, GenArgs, OracleArgs, RunArgs, RunMode};

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Serialize)]
struct GenSummary {
    n: usize,
    m: usize,
    ratio: Vec<u32>,
    centers: usize,
    noise: f64,
    seed: u64,
    planted: Vec<Vec<u32>>,
    fcc: Option<String>,
    pcs: Option<String>,
}

pub fn gen(a: &GenArgs) -> Result<()> {
    if a.fcc.is_none() && a.pcs.is_none() {
        return Err(Error::Argument("give --fcc and/or --pcs".into()));
    }
    let spec = GenSpec {
        n: a.n,
        m: a.m,
        ratio: parse_ratio(&a.ratio)?,
        centers: a.centers,
        noise: a.noise,
    };
    let inst = spec.generate(Seed(a.seed))?;
    if let Some(path) = &a.fcc {
        let mut w = BufWriter::new(File::create(path)?);
        write_fcc(&mut w, &inst.fairness, &inst.inputs)?;
        w.flush()?;
    }
    if let Some(path) = &a.pcs {
        let mode: StreamMode = a.stream_mode.into();
        let header = StreamHeader::new(a.n, a.m, inst.fairness.clone(), mode)?;
        let triples = encode_all(&inst.inputs, mode, Seed(a.seed));
        let mut w = BufWriter::new(File::create(path)?);
        write_pcs(&mut w, &header, &triples)?;
        w.flush()?;
    }
    let summary = GenSummary {
        n: a.n,
        m: a.m,
        ratio: spec.ratio.clone(),
        centers: a.centers,
        noise: a.noise,
        seed: a.seed,
        planted: labels(&inst.centers),
        fcc: a.fcc.as_ref().map(|p| p.display().to_string()),
        pcs: a.pcs.as_ref().map(|p| p.display().to_string()),
    };
    emit(a.out.as_deref(), &to_json(&summary)?)
}

pub fn run(a: &RunArgs) -> Result<()> {
    let start = Instant::now();
    let consistency: Consistency = a.consistency.into();
    let mut rep = match a.mode {
        RunMode::Offline => run_offline(a, consistency)?,
        RunMode::Stream if a.k == 1 => run_stream_one(a, consistency)?,
        RunMode::Stream => run_stream_k(a, consistency)?,
    };
    rep.preset = a.preset.map(PresetEcho::of).transpose()?;
    if a.verify {
        rep.verification = Some(verify(a, &rep, consistency)?);
    }
    if a.timing {
        rep.wall_ms = Some(millis(start));
    }
    emit(a.out.as_deref(), &to_json(&rep)?)
}

fn base_report(algorithm: &str, a: &RunArgs, n: usize, m: usize, objective: f64, centers: &[Clustering]) -> RunReport {
    RunReport {
        algorithm: algorithm.into(),
        k: a.k,
        seed: a.seed,
        backend: Some(a.backend.to_string()),
        n,
        m,
        objective,
        average: objective / m as f64,
        centers: labels(centers),
        provenance: Vec::new(),
        params: json!({}),
        preset: None,
        candidates: None,
        distinct_candidates: None,
        tuples_evaluated: None,
        peak_stored: BTreeMap::new(),
        space_budget: None,
        verification: None,
        wall_ms: None,
    }
}

fn run_offline(a: &RunArgs, consistency: Consistency) -> Result<RunReport> {
    let (f, inputs) = load_inputs(&a.input, consistency)?;
    let sol = consensus_kmedian(&inputs, a.k, &f, a.backend, Seed(a.seed))?;
    let name = if a.k == 1 { "offline-1median" } else { "offline-kmedian" };
    let mut rep = base_report(name, a, inputs.n(), inputs.m(), sol.objective, &sol.centers);
    rep.provenance = sol.provenance;
    rep.candidates = Some(sol.candidates);
    rep.distinct_candidates = Some(sol.distinct_candidates);
    rep.tuples_evaluated = Some(sol.tuples_evaluated);
    rep.peak_stored.insert("inputs".into(), inputs.m());
    Ok(rep)
}

fn run_stream_one(a: &RunArgs, consistency: Consistency) -> Result<RunReport> {
    let (header, triples) = open_stream(&a.input)?;
    let m = header.m;
    let mut params = if a.exhaustive {
        OneMedParams::exhaustive(m)
    } else {
        OneMedParams::default()
    };
    params.consistency = consistency;
    if let Some(s) = a.sample1 {
        params.sample1_count = Some(s);
    }
    if a.g.is_some() {
        params.g = a.g;
        if a.sample1.is_none() {
            params.sample1_count = None;
        }
    }
    if let Some(e) = a.epsilon {
        params.epsilon = e;
    }
    let sol = st_1med(&header, triples, &params, a.backend, Seed(a.seed))?;
    let r = &sol.report;
    let mut rep = base_report(
        "stream-1median",
        a,
        header.n,
        m,
        r.objective_estimate,
        std::slice::from_ref(&sol.center),
    );
    rep.provenance = vec![sol.provenance];
    rep.params = serde_json::to_value(params).expect("plain struct");
    rep.candidates = Some(r.candidates);
    rep.distinct_candidates = Some(r.distinct_candidates);
    rep.tuples_evaluated = Some(r.distinct_candidates as u64);
    rep.peak_stored.insert("sample1".into(), r.peak_store1);
    rep.peak_stored.insert("sample2".into(), r.peak_store2);
    rep.peak_stored.insert("total".into(), r.peak_stored_clusterings);
    rep.space_budget = Some(r.sample1_count + r.sample2_count);
    Ok(rep)
}

fn run_stream_k(a: &RunArgs, consistency: Consistency) -> Result<RunReport> {
    let (header, triples) = open_stream(&a.input)?;
    let m = header.m;
    let gamma = a.preset.map(|p| p.gamma()).or(a.backend.gamma_claim()).unwrap_or(1.0);
    let mut params = match (a.exhaustive, a.constants) {
        (true, _) => KStreamParams::exhaustive(m),
        (false, Constants::Desk) => KStreamParams::default(),
        (false, Constants::Analysis) => KStreamParams::analysis_constants(gamma),
    };
    params.consistency = consistency;
    if let Some(d) = a.delta {
        params.delta = d;
    }
    if let Some(l) = a.lambda {
        params.lambda = l;
    }
    if let Some(e) = a.epsilon {
        params.epsilon = e;
    }
    if a.coreset_cap.is_some() {
        params.coreset_cap = a.coreset_cap;
    }
    let sol = stream_kmedian(&header, triples, a.k, &params, a.backend, Seed(a.seed))?;
    let r = &sol.report;
    let mut rep = base_report("stream-kmedian", a, header.n, m, sol.objective_estimate, &sol.centers);
    rep.provenance = sol.provenance.clone();
    rep.params = serde_json::to_value(params).expect("plain struct");
    rep.candidates = Some(r.candidates);
    rep.distinct_candidates = Some(r.distinct_candidates);
    rep.tuples_evaluated = Some(r.tuples_evaluated);
    rep.peak_stored.insert("grid".into(), r.peak_grid);
    rep.peak_stored.insert("faraway".into(), r.peak_faraway);
    rep.peak_stored.insert("coreset".into(), r.peak_coreset);
    rep.peak_stored.insert("total".into(), r.peak_stored_clusterings);
    rep.space_budget = Some(r.space_budget);
    Ok(rep)
}

fn verify(a: &RunArgs, rep: &RunReport, consistency: Consistency) -> Result<Verification> {
    let (f, inputs) = load_inputs(&a.input, consistency)?;
    let centers: Vec<Clustering> = rep.centers.iter().map(|l| Clustering::from_labels(l)).collect();
    let full = obj(inputs.iter(), &centers)? as f64;
    let centers_fair = centers.iter().map(|c| f.is_fair(c)).collect::<Result<Vec<_>>>()?;
    if a.mode == RunMode::Offline && full != rep.objective {
        return Err(Error::Inconsistent(format!(
            "reported objective {} but the centers score {full}",
            rep.objective
        )));
    }
    let oracle = opt_fair_consensus(&inputs, &f, a.k).ok().map(|(_, v)| v as f64);
    Ok(Verification {
        full_objective: full,
        centers_fair: centers_fair.iter().all(|&x| x),
        gamma_emp: gamma_emp(&inputs, &f, a.backend)?,
        rho_emp: rho_emp(&inputs, Seed(a.seed))?,
        oracle_objective: oracle,
        ratio_vs_oracle: oracle.map(|o| ratio(full, o)),
    })
}

fn gamma_emp(inputs: &InputSet, f: &Fairness, backend: Backend) -> Result<Option<f64>> {
    if inputs.n() > EXACT_GUARD {
        return Ok(None);
    }
    let mut worst: f64 = 1.0;
    for c in inputs.iter() {
        let (_, got) = closest_fair(c, f, backend)?;
        let (_, best) = closest_fair(c, f, Backend::Exact)?;
        worst = worst.max(ratio(got as f64, best as f64));
    }
    Ok(Some(worst))
}

/// Over the first few input triples in lexicographic order.
fn rho_emp(inputs: &InputSet, seed: Seed) -> Result<Option<f64>> {
    const TRIPLES: usize = 20;
    if inputs.n() > CORRELATION_GUARD || inputs.m() < 3 {
        return Ok(None);
    }
    let mut worst: f64 = 1.0;
    let m = inputs.m();
    let triples = (0..m)
        .flat_map(|i| (i + 1..m).flat_map(move |j| (j + 1..m).map(move |k| (i, j, k))))
        .take(TRIPLES);
    for (i, j, k) in triples {
        let g = majority_graph(&[inputs[i].clone(), inputs[j].clone(), inputs[k].clone()])?;
        let (_, cost) = correlation_clustering(&g, seed);
        let (_, opt) = opt_correlation(&g)?;
        worst = worst.max(ratio(cost as f64, opt as f64));
    }
    Ok(Some(worst))
}

pub fn oracle(a: &OracleArgs) -> Result<()> {
    let start = Instant::now();
    let (f, inputs) = load_inputs(&a.input, Consistency::Warn)?;
    let (centers, opt) = opt_fair_consensus(&inputs, &f, a.k)?;
    let rep = RunReport {
        algorithm: "oracle".into(),
        k: a.k,
        seed: 0,
        backend: None,
        n: inputs.n(),
        m: inputs.m(),
        objective: opt as f64,
        average: opt as f64 / inputs.m() as f64,
        centers: labels(&centers),
        provenance: Vec::new(),
        params: json!({}),
        preset: None,
        candidates: None,
        distinct_candidates: None,
        tuples_evaluated: None,
        peak_stored: BTreeMap::new(),
        space_budget: None,
        verification: None,
        wall_ms: a.timing.then(|| millis(start)),
    };
    emit(a.out.as_deref(), &to_json(&rep)?)
}

pub fn bench(a: &BenchArgs) -> Result<()> {
    let spec = GenSpec {
        n: a.n,
        m: a.m,
        ratio: parse_ratio(&a.ratio)?,
        centers: a.centers,
        noise: a.noise,
    };
    let mut out = String::from("instance,algo,objective,ratio_vs_oracle,peak_store,millis\n");
    for i in 0..a.instances {
        let seed = Seed(a.seed).at(i as u64);
        let inst = spec.generate(seed)?;
        let opt = opt_fair_consensus(&inst.inputs, &inst.fairness, a.k)
            .ok()
            .map(|(_, v)| v as f64);
        let mut row = |algo: &str, objective: f64, peak: usize, start: Instant| {
            let r = opt.map(|o| format!("{:.6}", ratio(objective, o))).unwrap_or_default();
            let ms = if a.timing {
                format!("{:.3}", millis(start))
            } else {
                String::new()
            };
            out.push_str(&format!("{i},{algo},{objective},{r},{peak},{ms}\n"));
        };

        let start = Instant::now();
        let sol = consensus_kmedian(&inst.inputs, a.k, &inst.fairness, a.backend, seed)?;
        row("offline", sol.objective, a.m, start);

        let start = Instant::now();
        let header = StreamHeader::new(a.n, a.m, inst.fairness.clone(), StreamMode::Contiguous)?;
        let triples = encode_all(&inst.inputs, StreamMode::Contiguous, seed);
        let (centers, peak) = if a.k == 1 {
            let s = st_1med(
                &header,
                triples.into_iter().map(Ok),
                &OneMedParams::default(),
                a.backend,
                seed,
            )?;
            (vec![s.center], s.report.peak_stored_clusterings)
        } else {
            let s = stream_kmedian(
                &header,
                triples.into_iter().map(Ok),
                a.k,
                &KStreamParams::default(),
                a.backend,
                seed,
            )?;
            (s.centers, s.report.peak_stored_clusterings)
        };
        let objective = obj(inst.inputs.iter(), &centers)? as f64;
        row("stream", objective, peak, start);

        if let Some(o) = opt {
            row("oracle", o, a.m, Instant::now());
        }
    }
    emit(a.out.as_deref(), &out)
}
