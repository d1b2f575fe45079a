//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fairconsensus::format::{write_pcs, PcsReader};
use fairconsensus::gen::{random_fair, GenSpec};
use fairconsensus::kstream::{default_net_cap, FarawaySampler, GridCap, KStreamParams};
use fairconsensus::oracle::{
    enum_fair_partitions, enum_partitions, faraway_violations, opt_fair_consensus, opt_fair_correlation,
};
use fairconsensus::streaming::{encode_all, reconstruct, st_1med, Consistency, OneMedParams, StreamHeader, StreamMode};
use fairconsensus::{
    closest_fair, consensus_1median, consensus_kmedian, correlation_cost, dist, fair_correlation, obj, stream_kmedian,
    u_set, weighted_obj, Backend, Clustering, ColorTable, Fairness, InputSet, Seed, SignedGraph,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "distance correctness",
            limit: Some(Duration::from_secs(10)),
            check: distance,
        },
        Criterion {
            id: 2,
            name: "u-set identity",
            limit: None,
            check: u_set_identity,
        },
        Criterion {
            id: 3,
            name: "closest-fair exactness",
            limit: Some(Duration::from_secs(120)),
            check: closest_fair_exact,
        },
        Criterion {
            id: 4,
            name: "offline 1-median bound",
            limit: Some(Duration::from_secs(300)),
            check: offline_one_median,
        },
        Criterion {
            id: 5,
            name: "fair-correlation composition",
            limit: None,
            check: composition,
        },
        Criterion {
            id: 6,
            name: "offline k-median bound",
            limit: Some(Duration::from_secs(600)),
            check: offline_k_median,
        },
        Criterion {
            id: 7,
            name: "streaming degenerate equivalence",
            limit: None,
            check: degenerate_equivalence,
        },
        Criterion {
            id: 8,
            name: "streaming statistical bound",
            limit: Some(Duration::from_secs(300)),
            check: statistical_bound,
        },
        Criterion {
            id: 9,
            name: "space accounting",
            limit: None,
            check: space_accounting,
        },
        Criterion {
            id: 10,
            name: "coreset contract",
            limit: Some(Duration::from_secs(120)),
            check: coreset_contract,
        },
        Criterion {
            id: 11,
            name: "faraway contract",
            limit: None,
            check: faraway_contract,
        },
        Criterion {
            id: 12,
            name: "round trip and determinism",
            limit: None,
            check: round_trip_determinism,
        },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(d), Some(limit)) if took > limit => Err(format!("{d}; over the {} s limit", limit.as_secs())),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:>2} {:<34} {tag}  {detail} ({:.2} s)",
            c.id,
            c.name,
            took.as_secs_f64()
        );
        failed += result.is_err() as u32;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_labels(rng: &mut impl Rng, n: usize) -> Vec<u32> {
    let k = rng.gen_range(1..=n as u32);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// Pairs co-clustered in exactly one of the two label vectors.
fn naive_dist(a: &[u32], b: &[u32]) -> u64 {
    let mut d = 0;
    for u in 0..a.len() {
        for v in u + 1..a.len() {
            d += ((a[u] == a[v]) != (b[u] == b[v])) as u64;
        }
    }
    d
}

fn balanced(n: usize, m: usize, centers: usize, noise: f64, seed: u64) -> (Fairness, InputSet) {
    let inst = GenSpec {
        centers,
        noise,
        ..GenSpec::balanced(n, m)
    }
    .generate(Seed(seed))
    .unwrap();
    (inst.fairness, inst.inputs)
}

fn contiguous(f: &Fairness, inputs: &InputSet) -> (StreamHeader, Vec<fairconsensus::streaming::StreamTriple>) {
    let header = StreamHeader::new(inputs.n(), inputs.m(), f.clone(), StreamMode::Contiguous).unwrap();
    (header, encode_all(inputs, StreamMode::Contiguous, Seed(0)))
}

fn distance() -> Outcome {
    let mut rng = Seed(1).rng();
    let mut bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=50);
        let (a, b, c) = (
            random_labels(&mut rng, n),
            random_labels(&mut rng, n),
            random_labels(&mut rng, n),
        );
        let (ca, cb, cc) = (
            Clustering::from_u32(&a),
            Clustering::from_u32(&b),
            Clustering::from_u32(&c),
        );
        let (ab, ba) = (dist(&ca, &cb).unwrap(), dist(&cb, &ca).unwrap());
        let (ac, bc) = (dist(&ca, &cc).unwrap(), dist(&cb, &cc).unwrap());
        if ab != naive_dist(&a, &b) || ab != ba || ac > ab + bc {
            bad += 1;
        }
    }
    ensure(bad == 0, format!("500 pairs, {bad} mismatches"))
}

fn u_set_identity() -> Outcome {
    let mut rng = Seed(2).rng();
    let mut bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=20);
        let (a, b, r) = (
            random_labels(&mut rng, n),
            random_labels(&mut rng, n),
            random_labels(&mut rng, n),
        );
        let (ca, cb, cr) = (
            Clustering::from_u32(&a),
            Clustering::from_u32(&b),
            Clustering::from_u32(&r),
        );
        let (ua, ub) = (u_set(&ca, &cr).unwrap(), u_set(&cb, &cr).unwrap());
        // Independent count of each side against the reference.
        let sizes_agree = ua.len() as u64 == naive_dist(&a, &r) && ub.len() as u64 == naive_dist(&b, &r);
        let lhs = dist(&ca, &cb).unwrap() as usize;
        if !sizes_agree || lhs + 2 * ua.intersection_len(&ub) != ua.len() + ub.len() {
            bad += 1;
        }
    }
    ensure(bad == 0, format!("500 triples, {bad} mismatches"))
}

fn closest_fair_exact() -> Outcome {
    let (mut tables, mut checked, mut bad) = (0, 0u64, 0);
    for n in 2..=7usize {
        let partitions: Vec<Clustering> = enum_partitions(n).unwrap().collect();
        for mask in 1u32..(1 << n) - 1 {
            let colors: Vec<u32> = (0..n).map(|v| mask >> v & 1).collect();
            let Ok(f) = Fairness::global_ratio(ColorTable::new(colors)) else {
                continue;
            };
            tables += 1;
            let fair: Vec<Clustering> = enum_fair_partitions(&f).unwrap().collect();
            for c in &partitions {
                let brute = fair.iter().map(|g| dist(c, g).unwrap()).min().unwrap();
                let (exact, d) = closest_fair(c, &f, Backend::Exact).unwrap();
                let (rep, dr) = closest_fair(c, &f, Backend::Repair).unwrap();
                let exact_ok = d == brute && f.is_fair(&exact).unwrap() && dist(c, &exact).unwrap() == d;
                let repair_ok = f.is_fair(&rep).unwrap() && dr >= d && dist(c, &rep).unwrap() == dr;
                bad += !(exact_ok && repair_ok) as u32;
                checked += 1;
            }
        }
    }
    ensure(
        bad == 0,
        format!("{tables} tables, {checked} clusterings, {bad} violations"),
    )
}

fn offline_one_median() -> Outcome {
    let (mut worst, mut bad) = (0.0f64, 0);
    for s in 0..200u64 {
        let n = [2, 4, 6][s as usize % 3];
        let m = 2 + (s as usize / 3) % 5;
        let noise = [0.2, 0.5, 0.8][(s as usize / 15) % 3];
        let (f, inputs) = balanced(n, m, 1 + s as usize % 2, noise, s);
        let sol = consensus_1median(&inputs, &f, Backend::Exact, Seed(s)).unwrap();
        let (_, opt) = opt_fair_consensus(&inputs, &f, 1).unwrap();
        let r = ratio(sol.objective, opt as f64);
        worst = worst.max(r);
        bad += (sol.objective > 2.92 * opt as f64) as u32;
    }
    ensure(
        bad == 0,
        format!("200 instances, {bad} violations, worst ratio {worst:.3}"),
    )
}

fn ratio(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else if x == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn composition() -> Outcome {
    let (mut worst, mut bad) = (0.0f64, 0);
    for s in 0..200u64 {
        let n = [2, 4, 6][s as usize % 3];
        let mut rng = Seed(s).rng();
        let mut colors: Vec<u32> = (0..n as u32).map(|v| v % 2).collect();
        colors.shuffle(&mut rng);
        let f = Fairness::global_ratio(ColorTable::new(colors)).unwrap();
        let p = rng.gen_range(0.1..0.9);
        let g = SignedGraph::random(n, p, &mut rng);
        let c = fair_correlation(&g, &f, Backend::Exact, Seed(s)).unwrap();
        let (_, opt) = opt_fair_correlation(&g, &f).unwrap();
        let cost = correlation_cost(&g, &c).unwrap();
        worst = worst.max(ratio(cost as f64, opt as f64));
        bad += (!f.is_fair(&c).unwrap() || cost > 3 * opt) as u32;
    }
    ensure(
        bad == 0,
        format!("200 graphs, {bad} violations, worst ratio {worst:.3}"),
    )
}

fn offline_k_median() -> Outcome {
    let (mut worst, mut bad) = (0.0f64, 0);
    for s in 0..100u64 {
        let n = [4, 6][s as usize % 2];
        let m = 3 + (s as usize / 2) % 4;
        let (f, inputs) = balanced(n, m, 2, [0.3, 0.6][(s as usize / 8) % 2], 1000 + s);
        let sol = consensus_kmedian(&inputs, 2, &f, Backend::Exact, Seed(s)).unwrap();
        let (_, opt) = opt_fair_consensus(&inputs, &f, 2).unwrap();
        worst = worst.max(ratio(sol.objective, opt as f64));
        bad += (sol.objective > 2.92 * opt as f64 || sol.centers.len() != 2) as u32;
    }
    ensure(
        bad == 0,
        format!("100 instances, {bad} violations, worst ratio {worst:.3}"),
    )
}

fn degenerate_equivalence() -> Outcome {
    let mut bad = Vec::new();
    for s in 0..50u64 {
        let n = [4, 6, 8][s as usize % 3];
        let m = 3 + s as usize % 6;
        let (f, inputs) = balanced(n, m, 2, 0.4, 2000 + s);
        let mode = if s % 2 == 0 {
            StreamMode::General
        } else {
            StreamMode::Contiguous
        };
        let header = StreamHeader::new(n, m, f.clone(), mode).unwrap();
        let triples = encode_all(&inputs, mode, Seed(s));
        let st = st_1med(
            &header,
            triples.into_iter().map(Ok),
            &OneMedParams::exhaustive(m),
            Backend::Repair,
            Seed(s),
        )
        .unwrap();
        let off = consensus_1median(&inputs, &f, Backend::Repair, Seed(s)).unwrap();
        let st_obj = obj(inputs.iter(), std::slice::from_ref(&st.center)).unwrap() as f64;
        if st_obj != off.objective || st.report.evaluation_value != off.objective {
            bad.push(format!("1-median seed {s}"));
        }

        let (header, triples) = contiguous(&f, &inputs);
        for k in [1, 2] {
            let params = KStreamParams::exhaustive(m);
            let ks = stream_kmedian(
                &header,
                triples.iter().copied().map(Ok),
                k,
                &params,
                Backend::Repair,
                Seed(s),
            )
            .unwrap();
            let off = consensus_kmedian(&inputs, k, &f, Backend::Repair, Seed(s)).unwrap();
            let ks_obj = obj(inputs.iter(), &ks.centers).unwrap() as f64;
            if ks_obj != off.objective || ks.objective_estimate != off.objective {
                bad.push(format!("k={k} seed {s}"));
            }
        }
    }
    ensure(
        bad.is_empty(),
        format!("50 instances x (1-median, k=1, k=2), mismatches: {bad:?}"),
    )
}

fn statistical_bound() -> Outcome {
    let params = OneMedParams::default();
    let eps = params.epsilon;
    let (mut over_candidates, mut near_offline, mut worst) = (0, 0, 0.0f64);
    for s in 0..20u64 {
        let (f, inputs) = balanced(16, 200, 1, 0.2, 3000 + s);
        let (header, triples) = contiguous(&f, &inputs);
        let st = st_1med(&header, triples.into_iter().map(Ok), &params, Backend::Repair, Seed(s)).unwrap();
        let mine = obj(inputs.iter(), std::slice::from_ref(&st.center)).unwrap() as f64;
        let best = st
            .candidates
            .iter()
            .map(|c| obj(inputs.iter(), std::slice::from_ref(c)).unwrap())
            .min()
            .unwrap() as f64;
        over_candidates += (mine > (1.0 + eps) / (1.0 - eps) * best) as u32;
        let off = consensus_1median(&inputs, &f, Backend::Repair, Seed(s)).unwrap();
        let r = ratio(mine, off.objective);
        worst = worst.max(r);
        near_offline += (r <= 1.2) as u32;
    }
    ensure(
        over_candidates == 0 && near_offline >= 18,
        format!(
            "20 instances, {over_candidates} over the candidate bound, {near_offline}/20 within 1.2 of offline, worst {worst:.3}"
        ),
    )
}

fn space_accounting() -> Outcome {
    let mut bad = Vec::new();
    let mut runs = 0;
    for (s, m) in [(0u64, 40usize), (1, 120), (2, 300), (3, 7)] {
        let (f, inputs) = balanced(10, m, 2, 0.3, 4000 + s);
        let (header, triples) = contiguous(&f, &inputs);
        for params in [
            OneMedParams::default(),
            OneMedParams {
                g: Some(3.0),
                epsilon: 0.5,
                ..OneMedParams::default()
            },
        ] {
            let r = st_1med(
                &header,
                triples.iter().copied().map(Ok),
                &params,
                Backend::Repair,
                Seed(s),
            )
            .unwrap()
            .report;
            runs += 1;
            if r.peak_store1 > r.sample1_count
                || r.peak_store2 > r.sample2_count
                || r.peak_stored_clusterings > r.sample1_count + r.sample2_count
            {
                bad.push(format!("1-median m={m}"));
            }
        }
    }
    let tight = KStreamParams {
        grid_cap: GridCap::Fixed(3),
        net_cap: Some(2),
        reservoir_cap: Some(2),
        coreset_cap: Some(8),
        ..KStreamParams::default()
    };
    for s in 0..4u64 {
        let (f, inputs) = balanced(8, 60, 3, 0.5, 5000 + s);
        let (header, triples) = contiguous(&f, &inputs);
        for (label, params) in [("default", KStreamParams::default()), ("tight", tight)] {
            let r = stream_kmedian(
                &header,
                triples.iter().copied().map(Ok),
                2,
                &params,
                Backend::Repair,
                Seed(s),
            )
            .unwrap()
            .report;
            runs += 1;
            let grid_cap = r.grid_cap.unwrap_or(r.clusterings_seen);
            let ledger = grid_cap * r.grid_cells + r.faraway_cap + r.coreset_budget;
            if r.peak_grid > grid_cap * r.grid_cells
                || r.peak_faraway > r.faraway_cap
                || r.peak_coreset > r.coreset_budget
                || r.peak_stored_clusterings > ledger
                || ledger != r.space_budget
            {
                bad.push(format!("k-median {label} seed {s}"));
            }
        }
    }
    ensure(bad.is_empty(), format!("{runs} runs, over budget: {bad:?}"))
}

fn coreset_contract() -> Outcome {
    let eps = 0.25;
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, cap) in [("default cap", None), ("cap 20", Some(20))] {
        let mut counts = Vec::new();
        for s in 0..5u64 {
            let (f, inputs) = balanced(8, 40, 2, 0.3, 6000 + s);
            let (header, triples) = contiguous(&f, &inputs);
            let params = KStreamParams {
                epsilon: eps,
                coreset_cap: cap,
                ..KStreamParams::default()
            };
            let sol = stream_kmedian(
                &header,
                triples.into_iter().map(Ok),
                2,
                &params,
                Backend::Repair,
                Seed(s),
            )
            .unwrap();
            let mut rng = Seed(s).derive("tuples").rng();
            let mut within = 0;
            for _ in 0..50 {
                let y = [random_fair(&f, &mut rng), random_fair(&f, &mut rng)];
                let full = obj(inputs.iter(), &y).unwrap() as f64;
                let est = weighted_obj(sol.coreset.iter().map(|w| (&w.clustering, w.weight)), &y).unwrap();
                within += ((est - full).abs() <= eps * full) as u32;
            }
            ok &= within >= 48;
            counts.push(format!("{within}"));
        }
        lines.push(format!("{label}: {}/50", counts.join(",")));
    }
    ensure(ok, format!("m=40 n=8 k=2 eps=0.25, {}", lines.join("; ")))
}

fn faraway_contract() -> Outcome {
    let p = KStreamParams::default();
    let (mut runs, mut bad, mut kept, mut seen) = (0, 0, 0, 0);
    // Caps below the derived one sit outside the guarantee; counted, not gated.
    let mut undersized = 0;
    for s in 0..20u64 {
        let n = [4, 6][s as usize % 2];
        let m = 2 + s as usize % 5;
        let (f, inputs) = balanced(n, m, 2, 0.5, 7000 + s);
        for k in [1, 2] {
            let Ok((centers, _)) = opt_fair_consensus(&inputs, &f, k) else {
                continue;
            };
            let net = default_net_cap(k, p.kappa, p.rho_f);
            for (net_cap, reservoir) in [(net, net), (1, 1)] {
                let mut sampler = FarawaySampler::new(n, net_cap, reservoir, Seed(s)).unwrap();
                for (i, c) in inputs.iter().enumerate() {
                    sampler.update(i, c);
                }
                let picked = sampler.output();
                let sample: Vec<Clustering> = picked.iter().map(|&j| inputs[j].clone()).collect();
                let v = faraway_violations(&inputs, &centers, &sample, p.kappa, p.rho_f).unwrap();
                if net_cap == net {
                    bad += v;
                    runs += 1;
                    kept += picked.len();
                    seen += m;
                } else {
                    undersized += v;
                }
            }
        }
    }
    ensure(
        bad == 0,
        format!(
            "{runs} runs at the derived caps, {bad} super-clusters without a near sample, {kept}/{seen} inputs sampled; caps (1, 1): {undersized} misses"
        ),
    )
}

fn round_trip_determinism() -> Outcome {
    let mut bad = Vec::new();
    let mut rng = Seed(12).rng();
    for s in 0..100u64 {
        let n = 2 * rng.gen_range(1..=15);
        let c = Clustering::from_u32(&random_labels(&mut rng, n));
        let f = Fairness::global_ratio(ColorTable::new((0..n as u32).map(|v| v % 2).collect())).unwrap();
        for mode in [StreamMode::Contiguous, StreamMode::General] {
            let header = StreamHeader::new(n, 1, f.clone(), mode).unwrap();
            let mut bytes = Vec::new();
            write_pcs(
                &mut bytes,
                &header,
                &encode_all(std::slice::from_ref(&c), mode, Seed(s)),
            )
            .unwrap();
            let triples: Vec<_> = PcsReader::new(bytes.as_slice())
                .unwrap()
                .collect::<Result<_, _>>()
                .unwrap();
            if reconstruct(n, triples.iter(), Consistency::Reject).unwrap() != c {
                bad.push(format!("round trip {s} {}", mode.name()));
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let path = |name: &str| d.join(name).display().to_string();
    let (fcc, pcs, gpcs) = (path("i.fcc"), path("i.pcs"), path("g.pcs"));
    let commands: Vec<Vec<String>> = [
        vec![
            "gen",
            "--n",
            "8",
            "--m",
            "24",
            "--centers",
            "2",
            "--seed",
            "5",
            "--fcc",
            &fcc,
            "--pcs",
            &pcs,
        ],
        vec![
            "gen",
            "--n",
            "6",
            "--m",
            "10",
            "--seed",
            "6",
            "--pcs",
            &gpcs,
            "--stream-mode",
            "general",
        ],
        vec!["run", "--input", &fcc, "--k", "2", "--seed", "3", "--verify"],
        vec!["run", "--input", &pcs, "--mode", "stream", "--seed", "3", "--verify"],
        vec!["run", "--input", &gpcs, "--mode", "stream", "--seed", "4"],
        vec![
            "run", "--input", &pcs, "--mode", "stream", "--k", "2", "--seed", "3", "--verify",
        ],
        vec![
            "run",
            "--input",
            &pcs,
            "--mode",
            "stream",
            "--k",
            "2",
            "--coreset-cap",
            "6",
            "--seed",
            "3",
        ],
        vec!["oracle", "--input", &fcc, "--k", "2"],
        vec!["bench", "--instances", "2", "--m", "12", "--seed", "9"],
        vec!["bench", "--instances", "1", "--m", "12", "--k", "2", "--seed", "9"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    let files = [fcc.clone(), pcs.clone(), gpcs.clone()];
    let snapshot = || -> Vec<Vec<u8>> { files.iter().map(|p| std::fs::read(p).unwrap_or_default()).collect() };

    let mut first = Vec::new();
    for args in &commands {
        first.push(fcc_bin(args, d));
    }
    let files_first = snapshot();
    for (args, before) in commands.iter().zip(&first) {
        let again = fcc_bin(args, d);
        if &again != before {
            bad.push(format!("rerun differs: {}", args[..2].join(" ")));
        }
        if !before.0 {
            bad.push(format!("failed: {}", args.join(" ")));
        }
    }
    if snapshot() != files_first {
        bad.push("generated files differ".into());
    }
    ensure(
        bad.is_empty(),
        format!(
            "100 clusterings x 2 modes, {} commands rerun, problems: {bad:?}",
            commands.len()
        ),
    )
}

fn fcc_bin(args: &[String], cwd: &Path) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_fcc"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    (out.status.success(), out.stdout)
}
