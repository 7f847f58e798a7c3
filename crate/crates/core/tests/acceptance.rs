//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! Oracles here are deliberately naive and share no code with the paths they
//! check beyond the public data types.

use std::collections::{BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tgrab_core::harness::ProtocolConfig;
use tgrab_core::io::{read_ctdg_events, EDGES_FILE, EVENTS_FILE, MANIFEST_FILE};
use tgrab_core::tasks::{LR_SOURCE_NODE, LR_TARGET_NODE};
use tgrab_core::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn gen(spec: &TaskSpec) -> Result<DynamicGraph, String> {
    generate(spec).map_err(|e| format!("{spec:?}: {e}"))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
    Ok(())
}

// 1 ------------------------------------------------------------------------

const PDET_COUNTING: [(usize, usize); 8] = [
    (1, 96),
    (2, 192),
    (4, 384),
    (8, 768),
    (16, 1_536),
    (32, 3_072),
    (64, 6_144),
    (128, 12_288),
];
const PDET_MEMORIZING: [(usize, usize); 8] = [
    (2, 96),
    (4, 192),
    (8, 384),
    (16, 768),
    (32, 1_536),
    (64, 3_072),
    (128, 6_144),
    (256, 12_288),
];
const CE_TIMESTEPS: [(usize, usize); 5] = [
    (1, 4_001),
    (4, 4_004),
    (16, 4_016),
    (64, 4_064),
    (256, 4_256),
];
const LR_LAGS: [usize; 4] = [1, 4, 16, 32];
const LR_DISTS: [u32; 5] = [1, 2, 4, 8, 16];
const LR_TIMESTEPS: [usize; 4] = [4_001, 4_004, 4_016, 4_032];
const LR_EDGES: [[u64; 5]; 4] = [
    [48_006, 72_012, 120_024, 216_048, 408_096],
    [48_024, 72_048, 120_096, 216_192, 408_384],
    [48_096, 72_192, 120_384, 216_768, 409_536],
    [48_192, 72_384, 120_768, 217_536, 411_072],
];

fn timestep_counts() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for (n, want) in PDET_COUNTING {
        let g = gen(&TaskSpec::periodic_det(2, n, 48, 1))?;
        ensure!(
            g.num_timesteps() == want,
            "Pdet(2,{n}): T={} want {want}",
            g.num_timesteps()
        );
        ensure!(want == 48 * 2 * n, "table row Pdet(2,{n})");
        checked += 1;
    }
    for (k, want) in PDET_MEMORIZING {
        let g = gen(&TaskSpec::periodic_det(k, 1, 48, 1))?;
        ensure!(
            g.num_timesteps() == want,
            "Pdet({k},1): T={} want {want}",
            g.num_timesteps()
        );
        checked += 1;
    }
    for (lag, want) in CE_TIMESTEPS {
        let g = gen(&TaskSpec::cause_effect(lag, 1))?;
        ensure!(
            g.num_timesteps() == want,
            "CE({lag}): T={} want {want}",
            g.num_timesteps()
        );
        ensure!(g.num_nodes() == 101, "CE node count {}", g.num_nodes());
        checked += 1;
    }
    for (i, &lag) in LR_LAGS.iter().enumerate() {
        for &d in &LR_DISTS {
            let g = gen(&TaskSpec::long_range(lag, d, 1))?;
            ensure!(
                g.num_timesteps() == LR_TIMESTEPS[i],
                "LR({lag},{d}): T={}",
                g.num_timesteps()
            );
            ensure!(g.num_nodes() == 102, "LR node count {}", g.num_nodes());
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{checked} task instances in {:?}", start.elapsed()))
}

// 2 ------------------------------------------------------------------------

fn lr_edge_counts() -> Outcome {
    for (i, &lag) in LR_LAGS.iter().enumerate() {
        for (j, &d) in LR_DISTS.iter().enumerate() {
            let g = gen(&TaskSpec::long_range(lag, d, 2))?;
            let t = g.num_timesteps() as u64;
            let (p, d64, l) = (3u64, d as u64, lag as u64);
            let closed = 2 * (t * p * d64 + (t - l) * p);
            let got = g.directed_edge_count();
            ensure!(
                got == LR_EDGES[i][j] && closed == LR_EDGES[i][j],
                "LR(l={lag},d={d}): generated {got}, closed form {closed}, table {}",
                LR_EDGES[i][j]
            );
        }
    }
    Ok("20/20 cells exact".into())
}

// 3 ------------------------------------------------------------------------

fn er_sbm_statistics() -> Outcome {
    let start = Instant::now();
    let er = ErParams::new(100, 0.01).map_err(|e| e.to_string())?;
    let draws = 10_000u64;
    let total = (0..draws)
        .map(|i| {
            let s = RngStream::new(
                3,
                StreamId::Custom {
                    domain: 7,
                    index: i,
                },
            );
            sample_er(&er, &s).map(|g| g.num_edges())
        })
        .sum::<tgrab_core::Result<usize>>()
        .map_err(|e| e.to_string())?;
    let er_mean = total as f64 / draws as f64;
    // 0.01 * C(100, 2)
    let er_expected = 0.01 * (100.0 * 99.0 / 2.0);
    ensure!((er_expected - 49.5f64).abs() < 1e-12, "ER oracle");
    ensure!((er_mean - er_expected).abs() <= 1.0, "ER mean {er_mean}");

    let part = random_equal_partition(100, 3, &RngStream::new(3, StreamId::Partition(0)))
        .map_err(|e| e.to_string())?;
    ensure!(part.sizes() == vec![33, 33, 34], "sizes {:?}", part.sizes());
    // Pair counts enumerated directly from block membership.
    let (mut intra, mut inter) = (0u64, 0u64);
    for u in 0..100u32 {
        for v in u + 1..100 {
            if part.block_of(u) == part.block_of(v) {
                intra += 1;
            } else {
                inter += 1;
            }
        }
    }
    let sbm_expected = 0.9 * intra as f64 + 0.01 * inter as f64;
    ensure!(
        (sbm_expected - 1488.63).abs() < 1e-9,
        "SBM oracle {sbm_expected}"
    );
    let sbm = SbmParams::new(part, 0.9, 0.01).map_err(|e| e.to_string())?;
    let samples = 1_000u64;
    let total = (0..samples)
        .map(|i| {
            let s = RngStream::new(
                3,
                StreamId::Custom {
                    domain: 8,
                    index: i,
                },
            );
            sample_sbm(&sbm, &s).map(|g| g.num_edges())
        })
        .sum::<tgrab_core::Result<usize>>()
        .map_err(|e| e.to_string())?;
    let sbm_mean = total as f64 / samples as f64;
    ensure!(
        (sbm_mean - sbm_expected).abs() <= 0.02 * sbm_expected,
        "SBM mean {sbm_mean} vs {sbm_expected}"
    );
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "ER mean {er_mean:.3} (49.5 ± 1), SBM mean {sbm_mean:.2} ({sbm_expected:.2} ± 2%)"
    ))
}

// 4, 5 ---------------------------------------------------------------------

fn disjoint_pdet(k: usize, n: usize, seed: u64) -> Result<(DynamicGraph, SplitIndex), String> {
    let spec = TaskSpec::periodic_det(k, n, 48, seed).with_patterns(PatternModel::DisjointUniform);
    let g = gen(&spec)?;
    let split = split_for(&spec, g.num_timesteps()).map_err(|e| e.to_string())?;
    Ok((g, split))
}

/// Disjointness and equal sizes of the distinct snapshots, checked on the data.
fn check_disjoint_equal(g: &DynamicGraph, k: usize) -> Result<usize, String> {
    let distinct: BTreeSet<Vec<Pair>> = g.snapshots().iter().map(|s| s.edges().to_vec()).collect();
    ensure!(
        distinct.len() == k,
        "{} distinct patterns, want {k}",
        distinct.len()
    );
    let size = distinct.iter().next().map(Vec::len).unwrap_or(0);
    let mut seen = HashSet::new();
    for p in &distinct {
        ensure!(p.len() == size && size > 0, "unequal or empty patterns");
        for e in p {
            ensure!(seen.insert(*e), "patterns share edge {e}");
        }
    }
    Ok(size)
}

fn persistence_oracle() -> Outcome {
    let mut lines = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let (g, split) = disjoint_pdet(2, n, 10 + n as u64)?;
        check_disjoint_equal(&g, 2)?;
        let cfg = ProtocolConfig::for_graph(&g);
        let r =
            run_protocol(&g, &split, &mut Persistence::new(), &cfg).map_err(|e| e.to_string())?;
        let cp = r.mean_changepoints.ok_or("no change points flagged")?;
        let want = (n as f64 - 1.0) / n as f64;
        ensure!(cp == 0.0, "n={n}: change-point mean {cp}");
        ensure!(r.mean_all == want, "n={n}: mean {} want {want}", r.mean_all);
        // Direct replay: F1 is 1 off change points and 0 on them.
        for s in &r.per_timestep {
            let expect = if s.t % n == 0 { 0.0 } else { 1.0 };
            ensure!(s.f1 == expect, "n={n} t={}: {}", s.t, s.f1);
        }
        lines.push(format!("n={n}: {:.4}", r.mean_all));
    }
    Ok(format!("c.p. mean 0, all-step means {}", lines.join(", ")))
}

fn edgebank_oracle() -> Outcome {
    let mut counting = Vec::new();
    for n in [1usize, 2, 4, 8] {
        let (g, split) = disjoint_pdet(2, n, 20 + n as u64)?;
        check_disjoint_equal(&g, 2)?;
        let cfg = ProtocolConfig::for_graph(&g);
        let r = run_protocol(&g, &split, &mut EdgeBank::new(), &cfg).map_err(|e| e.to_string())?;
        for s in &r.per_timestep {
            ensure!(
                (s.f1 - 2.0 / 3.0).abs() <= 1e-12,
                "n={n} t={}: {}",
                s.t,
                s.f1
            );
        }
        counting.push(r.mean_all);
    }
    ensure!(
        counting.iter().all(|m| (m - counting[0]).abs() <= 1e-12),
        "means vary with n: {counting:?}"
    );

    let mut prev = f64::INFINITY;
    let mut memo = Vec::new();
    for k in [2usize, 4, 8, 16, 32, 64] {
        let (g, split) = disjoint_pdet(k, 1, 30 + k as u64)?;
        check_disjoint_equal(&g, k)?;
        let cfg = ProtocolConfig::for_graph(&g);
        let r = run_protocol(&g, &split, &mut EdgeBank::new(), &cfg).map_err(|e| e.to_string())?;
        let want = 2.0 / (k as f64 + 1.0);
        for s in &r.per_timestep {
            ensure!(
                (s.f1 - want).abs() <= 1e-12,
                "k={k} t={}: {} want {want}",
                s.t,
                s.f1
            );
        }
        ensure!(r.mean_all < prev, "not strictly decreasing at k={k}");
        prev = r.mean_all;
        memo.push(format!("k={k}: {:.4}", r.mean_all));
    }
    Ok(format!("Pdet(2,n) 2/3 for n in 1..8; {}", memo.join(", ")))
}

// 6 ------------------------------------------------------------------------

/// Neighbors of `v` by scanning every edge.
fn scan_neighbors(s: &Snapshot, v: u32) -> BTreeSet<u32> {
    s.edges().iter().filter_map(|p| p.other(v)).collect()
}

fn ce_replay(g: &DynamicGraph, lag: usize) -> Result<(), String> {
    let snaps = g.snapshots();
    // Active cause nodes per timestep, recomputed with node-0 edges stripped.
    let active: Vec<BTreeSet<u32>> = snaps
        .iter()
        .map(|s| {
            s.edges()
                .iter()
                .filter(|p| p.lo() != 0)
                .flat_map(|p| [p.lo(), p.hi()])
                .collect()
        })
        .collect();
    for (t, s) in snaps.iter().enumerate() {
        let memory = scan_neighbors(s, 0);
        let want = if t >= lag {
            active[t - lag].clone()
        } else {
            BTreeSet::new()
        };
        ensure!(
            memory == want,
            "t={t}: memory neighbors {memory:?} want {want:?}"
        );
        ensure!(!memory.contains(&0), "self loop");
    }
    Ok(())
}

fn lr_replay(
    g: &DynamicGraph,
    lag: usize,
    dist: u32,
    paths: u32,
    n_mid: u32,
) -> Result<(), String> {
    let snaps = g.snapshots();
    let mut endpoints: Vec<BTreeSet<u32>> = Vec::with_capacity(snaps.len());
    for (t, s) in snaps.iter().enumerate() {
        let body: Vec<Pair> = s
            .edges()
            .iter()
            .copied()
            .filter(|p| !p.touches(LR_TARGET_NODE))
            .collect();
        ensure!(
            body.len() == (paths * dist) as usize,
            "t={t}: {} path edges want {}",
            body.len(),
            paths * dist
        );
        let adj = |v: u32| -> Vec<u32> { body.iter().filter_map(|p| p.other(v)).collect() };
        let starts = adj(LR_SOURCE_NODE);
        ensure!(
            starts.len() == paths as usize,
            "t={t}: source degree {}",
            starts.len()
        );
        let mut used = HashSet::new();
        let mut ends = BTreeSet::new();
        for first in starts {
            let (mut prev, mut cur) = (LR_SOURCE_NODE, first);
            let mut len = 1;
            loop {
                ensure!(
                    (2..n_mid + 2).contains(&cur),
                    "t={t}: intermediate {cur} outside 2..{}",
                    n_mid + 2
                );
                ensure!(used.insert(cur), "t={t}: node {cur} reused across paths");
                let next: Vec<u32> = adj(cur).into_iter().filter(|&x| x != prev).collect();
                match next.as_slice() {
                    [] => break,
                    [x] => {
                        prev = cur;
                        cur = *x;
                        len += 1;
                    }
                    _ => return Err(format!("t={t}: branching at {cur}")),
                }
            }
            ensure!(len == dist, "t={t}: path length {len} want {dist}");
            ends.insert(cur);
        }
        let target = scan_neighbors(s, LR_TARGET_NODE);
        if t >= lag {
            ensure!(
                target.len() == paths as usize,
                "t={t}: target degree {}",
                target.len()
            );
            ensure!(
                target == endpoints[t - lag],
                "t={t}: target wired to {target:?}"
            );
        } else {
            ensure!(target.is_empty(), "t={t}: target active before lag");
        }
        endpoints.push(ends);
    }
    Ok(())
}

fn construction_invariants() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let lag = rng.gen_range(1..=8);
        let total = rng.gen_range(lag + 1..=64);
        let spec = TaskSpec::cause_effect(lag, rng.gen()).with_effect_steps(total - lag);
        let g = gen(&spec)?;
        ensure!(g.num_timesteps() == total, "CE spec {i}: T");
        ce_replay(&g, lag).map_err(|e| format!("CE spec {i} ({spec:?}): {e}"))?;
    }
    for i in 0..50 {
        let lag = rng.gen_range(1..=8);
        let total = rng.gen_range(lag + 1..=64);
        let paths = rng.gen_range(1..=5u32);
        let dist = rng.gen_range(1..=16u32);
        let n_mid = rng.gen_range(paths * dist..=100.max(paths * dist));
        let spec = TaskSpec::new(
            Task::LongRange {
                lag,
                dist,
                paths,
                num_intermediates: n_mid,
                num_effect_steps: total - lag,
            },
            rng.gen(),
        );
        let g = gen(&spec)?;
        lr_replay(&g, lag, dist, paths, n_mid)
            .map_err(|e| format!("LR spec {i} ({spec:?}): {e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("50 CE + 50 LR specs in {:?}", start.elapsed()))
}

// 7 ------------------------------------------------------------------------

fn naive_f1(
    pred: &[(u32, u32, f64)],
    truth: &[(u32, u32)],
    n: u32,
    pivot: Option<u32>,
    th: f64,
) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for u in 0..n {
        for v in u + 1..n {
            if let Some(x) = pivot {
                if u != x && v != x {
                    continue;
                }
            }
            let is_true = truth
                .iter()
                .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u));
            let score = pred
                .iter()
                .rev()
                .find(|&&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u))
                .map_or(0.0, |&(_, _, s)| s);
            match (score > th, is_true) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
    }
    if tp + fp + fneg == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fneg as f64)
    }
}

fn metrics_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let thresholds = [0.0, 0.25, 0.5, 0.75];
    for case in 0..1_000 {
        let n: u32 = rng.gen_range(2..=12);
        let density: f64 = rng.gen();
        let random_pair = |rng: &mut ChaCha8Rng| loop {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                return (a, b);
            }
        };
        let truth: Vec<(u32, u32)> = (0..rng.gen_range(0..=n * 2))
            .map(|_| random_pair(&mut rng))
            .collect();
        let pred: Vec<(u32, u32, f64)> = (0..rng.gen_range(0..=n * 3))
            .map(|_| {
                let (a, b) = random_pair(&mut rng);
                // Quarter-step scores so threshold ties actually occur.
                let s = if rng.gen_bool(density) {
                    (rng.gen_range(0..=4) as f64) / 4.0
                } else {
                    rng.gen()
                };
                (a, b, s)
            })
            .collect();
        let th = thresholds[case % thresholds.len()];

        let snap = Snapshot::from_pairs(n, truth.iter().copied()).map_err(|e| e.to_string())?;
        let mut scores = PairScores::new(case);
        for &(a, b, s) in &pred {
            scores
                .insert(Pair::new(a, b).unwrap(), s)
                .map_err(|e| e.to_string())?;
        }
        let fast = evaluate_all_pairs(&scores, &snap, th)
            .map_err(|e| e.to_string())?
            .f1;
        let slow = naive_f1(&pred, &truth, n, None, th);
        ensure!(
            fast == slow,
            "case {case}: all-pairs {fast} vs naive {slow}"
        );

        let pivot = rng.gen_range(0..n);
        let fast = evaluate_node_restricted(&scores, &snap, pivot, th)
            .map_err(|e| e.to_string())?
            .f1;
        let slow = naive_f1(&pred, &truth, n, Some(pivot), th);
        ensure!(
            fast == slow,
            "case {case}: restricted {fast} vs naive {slow}"
        );
    }
    Ok("1000 random cases, both universes exact".into())
}

// 8 ------------------------------------------------------------------------

fn export(g: &DynamicGraph, dir: &Path) -> Result<(), String> {
    let split = split_for(g.spec(), g.num_timesteps()).map_err(|e| e.to_string())?;
    export_dataset(g, &split, dir).map_err(|e| e.to_string())?;
    export_ctdg_events(g, dir).map_err(|e| e.to_string())?;
    Ok(())
}

fn determinism_round_trip() -> Outcome {
    let specs = [
        TaskSpec::periodic_det(4, 2, 48, 8),
        TaskSpec::periodic_sto(4, 1, 48, 0.9, 8),
        TaskSpec::cause_effect(4, 8).with_effect_steps(200),
        TaskSpec::long_range(4, 2, 8).with_effect_steps(200),
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, spec) in specs.iter().enumerate() {
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        export(&gen(spec)?, &a)?;
        export(&gen(spec)?, &b)?;
        for f in [EDGES_FILE, MANIFEST_FILE, EVENTS_FILE] {
            let x = std::fs::read(a.join(f)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(f)).map_err(|e| e.to_string())?;
            ensure!(x == y, "{}: {f} differs between runs", spec.family());
        }
        let g = gen(spec)?;
        let (back, _, manifest) = import_dataset(&a).map_err(|e| e.to_string())?;
        ensure!(back == g, "{}: import(export(g)) != g", spec.family());
        ensure!(
            manifest.directed_edge_count == g.directed_edge_count(),
            "manifest count"
        );
        let events =
            read_ctdg_events(&a, g.num_nodes(), g.num_timesteps()).map_err(|e| e.to_string())?;
        ensure!(
            events == g.snapshots(),
            "{}: events do not regroup into snapshots",
            spec.family()
        );
    }
    Ok("4 families byte-identical and round-trip exact".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("timestep-count reproduction", timestep_counts),
        ("LR edge-count reproduction", lr_edge_counts),
        ("ER/SBM statistical checks", er_sbm_statistics),
        ("persistence oracle", persistence_oracle),
        ("EdgeBank oracle", edgebank_oracle),
        ("construction invariants", construction_invariants),
        ("metrics brute-force equivalence", metrics_brute_force),
        ("determinism & round-trip", determinism_round_trip),
    ];
    // Keep panic messages out of the summary; they are reported as failures.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
