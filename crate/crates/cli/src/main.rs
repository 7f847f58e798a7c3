mod args;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde_json::json;
use tgrab_core::io::{self, read_ctdg_events, read_predictions, write_report};
use tgrab_core::{
    change_points, compute_stats, export_ctdg_events, export_dataset, generate, import_dataset,
    run_protocol, AllPairsPredictor, DynamicGraph, EdgeBank, ErParams, EvalMode, MetricReport,
    PairScores, PatternModel, Persistence, ProtocolConfig, SplitIndex, SplitRule,
    StreamingPredictor, Task, TaskSpec,
};

use args::{
    BaselineArgs, ChangepointArgs, Cli, Command, DatasetArg, EvalArgs, Family, GenArgs, Method,
    Mode, ScoringArgs, StatsArgs,
};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Changepoints(a) => cmd_changepoints(a),
    }
}

fn spec_from(family: &Family, seed: u64) -> TaskSpec {
    let task = match *family {
        Family::PeriodicDet {
            k,
            n,
            periods,
            nodes,
            p,
            disjoint,
        } => Task::PeriodicDet {
            k: k as usize,
            n: n as usize,
            num_periods: periods,
            base: ErParams {
                num_nodes: nodes,
                edge_prob: p,
            },
            patterns: if disjoint {
                PatternModel::DisjointUniform
            } else {
                PatternModel::ErdosRenyi
            },
        },
        Family::PeriodicSto {
            k,
            n,
            periods,
            nodes,
            blocks,
            p_intra,
            p_inter,
        } => Task::PeriodicSto {
            k: k as usize,
            n: n as usize,
            num_periods: periods,
            num_nodes: nodes,
            num_blocks: blocks,
            p_intra,
            p_inter,
        },
        Family::Ce {
            lag,
            nodes,
            p,
            effect_steps,
        } => Task::CauseEffect {
            lag: lag as usize,
            num_effect_steps: effect_steps,
            base: ErParams {
                num_nodes: nodes,
                edge_prob: p,
            },
        },
        Family::Lr {
            lag,
            dist,
            paths,
            nodes,
            effect_steps,
        } => Task::LongRange {
            lag: lag as usize,
            dist,
            paths,
            num_intermediates: nodes,
            num_effect_steps: effect_steps,
        },
    };
    TaskSpec::new(task, seed)
}

/// Directory name used under `--out-root`, e.g. `long-range-l4-d2-s7`.
fn default_dir_name(spec: &TaskSpec) -> String {
    let params = match spec.task {
        Task::PeriodicDet { k, n, .. } | Task::PeriodicSto { k, n, .. } => format!("k{k}-n{n}"),
        Task::CauseEffect { lag, .. } => format!("l{lag}"),
        Task::LongRange { lag, dist, .. } => format!("l{lag}-d{dist}"),
    };
    format!("{}-{params}-s{}", spec.family(), spec.seed)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let spec = spec_from(&a.family, a.common.seed);
    spec.validate()?;
    let out = match (a.common.out, a.common.out_root) {
        (Some(dir), _) => dir,
        (None, Some(root)) => root.join(default_dir_name(&spec)),
        (None, None) => bail!("no output directory: pass --out or set TGRAB_OUT_DIR"),
    };
    let graph = generate(&spec)?;
    let rule = a
        .common
        .split
        .unwrap_or_else(|| SplitRule::default_for(&spec));
    let split = rule.apply(&spec, graph.num_timesteps())?;
    let manifest = export_dataset(&graph, &split, &out)?;
    if a.common.events {
        export_ctdg_events(&graph, &out)?;
    }
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}

fn load(dir: &Path) -> Result<(DynamicGraph, SplitIndex, io::Manifest)> {
    import_dataset(dir).with_context(|| format!("loading dataset {}", dir.display()))
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let (graph, split, manifest) = load(&a.dataset)?;
    let stats = compute_stats(&graph);
    let mut out = json!({
        "family": manifest.spec.family(),
        "num_nodes": stats.num_nodes,
        "num_timesteps": stats.num_timesteps,
        "undirected_edge_count": stats.directed_edge_count / 2,
        "directed_edge_count": stats.directed_edge_count,
        "split": io::SplitRanges::from(&split),
    });
    if a.per_timestep {
        out["per_timestep"] = json!(stats.per_timestep);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_validate(a: DatasetArg) -> Result<()> {
    let (graph, _, manifest) = load(&a.dataset)?;
    let events = a.dataset.join(io::EVENTS_FILE);
    if events.exists() {
        let snaps = read_ctdg_events(&a.dataset, graph.num_nodes(), graph.num_timesteps())?;
        if snaps.as_slice() != graph.snapshots() {
            bail!("{} disagrees with {}", events.display(), io::EDGES_FILE);
        }
    }
    println!(
        "ok: {} with {} nodes, {} timesteps, {} directed edges",
        manifest.spec.family(),
        manifest.num_nodes,
        manifest.num_timesteps,
        manifest.directed_edge_count
    );
    Ok(())
}

fn protocol_config(
    graph: &DynamicGraph,
    s: &ScoringArgs,
    mode: EvalMode,
) -> Result<ProtocolConfig> {
    if !(0.0..=1.0).contains(&s.threshold) {
        bail!("--threshold must lie in [0, 1], got {}", s.threshold);
    }
    let changepoints = if s.changepoints {
        match graph.spec().period() {
            Some(kn) => Some(kn),
            None => bail!("--changepoints needs a periodic dataset"),
        }
    } else {
        None
    };
    Ok(ProtocolConfig {
        mode,
        threshold: s.threshold,
        changepoints,
    })
}

fn check_node(graph: &DynamicGraph, v: u32) -> Result<()> {
    if v >= graph.num_nodes() {
        bail!("node {v} out of range for {} nodes", graph.num_nodes());
    }
    Ok(())
}

fn print_summary(report: &MetricReport, split: &SplitIndex, path: &Path) {
    let fmt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"));
    println!("evaluated  {}", report.per_timestep.len());
    println!("mean_all   {}", fmt(Some(report.mean_all)));
    println!("mean_val   {}", fmt(report.mean_over(split.val())));
    println!("mean_test  {}", fmt(report.mean_over(split.test())));
    println!("mean_cp    {}", fmt(report.mean_changepoints));
    println!("report     {}", path.display());
}

fn report_path(s: &ScoringArgs) -> PathBuf {
    s.report
        .clone()
        .unwrap_or_else(|| io::default_report_path(&s.dataset))
}

fn cmd_baseline(a: BaselineArgs) -> Result<()> {
    let s = &a.scoring;
    let (graph, split, _) = load(&s.dataset)?;
    let mode = match (s.restrict_node, graph.spec().pivot()) {
        (Some(v), _) => {
            check_node(&graph, v)?;
            EvalMode::Node(v)
        }
        (None, Some(pivot)) => bail!(
            "{} datasets are scored around one node; pass --restrict-node {pivot}",
            graph.spec().family()
        ),
        (None, None) => EvalMode::AllPairs,
    };
    let config = protocol_config(&graph, s, mode)?;
    let mut predictor: Box<dyn StreamingPredictor> = match a.method {
        Method::Persistence => Box::new(Persistence::new()),
        Method::Edgebank => Box::new(EdgeBank::new()),
        Method::Clique => Box::new(AllPairsPredictor::new(graph.num_nodes())),
    };
    let report = run_protocol(&graph, &split, predictor.as_mut(), &config)?;
    let path = report_path(s);
    write_report(&report, &path)?;
    print_summary(&report, &split, &path);
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let s = &a.scoring;
    let (graph, split, _) = load(&s.dataset)?;
    let mode = match a.mode {
        Mode::AllPairs => {
            if s.restrict_node.is_some() {
                bail!("--restrict-node requires --mode node");
            }
            EvalMode::AllPairs
        }
        Mode::Node => match s.restrict_node.or(graph.spec().pivot()) {
            Some(v) => {
                check_node(&graph, v)?;
                EvalMode::Node(v)
            }
            None => bail!("--mode node needs --restrict-node for this dataset"),
        },
    };
    let config = protocol_config(&graph, s, mode)?;

    let mut preds = read_predictions(&a.pred)?;
    if let Some((&t, _)) = preds.range(graph.num_timesteps()..).next() {
        bail!(
            "prediction for timestep {t}, dataset has {}",
            graph.num_timesteps()
        );
    }
    let range = split.evaluated();
    let mut preds: BTreeMap<usize, PairScores> = preds.split_off(&range.start);
    if a.allow_missing {
        for t in range.clone() {
            preds.entry(t).or_insert_with(|| PairScores::new(t));
        }
    }
    let report = tgrab_core::harness::score_predictions(&graph, range, &preds, &config)?;
    let path = report_path(s);
    write_report(&report, &path)?;
    print_summary(&report, &split, &path);
    Ok(())
}

fn cmd_changepoints(a: ChangepointArgs) -> Result<()> {
    let (k, n, range) = match &a.dataset {
        Some(dir) => {
            let (graph, split, _) = load(dir)?;
            let Some((k, n)) = graph.spec().period() else {
                bail!("{} is not a periodic dataset", dir.display());
            };
            let start = a.start.unwrap_or(split.val_start());
            let end = a.end.unwrap_or(split.total());
            (k, n, start..end)
        }
        None => {
            let (Some(k), Some(n), Some(end)) = (a.k, a.n, a.end) else {
                bail!("--k, --n and --end are required without --dataset");
            };
            (k, n, a.start.unwrap_or(0)..end)
        }
    };
    for t in change_points(k, n, range)? {
        println!("{t}");
    }
    Ok(())
}
