//! Task generators.
//!
//! Four families share one contract: a [`TaskSpec`] (parameters plus a root
//! seed) maps to exactly one [`DynamicGraph`]. Timesteps are 0-indexed.
//! Every timestep draws from its own [`RngStream`], so snapshots are built
//! in parallel; the delayed families first draw all per-timestep layers and
//! then attach effect edges from the layer `lag` steps earlier.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{num_pairs, DynamicGraph, NodeId, Pair, Snapshot};
use crate::random_graphs::{
    bernoulli_pairs, random_equal_partition, sample_er, sample_sbm, ErParams, SbmParams,
};
use crate::rng::{RngStream, StreamId};

/// Memory node of cause-and-effect tasks.
pub const CE_MEMORY_NODE: NodeId = 0;
/// Target node of long-range tasks.
pub const LR_TARGET_NODE: NodeId = 0;
/// Source node of long-range tasks.
pub const LR_SOURCE_NODE: NodeId = 1;
/// First intermediate id of long-range tasks.
pub const LR_FIRST_INTERMEDIATE: NodeId = 2;

pub const DEFAULT_NUM_NODES: u32 = 100;
pub const DEFAULT_EDGE_PROB: f64 = 0.01;
pub const DEFAULT_P_INTER: f64 = 0.01;
pub const DEFAULT_NUM_BLOCKS: u32 = 3;
pub const DEFAULT_EFFECT_STEPS: usize = 4000;
pub const DEFAULT_PATHS: u32 = 3;
/// Train, validation and test period counts for periodic tasks.
pub const DEFAULT_PERIODS: (usize, usize, usize) = (40, 4, 4);

/// How the `k` fixed graphs of a deterministic periodic task are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternModel {
    /// `k` independent Erdős–Rényi draws.
    #[default]
    ErdosRenyi,
    /// `k` pairwise edge-disjoint graphs with exactly
    /// `round(edge_prob * C(N, 2))` edges each, cut from one random
    /// permutation of all pairs. Gives the baselines closed-form scores.
    DisjointUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Task {
    PeriodicDet {
        k: usize,
        n: usize,
        num_periods: usize,
        base: ErParams,
        #[serde(default)]
        patterns: PatternModel,
    },
    PeriodicSto {
        k: usize,
        n: usize,
        num_periods: usize,
        num_nodes: u32,
        num_blocks: u32,
        p_intra: f64,
        p_inter: f64,
    },
    CauseEffect {
        lag: usize,
        num_effect_steps: usize,
        /// Distribution of the cause subgraph over nodes `1..=base.num_nodes`.
        base: ErParams,
    },
    LongRange {
        lag: usize,
        dist: u32,
        paths: u32,
        num_intermediates: u32,
        num_effect_steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(flatten)]
    pub task: Task,
    pub seed: u64,
}

impl TaskSpec {
    pub fn new(task: Task, seed: u64) -> Self {
        TaskSpec { task, seed }
    }

    /// Deterministic periodicity over ER(100, 0.01) patterns.
    pub fn periodic_det(k: usize, n: usize, num_periods: usize, seed: u64) -> Self {
        Self::new(
            Task::PeriodicDet {
                k,
                n,
                num_periods,
                base: ErParams {
                    num_nodes: DEFAULT_NUM_NODES,
                    edge_prob: DEFAULT_EDGE_PROB,
                },
                patterns: PatternModel::ErdosRenyi,
            },
            seed,
        )
    }

    /// Stochastic periodicity over 3-block SBMs on 100 nodes, `p_inter = 0.01`.
    pub fn periodic_sto(k: usize, n: usize, num_periods: usize, p_intra: f64, seed: u64) -> Self {
        Self::new(
            Task::PeriodicSto {
                k,
                n,
                num_periods,
                num_nodes: DEFAULT_NUM_NODES,
                num_blocks: DEFAULT_NUM_BLOCKS,
                p_intra,
                p_inter: DEFAULT_P_INTER,
            },
            seed,
        )
    }

    /// Cause-and-effect over ER(100, 0.01) cause subgraphs, 4000 effect steps.
    pub fn cause_effect(lag: usize, seed: u64) -> Self {
        Self::new(
            Task::CauseEffect {
                lag,
                num_effect_steps: DEFAULT_EFFECT_STEPS,
                base: ErParams {
                    num_nodes: DEFAULT_NUM_NODES,
                    edge_prob: DEFAULT_EDGE_PROB,
                },
            },
            seed,
        )
    }

    /// Long-range task with 3 paths over 100 intermediates, 4000 effect steps.
    pub fn long_range(lag: usize, dist: u32, seed: u64) -> Self {
        Self::new(
            Task::LongRange {
                lag,
                dist,
                paths: DEFAULT_PATHS,
                num_intermediates: DEFAULT_NUM_NODES,
                num_effect_steps: DEFAULT_EFFECT_STEPS,
            },
            seed,
        )
    }

    /// Overrides the effect-step count of CE/LR specs; no-op otherwise.
    pub fn with_effect_steps(mut self, steps: usize) -> Self {
        match &mut self.task {
            Task::CauseEffect {
                num_effect_steps, ..
            }
            | Task::LongRange {
                num_effect_steps, ..
            } => *num_effect_steps = steps,
            _ => {}
        }
        self
    }

    /// Sets the pattern model of a deterministic periodic spec; no-op otherwise.
    pub fn with_patterns(mut self, model: PatternModel) -> Self {
        if let Task::PeriodicDet { patterns, .. } = &mut self.task {
            *patterns = model;
        }
        self
    }

    pub fn family(&self) -> &'static str {
        match self.task {
            Task::PeriodicDet { .. } => "periodic-det",
            Task::PeriodicSto { .. } => "periodic-sto",
            Task::CauseEffect { .. } => "cause-effect",
            Task::LongRange { .. } => "long-range",
        }
    }

    /// `(k, n)` for periodic families.
    pub fn period(&self) -> Option<(usize, usize)> {
        match self.task {
            Task::PeriodicDet { k, n, .. } | Task::PeriodicSto { k, n, .. } => Some((k, n)),
            _ => None,
        }
    }

    /// Node whose incident pairs form the restricted evaluation universe.
    pub fn pivot(&self) -> Option<NodeId> {
        match self.task {
            Task::CauseEffect { .. } => Some(CE_MEMORY_NODE),
            Task::LongRange { .. } => Some(LR_TARGET_NODE),
            _ => None,
        }
    }

    pub fn num_nodes(&self) -> u32 {
        match &self.task {
            Task::PeriodicDet { base, .. } => base.num_nodes,
            Task::PeriodicSto { num_nodes, .. } => *num_nodes,
            Task::CauseEffect { base, .. } => base.num_nodes + 1,
            Task::LongRange {
                num_intermediates, ..
            } => num_intermediates + 2,
        }
    }

    pub fn num_timesteps(&self) -> Result<usize> {
        let overflow = || Error::InvalidSpec("timestep count overflows".into());
        match self.task {
            Task::PeriodicDet {
                k, n, num_periods, ..
            }
            | Task::PeriodicSto {
                k, n, num_periods, ..
            } => k
                .checked_mul(n)
                .and_then(|x| x.checked_mul(num_periods))
                .ok_or_else(overflow),
            Task::CauseEffect {
                lag,
                num_effect_steps,
                ..
            }
            | Task::LongRange {
                lag,
                num_effect_steps,
                ..
            } => num_effect_steps.checked_add(lag).ok_or_else(overflow),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: u64| {
            if v == 0 {
                Err(Error::InvalidSpec(format!("{name} must be at least 1")))
            } else {
                Ok(())
            }
        };
        match &self.task {
            Task::PeriodicDet {
                k,
                n,
                num_periods,
                base,
                patterns,
            } => {
                positive("k", *k as u64)?;
                positive("n", *n as u64)?;
                positive("num_periods", *num_periods as u64)?;
                base.validate()?;
                if *patterns == PatternModel::DisjointUniform {
                    let m = disjoint_pattern_size(base);
                    if (*k as u64).saturating_mul(m) > num_pairs(base.num_nodes) {
                        return Err(Error::InvalidSpec(format!(
                            "{k} disjoint patterns of {m} edges exceed the {} pairs of {} nodes",
                            num_pairs(base.num_nodes),
                            base.num_nodes
                        )));
                    }
                }
            }
            Task::PeriodicSto {
                k,
                n,
                num_periods,
                num_nodes,
                num_blocks,
                p_intra,
                p_inter,
            } => {
                positive("k", *k as u64)?;
                positive("n", *n as u64)?;
                positive("num_periods", *num_periods as u64)?;
                positive("num_blocks", *num_blocks as u64)?;
                if num_nodes < num_blocks {
                    return Err(Error::InvalidSpec(format!(
                        "{num_nodes} nodes cannot fill {num_blocks} blocks"
                    )));
                }
                for (name, p) in [("p_intra", *p_intra), ("p_inter", *p_inter)] {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidProbability { name, value: p });
                    }
                }
            }
            Task::CauseEffect { lag, base, .. } => {
                positive("lag", *lag as u64)?;
                base.validate()?;
                if base.num_nodes == u32::MAX {
                    return Err(Error::InvalidSpec("too many cause nodes".into()));
                }
            }
            Task::LongRange {
                lag,
                dist,
                paths,
                num_intermediates,
                ..
            } => {
                positive("lag", *lag as u64)?;
                positive("dist", *dist as u64)?;
                positive("paths", *paths as u64)?;
                if (*paths as u64) * (*dist as u64) > *num_intermediates as u64 {
                    return Err(Error::InvalidSpec(format!(
                        "{paths} disjoint paths of length {dist} need {} intermediates, only {num_intermediates} available",
                        paths * dist
                    )));
                }
                if *num_intermediates > u32::MAX - 2 {
                    return Err(Error::InvalidSpec("too many intermediates".into()));
                }
            }
        }
        self.num_timesteps().map(|_| ())
    }
}

/// 1-based pattern index active at 0-indexed timestep `t`.
pub fn periodic_index(t: usize, k: usize, n: usize) -> Result<usize> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidSpec("k and n must be at least 1".into()));
    }
    Ok((t / n) % k + 1)
}

fn disjoint_pattern_size(base: &ErParams) -> u64 {
    (base.edge_prob * num_pairs(base.num_nodes) as f64).round() as u64
}

/// Generates the dynamic graph described by `spec`.
pub fn generate(spec: &TaskSpec) -> Result<DynamicGraph> {
    match spec.task {
        Task::PeriodicDet { .. } => gen_periodic_det(spec),
        Task::PeriodicSto { .. } => gen_periodic_sto(spec),
        Task::CauseEffect { .. } => gen_cause_effect(spec),
        Task::LongRange { .. } => gen_long_range(spec),
    }
}

fn wrong_family(expected: &str, spec: &TaskSpec) -> Error {
    Error::InvalidSpec(format!("expected a {expected} spec, got {}", spec.family()))
}

/// The `k` fixed graphs of a deterministic periodic spec, in pattern order.
pub fn periodic_patterns(spec: &TaskSpec) -> Result<Vec<Snapshot>> {
    let Task::PeriodicDet {
        k, base, patterns, ..
    } = &spec.task
    else {
        return Err(wrong_family("periodic-det", spec));
    };
    spec.validate()?;
    match patterns {
        PatternModel::ErdosRenyi => (0..*k)
            .into_par_iter()
            .map(|i| {
                sample_er(
                    base,
                    &RngStream::new(spec.seed, StreamId::Pattern(i as u64)),
                )
            })
            .collect(),
        PatternModel::DisjointUniform => {
            let n = base.num_nodes;
            let mut all: Vec<Pair> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| Pair::ordered(u, v)))
                .collect();
            all.shuffle(&mut RngStream::new(spec.seed, StreamId::Pattern(0)).rng());
            let m = disjoint_pattern_size(base) as usize;
            // validate() guarantees k * m <= C(N, 2).
            Ok((0..*k)
                .map(|i| Snapshot::from_unsorted(n, all[i * m..(i + 1) * m].to_vec()))
                .collect())
        }
    }
}

pub fn gen_periodic_det(spec: &TaskSpec) -> Result<DynamicGraph> {
    let Task::PeriodicDet { k, n, .. } = spec.task else {
        return Err(wrong_family("periodic-det", spec));
    };
    let patterns = periodic_patterns(spec)?;
    let snapshots = (0..spec.num_timesteps()?)
        .map(|t| Ok(patterns[periodic_index(t, k, n)? - 1].clone()))
        .collect::<Result<Vec<_>>>()?;
    DynamicGraph::new(spec.clone(), snapshots)
}

/// The `k` SBM distributions of a stochastic periodic spec, in pattern order.
pub fn periodic_distributions(spec: &TaskSpec) -> Result<Vec<SbmParams>> {
    let Task::PeriodicSto {
        k,
        num_nodes,
        num_blocks,
        p_intra,
        p_inter,
        ..
    } = spec.task
    else {
        return Err(wrong_family("periodic-sto", spec));
    };
    spec.validate()?;
    (0..k)
        .map(|i| {
            let stream = RngStream::new(spec.seed, StreamId::Partition(i as u64));
            let part = random_equal_partition(num_nodes, num_blocks, &stream)?;
            SbmParams::new(part, p_intra, p_inter)
        })
        .collect()
}

pub fn gen_periodic_sto(spec: &TaskSpec) -> Result<DynamicGraph> {
    let Task::PeriodicSto { k, n, .. } = spec.task else {
        return Err(wrong_family("periodic-sto", spec));
    };
    let dists = periodic_distributions(spec)?;
    let snapshots = (0..spec.num_timesteps()?)
        .into_par_iter()
        .map(|t| {
            let d = &dists[periodic_index(t, k, n)? - 1];
            sample_sbm(d, &RngStream::timestep(spec.seed, t))
        })
        .collect::<Result<Vec<_>>>()?;
    DynamicGraph::new(spec.clone(), snapshots)
}

pub fn gen_cause_effect(spec: &TaskSpec) -> Result<DynamicGraph> {
    let Task::CauseEffect { lag, base, .. } = &spec.task else {
        return Err(wrong_family("cause-effect", spec));
    };
    spec.validate()?;
    let lag = *lag;
    let num_nodes = spec.num_nodes();
    let total = spec.num_timesteps()?;

    // Cause subgraph on nodes 1..=N; node 0 never appears here.
    let causes: Vec<Vec<Pair>> = (0..total)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::timestep(spec.seed, t).rng();
            bernoulli_pairs(&mut rng, base.num_nodes, base.edge_prob, 1)
        })
        .collect();

    let snapshots = (0..total)
        .into_par_iter()
        .map(|t| {
            let cause = &causes[t];
            if t < lag {
                return Snapshot::from_sorted(num_nodes, cause.clone());
            }
            let active = Snapshot::from_sorted(num_nodes, causes[t - lag].clone()).active_nodes();
            // Memory pairs (0, m) sort ahead of every cause pair.
            let mut edges: Vec<Pair> = active
                .into_iter()
                .map(|m| Pair::ordered(CE_MEMORY_NODE, m))
                .collect();
            edges.extend_from_slice(cause);
            Snapshot::from_sorted(num_nodes, edges)
        })
        .collect();
    DynamicGraph::new(spec.clone(), snapshots)
}

/// The `paths` node-disjoint paths drawn at one timestep of a long-range
/// task; each inner vector lists the intermediates from the source outward.
pub fn long_range_paths(spec: &TaskSpec, t: usize) -> Result<Vec<Vec<NodeId>>> {
    let Task::LongRange {
        dist,
        paths,
        num_intermediates,
        ..
    } = spec.task
    else {
        return Err(wrong_family("long-range", spec));
    };
    let mut rng = RngStream::timestep(spec.seed, t).rng();
    let needed = (paths * dist) as usize;
    let picked = rand::seq::index::sample(&mut rng, num_intermediates as usize, needed);
    let nodes: Vec<NodeId> = picked
        .into_iter()
        .map(|i| i as NodeId + LR_FIRST_INTERMEDIATE)
        .collect();
    Ok(nodes
        .chunks(dist as usize)
        .map(<[NodeId]>::to_vec)
        .collect())
}

pub fn gen_long_range(spec: &TaskSpec) -> Result<DynamicGraph> {
    let Task::LongRange { lag, .. } = spec.task else {
        return Err(wrong_family("long-range", spec));
    };
    spec.validate()?;
    let num_nodes = spec.num_nodes();
    let total = spec.num_timesteps()?;

    let layers = (0..total)
        .into_par_iter()
        .map(|t| long_range_paths(spec, t))
        .collect::<Result<Vec<_>>>()?;

    let snapshots = (0..total)
        .into_par_iter()
        .map(|t| {
            let mut edges = Vec::new();
            for path in &layers[t] {
                let mut prev = LR_SOURCE_NODE;
                for &u in path {
                    edges.push(Pair::new(prev, u).expect("path nodes are distinct"));
                    prev = u;
                }
            }
            if t >= lag {
                for path in &layers[t - lag] {
                    let end = *path.last().expect("paths are non-empty");
                    edges.push(Pair::ordered(LR_TARGET_NODE, end));
                }
            }
            Snapshot::from_unsorted(num_nodes, edges)
        })
        .collect();
    DynamicGraph::new(spec.clone(), snapshots)
}
