//! Evaluation loop: warm up on the training range, then evaluate-then-observe
//! over validation and test.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::baselines::StreamingPredictor;
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, NodeId};
use crate::metrics::{
    change_points, evaluate_all_pairs, evaluate_node_restricted, MetricReport, PairScores,
    TimestepScore, DEFAULT_THRESHOLD,
};
use crate::splits::SplitIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    AllPairs,
    /// Only pairs incident to this node.
    Node(NodeId),
}

impl EvalMode {
    /// Restricted to the task's pivot when it has one, all pairs otherwise.
    pub fn default_for(graph: &DynamicGraph) -> Self {
        graph
            .spec()
            .pivot()
            .map_or(EvalMode::AllPairs, EvalMode::Node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub mode: EvalMode,
    pub threshold: f64,
    /// `(k, n)` of a periodic task; flags change points in the report.
    pub changepoints: Option<(usize, usize)>,
}

impl ProtocolConfig {
    pub fn new(mode: EvalMode) -> Self {
        ProtocolConfig {
            mode,
            threshold: DEFAULT_THRESHOLD,
            changepoints: None,
        }
    }

    /// Mode, threshold and change-point flags that fit `graph`'s task family.
    pub fn for_graph(graph: &DynamicGraph) -> Self {
        ProtocolConfig {
            mode: EvalMode::default_for(graph),
            threshold: DEFAULT_THRESHOLD,
            changepoints: graph.spec().period(),
        }
    }
}

fn score_one(
    graph: &DynamicGraph,
    pred: &PairScores,
    config: &ProtocolConfig,
) -> Result<TimestepScore> {
    let truth = graph.snapshot(pred.timestep).ok_or_else(|| {
        Error::Predictions(format!(
            "timestep {} outside 0..{}",
            pred.timestep,
            graph.num_timesteps()
        ))
    })?;
    match config.mode {
        EvalMode::AllPairs => evaluate_all_pairs(pred, truth, config.threshold),
        EvalMode::Node(pivot) => evaluate_node_restricted(pred, truth, pivot, config.threshold),
    }
}

fn flag_changepoints(
    scores: &mut [TimestepScore],
    range: Range<usize>,
    config: &ProtocolConfig,
) -> Result<()> {
    if let Some((k, n)) = config.changepoints {
        let cps = change_points(k, n, range)?;
        for s in scores {
            s.is_changepoint = cps.binary_search(&s.t).is_ok();
        }
    }
    Ok(())
}

/// Streams `graph` through `predictor`: observe-only over the training
/// range, then predict, score and observe each validation and test step.
pub fn run_protocol(
    graph: &DynamicGraph,
    split: &SplitIndex,
    predictor: &mut dyn StreamingPredictor,
    config: &ProtocolConfig,
) -> Result<MetricReport> {
    if split.total() != graph.num_timesteps() {
        return Err(Error::InvalidSplit(format!(
            "split covers {} timesteps, graph has {}",
            split.total(),
            graph.num_timesteps()
        )));
    }
    let snaps = graph.snapshots();
    for t in split.train() {
        predictor.observe(t, &snaps[t])?;
    }
    let mut scores = Vec::with_capacity(split.evaluated().len());
    for t in split.evaluated() {
        let pred = predictor.predict(t)?;
        scores.push(score_one(graph, &pred, config)?);
        predictor.observe(t, &snaps[t])?;
    }
    flag_changepoints(&mut scores, split.evaluated(), config)?;
    MetricReport::from_scores(scores)
}

/// Scores precomputed predictions; every timestep in `range` must be present.
pub fn score_predictions(
    graph: &DynamicGraph,
    range: Range<usize>,
    preds: &BTreeMap<usize, PairScores>,
    config: &ProtocolConfig,
) -> Result<MetricReport> {
    let mut scores = Vec::with_capacity(range.len());
    for t in range.clone() {
        let pred = preds
            .get(&t)
            .ok_or_else(|| Error::Predictions(format!("no prediction for timestep {t}")))?;
        scores.push(score_one(graph, pred, config)?);
    }
    flag_changepoints(&mut scores, range, config)?;
    MetricReport::from_scores(scores)
}
