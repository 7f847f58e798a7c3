//! Synthetic temporal-graph reasoning tasks.
//!
//! `tgrab_core` builds seeded discrete-time dynamic graphs for three task
//! families (periodicity, delayed cause-and-effect, long-range
//! spatio-temporal), splits them chronologically, scores link predictions
//! with all-pairs or node-restricted F1, and ships the persistence and
//! EdgeBank baselines as streaming predictors.
//!
//! ```
//! use tgrab_core::{generate, TaskSpec, split_for};
//!
//! let spec = TaskSpec::periodic_det(2, 1, 48, 7);
//! let graph = generate(&spec).unwrap();
//! assert_eq!(graph.num_timesteps(), 96);
//! let split = split_for(&spec, graph.num_timesteps()).unwrap();
//! assert_eq!(split.val_start(), 80);
//! ```

pub mod baselines;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod random_graphs;
pub mod rng;
pub mod splits;
pub mod tasks;

pub use baselines::{AllPairsPredictor, EdgeBank, Persistence, StreamingPredictor};
pub use error::{Error, Result};
pub use graph::{DynamicGraph, NodeId, Pair, Snapshot};
pub use harness::{run_protocol, EvalMode, ProtocolConfig};
pub use io::{
    compute_stats, export_ctdg_events, export_dataset, import_dataset, DatasetStats, Manifest,
};
pub use metrics::{
    aggregate, change_points, evaluate_all_pairs, evaluate_node_restricted, f1_from_counts, Counts,
    MetricReport, PairScores, TimestepScore,
};
pub use random_graphs::{
    random_equal_partition, sample_er, sample_sbm, ErParams, Partition, SbmParams,
};
pub use rng::{RngStream, StreamId};
pub use splits::{split_for, split_fraction, split_periods, SplitIndex, SplitRule};
pub use tasks::{generate, periodic_index, PatternModel, Task, TaskSpec};
