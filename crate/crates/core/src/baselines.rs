//! Streaming heuristic baselines.
//!
//! Every predictor follows the evaluate-then-observe contract: `predict(t)`
//! may only use snapshots strictly before `t`, and `observe` must be called
//! with increasing timesteps.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Pair, Snapshot};
use crate::metrics::PairScores;

pub trait StreamingPredictor {
    fn name(&self) -> &'static str;

    /// Scores for timestep `t`, which must be later than every observed one.
    fn predict(&self, t: usize) -> Result<PairScores>;

    /// Feeds the true snapshot of timestep `t`.
    fn observe(&mut self, t: usize, truth: &Snapshot) -> Result<()>;
}

/// Last observed timestep, enforcing strict ordering.
#[derive(Debug, Clone, Copy, Default)]
struct Clock {
    last: Option<usize>,
}

impl Clock {
    fn advance(&mut self, t: usize) -> Result<()> {
        if let Some(last) = self.last {
            if t <= last {
                return Err(Error::OutOfOrder { last, got: t });
            }
        }
        self.last = Some(t);
        Ok(())
    }

    fn check_future(&self, t: usize) -> Result<()> {
        match self.last {
            Some(last) if t <= last => Err(Error::OutOfOrder { last, got: t }),
            _ => Ok(()),
        }
    }
}

/// Predicts the previous snapshot's edges.
#[derive(Debug, Clone, Default)]
pub struct Persistence {
    prev: Option<Snapshot>,
    clock: Clock,
}

impl Persistence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_observed(&self) -> Option<&Snapshot> {
        self.prev.as_ref()
    }
}

impl StreamingPredictor for Persistence {
    fn name(&self) -> &'static str {
        "persistence"
    }

    fn predict(&self, t: usize) -> Result<PairScores> {
        self.clock.check_future(t)?;
        let prev = self.prev.as_ref().ok_or(Error::NoObservation)?;
        Ok(PairScores::from_snapshot(t, prev))
    }

    fn observe(&mut self, t: usize, truth: &Snapshot) -> Result<()> {
        self.clock.advance(t)?;
        self.prev = Some(truth.clone());
        Ok(())
    }
}

/// EdgeBank with unbounded memory: predicts every pair ever observed.
#[derive(Debug, Clone, Default)]
pub struct EdgeBank {
    seen: BTreeSet<Pair>,
    clock: Clock,
}

impl EdgeBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memory(&self) -> &BTreeSet<Pair> {
        &self.seen
    }
}

impl StreamingPredictor for EdgeBank {
    fn name(&self) -> &'static str {
        "edgebank"
    }

    fn predict(&self, t: usize) -> Result<PairScores> {
        self.clock.check_future(t)?;
        let mut out = PairScores::new(t);
        for &p in &self.seen {
            out.insert(p, 1.0)?;
        }
        Ok(out)
    }

    fn observe(&mut self, t: usize, truth: &Snapshot) -> Result<()> {
        self.clock.advance(t)?;
        self.seen.extend(truth.edges().iter().copied());
        Ok(())
    }
}

/// Floor reference: every pair is predicted, i.e. each snapshot is a clique.
#[derive(Debug, Clone)]
pub struct AllPairsPredictor {
    num_nodes: u32,
    clock: Clock,
}

impl AllPairsPredictor {
    pub fn new(num_nodes: u32) -> Self {
        AllPairsPredictor {
            num_nodes,
            clock: Clock::default(),
        }
    }
}

impl StreamingPredictor for AllPairsPredictor {
    fn name(&self) -> &'static str {
        "clique"
    }

    fn predict(&self, t: usize) -> Result<PairScores> {
        self.clock.check_future(t)?;
        Ok(PairScores::all_pairs(t, self.num_nodes))
    }

    fn observe(&mut self, t: usize, _truth: &Snapshot) -> Result<()> {
        self.clock.advance(t)
    }
}
