//! Snapshots and dynamic graphs over a fixed node set.
//!
//! Every snapshot is a simple undirected graph. Pairs are stored once, in
//! canonical `(min, max)` order, and kept sorted so equality and hashing are
//! independent of insertion order.

use std::fmt;

use crate::error::{Error, Result};
use crate::tasks::TaskSpec;

/// Index into the fixed node set. The id doubles as the node's one-hot feature.
pub type NodeId = u32;

/// Unordered node pair with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: NodeId,
    hi: NodeId,
}

impl Pair {
    /// Canonicalizes `(a, b)`; fails on a self-pair.
    pub fn new(a: NodeId, b: NodeId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Pair { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Ok(Pair { lo: b, hi: a }),
            std::cmp::Ordering::Equal => Err(Error::SelfLoop(a)),
        }
    }

    /// Caller guarantees `lo < hi`.
    pub(crate) fn ordered(lo: NodeId, hi: NodeId) -> Self {
        debug_assert!(lo < hi);
        Pair { lo, hi }
    }

    pub fn lo(self) -> NodeId {
        self.lo
    }

    pub fn hi(self) -> NodeId {
        self.hi
    }

    pub fn touches(self, v: NodeId) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint that is not `v`, if `v` is an endpoint.
    pub fn other(self, v: NodeId) -> Option<NodeId> {
        if self.lo == v {
            Some(self.hi)
        } else if self.hi == v {
            Some(self.lo)
        } else {
            None
        }
    }

    pub(crate) fn check_range(self, num_nodes: u32) -> Result<()> {
        if self.hi >= num_nodes {
            return Err(Error::NodeOutOfRange {
                node: self.hi as u64,
                num_nodes,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Number of unordered pairs over `n` nodes.
pub fn num_pairs(n: u32) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// One timestep's graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Snapshot {
    num_nodes: u32,
    edges: Vec<Pair>,
}

impl Snapshot {
    pub fn empty(num_nodes: u32) -> Self {
        Snapshot {
            num_nodes,
            edges: Vec::new(),
        }
    }

    /// Builds a snapshot from arbitrary pairs. Orientation and duplicates are
    /// normalized away; self-loops and out-of-range ids are rejected.
    pub fn from_pairs<I>(num_nodes: u32, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut edges = pairs
            .into_iter()
            .map(|(a, b)| {
                let p = Pair::new(a, b)?;
                p.check_range(num_nodes)?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        edges.sort_unstable();
        edges.dedup();
        Ok(Snapshot { num_nodes, edges })
    }

    /// `edges` must already be canonical, in range, sorted and unique.
    pub(crate) fn from_sorted(num_nodes: u32, edges: Vec<Pair>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges.last().map_or(true, |p| p.hi < num_nodes));
        Snapshot { num_nodes, edges }
    }

    /// Like [`Snapshot::from_pairs`] for already-canonical pairs in any order.
    pub(crate) fn from_unsorted(num_nodes: u32, mut edges: Vec<Pair>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self::from_sorted(num_nodes, edges)
    }

    pub fn num_nodes(&self) -> u32 {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Pairs in ascending `(lo, hi)` order.
    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.edges.binary_search(&pair).is_ok()
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v >= self.num_nodes {
            return Err(Error::NodeOutOfRange {
                node: v as u64,
                num_nodes: self.num_nodes,
            });
        }
        Ok(())
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.check_node(v)?;
        Ok(self.edges.iter().filter(|p| p.touches(v)).count())
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let mut out: Vec<_> = self.edges.iter().filter_map(|p| p.other(v)).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Nodes with degree at least one, ascending.
    pub fn active_nodes(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.num_nodes as usize];
        for p in &self.edges {
            seen[p.lo as usize] = true;
            seen[p.hi as usize] = true;
        }
        seen.iter()
            .enumerate()
            .filter_map(|(v, &on)| on.then_some(v as NodeId))
            .collect()
    }

    /// Union of two snapshots over the same node set.
    pub fn union(&self, other: &Snapshot) -> Result<Snapshot> {
        if self.num_nodes != other.num_nodes {
            return Err(Error::NodeCountMismatch {
                t: 0,
                expected: self.num_nodes,
                found: other.num_nodes,
            });
        }
        let mut edges = Vec::with_capacity(self.edges.len() + other.edges.len());
        edges.extend_from_slice(&self.edges);
        edges.extend_from_slice(&other.edges);
        Ok(Snapshot::from_unsorted(self.num_nodes, edges))
    }
}

/// Ordered snapshot sequence over one node set, with the spec that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicGraph {
    num_nodes: u32,
    snapshots: Vec<Snapshot>,
    spec: TaskSpec,
}

impl DynamicGraph {
    pub fn new(spec: TaskSpec, snapshots: Vec<Snapshot>) -> Result<Self> {
        let first = snapshots.first().ok_or(Error::EmptyGraph)?;
        let num_nodes = first.num_nodes;
        for (t, s) in snapshots.iter().enumerate() {
            if s.num_nodes != num_nodes {
                return Err(Error::NodeCountMismatch {
                    t,
                    expected: num_nodes,
                    found: s.num_nodes,
                });
            }
        }
        Ok(DynamicGraph {
            num_nodes,
            snapshots,
            spec,
        })
    }

    pub fn num_nodes(&self) -> u32 {
        self.num_nodes
    }

    pub fn num_timesteps(&self) -> usize {
        self.snapshots.len()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.get(t)
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.spec
    }

    /// Sum of undirected edge counts over all timesteps.
    pub fn undirected_edge_count(&self) -> u64 {
        self.snapshots.iter().map(|s| s.num_edges() as u64).sum()
    }

    /// Edge count with every undirected edge counted once per orientation.
    pub fn directed_edge_count(&self) -> u64 {
        2 * self.undirected_edge_count()
    }
}
