//! Erdős–Rényi and stochastic block model samplers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Pair, Snapshot};
use crate::rng::RngStream;

fn check_prob(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub num_nodes: u32,
    pub edge_prob: f64,
}

impl ErParams {
    pub fn new(num_nodes: u32, edge_prob: f64) -> Result<Self> {
        let p = ErParams {
            num_nodes,
            edge_prob,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_nodes == 0 {
            return Err(Error::InvalidSpec(
                "ER graph needs at least one node".into(),
            ));
        }
        check_prob("edge_prob", self.edge_prob)
    }
}

/// Disjoint blocks covering `0..num_nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<NodeId>>,
    block_of: Vec<u32>,
}

impl Partition {
    pub fn new(num_nodes: u32, blocks: Vec<Vec<NodeId>>) -> Result<Self> {
        const UNSET: u32 = u32::MAX;
        let mut block_of = vec![UNSET; num_nodes as usize];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for &v in block {
                let slot = block_of.get_mut(v as usize).ok_or_else(|| {
                    Error::InvalidPartition(format!("node {v} outside 0..{num_nodes}"))
                })?;
                if *slot != UNSET {
                    return Err(Error::InvalidPartition(format!(
                        "node {v} in blocks {} and {b}",
                        *slot
                    )));
                }
                *slot = b as u32;
            }
        }
        if let Some(v) = block_of.iter().position(|&b| b == UNSET) {
            return Err(Error::InvalidPartition(format!("node {v} not covered")));
        }
        Ok(Partition { blocks, block_of })
    }

    pub fn num_nodes(&self) -> u32 {
        self.block_of.len() as u32
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block_of(&self, v: NodeId) -> usize {
        self.block_of[v as usize] as usize
    }

    pub fn same_block(&self, u: NodeId, v: NodeId) -> bool {
        self.block_of[u as usize] == self.block_of[v as usize]
    }

    /// Block sizes, ascending.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<_> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    pub partition: Partition,
    pub p_intra: f64,
    pub p_inter: f64,
}

impl SbmParams {
    pub fn new(partition: Partition, p_intra: f64, p_inter: f64) -> Result<Self> {
        check_prob("p_intra", p_intra)?;
        check_prob("p_inter", p_inter)?;
        Ok(SbmParams {
            partition,
            p_intra,
            p_inter,
        })
    }

    /// Closed-form expected number of undirected edges.
    pub fn expected_edges(&self) -> f64 {
        let sizes: Vec<f64> = self
            .partition
            .blocks
            .iter()
            .map(|b| b.len() as f64)
            .collect();
        let n: f64 = sizes.iter().sum();
        let intra: f64 = sizes.iter().map(|s| s * (s - 1.0) / 2.0).sum();
        let inter = n * (n - 1.0) / 2.0 - intra;
        self.p_intra * intra + self.p_inter * inter
    }
}

/// Independent Bernoulli(p) trial for every pair of `0..n`, ids shifted by
/// `offset`. Pairs come out sorted.
pub(crate) fn bernoulli_pairs<R: Rng>(rng: &mut R, n: u32, p: f64, offset: NodeId) -> Vec<Pair> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push(Pair::ordered(u + offset, v + offset));
            }
        }
    }
    edges
}

pub fn sample_er(params: &ErParams, stream: &RngStream) -> Result<Snapshot> {
    params.validate()?;
    let mut rng = stream.rng();
    let edges = bernoulli_pairs(&mut rng, params.num_nodes, params.edge_prob, 0);
    Ok(Snapshot::from_sorted(params.num_nodes, edges))
}

pub fn sample_sbm(params: &SbmParams, stream: &RngStream) -> Result<Snapshot> {
    check_prob("p_intra", params.p_intra)?;
    check_prob("p_inter", params.p_inter)?;
    let part = &params.partition;
    let n = part.num_nodes();
    let mut rng = stream.rng();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if part.same_block(u, v) {
                params.p_intra
            } else {
                params.p_inter
            };
            if rng.gen::<f64>() < p {
                edges.push(Pair::ordered(u, v));
            }
        }
    }
    Ok(Snapshot::from_sorted(n, edges))
}

/// Uniformly random permutation of the nodes cut into `num_blocks` blocks
/// whose sizes differ by at most one; the larger blocks come last.
pub fn random_equal_partition(
    num_nodes: u32,
    num_blocks: u32,
    stream: &RngStream,
) -> Result<Partition> {
    if num_blocks == 0 {
        return Err(Error::InvalidPartition("zero blocks".into()));
    }
    if num_nodes < num_blocks {
        return Err(Error::InvalidPartition(format!(
            "{num_nodes} nodes cannot fill {num_blocks} blocks"
        )));
    }
    let mut perm: Vec<NodeId> = (0..num_nodes).collect();
    perm.shuffle(&mut stream.rng());

    let base = (num_nodes / num_blocks) as usize;
    let extra = (num_nodes % num_blocks) as usize;
    let small = num_blocks as usize - extra;
    let mut rest = perm.as_slice();
    let mut blocks = Vec::with_capacity(num_blocks as usize);
    for b in 0..num_blocks as usize {
        let size = if b < small { base } else { base + 1 };
        let (head, tail) = rest.split_at(size);
        let mut block = head.to_vec();
        block.sort_unstable();
        blocks.push(block);
        rest = tail;
    }
    Partition::new(num_nodes, blocks)
}
