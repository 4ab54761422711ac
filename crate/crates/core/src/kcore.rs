//! k-core decomposition and CoreRank.
//!
//! Core numbers come from a bucket peel in O(n + m): nodes are kept sorted
//! by current degree, and removing the minimum-degree node only ever shifts
//! its neighbors down one bucket. The CoreRank of a node is the sum of its
//! neighbors' core numbers; a self-loop contributes the node's own core
//! number once.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Per-node core numbers and CoreRank values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreScores {
    pub core_number: Vec<u32>,
    pub corerank: Vec<u64>,
}

impl CoreScores {
    /// Run the decomposition and the neighbor sums in one go.
    pub fn compute(g: &Graph) -> CoreScores {
        let core_number = core_numbers(g);
        let corerank = corerank(g, &core_number).expect("lengths match by construction");
        CoreScores {
            core_number,
            corerank,
        }
    }
}

/// Core number of every node: the largest `k` such that the node lies in a
/// subgraph where all degrees are at least `k`. Degree-0 nodes get 0.
pub fn core_numbers(g: &Graph) -> Vec<u32> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }

    let mut degree: Vec<usize> = (0..n).map(|u| g.degree(u as NodeId)).collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);

    // bin[d] = start of the degree-d block in vert; vert is sorted by degree.
    let mut bin = vec![0usize; max_degree + 2];
    for &d in &degree {
        bin[d + 1] += 1;
    }
    for d in 0..=max_degree {
        bin[d + 1] += bin[d];
    }
    let mut start = bin.clone();
    let mut vert = vec![0u32; n];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        let p = start[degree[v]];
        vert[p] = v as u32;
        pos[v] = p;
        start[degree[v]] += 1;
    }

    let mut core = vec![0u32; n];
    for i in 0..n {
        let v = vert[i] as usize;
        core[v] = degree[v] as u32;
        for &u in g.neighbors(v as NodeId) {
            let u = u as usize;
            if degree[u] > degree[v] {
                // Swap u with the first node of its degree block, then
                // shrink the block boundary by one.
                let du = degree[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw] as usize;
                if u != w {
                    vert[pu] = w as u32;
                    vert[pw] = u as u32;
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    core
}

/// CoreRank: `result[i] = sum of core numbers over i's neighbor list`.
/// Isolated nodes get 0. Errors if `cores` does not match the node count.
pub fn corerank(g: &Graph, cores: &[u32]) -> Result<Vec<u64>> {
    if cores.len() != g.n() {
        return Err(Error::DimMismatch(format!(
            "core vector length {} != node count {}",
            cores.len(),
            g.n()
        )));
    }
    Ok((0..g.n())
        .map(|i| {
            g.neighbors(i as NodeId)
                .iter()
                .map(|&u| cores[u as usize] as u64)
                .sum()
        })
        .collect())
}
