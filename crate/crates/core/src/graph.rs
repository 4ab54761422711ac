//! Immutable undirected graph in compressed sparse row form.

use std::io::BufRead;

use crate::error::{Error, Result};

/// Node index. Dense ids `0..n-1`; inputs with gaps get implicit
/// degree-0 nodes up to the largest id seen.
pub type NodeId = u32;

/// Symmetrized adjacency in CSR form. Neighbor lists are sorted ascending
/// with no duplicates; `j in neighbors(i)` iff `i in neighbors(j)`. A
/// self-loop appears once in its node's list and adds one to its degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    self_loop_flag: bool,
}

impl Graph {
    /// Build from an undirected edge list. Edges are symmetrized and
    /// deduplicated; `n` covers every id in `edges` and is at least `min_n`.
    pub fn from_edges(edges: &[(NodeId, NodeId)], min_n: usize) -> Graph {
        let mut n = min_n;
        for &(u, v) in edges {
            n = n.max(u as usize + 1).max(v as usize + 1);
        }

        let mut pairs: Vec<(NodeId, NodeId)> = Vec::with_capacity(edges.len() * 2);
        for &(u, v) in edges {
            pairs.push((u, v));
            if u != v {
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut self_loop_flag = false;
        let mut m = 0usize;
        let neighbors: Vec<NodeId> = pairs
            .iter()
            .map(|&(u, v)| {
                if u == v {
                    self_loop_flag = true;
                    m += 1;
                } else if u < v {
                    m += 1;
                }
                v
            })
            .collect();

        Graph {
            n,
            m,
            offsets,
            neighbors,
            self_loop_flag,
        }
    }

    /// Parse a text edge list: lines `u v` with zero-based ids, `#` starts a
    /// comment line, blank lines are skipped. Duplicate edges collapse and
    /// `n = 1 + max id`.
    pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
        let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let u = parse_id(it.next(), line_no)?;
            let v = parse_id(it.next(), line_no)?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected exactly two node ids".into(),
                });
            }
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::EmptyInput("edge list holds no edges".into()));
        }
        Ok(Graph::from_edges(&edges, 0))
    }

    /// Node count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Undirected edge count (self-loops count once).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Whether any self-loop was present in the input.
    pub fn has_self_loops(&self) -> bool {
        self.self_loop_flag
    }

    /// Number of entries in `u`'s neighbor list (a self-loop contributes one).
    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    /// Sorted neighbor list of `u`.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if (u as usize) < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: u as usize,
                n: self.n,
            })
        }
    }

    /// CSR offsets array, length `n + 1`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Total neighbor entries; `2m` when the graph is loop-free.
    pub fn num_entries(&self) -> usize {
        self.neighbors.len()
    }

    /// Serialize back to edge-list text (one `u v` line per undirected edge).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for u in 0..self.n as NodeId {
            for &v in self.neighbors(u) {
                if v >= u {
                    out.push_str(&format!("{} {}\n", u, v));
                }
            }
        }
        out
    }
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<NodeId> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: "expected two node ids".into(),
    })?;
    tok.parse::<NodeId>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad node id {:?}: {}", tok, e),
    })
}
