//! Approximate personalized PageRank via forward push, plus an exact
//! power-iteration oracle and the two row-truncation rules (fixed top-`l`
//! and the per-node elbow scan).
//!
//! The push operates on the walk matrix `D^-1 A`, so in the `epsilon -> 0`
//! limit a row converges to the matching row of
//! `alpha (I - (1 - alpha) D^-1 A)^-1`. State is kept in hash maps keyed by
//! node, so the cost of one source depends on the pushed mass
//! (at most `1 / (alpha * epsilon)` pushes), not on the graph size.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Restart probability and push precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprParams {
    pub alpha: f64,
    pub epsilon: f64,
}

impl PprParams {
    pub fn new(alpha: f64, epsilon: f64) -> Result<PprParams> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(PprParams { alpha, epsilon })
    }
}

/// Scores of one source node over its support, sorted by descending score
/// with ties broken by ascending node index. Scores are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseScoreRow {
    source: NodeId,
    entries: Vec<(NodeId, f64)>,
}

impl SparseScoreRow {
    /// Normalizes the entry order; callers may pass entries in any order.
    pub fn new(source: NodeId, mut entries: Vec<(NodeId, f64)>) -> SparseScoreRow {
        entries.sort_unstable_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("scores must not be NaN")
                .then(a.0.cmp(&b.0))
        });
        debug_assert!(entries.iter().all(|&(_, s)| s >= 0.0));
        debug_assert!({
            let mut ids: Vec<NodeId> = entries.iter().map(|e| e.0).collect();
            ids.sort_unstable();
            ids.windows(2).all(|w| w[0] != w[1])
        });
        SparseScoreRow { source, entries }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score_of(&self, node: NodeId) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == node).map(|e| e.1)
    }

    pub fn score_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Forward push from `source`. Terminates once every residual satisfies
/// `r(u) < epsilon * degree(u)`, which bounds each estimate's error by
/// `epsilon * degree(u)` on undirected graphs.
pub fn push_appr(g: &Graph, source: NodeId, p: &PprParams) -> Result<SparseScoreRow> {
    g.check_node(source)?;
    if g.degree(source) == 0 {
        return Err(Error::DanglingSource(source));
    }

    let mut estimate: HashMap<NodeId, f64> = HashMap::new();
    let mut residual: HashMap<NodeId, f64> = HashMap::new();
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    let mut in_queue: HashMap<NodeId, ()> = HashMap::new();

    residual.insert(source, 1.0);
    if 1.0 >= p.epsilon * g.degree(source) as f64 {
        queue.push_back(source);
        in_queue.insert(source, ());
    }

    while let Some(u) = queue.pop_front() {
        in_queue.remove(&u);
        let r_u = match residual.remove(&u) {
            Some(r) if r > 0.0 => r,
            _ => continue,
        };
        let deg_u = g.degree(u);
        if deg_u == 0 {
            return Err(Error::DanglingNode(u));
        }

        *estimate.entry(u).or_insert(0.0) += p.alpha * r_u;
        let share = (1.0 - p.alpha) * r_u / deg_u as f64;
        if share == 0.0 {
            continue;
        }
        for &v in g.neighbors(u) {
            let deg_v = g.degree(v);
            if deg_v == 0 {
                return Err(Error::DanglingNode(v));
            }
            let r_v = residual.entry(v).or_insert(0.0);
            *r_v += share;
            if *r_v >= p.epsilon * deg_v as f64 && !in_queue.contains_key(&v) {
                queue.push_back(v);
                in_queue.insert(v, ());
            }
        }
    }

    let entries: Vec<(NodeId, f64)> = estimate.into_iter().filter(|&(_, s)| s > 0.0).collect();
    Ok(SparseScoreRow::new(source, entries))
}

const EXACT_PPR_MAX_ITERS: usize = 10_000;

/// Dense personalized PageRank by power iteration:
/// `p <- alpha * e_source + (1 - alpha) * p^T (D^-1 A)` until the largest
/// per-entry change drops below `tol`. Verification oracle; O(n + m) per
/// iteration and not meant for large graphs.
pub fn exact_ppr(g: &Graph, source: NodeId, alpha: f64, tol: f64) -> Result<Vec<f64>> {
    g.check_node(source)?;
    if g.degree(source) == 0 {
        return Err(Error::DanglingSource(source));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tol must be positive, got {tol}"
        )));
    }

    let n = g.n();
    let inv_deg: Vec<f64> = (0..n)
        .map(|u| {
            let d = g.degree(u as NodeId);
            if d == 0 {
                0.0
            } else {
                1.0 / d as f64
            }
        })
        .collect();

    let mut p = vec![0.0f64; n];
    p[source as usize] = 1.0;
    let mut next = vec![0.0f64; n];

    for _ in 0..EXACT_PPR_MAX_ITERS {
        let mut max_change = 0.0f64;
        for v in 0..n {
            let mut acc = 0.0;
            for &u in g.neighbors(v as NodeId) {
                acc += p[u as usize] * inv_deg[u as usize];
            }
            let val = (1.0 - alpha) * acc + if v == source as usize { alpha } else { 0.0 };
            max_change = max_change.max((val - p[v]).abs());
            next[v] = val;
        }
        std::mem::swap(&mut p, &mut next);
        if max_change < tol {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence {
        iters: EXACT_PPR_MAX_ITERS,
        tol,
    })
}

/// Keep the `min(l, len)` highest-scoring entries. The row order already
/// encodes the tie rule (ascending node index), so this is a prefix.
pub fn top_l(row: &SparseScoreRow, l: usize) -> SparseScoreRow {
    debug_assert!(l >= 1);
    let keep = l.min(row.entries.len());
    SparseScoreRow {
        source: row.source,
        entries: row.entries[..keep].to_vec(),
    }
}

/// Relative tolerance for deciding whether the largest perpendicular
/// distance in the elbow scan is unique.
const ELBOW_TIE_RTOL: f64 = 1e-12;

/// Number of non-source entries to keep, from the elbow of the descending
/// score curve. The source's own score is excluded before ranking. With two
/// candidate points the higher one wins; with more, the point farthest from
/// the line through the first and last points wins, falling back to the
/// first point when the maximum distance is not unique. Zero or one
/// candidates are returned as-is (degenerate inputs).
pub fn elbow_select(row: &SparseScoreRow) -> Result<usize> {
    let scores: Vec<f64> = row
        .entries
        .iter()
        .filter(|e| e.0 != row.source)
        .map(|e| e.1)
        .collect();
    let has_source = row.entries.len() != scores.len();

    let s = scores.len();
    if s == 0 {
        return if has_source {
            Ok(0)
        } else {
            Err(Error::EmptyRow(row.source))
        };
    }
    if s <= 2 {
        // One candidate keeps itself; two keep the one with maximal score,
        // which is rank 1 in a descending row.
        return Ok(1.min(s));
    }

    let x_first = 1.0;
    let y_first = scores[0];
    let x_last = s as f64;
    let y_last = scores[s - 1];
    let dx = x_last - x_first;
    let dy = y_last - y_first;
    let len = (dx * dx + dy * dy).sqrt();

    let mut best_rank = 0usize;
    let mut best_dist = f64::NEG_INFINITY;
    let mut distances = Vec::with_capacity(s);
    for (k, &y) in scores.iter().enumerate() {
        let x = (k + 1) as f64;
        let dist = (dx * (y_first - y) - (x_first - x) * dy).abs() / len;
        distances.push(dist);
        if dist > best_dist {
            best_dist = dist;
            best_rank = k + 1;
        }
    }

    let near_max = distances
        .iter()
        .filter(|&&d| d >= best_dist * (1.0 - ELBOW_TIE_RTOL))
        .count();
    if best_dist > 0.0 && near_max == 1 {
        Ok(best_rank)
    } else {
        Ok(1)
    }
}
