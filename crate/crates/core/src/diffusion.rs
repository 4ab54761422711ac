//! Per-node propagation rows and the two inference modes.
//!
//! A row pairs the truncated push scores of one source with CoreRank
//! weights normalized over the same support, so both live on an identical
//! sparsity pattern chosen purely by PPR. The gate mixes them:
//! `w = (1 - gamma) * ppr + gamma * core`.
//!
//! Inference either power-iterates class logits over the whole graph
//! ([`ot_inference`], no CoreRank involved) or builds rows explicitly for
//! the requested targets ([`tt_inference`]).

use std::collections::HashMap;
use std::io::{Read, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::kcore::CoreScores;
use crate::matrix::Mat;
use crate::parallel;
use crate::ppr::{self, PprParams, SparseScoreRow};

/// Row truncation rule: a fixed neighbor budget for every node, or a
/// per-node count from the elbow of the score curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMode {
    Fixed(usize),
    Dynamic,
}

/// How trained models classify unseen nodes: `Ot` power-iterates logits
/// like the plain PPR baseline; `Tt` rebuilds gated rows per target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceMode {
    Ot,
    Tt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConfig {
    pub ppr: PprParams,
    pub l_mode: LMode,
    pub inference_mode: InferenceMode,
    pub power_iters: usize,
}

impl DiffusionConfig {
    pub fn new(
        ppr: PprParams,
        l_mode: LMode,
        inference_mode: InferenceMode,
        power_iters: usize,
    ) -> Result<DiffusionConfig> {
        if let LMode::Fixed(l) = l_mode {
            if l < 1 {
                return Err(Error::InvalidConfig("fixed l must be >= 1".into()));
            }
        }
        if power_iters < 1 {
            return Err(Error::InvalidConfig("power_iters must be >= 1".into()));
        }
        Ok(DiffusionConfig {
            ppr,
            l_mode,
            inference_mode,
            power_iters,
        })
    }
}

/// Truncated PPR scores and row-normalized CoreRank weights of one source,
/// on a shared index set that always contains the source.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRow {
    pub source: NodeId,
    pub indices: Vec<NodeId>,
    pub ppr_weights: Vec<f64>,
    pub core_weights: Vec<f64>,
}

impl PropagationRow {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Push, truncate, and attach normalized CoreRank weights.
///
/// Fixed mode keeps the top-`l` scores; if that would drop the source, the
/// lowest kept entry makes room for it. Dynamic mode keeps the top-`l_i`
/// non-source scores chosen by the elbow scan plus the source itself. A
/// support whose CoreRanks are all zero gets uniform core weights.
pub fn build_row(
    g: &Graph,
    cores: &CoreScores,
    source: NodeId,
    cfg: &DiffusionConfig,
) -> Result<PropagationRow> {
    let pushed = ppr::push_appr(g, source, &cfg.ppr)?;
    if pushed.is_empty() {
        return Err(Error::EmptyRow(source));
    }

    let kept = match cfg.l_mode {
        LMode::Fixed(l) => {
            let truncated = ppr::top_l(&pushed, l);
            if truncated.score_of(source).is_some() {
                truncated
            } else {
                let own = pushed
                    .score_of(source)
                    .expect("push support always holds the source");
                let mut entries = truncated.entries().to_vec();
                entries.pop();
                entries.push((source, own));
                SparseScoreRow::new(source, entries)
            }
        }
        LMode::Dynamic => {
            let l_i = ppr::elbow_select(&pushed)?;
            let mut entries: Vec<(NodeId, f64)> = pushed
                .entries()
                .iter()
                .filter(|e| e.0 != source)
                .take(l_i)
                .copied()
                .collect();
            let own = pushed
                .score_of(source)
                .expect("push support always holds the source");
            entries.push((source, own));
            SparseScoreRow::new(source, entries)
        }
    };

    let indices: Vec<NodeId> = kept.entries().iter().map(|e| e.0).collect();
    let ppr_weights: Vec<f64> = kept.entries().iter().map(|e| e.1).collect();

    let ranks: Vec<f64> = indices
        .iter()
        .map(|&u| cores.corerank[u as usize] as f64)
        .collect();
    let total: f64 = ranks.iter().sum();
    let core_weights: Vec<f64> = if total > 0.0 {
        ranks.iter().map(|&r| r / total).collect()
    } else {
        let uniform = 1.0 / indices.len() as f64;
        vec![uniform; indices.len()]
    };

    let row = PropagationRow {
        source,
        indices,
        ppr_weights,
        core_weights,
    };
    assert_row_invariants(&row);
    Ok(row)
}

/// Invariants every built row must carry: shared index pattern, source
/// membership, and core weights summing to one. Kept as hard assertions.
fn assert_row_invariants(row: &PropagationRow) {
    assert!(
        !row.indices.is_empty()
            && row.indices.len() == row.ppr_weights.len()
            && row.indices.len() == row.core_weights.len(),
        "row arrays must be non-empty and of equal length"
    );
    assert!(
        row.indices.contains(&row.source),
        "row must include its source"
    );
    let sum: f64 = row.core_weights.iter().sum();
    assert!(
        (sum - 1.0).abs() <= 1e-9,
        "core weights of node {} sum to {sum}, not 1",
        row.source
    );
}

/// Convex combination of the two weight vectors at gate value `gamma`.
pub fn combine_gamma(row: &PropagationRow, gamma: f64) -> Vec<f64> {
    debug_assert!((0.0..1.0).contains(&gamma));
    row.ppr_weights
        .iter()
        .zip(&row.core_weights)
        .map(|(&p, &c)| (1.0 - gamma) * p + gamma * c)
        .collect()
}

/// Power-iterate class logits: `Q <- (1 - alpha) (D^-1 A) Q + alpha H`,
/// starting from `Q = H`. Converges to the product of the full PPR matrix
/// with `H`. Rows are independent, so each sweep parallelizes over nodes.
pub fn ot_inference(g: &Graph, h: &Mat, alpha: f64, iters: usize) -> Result<Mat> {
    if h.rows() != g.n() {
        return Err(Error::DimMismatch(format!(
            "H has {} rows but the graph has {} nodes",
            h.rows(),
            g.n()
        )));
    }
    if iters < 1 {
        return Err(Error::InvalidConfig("iters must be >= 1".into()));
    }
    for u in 0..g.n() {
        if g.degree(u as NodeId) == 0 {
            return Err(Error::DanglingNode(u as NodeId));
        }
    }

    let c = h.cols();
    let mut q = h.clone();
    let mut next = Mat::zeros(g.n(), c);
    for _ in 0..iters {
        {
            let q_ref = &q;
            parallel::chunks_mut(next.data_mut(), c)
                .enumerate()
                .for_each(|(v, out)| {
                    let nbrs = g.neighbors(v as NodeId);
                    let inv_deg = 1.0 / nbrs.len() as f64;
                    out.copy_from_slice(h.row(v));
                    for x in out.iter_mut() {
                        *x *= alpha;
                    }
                    for &u in nbrs {
                        let qu = q_ref.row(u as usize);
                        for (x, &val) in out.iter_mut().zip(qu) {
                            *x += (1.0 - alpha) * inv_deg * val;
                        }
                    }
                });
        }
        std::mem::swap(&mut q, &mut next);
    }
    Ok(q)
}

/// Explicit-row inference for a set of targets: build each target's gated
/// row, fetch `H` once per distinct support node, and take weighted sums.
/// `h` must return a length-`c` logit vector for any requested node.
pub fn tt_inference<F>(
    g: &Graph,
    cores: &CoreScores,
    h: F,
    gamma: f64,
    cfg: &DiffusionConfig,
    targets: &[NodeId],
    c: usize,
) -> Result<Mat>
where
    F: Fn(NodeId) -> Vec<f64> + Sync,
{
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidConfig(format!(
            "gamma must lie in [0, 1), got {gamma}"
        )));
    }
    let rows: Vec<PropagationRow> = parallel::slice_iter(targets)
        .map(|&t| build_row(g, cores, t, cfg))
        .collect::<Result<_>>()?;

    let mut support: Vec<NodeId> = rows.iter().flat_map(|r| r.indices.iter().copied()).collect();
    support.sort_unstable();
    support.dedup();

    let mut h_cache: HashMap<NodeId, Vec<f64>> = HashMap::with_capacity(support.len());
    for &u in &support {
        let hu = h(u);
        if hu.len() != c {
            return Err(Error::DimMismatch(format!(
                "H({u}) has length {}, expected {c}",
                hu.len()
            )));
        }
        h_cache.insert(u, hu);
    }

    let mut out = Mat::zeros(targets.len(), c);
    parallel::chunks_mut(out.data_mut(), c.max(1))
        .zip(parallel::slice_iter(&rows))
        .for_each(|(logits, row)| {
            let weights = combine_gamma(row, gamma);
            for (j, &u) in row.indices.iter().enumerate() {
                let hu = &h_cache[&u];
                for (x, &val) in logits.iter_mut().zip(hu) {
                    *x += weights[j] * val;
                }
            }
        });
    Ok(out)
}

const ROW_CACHE_MAGIC: &[u8; 7] = b"CPRROW1";

/// Write rows as the binary cache format: magic `CPRROW1`, then per row a
/// little-endian `u64` source, `u64` length, and `length` triples of
/// `(u64 index, f64 ppr weight, f64 core weight)`.
pub fn write_row_cache<W: Write>(mut w: W, rows: &[PropagationRow]) -> Result<()> {
    w.write_all(ROW_CACHE_MAGIC)?;
    for row in rows {
        w.write_all(&(row.source as u64).to_le_bytes())?;
        w.write_all(&(row.len() as u64).to_le_bytes())?;
        for j in 0..row.len() {
            w.write_all(&(row.indices[j] as u64).to_le_bytes())?;
            w.write_all(&row.ppr_weights[j].to_le_bytes())?;
            w.write_all(&row.core_weights[j].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a cache produced by [`write_row_cache`].
pub fn read_row_cache<R: Read>(mut r: R) -> Result<Vec<PropagationRow>> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != ROW_CACHE_MAGIC {
        return Err(Error::BadFormat(format!(
            "row cache magic mismatch: {:?}",
            magic
        )));
    }
    let mut rows = Vec::new();
    loop {
        let source = match read_u64_or_eof(&mut r)? {
            Some(v) => v,
            None => break,
        };
        let len = read_u64(&mut r)? as usize;
        let mut indices = Vec::with_capacity(len);
        let mut ppr_weights = Vec::with_capacity(len);
        let mut core_weights = Vec::with_capacity(len);
        for _ in 0..len {
            let idx = read_u64(&mut r)?;
            indices.push(u32::try_from(idx).map_err(|_| {
                Error::BadFormat(format!("row index {idx} exceeds the node id range"))
            })?);
            ppr_weights.push(f64::from_le_bytes(read_array(&mut r)?));
            core_weights.push(f64::from_le_bytes(read_array(&mut r)?));
        }
        rows.push(PropagationRow {
            source: u32::try_from(source)
                .map_err(|_| Error::BadFormat(format!("source {source} out of range")))?,
            indices,
            ppr_weights,
            core_weights,
        });
    }
    Ok(rows)
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

/// Distinguishes clean end-of-cache from a torn record.
fn read_u64_or_eof<R: Read>(r: &mut R) -> Result<Option<u64>> {
    let mut buf = [0u8; 8];
    let mut filled = 0;
    while filled < 8 {
        let k = r.read(&mut buf[filled..])?;
        if k == 0 {
            if filled == 0 {
                return Ok(None);
            }
            return Err(Error::BadFormat("truncated row cache".into()));
        }
        filled += k;
    }
    Ok(Some(u64::from_le_bytes(buf)))
}
