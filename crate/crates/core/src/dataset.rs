//! Dataset loading and synthetic benchmark generation.
//!
//! Features are stored as 32-bit floats (`n x f`, row-major) and can be
//! read from headerless CSV or the `CPPRF1` binary format. Labels are
//! `node<TAB>class` text; splits are either three id-per-line files or one
//! file with `[train]`/`[val]`/`[test]` sections.
//!
//! The stochastic block model generator plants `blocks` communities with
//! edge probability `p_in` inside and `p_out` across, one-hot block
//! indicators plus Gaussian noise as features, and the block id as label.
//! Pair sampling walks geometric skips, so cost scales with the number of
//! edges drawn rather than candidate pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Row-major `n x f` feature matrix in 32-bit storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    n: usize,
    f: usize,
    data: Vec<f32>,
}

impl Features {
    pub fn zeros(n: usize, f: usize) -> Features {
        Features {
            n,
            f,
            data: vec![0.0; n * f],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> usize {
        self.f
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.f..(i + 1) * self.f]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.f..(i + 1) * self.f]
    }

    /// Copy one row into an f64 buffer (the training math runs in f64).
    pub fn fill_row_f64(&self, i: usize, out: &mut [f64]) {
        for (x, &v) in out.iter_mut().zip(self.row(i)) {
            *x = v as f64;
        }
    }
}

/// Features, class ids, class count, and the three disjoint splits.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Features,
    pub labels: Vec<u32>,
    pub n_classes: usize,
    pub train: Vec<NodeId>,
    pub val: Vec<NodeId>,
    pub test: Vec<NodeId>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        let n = self.features.n();
        if self.labels.len() != n {
            return Err(Error::DimMismatch(format!(
                "{} labels for {} nodes",
                self.labels.len(),
                n
            )));
        }
        if let Some(&y) = self.labels.iter().find(|&&y| y as usize >= self.n_classes) {
            return Err(Error::InvalidConfig(format!(
                "label {y} out of range for {} classes",
                self.n_classes
            )));
        }
        let mut seen = vec![false; n];
        for split in [&self.train, &self.val, &self.test] {
            for &u in split {
                if u as usize >= n {
                    return Err(Error::NodeOutOfRange { index: u as usize, n });
                }
                if seen[u as usize] {
                    return Err(Error::InvalidConfig(format!(
                        "node {u} appears in more than one split"
                    )));
                }
                seen[u as usize] = true;
            }
        }
        Ok(())
    }
}

const FEATURES_MAGIC: &[u8; 6] = b"CPPRF1";

/// Load features from a path, sniffing the binary magic and otherwise
/// parsing headerless CSV. Both loaders agree on equivalent content.
pub fn load_features(path: &Path) -> Result<Features> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 6 && &bytes[..6] == FEATURES_MAGIC {
        read_features_bin(bytes.as_slice())
    } else {
        parse_features_csv(std::str::from_utf8(&bytes).map_err(|e| {
            Error::BadFormat(format!("feature file is neither CPPRF1 nor UTF-8 CSV: {e}"))
        })?)
    }
}

pub fn read_features_bin<R: Read>(mut r: R) -> Result<Features> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != FEATURES_MAGIC {
        return Err(Error::BadFormat(format!(
            "feature magic mismatch: {magic:?}"
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let n = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let f = u64::from_le_bytes(buf8) as usize;
    let mut data = vec![0.0f32; n * f];
    let mut buf4 = [0u8; 4];
    for x in &mut data {
        r.read_exact(&mut buf4)?;
        *x = f32::from_le_bytes(buf4);
    }
    Ok(Features { n, f, data })
}

pub fn write_features_bin<W: Write>(mut w: W, feats: &Features) -> Result<()> {
    w.write_all(FEATURES_MAGIC)?;
    w.write_all(&(feats.n as u64).to_le_bytes())?;
    w.write_all(&(feats.f as u64).to_le_bytes())?;
    for &x in &feats.data {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn parse_features_csv(text: &str) -> Result<Features> {
    let mut data: Vec<f32> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut count = 0usize;
        for tok in line.split(',') {
            let v: f32 = tok.trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad float {:?}: {e}", tok.trim()),
            })?;
            data.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("row has {count} columns, expected {w}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyInput("feature CSV holds no rows".into()));
    }
    Ok(Features {
        n: rows,
        f: width.unwrap(),
        data,
    })
}

/// Parse `node<TAB>class` lines into a dense label vector; every id in
/// `0..=max` must appear exactly once. Returns labels and the class count.
pub fn parse_labels(text: &str) -> Result<(Vec<u32>, usize)> {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<u32> {
            tok.ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected node and class".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad integer: {e}"),
            })
        };
        let node = parse(it.next())?;
        let class = parse(it.next())?;
        pairs.push((node, class));
    }
    if pairs.is_empty() {
        return Err(Error::EmptyInput("label file holds no entries".into()));
    }
    let n = pairs.iter().map(|p| p.0).max().unwrap() as usize + 1;
    let mut labels = vec![u32::MAX; n];
    for (node, class) in pairs {
        if labels[node as usize] != u32::MAX {
            return Err(Error::BadFormat(format!("duplicate label for node {node}")));
        }
        labels[node as usize] = class;
    }
    if let Some(missing) = labels.iter().position(|&y| y == u32::MAX) {
        return Err(Error::BadFormat(format!("node {missing} has no label")));
    }
    let c = labels.iter().copied().max().unwrap() as usize + 1;
    Ok((labels, c))
}

pub fn load_labels(path: &Path) -> Result<(Vec<u32>, usize)> {
    parse_labels(&fs::read_to_string(path)?)
}

pub fn write_labels<W: Write>(mut w: W, labels: &[u32]) -> Result<()> {
    for (node, &class) in labels.iter().enumerate() {
        writeln!(w, "{node}\t{class}")?;
    }
    Ok(())
}

/// Load splits from either a directory holding `train.txt`, `val.txt`,
/// `test.txt` (one id per line) or a single sectioned file.
pub fn load_splits(path: &Path) -> Result<(Vec<NodeId>, Vec<NodeId>, Vec<NodeId>)> {
    if path.is_dir() {
        let read_ids = |name: &str| -> Result<Vec<NodeId>> {
            let text = fs::read_to_string(path.join(name))?;
            parse_id_lines(&text)
        };
        Ok((
            read_ids("train.txt")?,
            read_ids("val.txt")?,
            read_ids("test.txt")?,
        ))
    } else {
        parse_split_sections(&fs::read_to_string(path)?)
    }
}

fn parse_id_lines(text: &str) -> Result<Vec<NodeId>> {
    let mut ids = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        ids.push(trimmed.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad node id: {e}"),
        })?);
    }
    Ok(ids)
}

pub fn parse_split_sections(text: &str) -> Result<(Vec<NodeId>, Vec<NodeId>, Vec<NodeId>)> {
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    let mut current: Option<&mut Vec<NodeId>> = None;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed {
            "[train]" => current = Some(&mut train),
            "[val]" => current = Some(&mut val),
            "[test]" => current = Some(&mut test),
            _ => {
                let id = trimmed.parse().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad node id: {e}"),
                })?;
                match current {
                    Some(ref mut v) => v.push(id),
                    None => {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: "node id before any [train]/[val]/[test] section".into(),
                        })
                    }
                }
            }
        }
    }
    Ok((train, val, test))
}

pub fn write_split_sections<W: Write>(
    mut w: W,
    train: &[NodeId],
    val: &[NodeId],
    test: &[NodeId],
) -> Result<()> {
    for (name, ids) in [("train", train), ("val", val), ("test", test)] {
        writeln!(w, "[{name}]")?;
        for &id in ids {
            writeln!(w, "{id}")?;
        }
    }
    Ok(())
}

/// Stochastic block model with planted community labels.
#[derive(Debug, Clone, Copy)]
pub struct SbmParams {
    pub n: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_noise: f64,
    pub seed: u64,
}

impl SbmParams {
    fn validate(&self) -> Result<()> {
        if self.blocks < 2 {
            return Err(Error::InvalidConfig("need at least 2 blocks".into()));
        }
        if self.n < self.blocks {
            return Err(Error::InvalidConfig(format!(
                "{} nodes cannot fill {} blocks; some class would be empty",
                self.n, self.blocks
            )));
        }
        if !(self.p_out >= 0.0 && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "require 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
                self.p_in, self.p_out
            )));
        }
        if self.feature_noise < 0.0 {
            return Err(Error::InvalidConfig("feature_noise must be >= 0".into()));
        }
        Ok(())
    }
}

/// Contiguous block boundaries; the first `n % blocks` blocks take the
/// extra node.
fn block_ranges(n: usize, blocks: usize) -> Vec<std::ops::Range<usize>> {
    let base = n / blocks;
    let extra = n % blocks;
    let mut ranges = Vec::with_capacity(blocks);
    let mut start = 0;
    for b in 0..blocks {
        let size = base + usize::from(b < extra);
        ranges.push(start..start + size);
        start += size;
    }
    ranges
}

/// Visit the indices of a Bernoulli(p) subset of `0..total` in order,
/// jumping geometrically between hits.
fn sample_subset<F: FnMut(u64)>(total: u64, p: f64, rng: &mut ChaCha8Rng, mut hit: F) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for k in 0..total {
            hit(k);
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut cursor: u64 = 0;
    loop {
        let u: f64 = rng.random();
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - cursor) as f64 {
            return;
        }
        cursor += skip as u64;
        hit(cursor);
        cursor += 1;
        if cursor >= total {
            return;
        }
    }
}

/// Pair `(i, j)`, `i < j < n`, from its rank in the lexicographic order of
/// all unordered pairs. Float guess plus integer fixup.
fn unrank_pair(k: u64, n: u64) -> (u64, u64) {
    let start = |i: u64| i * n - i * (i + 1) / 2;
    let nf = n as f64 - 0.5;
    let guess = (nf - (nf * nf - 2.0 * k as f64).max(0.0).sqrt()).floor();
    let mut i = (guess.max(0.0) as u64).min(n - 2);
    while start(i) > k {
        i -= 1;
    }
    while i + 1 <= n - 2 && start(i + 1) <= k {
        i += 1;
    }
    let j = i + 1 + (k - start(i));
    (i, j)
}

/// Graph half of the SBM; exposed separately because scalability probes
/// only need edges, not features.
pub fn generate_sbm_graph(params: &SbmParams) -> Result<Graph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let ranges = block_ranges(params.n, params.blocks);
    let block_of: Vec<u32> = {
        let mut v = vec![0u32; params.n];
        for (b, r) in ranges.iter().enumerate() {
            for x in &mut v[r.clone()] {
                *x = b as u32;
            }
        }
        v
    };

    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for r in &ranges {
        let b = (r.end - r.start) as u64;
        if b < 2 {
            continue;
        }
        let offset = r.start as u64;
        sample_subset(b * (b - 1) / 2, params.p_in, &mut rng, |k| {
            let (i, j) = unrank_pair(k, b);
            edges.push(((offset + i) as NodeId, (offset + j) as NodeId));
        });
    }
    if params.p_out > 0.0 {
        let n = params.n as u64;
        sample_subset(n * (n - 1) / 2, params.p_out, &mut rng, |k| {
            let (i, j) = unrank_pair(k, n);
            if block_of[i as usize] != block_of[j as usize] {
                edges.push((i as NodeId, j as NodeId));
            }
        });
    }

    // Re-wire isolated nodes so every node can act as a push source.
    let probe = Graph::from_edges(&edges, params.n);
    for u in 0..params.n {
        if probe.degree(u as NodeId) == 0 {
            let r = &ranges[block_of[u] as usize];
            let v = if r.end - r.start >= 2 {
                loop {
                    let cand = rng.random_range(r.start..r.end);
                    if cand != u {
                        break cand;
                    }
                }
            } else {
                loop {
                    let cand = rng.random_range(0..params.n);
                    if cand != u {
                        break cand;
                    }
                }
            };
            edges.push((u as NodeId, v as NodeId));
        }
    }
    Ok(Graph::from_edges(&edges, params.n))
}

/// Full SBM bundle: graph, block-indicator features with Gaussian noise,
/// block labels, and a stratified 10/10/80 split.
pub fn generate_sbm(params: &SbmParams) -> Result<(Graph, Dataset)> {
    let graph = generate_sbm_graph(params)?;
    let ranges = block_ranges(params.n, params.blocks);

    // Distinct stream from the edge sampler so graph and features can be
    // regenerated independently.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut features = Features::zeros(params.n, params.blocks);
    let mut labels = vec![0u32; params.n];
    for (b, r) in ranges.iter().enumerate() {
        for u in r.clone() {
            labels[u] = b as u32;
            let row = features.row_mut(u);
            row[b] = 1.0;
            if params.feature_noise > 0.0 {
                for x in row.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *x += (params.feature_noise * z) as f32;
                }
            }
        }
    }

    let (train, val, test) = stratified_split(&labels, params.blocks, 0.1, 0.1, &mut rng)?;
    let ds = Dataset {
        features,
        labels,
        n_classes: params.blocks,
        train,
        val,
        test,
    };
    ds.validate()?;
    Ok((graph, ds))
}

/// Per-class shuffle-and-slice split. Each class contributes at least one
/// node to train and val, and its fractions round down.
pub fn stratified_split(
    labels: &[u32],
    n_classes: usize,
    train_frac: f64,
    val_frac: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<NodeId>, Vec<NodeId>, Vec<NodeId>)> {
    let mut per_class: Vec<Vec<NodeId>> = vec![Vec::new(); n_classes];
    for (u, &y) in labels.iter().enumerate() {
        per_class[y as usize].push(u as NodeId);
    }
    if let Some(empty) = per_class.iter().position(|c| c.is_empty()) {
        return Err(Error::InvalidConfig(format!("class {empty} has no nodes")));
    }

    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for members in per_class.iter_mut() {
        members.shuffle(rng);
        let n_c = members.len();
        let n_train = ((n_c as f64 * train_frac) as usize).max(1);
        let n_val = ((n_c as f64 * val_frac) as usize).max(1);
        if n_train + n_val >= n_c {
            return Err(Error::InvalidConfig(format!(
                "class of size {n_c} too small for the requested split"
            )));
        }
        train.extend_from_slice(&members[..n_train]);
        val.extend_from_slice(&members[n_train..n_train + n_val]);
        test.extend_from_slice(&members[n_train + n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok((train, val, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_identity_matrix() {
        let f = parse_features_csv("1,0\n0,1").unwrap();
        assert_eq!((f.n(), f.f()), (2, 2));
        assert_eq!(f.row(0), &[1.0, 0.0]);
        assert_eq!(f.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn csv_ragged_row_reports_number() {
        let err = parse_features_csv("1,2,3\n4,5").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn features_binary_round_trip_is_bit_identical() {
        let mut f = Features::zeros(3, 2);
        for (i, x) in f.data.iter_mut().enumerate() {
            *x = (i as f32) * 0.1 - 0.25;
        }
        let mut buf = Vec::new();
        write_features_bin(&mut buf, &f).unwrap();
        let back = read_features_bin(buf.as_slice()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn binary_and_csv_agree() {
        let csv = parse_features_csv("0.5,1.5\n-2,0.25").unwrap();
        let mut buf = Vec::new();
        write_features_bin(&mut buf, &csv).unwrap();
        let bin = read_features_bin(buf.as_slice()).unwrap();
        assert_eq!(csv, bin);
    }

    #[test]
    fn labels_round_trip_and_class_count() {
        let mut buf = Vec::new();
        write_labels(&mut buf, &[0, 2, 1, 2]).unwrap();
        let (labels, c) = parse_labels(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(labels, vec![0, 2, 1, 2]);
        assert_eq!(c, 3);
    }

    #[test]
    fn labels_require_dense_ids() {
        assert!(parse_labels("0\t1\n2\t0").is_err());
        assert!(parse_labels("0\t1\n0\t1").is_err());
    }

    #[test]
    fn split_sections_round_trip() {
        let mut buf = Vec::new();
        write_split_sections(&mut buf, &[0, 1], &[2], &[3, 4, 5]).unwrap();
        let (tr, va, te) = parse_split_sections(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(tr, vec![0, 1]);
        assert_eq!(va, vec![2]);
        assert_eq!(te, vec![3, 4, 5]);
    }

    #[test]
    fn unrank_pair_is_bijective_small() {
        for n in 2u64..=9 {
            let total = n * (n - 1) / 2;
            let mut seen = Vec::new();
            for k in 0..total {
                let (i, j) = unrank_pair(k, n);
                assert!(i < j && j < n, "bad pair ({i},{j}) at k={k}, n={n}");
                seen.push((i, j));
            }
            seen.dedup();
            assert_eq!(seen.len() as u64, total);
        }
    }

    #[test]
    fn disjoint_cliques_when_p_out_zero() {
        let params = SbmParams {
            n: 12,
            blocks: 3,
            p_in: 1.0,
            p_out: 0.0,
            feature_noise: 0.0,
            seed: 1,
        };
        let (g, ds) = generate_sbm(&params).unwrap();
        for u in 0..12u32 {
            assert_eq!(g.degree(u), 3);
            for &v in g.neighbors(u) {
                assert_eq!(ds.labels[u as usize], ds.labels[v as usize]);
            }
            let row = ds.features.row(u as usize);
            assert_eq!(row[ds.labels[u as usize] as usize], 1.0);
        }
    }

    #[test]
    fn fixed_seed_reproduces_graph_and_features() {
        let params = SbmParams {
            n: 200,
            blocks: 4,
            p_in: 0.08,
            p_out: 0.005,
            feature_noise: 0.3,
            seed: 99,
        };
        let (g1, d1) = generate_sbm(&params).unwrap();
        let (g2, d2) = generate_sbm(&params).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(d1.features, d2.features);
        assert_eq!(d1.train, d2.train);
    }

    #[test]
    fn acceptance_scale_sbm_is_well_formed() {
        let params = SbmParams {
            n: 1000,
            blocks: 5,
            p_in: 0.05,
            p_out: 0.002,
            feature_noise: 0.5,
            seed: 7,
        };
        let (g, ds) = generate_sbm(&params).unwrap();
        assert_eq!(g.n(), 1000);
        for u in 0..1000u32 {
            assert!(g.degree(u) >= 1, "node {u} left isolated");
        }
        let mut counts = vec![0usize; 5];
        for &y in &ds.labels {
            counts[y as usize] += 1;
        }
        assert_eq!(counts, vec![200; 5]);
        assert_eq!(ds.train.len() + ds.val.len() + ds.test.len(), 1000);
    }

    #[test]
    fn stratified_split_preserves_proportions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Class sizes deliberately not multiples of ten.
        let mut labels = Vec::new();
        for (class, size) in [(0u32, 37usize), (1, 101), (2, 64)] {
            labels.extend(std::iter::repeat_n(class, size));
        }
        let (train, val, test) = stratified_split(&labels, 3, 0.1, 0.1, &mut rng).unwrap();
        for (class, size) in [(0u32, 37usize), (1, 101), (2, 64)] {
            let count = |ids: &[NodeId]| {
                ids.iter()
                    .filter(|&&u| labels[u as usize] == class)
                    .count() as f64
            };
            assert!((count(&train) - 0.1 * size as f64).abs() <= 1.0);
            assert!((count(&val) - 0.1 * size as f64).abs() <= 1.0);
            assert!((count(&test) - 0.8 * size as f64).abs() <= 2.0);
        }
        let total = train.len() + val.len() + test.len();
        assert_eq!(total, labels.len());
    }

    #[test]
    fn within_block_degree_exceeds_cross_block() {
        let mut within_sum = 0.0;
        let mut cross_sum = 0.0;
        for seed in 0..5 {
            let params = SbmParams {
                n: 400,
                blocks: 4,
                p_in: 0.06,
                p_out: 0.004,
                feature_noise: 0.0,
                seed,
            };
            let (g, ds) = generate_sbm(&params).unwrap();
            for u in 0..g.n() as u32 {
                for &v in g.neighbors(u) {
                    if ds.labels[u as usize] == ds.labels[v as usize] {
                        within_sum += 1.0;
                    } else {
                        cross_sum += 1.0;
                    }
                }
            }
        }
        assert!(
            within_sum > cross_sum,
            "within {within_sum} vs cross {cross_sum}"
        );
    }

    #[test]
    fn empty_class_parameters_rejected() {
        let params = SbmParams {
            n: 3,
            blocks: 5,
            p_in: 0.5,
            p_out: 0.1,
            feature_noise: 0.0,
            seed: 0,
        };
        assert!(generate_sbm(&params).is_err());
    }
}
