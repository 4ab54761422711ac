//! Feature transformer and training math: a rectifier MLP whose output is
//! propagated through gated rows, softmax cross-entropy over the propagated
//! logits, analytic gradients for the layer parameters and the raw gate
//! scalar, and Adam.
//!
//! The gate is stored raw; the mixing coefficient is `gamma = sigmoid(g)`,
//! so `g = 0` starts at an even split and any finite `g` keeps
//! `gamma` strictly inside `(0, 1)`. Setting `g = -inf` pins `gamma` to 0
//! and zeroes its gradient, which is how the pure-PPR baseline is run.

use std::io::{Read, Write};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::diffusion::{combine_gamma, PropagationRow};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::matrix::Mat;
use crate::parallel;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One affine layer: weights are `input_dim x output_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Mat,
    pub b: Vec<f64>,
}

/// MLP plus the raw gate scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    dims: Vec<usize>,
    layers: Vec<DenseLayer>,
    gate: f64,
}

impl Model {
    /// `dims` chains input width through hidden sizes to the class count,
    /// e.g. `[f, 32, c]`. Weights start uniform in `+-1/sqrt(fan_in)` from
    /// the seeded generator, biases at zero, the gate at `g = 0`.
    pub fn new(dims: &[usize], seed: u64) -> Result<Model> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig(format!(
                "layer dims must chain at least input -> output, got {dims:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for win in dims.windows(2) {
            let (fan_in, fan_out) = (win[0], win[1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            let mut w = Mat::zeros(fan_in, fan_out);
            for x in w.data_mut() {
                *x = rng.random_range(-scale..scale);
            }
            layers.push(DenseLayer {
                w,
                b: vec![0.0; fan_out],
            });
        }
        Ok(Model {
            dims: dims.to_vec(),
            layers,
            gate: 0.0,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    /// Raw gate scalar `g`.
    pub fn gate(&self) -> f64 {
        self.gate
    }

    pub fn set_gate(&mut self, g: f64) {
        self.gate = g;
    }

    /// Mixing coefficient `gamma = sigmoid(g)`. A finite gate keeps gamma
    /// strictly inside (0, 1) even where sigmoid saturates in f64; only the
    /// minus-infinity pin reaches 0 exactly.
    pub fn gamma(&self) -> f64 {
        let s = sigmoid(self.gate);
        if self.gate.is_finite() {
            s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
        } else {
            s
        }
    }

    /// Pin the gate so `gamma` is exactly 0 and receives no gradient.
    pub fn freeze_gamma_at_zero(&mut self) {
        self.gate = f64::NEG_INFINITY;
    }
}

/// Affine-rectifier chain; the last layer stays linear because softmax is
/// applied after propagation, inside the loss.
pub fn mlp_forward(model: &Model, features: &Mat) -> Result<Mat> {
    if features.cols() != model.input_dim() {
        return Err(Error::DimMismatch(format!(
            "features have width {}, model expects {}",
            features.cols(),
            model.input_dim()
        )));
    }
    let mut activations = features.clone();
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        activations = affine(&activations, layer, i < last);
    }
    Ok(activations)
}

fn affine(input: &Mat, layer: &DenseLayer, rectify: bool) -> Mat {
    let out_dim = layer.b.len();
    let in_dim = layer.w.rows();
    let mut out = Mat::zeros(input.rows(), out_dim);
    parallel::chunks_mut(out.data_mut(), out_dim)
        .zip(parallel::chunks(input.data(), in_dim))
        .for_each(|(row_out, row_in)| {
            row_out.copy_from_slice(&layer.b);
            for (k, &a) in row_in.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (x, &wkj) in row_out.iter_mut().zip(layer.w.row(k)) {
                    *x += a * wkj;
                }
            }
            if rectify {
                for x in row_out.iter_mut() {
                    if *x < 0.0 {
                        *x = 0.0;
                    }
                }
            }
        });
    out
}

/// Everything one mini-batch needs: the propagation row per source, the
/// deduplicated support the rows reach into, and the support features.
#[derive(Debug, Clone)]
pub struct BatchContext {
    pub sources: Vec<NodeId>,
    pub rows: Vec<PropagationRow>,
    pub support: Vec<NodeId>,
    pub features: Mat,
    pub labels: Vec<u32>,
    pub n_classes: usize,
    /// Position of each row entry inside `support`/`features`.
    row_positions: Vec<Vec<usize>>,
}

impl BatchContext {
    /// Gathers the support union and its features. `fetch` fills the
    /// feature vector of one node.
    pub fn new<F>(
        rows: Vec<PropagationRow>,
        labels: Vec<u32>,
        n_classes: usize,
        f_dim: usize,
        fetch: F,
    ) -> Result<BatchContext>
    where
        F: Fn(NodeId, &mut [f64]),
    {
        if rows.len() != labels.len() {
            return Err(Error::DimMismatch(format!(
                "{} rows vs {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y as usize >= n_classes) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }

        let mut support: Vec<NodeId> = rows.iter().flat_map(|r| r.indices.iter().copied()).collect();
        support.sort_unstable();
        support.dedup();

        let row_positions: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| {
                r.indices
                    .iter()
                    .map(|u| support.binary_search(u).expect("index in support"))
                    .collect()
            })
            .collect();

        let mut features = Mat::zeros(support.len(), f_dim);
        for (i, &u) in support.iter().enumerate() {
            fetch(u, features.row_mut(i));
        }

        Ok(BatchContext {
            sources: rows.iter().map(|r| r.source).collect(),
            rows,
            support,
            features,
            labels,
            n_classes,
            row_positions,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Propagated logits for every batch source: the gated row weights applied
/// to the transformed support features. Softmax lives in the loss.
pub fn batch_logits(model: &Model, ctx: &BatchContext) -> Result<Mat> {
    let h = mlp_forward(model, &ctx.features)?;
    Ok(propagate(ctx, &h, model.gamma()))
}

fn propagate(ctx: &BatchContext, h: &Mat, gamma: f64) -> Mat {
    let c = h.cols();
    let mut logits = Mat::zeros(ctx.len(), c);
    parallel::chunks_mut(logits.data_mut(), c)
        .enumerate()
        .for_each(|(i, out)| {
            let row = &ctx.rows[i];
            let weights = combine_gamma(row, gamma);
            for (j, &pos) in ctx.row_positions[i].iter().enumerate() {
                for (x, &val) in out.iter_mut().zip(h.row(pos)) {
                    *x += weights[j] * val;
                }
            }
        });
    logits
}

/// Gradients matching the model layout.
#[derive(Debug, Clone)]
pub struct Grads {
    pub layers: Vec<(Mat, Vec<f64>)>,
    pub gate: f64,
}

impl Grads {
    pub fn zeros_like(model: &Model) -> Grads {
        Grads {
            layers: model
                .layers
                .iter()
                .map(|l| (Mat::zeros(l.w.rows(), l.w.cols()), vec![0.0; l.b.len()]))
                .collect(),
            gate: 0.0,
        }
    }
}

/// Mean softmax cross-entropy over the batch and exact gradients for every
/// layer parameter and the raw gate.
///
/// The gate chain is `dL/dg = sigmoid'(g) * sum_ij dL/dw_ij * (core_ij -
/// ppr_ij)`, which vanishes both when the two weight vectors agree and when
/// the gate is pinned at minus infinity.
pub fn loss_and_grads(model: &Model, ctx: &BatchContext) -> Result<(f64, Grads)> {
    let batch = ctx.len();
    if batch == 0 {
        return Err(Error::InvalidConfig("empty batch".into()));
    }

    // Forward, keeping every activation for the backward sweep.
    let mut acts: Vec<Mat> = Vec::with_capacity(model.layers.len() + 1);
    acts.push(ctx.features.clone());
    let last = model.layers.len() - 1;
    for (i, layer) in model.layers.iter().enumerate() {
        let a = affine(acts.last().unwrap(), layer, i < last);
        acts.push(a);
    }
    let h = acts.last().unwrap().clone();
    let gamma = model.gamma();
    let logits = propagate(ctx, &h, gamma);

    // Softmax cross-entropy via log-sum-exp; d_logits = (softmax - 1_y)/B.
    let c = ctx.n_classes;
    let mut loss = 0.0;
    let mut d_logits = Mat::zeros(batch, c);
    for i in 0..batch {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &z in row {
            denom += (z - max).exp();
        }
        let lse = max + denom.ln();
        let y = ctx.labels[i] as usize;
        loss += lse - row[y];
        let d = d_logits.row_mut(i);
        for j in 0..c {
            d[j] = ((row[j] - max).exp() / denom) / batch as f64;
        }
        d[y] -= 1.0 / batch as f64;
    }
    loss /= batch as f64;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(loss));
    }

    // Gate gradient and the pull of each logit back onto H.
    let mut d_gamma = 0.0;
    let mut d_h = Mat::zeros(h.rows(), c);
    for i in 0..batch {
        let row = &ctx.rows[i];
        let weights = combine_gamma(row, gamma);
        let d_row = d_logits.row(i);
        for (j, &pos) in ctx.row_positions[i].iter().enumerate() {
            let h_row = h.row(pos);
            let dot: f64 = d_row.iter().zip(h_row).map(|(a, b)| a * b).sum();
            d_gamma += (row.core_weights[j] - row.ppr_weights[j]) * dot;
            let dh = d_h.row_mut(pos);
            for (x, &dv) in dh.iter_mut().zip(d_row) {
                *x += weights[j] * dv;
            }
        }
    }
    let gate_grad = if gamma == 0.0 || gamma == 1.0 {
        0.0
    } else {
        d_gamma * gamma * (1.0 - gamma)
    };

    // Standard dense backprop from d_h through the layer stack.
    let mut grads = Grads::zeros_like(model);
    let mut d_act = d_h;
    for l in (0..model.layers.len()).rev() {
        let mut d_z = d_act;
        if l < last {
            // Rectifier mask from the stored post-activation.
            let a = &acts[l + 1];
            for (x, &av) in d_z.data_mut().iter_mut().zip(a.data()) {
                if av <= 0.0 {
                    *x = 0.0;
                }
            }
        }
        let a_prev = &acts[l];
        let (dw, db) = &mut grads.layers[l];
        {
            let in_dim = a_prev.cols();
            let out_dim = d_z.cols();
            parallel::chunks_mut(dw.data_mut(), out_dim)
                .enumerate()
                .for_each(|(k, dw_row)| {
                    for b in 0..d_z.rows() {
                        let a_bk = a_prev.data()[b * in_dim + k];
                        if a_bk == 0.0 {
                            continue;
                        }
                        for (x, &dz) in dw_row.iter_mut().zip(d_z.row(b)) {
                            *x += a_bk * dz;
                        }
                    }
                });
        }
        for b in 0..d_z.rows() {
            for (x, &dz) in db.iter_mut().zip(d_z.row(b)) {
                *x += dz;
            }
        }
        if l > 0 {
            let w = &model.layers[l].w;
            let in_dim = w.rows();
            let mut d_prev = Mat::zeros(d_z.rows(), in_dim);
            parallel::chunks_mut(d_prev.data_mut(), in_dim)
                .zip(parallel::chunks(d_z.data(), d_z.cols()))
                .for_each(|(dp_row, dz_row)| {
                    for (k, x) in dp_row.iter_mut().enumerate() {
                        *x = dz_row.iter().zip(w.row(k)).map(|(a, b)| a * b).sum();
                    }
                });
            d_act = d_prev;
        } else {
            d_act = Mat::zeros(0, 0);
        }
    }

    Ok((
        loss,
        Grads {
            layers: grads.layers,
            gate: gate_grad,
        },
    ))
}

/// Loss alone, for finite-difference checks and logging.
pub fn batch_loss(model: &Model, ctx: &BatchContext) -> Result<f64> {
    let logits = batch_logits(model, ctx)?;
    let mut loss = 0.0;
    for i in 0..ctx.len() {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        loss += max + denom.ln() - row[ctx.labels[i] as usize];
    }
    let loss = loss / ctx.len() as f64;
    if loss.is_finite() {
        Ok(loss)
    } else {
        Err(Error::NonFiniteLoss(loss))
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// First and second moments for every parameter tensor plus the gate.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<(Mat, Vec<f64>)>,
    v: Vec<(Mat, Vec<f64>)>,
    m_gate: f64,
    v_gate: f64,
    t: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> AdamState {
        let zeros = || {
            model
                .layers
                .iter()
                .map(|l| (Mat::zeros(l.w.rows(), l.w.cols()), vec![0.0; l.b.len()]))
                .collect::<Vec<_>>()
        };
        AdamState {
            m: zeros(),
            v: zeros(),
            m_gate: 0.0,
            v_gate: 0.0,
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    #[cfg(test)]
    pub(crate) fn moments_gate(&self) -> (f64, f64) {
        (self.m_gate, self.v_gate)
    }

    #[cfg(test)]
    pub(crate) fn seed_gate_moments(&mut self, m: f64, v: f64) {
        self.m_gate = m;
        self.v_gate = v;
    }
}

fn adam_update(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, lr: f64, bc1: f64, bc2: f64) {
    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
    let m_hat = *m / bc1;
    let v_hat = *v / bc2;
    *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
}

/// One Adam step with bias correction over all layers and the gate.
pub fn adam_step(model: &mut Model, grads: &Grads, state: &mut AdamState, lr: f64) {
    state.t += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.t as i32);
    for (l, layer) in model.layers.iter_mut().enumerate() {
        let (gw, gb) = &grads.layers[l];
        let (mw, mb) = &mut state.m[l];
        let (vw, vb) = &mut state.v[l];
        for (((p, &g), m), v) in layer
            .w
            .data_mut()
            .iter_mut()
            .zip(gw.data())
            .zip(mw.data_mut().iter_mut())
            .zip(vw.data_mut().iter_mut())
        {
            adam_update(p, g, m, v, lr, bc1, bc2);
        }
        for (((p, &g), m), v) in layer
            .b
            .iter_mut()
            .zip(gb)
            .zip(mb.iter_mut())
            .zip(vb.iter_mut())
        {
            adam_update(p, g, m, v, lr, bc1, bc2);
        }
    }
    adam_update(
        &mut model.gate,
        grads.gate,
        &mut state.m_gate,
        &mut state.v_gate,
        lr,
        bc1,
        bc2,
    );
}

const CHECKPOINT_MAGIC: &[u8; 6] = b"CPPRM1";

/// Checkpoint layout: magic `CPPRM1`, `u64` dim count, the dims as `u64`,
/// each layer's weights row-major then biases as little-endian `f64`, and
/// finally the raw gate.
pub fn save_checkpoint<W: Write>(mut w: W, model: &Model) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&(model.dims.len() as u64).to_le_bytes())?;
    for &d in &model.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for layer in &model.layers {
        for &x in layer.w.data() {
            w.write_all(&x.to_le_bytes())?;
        }
        for &x in &layer.b {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.write_all(&model.gate.to_le_bytes())?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(mut r: R) -> Result<Model> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::BadFormat(format!(
            "checkpoint magic mismatch: {magic:?}"
        )));
    }
    let n_dims = read_u64(&mut r)? as usize;
    if n_dims < 2 || n_dims > 64 {
        return Err(Error::BadFormat(format!("implausible dim count {n_dims}")));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(read_u64(&mut r)? as usize);
    }
    let mut layers = Vec::with_capacity(n_dims - 1);
    for win in dims.windows(2) {
        let (fan_in, fan_out) = (win[0], win[1]);
        let mut w = Mat::zeros(fan_in, fan_out);
        for x in w.data_mut() {
            *x = read_f64(&mut r)?;
        }
        let mut b = vec![0.0; fan_out];
        for x in &mut b {
            *x = read_f64(&mut r)?;
        }
        layers.push(DenseLayer { w, b });
    }
    let gate = read_f64(&mut r)?;
    Ok(Model { dims, layers, gate })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
