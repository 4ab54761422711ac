//! End-to-end orchestration: row precomputation, mini-batch training with
//! early stopping on validation accuracy, and evaluation in either
//! inference mode.

use std::collections::BTreeMap;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Features};
use crate::diffusion::{
    build_row, ot_inference, tt_inference, DiffusionConfig, InferenceMode, LMode, PropagationRow,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::kcore::CoreScores;
use crate::matrix::Mat;
use crate::neural::{adam_step, loss_and_grads, mlp_forward, AdamState, BatchContext, Model};
use crate::parallel;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub diffusion: DiffusionConfig,
    /// Epochs without a validation-accuracy improvement before stopping.
    pub patience: usize,
    /// Pin the gate at gamma = 0 (pure PPR weights, no gate learning).
    pub freeze_gamma_zero: bool,
}

impl TrainConfig {
    pub fn new(diffusion: DiffusionConfig) -> TrainConfig {
        TrainConfig {
            epochs: 200,
            batch_size: 512,
            lr: 5e-3,
            seed: 0,
            hidden: vec![32],
            diffusion,
            patience: 20,
            freeze_gamma_zero: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidConfig("lr must be positive".into()));
        }
        Ok(())
    }

    /// Flat key/value snapshot recorded into every report.
    pub fn as_config_block(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("epochs".into(), self.epochs.to_string());
        m.insert("batch_size".into(), self.batch_size.to_string());
        m.insert("lr".into(), self.lr.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert(
            "hidden".into(),
            self.hidden
                .iter()
                .map(|h| h.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        m.insert("patience".into(), self.patience.to_string());
        m.insert("alpha".into(), self.diffusion.ppr.alpha.to_string());
        m.insert("epsilon".into(), self.diffusion.ppr.epsilon.to_string());
        m.insert(
            "l_mode".into(),
            match self.diffusion.l_mode {
                LMode::Fixed(l) => format!("fixed:{l}"),
                LMode::Dynamic => "dynamic".into(),
            },
        );
        m.insert(
            "mode".into(),
            match self.diffusion.inference_mode {
                InferenceMode::Ot => "ot".into(),
                InferenceMode::Tt => "tt".into(),
            },
        );
        m.insert("power_iters".into(), self.diffusion.power_iters.to_string());
        m.insert(
            "freeze_gamma_zero".into(),
            self.freeze_gamma_zero.to_string(),
        );
        m
    }
}

/// Everything a finished run reports. Wall-times are the only fields that
/// vary between identically-seeded runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub accuracy_test: f64,
    pub accuracy_val: f64,
    pub gamma_final: f64,
    pub gamma_first_epoch: f64,
    pub mean_l: f64,
    pub time_precompute_s: f64,
    pub time_train_s: f64,
    pub time_infer_s: f64,
    pub loss_curve: Vec<f64>,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
}

/// One propagation row per source, built in parallel; order matches
/// `sources`.
pub fn precompute_rows(
    g: &Graph,
    cores: &CoreScores,
    cfg: &DiffusionConfig,
    sources: &[NodeId],
) -> Result<Vec<PropagationRow>> {
    parallel::slice_iter(sources)
        .map(|&s| build_row(g, cores, s, cfg))
        .collect()
}

/// Mean neighbor count over rows. Dynamic rows count non-source entries
/// (the elbow's `l_i`); fixed rows count their full length.
pub fn mean_l(rows: &[PropagationRow], l_mode: LMode) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let total: usize = rows.iter().map(|r| r.len()).sum();
    match l_mode {
        LMode::Dynamic => (total - rows.len()) as f64 / rows.len() as f64,
        LMode::Fixed(_) => total as f64 / rows.len() as f64,
    }
}

fn features_to_mat(features: &Features) -> Mat {
    let mut m = Mat::zeros(features.n(), features.f());
    for i in 0..features.n() {
        features.fill_row_f64(i, m.row_mut(i));
    }
    m
}

fn accuracy(pred: &[usize], labels: &[u32], targets: &[NodeId]) -> f64 {
    let correct = targets
        .iter()
        .zip(pred)
        .filter(|(&t, &p)| labels[t as usize] as usize == p)
        .count();
    100.0 * correct as f64 / targets.len() as f64
}

/// Class predictions for `targets` under the given inference mode.
pub fn predict(
    model: &Model,
    g: &Graph,
    cores: &CoreScores,
    ds: &Dataset,
    mode: InferenceMode,
    dcfg: &DiffusionConfig,
    targets: &[NodeId],
) -> Result<Vec<usize>> {
    if targets.is_empty() {
        return Err(Error::InvalidConfig("empty target set".into()));
    }
    match mode {
        InferenceMode::Ot => {
            let h = mlp_forward(model, &features_to_mat(&ds.features))?;
            let z = ot_inference(g, &h, dcfg.ppr.alpha, dcfg.power_iters)?;
            let all = z.argmax_rows();
            Ok(targets.iter().map(|&t| all[t as usize]).collect())
        }
        InferenceMode::Tt => {
            let f_dim = ds.features.f();
            let provider = |u: NodeId| -> Vec<f64> {
                let mut row = Mat::zeros(1, f_dim);
                ds.features.fill_row_f64(u as usize, row.row_mut(0));
                mlp_forward(model, &row)
                    .expect("feature width fixed by dataset")
                    .row(0)
                    .to_vec()
            };
            let z = tt_inference(
                g,
                cores,
                provider,
                model.gamma(),
                dcfg,
                targets,
                model.output_dim(),
            )?;
            Ok(z.argmax_rows())
        }
    }
}

/// Test-split accuracy and the wall-time of the inference pass.
pub fn evaluate(
    model: &Model,
    g: &Graph,
    cores: &CoreScores,
    ds: &Dataset,
    mode: InferenceMode,
    dcfg: &DiffusionConfig,
) -> Result<(f64, f64)> {
    if ds.test.is_empty() {
        return Err(Error::InvalidConfig("empty test split".into()));
    }
    let t0 = Instant::now();
    let pred = predict(model, g, cores, ds, mode, dcfg, &ds.test)?;
    let secs = round_ms(t0.elapsed().as_secs_f64());
    Ok((accuracy(&pred, &ds.labels, &ds.test), secs))
}

fn round_ms(secs: f64) -> f64 {
    (secs * 1000.0).round() / 1000.0
}

/// Train the feature transformer and the gate jointly, tracking the best
/// validation model, then evaluate it on the test split.
pub fn train(
    g: &Graph,
    cores: &CoreScores,
    ds: &Dataset,
    cfg: &TrainConfig,
) -> Result<(Model, RunReport)> {
    cfg.validate()?;
    ds.validate()?;
    if ds.train.is_empty() {
        return Err(Error::InvalidConfig("empty train split".into()));
    }
    if ds.val.is_empty() {
        return Err(Error::InvalidConfig("empty validation split".into()));
    }
    if ds.test.is_empty() {
        return Err(Error::InvalidConfig("empty test split".into()));
    }

    let f_dim = ds.features.f();
    let c = ds.n_classes;

    let t0 = Instant::now();
    let train_rows = precompute_rows(g, cores, &cfg.diffusion, &ds.train)?;
    let time_precompute_s = round_ms(t0.elapsed().as_secs_f64());
    let mean_l_value = mean_l(&train_rows, cfg.diffusion.l_mode);

    let mut dims = vec![f_dim];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(c);
    let mut model = Model::new(&dims, cfg.seed)?;
    if cfg.freeze_gamma_zero {
        model.freeze_gamma_at_zero();
    }
    let gamma_first_epoch = model.gamma();

    let mut opt = AdamState::new(&model);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_SALT);

    let t1 = Instant::now();
    let mut loss_curve = Vec::new();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_model = model.clone();
    let mut stale = 0usize;

    let mut order: Vec<usize> = (0..ds.train.len()).collect();
    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let rows: Vec<PropagationRow> =
                chunk.iter().map(|&i| train_rows[i].clone()).collect();
            let labels: Vec<u32> = chunk
                .iter()
                .map(|&i| ds.labels[ds.train[i] as usize])
                .collect();
            let ctx = BatchContext::new(rows, labels, c, f_dim, |u, out| {
                ds.features.fill_row_f64(u as usize, out)
            })?;
            let (loss, grads) = loss_and_grads(&model, &ctx)?;
            adam_step(&mut model, &grads, &mut opt, cfg.lr);
            epoch_loss += loss * chunk.len() as f64;
        }
        loss_curve.push(epoch_loss / ds.train.len() as f64);

        let val_pred = predict(
            &model,
            g,
            cores,
            ds,
            cfg.diffusion.inference_mode,
            &cfg.diffusion,
            &ds.val,
        )?;
        let val_acc = accuracy(&val_pred, &ds.labels, &ds.val);
        if val_acc > best_val {
            best_val = val_acc;
            best_model = model.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    let time_train_s = round_ms(t1.elapsed().as_secs_f64());

    let (accuracy_test, time_infer_s) = evaluate(
        &best_model,
        g,
        cores,
        ds,
        cfg.diffusion.inference_mode,
        &cfg.diffusion,
    )?;

    let report = RunReport {
        accuracy_test,
        accuracy_val: best_val,
        gamma_final: best_model.gamma(),
        gamma_first_epoch,
        mean_l: mean_l_value,
        time_precompute_s,
        time_train_s,
        time_infer_s,
        loss_curve,
        seed: cfg.seed,
        config: cfg.as_config_block(),
    };
    Ok((best_model, report))
}

// Keeps the shuffle stream distinct from weight initialization.
const SHUFFLE_SALT: u64 = 0xB17E_5EED_0F_BA7C;
