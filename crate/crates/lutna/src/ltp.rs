//! Lottery-ticket pruning with a small built-in real-valued trainer.
//!
//! The loop trains a dense MLP for E epochs, prunes the lowest-magnitude
//! fraction p of surviving weights, rewinds the survivors to their original
//! initialization, and repeats while the validation accuracy stays within the
//! configured drop of the unpruned baseline. Training is plain SGD on softmax
//! cross-entropy, fully deterministic under the seed: fixed sample order, no
//! intra-step parallelism. Quantization and LUT schemes apply at inference
//! only; the trainer works in f64 throughout.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lutcore::{MultiplierConfig, Scheme};
use crate::modelio::Dataset;
use crate::netsim::{dense_layer, Layer, QuantModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneScope {
    /// Rank all surviving weights across layers together. The default.
    Global,
    /// Apply the prune fraction within each layer separately.
    PerLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewindMode {
    /// Reset surviving weights to their original initialization. The default.
    OriginalInit,
    /// Draw a fresh random initialization for the survivors each round.
    FreshRandom,
}

#[derive(Debug, Clone)]
pub struct LtpConfig {
    /// Fraction of surviving weights pruned per round (0 < p < 1).
    pub prune_fraction: f64,
    /// Maximum pruning rounds N.
    pub max_rounds: usize,
    /// Training epochs E per round (and for the final sparse training).
    pub epochs_per_round: usize,
    /// Stop once validation accuracy falls this far below the unpruned
    /// baseline.
    pub accuracy_drop_limit: f64,
    pub rng_seed: u64,
    pub prune_scope: PruneScope,
    pub rewind: RewindMode,
    pub learning_rate: f64,
}

impl LtpConfig {
    pub fn new(prune_fraction: f64, max_rounds: usize, epochs_per_round: usize) -> Result<Self> {
        if !(prune_fraction > 0.0 && prune_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "prune fraction must be in (0, 1), got {prune_fraction}"
            )));
        }
        if max_rounds == 0 || epochs_per_round == 0 {
            return Err(Error::InvalidConfig(
                "max_rounds and epochs_per_round must be >= 1".into(),
            ));
        }
        Ok(LtpConfig {
            prune_fraction,
            max_rounds,
            epochs_per_round,
            accuracy_drop_limit: 0.01,
            rng_seed: 0,
            prune_scope: PruneScope::Global,
            rewind: RewindMode::OriginalInit,
            learning_rate: 0.1,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub in_features: usize,
    pub out_features: usize,
    /// Row-major `[out][in]`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Real-valued MLP: dense layers with relu between them, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMlp {
    pub layers: Vec<DenseParams>,
}

/// Xavier/uniform initialization on `[-sqrt(6/(fan_in+fan_out)), +...]`.
pub fn xavier_init(out_features: usize, in_features: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if in_features == 0 || out_features == 0 {
        return Err(Error::InvalidConfig(
            "xavier init needs nonzero fan-in and fan-out".into(),
        ));
    }
    let bound = (6.0 / (in_features + out_features) as f64).sqrt();
    Ok((0..in_features * out_features)
        .map(|_| rng.gen_range(-bound..bound))
        .collect())
}

impl RealMlp {
    pub fn init(layer_sizes: &[usize], rng: &mut ChaCha8Rng) -> Result<RealMlp> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidConfig(
                "need at least an input and an output layer size".into(),
            ));
        }
        let mut layers = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (inf, outf) = (pair[0], pair[1]);
            layers.push(DenseParams {
                in_features: inf,
                out_features: outf,
                w: xavier_init(outf, inf, rng)?,
                b: vec![0.0; outf],
            });
        }
        Ok(RealMlp { layers })
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len()).sum()
    }

    /// Forward pass keeping every pre-activation (for backprop).
    #[allow(clippy::needless_range_loop)]
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        for (li, layer) in self.layers.iter().enumerate() {
            let prev = acts.last().unwrap();
            let mut z = layer.b.clone();
            for o in 0..layer.out_features {
                let row = &layer.w[o * layer.in_features..(o + 1) * layer.in_features];
                z[o] += row.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>();
            }
            if li + 1 < self.layers.len() {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    pub fn scores(&self, input: &[f64]) -> Vec<f64> {
        self.forward_trace(input).pop().unwrap()
    }

    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0usize;
        for (x, &label) in dataset.features.iter().zip(&dataset.labels) {
            let scores = self.scores(x);
            let mut best = 0usize;
            for (i, &s) in scores.iter().enumerate() {
                if s > scores[best] {
                    best = i;
                }
            }
            correct += usize::from(best == label);
        }
        Ok(correct as f64 / dataset.len() as f64)
    }
}

/// Mutable training state: current weights, the stored initialization to
/// rewind to, and the monotone prune mask.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub net: RealMlp,
    pub initial: RealMlp,
    /// Per layer, per weight; `false` = pruned. Biases are never pruned.
    pub mask: Vec<Vec<bool>>,
    pub round: usize,
}

impl TrainState {
    pub fn new(net: RealMlp) -> TrainState {
        let mask = net.layers.iter().map(|l| vec![true; l.w.len()]).collect();
        TrainState {
            initial: net.clone(),
            net,
            mask,
            round: 0,
        }
    }

    pub fn sparsity(&self) -> f64 {
        let total: usize = self.mask.iter().map(|m| m.len()).sum();
        let pruned: usize = self
            .mask
            .iter()
            .map(|m| m.iter().filter(|&&k| !k).count())
            .sum();
        pruned as f64 / total as f64
    }

    pub fn surviving(&self) -> usize {
        self.mask
            .iter()
            .map(|m| m.iter().filter(|&&k| k).count())
            .sum()
    }

    fn zero_masked(&mut self) {
        for (layer, mask) in self.net.layers.iter_mut().zip(&self.mask) {
            for (w, &keep) in layer.w.iter_mut().zip(mask) {
                if !keep {
                    *w = 0.0;
                }
            }
        }
    }
}

/// SGD on softmax cross-entropy, per-sample updates in dataset order.
/// The learning rate halves at each third of the epoch budget. Masked
/// weights and their gradients are forced to zero every step.
#[allow(clippy::needless_range_loop)]
pub fn train(state: &mut TrainState, dataset: &Dataset, epochs: usize, base_lr: f64) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    state.zero_masked();
    let n_layers = state.net.layers.len();
    for epoch in 0..epochs {
        let lr = base_lr * 0.5f64.powi((3 * epoch / epochs.max(1)) as i32);
        let mut epoch_loss = 0.0f64;
        for (x, &label) in dataset.features.iter().zip(&dataset.labels) {
            let acts = state.net.forward_trace(x);
            let logits = &acts[n_layers];
            // stable softmax
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            epoch_loss -= (exps[label] / sum).ln();

            // output delta, then backprop through relu
            let mut delta: Vec<f64> = exps
                .iter()
                .enumerate()
                .map(|(i, &e)| e / sum - f64::from(i == label))
                .collect();
            for li in (0..n_layers).rev() {
                let prev_act = acts[li].clone();
                let next_delta = if li > 0 {
                    let layer = &state.net.layers[li];
                    let mut nd = vec![0.0; layer.in_features];
                    for o in 0..layer.out_features {
                        let row = &layer.w[o * layer.in_features..(o + 1) * layer.in_features];
                        for (slot, &w) in nd.iter_mut().zip(row) {
                            *slot += w * delta[o];
                        }
                    }
                    // relu gate of the previous layer's output
                    for (slot, &a) in nd.iter_mut().zip(&prev_act) {
                        if a <= 0.0 {
                            *slot = 0.0;
                        }
                    }
                    Some(nd)
                } else {
                    None
                };
                let layer = &mut state.net.layers[li];
                let mask = &state.mask[li];
                for o in 0..layer.out_features {
                    let d = delta[o];
                    layer.b[o] -= lr * d;
                    let base = o * layer.in_features;
                    for i in 0..layer.in_features {
                        if mask[base + i] {
                            layer.w[base + i] -= lr * d * prev_act[i];
                        }
                    }
                }
                if let Some(nd) = next_delta {
                    delta = nd;
                }
            }
        }
        if !epoch_loss.is_finite() {
            return Err(Error::Divergence {
                round: state.round,
                epoch,
            });
        }
    }
    state.zero_masked();
    Ok(())
}

/// One magnitude-pruning round: masks the lowest fraction p of surviving
/// weights (ties broken by layer/index order), then rewinds the survivors.
pub fn prune_round(
    state: &mut TrainState,
    p: f64,
    scope: PruneScope,
    rewind: RewindMode,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let groups: Vec<Vec<(usize, usize)>> = match scope {
        PruneScope::Global => {
            vec![state
                .mask
                .iter()
                .enumerate()
                .flat_map(|(li, m)| {
                    m.iter()
                        .enumerate()
                        .filter(|(_, &keep)| keep)
                        .map(move |(wi, _)| (li, wi))
                })
                .collect()]
        }
        PruneScope::PerLayer => state
            .mask
            .iter()
            .enumerate()
            .map(|(li, m)| {
                m.iter()
                    .enumerate()
                    .filter(|(_, &keep)| keep)
                    .map(|(wi, _)| (li, wi))
                    .collect()
            })
            .collect(),
    };
    for group in groups {
        let surviving = group.len();
        let to_prune = (p * surviving as f64).round() as usize;
        if to_prune >= surviving {
            return Err(Error::PruneEliminatesAll {
                requested: to_prune,
                surviving,
            });
        }
        let mut ranked = group;
        ranked.sort_by(|&(la, wa), &(lb, wb)| {
            let ma = state.net.layers[la].w[wa].abs();
            let mb = state.net.layers[lb].w[wb].abs();
            ma.partial_cmp(&mb)
                .unwrap()
                .then(la.cmp(&lb))
                .then(wa.cmp(&wb))
        });
        for &(li, wi) in &ranked[..to_prune] {
            state.mask[li][wi] = false;
        }
    }
    // lottery-ticket rewind of the survivors
    match rewind {
        RewindMode::OriginalInit => {
            for (li, layer) in state.net.layers.iter_mut().enumerate() {
                for (wi, w) in layer.w.iter_mut().enumerate() {
                    *w = if state.mask[li][wi] {
                        state.initial.layers[li].w[wi]
                    } else {
                        0.0
                    };
                }
                layer.b.copy_from_slice(&state.initial.layers[li].b);
            }
        }
        RewindMode::FreshRandom => {
            for (li, layer) in state.net.layers.iter_mut().enumerate() {
                let fresh = xavier_init(layer.out_features, layer.in_features, rng)?;
                for (wi, w) in layer.w.iter_mut().enumerate() {
                    *w = if state.mask[li][wi] { fresh[wi] } else { 0.0 };
                }
                layer.b.fill(0.0);
            }
            state.initial = state.net.clone();
        }
    }
    state.round += 1;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Sparsity during this round's training (before this round's prune).
    pub sparsity: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone)]
pub struct LtpOutcome {
    pub model: QuantModel,
    pub final_net: RealMlp,
    pub mask: Vec<Vec<bool>>,
    pub rounds: Vec<RoundRecord>,
    pub baseline_acc: f64,
    pub final_train_acc: f64,
    pub final_val_acc: f64,
    pub sparsity: f64,
}

impl LtpOutcome {
    /// `round,sparsity,train_acc,val_acc` CSV of the per-round log.
    pub fn round_log_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("round,sparsity,train_acc,val_acc\n");
        for r in &self.rounds {
            let _ = writeln!(out, "{},{},{},{}", r.round, r.sparsity, r.train_acc, r.val_acc);
        }
        let _ = writeln!(
            out,
            "final,{},{},{}",
            self.sparsity, self.final_train_acc, self.final_val_acc
        );
        out
    }
}

/// Full lottery-ticket run: baseline training, the train/prune/rewind loop
/// under the accuracy-drop stopping rule, final training of the sparse net,
/// and quantization of the result.
// the negated drop comparison is NaN-safe on purpose
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn ltp_run(
    layer_sizes: &[usize],
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &LtpConfig,
    act_bits: u8,
    weight_bits: u8,
) -> Result<LtpOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let net = RealMlp::init(layer_sizes, &mut rng)?;

    // unpruned baseline
    let mut baseline = TrainState::new(net.clone());
    train(&mut baseline, train_set, cfg.epochs_per_round, cfg.learning_rate)?;
    let baseline_acc = baseline.net.accuracy(val_set)?;

    let mut state = TrainState::new(net);
    let mut rounds = Vec::new();
    let mut last_drop = f64::NEG_INFINITY;
    for round in 1..=cfg.max_rounds {
        if !(last_drop < cfg.accuracy_drop_limit) {
            break;
        }
        state.round = round;
        let sparsity_in = state.sparsity();
        train(&mut state, train_set, cfg.epochs_per_round, cfg.learning_rate)?;
        let train_acc = state.net.accuracy(train_set)?;
        let val_acc = state.net.accuracy(val_set)?;
        rounds.push(RoundRecord {
            round,
            sparsity: sparsity_in,
            train_acc,
            val_acc,
        });
        last_drop = baseline_acc - val_acc;
        prune_round(
            &mut state,
            cfg.prune_fraction,
            cfg.prune_scope,
            cfg.rewind,
            &mut rng,
        )?;
    }

    // final training of the sparse model
    train(&mut state, train_set, cfg.epochs_per_round, cfg.learning_rate)?;
    let final_train_acc = state.net.accuracy(train_set)?;
    let final_val_acc = state.net.accuracy(val_set)?;

    let model = mlp_to_quant_model(
        &state.net,
        &state.mask,
        act_bits,
        weight_bits,
        Scheme::DncExact,
        &train_set.features,
    )?;
    let sparsity = state.sparsity();
    Ok(LtpOutcome {
        model,
        final_net: state.net,
        mask: state.mask,
        rounds,
        baseline_acc,
        final_train_acc,
        final_val_acc,
        sparsity,
    })
}

/// Converts a trained real MLP into a quantized model (dense + relu chain)
/// and calibrates its activation scales on the given samples.
pub fn mlp_to_quant_model(
    net: &RealMlp,
    mask: &[Vec<bool>],
    act_bits: u8,
    weight_bits: u8,
    scheme: Scheme,
    calib: &[Vec<f64>],
) -> Result<QuantModel> {
    let cfg = MultiplierConfig::new(scheme, act_bits, weight_bits)?;
    let mut layers = Vec::new();
    let n = net.layers.len();
    for (li, layer) in net.layers.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (0..layer.out_features)
            .map(|o| layer.w[o * layer.in_features..(o + 1) * layer.in_features].to_vec())
            .collect();
        let mut mac = dense_layer(rows, layer.b.clone(), cfg);
        mac.mask = mask[li].clone();
        for (w, &keep) in mac.weights.iter_mut().zip(&mac.mask) {
            if !keep {
                *w = 0.0;
            }
        }
        layers.push(Layer::Mac(mac));
        if li + 1 < n {
            layers.push(Layer::Relu);
        }
    }
    let input_dim = net.layers[0].in_features;
    let mut model = QuantModel::new(vec![input_dim], 1.0, act_bits, weight_bits, layers)?;
    model.calibrate(calib)?;
    Ok(model)
}
