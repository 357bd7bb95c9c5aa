//! Minimal quantized inference engine routed through the simulated
//! multipliers.
//!
//! A [`QuantModel`] keeps real-valued parameters plus per-layer calibration
//! statistics; the quantized datapath (sign-magnitude codes, LUT multiplies,
//! integer accumulation, static per-layer re-quantization) is derived from
//! them deterministically. The same model also runs in plain f64 arithmetic,
//! which serves as the accuracy baseline for the bit-resolution sweeps.

use crate::error::{Error, Result};
use crate::fixedpoint::{
    self, QuantParams, SignMagWord, quantize, scale_for_max_abs,
};
use crate::lutcore::{self, MultiplierConfig, Scheme};
use crate::modelio::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub enum MacKind {
    Dense {
        in_features: usize,
        out_features: usize,
    },
    Conv2d {
        in_ch: usize,
        out_ch: usize,
        kh: usize,
        kw: usize,
    },
}

/// A multiply-accumulate layer: real parameters, prune mask, calibration
/// statistic, and the multiplier scheme it is mapped onto.
#[derive(Debug, Clone, PartialEq)]
pub struct MacLayer {
    pub kind: MacKind,
    /// Row-major: dense `[out][in]`, conv `[oc][ic][kh][kw]`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// `false` marks a pruned weight; pruned weights are exactly zero.
    pub mask: Vec<bool>,
    /// Calibrated max |pre-activation|, the source of the layer's static
    /// re-quantization scale.
    pub out_maxabs: f64,
    pub scheme: MultiplierConfig,
}

impl MacLayer {
    pub fn weight_count(&self) -> usize {
        self.weights.len()
    }

    pub fn surviving_weights(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Mac(MacLayer),
    Relu,
    MaxPool { k: usize },
    AvgPool { k: usize },
    Flatten,
}

/// Layered network with quantized-inference semantics derived from real
/// parameters and per-layer calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantModel {
    pub input_shape: Vec<usize>,
    pub input_maxabs: f64,
    pub act_bits: u8,
    pub weight_bits: u8,
    pub layers: Vec<Layer>,
}

pub fn dense_layer(weights: Vec<Vec<f64>>, bias: Vec<f64>, scheme: MultiplierConfig) -> MacLayer {
    let out_features = weights.len();
    let in_features = weights.first().map_or(0, |r| r.len());
    let flat: Vec<f64> = weights.into_iter().flatten().collect();
    let mask = vec![true; flat.len()];
    MacLayer {
        kind: MacKind::Dense {
            in_features,
            out_features,
        },
        weights: flat,
        bias,
        mask,
        out_maxabs: 0.0,
        scheme,
    }
}

pub fn conv2d_layer(
    in_ch: usize,
    out_ch: usize,
    kh: usize,
    kw: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    scheme: MultiplierConfig,
) -> MacLayer {
    let mask = vec![true; weights.len()];
    MacLayer {
        kind: MacKind::Conv2d {
            in_ch,
            out_ch,
            kh,
            kw,
        },
        weights,
        bias,
        mask,
        out_maxabs: 0.0,
        scheme,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivations {
    pub codes: Vec<SignMagWord>,
    pub params: QuantParams,
    pub shape: Vec<usize>,
}

/// Everything a quantized forward pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// Output of every layer, in order.
    pub layer_outputs: Vec<LayerActivations>,
    /// Raw accumulator values of each mac layer, before re-quantization.
    pub mac_preacts: Vec<Vec<i64>>,
    /// Dequantized final activations.
    pub scores: Vec<f64>,
}

fn shape_after(layer: &Layer, shape: &[usize], index: usize) -> Result<Vec<usize>> {
    let err = |expected: Vec<usize>| Error::ShapeMismatch {
        layer: index,
        expected,
        got: shape.to_vec(),
    };
    match layer {
        Layer::Mac(m) => match &m.kind {
            MacKind::Dense {
                in_features,
                out_features,
            } => {
                if shape != [*in_features] {
                    return Err(err(vec![*in_features]));
                }
                Ok(vec![*out_features])
            }
            MacKind::Conv2d {
                in_ch,
                out_ch,
                kh,
                kw,
            } => {
                if shape.len() != 3 || shape[0] != *in_ch || shape[1] < *kh || shape[2] < *kw {
                    return Err(err(vec![*in_ch, *kh, *kw]));
                }
                Ok(vec![*out_ch, shape[1] - kh + 1, shape[2] - kw + 1])
            }
        },
        Layer::Relu => Ok(shape.to_vec()),
        Layer::MaxPool { k } | Layer::AvgPool { k } => {
            if shape.len() != 3 || *k == 0 || shape[1] < *k || shape[2] < *k {
                return Err(err(vec![0, *k, *k]));
            }
            Ok(vec![shape[0], shape[1] / k, shape[2] / k])
        }
        Layer::Flatten => Ok(vec![shape.iter().product()]),
    }
}

impl QuantModel {
    pub fn new(
        input_shape: Vec<usize>,
        input_maxabs: f64,
        act_bits: u8,
        weight_bits: u8,
        layers: Vec<Layer>,
    ) -> Result<QuantModel> {
        let model = QuantModel {
            input_shape,
            input_maxabs,
            act_bits,
            weight_bits,
            layers,
        };
        model.output_shape()?; // validates the whole chain
        Ok(model)
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        let mut shape = self.input_shape.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            shape = shape_after(layer, &shape, i)?;
        }
        Ok(shape)
    }

    pub fn mac_layer_indices(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter_map(|(i, l)| matches!(l, Layer::Mac(_)).then_some(i))
            .collect()
    }

    pub fn mac_layers(&self) -> Vec<&MacLayer> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Mac(m) => Some(m),
                _ => None,
            })
            .collect()
    }

    /// Current per-mac-layer scheme assignment.
    pub fn scheme_plan(&self) -> Vec<MultiplierConfig> {
        self.mac_layers().iter().map(|m| m.scheme).collect()
    }

    /// Replaces the per-mac-layer scheme assignment.
    pub fn apply_plan(&mut self, plan: &[MultiplierConfig]) -> Result<()> {
        let indices = self.mac_layer_indices();
        if plan.len() != indices.len() {
            return Err(Error::PlanLayerMismatch {
                plan: plan.len(),
                model: indices.len(),
            });
        }
        for (&idx, cfg) in indices.iter().zip(plan) {
            if let Layer::Mac(m) = &mut self.layers[idx] {
                m.scheme = *cfg;
            }
        }
        Ok(())
    }

    /// Per-mac-layer surviving MAC counts for the model's input shape.
    /// A pruned weight contributes zero MACs.
    pub fn mac_counts(&self) -> Result<Vec<u64>> {
        let mut shape = self.input_shape.clone();
        let mut counts = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            if let Layer::Mac(m) = layer {
                let surviving = m.surviving_weights() as u64;
                let macs = match &m.kind {
                    MacKind::Dense { .. } => surviving,
                    MacKind::Conv2d { kh, kw, .. } => {
                        let oh = (shape[1] - kh + 1) as u64;
                        let ow = (shape[2] - kw + 1) as u64;
                        surviving * oh * ow
                    }
                };
                counts.push(macs);
            }
            shape = shape_after(layer, &shape, i)?;
        }
        Ok(counts)
    }

    /// Same model at different activation/weight bit widths; calibration
    /// statistics carry over, quantized scales are re-derived.
    pub fn requantize(&self, act_bits: u8, weight_bits: u8) -> Result<QuantModel> {
        let mut m = self.clone();
        m.act_bits = act_bits;
        m.weight_bits = weight_bits;
        // operand widths of the multiplier configs follow the new widths
        let plan: Vec<MultiplierConfig> = m
            .scheme_plan()
            .iter()
            .map(|c| scheme_config(c.scheme, act_bits, weight_bits))
            .collect::<Result<_>>()?;
        m.apply_plan(&plan)?;
        Ok(m)
    }

    fn input_params(&self) -> Result<QuantParams> {
        scale_for_max_abs(self.input_maxabs, self.act_bits)
    }

    /// Runs calibration data through the real-arithmetic path and records the
    /// max |pre-activation| of every mac layer, plus the input max-abs.
    pub fn calibrate(&mut self, samples: &[Vec<f64>]) -> Result<()> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut input_maxabs = 0.0f64;
        let mut mac_maxabs = vec![0.0f64; self.mac_layer_indices().len()];
        for sample in samples {
            for &x in sample {
                if !x.is_finite() {
                    return Err(Error::NonFiniteInput);
                }
                input_maxabs = input_maxabs.max(x.abs());
            }
            let trace = self.forward_real(sample)?;
            for (slot, pre) in mac_maxabs.iter_mut().zip(&trace.mac_preacts) {
                for &v in pre {
                    *slot = slot.max(v.abs());
                }
            }
        }
        self.input_maxabs = input_maxabs;
        let indices = self.mac_layer_indices();
        for (&idx, maxabs) in indices.iter().zip(mac_maxabs) {
            if let Layer::Mac(m) = &mut self.layers[idx] {
                m.out_maxabs = maxabs;
            }
        }
        Ok(())
    }

    /// Real-arithmetic forward pass (the accuracy baseline).
    pub fn forward_real(&self, input: &[f64]) -> Result<RealTrace> {
        if input.len() != self.input_shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch {
                layer: 0,
                expected: self.input_shape.clone(),
                got: vec![input.len()],
            });
        }
        let mut act = input.to_vec();
        let mut shape = self.input_shape.clone();
        let mut mac_preacts = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let next_shape = shape_after(layer, &shape, i)?;
            act = match layer {
                Layer::Mac(m) => {
                    let out = real_mac(m, &act, &shape);
                    mac_preacts.push(out.clone());
                    out
                }
                Layer::Relu => act.iter().map(|&v| v.max(0.0)).collect(),
                Layer::MaxPool { k } => pool(&act, &shape, *k, |win| {
                    win.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                }),
                Layer::AvgPool { k } => pool(&act, &shape, *k, |win| {
                    win.iter().sum::<f64>() / win.len() as f64
                }),
                Layer::Flatten => act,
            };
            shape = next_shape;
        }
        Ok(RealTrace {
            scores: act,
            mac_preacts,
        })
    }

    /// Quantized forward pass through the configured multiplier schemes,
    /// optionally overriding the per-mac-layer scheme plan.
    pub fn forward(&self, input: &[f64], plan: Option<&[MultiplierConfig]>) -> Result<ForwardTrace> {
        if input.len() != self.input_shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch {
                layer: 0,
                expected: self.input_shape.clone(),
                got: vec![input.len()],
            });
        }
        let derived = self.derive_quantized(plan)?;
        self.forward_derived(&derived, input)
    }

    fn derive_quantized(&self, plan: Option<&[MultiplierConfig]>) -> Result<Vec<QuantizedMac>> {
        let mac_indices = self.mac_layer_indices();
        if let Some(p) = plan {
            if p.len() != mac_indices.len() {
                return Err(Error::PlanLayerMismatch {
                    plan: p.len(),
                    model: mac_indices.len(),
                });
            }
        }
        let mut in_params = self.input_params()?;
        let mut derived = Vec::new();
        let mut mac_i = 0usize;
        for layer in &self.layers {
            if let Layer::Mac(m) = layer {
                let scheme = plan.map_or(m.scheme, |p| p[mac_i]);
                let q = QuantizedMac::derive(m, in_params, self.act_bits, self.weight_bits, scheme)?;
                in_params = q.out_params;
                derived.push(q);
                mac_i += 1;
            }
        }
        Ok(derived)
    }

    fn forward_derived(&self, derived: &[QuantizedMac], input: &[f64]) -> Result<ForwardTrace> {
        let in_params = self.input_params()?;
        let mut codes = fixedpoint::quantize_tensor(input, &in_params)?;
        let mut params = in_params;
        let mut shape = self.input_shape.clone();
        let mut layer_outputs = Vec::with_capacity(self.layers.len());
        let mut mac_preacts = Vec::new();
        let mut mac_i = 0usize;
        for (i, layer) in self.layers.iter().enumerate() {
            let next_shape = shape_after(layer, &shape, i)?;
            match layer {
                Layer::Mac(m) => {
                    let q = &derived[mac_i];
                    mac_i += 1;
                    let acc = quant_mac(m, q, &codes, &shape)?;
                    // static re-quantization: accumulator -> real -> act code
                    let acc_scale = params.scale * q.w_params.scale;
                    codes = acc
                        .iter()
                        .map(|&a| quantize(a as f64 / acc_scale, &q.out_params))
                        .collect::<Result<_>>()?;
                    mac_preacts.push(acc);
                    params = q.out_params;
                }
                Layer::Relu => {
                    for c in codes.iter_mut() {
                        if c.is_negative() {
                            *c = SignMagWord::zero();
                        }
                    }
                }
                Layer::MaxPool { k } => {
                    codes = pool(&codes, &shape, *k, |win| {
                        *win.iter().max_by_key(|c| c.value()).unwrap()
                    });
                }
                Layer::AvgPool { k } => {
                    codes = pool(&codes, &shape, *k, |win| {
                        let sum: i64 = win.iter().map(|c| c.value() as i64).sum();
                        SignMagWord::from_value(div_round_half_away(sum, win.len() as i64) as i32)
                    });
                }
                Layer::Flatten => {}
            }
            shape = next_shape;
            layer_outputs.push(LayerActivations {
                codes: codes.clone(),
                params,
                shape: shape.clone(),
            });
        }
        let scores = codes
            .iter()
            .map(|c| fixedpoint::dequantize(*c, &params))
            .collect();
        Ok(ForwardTrace {
            layer_outputs,
            mac_preacts,
            scores,
        })
    }

    /// Top-1 accuracy of the quantized datapath; ties go to the lowest index.
    pub fn evaluate(&self, dataset: &Dataset, plan: Option<&[MultiplierConfig]>) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let derived = self.derive_quantized(plan)?;
        let mut correct = 0usize;
        for (features, &label) in dataset.features.iter().zip(&dataset.labels) {
            let trace = self.forward_derived(&derived, features)?;
            if argmax(&trace.scores) == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / dataset.len() as f64)
    }

    /// Top-1 accuracy of the real-arithmetic baseline.
    pub fn evaluate_real(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0usize;
        for (features, &label) in dataset.features.iter().zip(&dataset.labels) {
            let trace = self.forward_real(features)?;
            if argmax(&trace.scores) == label {
                correct += 1;
            }
        }
        Ok(correct as f64 / dataset.len() as f64)
    }
}

/// Per-layer quantized materialization, derived from real parameters.
struct QuantizedMac {
    qweights: Vec<SignMagWord>,
    w_params: QuantParams,
    out_params: QuantParams,
    bias_acc: Vec<i64>,
    scheme: MultiplierConfig,
}

impl QuantizedMac {
    fn derive(
        m: &MacLayer,
        in_params: QuantParams,
        act_bits: u8,
        weight_bits: u8,
        scheme: MultiplierConfig,
    ) -> Result<QuantizedMac> {
        let w_params = fixedpoint::calibrate_scale(&m.weights, weight_bits)
            .or_else(|_| scale_for_max_abs(0.0, weight_bits))?;
        let mut qweights = Vec::with_capacity(m.weights.len());
        for (&w, &keep) in m.weights.iter().zip(&m.mask) {
            // pruned weights are exactly zero in the quantized view too
            qweights.push(if keep {
                quantize(w, &w_params)?
            } else {
                SignMagWord::zero()
            });
        }
        let out_params = scale_for_max_abs(m.out_maxabs, act_bits)?;
        let acc_scale = in_params.scale * w_params.scale;
        let bias_acc = m
            .bias
            .iter()
            .map(|&b| (b * acc_scale).round() as i64)
            .collect();
        Ok(QuantizedMac {
            qweights,
            w_params,
            out_params,
            bias_acc,
            scheme,
        })
    }
}

/// Multiplier datapath for codes of the given widths: the smallest supported
/// operand width covering each side. Narrow codes run exactly on the wider
/// unit, so e.g. 3-bit quantization maps onto the 4-bit multiplier.
pub(crate) fn scheme_config(scheme: Scheme, act_bits: u8, weight_bits: u8) -> Result<MultiplierConfig> {
    let covering = |bits: u8| -> Result<u8> {
        [2u8, 4, 8, 16]
            .into_iter()
            .find(|&w| w >= bits)
            .ok_or(Error::InvalidBitWidth(bits))
    };
    MultiplierConfig::new(scheme, covering(act_bits)?, covering(weight_bits)?)
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = i;
        }
    }
    best
}

fn div_round_half_away(num: i64, den: i64) -> i64 {
    let q = num.abs() * 2 + den; // den > 0
    (q / (2 * den)) * num.signum()
}

fn real_mac(m: &MacLayer, act: &[f64], shape: &[usize]) -> Vec<f64> {
    match &m.kind {
        MacKind::Dense {
            in_features,
            out_features,
        } => {
            let mut out = Vec::with_capacity(*out_features);
            for o in 0..*out_features {
                let row = &m.weights[o * in_features..(o + 1) * in_features];
                let mask = &m.mask[o * in_features..(o + 1) * in_features];
                let mut acc = m.bias[o];
                for ((&w, &x), &keep) in row.iter().zip(act).zip(mask) {
                    if keep {
                        acc += w * x;
                    }
                }
                out.push(acc);
            }
            out
        }
        MacKind::Conv2d {
            in_ch,
            out_ch,
            kh,
            kw,
        } => {
            let (h, w) = (shape[1], shape[2]);
            let (oh, ow) = (h - kh + 1, w - kw + 1);
            let mut out = vec![0.0; out_ch * oh * ow];
            for oc in 0..*out_ch {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = m.bias[oc];
                        for ic in 0..*in_ch {
                            for ky in 0..*kh {
                                for kx in 0..*kw {
                                    let wi = ((oc * in_ch + ic) * kh + ky) * kw + kx;
                                    if m.mask[wi] {
                                        let xi = (ic * h + oy + ky) * w + ox + kx;
                                        acc += m.weights[wi] * act[xi];
                                    }
                                }
                            }
                        }
                        out[(oc * oh + oy) * ow + ox] = acc;
                    }
                }
            }
            out
        }
    }
}

fn quant_mac(
    m: &MacLayer,
    q: &QuantizedMac,
    codes: &[SignMagWord],
    shape: &[usize],
) -> Result<Vec<i64>> {
    match &m.kind {
        MacKind::Dense {
            in_features,
            out_features,
        } => {
            let mut out = Vec::with_capacity(*out_features);
            for o in 0..*out_features {
                let row = &q.qweights[o * in_features..(o + 1) * in_features];
                let acc = lutcore::dot_product(row, codes, &q.scheme)? + q.bias_acc[o];
                out.push(acc);
            }
            Ok(out)
        }
        MacKind::Conv2d {
            in_ch,
            out_ch,
            kh,
            kw,
        } => {
            let (h, w) = (shape[1], shape[2]);
            let (oh, ow) = (h - kh + 1, w - kw + 1);
            let mut out = vec![0i64; out_ch * oh * ow];
            for oc in 0..*out_ch {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut acc = q.bias_acc[oc];
                        for ic in 0..*in_ch {
                            for ky in 0..*kh {
                                for kx in 0..*kw {
                                    let wi = ((oc * in_ch + ic) * kh + ky) * kw + kx;
                                    let xi = (ic * h + oy + ky) * w + ox + kx;
                                    acc += lutcore::multiply(
                                        q.qweights[wi],
                                        codes[xi],
                                        &q.scheme,
                                    )?;
                                }
                            }
                        }
                        out[(oc * oh + oy) * ow + ox] = acc;
                    }
                }
            }
            Ok(out)
        }
    }
}

fn pool<T: Copy>(act: &[T], shape: &[usize], k: usize, reduce: impl Fn(&[T]) -> T) -> Vec<T> {
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    let (oh, ow) = (h / k, w / k);
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut win = Vec::with_capacity(k * k);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                win.clear();
                for ky in 0..k {
                    for kx in 0..k {
                        win.push(act[(ch * h + oy * k + ky) * w + ox * k + kx]);
                    }
                }
                out.push(reduce(&win));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealTrace {
    pub scores: Vec<f64>,
    pub mac_preacts: Vec<Vec<f64>>,
}

/// Counts per magnitude code over all observed activations.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationHistogram {
    pub n_bits: u8,
    pub counts: Vec<u64>,
}

impl ActivationHistogram {
    pub fn new(n_bits: u8) -> ActivationHistogram {
        ActivationHistogram {
            n_bits,
            counts: vec![0; 1 << n_bits],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, mag: u16, source_bits: u8) {
        let code = if source_bits > self.n_bits {
            mag >> (source_bits - self.n_bits)
        } else {
            mag
        };
        self.counts[code as usize] += 1;
    }
}

/// Histogram over all post-layer quantized activation magnitudes across the
/// dataset. Codes wider than `n_bits` are re-bucketed by dropping LSBs.
pub fn activation_histogram(
    model: &QuantModel,
    dataset: &Dataset,
    n_bits: u8,
) -> Result<ActivationHistogram> {
    let mut hist = ActivationHistogram::new(n_bits);
    for features in &dataset.features {
        let trace = model.forward(features, None)?;
        for layer in &trace.layer_outputs {
            for code in &layer.codes {
                hist.record(code.mag(), layer.params.n_bits);
            }
        }
    }
    Ok(hist)
}

/// Histogram over the surviving (unpruned) quantized weight magnitudes of
/// every mac layer.
pub fn weight_histogram(model: &QuantModel, n_bits: u8) -> Result<ActivationHistogram> {
    let mut hist = ActivationHistogram::new(n_bits);
    for m in model.mac_layers() {
        let w_params = fixedpoint::calibrate_scale(&m.weights, model.weight_bits)
            .or_else(|_| scale_for_max_abs(0.0, model.weight_bits))?;
        for (&w, &keep) in m.weights.iter().zip(&m.mask) {
            if keep {
                hist.record(quantize(w, &w_params)?.mag(), model.weight_bits);
            }
        }
    }
    Ok(hist)
}

/// Probability of each possible `w.mag * chunk` product, with the 2b chunk
/// taken from the low bits of activation codes drawn from `act_hist` and the
/// weight magnitude drawn from `weight_hist`. Exhaustive enumeration over the
/// histogram supports, no sampling.
pub fn lsb_product_distribution(
    act_hist: &ActivationHistogram,
    weight_hist: &ActivationHistogram,
) -> Result<Vec<f64>> {
    let act_total = act_hist.total();
    let w_total = weight_hist.total();
    if act_total == 0 || w_total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let max_w = weight_hist.counts.len() - 1;
    let mut probs = vec![0.0f64; max_w * 3 + 1];
    // chunk distribution from the low 2 bits of the activation codes
    let mut chunk_p = [0.0f64; 4];
    for (code, &count) in act_hist.counts.iter().enumerate() {
        chunk_p[code & 3] += count as f64 / act_total as f64;
    }
    for (wmag, &wcount) in weight_hist.counts.iter().enumerate() {
        if wcount == 0 {
            continue;
        }
        let pw = wcount as f64 / w_total as f64;
        for (chunk, &pc) in chunk_p.iter().enumerate() {
            probs[wmag * chunk] += pw * pc;
        }
    }
    Ok(probs)
}

pub fn distribution_argmax(probs: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lutcore::Scheme;

    fn exact4() -> MultiplierConfig {
        MultiplierConfig::new(Scheme::DncExact, 4, 4).unwrap()
    }

    fn approx4() -> MultiplierConfig {
        MultiplierConfig::new(Scheme::DncApprox, 4, 4).unwrap()
    }

    /// Two-output dense layer at unit scales: the second row pins the weight
    /// max-abs to the full-scale 4b code so both operands quantize 1:1.
    fn tiny_model(scheme: MultiplierConfig) -> QuantModel {
        let mut layer = dense_layer(vec![vec![5.0, 3.0], vec![15.0, 0.0]], vec![0.0, 0.0], scheme);
        layer.out_maxabs = 255.0;
        QuantModel::new(vec![2], 15.0, 4, 4, vec![Layer::Mac(layer)]).unwrap()
    }

    #[test]
    fn dense_preactivation_matches_dot_product() {
        let m = tiny_model(exact4());
        let trace = m.forward(&[9.0, 2.0], None).unwrap();
        assert_eq!(trace.mac_preacts[0], vec![51, 135]);
    }

    #[test]
    fn dense_preactivation_approx() {
        let m = tiny_model(approx4());
        let trace = m.forward(&[9.0, 2.0], None).unwrap();
        // per-element rule: 40 + 6, and (15*2)<<2 for the full-scale row
        assert_eq!(trace.mac_preacts[0], vec![46, 120]);
    }

    #[test]
    fn all_zero_input_gives_zero_preactivations() {
        let m = tiny_model(exact4());
        let trace = m.forward(&[0.0, 0.0], None).unwrap();
        assert_eq!(trace.mac_preacts[0], vec![0, 0]);
    }

    #[test]
    fn backend_equivalence_tlut_vs_dnc_exact() {
        let m = tiny_model(exact4());
        let tlut_plan = [MultiplierConfig::new(Scheme::TLut, 4, 4).unwrap()];
        for input in [[9.0, 2.0], [3.0, 7.0], [-4.0, 5.0]] {
            let a = m.forward(&input, None).unwrap();
            let b = m.forward(&input, Some(&tlut_plan)).unwrap();
            assert_eq!(a.layer_outputs, b.layer_outputs);
        }
    }

    #[test]
    fn conv_matches_direct_convolution() {
        // 1x3x3 input; kernel 2 pins the weight max-abs to the full-scale 8b
        // code so everything quantizes 1:1
        let mut conv = conv2d_layer(
            1,
            2,
            2,
            2,
            vec![1.0, 2.0, 3.0, 4.0, 255.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0],
            MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap(),
        );
        conv.out_maxabs = 255.0;
        let m = QuantModel::new(vec![1, 3, 3], 255.0, 8, 8, vec![Layer::Mac(conv)]).unwrap();
        let input = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let trace = m.forward(&input, None).unwrap();
        // direct 2x2 valid convolution of the integer grid
        let expect = |tl: i64, tr: i64, bl: i64, br: i64| tl + 2 * tr + 3 * bl + 4 * br;
        assert_eq!(
            trace.mac_preacts[0][..4],
            [
                expect(1, 2, 4, 5),
                expect(2, 3, 5, 6),
                expect(4, 5, 7, 8),
                expect(5, 6, 8, 9),
            ]
        );
    }

    #[test]
    fn relu_and_pool_shapes() {
        let mut conv = conv2d_layer(
            1,
            2,
            2,
            2,
            vec![1.0; 8],
            vec![0.0, 0.0],
            MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap(),
        );
        conv.out_maxabs = 1000.0;
        let m = QuantModel::new(
            vec![1, 5, 5],
            10.0,
            8,
            8,
            vec![
                Layer::Mac(conv),
                Layer::Relu,
                Layer::MaxPool { k: 2 },
                Layer::Flatten,
            ],
        )
        .unwrap();
        assert_eq!(m.output_shape().unwrap(), vec![8]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let layer = dense_layer(vec![vec![1.0, 2.0]], vec![0.0], exact4());
        assert!(QuantModel::new(vec![3], 1.0, 4, 4, vec![Layer::Mac(layer)]).is_err());
    }

    #[test]
    fn pruned_weights_are_neutral() {
        let mut layer = dense_layer(vec![vec![5.0, 3.0], vec![15.0, 0.0]], vec![0.0, 0.0], exact4());
        layer.mask[1] = false;
        layer.weights[1] = 0.0;
        layer.out_maxabs = 255.0;
        let m = QuantModel::new(vec![2], 15.0, 4, 4, vec![Layer::Mac(layer)]).unwrap();
        let trace = m.forward(&[9.0, 2.0], None).unwrap();
        assert_eq!(trace.mac_preacts[0], vec![45, 135]);
        assert_eq!(m.mac_counts().unwrap(), vec![3]);
    }

    #[test]
    fn mac_counts_conv() {
        let mut conv = conv2d_layer(
            1,
            1,
            2,
            2,
            vec![1.0, 1.0, 1.0, 0.0],
            vec![0.0],
            MultiplierConfig::new(Scheme::DncExact, 8, 8).unwrap(),
        );
        conv.mask[3] = false;
        conv.weights[3] = 0.0;
        conv.out_maxabs = 100.0;
        let m = QuantModel::new(vec![1, 3, 3], 10.0, 8, 8, vec![Layer::Mac(conv)]).unwrap();
        // 3 surviving weights x 2x2 output positions
        assert_eq!(m.mac_counts().unwrap(), vec![12]);
    }

    #[test]
    fn relu_layer_zeroes_negative_activations() {
        let mut layer = dense_layer(vec![vec![-1.0]], vec![0.0], exact4());
        layer.out_maxabs = 15.0;
        let m = QuantModel::new(
            vec![1],
            15.0,
            4,
            4,
            vec![Layer::Mac(layer), Layer::Relu],
        )
        .unwrap();
        let trace = m.forward(&[7.0], None).unwrap();
        let hist_codes: Vec<u16> = trace.layer_outputs[1].codes.iter().map(|c| c.mag()).collect();
        assert_eq!(hist_codes, vec![0]);
    }

    #[test]
    fn uniform_lsb_product_zero_probability() {
        let mut act = ActivationHistogram::new(4);
        act.counts.iter_mut().for_each(|c| *c = 1);
        let mut wh = ActivationHistogram::new(4);
        wh.counts.iter_mut().for_each(|c| *c = 1);
        let probs = lsb_product_distribution(&act, &wh).unwrap();
        assert!((probs[0] - 0.296875).abs() < 1e-12);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lsb_product_all_mass_at_zero() {
        let mut act = ActivationHistogram::new(4);
        act.counts[0] = 10;
        let mut wh = ActivationHistogram::new(4);
        wh.counts.iter_mut().for_each(|c| *c = 1);
        let probs = lsb_product_distribution(&act, &wh).unwrap();
        assert_eq!(probs[0], 1.0);
        assert!(probs[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn lsb_product_mode_zero_when_hist_mode_zero() {
        let mut act = ActivationHistogram::new(4);
        act.counts[0] = 100;
        for c in 1..16 {
            act.counts[c] = 5;
        }
        let mut wh = ActivationHistogram::new(4);
        for c in 0..16 {
            wh.counts[c] = 1 + (16 - c as u64);
        }
        let probs = lsb_product_distribution(&act, &wh).unwrap();
        assert_eq!(distribution_argmax(&probs), 0);
    }

    #[test]
    fn empty_histograms_rejected() {
        let empty = ActivationHistogram::new(4);
        let mut nonempty = ActivationHistogram::new(4);
        nonempty.counts[1] = 1;
        assert!(lsb_product_distribution(&empty, &nonempty).is_err());
        assert!(lsb_product_distribution(&nonempty, &empty).is_err());
    }

    #[test]
    fn avgpool_rounds_half_away_from_zero() {
        assert_eq!(div_round_half_away(5, 4), 1);
        assert_eq!(div_round_half_away(6, 4), 2);
        assert_eq!(div_round_half_away(-6, 4), -2);
        assert_eq!(div_round_half_away(-5, 4), -1);
    }
}
