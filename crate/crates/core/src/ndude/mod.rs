//! Neural DUDE: one fully-connected network maps an encoded context to a
//! distribution over single-symbol denoisers.
//!
//! Hidden layers use ReLU, the output layer softmax. Training minimizes the
//! unnormalized cross-entropy between the network output at `C_i` and the
//! pseudo-label `L_newᵀ 1_{Z_i}`, averaged over positions; denoising applies
//! the most probable mapping (smallest index on ties) to `Z_i`.
//!
//! Weights of layer `ℓ` are stored fan-in major: entry `(i, j)` connects
//! input `i` to node `j`, so node `j`'s incoming weight vector is column `j`.
//! Every layer also has a bias vector; bias entries are not part of the
//! per-node weight norms.

mod adam;
mod train;

pub use adam::{adam_step, AdamState};
pub use train::{
    ndude_denoise, train, train_observed, EpochStats, TrainConfig, TrainObserver, TrainTrace,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::LossTables;
use crate::context::{ContextSpec, EncodedContext, Signal};
use crate::rng::{SeededRng, Stream};
use crate::{Error, Result};

/// Floor applied to probabilities inside the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Layer widths of a fully-connected network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arch {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub out_dim: usize,
}

impl Arch {
    pub fn new(input_dim: usize, hidden: Vec<usize>, out_dim: usize) -> Result<Self> {
        if input_dim == 0 || out_dim == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig("layer widths must be positive"));
        }
        Ok(Arch { input_dim, hidden, out_dim })
    }

    /// Network over `spec`'s encoding with one output per mapping.
    pub fn for_contexts(spec: &ContextSpec, hidden: Vec<usize>, s_size: usize) -> Result<Self> {
        Arch::new(spec.encoded_dim(), hidden, s_size)
    }

    /// Widths of every layer, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = Vec::with_capacity(self.hidden.len() + 2);
        d.push(self.input_dim);
        d.extend_from_slice(&self.hidden);
        d.push(self.out_dim);
        d
    }

    /// Number of connection weights, biases excluded.
    pub fn weight_count(&self) -> usize {
        self.dims().windows(2).map(|w| w[0] * w[1]).sum()
    }

    pub fn bias_count(&self) -> usize {
        self.hidden.iter().sum::<usize>() + self.out_dim
    }
}

/// Parses hidden widths: `"40x4"` (width × depth), `"64,32"`, or `"linear"`
/// for no hidden layer.
pub fn parse_hidden(s: &str) -> Option<Vec<usize>> {
    let s = s.trim();
    if s == "linear" || s == "0" {
        return Some(Vec::new());
    }
    if let Some((w, d)) = s.split_once(['x', 'X', '×']) {
        let w: usize = w.trim().parse().ok()?;
        let d: usize = d.trim().parse().ok()?;
        if w == 0 || d == 0 {
            return None;
        }
        return Some(vec![w; d]);
    }
    let widths: Option<Vec<usize>> = s.split(',').map(|p| p.trim().parse().ok()).collect();
    widths.filter(|w| !w.is_empty() && !w.contains(&0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer { fan_in, fan_out, weights: vec![0.0; fan_in * fan_out], bias: vec![0.0; fan_out] }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.fan_out..(i + 1) * self.fan_out]
    }

    /// Euclidean norm of each node's incoming weights.
    pub fn node_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.fan_out];
        for i in 0..self.fan_in {
            for (acc, w) in sq.iter_mut().zip(self.row(i)) {
                *acc += w * w;
            }
        }
        sq.into_iter().map(libm::sqrt).collect()
    }

    fn fill_zero(&mut self) {
        self.weights.iter_mut().for_each(|w| *w = 0.0);
        self.bias.iter_mut().for_each(|b| *b = 0.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub arch: Arch,
    pub layers: Vec<Layer>,
}

/// Gradient tables, shaped like [`NetParams::layers`].
pub type Gradients = Vec<Layer>;

impl NetParams {
    pub fn zeros(arch: &Arch) -> Self {
        let layers = arch.dims().windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        NetParams { arch: arch.clone(), layers }
    }

    /// Largest incoming-weight norm over all nodes of all layers.
    pub fn max_node_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.node_norms())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    pub fn zero_gradients(&self) -> Gradients {
        self.layers.iter().map(|l| Layer::zeros(l.fan_in, l.fan_out)).collect()
    }

    /// Rescales every node whose incoming weight norm exceeds `bound`.
    pub fn project_onto_ball(&mut self, bound: f64) {
        for layer in &mut self.layers {
            let norms = layer.node_norms();
            for (j, &nrm) in norms.iter().enumerate() {
                if nrm > bound {
                    let f = bound / nrm;
                    for i in 0..layer.fan_in {
                        layer.weights[i * layer.fan_out + j] *= f;
                    }
                }
            }
        }
    }
}

/// Zero-mean uniform weights with standard deviation `1/√fan_in`, zero
/// biases, drawn from the [`Stream::Init`] stream of `seed`.
pub fn init_params(arch: &Arch, seed: u64) -> NetParams {
    let mut rng = SeededRng::new(seed, Stream::Init);
    let mut params = NetParams::zeros(arch);
    for layer in &mut params.layers {
        let half_width = libm::sqrt(3.0 / layer.fan_in as f64);
        for w in &mut layer.weights {
            *w = (2.0 * rng.uniform() - 1.0) * half_width;
        }
    }
    params
}

/// Network input: a dense vector, or the positions of the ones of a one-hot
/// encoding.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Dense(&'a [f64]),
    OneHot(&'a [u32]),
}

/// Scratch buffers for one forward/backward pass.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// Post-activation values of each hidden layer.
    acts: Vec<Vec<f64>>,
    logits: Vec<f64>,
    probs: Vec<f64>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(arch: &Arch) -> Self {
        let widest = arch.hidden.iter().copied().chain([arch.out_dim]).max().unwrap_or(1);
        Workspace {
            acts: arch.hidden.iter().map(|&w| vec![0.0; w]).collect(),
            logits: vec![0.0; arch.out_dim],
            probs: vec![0.0; arch.out_dim],
            delta: Vec::with_capacity(widest),
            delta_prev: Vec::with_capacity(widest),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[inline]
fn affine(layer: &Layer, input: Input<'_>, out: &mut [f64]) {
    out.copy_from_slice(&layer.bias);
    match input {
        Input::Dense(x) => {
            for (i, &a) in x.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, w) in out.iter_mut().zip(layer.row(i)) {
                    *o += a * w;
                }
            }
        }
        Input::OneHot(active) => {
            for &i in active {
                for (o, w) in out.iter_mut().zip(layer.row(i as usize)) {
                    *o += w;
                }
            }
        }
    }
}

fn softmax(logits: &[f64], probs: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (p, &l) in probs.iter_mut().zip(logits) {
        *p = libm::exp(l - max);
        sum += *p;
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
}

/// Forward pass; the output distribution is left in `ws.probs()`.
pub fn forward_into(params: &NetParams, input: Input<'_>, ws: &mut Workspace) {
    let last = params.layers.len() - 1;
    for (l, layer) in params.layers.iter().enumerate() {
        let hidden = ws.acts.len();
        let (done, rest) = ws.acts.split_at_mut(l.min(hidden));
        let inp = if l == 0 { input } else { Input::Dense(&done[l - 1]) };
        if l == last {
            affine(layer, inp, &mut ws.logits);
        } else {
            let out = &mut rest[0];
            affine(layer, inp, out);
            for v in out.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
    }
    softmax(&ws.logits, &mut ws.probs);
}

/// `C(g, p) = -Σ_s g_s log max(p_s, floor)`.
#[inline]
pub fn cross_entropy(label: &[f64], probs: &[f64]) -> f64 {
    -label
        .iter()
        .zip(probs)
        .map(|(&g, &p)| if g == 0.0 { 0.0 } else { g * libm::log(p.max(PROB_FLOOR)) })
        .sum::<f64>()
}

/// Adds `scale · ∇ C(label, p(input))` to `grads`, assuming `ws` holds the
/// forward pass for `input`.
pub fn backward_into(
    params: &NetParams,
    input: Input<'_>,
    label: &[f64],
    scale: f64,
    ws: &mut Workspace,
    grads: &mut Gradients,
) {
    let total: f64 = label.iter().sum();
    ws.delta.clear();
    ws.delta
        .extend(ws.probs.iter().zip(label).map(|(&p, &g)| scale * (total * p - g)));
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let grad = &mut grads[l];
        for (b, d) in grad.bias.iter_mut().zip(&ws.delta) {
            *b += d;
        }
        let fo = layer.fan_out;
        let inp = if l == 0 { input } else { Input::Dense(&ws.acts[l - 1]) };
        match inp {
            Input::Dense(x) => {
                for (i, &a) in x.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let g = &mut grad.weights[i * fo..(i + 1) * fo];
                    for (gw, d) in g.iter_mut().zip(&ws.delta) {
                        *gw += a * d;
                    }
                }
            }
            Input::OneHot(active) => {
                for &i in active {
                    let i = i as usize;
                    let g = &mut grad.weights[i * fo..(i + 1) * fo];
                    for (gw, d) in g.iter_mut().zip(&ws.delta) {
                        *gw += d;
                    }
                }
            }
        }
        if l == 0 {
            break;
        }
        let below = &ws.acts[l - 1];
        ws.delta_prev.clear();
        for (i, &a) in below.iter().enumerate() {
            ws.delta_prev.push(if a > 0.0 {
                layer.row(i).iter().zip(&ws.delta).map(|(w, d)| w * d).sum()
            } else {
                0.0
            });
        }
        core::mem::swap(&mut ws.delta, &mut ws.delta_prev);
    }
}

fn check_dim(params: &NetParams, len: usize) -> Result<()> {
    if len != params.arch.input_dim {
        return Err(Error::DimensionMismatch { expected: params.arch.input_dim, got: len });
    }
    Ok(())
}

/// Output distribution over mappings for one encoded context.
pub fn forward(params: &NetParams, ctx: &EncodedContext) -> Result<Vec<f64>> {
    check_dim(params, ctx.vec.len())?;
    let mut ws = Workspace::new(&params.arch);
    forward_into(params, Input::Dense(&ctx.vec), &mut ws);
    Ok(ws.probs)
}

fn check_batch(params: &NetParams, batch: &[(Vec<f64>, EncodedContext)]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    for (label, ctx) in batch {
        check_dim(params, ctx.vec.len())?;
        if label.len() != params.arch.out_dim {
            return Err(Error::DimensionMismatch { expected: params.arch.out_dim, got: label.len() });
        }
    }
    Ok(())
}

/// Mean cross-entropy over a batch of (pseudo-label, context) pairs.
pub fn batch_objective(params: &NetParams, batch: &[(Vec<f64>, EncodedContext)]) -> Result<f64> {
    check_batch(params, batch)?;
    let mut ws = Workspace::new(&params.arch);
    let sum: f64 = batch
        .iter()
        .map(|(g, ctx)| {
            forward_into(params, Input::Dense(&ctx.vec), &mut ws);
            cross_entropy(g, &ws.probs)
        })
        .sum();
    Ok(sum / batch.len() as f64)
}

/// Analytic gradient of [`batch_objective`].
pub fn gradient(params: &NetParams, batch: &[(Vec<f64>, EncodedContext)]) -> Result<Gradients> {
    check_batch(params, batch)?;
    let mut ws = Workspace::new(&params.arch);
    let mut grads = params.zero_gradients();
    let scale = 1.0 / batch.len() as f64;
    for (g, ctx) in batch {
        let input = Input::Dense(&ctx.vec);
        forward_into(params, input, &mut ws);
        backward_into(params, input, g, scale, &mut ws, &mut grads);
    }
    Ok(grads)
}

/// Objective `(1/n) Σ_i C(L_newᵀ 1_{Z_i}, p(w, C_i))` over the positions `spec`
/// covers.
pub fn objective(
    params: &NetParams,
    signal: Signal<'_>,
    spec: &ContextSpec,
    tables: &LossTables,
) -> Result<f64> {
    check_dim(params, spec.encoded_dim())?;
    spec.check(signal)?;
    if params.arch.out_dim != tables.s_size() {
        return Err(Error::DimensionMismatch { expected: tables.s_size(), got: params.arch.out_dim });
    }
    let mut ws = Workspace::new(&params.arch);
    let mut active = Vec::with_capacity(spec.context_len());
    let (mut sum, mut n) = (0.0, 0usize);
    for i in 0..signal.len() {
        if !spec.covers(signal, i) {
            continue;
        }
        active.clear();
        spec.active_indices(signal, i, &mut active);
        forward_into(params, Input::OneHot(&active), &mut ws);
        sum += cross_entropy(tables.l_new().row(signal.symbols()[i] as usize), &ws.probs);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyEvaluation);
    }
    Ok(sum / n as f64)
}

/// Smallest index attaining the maximum.
#[inline]
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (m, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = m;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;
    use crate::context::{one_hot, Padding};

    fn ctx(v: &[f64]) -> EncodedContext {
        EncodedContext { vec: v.to_vec(), center_index: 0 }
    }

    #[test]
    fn parse_hidden_forms() {
        assert_eq!(parse_hidden("40x4"), Some(vec![40; 4]));
        assert_eq!(parse_hidden("128x12"), Some(vec![128; 12]));
        assert_eq!(parse_hidden("64,32"), Some(vec![64, 32]));
        assert_eq!(parse_hidden("linear"), Some(vec![]));
        assert_eq!(parse_hidden("0x3"), None);
        assert_eq!(parse_hidden("abc"), None);
    }

    #[test]
    fn weight_count_formula() {
        let a = Arch::new(240, vec![40; 4], 4).unwrap();
        assert_eq!(a.weight_count(), 240 * 40 + 3 * 40 * 40 + 40 * 4);
        assert_eq!(a.weight_count(), 14560);
        assert_eq!(a.bias_count(), 164);
    }

    #[test]
    fn init_is_deterministic() {
        let a = Arch::new(8, vec![5, 3], 4).unwrap();
        assert_eq!(init_params(&a, 9), init_params(&a, 9));
        assert_ne!(init_params(&a, 9), init_params(&a, 10));
        let p = init_params(&a, 9);
        assert!(p.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        let bound = libm::sqrt(3.0 / 8.0);
        assert!(p.layers[0].weights.iter().all(|w| w.abs() <= bound));
    }

    #[test]
    fn linear_model_is_valid() {
        let a = Arch::new(4, vec![], 4).unwrap();
        let p = init_params(&a, 1);
        assert_eq!(p.layers.len(), 1);
        let out = forward(&p, &ctx(&[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_net_is_uniform() {
        let a = Arch::new(4, vec![3, 3], 4).unwrap();
        let out = forward(&NetParams::zeros(&a), &ctx(&[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!(out.iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn bias_shift_does_not_change_output() {
        let a = Arch::new(4, vec![6], 4).unwrap();
        let p = init_params(&a, 3);
        let mut q = p.clone();
        q.layers[1].bias.iter_mut().for_each(|b| *b += 7.5);
        let c = ctx(&[1.0, 0.0, 0.0, 1.0]);
        let (a, b) = (forward(&p, &c).unwrap(), forward(&q, &c).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_is_checked() {
        let a = Arch::new(4, vec![2], 4).unwrap();
        let p = NetParams::zeros(&a);
        assert!(matches!(forward(&p, &ctx(&[1.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn objective_of_uniform_output() {
        let ch = Channel::bsc(0.1).unwrap();
        let t = ch.estimated_loss(&ch.mappings().unwrap()).unwrap();
        let spec = ContextSpec::one_d(1, 2, Padding::ZeroPad);
        let a = Arch::for_contexts(&spec, vec![3], 4).unwrap();
        let p = NetParams::zeros(&a);
        let z = [0; 5];
        let v = objective(&p, Signal::line(&z), &spec, &t).unwrap();
        assert!((v - 2.5 * libm::log(4.0)).abs() < 1e-12);
        let c = one_hot(&[Some(0), None], 2).unwrap();
        let b = [(t.l_new().row(0).to_vec(), c)];
        assert!((batch_objective(&p, &b).unwrap() - 2.5 * libm::log(4.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_labels_give_zero_gradient() {
        let a = Arch::new(4, vec![5, 5], 4).unwrap();
        let p = init_params(&a, 2);
        let b = [(vec![0.0; 4], ctx(&[1.0, 0.0, 0.0, 1.0]))];
        let g = gradient(&p, &b).unwrap();
        assert!(g.iter().all(|l| l.weights.iter().chain(&l.bias).all(|&v| v == 0.0)));
        assert_eq!(batch_objective(&p, &b).unwrap(), 0.0);
    }

    #[test]
    fn output_layer_gradient_closed_form() {
        let a = Arch::new(4, vec![5], 4).unwrap();
        let p = init_params(&a, 4);
        let c = ctx(&[0.0, 1.0, 1.0, 0.0]);
        let g = vec![0.3, 1.2, 0.0, 0.7];
        let grads = gradient(&p, &[(g.clone(), c.clone())]).unwrap();
        let mut ws = Workspace::new(&a);
        forward_into(&p, Input::Dense(&c.vec), &mut ws);
        let total: f64 = g.iter().sum();
        let h = ws.acts[0].clone();
        for i in 0..5 {
            for s in 0..4 {
                let expect = h[i] * (total * ws.probs[s] - g[s]);
                assert!((grads[1].weights[i * 4 + s] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn one_hot_input_matches_dense() {
        let a = Arch::new(6, vec![4, 3], 4).unwrap();
        let p = init_params(&a, 5);
        let dense = [0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let mut w1 = Workspace::new(&a);
        let mut w2 = Workspace::new(&a);
        forward_into(&p, Input::Dense(&dense), &mut w1);
        forward_into(&p, Input::OneHot(&[1, 2]), &mut w2);
        assert_eq!(w1.probs, w2.probs);
        let g = [1.0, 0.0, 0.5, 0.25];
        let mut g1 = p.zero_gradients();
        let mut g2 = p.zero_gradients();
        backward_into(&p, Input::Dense(&dense), &g, 1.0, &mut w1, &mut g1);
        backward_into(&p, Input::OneHot(&[1, 2]), &g, 1.0, &mut w2, &mut g2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn projection_caps_node_norms() {
        let a = Arch::new(10, vec![8], 4).unwrap();
        let mut p = init_params(&a, 6);
        p.layers[0].weights.iter_mut().for_each(|w| *w *= 10.0);
        p.project_onto_ball(0.5);
        assert!(p.max_node_norm() <= 0.5 + 1e-12);
    }

    #[test]
    fn argmax_ties_to_first() {
        assert_eq!(argmax(&[0.25; 4]), 0);
        assert_eq!(argmax(&[0.1, 0.4, 0.4, 0.1]), 1);
    }
}
