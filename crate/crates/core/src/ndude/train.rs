use alloc::vec;
use alloc::vec::Vec;

use super::{
    adam_step, argmax, backward_into, cross_entropy, forward_into, init_params, AdamState, Arch,
    Input, NetParams, Workspace,
};
use crate::context::{ContextSpec, Signal};
use crate::metrics::Denoised;
use crate::problem::Problem;
use crate::rng::{SeededRng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// When set, every node's incoming weights are projected back onto the
    /// ball of this radius after each step.
    pub max_weight_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 128,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            shuffle: true,
            max_weight_norm: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive"));
        }
        if matches!(self.max_weight_norm, Some(b) if !(b > 0.0)) {
            return Err(Error::InvalidConfig("weight-norm radius must be positive"));
        }
        Ok(())
    }
}

/// Full-data statistics after one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Mean cross-entropy objective.
    pub objective: f64,
    /// Average estimated loss of the argmax denoiser.
    pub est_loss: f64,
    /// Seconds since training started, as reported by the observer.
    pub wall_seconds: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// Objective of the initial parameters.
    pub initial_objective: f64,
    pub epochs: Vec<EpochStats>,
}

/// Hooks called by [`train_observed`].
pub trait TrainObserver {
    /// Clock used for [`EpochStats::wall_seconds`].
    fn elapsed_seconds(&self) -> f64 {
        0.0
    }

    /// Called after each epoch (1-based) with the denoiser at that point.
    fn on_epoch(&mut self, _epoch: usize, _params: &NetParams, _out: &Denoised, _stats: &EpochStats) {}
}

impl TrainObserver for () {}

/// Trains a fresh network with shuffled mini-batch Adam on the noisy data
/// itself using pseudo-labels.
pub fn train(
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
    arch: &Arch,
    cfg: &TrainConfig,
) -> Result<(NetParams, TrainTrace)> {
    train_observed(signal, spec, problem, arch, cfg, &mut ())
}

pub fn train_observed<O: TrainObserver + ?Sized>(
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
    arch: &Arch,
    cfg: &TrainConfig,
    observer: &mut O,
) -> Result<(NetParams, TrainTrace)> {
    cfg.validate()?;
    spec.check(signal)?;
    if arch.input_dim != spec.encoded_dim() {
        return Err(Error::DimensionMismatch { expected: spec.encoded_dim(), got: arch.input_dim });
    }
    if arch.out_dim != problem.s_size() {
        return Err(Error::DimensionMismatch { expected: problem.s_size(), got: arch.out_dim });
    }
    let mut positions: Vec<u32> = (0..signal.len())
        .filter(|&i| spec.covers(signal, i))
        .map(|i| i as u32)
        .collect();
    if positions.is_empty() {
        return Err(Error::EmptyEvaluation);
    }

    let mut params = init_params(arch, cfg.seed);
    let mut adam = AdamState::new(&params);
    let mut shuffler = SeededRng::new(cfg.seed, Stream::Shuffle);
    let mut ws = Workspace::new(arch);
    let mut grads = params.zero_gradients();
    let mut active = Vec::with_capacity(spec.context_len());
    let l_new = problem.tables.l_new();
    let z = signal.symbols();

    let initial_objective = evaluate(&params, signal, spec, problem, &mut ws).1.objective;
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;
    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            shuffler.shuffle(&mut positions);
        }
        for batch in positions.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| g.fill_zero());
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let i = i as usize;
                active.clear();
                spec.active_indices(signal, i, &mut active);
                let input = Input::OneHot(&active);
                forward_into(&params, input, &mut ws);
                backward_into(&params, input, l_new.row(z[i] as usize), scale, &mut ws, &mut grads);
            }
            adam_step(&mut params, &mut adam, &grads, cfg);
            if let Some(radius) = cfg.max_weight_norm {
                params.project_onto_ball(radius);
            }
            steps += 1;
        }
        let (out, mut stats) = evaluate(&params, signal, spec, problem, &mut ws);
        stats.wall_seconds = observer.elapsed_seconds();
        stats.steps = steps;
        observer.on_epoch(epoch, &params, &out, &stats);
        epochs.push(stats);
    }
    Ok((params, TrainTrace { initial_objective, epochs }))
}

/// Full pass: argmax denoiser output plus objective and estimated loss.
fn evaluate(
    params: &NetParams,
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
    ws: &mut Workspace,
) -> (Denoised, EpochStats) {
    let z = signal.symbols();
    let l = problem.tables.l();
    let l_new = problem.tables.l_new();
    let mut symbols = Vec::with_capacity(z.len());
    let mut choices = vec![None; z.len()];
    let mut active = Vec::with_capacity(spec.context_len());
    let (mut obj, mut est, mut n) = (0.0, 0.0, 0usize);
    for (i, &zi) in z.iter().enumerate() {
        if !spec.covers(signal, i) {
            symbols.push(zi);
            continue;
        }
        active.clear();
        spec.active_indices(signal, i, &mut active);
        forward_into(params, Input::OneHot(&active), ws);
        let m = argmax(ws.probs());
        obj += cross_entropy(l_new.row(zi as usize), ws.probs());
        est += l[(zi as usize, m)];
        n += 1;
        symbols.push(problem.mappings.map(m, zi));
        choices[i] = Some(m);
    }
    let n = n.max(1) as f64;
    let stats = EpochStats { objective: obj / n, est_loss: est / n, wall_seconds: 0.0, steps: 0 };
    (Denoised { symbols, choices }, stats)
}

/// Applies `s_{argmax p(w, C_i)}` to every covered `Z_i`.
pub fn ndude_denoise(
    params: &NetParams,
    signal: Signal<'_>,
    spec: &ContextSpec,
    problem: &Problem,
) -> Result<Denoised> {
    spec.check(signal)?;
    if params.arch.input_dim != spec.encoded_dim() {
        return Err(Error::DimensionMismatch { expected: spec.encoded_dim(), got: params.arch.input_dim });
    }
    if params.arch.out_dim != problem.s_size() {
        return Err(Error::DimensionMismatch { expected: problem.s_size(), got: params.arch.out_dim });
    }
    let mut ws = Workspace::new(&params.arch);
    Ok(evaluate(params, signal, spec, problem, &mut ws).0)
}
