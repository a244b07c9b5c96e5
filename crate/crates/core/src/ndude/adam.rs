use alloc::vec::Vec;

use super::{Gradients, Layer, NetParams, TrainConfig};

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Layer>,
    pub v: Vec<Layer>,
}

impl AdamState {
    pub fn new(params: &NetParams) -> Self {
        AdamState { step: 0, m: params.zero_gradients(), v: params.zero_gradients() }
    }
}

#[inline]
fn update(theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], c: &Coeffs) {
    for (((t, &g), m), v) in theta.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = c.b1 * *m + (1.0 - c.b1) * g;
        *v = c.b2 * *v + (1.0 - c.b2) * g * g;
        let m_hat = *m / c.bc1;
        let v_hat = *v / c.bc2;
        *t -= c.lr * m_hat / (libm::sqrt(v_hat) + c.eps);
    }
}

struct Coeffs {
    b1: f64,
    b2: f64,
    bc1: f64,
    bc2: f64,
    lr: f64,
    eps: f64,
}

/// One bias-corrected Adam update.
pub fn adam_step(params: &mut NetParams, state: &mut AdamState, grads: &Gradients, cfg: &TrainConfig) {
    state.step += 1;
    let t = state.step as f64;
    let c = Coeffs {
        b1: cfg.adam_beta1,
        b2: cfg.adam_beta2,
        bc1: 1.0 - libm::pow(cfg.adam_beta1, t),
        bc2: 1.0 - libm::pow(cfg.adam_beta2, t),
        lr: cfg.learning_rate,
        eps: cfg.adam_eps,
    };
    for (((p, g), m), v) in params
        .layers
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        update(&mut p.weights, &g.weights, &mut m.weights, &mut v.weights, &c);
        update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, &c);
    }
}
