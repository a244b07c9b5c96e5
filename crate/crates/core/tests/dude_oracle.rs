//! DUDE against a brute-force per-context search, plus estimated-loss
//! optimality and position-permutation invariance.

use std::collections::BTreeMap;

use dude_core::dude::{accumulate, dude_rule};
use dude_core::metrics::avg_estimated_loss;
use dude_core::rng::{SeededRng, Stream};
use dude_core::{dude, Channel, ContextSpec, LossTables, Matrix, Padding, Problem, Signal};

fn random_binary_channel(rng: &mut SeededRng) -> Channel {
    loop {
        let a = 0.02 + 0.4 * rng.uniform();
        let b = 0.02 + 0.4 * rng.uniform();
        let pi = Matrix::from_rows(&[[1.0 - a, a], [b, 1.0 - b]]).unwrap();
        let lambda = Matrix::from_rows(&[[0.0, 1.0 + rng.uniform()], [1.0, 0.0]]).unwrap();
        if let Ok(ch) = Channel::new(pi, lambda) {
            return ch;
        }
    }
}

fn random_source(rng: &mut SeededRng, n: usize) -> Vec<u8> {
    let p = 0.05 + 0.5 * rng.uniform();
    let mut cur = (rng.uniform() < 0.5) as u8;
    (0..n)
        .map(|_| {
            if rng.uniform() < p {
                cur ^= 1;
            }
            cur
        })
        .collect()
}

/// Exhaustive search over the four binary mappings for every context.
fn brute_force(z: &[u8], k: usize, t: &LossTables) -> Vec<u8> {
    let n = z.len();
    let mut ctx_positions: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    for i in k..n - k {
        let mut c = z[i - k..i].to_vec();
        c.extend_from_slice(&z[i + 1..=i + k]);
        ctx_positions.entry(c).or_default().push(i);
    }
    let mapping = |m: usize, zi: u8| ((m >> zi) & 1) as u8;
    let mut out = z.to_vec();
    for positions in ctx_positions.values() {
        let mut best = (f64::INFINITY, 0);
        for m in 0..4 {
            let total: f64 = positions.iter().map(|&i| t.l()[(z[i] as usize, m)]).sum();
            if total < best.0 {
                best = (total, m);
            }
        }
        for &i in positions {
            out[i] = mapping(best.1, z[i]);
        }
    }
    out
}

#[test]
fn matches_brute_force_on_random_instances() {
    let mut rng = SeededRng::new(2024, Stream::Source);
    for instance in 0..50 {
        let ch = random_binary_channel(&mut rng);
        let k = rng.below(4);
        let n = 2 * k + 1 + rng.below(2000 - 2 * k);
        let x = random_source(&mut rng, n);
        let z = ch.corrupt(&x, instance).unwrap();
        let t = ch.estimated_loss(&ch.mappings().unwrap()).unwrap();
        let got = dude::dude_denoise(&z, k, &ch, Padding::SkipBoundary).unwrap();
        assert_eq!(got, brute_force(&z, k, &t), "instance {instance}, n={n}, k={k}");
    }
}

#[test]
fn rule_beats_every_fixed_sliding_window_rule() {
    let mut rng = SeededRng::new(7, Stream::Source);
    let ch = Channel::bsc(0.15).unwrap();
    let problem = Problem::new(ch.clone()).unwrap();
    let x = random_source(&mut rng, 3000);
    let z = ch.corrupt(&x, 1).unwrap();
    let k = 2;
    let spec = ContextSpec::one_d(k, 2, Padding::SkipBoundary);
    let out = dude::denoise(Signal::line(&z), &spec, &problem).unwrap();
    let interior = &z[k..z.len() - k];
    let chosen: Vec<usize> = out.choices[k..z.len() - k].iter().map(|c| c.unwrap()).collect();
    let best = avg_estimated_loss(interior, &chosen, &problem.tables).unwrap();
    // Random context -> mapping rules over the 16 contexts.
    for trial in 0..200u64 {
        let mut r = SeededRng::new(trial, Stream::Init);
        let table: Vec<usize> = (0..16).map(|_| r.below(4)).collect();
        let fixed: Vec<usize> = (k..z.len() - k)
            .map(|i| {
                let c = [z[i - 2], z[i - 1], z[i + 1], z[i + 2]];
                table[c.iter().fold(0, |a, &b| a * 2 + b as usize)]
            })
            .collect();
        let v = avg_estimated_loss(interior, &fixed, &problem.tables).unwrap();
        assert!(best <= v + 1e-12, "trial {trial}: {best} > {v}");
    }
    // Order zero: no constant mapping does better.
    let stats = accumulate(&z, 0, &problem.tables, Padding::SkipBoundary).unwrap();
    let m0 = dude_rule(&stats)[&Vec::new()];
    let v0 = avg_estimated_loss(&z, &vec![m0; z.len()], &problem.tables).unwrap();
    for m in 0..4 {
        assert!(v0 <= avg_estimated_loss(&z, &vec![m; z.len()], &problem.tables).unwrap() + 1e-12);
    }
}

#[test]
fn choices_depend_only_on_context_center_pairs() {
    // Reversing a palindromic-context sequence keeps every (context, center)
    // multiset, so the per-context choices must agree.
    let ch = Channel::bsc(0.2).unwrap();
    let problem = Problem::new(ch.clone()).unwrap();
    let mut rng = SeededRng::new(3, Stream::Source);
    let x = random_source(&mut rng, 1500);
    let z = ch.corrupt(&x, 3).unwrap();
    let rev: Vec<u8> = z.iter().rev().copied().collect();
    let a = accumulate(&z, 1, &problem.tables, Padding::SkipBoundary).unwrap();
    let b = accumulate(&rev, 1, &problem.tables, Padding::SkipBoundary).unwrap();
    // Context (l, r) in z is (r, l) in the reversed sequence.
    let ra = dude_rule(&a);
    let rb = dude_rule(&b);
    for (key, m) in &ra {
        let flipped = vec![key[1], key[0]];
        assert_eq!(rb[&flipped], *m);
    }
}
