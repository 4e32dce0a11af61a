//! Simultaneous perturbation stochastic approximation: two evaluations per
//! iteration regardless of dimension, Rademacher perturbation directions,
//! decaying gain schedules.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cost::{CostFn, Purpose};
use crate::error::Result;

use super::{CountingCost, Outcome, OptimizerSpec, SpsaGains, TerminationReason};

fn rademacher(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// One SPSA update x -> x - a_k * ghat, where
/// ghat_i = (f(x + c_k d) - f(x - c_k d)) / (2 c_k d_i). Returns the new
/// iterate and the pair average (an O(c^2) estimate of f(x)).
pub fn spsa_step(
    f: &mut dyn CostFn,
    x: &[f64],
    k: usize,
    gains: &SpsaGains,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64)> {
    let a = gains.a.unwrap_or(1.0);
    let ck = gains.c / ((k + 1) as f64).powf(gains.gamma_exp);
    let ak = a / ((k + 1) as f64 + gains.big_a).powf(gains.alpha_exp);
    let delta = rademacher(rng, x.len());
    let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
    let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
    let fp = f.eval(&plus, Purpose::GradientProbe)?;
    let fm = f.eval(&minus, Purpose::GradientProbe)?;
    let diff = (fp - fm) / (2.0 * ck);
    let step = (ak * diff.abs()).min(gains.step_clamp);
    let next = x
        .iter()
        .zip(&delta)
        .map(|(v, d)| v - step * (diff / d).signum())
        .collect();
    Ok((next, 0.5 * (fp + fm)))
}

pub(crate) fn run(
    cost: &mut CountingCost<'_>,
    x0: &[f64],
    spec: &OptimizerSpec,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let gains = spec.spsa;
    let mut a = gains.a;
    let mut x = x0.to_vec();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for k in 0..spec.max_iterations {
        let ck = gains.c / ((k + 1) as f64).powf(gains.gamma_exp);
        let delta = rademacher(rng, x.len());
        let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
        let fp = cost.eval(&plus, Purpose::GradientProbe)?;
        let fm = cost.eval(&minus, Purpose::GradientProbe)?;
        let diff = (fp - fm) / (2.0 * ck);
        if a.is_none() {
            // calibrate so the first step moves each coordinate by about
            // target_first_step; the floor keeps a plateau start (tiny first
            // difference) from inflating the gain catastrophically
            let g0 = diff.abs().max(0.05);
            a = Some(gains.target_first_step * (1.0 + gains.big_a).powf(gains.alpha_exp) / g0);
        }
        let ak = a.unwrap() / ((k + 1) as f64 + gains.big_a).powf(gains.alpha_exp);
        let pair_avg = 0.5 * (fp + fm);
        if best.as_ref().map_or(true, |(_, b)| pair_avg < *b) {
            best = Some((x.clone(), pair_avg));
        }
        // every coordinate moves by ak |diff|; clamp it so one noisy
        // difference cannot throw the iterate out of the trust region
        let step = (ak * diff.abs()).min(gains.step_clamp);
        for (v, d) in x.iter_mut().zip(&delta) {
            *v -= step * (diff / d).signum();
        }
    }
    let final_iterate = best.unwrap_or_else(|| (x, f64::INFINITY));
    Ok((final_iterate, spec.max_iterations, TerminationReason::IterationCap))
}
