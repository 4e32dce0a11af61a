//! Limited-memory BFGS (two-loop recursion, default memory 10) on
//! central-difference gradients, sharing the Armijo backtracking search
//! with the conjugate-gradient route.

use std::collections::VecDeque;

use crate::cost::Purpose;

use super::fd::counted_fd_gradient;
use super::line_search::armijo_backtracking;
use super::{CountingCost, Outcome, OptimizerSpec, TerminationReason};

const GRAD_EPS: f64 = 1e-10;
const CURVATURE_EPS: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn run(cost: &mut CountingCost<'_>, x0: &[f64], spec: &OptimizerSpec) -> Outcome {
    let mut x = x0.to_vec();
    let mut fx = cost.eval(&x, Purpose::Objective)?;
    let mut g = counted_fd_gradient(cost, &x, spec.fd_step)?;

    // (s, y, 1/y.s) pairs, newest at the back
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    let mut iterations = 0;
    let reason = loop {
        if iterations >= spec.max_iterations {
            break TerminationReason::IterationCap;
        }
        iterations += 1;

        if g.iter().map(|v| v * v).sum::<f64>().sqrt() <= GRAD_EPS {
            break TerminationReason::Converged;
        }

        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= alpha * yi;
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y).max(CURVATURE_EPS);
            for qi in q.iter_mut() {
                *qi *= gamma;
            }
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (alpha - beta) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();

        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }

        let Some((t, f_new)) = armijo_backtracking(cost, &x, &dir, fx, slope, 1.0)? else {
            break TerminationReason::LineSearchFailure;
        };
        let x_new: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
        let g_new = counted_fd_gradient(cost, &x_new, spec.fd_step)?;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > CURVATURE_EPS {
            if history.len() == spec.lbfgs_memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let decrease = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if decrease <= spec.tolerance * (fx.abs() + spec.tolerance) {
            break TerminationReason::Converged;
        }
    };

    Ok(((x, fx), iterations, reason))
}
