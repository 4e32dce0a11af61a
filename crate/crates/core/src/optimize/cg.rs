//! Nonlinear conjugate gradient (Polak-Ribiere+) on central-difference
//! gradients with backtracking Armijo line search.

use crate::cost::Purpose;

use super::fd::counted_fd_gradient;
use super::line_search::armijo_backtracking;
use super::{CountingCost, Outcome, OptimizerSpec, TerminationReason};

const GRAD_EPS: f64 = 1e-10;

pub(crate) fn run(cost: &mut CountingCost<'_>, x0: &[f64], spec: &OptimizerSpec) -> Outcome {
    let mut x = x0.to_vec();
    let mut fx = cost.eval(&x, Purpose::Objective)?;
    let mut g = counted_fd_gradient(cost, &x, spec.fd_step)?;
    let mut dir: Vec<f64> = g.iter().map(|v| -v).collect();

    let mut iterations = 0;
    let reason = loop {
        if iterations >= spec.max_iterations {
            break TerminationReason::IterationCap;
        }
        iterations += 1;

        let g_norm_sq: f64 = g.iter().map(|v| v * v).sum();
        if g_norm_sq.sqrt() <= GRAD_EPS {
            break TerminationReason::Converged;
        }
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            // restart with steepest descent when the direction turns uphill
            dir = g.iter().map(|v| -v).collect();
        }
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();

        let Some((t, f_new)) = armijo_backtracking(cost, &x, &dir, fx, slope, 1.0)? else {
            break TerminationReason::LineSearchFailure;
        };
        let x_new: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
        let g_new = counted_fd_gradient(cost, &x_new, spec.fd_step)?;

        // Polak-Ribiere+ with automatic restart via the max(0, .) clamp
        let num: f64 = g_new.iter().zip(&g).map(|(gn, go)| gn * (gn - go)).sum();
        let beta = (num / g_norm_sq).max(0.0);
        dir = g_new
            .iter()
            .zip(&dir)
            .map(|(gn, d)| -gn + beta * d)
            .collect();

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
