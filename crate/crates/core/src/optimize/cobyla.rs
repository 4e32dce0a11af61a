//! Linear-approximation trust-region method in the COBYLA family,
//! specialized to the unconstrained case: fit a linear model of the
//! objective on a coordinate simplex of radius rho, step against the model
//! gradient within the trust region, shrink rho on failure.
//!
//! Iterations are counted per objective evaluation so the benchmark's
//! fixed-budget convention (cap 1000, zero-variance nfev rows) holds.

use crate::cost::Purpose;

use super::{CountingCost, Outcome, OptimizerSpec, Stop, TerminationReason};

pub(crate) fn run(cost: &mut CountingCost<'_>, x0: &[f64], spec: &OptimizerSpec) -> Outcome {
    let dim = x0.len();
    let budget = spec.max_iterations;
    let mut x = x0.to_vec();
    let mut rho = spec.cobyla_rho_start;

    let mut evals = 0usize;
    let tracked_eval = |cost: &mut CountingCost<'_>, point: &[f64], evals: &mut usize| {
        if *evals >= budget {
            return Err(Stop::EvalCap);
        }
        *evals += 1;
        cost.eval(point, Purpose::Objective)
    };

    let capped = |x: Vec<f64>, fx: f64, evals: usize| {
        Ok(((x, fx), evals, TerminationReason::IterationCap))
    };

    let mut fx = match tracked_eval(cost, &x, &mut evals) {
        Ok(v) => v,
        Err(Stop::EvalCap) => return capped(x, f64::INFINITY, evals),
        Err(e) => return Err(e),
    };

    let mut grad = vec![0.0; dim];

    loop {
        if rho < spec.cobyla_rho_end {
            return Ok(((x, fx), evals, TerminationReason::Converged));
        }
        // linear model gradient from coordinate offsets of radius rho
        let mut probe = x.clone();
        for i in 0..dim {
            probe[i] = x[i] + rho;
            let fi = match tracked_eval(cost, &probe, &mut evals) {
                Ok(v) => v,
                Err(Stop::EvalCap) => return capped(x, fx, evals),
                Err(e) => return Err(e),
            };
            probe[i] = x[i];
            grad[i] = (fi - fx) / rho;
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= spec.tolerance {
            rho *= 0.5;
            continue;
        }
        let candidate: Vec<f64> = x
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - rho * gi / gnorm)
            .collect();
        let f_cand = match tracked_eval(cost, &candidate, &mut evals) {
            Ok(v) => v,
            Err(Stop::EvalCap) => return capped(x, fx, evals),
            Err(e) => return Err(e),
        };
        // require a fraction of the model-predicted reduction
        if f_cand < fx - 0.1 * rho * gnorm {
            x = candidate;
            fx = f_cand;
        } else {
            rho *= 0.5;
        }
    }
}
