//! Powell's conjugate direction method: coordinate-direction start, Brent
//! derivative-free line minimization, and the standard replace-the-largest-
//! decrease direction update.

use super::line_search::{brent_line_min, Line};
use super::{CountingCost, Outcome, OptimizerSpec, TerminationReason};
use crate::cost::Purpose;

const LINE_MAX_ITER: usize = 100;

pub(crate) fn run(cost: &mut CountingCost<'_>, x0: &[f64], spec: &OptimizerSpec) -> Outcome {
    let dim = x0.len();
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut x = x0.to_vec();
    let mut fx = cost.eval(&x, Purpose::Objective)?;

    let mut iterations = 0;
    let reason = loop {
        if iterations >= spec.max_iterations {
            break TerminationReason::IterationCap;
        }
        iterations += 1;

        let f_start = fx;
        let x_start = x.clone();
        let mut biggest_drop = 0.0;
        let mut biggest_idx = 0;

        for (i, dir) in dirs.iter().enumerate() {
            let f_before = fx;
            let (t, f_after) =
                brent_line_min(cost, &x, dir, fx, 1.0, spec.powell_line_tol, LINE_MAX_ITER)?;
            if f_after < fx {
                let mut line = Line::new(cost, &x, dir);
                x = line.at(t);
                fx = f_after;
            }
            if f_before - fx > biggest_drop {
                biggest_drop = f_before - fx;
                biggest_idx = i;
            }
        }

        let decrease = f_start - fx;
        if 2.0 * decrease <= spec.tolerance * (f_start.abs() + fx.abs()) + 1e-20 {
            break TerminationReason::Converged;
        }

        // extrapolated point 2 x - x_start along the average direction
        let extrap: Vec<f64> = x
            .iter()
            .zip(&x_start)
            .map(|(xi, si)| 2.0 * xi - si)
            .collect();
        let f_extrap = cost.eval(&extrap, Purpose::Objective)?;
        if f_extrap < f_start {
            let t = 2.0 * (f_start - 2.0 * fx + f_extrap) * (f_start - fx - biggest_drop).powi(2)
                - biggest_drop * (f_start - f_extrap).powi(2);
            if t < 0.0 {
                let new_dir: Vec<f64> = x
                    .iter()
                    .zip(&x_start)
                    .map(|(xi, si)| xi - si)
                    .collect();
                let (t_min, f_min) = brent_line_min(
                    cost,
                    &x,
                    &new_dir,
                    fx,
                    1.0,
                    spec.powell_line_tol,
                    LINE_MAX_ITER,
                )?;
                if f_min < fx {
                    let mut line = Line::new(cost, &x, &new_dir);
                    x = line.at(t_min);
                    fx = f_min;
                }
                dirs.remove(biggest_idx);
                dirs.push(new_dir);
            }
        }
    };

    Ok(((x, fx), iterations, reason))
}
