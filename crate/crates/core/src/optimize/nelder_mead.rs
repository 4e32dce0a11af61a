//! Nelder-Mead simplex with the standard coefficients
//! (reflect 1, expand 2, contract 0.5, shrink 0.5), no adaptive restarts.

use crate::cost::Purpose;

use super::{CountingCost, Outcome, OptimizerSpec, TerminationReason};

const NONZERO_DELTA: f64 = 0.05;
const ZERO_DELTA: f64 = 0.00025;

pub(crate) fn run(cost: &mut CountingCost<'_>, x0: &[f64], spec: &OptimizerSpec) -> Outcome {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        if v[i] == 0.0 {
            v[i] = ZERO_DELTA;
        } else {
            v[i] *= 1.0 + NONZERO_DELTA;
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    for v in &simplex {
        values.push(cost.eval(v, Purpose::Objective)?);
    }

    let mut iterations = 0;
    let reason = loop {
        if iterations >= spec.max_iterations {
            break TerminationReason::IterationCap;
        }
        iterations += 1;

        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let f_spread = (values[worst] - values[best]).abs();
        let x_spread = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= spec.tolerance && x_spread <= spec.tolerance {
            break TerminationReason::Converged;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }

        let point_at = |t: f64, centroid: &[f64], worst_v: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst_v)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = point_at(1.0, &centroid, &simplex[worst]);
        let f_reflected = cost.eval(&reflected, Purpose::Objective)?;

        if f_reflected < values[best] {
            let expanded = point_at(2.0, &centroid, &simplex[worst]);
            let f_expanded = cost.eval(&expanded, Purpose::Objective)?;
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let (contracted, f_contracted) = if f_reflected < values[worst] {
                let outside = point_at(0.5, &centroid, &simplex[worst]);
                let f = cost.eval(&outside, Purpose::Objective)?;
                (outside, f)
            } else {
                let inside = point_at(-0.5, &centroid, &simplex[worst]);
                let f = cost.eval(&inside, Purpose::Objective)?;
                (inside, f)
            };
            if f_contracted < values[worst].min(f_reflected) {
                simplex[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let best_v = simplex[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for (x, b) in simplex[i].iter_mut().zip(&best_v) {
                        *x = b + 0.5 * (*x - b);
                    }
                    let v = simplex[i].clone();
                    values[i] = cost.eval(&v, Purpose::Objective)?;
                }
            }
        }
    };

    let best_idx = (0..=dim)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    Ok(((simplex[best_idx].clone(), values[best_idx]), iterations, reason))
}

#[cfg(test)]
mod tests {
    use super::super::{minimize, OptimizerKind, OptimizerSpec};
    use crate::cost::FnCost;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn converges_on_quadratic_bowl() {
        let spec = OptimizerSpec::new(OptimizerKind::NelderMead);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = minimize(
            &mut FnCost(|x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2)),
            &[0.0, 0.0],
            &spec,
            &mut rng,
        )
        .unwrap();
        assert!(res.best_objective <= 1e-8);
        assert!((res.best_params[0] - 1.0).abs() <= 1e-3);
        assert!((res.best_params[1] + 2.0).abs() <= 1e-3);
        assert!(res.converged);
    }
}
