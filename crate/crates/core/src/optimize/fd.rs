use crate::cost::{CostFn, Purpose};
use crate::error::Result;

use super::{CountingCost, StepResult};

/// Central-difference gradient: g_i = (f(x + h e_i) - f(x - h e_i)) / 2h.
/// Exactly 2 * dim evaluations, all tagged as gradient probes.
pub fn central_fd_gradient(f: &mut dyn CostFn, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f.eval(&probe, Purpose::GradientProbe)?;
        probe[i] = x[i] - h;
        let fm = f.eval(&probe, Purpose::GradientProbe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Same, through the counting wrapper (used by cg / l-bfgs).
pub(crate) fn counted_fd_gradient(
    f: &mut CountingCost<'_>,
    x: &[f64],
    h: f64,
) -> StepResult<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f.eval(&probe, Purpose::GradientProbe)?;
        probe[i] = x[i] - h;
        let fm = f.eval(&probe, Purpose::GradientProbe)?;
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}
