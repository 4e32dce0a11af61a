use crate::error::Result;

/// Why an objective call was made; gradient probes are accounted separately
/// from plain objective evaluations in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Objective,
    GradientProbe,
}

impl std::fmt::Display for Purpose {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Purpose::Objective => write!(f, "objective"),
            Purpose::GradientProbe => write!(f, "gradient_probe"),
        }
    }
}

/// Black-box cost function over real parameter vectors.
pub trait CostFn {
    fn eval(&mut self, x: &[f64], purpose: Purpose) -> Result<f64>;
}

/// Adapter for plain closures (test functions, calibration objectives).
pub struct FnCost<F: FnMut(&[f64]) -> f64>(pub F);

impl<F: FnMut(&[f64]) -> f64> CostFn for FnCost<F> {
    fn eval(&mut self, x: &[f64], _purpose: Purpose) -> Result<f64> {
        Ok((self.0)(x))
    }
}
