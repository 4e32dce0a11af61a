//! Target qumode states: the two Gaussian-envelope families, the fixed
//! non-Gaussian 10-level vector, and user-supplied amplitude vectors.

use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CVector, FockCutoff};

/// Declarative description of a target state.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TargetSpec {
    /// Amplitude envelope exp(-(n - mean)^2 / (2 std^2)), L2-normalized.
    LocalGaussian { cutoff: usize },
    Gaussian { mean: f64, std: f64, cutoff: usize },
    NonGaussianPreset { cutoff: usize },
    Explicit { re: Vec<f64>, im: Vec<f64>, cutoff: usize },
}

impl TargetSpec {
    pub fn cutoff(&self) -> usize {
        match self {
            TargetSpec::LocalGaussian { cutoff }
            | TargetSpec::Gaussian { cutoff, .. }
            | TargetSpec::NonGaussianPreset { cutoff }
            | TargetSpec::Explicit { cutoff, .. } => *cutoff,
        }
    }

    pub fn resolve(&self) -> Result<TargetState> {
        match self {
            TargetSpec::LocalGaussian { cutoff } => {
                make_gaussian_target(0.0, 0.75, FockCutoff::new(*cutoff)?)
            }
            TargetSpec::Gaussian { mean, std, cutoff } => {
                make_gaussian_target(*mean, *std, FockCutoff::new(*cutoff)?)
            }
            TargetSpec::NonGaussianPreset { cutoff } => {
                make_non_gaussian_preset(FockCutoff::new(*cutoff)?)
            }
            TargetSpec::Explicit { re, im, cutoff } => {
                if re.len() != im.len() {
                    return Err(Error::InvalidTarget(
                        "re/im length mismatch in explicit target".into(),
                    ));
                }
                let values: Vec<Complex64> = re
                    .iter()
                    .zip(im)
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect();
                load_explicit_target(&values, FockCutoff::new(*cutoff)?)
            }
        }
    }

    /// Short label used in table rows and file names.
    pub fn label(&self) -> String {
        match self {
            TargetSpec::LocalGaussian { .. } => "local-gaussian".into(),
            TargetSpec::Gaussian { mean, std, .. } => format!("gaussian-m{mean}-s{std}"),
            TargetSpec::NonGaussianPreset { .. } => "non-gaussian".into(),
            TargetSpec::Explicit { .. } => "explicit".into(),
        }
    }
}

/// A resolved, unit-norm amplitude vector over the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    amplitudes: CVector,
}

impl TargetState {
    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn n_levels(&self) -> usize {
        self.amplitudes.len()
    }

    /// Projector |phi><phi| as a density matrix.
    pub fn projector(&self) -> crate::linalg::CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidTarget("zero or non-finite amplitude vector".into()));
        }
        Ok(TargetState {
            amplitudes: v.unscale(norm),
        })
    }
}

pub fn make_gaussian_target(mean: f64, std: f64, cutoff: FockCutoff) -> Result<TargetState> {
    if std <= 0.0 || !std.is_finite() {
        return Err(Error::InvalidTarget(format!("std must be > 0, got {std}")));
    }
    let n = cutoff.n_levels();
    let v = DVector::from_fn(n, |i, _| {
        let d = i as f64 - mean;
        Complex64::new((-d * d / (2.0 * std * std)).exp(), 0.0)
    });
    TargetState::normalized(v)
}

/// The fixed 10-level non-Gaussian amplitude vector, renormalized to exact
/// unit norm (the printed 3-digit values square-sum to ~1.0009).
pub const NON_GAUSSIAN_PRESET: [f64; 10] =
    [0.0, 0.209, 0.417, 0.209, 0.0, 0.417, 0.626, 0.417, 0.0, 0.0];

pub fn make_non_gaussian_preset(cutoff: FockCutoff) -> Result<TargetState> {
    if cutoff.n_levels() != 10 {
        return Err(Error::PresetCutoff(cutoff.n_levels()));
    }
    let v = DVector::from_iterator(
        10,
        NON_GAUSSIAN_PRESET.iter().map(|&x| Complex64::new(x, 0.0)),
    );
    TargetState::normalized(v)
}

pub fn load_explicit_target(values: &[Complex64], cutoff: FockCutoff) -> Result<TargetState> {
    if values.len() != cutoff.n_levels() {
        return Err(Error::DimensionMismatch {
            expected: cutoff.n_levels(),
            got: values.len(),
        });
    }
    TargetState::normalized(DVector::from_column_slice(values))
}

/// Reads an explicit target from a plain-text file: one "re im" pair per
/// line, `#` lines ignored.
pub fn load_target_file(path: &Path, cutoff: FockCutoff) -> Result<TargetState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading target file {}", path.display()), e))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| Error::Parse {
                context: format!("{}:{}", path.display(), lineno + 1),
                message: "expected \"re im\" pair".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                context: format!("{}:{}", path.display(), lineno + 1),
                message: format!("{e}"),
            })
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        values.push(Complex64::new(re, im));
    }
    load_explicit_target(&values, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cut10() -> FockCutoff {
        FockCutoff::new(10).unwrap()
    }

    #[test]
    fn flat_envelope_limit() {
        let t = make_gaussian_target(0.0, 1e6, cut10()).unwrap();
        let expected = 1.0 / 10.0_f64.sqrt();
        for n in 0..10 {
            assert_abs_diff_eq!(t.amplitudes()[n].re, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn gaussian_peak_and_symmetry() {
        let t = make_gaussian_target(5.0, 1.0, cut10()).unwrap();
        let amps: Vec<f64> = t.amplitudes().iter().map(|z| z.re).collect();
        let peak = amps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 5);
        assert_abs_diff_eq!(amps[4], amps[6], epsilon = 1e-12);
        assert_abs_diff_eq!(amps[3], amps[7], epsilon = 1e-12);
    }

    // Golden fixture computed independently from the envelope formula
    // exp(-n^2 / (2 * 0.75^2)) followed by L2 normalization.
    const LOCAL_GAUSSIAN_GOLDEN: [f64; 10] = [
        9.245677297844217e-01,
        3.801011571207040e-01,
        2.641074021052686e-02,
        3.101579203073416e-04,
        6.156106148270043e-07,
        2.065143546145479e-10,
        1.170887879134009e-14,
        1.122021805587922e-19,
        1.817222917235012e-25,
        4.974346503788309e-32,
    ];

    #[test]
    fn local_gaussian_matches_golden_fixture() {
        let t = make_gaussian_target(0.0, 0.75, cut10()).unwrap();
        for n in 0..10 {
            assert_abs_diff_eq!(t.amplitudes()[n].re, LOCAL_GAUSSIAN_GOLDEN[n], epsilon = 1e-14);
            assert_eq!(t.amplitudes()[n].im, 0.0);
        }
    }

    #[test]
    fn gaussian_rejects_bad_std() {
        assert!(make_gaussian_target(0.0, 0.0, cut10()).is_err());
        assert!(make_gaussian_target(0.0, -1.0, cut10()).is_err());
    }

    #[test]
    fn preset_values_and_zeros() {
        let t = make_non_gaussian_preset(cut10()).unwrap();
        let norm_raw: f64 = NON_GAUSSIAN_PRESET.iter().map(|x| x * x).sum::<f64>().sqrt();
        for n in 0..10 {
            assert_abs_diff_eq!(
                t.amplitudes()[n].re,
                NON_GAUSSIAN_PRESET[n] / norm_raw,
                epsilon = 1e-15
            );
        }
        assert_eq!(t.amplitudes()[0], Complex64::ZERO);
        assert_eq!(t.amplitudes()[8], Complex64::ZERO);
        assert_eq!(t.amplitudes()[9], Complex64::ZERO);
        let sq: f64 = t.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(sq, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn preset_needs_cutoff_ten() {
        assert!(matches!(
            make_non_gaussian_preset(FockCutoff::new(8).unwrap()),
            Err(Error::PresetCutoff(8))
        ));
    }

    #[test]
    fn explicit_targets() {
        let mut v = vec![Complex64::ZERO; 10];
        v[0] = Complex64::ONE;
        let vac = load_explicit_target(&v, cut10()).unwrap();
        assert_abs_diff_eq!(vac.amplitudes()[0].re, 1.0, epsilon = 1e-15);

        v[0] = Complex64::new(2.0, 0.0);
        let vac2 = load_explicit_target(&v, cut10()).unwrap();
        assert_eq!(vac, vac2);

        v[0] = Complex64::ONE;
        v[1] = Complex64::ONE;
        let sup = load_explicit_target(&v, cut10()).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(sup.amplitudes()[0].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(sup.amplitudes()[1].re, s, epsilon = 1e-12);
    }

    #[test]
    fn explicit_rejects_zero_and_mismatch() {
        let zeros = vec![Complex64::ZERO; 10];
        assert!(load_explicit_target(&zeros, cut10()).is_err());
        let short = vec![Complex64::ONE; 3];
        assert!(load_explicit_target(&short, cut10()).is_err());
    }

    #[test]
    fn every_family_unit_norm_and_deterministic() {
        let specs = [
            TargetSpec::LocalGaussian { cutoff: 10 },
            TargetSpec::Gaussian { mean: 5.0, std: 1.0, cutoff: 10 },
            TargetSpec::NonGaussianPreset { cutoff: 10 },
        ];
        for spec in &specs {
            let a = spec.resolve().unwrap();
            let b = spec.resolve().unwrap();
            assert!((a.amplitudes().norm() - 1.0).abs() <= 1e-12);
            assert_eq!(a, b, "resolution must be bit-identical");
        }
    }

    #[test]
    fn target_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("target.txt");
        let mut text = String::from("# comment line\n");
        for n in 0..10 {
            text.push_str(&format!("{} {}\n", n as f64, 0.5));
        }
        std::fs::write(&path, text).unwrap();
        let t = load_target_file(&path, cut10()).unwrap();
        assert!((t.amplitudes().norm() - 1.0).abs() <= 1e-12);
        assert!(t.amplitudes()[3].im > 0.0);
    }
}
