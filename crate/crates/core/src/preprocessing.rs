//! Monomial expansion and sphering (mean removal plus covariance
//! normalization) with transforms that can be re-applied out of sample.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};
use crate::signal::{eigen_ascending, outer_mean, TimeSeries, DEFAULT_TAU};

/// Polynomial degree of the monomial expansion (1, 2 or 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ExpansionSpec {
    degree: u8,
}

impl ExpansionSpec {
    pub fn new(degree: u8) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(PfaxError::Config(format!(
                "expansion degree {degree} not supported (use 1, 2 or 3)"
            )));
        }
        Ok(Self { degree })
    }

    pub fn linear() -> Self {
        Self { degree: 1 }
    }

    pub fn quadratic() -> Self {
        Self { degree: 2 }
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    /// Number of non-constant monomials of degree `1..=degree` in `dim` variables.
    pub fn output_dim(&self, dim: usize) -> usize {
        monomials(dim, self.degree).len()
    }

    /// Expands a single sample.
    pub fn expand_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        let terms = monomials(x.len(), self.degree);
        DVector::from_iterator(
            terms.len(),
            terms.iter().map(|m| m.iter().map(|&i| x[i]).product::<f64>()),
        )
    }
}

impl TryFrom<u8> for ExpansionSpec {
    type Error = PfaxError;
    fn try_from(degree: u8) -> Result<Self> {
        Self::new(degree)
    }
}

impl From<ExpansionSpec> for u8 {
    fn from(spec: ExpansionSpec) -> u8 {
        spec.degree
    }
}

/// Monomials as sorted index tuples: all degree-1 terms, then degree 2 in
/// lexicographic order `(i <= j)`, then degree 3 `(i <= j <= k)`.
fn monomials(dim: usize, degree: u8) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..dim).map(|i| vec![i]).collect();
    if degree >= 2 {
        for i in 0..dim {
            for j in i..dim {
                out.push(vec![i, j]);
            }
        }
    }
    if degree >= 3 {
        for i in 0..dim {
            for j in i..dim {
                for k in j..dim {
                    out.push(vec![i, j, k]);
                }
            }
        }
    }
    out
}

/// Applies the monomial expansion to every sample.
pub fn expand(x: &TimeSeries, spec: ExpansionSpec) -> Result<TimeSeries> {
    let terms = monomials(x.dim(), spec.degree);
    let s = x.samples();
    let out = DMatrix::from_fn(x.len(), terms.len(), |t, j| {
        terms[j].iter().map(|&i| s[(t, i)]).product::<f64>()
    });
    TimeSeries::new(out)
}

/// How [`fit_sphering_with`] treats covariance eigenvalues below the
/// redundancy threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpheringPolicy {
    /// Fail with [`PfaxError::DegenerateSignal`].
    #[default]
    Strict,
    /// Drop the offending eigenspaces; the sphered signal has fewer
    /// components than the expanded one.
    Reduce,
}

/// Stored mean and whitening matrix of a training signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpheringTransform {
    pub mean: DVector<f64>,
    /// `k x n` whitener; square and symmetric unless fitted with
    /// [`SpheringPolicy::Reduce`] on a rank-deficient signal.
    pub whitener: DMatrix<f64>,
}

impl SpheringTransform {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.whitener.nrows()
    }

    /// Sphere a single expanded sample.
    pub fn apply_vector(&self, h: &DVector<f64>) -> Result<DVector<f64>> {
        if h.len() != self.input_dim() {
            return Err(PfaxError::DimensionMismatch {
                expected: self.input_dim(),
                got: h.len(),
                context: "sphering input",
            });
        }
        Ok(&self.whitener * (h - &self.mean))
    }
}

/// Fits a sphering transform; rank-deficient covariance is an error.
pub fn fit_sphering(h: &TimeSeries) -> Result<SpheringTransform> {
    fit_sphering_with(h, SpheringPolicy::Strict)
}

pub fn fit_sphering_with(h: &TimeSeries, policy: SpheringPolicy) -> Result<SpheringTransform> {
    if h.len() <= h.dim() && policy == SpheringPolicy::Strict {
        return Err(PfaxError::InsufficientData {
            needed: h.dim() + 1,
            got: h.len(),
        });
    }
    let mean = h.mean();
    let mut centered = h.samples().clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = crate::signal::symmetrize(&outer_mean(&centered, &centered));
    let eig = eigen_ascending(&cov);
    let n = cov.nrows();
    let lambda_max = eig.values[n - 1];
    if lambda_max <= 0.0 {
        return Err(PfaxError::DegenerateSignal {
            eigenvalues: eig.values.as_slice().to_vec(),
        });
    }
    let cutoff = DEFAULT_TAU * lambda_max;
    let first_kept = eig.values.iter().position(|&l| l >= cutoff).unwrap_or(n);
    let whitener = match policy {
        SpheringPolicy::Strict => {
            if first_kept > 0 {
                return Err(PfaxError::DegenerateSignal {
                    eigenvalues: eig.values.as_slice()[..first_kept].to_vec(),
                });
            }
            // Q diag(l^-1/2) Q^T
            let mut scaled = eig.vectors.clone();
            for (j, mut col) in scaled.column_iter_mut().enumerate() {
                col /= eig.values[j].sqrt();
            }
            crate::signal::symmetrize(&(scaled * eig.vectors.transpose()))
        }
        SpheringPolicy::Reduce => {
            // Rows ordered by descending variance of the kept eigenspaces.
            let kept = n - first_kept;
            DMatrix::from_fn(kept, n, |i, j| {
                let src = n - 1 - i;
                eig.vectors[(j, src)] / eig.values[src].sqrt()
            })
        }
    };
    Ok(SpheringTransform { mean, whitener })
}

/// `z(t) = S (h(t) - mean)`.
pub fn apply_sphering(tr: &SpheringTransform, h: &TimeSeries) -> Result<TimeSeries> {
    if h.dim() != tr.input_dim() {
        return Err(PfaxError::DimensionMismatch {
            expected: tr.input_dim(),
            got: h.dim(),
            context: "sphering input",
        });
    }
    let mut centered = h.samples().clone();
    for mut row in centered.row_iter_mut() {
        row -= tr.mean.transpose();
    }
    TimeSeries::new(centered * tr.whitener.transpose())
}
