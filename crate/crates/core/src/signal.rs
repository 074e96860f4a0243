//! Signal containers and the linear-algebra helpers shared by every fit:
//! time-history stacking, empirical moments, block-diagonal lifting and
//! eigenvalue-thresholded pseudo-inversion.
//!
//! Time runs along rows: a [`TimeSeries`] with `len` steps and `dim`
//! components is a `len x dim` matrix. Averages use population
//! normalization (divide by the number of averaged time points).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{PfaxError, Result};

/// Relative eigenvalue threshold used for pseudo-inversion and sphering.
pub const DEFAULT_TAU: f64 = 1e-7;

/// Equidistant multivariate samples, one row per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: DMatrix<f64>,
}

impl TimeSeries {
    pub fn new(samples: DMatrix<f64>) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(PfaxError::InsufficientData {
                needed: 1,
                got: samples.nrows(),
            });
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            // column-major position -> (row, col)
            let row = pos % samples.nrows();
            return Err(PfaxError::Contract(format!(
                "non-finite sample at time {row}"
            )));
        }
        Ok(Self { samples })
    }

    /// Build from per-time-step rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(PfaxError::DimensionMismatch {
                expected: dim,
                got: rows[bad].len(),
                context: "time series row",
            });
        }
        let samples = DMatrix::from_fn(rows.len(), dim, |t, j| rows[t][j]);
        Self::new(samples)
    }

    /// Scalar series from a slice.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(values.len(), 1, values))
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn into_samples(self) -> DMatrix<f64> {
        self.samples
    }

    /// Sample at time `t` as a column vector.
    pub fn at(&self, t: usize) -> DVector<f64> {
        self.samples.row(t).transpose()
    }

    /// Contiguous sub-range of time steps `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(PfaxError::Range {
                index: end,
                reason: format!("slice [{start}, {end}) of series with {} steps", self.len()),
            });
        }
        Ok(Self {
            samples: self.samples.rows(start, end - start).into_owned(),
        })
    }

    pub fn mean(&self) -> DVector<f64> {
        self.samples.row_mean().transpose()
    }
}

/// Prediction order and step spacing of a history window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryConfig {
    pub p: usize,
    pub delta: usize,
}

impl HistoryConfig {
    pub fn new(p: usize, delta: usize) -> Result<Self> {
        if p == 0 || delta == 0 {
            return Err(PfaxError::Config(format!(
                "history order and spacing must be positive (p={p}, delta={delta})"
            )));
        }
        Ok(Self { p, delta })
    }

    /// Unit spacing.
    pub fn order(p: usize) -> Result<Self> {
        Self::new(p, 1)
    }

    /// First time index with a complete history.
    pub fn first_valid(&self) -> usize {
        self.p * self.delta
    }
}

/// Stacks `z(t-delta), z(t-2 delta), ..., z(t-p delta)` into one vector.
///
/// `t` may exceed the last sample index as long as every referenced
/// sample exists, so `history_vector(z, cfg, len)` is the history used to
/// predict one step past the end of the series.
pub fn history_vector(z: &TimeSeries, cfg: HistoryConfig, t: usize) -> Result<DVector<f64>> {
    if t < cfg.first_valid() {
        return Err(PfaxError::Range {
            index: t,
            reason: format!("history of order {} needs t >= {}", cfg.p, cfg.first_valid()),
        });
    }
    if t - cfg.delta >= z.len() {
        return Err(PfaxError::Range {
            index: t,
            reason: format!("references sample {} of a {}-step series", t - cfg.delta, z.len()),
        });
    }
    let n = z.dim();
    let mut out = DVector::zeros(n * cfg.p);
    for i in 1..=cfg.p {
        let src = z.samples.row(t - i * cfg.delta);
        out.rows_mut((i - 1) * n, n).tr_copy_from(&src);
    }
    Ok(out)
}

/// Batch form of [`history_vector`] for `t` in `[p*delta, len)`.
pub fn history_series(z: &TimeSeries, cfg: HistoryConfig) -> Result<TimeSeries> {
    let start = cfg.first_valid();
    if z.len() <= start {
        return Err(PfaxError::InsufficientData {
            needed: start + 1,
            got: z.len(),
        });
    }
    Ok(TimeSeries {
        samples: history_rows(z.samples(), cfg, start, z.len()),
    })
}

/// History rows for `t` in `[start, end)`; `end` may be `len + delta`.
pub(crate) fn history_rows(
    z: &DMatrix<f64>,
    cfg: HistoryConfig,
    start: usize,
    end: usize,
) -> DMatrix<f64> {
    debug_assert!(start >= cfg.first_valid() && end - cfg.delta <= z.nrows());
    let n = z.ncols();
    let mut out = DMatrix::zeros(end - start, n * cfg.p);
    for i in 1..=cfg.p {
        let lag = i * cfg.delta;
        out.view_mut((0, (i - 1) * n), (end - start, n))
            .copy_from(&z.rows(start - lag, end - start));
    }
    out
}

/// Empirical second moment `<a b^T>` with its sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub value: DMatrix<f64>,
    pub count: usize,
}

/// `<a(t) b(t)^T>` over the common time steps of two aligned series.
pub fn average_outer(a: &TimeSeries, b: &TimeSeries) -> Result<MomentMatrix> {
    if a.len() != b.len() {
        return Err(PfaxError::Alignment(format!(
            "series cover {} and {} time steps",
            a.len(),
            b.len()
        )));
    }
    Ok(MomentMatrix {
        value: outer_mean(a.samples(), b.samples()),
        count: a.len(),
    })
}

/// `(1/len) * a^T b` for row-per-time matrices of equal length.
pub(crate) fn outer_mean(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(a.nrows(), b.nrows());
    a.tr_mul(b) / a.nrows() as f64
}

/// `I_p (x) M`: `p` copies of `m` along the block diagonal.
pub fn block_diag_lift(m: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(r * p, c * p);
    for i in 0..p {
        out.view_mut((i * r, i * c), (r, c)).copy_from(m);
    }
    out
}

/// Pseudo-inverse of a symmetric PSD matrix together with its retained rank.
#[derive(Debug, Clone)]
pub struct ThresholdedInverse {
    pub inverse: DMatrix<f64>,
    pub rank: usize,
    /// Eigenvalues of the input, ascending.
    pub eigenvalues: Vec<f64>,
}

/// Inverts `m` on the eigenspaces whose eigenvalue is at least
/// `tau * lambda_max`; the remaining eigenspaces are projected away.
pub fn thresholded_inverse(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    thresholded_inverse_full(m, tau).map(|t| t.inverse)
}

pub fn thresholded_inverse_full(m: &DMatrix<f64>, tau: f64) -> Result<ThresholdedInverse> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(PfaxError::Config(format!("threshold tau={tau} outside (0, 1)")));
    }
    let sym = checked_symmetric(m, "thresholded_inverse")?;
    let n = sym.nrows();
    if n == 0 {
        return Ok(ThresholdedInverse {
            inverse: sym,
            rank: 0,
            eigenvalues: Vec::new(),
        });
    }
    let eig = eigen_ascending(&sym);
    let lambda_max = eig.values[n - 1];
    let cutoff = tau * lambda_max;
    let mut inverse = DMatrix::zeros(n, n);
    let mut rank = 0;
    if lambda_max > 0.0 {
        for (i, &lambda) in eig.values.iter().enumerate() {
            if lambda >= cutoff {
                let q = eig.vectors.column(i);
                inverse += (q * q.transpose()) / lambda;
                rank += 1;
            }
        }
    }
    Ok(ThresholdedInverse {
        inverse,
        rank,
        eigenvalues: eig.values.as_slice().to_vec(),
    })
}

/// Returns `(m + m^T) / 2` after checking `m` is symmetric to round-off.
pub(crate) fn checked_symmetric(m: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(PfaxError::Contract(format!(
            "{context}: expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-9 * scale {
        return Err(PfaxError::Contract(format!(
            "{context}: matrix is not symmetric (max |M - M^T| = {asym:e})"
        )));
    }
    Ok(symmetrize(m))
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

/// Eigendecomposition of a symmetric matrix with eigenvalues ascending and
/// each eigenvector's first non-negligible coordinate made positive.
pub fn eigen_ascending(m: &DMatrix<f64>) -> Eigen {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Eigen { values, vectors }
}

/// Flips `v` so its first coordinate above round-off level is positive.
pub fn normalize_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}
