//! Predictable feature analysis: least-squares autoregressive fits on the
//! sphered signal, the one-step predictor `W`, the history propagator `V`,
//! and feature selection by PCA on (iterated) prediction residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};
use crate::sfa::check_sphered;
use crate::signal::{
    block_diag_lift, eigen_ascending, history_rows, outer_mean, symmetrize,
    thresholded_inverse_full, HistoryConfig, TimeSeries, DEFAULT_TAU,
};

/// Fitted PFA model on a sphered signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaModel {
    /// `n x r` extraction matrix with orthonormal columns.
    pub extraction: DMatrix<f64>,
    /// `r x rp` predictor refitted on the extracted signal.
    pub predictor: DMatrix<f64>,
    pub p: usize,
    pub k: usize,
    /// All `n` eigenvalues of the selection matrix, ascending.
    pub residual_eigenvalues: Vec<f64>,
    /// Trace of each iterated-residual term `i = 0..=k`.
    pub term_errors: Vec<f64>,
}

impl PfaModel {
    pub fn r(&self) -> usize {
        self.extraction.ncols()
    }
}

/// One-step predictor `W` of `z(t)` from `zeta(t)` and propagator `V` of
/// `zeta(t+1)` from `zeta(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorPair {
    /// `n x np`
    pub w: DMatrix<f64>,
    /// `np x np`
    pub v: DMatrix<f64>,
}

pub(crate) fn check_orthonormal(a: &DMatrix<f64>) -> Result<()> {
    let r = a.ncols();
    let err = (a.tr_mul(a) - DMatrix::identity(r, r)).amax();
    if err > 1e-6 {
        return Err(PfaxError::Contract(format!(
            "extraction matrix columns are not orthonormal (|A^T A - I| = {err:e})"
        )));
    }
    Ok(())
}

/// Least-squares `B` for `A_r^T z(t) ~ B lift(A_r)^T zeta(t)`.
///
/// `z` and `zeta` must be aligned row by row (row `j` of `zeta` is the
/// history of row `j` of `z`).
pub fn fit_regression(
    extraction: &DMatrix<f64>,
    z: &TimeSeries,
    zeta: &TimeSeries,
) -> Result<DMatrix<f64>> {
    let p = history_order(extraction, z, zeta)?;
    if z.len() != zeta.len() {
        return Err(PfaxError::Alignment(format!(
            "z has {} steps, zeta has {}",
            z.len(),
            zeta.len()
        )));
    }
    let z_zeta = outer_mean(z.samples(), zeta.samples());
    let zeta_zeta = symmetrize(&outer_mean(zeta.samples(), zeta.samples()));
    regression_from_moments(extraction, p, &z_zeta, &zeta_zeta)
}

fn history_order(extraction: &DMatrix<f64>, z: &TimeSeries, zeta: &TimeSeries) -> Result<usize> {
    check_orthonormal(extraction)?;
    let n = z.dim();
    if extraction.nrows() != n {
        return Err(PfaxError::DimensionMismatch {
            expected: n,
            got: extraction.nrows(),
            context: "extraction rows vs signal dimension",
        });
    }
    if !zeta.dim().is_multiple_of(n) || zeta.dim() == 0 {
        return Err(PfaxError::DimensionMismatch {
            expected: n,
            got: zeta.dim(),
            context: "history dimension must be a multiple of the signal dimension",
        });
    }
    Ok(zeta.dim() / n)
}

/// `A_r^T C_z_zeta lift(A_r) (lift(A_r)^T C_zeta_zeta lift(A_r))^+`.
pub(crate) fn regression_from_moments(
    extraction: &DMatrix<f64>,
    p: usize,
    z_zeta: &DMatrix<f64>,
    zeta_zeta: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let lifted = block_diag_lift(extraction, p);
    let gram = symmetrize(&(lifted.tr_mul(zeta_zeta) * &lifted));
    let inv = thresholded_inverse_full(&gram, DEFAULT_TAU)?;
    if inv.rank == 0 {
        return Err(PfaxError::Degenerate(
            "history Gram matrix has no eigenvalue above threshold".into(),
        ));
    }
    Ok(extraction.tr_mul(z_zeta) * lifted * inv.inverse)
}

/// Row-aligned training data: `z(t)` and `mu(t)` for `t` in `[start, len)`,
/// `zeta(t)` for `t` in `[start, len]` so that `zeta(t+1)` exists for every
/// averaged `t`.
#[derive(Debug, Clone)]
pub(crate) struct Aligned {
    pub z: DMatrix<f64>,
    pub zeta_ext: DMatrix<f64>,
    pub mu: Option<DMatrix<f64>>,
    pub p: usize,
}

impl Aligned {
    pub fn new(z: &TimeSeries, p: usize, supplementary: Option<(&TimeSeries, usize)>) -> Result<Self> {
        let zcfg = HistoryConfig::order(p)?;
        let start = match supplementary {
            Some((u, q)) => {
                HistoryConfig::order(q)?;
                if u.len() != z.len() {
                    return Err(PfaxError::Alignment(format!(
                        "main signal has {} steps, supplementary has {}",
                        z.len(),
                        u.len()
                    )));
                }
                p.max(q)
            }
            None => p,
        };
        let len = z.len();
        if len < start + 2 {
            return Err(PfaxError::InsufficientData {
                needed: start + 2,
                got: len,
            });
        }
        let zs = z.samples();
        let mu = match supplementary {
            Some((u, q)) => Some(history_rows(u.samples(), HistoryConfig::order(q)?, start, len)),
            None => None,
        };
        Ok(Self {
            z: zs.rows(start, len - start).into_owned(),
            zeta_ext: history_rows(zs, zcfg, start, len + 1),
            mu,
            p,
        })
    }

    pub fn count(&self) -> usize {
        self.z.nrows()
    }

    /// `zeta(t)` rows for the averaged range.
    pub fn zeta(&self) -> DMatrix<f64> {
        self.zeta_ext.rows(0, self.count()).into_owned()
    }

    /// `zeta(t+1)` rows for the averaged range.
    pub fn zeta_next(&self) -> DMatrix<f64> {
        self.zeta_ext.rows(1, self.count()).into_owned()
    }
}

/// Computes `W` and `V` on a sphered (or any) signal with history order `p`.
pub fn compute_predictors(z: &TimeSeries, p: usize) -> Result<PredictorPair> {
    let data = Aligned::new(z, p, None)?;
    predictors_from(&data)
}

pub(crate) fn predictors_from(data: &Aligned) -> Result<PredictorPair> {
    let zeta = data.zeta();
    let zeta_zeta = symmetrize(&outer_mean(&zeta, &zeta));
    let inv = thresholded_inverse_full(&zeta_zeta, DEFAULT_TAU)?;
    if inv.rank == 0 {
        return Err(PfaxError::Degenerate("<zeta zeta^T> is numerically zero".into()));
    }
    let w = outer_mean(&data.z, &zeta) * &inv.inverse;
    let v = outer_mean(&data.zeta_next(), &zeta) * &inv.inverse;
    Ok(PredictorPair { w, v })
}

/// `W V^i zeta(t-i)`, the `i`-step iterated prediction of `z(t)`.
pub fn iterated_prediction(pair: &PredictorPair, i: usize, zeta: &DVector<f64>) -> DVector<f64> {
    let mut s = zeta.clone();
    for _ in 0..i {
        s = &pair.v * s;
    }
    &pair.w * s
}

/// Sum over `i = 0..=k` of the residual moments of the iterated predictor,
/// plus the trace of each term. Term `i` averages over its own valid range
/// (`t - i` must still have a complete history).
///
/// `u0` is `None` for plain PFA; with supplementary data the prediction
/// adds `I^T sum_j V^j I U0 mu(t-j)`.
pub(crate) fn selection_matrix(
    data: &Aligned,
    w: &DMatrix<f64>,
    v: &DMatrix<f64>,
    u0: Option<&DMatrix<f64>>,
    k: usize,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let count = data.count();
    if k + 1 >= count {
        return Err(PfaxError::InsufficientData {
            needed: k + 2 + data.p,
            got: count + data.p,
        });
    }
    let n = data.z.ncols();
    let np = w.ncols();
    let vt = v.transpose();
    let wt = w.transpose();
    // rows: V^i zeta(t - i) for t in [start + i, len)
    let mut propagated = data.zeta();
    // rows: sum_{j<=i} V^j I U0 mu(t - j); I U0 places U0 mu in the top block
    let mut forced: Option<DMatrix<f64>> = None;
    let lifted_u0t = match (u0, &data.mu) {
        (Some(u0), Some(_)) => {
            let mut m = DMatrix::zeros(u0.ncols(), np);
            m.view_mut((0, 0), (u0.ncols(), n)).copy_from(&u0.transpose());
            Some(m)
        }
        _ => None,
    };
    let mut total = DMatrix::zeros(n, n);
    let mut traces = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let rows = count - i;
        if i > 0 {
            propagated = propagated.rows(0, rows).into_owned() * &vt;
        }
        let mut prediction = &propagated * &wt;
        if let (Some(lu0t), Some(mu)) = (&lifted_u0t, &data.mu) {
            let injected = mu.rows(i, rows) * lu0t;
            let acc = match forced.take() {
                None => injected,
                Some(prev) => injected + prev.rows(0, rows) * &vt,
            };
            prediction += acc.columns(0, n);
            forced = Some(acc);
        }
        let residual = data.z.rows(i, rows) - prediction;
        let term = outer_mean(&residual, &residual);
        traces.push(term.trace());
        total += term;
    }
    Ok((symmetrize(&total), traces))
}

/// Fits PFA on a sphered signal: selection by residual PCA with iterated
/// prediction depth `k`, then a refit of `B` on the extracted directions.
pub fn fit_pfa(z: &TimeSeries, p: usize, r: usize, k: usize) -> Result<PfaModel> {
    let n = z.dim();
    if r == 0 || r > n {
        return Err(PfaxError::Config(format!("r = {r} must lie in 1..={n}")));
    }
    if z.len() <= p + k + 1 {
        return Err(PfaxError::InsufficientData {
            needed: p + k + 2,
            got: z.len(),
        });
    }
    check_sphered(z)?;
    let data = Aligned::new(z, p, None)?;
    let pair = predictors_from(&data)?;
    let (selection, term_errors) = selection_matrix(&data, &pair.w, &pair.v, None, k)?;
    let eig = eigen_ascending(&selection);
    let extraction = eig.vectors.columns(0, r).into_owned();
    let zeta = data.zeta();
    let predictor = regression_from_moments(
        &extraction,
        p,
        &outer_mean(&data.z, &zeta),
        &symmetrize(&outer_mean(&zeta, &zeta)),
    )?;
    Ok(PfaModel {
        extraction,
        predictor,
        p,
        k,
        residual_eigenvalues: eig.values.as_slice().to_vec(),
        term_errors,
    })
}

/// `B vec(hist_{m,p}(t))` from `recent = [m(t-1), ..., m(t-p)]`.
pub fn predict(model: &PfaModel, recent: &[DVector<f64>]) -> Result<DVector<f64>> {
    predict_with(&model.predictor, model.p, recent)
}

pub(crate) fn predict_with(b: &DMatrix<f64>, p: usize, recent: &[DVector<f64>]) -> Result<DVector<f64>> {
    if recent.len() != p {
        return Err(PfaxError::DimensionMismatch {
            expected: p,
            got: recent.len(),
            context: "number of past feature vectors",
        });
    }
    let r = b.nrows();
    let mut stacked = DVector::zeros(r * p);
    for (i, m) in recent.iter().enumerate() {
        if m.len() != r {
            return Err(PfaxError::DimensionMismatch {
                expected: r,
                got: m.len(),
                context: "feature vector",
            });
        }
        stacked.rows_mut(i * r, r).copy_from(m);
    }
    Ok(b * stacked)
}

/// Mean squared one-step prediction error of the extracted features.
pub fn prediction_error(model: &PfaModel, z: &TimeSeries) -> Result<f64> {
    let m = crate::sfa::project(&model.extraction, z)?;
    let p = model.p;
    if m.len() <= p {
        return Err(PfaxError::InsufficientData {
            needed: p + 1,
            got: m.len(),
        });
    }
    let hist = history_rows(m.samples(), HistoryConfig::order(p)?, p, m.len());
    let residual = m.samples().rows(p, m.len() - p) - hist * model.predictor.transpose();
    Ok(residual.norm_squared() / (m.len() - p) as f64)
}
