//! PFA with a supplementary signal `u` that helps prediction without ever
//! contributing to feature composition.
//!
//! The predictor is `m(t) ~ B zeta_m(t) + U mu(t)` with
//! `mu(t) = vec(hist_{u,q}(t)) = [u(t-1); ...; u(t-q)]`, so the command
//! `u(t)` issued after observing `z(t)` enters the prediction of `z(t+1)`
//! through the first block `U_1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};
use crate::pfa::{check_orthonormal, selection_matrix, Aligned};
use crate::preprocessing::{
    apply_sphering, expand, fit_sphering_with, ExpansionSpec, SpheringPolicy, SpheringTransform,
};
use crate::signal::{
    block_diag_lift, checked_symmetric, eigen_ascending, outer_mean, symmetrize,
    thresholded_inverse_full, TimeSeries, DEFAULT_TAU,
};

/// Hyperparameters of a PFAx fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaxParams {
    pub expansion: ExpansionSpec,
    pub sphering: SpheringPolicy,
    /// History order of the main signal.
    pub p: usize,
    /// History order of the supplementary signal.
    pub q: usize,
    /// Number of extracted features.
    pub r: usize,
    /// Iterated prediction depth used for selection.
    pub k: usize,
}

impl Default for PfaxParams {
    fn default() -> Self {
        Self {
            expansion: ExpansionSpec::linear(),
            sphering: SpheringPolicy::Strict,
            p: 1,
            q: 1,
            r: 1,
            k: 0,
        }
    }
}

/// A fitted PFAx model including the preprocessing needed to map raw
/// perceptions to features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfaxModel {
    pub expansion: ExpansionSpec,
    pub sphering: SpheringTransform,
    /// `n x r`
    pub extraction: DMatrix<f64>,
    /// `r x rp`
    pub b: DMatrix<f64>,
    /// `r x n_u q`, blocks `(U_1, ..., U_q)`.
    pub u: DMatrix<f64>,
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub residual_eigenvalues: Vec<f64>,
    pub term_errors: Vec<f64>,
}

impl PfaxModel {
    pub fn r(&self) -> usize {
        self.extraction.ncols()
    }

    /// Dimension of the sphered signal.
    pub fn n(&self) -> usize {
        self.extraction.nrows()
    }

    pub fn n_u(&self) -> usize {
        self.u.ncols() / self.q
    }

    /// Raw input dimension before expansion.
    pub fn input_dim(&self) -> Option<usize> {
        let expanded = self.sphering.input_dim();
        (1..=expanded).find(|&d| self.expansion.output_dim(d) == expanded)
    }

    /// Expand and sphere a raw perception.
    pub fn sphere(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.sphering.apply_vector(&self.expansion.expand_vector(x))
    }

    /// Features `A_r^T z` of a raw perception.
    pub fn features(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.extraction.tr_mul(&self.sphere(x)?))
    }

    /// Block `U_j` (1-based) of the supplementary coefficient matrix.
    pub fn u_block(&self, j: usize) -> DMatrix<f64> {
        let nu = self.n_u();
        self.u.columns((j - 1) * nu, nu).into_owned()
    }
}

/// `W = B(I)`, `U0 = U(I)` and the propagator `V` of the supplementary
/// predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPredictor {
    /// `n x np`
    pub w: DMatrix<f64>,
    /// `n x n_u q`
    pub u0: DMatrix<f64>,
    /// `np x np`
    pub v: DMatrix<f64>,
}

/// Second moments of an aligned `(z, zeta, mu)` triple.
struct SupplementaryMoments {
    z_zeta: DMatrix<f64>,
    z_mu: DMatrix<f64>,
    zeta_zeta: DMatrix<f64>,
    zeta_mu: DMatrix<f64>,
    /// Pseudo-inverse of `<mu mu^T>`.
    mu_mu_inv: DMatrix<f64>,
}

impl SupplementaryMoments {
    fn new(z: &DMatrix<f64>, zeta: &DMatrix<f64>, mu: &DMatrix<f64>) -> Result<Self> {
        let mu_mu = outer_mean(mu, mu);
        let mu_mu = checked_symmetric(&mu_mu, "<mu mu^T>")
            .map_err(|e| PfaxError::DegenerateSupplementary(e.to_string()))?;
        let inv = thresholded_inverse_full(&mu_mu, DEFAULT_TAU)?;
        // <mu mu^T> is a Gram matrix; a clearly negative eigenvalue means
        // the moments are corrupted.
        let lmax = inv.eigenvalues.last().copied().unwrap_or(0.0);
        let lmin = inv.eigenvalues.first().copied().unwrap_or(0.0);
        if lmin < -1e-8 * lmax.abs().max(1.0) {
            return Err(PfaxError::DegenerateSupplementary(format!(
                "<mu mu^T> has negative eigenvalue {lmin:e}"
            )));
        }
        Ok(Self {
            z_zeta: outer_mean(z, zeta),
            z_mu: outer_mean(z, mu),
            zeta_zeta: symmetrize(&outer_mean(zeta, zeta)),
            zeta_mu: outer_mean(zeta, mu),
            mu_mu_inv: inv.inverse,
        })
    }

    /// `(B, U)` for extraction `A_r` with history order `p`.
    fn fit(&self, extraction: &DMatrix<f64>, p: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let lifted = block_diag_lift(extraction, p);
        let mu_zeta = self.zeta_mu.transpose();
        let lhs = &self.z_zeta - &self.z_mu * &self.mu_mu_inv * &mu_zeta;
        let schur = &self.zeta_zeta - &self.zeta_mu * &self.mu_mu_inv * &mu_zeta;
        let gram = symmetrize(&(lifted.tr_mul(&schur) * &lifted));
        let inv = thresholded_inverse_full(&gram, DEFAULT_TAU)?;
        if inv.rank == 0 {
            return Err(PfaxError::Degenerate(
                "history Gram matrix after removing the supplementary part is numerically zero".into(),
            ));
        }
        let b = extraction.tr_mul(&lhs) * &lifted * inv.inverse;
        let u = (extraction.tr_mul(&self.z_mu) - &b * lifted.tr_mul(&self.zeta_mu)) * &self.mu_mu_inv;
        Ok((b, u))
    }
}

/// Jointly optimal `(B, U)` for a fixed extraction: `B` from the explicit
/// formula with the supplementary part partialled out, then `U` from the
/// second stationarity condition.
///
/// `z`, `zeta` and `mu` must be row-aligned.
pub fn fit_supplementary_regression(
    extraction: &DMatrix<f64>,
    z: &TimeSeries,
    zeta: &TimeSeries,
    mu: &TimeSeries,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_orthonormal(extraction)?;
    let n = z.dim();
    if extraction.nrows() != n {
        return Err(PfaxError::DimensionMismatch {
            expected: n,
            got: extraction.nrows(),
            context: "extraction rows vs signal dimension",
        });
    }
    if !zeta.dim().is_multiple_of(n) {
        return Err(PfaxError::DimensionMismatch {
            expected: n,
            got: zeta.dim(),
            context: "history dimension must be a multiple of the signal dimension",
        });
    }
    if z.len() != zeta.len() || z.len() != mu.len() {
        return Err(PfaxError::Alignment(format!(
            "z, zeta, mu cover {}, {}, {} steps",
            z.len(),
            zeta.len(),
            mu.len()
        )));
    }
    let moments = SupplementaryMoments::new(z.samples(), zeta.samples(), mu.samples())?;
    moments.fit(extraction, zeta.dim() / n)
}

/// Computes `W`, `U0` and `V` on the full (unextracted) signal.
pub fn compute_extended_predictor(
    z: &TimeSeries,
    u: &TimeSeries,
    p: usize,
    q: usize,
) -> Result<ExtendedPredictor> {
    let data = Aligned::new(z, p, Some((u, q)))?;
    extended_from(&data)
}

fn extended_from(data: &Aligned) -> Result<ExtendedPredictor> {
    let mu = data.mu.as_ref().expect("aligned data carries mu");
    let zeta = data.zeta();
    let moments = SupplementaryMoments::new(&data.z, &zeta, mu)?;
    let n = data.z.ncols();
    let (w, u0) = moments.fit(&DMatrix::identity(n, n), data.p)?;
    let inv = thresholded_inverse_full(&moments.zeta_zeta, DEFAULT_TAU)?;
    // I_{np,n} U0 <mu zeta^T>
    let np = zeta.ncols();
    let mut forced = DMatrix::zeros(np, np);
    forced
        .view_mut((0, 0), (n, np))
        .copy_from(&(&u0 * moments.zeta_mu.transpose()));
    let v = (outer_mean(&data.zeta_next(), &zeta) - forced) * inv.inverse;
    Ok(ExtendedPredictor { w, u0, v })
}

/// `z_hat^(i)(t) = W V^i zeta(t-i) + I^T sum_{j=0..i} V^j I U0 mu(t-j)`.
///
/// `mu_history[j]` is `mu(t-j)` for `j = 0..=i`.
pub fn predict_zhat(
    pred: &ExtendedPredictor,
    i: usize,
    zeta: &DVector<f64>,
    mu_history: &[DVector<f64>],
) -> Result<DVector<f64>> {
    if mu_history.len() != i + 1 {
        return Err(PfaxError::Range {
            index: i,
            reason: format!("need mu(t-j) for j = 0..={i}, got {} vectors", mu_history.len()),
        });
    }
    let n = pred.w.nrows();
    let np = pred.v.nrows();
    let mut v_pow = DMatrix::<f64>::identity(np, np);
    let mut forced = DVector::zeros(n);
    for (j, mu) in mu_history.iter().enumerate() {
        if j > 0 {
            v_pow = &pred.v * v_pow;
        }
        let mut lifted = DVector::zeros(np);
        lifted.rows_mut(0, n).copy_from(&(&pred.u0 * mu));
        forced += (&v_pow * lifted).rows(0, n);
    }
    let mut state = zeta.clone();
    for _ in 0..i {
        state = &pred.v * state;
    }
    Ok(&pred.w * state + forced)
}

/// Expand, sphere, fit the extended predictor, select the `r` directions
/// with the smallest summed iterated residuals and refit `(B, U)` on them.
pub fn fit_pfax(x: &TimeSeries, u: &TimeSeries, params: &PfaxParams) -> Result<PfaxModel> {
    if x.len() != u.len() {
        return Err(PfaxError::Alignment(format!(
            "perception has {} steps, supplementary has {}",
            x.len(),
            u.len()
        )));
    }
    let PfaxParams { p, q, k, r, .. } = *params;
    if p == 0 || q == 0 {
        return Err(PfaxError::Config(format!("p = {p} and q = {q} must be positive")));
    }
    let needed = p.max(q) + k + 2;
    if x.len() < needed {
        return Err(PfaxError::InsufficientData {
            needed,
            got: x.len(),
        });
    }
    let h = expand(x, params.expansion)?;
    let sphering = fit_sphering_with(&h, params.sphering)?;
    let z = apply_sphering(&sphering, &h)?;
    let n = z.dim();
    if r == 0 || r > n {
        return Err(PfaxError::Config(format!(
            "r = {r} must lie in 1..={n} (sphered dimension)"
        )));
    }
    let data = Aligned::new(&z, p, Some((u, q)))?;
    let pred = extended_from(&data)?;
    let (selection, term_errors) = selection_matrix(&data, &pred.w, &pred.v, Some(&pred.u0), k)?;
    let eig = eigen_ascending(&selection);
    let extraction = eig.vectors.columns(0, r).into_owned();
    let moments = SupplementaryMoments::new(&data.z, &data.zeta(), data.mu.as_ref().unwrap())?;
    let (b, u_coef) = moments.fit(&extraction, p)?;
    Ok(PfaxModel {
        expansion: params.expansion,
        sphering,
        extraction,
        b,
        u: u_coef,
        p,
        q,
        k,
        residual_eigenvalues: eig.values.as_slice().to_vec(),
        term_errors,
    })
}

/// Per-feature coefficient norms showing where predictions come from.
#[derive(Debug, Clone, PartialEq)]
pub struct Relevance {
    /// `||row i of U||`
    pub supplementary: Vec<f64>,
    /// `||row i of B||`
    pub autoregressive: Vec<f64>,
}

pub fn supplementary_relevance(model: &PfaxModel) -> Relevance {
    Relevance {
        supplementary: model.u.row_iter().map(|r| r.norm()).collect(),
        autoregressive: model.b.row_iter().map(|r| r.norm()).collect(),
    }
}
