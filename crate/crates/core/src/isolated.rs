//! Extraction of single components that are predictable by a scalar AR
//! model of their own past (diagonal coefficient matrices), by alternating
//! exact minimization over the direction `a` and the coefficients `b`,
//! followed by deflation.
//!
//! Unlike [`crate::pfa`], this model is not invariant under rotations of
//! the extracted signal, so there is no closed-form solution and the
//! alternation can settle in a suboptimal state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};
use crate::sfa::check_sphered;
use crate::signal::{eigen_ascending, symmetrize, thresholded_inverse_full, TimeSeries, DEFAULT_TAU};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedComponent {
    /// Unit direction in the coordinates of the input signal.
    pub a: DVector<f64>,
    /// Scalar AR coefficients for lags `1..=p`.
    pub b: DVector<f64>,
    /// Final mean squared prediction error of `a^T z`.
    pub error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every half step (`a` update, then `b` update).
    pub history: Vec<f64>,
}

fn check_len(z: &TimeSeries, p: usize) -> Result<()> {
    if p == 0 {
        return Err(PfaxError::Config("p must be positive".into()));
    }
    if z.len() <= p + 1 {
        return Err(PfaxError::InsufficientData {
            needed: p + 2,
            got: z.len(),
        });
    }
    Ok(())
}

/// Lag matrix for a scalar series: row `t - p` holds `y(t-1), ..., y(t-p)`.
fn lags(y: &DVector<f64>, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(y.len() - p, p, |row, i| y[row + p - 1 - i])
}

fn solve_gram(gram: DMatrix<f64>, rhs: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let inv = thresholded_inverse_full(&symmetrize(&gram), DEFAULT_TAU)?;
    if inv.rank == 0 {
        return Err(PfaxError::Degenerate(format!("{what} Gram matrix is numerically zero")));
    }
    Ok(inv.inverse * rhs)
}

/// Coefficients that predict every component of `z` best on average from
/// its own past with one shared `b`.
pub fn init_b(z: &TimeSeries, p: usize) -> Result<DVector<f64>> {
    check_len(z, p)?;
    let s = z.samples();
    let len = z.len();
    let count = (len - p) as f64;
    let lagged = |i: usize| s.rows(p - i, len - p);
    let mut gram = DMatrix::zeros(p, p);
    let mut rhs = DVector::zeros(p);
    let now = s.rows(p, len - p);
    for i in 0..p {
        rhs[i] = now.dot(&lagged(i + 1)) / count;
        for j in 0..p {
            gram[(i, j)] = lagged(i + 1).dot(&lagged(j + 1)) / count;
        }
    }
    solve_gram(gram, rhs, "lag")
}

/// `<(z - hist b)(z - hist b)^T>`, whose smallest eigenvector is the best
/// direction for fixed `b`.
pub fn residual_moment(z: &TimeSeries, b: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = b.len();
    check_len(z, p)?;
    let s = z.samples();
    let len = z.len();
    let mut resid = s.rows(p, len - p).into_owned();
    for i in 0..p {
        resid -= s.rows(p - 1 - i, len - p) * b[i];
    }
    Ok(symmetrize(&(resid.tr_mul(&resid) / (len - p) as f64)))
}

/// Best unit direction for fixed `b` on a sphered signal.
pub fn b_to_a(z: &TimeSeries, b: &DVector<f64>) -> Result<DVector<f64>> {
    let eig = eigen_ascending(&residual_moment(z, b)?);
    Ok(eig.vectors.column(0).into_owned())
}

/// Least-squares AR coefficients of the scalar series `a^T z`.
pub fn a_to_b(z: &TimeSeries, a: &DVector<f64>, p: usize) -> Result<DVector<f64>> {
    check_len(z, p)?;
    let y = z.samples() * a;
    let x = lags(&y, p);
    let target = y.rows(p, y.len() - p);
    let count = x.nrows() as f64;
    solve_gram(x.tr_mul(&x) / count, x.tr_mul(&target) / count, "projected lag")
}

/// `<(a^T z(t) - sum_i b_i a^T z(t-i))^2>`.
pub fn objective(z: &TimeSeries, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let p = b.len();
    let y = z.samples() * a;
    let resid = y.rows(p, y.len() - p) - lags(&y, p) * b;
    resid.norm_squared() / resid.len() as f64
}

fn sign_invariant_step(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    (new - old).norm().min((new + old).norm())
}

fn extract_one(z: &TimeSeries, p: usize, max_iter: usize, tol: f64) -> Result<IsolatedComponent> {
    let mut b = init_b(z, p)?;
    let mut a: Option<DVector<f64>> = None;
    let mut history = Vec::with_capacity(2 * max_iter.min(64));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let a_new = b_to_a(z, &b)?;
        history.push(objective(z, &a_new, &b));
        b = a_to_b(z, &a_new, p)?;
        history.push(objective(z, &a_new, &b));
        let step = a.as_ref().map(|old| sign_invariant_step(&a_new, old));
        a = Some(a_new);
        if step.is_some_and(|s| s < tol) {
            converged = true;
            break;
        }
    }
    let a = a.expect("at least one iteration");
    Ok(IsolatedComponent {
        error: objective(z, &a, &b),
        a,
        b,
        iterations,
        converged,
        history,
    })
}

/// Orthonormal basis of the complement of unit `a` in `R^d`.
fn complement(a: &DVector<f64>) -> DMatrix<f64> {
    let d = a.len();
    let proj = DMatrix::identity(d, d) - a * a.transpose();
    let eig = eigen_ascending(&proj);
    eig.vectors.columns(1, d - 1).into_owned()
}

/// Extracts `count` components one after another, each from the signal
/// projected onto the orthogonal complement of the previous directions.
pub fn extract_isolated(
    z: &TimeSeries,
    p: usize,
    count: usize,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<IsolatedComponent>> {
    let n = z.dim();
    if count == 0 || count > n {
        return Err(PfaxError::Config(format!("count = {count} must lie in 1..={n}")));
    }
    if max_iter == 0 {
        return Err(PfaxError::Config("max_iter must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(PfaxError::Config(format!("tol = {tol} must be positive")));
    }
    check_len(z, p)?;
    check_sphered(z)?;
    // columns span the retained subspace in original coordinates
    let mut basis = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let local = TimeSeries::new(z.samples() * &basis)?;
        let mut comp = extract_one(&local, p, max_iter, tol)?;
        let a_local = comp.a.clone();
        comp.a = &basis * &a_local;
        log::debug!(
            "isolated component {}: error {:.3e} after {} iterations",
            out.len(),
            comp.error,
            comp.iterations
        );
        out.push(comp);
        if basis.ncols() > 1 {
            basis = &basis * complement(&a_local);
        }
    }
    Ok(out)
}
