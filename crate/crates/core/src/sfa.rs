//! Slow feature analysis on a sphered signal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PfaxError, Result};
use crate::signal::{eigen_ascending, outer_mean, symmetrize, TimeSeries};

/// Orthonormal extraction directions sorted by slowness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfaModel {
    /// `n x r`, columns are the extraction directions.
    pub extraction: DMatrix<f64>,
    /// Eigenvalues of `<dz dz^T>` for the extracted directions, ascending.
    pub slowness: Vec<f64>,
}

/// Fails unless `z` has zero mean and identity covariance within the loose
/// tolerances used as a precondition check by the fitting routines.
pub(crate) fn check_sphered(z: &TimeSeries) -> Result<()> {
    let mean_err = z.mean().amax();
    let cov = outer_mean(z.samples(), z.samples());
    let cov_err = (cov - DMatrix::identity(z.dim(), z.dim())).amax();
    if mean_err > 1e-6 || cov_err > 1e-4 {
        return Err(PfaxError::Contract(format!(
            "input is not sphered (|mean| = {mean_err:e}, |cov - I| = {cov_err:e})"
        )));
    }
    Ok(())
}

pub fn fit_sfa(z: &TimeSeries, r: usize) -> Result<SfaModel> {
    let n = z.dim();
    if r == 0 || r > n {
        return Err(PfaxError::Config(format!("r = {r} must lie in 1..={n}")));
    }
    if z.len() < 2 {
        return Err(PfaxError::InsufficientData { needed: 2, got: z.len() });
    }
    check_sphered(z)?;
    let s = z.samples();
    let len = z.len();
    // forward difference over the unit time step
    let dz = s.rows(1, len - 1) - s.rows(0, len - 1);
    let moment = symmetrize(&outer_mean(&dz, &dz));
    let eig = eigen_ascending(&moment);
    Ok(SfaModel {
        extraction: eig.vectors.columns(0, r).into_owned(),
        slowness: eig.values.as_slice()[..r].to_vec(),
    })
}

/// `m(t) = A_r^T z(t)`.
pub fn extract(model: &SfaModel, z: &TimeSeries) -> Result<TimeSeries> {
    project(&model.extraction, z)
}

pub(crate) fn project(extraction: &DMatrix<f64>, z: &TimeSeries) -> Result<TimeSeries> {
    if z.dim() != extraction.nrows() {
        return Err(PfaxError::DimensionMismatch {
            expected: extraction.nrows(),
            got: z.dim(),
            context: "extraction input",
        });
    }
    TimeSeries::new(z.samples() * extraction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use crate::preprocessing::{apply_sphering, fit_sphering};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rotation(theta: f64) -> DMatrix<f64> {
        let (s, c) = theta.sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    }

    /// Slow sinusoid and fast noise, sphered, then rotated by `theta`.
    fn slow_fast(theta: f64, len: usize) -> (TimeSeries, DVector<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = DMatrix::from_fn(len, 2, |t, j| {
            if j == 0 {
                (t as f64 * 0.01).sin()
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        let raw = TimeSeries::new(raw).unwrap();
        let z = apply_sphering(&fit_sphering(&raw).unwrap(), &raw).unwrap();
        let rot = rotation(theta);
        let mixed = TimeSeries::new(z.samples() * rot.transpose()).unwrap();
        // the slow source now lies along rot * e0
        (mixed, rot.column(0).into_owned())
    }

    #[test]
    fn slow_direction_recovered() {
        let (z, slow_dir) = slow_fast(0.7, 5000);
        let model = fit_sfa(&z, 1).unwrap();
        let a = model.extraction.column(0);
        let cos = a.dot(&slow_dir).abs();
        assert!(cos >= 0.99, "cosine {cos}");
    }

    #[test]
    fn full_rank_is_orthogonal() {
        let (z, _) = slow_fast(0.3, 2000);
        let model = fit_sfa(&z, 2).unwrap();
        let a = &model.extraction;
        assert!((a * a.transpose() - DMatrix::identity(2, 2)).amax() < 1e-8);
        assert!(model.slowness[0] <= model.slowness[1]);
    }

    #[test]
    fn slowness_equals_output_delta_values() {
        let (z, _) = slow_fast(1.1, 3000);
        let model = fit_sfa(&z, 2).unwrap();
        let m = extract(&model, &z).unwrap();
        let s = m.samples();
        for i in 0..2 {
            let delta: f64 =
                (1..m.len()).map(|t| (s[(t, i)] - s[(t - 1, i)]).powi(2)).sum::<f64>() / (m.len() - 1) as f64;
            assert!((delta - model.slowness[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn extract_identity_and_oracle() {
        let (z, _) = slow_fast(0.0, 100);
        let model = SfaModel {
            extraction: DMatrix::identity(2, 1),
            slowness: vec![0.0],
        };
        let m = extract(&model, &z).unwrap();
        assert_eq!(m.samples().column(0), z.samples().column(0));

        let fitted = fit_sfa(&z, 2).unwrap();
        let single = TimeSeries::from_rows(&[vec![0.4, -1.2]]).unwrap();
        let out = extract(&fitted, &single).unwrap();
        let oracle = fitted.extraction.transpose() * DVector::from_vec(vec![0.4, -1.2]);
        assert!((out.at(0) - oracle).amax() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let (z, _) = slow_fast(0.0, 100);
        assert!(matches!(fit_sfa(&z, 3), Err(PfaxError::Config(_))));
        let scaled = TimeSeries::new(z.samples() * 3.0).unwrap();
        assert!(matches!(fit_sfa(&scaled, 1), Err(PfaxError::Contract(_))));
    }
}
