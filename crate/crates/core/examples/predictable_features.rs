//! PFA picks the two predictable oscillations out of a random mixture with
//! white noise.

use nalgebra::DMatrix;
use pfax::pfa::{fit_pfa, prediction_error};
use pfax::preprocessing::{apply_sphering, fit_sphering};
use pfax::signal::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pfax::Result<()> {
    let len = 4000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sources = DMatrix::from_fn(len, 5, |t, j| match j {
        0 => (0.05 * t as f64).sin(),
        1 => (0.031 * t as f64 + 1.0).cos(),
        _ => rng.random_range(-1.0..1.0),
    });
    let mix = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
    let x = TimeSeries::new(sources * mix)?;
    let tr = fit_sphering(&x)?;
    let z = apply_sphering(&tr, &x)?;

    for k in [0, 3] {
        let model = fit_pfa(&z, 2, 2, k)?;
        let err = prediction_error(&model, &z)?;
        println!(
            "k = {k}: lowest residual eigenvalues {:.2e} {:.2e}, next {:.2e}; one-step error {err:.3e}",
            model.residual_eigenvalues[0], model.residual_eigenvalues[1], model.residual_eigenvalues[2]
        );
    }
    Ok(())
}
