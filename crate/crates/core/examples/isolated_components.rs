//! Alternating extraction of single autoregressive components from a
//! mixture of two AR(2) oscillators and noise.

use nalgebra::DMatrix;
use pfax::isolated::{extract_isolated, DEFAULT_MAX_ITER, DEFAULT_TOL};
use pfax::preprocessing::{apply_sphering, fit_sphering};
use pfax::signal::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pfax::Result<()> {
    let len = 3000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut s = DMatrix::zeros(len, 4);
    for t in 0..len {
        for j in 2..4 {
            s[(t, j)] = rng.random_range(-1.0..1.0);
        }
        if t >= 2 {
            s[(t, 0)] = 1.9 * s[(t - 1, 0)] - 0.95 * s[(t - 2, 0)] + 0.1 * rng.random_range(-1.0..1.0);
            s[(t, 1)] = 1.2 * s[(t - 1, 1)] - 0.6 * s[(t - 2, 1)] + 0.1 * rng.random_range(-1.0..1.0);
        }
    }
    let mix = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
    let x = TimeSeries::new(s * mix)?;
    let z = apply_sphering(&fit_sphering(&x)?, &x)?;

    for (i, c) in extract_isolated(&z, 2, 2, DEFAULT_MAX_ITER, DEFAULT_TOL)?.iter().enumerate() {
        println!(
            "component {i}: b = {:.4?}, error {:.4e}, {} iterations (converged: {})",
            c.b.as_slice(),
            c.error,
            c.iterations,
            c.converged
        );
    }
    Ok(())
}
