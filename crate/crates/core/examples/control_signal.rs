//! PFAx on a linear system driven by a known control input: the features
//! most predictable given the control are the ones it steers.

use nalgebra::{DMatrix, DVector};
use pfax::pfax::{fit_pfax, supplementary_relevance, PfaxParams};
use pfax::preprocessing::{ExpansionSpec, SpheringPolicy};
use pfax::signal::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pfax::Result<()> {
    let len = 5000;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // two integrators driven by u plus three noise channels
    let mut pos = DVector::zeros(2);
    let mut x = DMatrix::zeros(len, 5);
    let mut u = DMatrix::zeros(len, 2);
    for t in 0..len {
        for j in 0..2 {
            x[(t, j)] = pos[j];
        }
        for j in 2..5 {
            x[(t, j)] = rng.random_range(-1.0..1.0);
        }
        let step = DVector::from_fn(2, |_, _| rng.random_range(-0.05..0.05));
        pos = 0.99 * pos + &step;
        u.set_row(t, &step.transpose());
    }
    let mix = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
    let x = TimeSeries::new(x * mix)?;
    let u = TimeSeries::new(u)?;

    let params = PfaxParams {
        expansion: ExpansionSpec::linear(),
        sphering: SpheringPolicy::Strict,
        p: 1,
        q: 1,
        r: 2,
        k: 0,
    };
    let model = fit_pfax(&x, &u, &params)?;
    println!("B =\n{:.4}", model.b);
    println!("U1 =\n{:.4}", model.u_block(1));
    let rel = supplementary_relevance(&model);
    println!("control relevance per feature: {:?}", rel.supplementary);
    Ok(())
}
