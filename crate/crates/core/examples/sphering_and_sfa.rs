//! Quadratic expansion, sphering and slow feature analysis on a toy signal
//! whose slow source only appears nonlinearly.

use nalgebra::DMatrix;
use pfax::preprocessing::{apply_sphering, expand, fit_sphering, ExpansionSpec};
use pfax::sfa::{extract, fit_sfa};
use pfax::signal::TimeSeries;

fn main() -> pfax::Result<()> {
    let len = 2000;
    let raw = DMatrix::from_fn(len, 2, |t, j| {
        let t = t as f64;
        let fast = (0.7 * t).sin();
        if j == 0 {
            fast
        } else {
            (0.011 * t).cos() + fast * fast
        }
    });
    let x = TimeSeries::new(raw)?;
    let h = expand(&x, ExpansionSpec::quadratic())?;
    let tr = fit_sphering(&h)?;
    let z = apply_sphering(&tr, &h)?;
    println!("expanded to {} monomials, sphered mean error {:.1e}", h.dim(), z.mean().amax());

    let model = fit_sfa(&z, 2)?;
    let y = extract(&model, &z)?;
    println!("slowness of the two slowest features: {:?}", model.slowness);
    let slow: Vec<f64> = (0..len).map(|t| (0.011 * t as f64).cos()).collect();
    let corr = correlation(y.samples().column(0).as_slice(), &slow);
    println!("|corr(feature 0, slow source)| = {:.4}", corr.abs());
    Ok(())
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
