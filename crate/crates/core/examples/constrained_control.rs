//! Closest reachable feature change under a fixed command norm, compared
//! with a brute-force sweep over directions.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use pfax::control::{solve_norm_constrained, solve_unconstrained, ControlConstraint, ControlProblem};

fn main() -> pfax::Result<()> {
    let u1 = DMatrix::from_row_slice(3, 2, &[1.0, 0.3, -0.2, 0.8, 0.5, 0.1]);
    let u_star = DVector::from_vec(vec![0.4, -1.2, 0.7]);
    let c = 0.25;

    let free = solve_unconstrained(&ControlProblem::new(u1.clone(), u_star.clone(), ControlConstraint::Unconstrained)?)?;
    let prob = ControlProblem::new(u1, u_star, ControlConstraint::NormEquality(c))?;
    let cmd = solve_norm_constrained(&prob)?;
    println!("unconstrained u = {:.5?} (norm {:.4})", free.as_slice(), free.norm());
    println!("constrained   u = {:.5?} (norm {:.4}), objective {:.8}", cmd.u.as_slice(), cmd.u.norm(), cmd.objective);

    let best = (0..100_000)
        .map(|i| {
            let (s, co) = (i as f64 * TAU / 100_000.0).sin_cos();
            prob.objective(&DVector::from_vec(vec![c * co, c * s]))
        })
        .fold(f64::INFINITY, f64::min);
    println!("grid minimum over 1e5 directions: {best:.8}");
    Ok(())
}
