//! Control synthesis: invert the fitted predictor to find the command that
//! moves the predicted features closest to a goal, optionally under a
//! fixed-norm (constant speed) constraint.
//!
//! The constrained problem `min ||u* - U1 v||^2 s.t. ||v|| = c` is the
//! inhomogeneous eigenvalue problem `A v = lambda v + b, ||v|| = c` with
//! `A = U1^T U1` and `b = U1^T u*`. It is reduced to an ordinary eigenvalue
//! problem of twice the dimension:
//!
//! ```text
//! [ 0                   I       ] [ x        ]          [ x        ]
//! [ b b^T / c^2 - A A^T A^T + A ] [ lambda x ] = lambda [ lambda x ]
//! ```
//!
//! Every real eigenvalue is a candidate; `v = (A - lambda I)^-1 b` is
//! recovered and checked against the original equations before use.

use nalgebra::{DMatrix, DVector};

use crate::error::{PfaxError, Result};
use crate::pfax::PfaxModel;
use crate::signal::{block_diag_lift, checked_symmetric, eigen_ascending, thresholded_inverse, DEFAULT_TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlConstraint {
    Unconstrained,
    /// `||u|| = c` with `c > 0`.
    NormEquality(f64),
}

/// `min ||u_star - U1 u||^2` subject to `constraint`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    /// `r x n_u`
    pub u1: DMatrix<f64>,
    pub u_star: DVector<f64>,
    pub constraint: ControlConstraint,
}

impl ControlProblem {
    pub fn new(u1: DMatrix<f64>, u_star: DVector<f64>, constraint: ControlConstraint) -> Result<Self> {
        if u1.nrows() != u_star.len() {
            return Err(PfaxError::DimensionMismatch {
                expected: u1.nrows(),
                got: u_star.len(),
                context: "u_star length vs U1 rows",
            });
        }
        if let ControlConstraint::NormEquality(c) = constraint {
            if !(c > 0.0 && c.is_finite()) {
                return Err(PfaxError::Config(format!("norm constraint c = {c} must be positive")));
            }
        }
        Ok(Self { u1, u_star, constraint })
    }

    /// `||u_star - U1 u||^2`.
    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        (&self.u_star - &self.u1 * u).norm_squared()
    }
}

/// One solution of `A v = lambda v + b`, `||v|| = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct InhomSolution {
    pub lambda: f64,
    pub v: DVector<f64>,
    /// `v^T A v - 2 b^T v`; equals `||u* - U1 v||^2 - ||u*||^2` when
    /// `A = U1^T U1` and `b = U1^T u*`.
    pub objective: f64,
}

/// Result of the constrained solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlCommand {
    pub u: DVector<f64>,
    pub objective: f64,
    /// Set when no valid eigen-candidate existed and the command was
    /// obtained by rescaling the unconstrained solution.
    pub fallback: Option<String>,
}

/// `m* = A_r^T S (h(goal) - mean)`.
pub fn goal_features(model: &PfaxModel, goal_perception: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(dim) = model.input_dim() {
        if dim != goal_perception.len() {
            return Err(PfaxError::DimensionMismatch {
                expected: dim,
                got: goal_perception.len(),
                context: "goal perception",
            });
        }
    }
    model.features(goal_perception)
}

/// `u* = m* - B lift(A_r)^T zeta(t+1) - sum_{j=2..q} U_j u(t-j+1)`.
///
/// `zeta_next` stacks `z(t), z(t-1), ..., z(t-p+1)`; `past_controls`
/// holds `u(t-1), ..., u(t-q+1)` (empty for `q = 1`).
pub fn build_control_problem(
    model: &PfaxModel,
    goal: &DVector<f64>,
    zeta_next: &DVector<f64>,
    past_controls: &[DVector<f64>],
    constraint: ControlConstraint,
) -> Result<ControlProblem> {
    let n = model.n();
    let r = model.r();
    if goal.len() != r {
        return Err(PfaxError::DimensionMismatch {
            expected: r,
            got: goal.len(),
            context: "goal features",
        });
    }
    if zeta_next.len() != n * model.p {
        return Err(PfaxError::DimensionMismatch {
            expected: n * model.p,
            got: zeta_next.len(),
            context: "z history length",
        });
    }
    if past_controls.len() + 1 != model.q {
        return Err(PfaxError::Range {
            index: past_controls.len(),
            reason: format!("q = {} needs {} past controls", model.q, model.q - 1),
        });
    }
    let lifted = block_diag_lift(&model.extraction, model.p);
    let mut u_star = goal - &model.b * lifted.tr_mul(zeta_next);
    for (idx, u) in past_controls.iter().enumerate() {
        if u.len() != model.n_u() {
            return Err(PfaxError::DimensionMismatch {
                expected: model.n_u(),
                got: u.len(),
                context: "past control",
            });
        }
        u_star -= model.u_block(idx + 2) * u;
    }
    ControlProblem::new(model.u_block(1), u_star, constraint)
}

fn no_influence(u1: &DMatrix<f64>) -> bool {
    u1.amax() <= 1e-12
}

/// Least-squares command without constraints.
pub fn solve_unconstrained(prob: &ControlProblem) -> Result<DVector<f64>> {
    if no_influence(&prob.u1) {
        return Err(PfaxError::NoControlInfluence);
    }
    let u1 = &prob.u1;
    if u1.is_square() {
        let sv = u1.singular_values();
        if sv.min() > 1e-10 * sv.max() {
            if let Some(u) = u1.clone().lu().solve(&prob.u_star) {
                return Ok(u);
            }
        }
    }
    let gram = u1.tr_mul(u1);
    let inv = thresholded_inverse(&crate::signal::symmetrize(&gram), DEFAULT_TAU)?;
    Ok(inv * u1.tr_mul(&prob.u_star))
}

/// All validated real solutions of `A v = lambda v + b`, `||v|| = c`,
/// sorted by objective (ties: smaller `lambda`, then lexicographic `v`).
pub fn inhomogeneous_eigen(a: &DMatrix<f64>, b: &DVector<f64>, c: f64) -> Result<Vec<InhomSolution>> {
    let a = checked_symmetric(a, "inhomogeneous_eigen")?;
    let m = a.nrows();
    if b.len() != m {
        return Err(PfaxError::DimensionMismatch {
            expected: m,
            got: b.len(),
            context: "inhomogeneous right-hand side",
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(PfaxError::Contract(format!("norm c = {c} must be positive")));
    }
    if b.norm() == 0.0 {
        return Err(PfaxError::Contract("right-hand side b must be nonzero".into()));
    }

    let mut companion = DMatrix::zeros(2 * m, 2 * m);
    companion.view_mut((0, m), (m, m)).fill_with_identity();
    let lower_left = b * b.transpose() / (c * c) - &a * a.transpose();
    companion.view_mut((m, 0), (m, m)).copy_from(&lower_left);
    companion
        .view_mut((m, m), (m, m))
        .copy_from(&(a.transpose() + &a));
    let eigenvalues = companion.complex_eigenvalues();

    let strict: Vec<f64> = eigenvalues
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    let mut solutions = collect_candidates(&a, b, c, &strict);
    if solutions.is_empty() {
        // Nearly coincident roots split into a complex pair with an
        // imaginary part of order sqrt(eps); their real parts are still
        // valid starting points once polished and validated.
        let loose: Vec<f64> = eigenvalues
            .iter()
            .filter(|z| z.im.abs() <= 1e-4 * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect();
        solutions = collect_candidates(&a, b, c, &loose);
    }
    for cand in hard_case_candidates(&a, b, c) {
        push_unique(&mut solutions, cand);
    }
    if solutions.is_empty() {
        return Err(PfaxError::Infeasible);
    }
    solutions.sort_by(|x, y| {
        if (x.objective - y.objective).abs() < 1e-10 {
            x.lambda.total_cmp(&y.lambda).then_with(|| {
                x.v.iter()
                    .zip(y.v.iter())
                    .map(|(p, q)| p.total_cmp(q))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        } else {
            x.objective.total_cmp(&y.objective)
        }
    });
    Ok(solutions)
}

fn collect_candidates(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, lambdas: &[f64]) -> Vec<InhomSolution> {
    let mut out: Vec<InhomSolution> = Vec::new();
    for &lambda0 in lambdas {
        let lambda = polish_lambda(a, b, c, lambda0);
        let Some(v) = shifted_solve(a, b, lambda) else {
            continue;
        };
        if let Some(sol) = validated(a, b, c, lambda, v) {
            push_unique(&mut out, sol);
        }
    }
    out
}

fn validated(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, lambda: f64, v: DVector<f64>) -> Option<InhomSolution> {
    let residual = (a * &v - &v * lambda - b).norm();
    if residual > 1e-6 * (1.0 + b.norm()) || (v.norm() - c).abs() > 1e-6 * c {
        return None;
    }
    let objective = v.dot(&(a * &v)) - 2.0 * b.dot(&v);
    Some(InhomSolution { lambda, v, objective })
}

fn push_unique(out: &mut Vec<InhomSolution>, sol: InhomSolution) {
    let dup = out.iter().any(|s| {
        (s.lambda - sol.lambda).abs() <= 1e-9 * (1.0 + sol.lambda.abs()) && (&s.v - &sol.v).amax() <= 1e-9 * (1.0 + sol.v.amax())
    });
    if !dup {
        out.push(sol);
    }
}

/// Solutions with `lambda` equal to an eigenvalue of `A` whose eigenspace
/// is orthogonal to `b`. There `A - lambda I` is singular, the companion
/// matrix does not produce them, and `v` is the pseudo-inverse solution
/// plus whatever multiple of the eigenvector fills the norm.
fn hard_case_candidates(a: &DMatrix<f64>, b: &DVector<f64>, c: f64) -> Vec<InhomSolution> {
    let eig = eigen_ascending(a);
    let m = a.nrows();
    let spread = 1e-10 * (1.0 + eig.values.amax());
    let coeff = eig.vectors.tr_mul(b);
    let mut out = Vec::new();
    for i in 0..m {
        let lambda = eig.values[i];
        let group: Vec<usize> = (0..m).filter(|&j| (eig.values[j] - lambda).abs() <= spread).collect();
        if group[0] != i || group.iter().any(|&j| coeff[j].abs() > 1e-10 * b.norm()) {
            continue;
        }
        let mut v0 = DVector::zeros(m);
        for j in (0..m).filter(|j| !group.contains(j)) {
            v0 += eig.vectors.column(j) * (coeff[j] / (eig.values[j] - lambda));
        }
        let rest = c * c - v0.norm_squared();
        if rest < 0.0 {
            continue;
        }
        let fill = eig.vectors.column(i) * rest.sqrt();
        for v in [&v0 + &fill, &v0 - &fill] {
            if let Some(sol) = validated(a, b, c, lambda, v) {
                out.push(sol);
            }
        }
    }
    out
}

/// `(A - lambda I)^-1 b`, or `None` when the shift is singular.
fn shifted_solve(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let m = a.nrows();
    let shifted = a - DMatrix::identity(m, m) * lambda;
    shifted.lu().solve(b).filter(|v| v.iter().all(|x| x.is_finite()))
}

/// Newton iterations on `||(A - lambda I)^-1 b||^2 = c^2`, keeping the
/// starting value if the iteration does not improve the residual.
fn polish_lambda(a: &DMatrix<f64>, b: &DVector<f64>, c: f64, lambda0: f64) -> f64 {
    let secular = |lambda: f64| -> Option<(f64, f64)> {
        let v = shifted_solve(a, b, lambda)?;
        let w = shifted_solve(a, &v, lambda)?;
        // d/dlambda ||v||^2 = 2 v^T (A - lambda I)^-1 v
        Some((v.norm_squared() - c * c, 2.0 * v.dot(&w)))
    };
    let Some((f0, _)) = secular(lambda0) else {
        return lambda0;
    };
    let mut best = (lambda0, f0.abs());
    let mut lambda = lambda0;
    for _ in 0..8 {
        let Some((f, df)) = secular(lambda) else { break };
        if df == 0.0 || !df.is_finite() {
            break;
        }
        lambda -= f / df;
        match secular(lambda) {
            Some((f_new, _)) if f_new.abs() < best.1 => best = (lambda, f_new.abs()),
            Some(_) => {}
            None => break,
        }
    }
    best.0
}

/// Command with `||u|| = c` minimizing `||u* - U1 u||^2`.
pub fn solve_norm_constrained(prob: &ControlProblem) -> Result<ControlCommand> {
    let ControlConstraint::NormEquality(c) = prob.constraint else {
        return Err(PfaxError::Contract("problem has no norm constraint".into()));
    };
    if no_influence(&prob.u1) {
        return Err(PfaxError::NoControlInfluence);
    }
    let a = crate::signal::symmetrize(&prob.u1.tr_mul(&prob.u1));
    let b = prob.u1.tr_mul(&prob.u_star);
    let scale = a.amax() * c + prob.u_star.norm() * prob.u1.amax();
    if b.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        // Homogeneous case: the objective is ||u*||^2 + u^T A u.
        let eig = eigen_ascending(&a);
        let u = eig.vectors.column(0) * c;
        let objective = prob.objective(&u);
        return Ok(ControlCommand { u, objective, fallback: None });
    }
    match inhomogeneous_eigen(&a, &b, c) {
        Ok(candidates) => {
            let best = candidates.into_iter().next().expect("non-empty candidate list");
            let objective = prob.objective(&best.v);
            Ok(ControlCommand {
                u: best.v,
                objective,
                fallback: None,
            })
        }
        Err(PfaxError::Infeasible) => {
            let w = solve_unconstrained(prob)?;
            let dir = if w.norm() > 1e-12 { w } else { b };
            let u = &dir * (c / dir.norm());
            log::debug!("norm-constrained control fell back to rescaled unconstrained solution");
            let objective = prob.objective(&u);
            Ok(ControlCommand {
                u,
                objective,
                fallback: Some("no valid inhomogeneous eigen-solution; rescaled unconstrained command".into()),
            })
        }
        Err(e) => Err(e),
    }
}

/// Dispatches on the problem's constraint.
pub fn solve(prob: &ControlProblem) -> Result<ControlCommand> {
    match prob.constraint {
        ControlConstraint::Unconstrained => {
            let u = solve_unconstrained(prob)?;
            let objective = prob.objective(&u);
            Ok(ControlCommand { u, objective, fallback: None })
        }
        ControlConstraint::NormEquality(_) => solve_norm_constrained(prob),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    /// Best objective over `steps` equiangular points of the circle of radius `c`.
    pub(crate) fn circle_grid_min(prob: &ControlProblem, c: f64, steps: usize) -> f64 {
        (0..steps)
            .map(|i| {
                let th = i as f64 * std::f64::consts::TAU / steps as f64;
                prob.objective(&vec2(c * th.cos(), c * th.sin()))
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn zero_matrix_analytic() {
        let b = vec2(3.0, -4.0);
        let c = 2.0;
        let sols = inhomogeneous_eigen(&DMatrix::zeros(2, 2), &b, c).unwrap();
        assert_eq!(sols.len(), 2);
        let mut lambdas: Vec<f64> = sols.iter().map(|s| s.lambda).collect();
        lambdas.sort_by(f64::total_cmp);
        assert!((lambdas[0] + 2.5).abs() < 1e-10 && (lambdas[1] - 2.5).abs() < 1e-10);
        for s in &sols {
            let expected = -&b / s.lambda;
            assert!((&s.v - expected).amax() < 1e-10);
            assert!((s.v.norm() - c).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_analytic() {
        let a = DMatrix::from_element(1, 1, 2.0);
        let b = DVector::from_element(1, 1.0);
        let sols = inhomogeneous_eigen(&a, &b, 1.0).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            if (s.lambda - 1.0).abs() < 1e-10 {
                assert!((s.v[0] - 1.0).abs() < 1e-10);
            } else {
                assert!((s.lambda - 3.0).abs() < 1e-10);
                assert!((s.v[0] + 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn contract_errors() {
        let a = DMatrix::identity(2, 2);
        assert!(matches!(
            inhomogeneous_eigen(&a, &DVector::zeros(2), 1.0),
            Err(PfaxError::Contract(_))
        ));
        assert!(matches!(
            inhomogeneous_eigen(&a, &vec2(1.0, 0.0), 0.0),
            Err(PfaxError::Contract(_))
        ));
    }

    #[test]
    fn unconstrained_cases() {
        let p = ControlProblem::new(DMatrix::identity(2, 2), vec2(0.3, -0.1), ControlConstraint::Unconstrained).unwrap();
        assert!((solve_unconstrained(&p).unwrap() - vec2(0.3, -0.1)).amax() < 1e-14);
        let p = ControlProblem::new(DMatrix::identity(2, 2), vec2(0.0, 0.0), ControlConstraint::Unconstrained).unwrap();
        assert_eq!(solve_unconstrained(&p).unwrap(), vec2(0.0, 0.0));
        let p = ControlProblem::new(DMatrix::zeros(2, 2), vec2(1.0, 0.0), ControlConstraint::Unconstrained).unwrap();
        assert!(matches!(solve_unconstrained(&p), Err(PfaxError::NoControlInfluence)));
    }

    #[test]
    fn unconstrained_residual_orthogonal_to_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u1 = DMatrix::from_fn(3, 2, |_, _| rng.random_range(-1.0..1.0));
        let us = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let p = ControlProblem::new(u1.clone(), us.clone(), ControlConstraint::Unconstrained).unwrap();
        let u = solve_unconstrained(&p).unwrap();
        let residual = us - &u1 * u;
        assert!(u1.tr_mul(&residual).amax() < 1e-8);
    }

    #[test]
    fn constrained_identity_cases() {
        let c = 0.5;
        let p = ControlProblem::new(DMatrix::identity(2, 2), vec2(0.3, 0.4), ControlConstraint::NormEquality(c)).unwrap();
        let cmd = solve_norm_constrained(&p).unwrap();
        assert!((cmd.u - vec2(0.3, 0.4)).amax() < 1e-9);

        let p = ControlProblem::new(DMatrix::identity(2, 2), vec2(2.0 * c, 0.0), ControlConstraint::NormEquality(c)).unwrap();
        let cmd = solve_norm_constrained(&p).unwrap();
        assert!((cmd.u - vec2(c, 0.0)).amax() < 1e-9);
        assert!(cmd.fallback.is_none());
    }

    #[test]
    fn constrained_homogeneous_case() {
        // u* orthogonal to range(U1): any unit direction along the weakest
        // column of U1 is optimal
        let u1 = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let p = ControlProblem::new(u1, DVector::from_vec(vec![0.0, 0.0, 1.0]), ControlConstraint::NormEquality(1.0)).unwrap();
        let cmd = solve_norm_constrained(&p).unwrap();
        assert!((cmd.u.norm() - 1.0).abs() < 1e-12);
        assert!(cmd.u[0].abs() < 1e-12);
    }

    #[test]
    fn constrained_random_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let u1 = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let us = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let c = rng.random_range(0.1..2.0);
            let p = ControlProblem::new(u1.clone(), us.clone(), ControlConstraint::NormEquality(c)).unwrap();
            let cmd = solve_norm_constrained(&p).unwrap();
            assert!((cmd.u.norm() - c).abs() <= 1e-6 * c);
            let grid = circle_grid_min(&p, c, 100_000);
            assert!(cmd.objective <= grid + 1e-4);
            // relaxation ordering
            let free = solve_unconstrained(&p).unwrap();
            assert!(cmd.objective >= p.objective(&free) - 1e-10);
        }
    }

    #[test]
    fn rank_one_hard_case() {
        // one feature row: any u with 2 u_x = 1 fits exactly, so the best
        // point on the circle is (0.5, +-sqrt(c^2 - 0.25)) with lambda = 0
        let p = ControlProblem::new(DMatrix::from_row_slice(1, 2, &[2.0, 0.0]), DVector::from_element(1, 1.0), ControlConstraint::NormEquality(1.0))
            .unwrap();
        let cmd = solve_norm_constrained(&p).unwrap();
        assert!(cmd.objective < 1e-12);
        assert!((cmd.u[0] - 0.5).abs() < 1e-12 && (cmd.u[1].abs() - 0.75f64.sqrt()).abs() < 1e-12);

        let a = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0]);
        let sols = inhomogeneous_eigen(&a, &vec2(2.0, 0.0), 1.0).unwrap();
        assert_eq!(sols.iter().filter(|s| s.lambda.abs() < 1e-12).count(), 2);
    }
}
