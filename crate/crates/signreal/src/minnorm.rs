//! Minimum-`l_p`-norm point subject to linear inequality constraints
//! `a_i . x >= c_i`.
//!
//! Routes by exponent:
//! - `p = 1` and `p = infinity` reduce to LPs through the standard epigraph
//!   reformulation and go to [`crate::simplex`];
//! - finite `p` runs a log-barrier interior path on the smooth convex
//!   objective `||x||_p^p`, followed by a Newton polish on the active-set
//!   KKT system. For `p = 2` the KKT system is linear, so the polish is an
//!   exact least-norm solve and the result is accurate to machine precision.
//!
//! The objective is smoothed as `(x^2 + eps^2)^(p/2)` for `p < 2`, where the
//! second derivative otherwise blows up at zero; `eps` shrinks with the
//! barrier parameter and contributes less than 1e-12 to the final value.
//!
//! Feasible points are always re-checked against the raw constraints before
//! being reported.

use crate::linalg::{dot, lp_norm, solve_dense_system, PExponent};
use crate::simplex::{solve_lp, LinearProgram, Relation, SolveOutcome, SolveStatus};
use crate::{Error, Result};

const MU_MIN: f64 = 1e-12;
const MU_FACTOR: f64 = 0.15;

/// Minimizes `||x||_p` over `{x : a_i . x >= c_i for all i}` in `n` variables.
///
/// Returns `Optimal` with the minimizer, `Infeasible` when the polyhedron is
/// empty, or `ToleranceFailure` when convergence could not be certified.
/// An empty constraint list is vacuous: the minimum-norm point is `0`.
pub fn min_pnorm_point(
    n: usize,
    constraints: &[(Vec<f64>, f64)],
    p: PExponent,
    tol: f64,
) -> Result<SolveStatus> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    for (a, _) in constraints {
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
    }
    // Vacuous constraints, or 0 already feasible: the origin is the minimum.
    if constraints.iter().all(|&(_, c)| c <= 0.0) {
        return Ok(SolveStatus {
            outcome: SolveOutcome::Optimal,
            solution: Some(vec![0.0; n]),
            objective_value: Some(0.0),
        });
    }

    let status = match p {
        PExponent::One => min_norm_lp(n, constraints, tol, /*sum_form=*/ true)?,
        PExponent::Infinity => min_norm_lp(n, constraints, tol, /*sum_form=*/ false)?,
        PExponent::Two => min_norm_interior(n, constraints, 2.0, tol)?,
        PExponent::Other(pv) => min_norm_interior(n, constraints, pv, tol)?,
    };
    let Some(x) = status.solution else {
        return Ok(status);
    };
    if !constraints_satisfied(constraints, &x, tol) {
        return Ok(SolveStatus {
            outcome: SolveOutcome::ToleranceFailure,
            solution: None,
            objective_value: None,
        });
    }
    Ok(SolveStatus {
        outcome: SolveOutcome::Optimal,
        objective_value: Some(lp_norm(&x, p)),
        solution: Some(x),
    })
}

/// Independent feasibility check `a_i . x >= c_i - tol * (1 + |c_i|)`.
pub fn constraints_satisfied(constraints: &[(Vec<f64>, f64)], x: &[f64], tol: f64) -> bool {
    constraints
        .iter()
        .all(|(a, c)| dot(a, x) >= c - tol * (1.0 + c.abs()))
}

/// Epigraph LPs: `p = 1` minimizes `sum s_j` with `-s_j <= x_j <= s_j`;
/// `p = infinity` minimizes a single `t` with `-t <= x_j <= t`.
fn min_norm_lp(
    n: usize,
    constraints: &[(Vec<f64>, f64)],
    tol: f64,
    sum_form: bool,
) -> Result<SolveStatus> {
    let extra = if sum_form { n } else { 1 };
    let mut lp = LinearProgram::new(n + extra);
    let mut obj = vec![0.0; n + extra];
    for o in obj.iter_mut().skip(n) {
        *o = -1.0; // maximize -(sum of epigraph vars)
    }
    lp.set_objective(obj);
    for j in 0..n {
        let epi = if sum_form { n + j } else { n };
        let mut up = vec![0.0; n + extra];
        up[j] = -1.0;
        up[epi] = 1.0;
        lp.add_constraint(up, Relation::Ge, 0.0); // s >= x_j
        let mut dn = vec![0.0; n + extra];
        dn[j] = 1.0;
        dn[epi] = 1.0;
        lp.add_constraint(dn, Relation::Ge, 0.0); // s >= -x_j
    }
    for (a, c) in constraints {
        let mut coeffs = a.clone();
        coeffs.resize(n + extra, 0.0);
        lp.add_constraint(coeffs, Relation::Ge, *c);
    }
    for j in 0..extra {
        lp.set_bounds(n + j, Some(0.0), None);
    }
    let st = solve_lp(&lp, tol.min(crate::defaults::FEAS_TOL))?;
    Ok(SolveStatus {
        objective_value: None,
        solution: st.solution.map(|x| x[..n].to_vec()),
        outcome: st.outcome,
    })
}

/// Separable objective `sum_j ((x_j^2 + eps^2)^(p/2) - eps^p)`; `eps = 0`
/// gives `||x||_p^p` exactly (used whenever `p >= 2`).
struct PNormObjective {
    p: f64,
    eps: f64,
}

impl PNormObjective {
    fn value(&self, x: &[f64]) -> f64 {
        let (p, e) = (self.p, self.eps);
        if e == 0.0 {
            x.iter().map(|v| v.abs().powf(p)).sum()
        } else {
            x.iter()
                .map(|v| (v * v + e * e).powf(p / 2.0) - e.powf(p))
                .sum()
        }
    }

    /// Gradient and diagonal Hessian.
    fn grad_hess(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (p, e) = (self.p, self.eps);
        let mut g = Vec::with_capacity(x.len());
        let mut hd = Vec::with_capacity(x.len());
        for &v in x {
            if e == 0.0 {
                let a = v.abs();
                g.push(if a == 0.0 {
                    0.0
                } else {
                    p * v.signum() * a.powf(p - 1.0)
                });
                hd.push(if a == 0.0 && p > 2.0 {
                    0.0
                } else if p == 2.0 {
                    2.0
                } else {
                    p * (p - 1.0) * a.powf(p - 2.0)
                });
            } else {
                let t = v * v + e * e;
                g.push(p * v * t.powf(p / 2.0 - 1.0));
                hd.push(p * t.powf(p / 2.0 - 2.0) * ((p - 1.0) * v * v + e * e));
            }
        }
        (g, hd)
    }
}

fn smoothing_eps(p: f64, mu: f64) -> f64 {
    if p >= 2.0 {
        0.0
    } else {
        (mu.sqrt() * 0.01).clamp(1e-9, 1e-3)
    }
}

/// Strictly feasible start via the max-slack LP `max s : a_i.x - s >= c_i,
/// s <= 1`. Returns the point and its worst slack.
fn interior_start(n: usize, constraints: &[(Vec<f64>, f64)], tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut lp = LinearProgram::new(n + 1);
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    lp.set_objective(obj);
    for (a, c) in constraints {
        let mut coeffs = a.clone();
        coeffs.push(-1.0);
        lp.add_constraint(coeffs, Relation::Ge, *c);
    }
    lp.set_bounds(n, None, Some(1.0));
    let st = solve_lp(&lp, tol.min(crate::defaults::FEAS_TOL))?;
    match st.outcome {
        SolveOutcome::Optimal => {
            let sol = st.solution.expect("optimal LP carries a solution");
            let s = sol[n];
            Ok((sol[..n].to_vec(), s))
        }
        SolveOutcome::Infeasible => Ok((vec![0.0; n], f64::NEG_INFINITY)),
        _ => Err(Error::ToleranceFailure(
            "max-slack LP for the interior start did not converge".into(),
        )),
    }
}

fn min_norm_interior(
    n: usize,
    constraints: &[(Vec<f64>, f64)],
    p: f64,
    tol: f64,
) -> Result<SolveStatus> {
    let (x0, worst) = interior_start(n, constraints, tol)?;
    if worst < -1e-9 {
        return Ok(SolveStatus {
            outcome: SolveOutcome::Infeasible,
            solution: None,
            objective_value: None,
        });
    }
    // Thin (empty-interior) polyhedron: retreat the constraints by half a
    // verification tolerance so the barrier has room; the polish below
    // re-targets the original boundaries.
    let g_rows: Vec<Vec<f64>> = constraints.iter().map(|(a, _)| a.clone()).collect();
    let mut h: Vec<f64> = constraints.iter().map(|&(_, c)| c).collect();
    let x0 = if worst < 1e-8 {
        for b in h.iter_mut() {
            *b -= 5e-10 * (1.0 + b.abs());
        }
        let relaxed: Vec<(Vec<f64>, f64)> =
            g_rows.iter().cloned().zip(h.iter().cloned()).collect();
        let (x0r, wr) = interior_start(n, &relaxed, tol)?;
        if wr <= 0.0 {
            return Ok(SolveStatus {
                outcome: SolveOutcome::ToleranceFailure,
                solution: None,
                objective_value: None,
            });
        }
        x0r
    } else {
        x0
    };

    let mut x = x0;
    let k = g_rows.len() as f64;
    let start_obj = PNormObjective {
        p,
        eps: smoothing_eps(p, 1.0),
    };
    let mut mu = (start_obj.value(&x) / k).max(1.0);
    let mut converged = false;
    for _outer in 0..200 {
        let obj = PNormObjective {
            p,
            eps: smoothing_eps(p, mu),
        };
        if !newton_center(&obj, &g_rows, &h, mu, &mut x) {
            return Ok(SolveStatus {
                outcome: SolveOutcome::ToleranceFailure,
                solution: None,
                objective_value: None,
            });
        }
        if mu < MU_MIN {
            converged = true;
            break;
        }
        mu *= MU_FACTOR;
    }
    if !converged {
        return Ok(SolveStatus {
            outcome: SolveOutcome::ToleranceFailure,
            solution: None,
            objective_value: None,
        });
    }

    // Newton polish on the active-set KKT system, against the ORIGINAL
    // bounds. Exact in one step for p = 2.
    let orig: Vec<f64> = constraints.iter().map(|&(_, c)| c).collect();
    if let Some(xp) = polish(&g_rows, &orig, p, &x, MU_MIN / MU_FACTOR) {
        x = xp;
    }
    Ok(SolveStatus {
        outcome: SolveOutcome::Optimal,
        solution: Some(x),
        objective_value: None,
    })
}

/// Damped Newton centering for `f(x) - mu * sum ln(g_i.x - h_i)`.
fn newton_center(
    obj: &PNormObjective,
    g: &[Vec<f64>],
    h: &[f64],
    mu: f64,
    x: &mut Vec<f64>,
) -> bool {
    let n = x.len();
    let slacks = |x: &[f64]| -> Option<Vec<f64>> {
        let s: Vec<f64> = g.iter().zip(h).map(|(gi, &hi)| dot(gi, x) - hi).collect();
        if s.iter().all(|&v| v > 0.0) {
            Some(s)
        } else {
            None
        }
    };
    let psi = |x: &[f64]| -> Option<f64> {
        let s = slacks(x)?;
        Some(obj.value(x) - mu * s.iter().map(|v| v.ln()).sum::<f64>())
    };
    let Some(mut psi_x) = psi(x) else { return false };
    for _ in 0..60 {
        let s = slacks(x).expect("iterates stay strictly feasible");
        let (mut grad, hd) = obj.grad_hess(x);
        let mut hess = vec![vec![0.0; n]; n];
        for (j, row) in hess.iter_mut().enumerate() {
            row[j] = hd[j] + 1e-12;
        }
        for (gi, &si) in g.iter().zip(&s) {
            let w = mu / (si * si);
            for a in 0..n {
                grad[a] -= mu * gi[a] / si;
                for b in 0..n {
                    hess[a][b] += w * gi[a] * gi[b];
                }
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|v| -v).collect();
        let Some(d) = solve_dense_system(&hess, &neg_grad) else {
            return false;
        };
        let decrement = -dot(&grad, &d);
        if decrement <= 1e-13 * (1.0 + psi_x.abs()) {
            return true;
        }
        // Largest step keeping every slack positive, then Armijo backtracking.
        let mut alpha: f64 = 1.0;
        for (gi, &si) in g.iter().zip(&s) {
            let gd = dot(gi, &d);
            if gd < 0.0 {
                alpha = alpha.min(-si / gd * 0.99);
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            if let Some(v) = psi(&cand) {
                if v <= psi_x - 0.25 * alpha * decrement {
                    *x = cand;
                    psi_x = v;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No descent at machine scale: already centered.
            return true;
        }
    }
    true
}

/// Newton iteration on the KKT conditions of `min f(x) : G_J x = h_J`, with
/// the active set read off the interior-point solution. The candidate is
/// validated against all constraints and the pre-polish objective; on any
/// failure the caller keeps the interior-point iterate.
fn polish(g: &[Vec<f64>], h: &[f64], p: f64, x_hat: &[f64], mu_final: f64) -> Option<Vec<f64>> {
    let n = x_hat.len();
    let obj = PNormObjective {
        p,
        eps: if p < 2.0 { 1e-10 } else { 0.0 },
    };
    let scale = h.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let act_tol = (10.0 * mu_final.sqrt()).max(1e-6 * scale);
    let active: Vec<usize> = g
        .iter()
        .zip(h)
        .enumerate()
        .filter(|(_, (gi, &hi))| dot(gi, x_hat) - hi < act_tol)
        .map(|(i, _)| i)
        .collect();
    if active.is_empty() {
        return None;
    }
    let k = active.len();
    let mut x = x_hat.to_vec();
    let mut nu: Vec<f64> = active
        .iter()
        .map(|&i| mu_final / (dot(&g[i], x_hat) - h[i]).max(1e-30))
        .collect();
    for _ in 0..40 {
        let (grad, hd) = obj.grad_hess(&x);
        let mut r = vec![0.0; n + k];
        for j in 0..n {
            r[j] = grad[j];
            for (t, &i) in active.iter().enumerate() {
                r[j] -= g[i][j] * nu[t];
            }
        }
        for (t, &i) in active.iter().enumerate() {
            r[n + t] = dot(&g[i], &x) - h[i];
        }
        let resid = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if resid < 1e-12 * (1.0 + scale) {
            break;
        }
        let mut kkt = vec![vec![0.0; n + k]; n + k];
        for (j, row) in kkt.iter_mut().enumerate().take(n) {
            row[j] = hd[j] + 1e-12;
        }
        for (t, &i) in active.iter().enumerate() {
            for j in 0..n {
                kkt[j][n + t] = -g[i][j];
                kkt[n + t][j] = g[i][j];
            }
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let d = solve_dense_system(&kkt, &rhs)?;
        let step_cap = d[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let damp = if step_cap > 1.0 { 1.0 / step_cap } else { 1.0 };
        for j in 0..n {
            x[j] += damp * d[j];
        }
        for t in 0..k {
            nu[t] += damp * d[n + t];
        }
    }
    // Validation: feasible for every constraint, objective not worse.
    let feasible = g
        .iter()
        .zip(h)
        .all(|(gi, &hi)| dot(gi, &x) - hi >= -1e-11 * (1.0 + hi.abs()));
    let improved = obj.value(&x) <= obj.value(x_hat) + 1e-10 * (1.0 + obj.value(x_hat));
    (feasible && improved).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::SplitMix64;

    const TOL: f64 = 1e-8;

    #[test]
    fn halfspace_projection_p2() {
        let st = min_pnorm_point(2, &[(vec![1.0, 0.0], 1.0)], PExponent::Two, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Optimal);
        let x = st.solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && x[1].abs() < 1e-9);
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_halfspace_p2() {
        let st = min_pnorm_point(2, &[(vec![1.0, 1.0], 2.0)], PExponent::Two, TOL).unwrap();
        let x = st.solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((st.objective_value.unwrap() - 2.0_f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn contradictory_constraints_infeasible() {
        let st = min_pnorm_point(
            1,
            &[(vec![1.0], 1.0), (vec![-1.0], 0.0)],
            PExponent::Two,
            TOL,
        )
        .unwrap();
        assert_eq!(st.outcome, SolveOutcome::Infeasible);
    }

    #[test]
    fn empty_constraint_list_is_the_origin() {
        for p in [
            PExponent::One,
            PExponent::Two,
            PExponent::Other(3.0),
            PExponent::Infinity,
        ] {
            let st = min_pnorm_point(3, &[], p, TOL).unwrap();
            assert_eq!(st.outcome, SolveOutcome::Optimal);
            assert_eq!(st.solution.unwrap(), vec![0.0; 3]);
            assert_eq!(st.objective_value.unwrap(), 0.0);
        }
    }

    #[test]
    fn l1_route_reaches_the_optimal_value() {
        // min ||x||_1 s.t. x1 + x2 >= 2: any (a, 2-a) with a in [0,2] has
        // l1 norm exactly 2.
        let st = min_pnorm_point(2, &[(vec![1.0, 1.0], 2.0)], PExponent::One, TOL).unwrap();
        assert!((st.objective_value.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn linf_route_splits_evenly() {
        // min ||x||_inf s.t. x1 + x2 >= 2 -> t = 1 at (1, 1).
        let st = min_pnorm_point(2, &[(vec![1.0, 1.0], 2.0)], PExponent::Infinity, TOL).unwrap();
        let x = st.solution.unwrap();
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn p3_halfspace_and_symmetric() {
        let st = min_pnorm_point(2, &[(vec![1.0, 0.0], 1.0)], PExponent::Other(3.0), TOL).unwrap();
        let x = st.solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-8 && x[1].abs() < 1e-6, "{x:?}");

        let st = min_pnorm_point(2, &[(vec![1.0, 1.0], 2.0)], PExponent::Other(3.0), TOL).unwrap();
        let x = st.solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] - 1.0).abs() < 1e-8, "{x:?}");
    }

    #[test]
    fn p15_halfspace() {
        let st = min_pnorm_point(2, &[(vec![1.0, 0.0], 1.0)], PExponent::Other(1.5), TOL).unwrap();
        let x = st.solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-7 && x[1].abs() < 1e-4, "{x:?}");
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-7);
    }

    /// Dykstra's alternating-projection scheme: on an intersection of
    /// halfspaces it converges to the true Euclidean projection of the
    /// origin, i.e. the minimum-2-norm point. Fully independent of the
    /// interior-point path.
    fn dykstra(constraints: &[(Vec<f64>, f64)], n: usize) -> Vec<f64> {
        let project = |x: &[f64], a: &[f64], c: f64| -> Vec<f64> {
            let v = dot(a, x);
            if v >= c {
                return x.to_vec();
            }
            let nn = dot(a, a);
            x.iter()
                .zip(a)
                .map(|(xi, ai)| xi + (c - v) / nn * ai)
                .collect()
        };
        let mut x = vec![0.0; n];
        let mut corr = vec![vec![0.0; n]; constraints.len()];
        for _ in 0..20_000 {
            for (ci, (a, c)) in constraints.iter().enumerate() {
                let y: Vec<f64> = x.iter().zip(&corr[ci]).map(|(xi, pi)| xi + pi).collect();
                let z = project(&y, a, *c);
                for j in 0..n {
                    corr[ci][j] = y[j] - z[j];
                }
                x = z;
            }
        }
        x
    }

    #[test]
    fn p2_agrees_with_dykstra_on_random_two_halfspace_instances() {
        let mut rng = SplitMix64::new(0xd175);
        for case in 0..40 {
            let n = 2 + (rng.next_u64() % 3) as usize;
            let mut cons = Vec::new();
            for _ in 0..2 {
                let a: Vec<f64> = (0..n).map(|_| rng.next_in(-1.0, 1.0)).collect();
                if lp_norm(&a, PExponent::Two) < 0.1 {
                    continue;
                }
                cons.push((a, rng.next_in(-0.5, 1.5)));
            }
            if cons.len() < 2 {
                continue;
            }
            let st = min_pnorm_point(n, &cons, PExponent::Two, TOL).unwrap();
            if st.outcome != SolveOutcome::Optimal {
                continue; // the two halfspaces may genuinely be disjoint
            }
            let x = st.solution.unwrap();
            let oracle = dykstra(&cons, n);
            for j in 0..n {
                assert!(
                    (x[j] - oracle[j]).abs() < 1e-6,
                    "case {case}: {x:?} vs oracle {oracle:?}"
                );
            }
        }
    }

    #[test]
    fn tight_single_row_hits_the_sphere_exactly() {
        // min ||x||_p s.t. <r, x> >= ||r||_q is tight: the optimum is the
        // dual extremizer, at norm exactly 1. Exercises polish accuracy.
        let r = vec![0.3, -1.2, 0.7];
        for p in [PExponent::Two, PExponent::Other(3.0)] {
            let q = p.conjugate();
            let target = lp_norm(&r, q);
            let st = min_pnorm_point(3, &[(r.clone(), target)], p, TOL).unwrap();
            let norm = st.objective_value.unwrap();
            assert!(
                (norm - 1.0).abs() < 1e-9,
                "p={p:?}: min norm {norm} should be 1"
            );
        }
    }
}
