//! Constructive witness search for weighted affine escape problems: given
//! rows `r_i`, offsets `b_i`, weights `lambda_i` and a ball exponent `p`,
//! find `x` in the unit `l_p` ball with `|(Ax)_i - b_i| >= lambda_i` for
//! every row.
//!
//! The search enumerates sign patterns `tau` for `(Ax)_i - b_i`; each
//! pattern turns the absolute values into linear constraints and reduces to
//! a feasibility subproblem (a box LP for `p = infinity`, a minimum-norm
//! problem otherwise). Whenever the instance satisfies the plank hypothesis
//! `sum_i lambda_i / ||r_i||_q <= 1`, a witness is guaranteed to exist, so
//! an exhausted search under the hypothesis is reported as an internal
//! contradiction rather than a miss.

use crate::defaults::{CHECK_TOL, ENUM_CAP, FEAS_TOL};
use crate::linalg::{dot, dual_extremizer, lp_norm, row_dual_norms, Matrix, PExponent};
use crate::minnorm::min_pnorm_point;
use crate::simplex::{solve_lp, LinearProgram, Relation};
use crate::{Error, Result};

/// Escape margins: one shared `t` or one `lambda_i` per row.
#[derive(Debug, Clone)]
pub enum Weights {
    Uniform(f64),
    PerRow(Vec<f64>),
}

/// A witness-search instance `(A, p, b, lambda)`.
///
/// The plank hypothesis sum `sum_i lambda_i / ||r_i||_q` is computed at
/// construction and carried along: the search still runs when it exceeds 1,
/// but no existence guarantee is claimed.
#[derive(Debug, Clone)]
pub struct EscapeProblem {
    pub matrix: Matrix,
    pub p: PExponent,
    pub offsets: Vec<f64>,
    pub weights: Weights,
    pub hypothesis_sum: f64,
    pub hypothesis_holds: bool,
}

impl EscapeProblem {
    /// `offsets = None` means `b = 0`.
    pub fn new(
        matrix: Matrix,
        p: PExponent,
        offsets: Option<Vec<f64>>,
        weights: Weights,
    ) -> Result<Self> {
        let m = matrix.rows();
        let offsets = offsets.unwrap_or_else(|| vec![0.0; m]);
        if offsets.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: offsets.len(),
            });
        }
        match &weights {
            Weights::Uniform(t) => {
                if !(*t > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "uniform margin must be positive, got {t}"
                    )));
                }
            }
            Weights::PerRow(l) => {
                if l.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: l.len(),
                    });
                }
                if let Some(bad) = l.iter().position(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidInput(format!(
                        "weight {bad} must be strictly positive, got {}",
                        l[bad]
                    )));
                }
            }
        }
        let mut prob = EscapeProblem {
            matrix,
            p,
            offsets,
            weights,
            hypothesis_sum: f64::NAN,
            hypothesis_holds: false,
        };
        prob.hypothesis_sum = hypothesis_sum(&prob.matrix, p, &prob.lambda());
        prob.hypothesis_holds = prob.hypothesis_sum <= 1.0 + 1e-12;
        Ok(prob)
    }

    /// Uniform-margin instance with `b = 0`.
    pub fn uniform(matrix: Matrix, p: PExponent, t: f64) -> Result<Self> {
        EscapeProblem::new(matrix, p, None, Weights::Uniform(t))
    }

    /// The weight vector, materialized per row.
    pub fn lambda(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Uniform(t) => vec![*t; self.matrix.rows()],
            Weights::PerRow(l) => l.clone(),
        }
    }
}

/// `sum_i lambda_i / ||r_i||_q`; infinite when some row is zero.
fn hypothesis_sum(a: &Matrix, p: PExponent, lambda: &[f64]) -> f64 {
    row_dual_norms(a, p)
        .iter()
        .zip(lambda)
        .map(|(&nrm, &l)| if nrm == 0.0 { f64::INFINITY } else { l / nrm })
        .sum()
}

/// The renormalized form fed to the plank theorem: unit functionals
/// `phi_i = r_i / ||r_i||_q`, targets `m_i = b_i / ||r_i||_q`, weights
/// `w_i = lambda_i / ||r_i||_q`, plus a padding functional bringing the
/// weight total to one when the hypothesis sum falls short of it.
///
/// The padding functional is pinned to the first standard basis functional
/// `e_1^*` (dual norm 1 in every `l_q`) so the construction is
/// reproducible.
#[derive(Debug, Clone)]
pub struct NormalizedPlankInstance {
    pub unit_rows: Matrix,
    pub targets: Vec<f64>,
    pub weights: Vec<f64>,
    /// Weight `1 - sum w_i` on the padding functional `e_1^*`, present iff
    /// the sum falls below `1 - 1e-12`.
    pub padding_weight: Option<f64>,
    pub hypothesis_holds: bool,
}

/// Exact implementation of the renormalization: scales each row and its
/// data by `1 / ||r_i||_q` and pads the weight total up to one.
/// Errors on a zero row, naming its index.
pub fn normalize_instance(prob: &EscapeProblem) -> Result<NormalizedPlankInstance> {
    let a = &prob.matrix;
    let norms = row_dual_norms(a, prob.p);
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroRow(i));
    }
    let lambda = prob.lambda();
    let mut rows = Vec::with_capacity(a.rows());
    let mut targets = Vec::with_capacity(a.rows());
    let mut weights = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        rows.push(a.row(i).iter().map(|v| v / norms[i]).collect::<Vec<_>>());
        targets.push(prob.offsets[i] / norms[i]);
        weights.push(lambda[i] / norms[i]);
    }
    let sum: f64 = weights.iter().sum();
    let padding_weight = (sum < 1.0 - 1e-12).then_some(1.0 - sum);
    Ok(NormalizedPlankInstance {
        unit_rows: Matrix::from_rows(&rows)?,
        targets,
        weights,
        padding_weight,
        hypothesis_holds: sum <= 1.0 + 1e-12,
    })
}

/// A witness plus its achieved data, checkable independently of how it was
/// found.
#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub x: Vec<f64>,
    /// Achieved margins `|(Ax)_i - b_i|`, recomputed from the raw matrix.
    pub margins: Vec<f64>,
    /// `||x||_p`.
    pub ball_norm: f64,
    /// Sign pattern of `(Ax)_i - b_i` used by the subproblem.
    pub pattern: Vec<i8>,
    /// True iff `margins_i >= lambda_i - 1e-9` for every row and
    /// `||x||_p <= 1 + 1e-9`, both re-evaluated from raw inputs.
    pub verified: bool,
}

/// Outcome of a witness search.
#[derive(Debug, Clone)]
pub struct WitnessSearch {
    /// The first verified certificate in enumeration order, if any.
    pub certificate: Option<WitnessCertificate>,
    pub hypothesis_sum: f64,
    pub hypothesis_holds: bool,
    pub patterns_tried: usize,
}

/// Builds and independently verifies a certificate for `x`.
pub fn certify(prob: &EscapeProblem, x: Vec<f64>, pattern: Vec<i8>) -> Result<WitnessCertificate> {
    let lambda = prob.lambda();
    let ax = prob.matrix.matvec(&x)?;
    let margins: Vec<f64> = ax
        .iter()
        .zip(&prob.offsets)
        .map(|(v, b)| (v - b).abs())
        .collect();
    let ball_norm = lp_norm(&x, prob.p);
    let verified = margins
        .iter()
        .zip(&lambda)
        .all(|(m, l)| *m >= l - CHECK_TOL)
        && ball_norm <= 1.0 + CHECK_TOL;
    Ok(WitnessCertificate {
        x,
        margins,
        ball_norm,
        pattern,
        verified,
    })
}

/// Gray-code walk over sign patterns: starts from a base pattern and flips
/// one free position per step, so consecutive subproblems differ in a single
/// row sign.
struct PatternIter {
    base: Vec<i8>,
    free: Vec<usize>,
    k: u64,
    total: u64,
}

impl PatternIter {
    fn new(base: Vec<i8>, free: Vec<usize>) -> Self {
        let total = 1u64 << free.len();
        PatternIter {
            base,
            free,
            k: 0,
            total,
        }
    }
}

impl Iterator for PatternIter {
    type Item = Vec<i8>;

    fn next(&mut self) -> Option<Vec<i8>> {
        if self.k == self.total {
            return None;
        }
        let gray = self.k ^ (self.k >> 1);
        let mut tau = self.base.clone();
        for (bit, &row) in self.free.iter().enumerate() {
            if gray >> bit & 1 == 1 {
                tau[row] = -tau[row];
            }
        }
        self.k += 1;
        Some(tau)
    }
}

/// Heuristic starting pattern: the signs of `A x0` with `x0` the dual
/// extremizer of row 0, so likely-feasible patterns are tried early.
/// Correctness does not depend on this choice.
fn starting_pattern(a: &Matrix, b: &[f64], p: PExponent) -> Vec<i8> {
    let x0 = dual_extremizer(a.row(0), p)
        .map(|(x, _)| x)
        .unwrap_or_else(|_| {
            let mut e = vec![0.0; a.cols()];
            e[0] = 1.0;
            e
        });
    let ax = a.matvec(&x0).expect("dimensions agree");
    ax.iter()
        .zip(b)
        .map(|(v, bi)| if v - bi < 0.0 { -1i8 } else { 1i8 })
        .collect()
}

/// Linear constraints of the pattern subproblem:
/// `tau_i ((Ax)_i - b_i) >= lambda_i`.
fn pattern_constraints(
    a: &Matrix,
    b: &[f64],
    lambda: &[f64],
    tau: &[i8],
) -> Vec<(Vec<f64>, f64)> {
    (0..a.rows())
        .map(|i| {
            let s = tau[i] as f64;
            let coeffs: Vec<f64> = a.row(i).iter().map(|v| v * s).collect();
            (coeffs, lambda[i] + s * b[i])
        })
        .collect()
}

/// Solves one pattern subproblem; `Some(x)` when a candidate witness exists.
///
/// With `b = 0` the constraint data is canonicalized by a global sign flip
/// (first nonzero coefficient made positive, solution negated back), so the
/// searches for `A` and `-A` walk through bitwise-identical subproblems and
/// return mirrored witnesses.
fn solve_pattern(
    n: usize,
    constraints: &[(Vec<f64>, f64)],
    p: PExponent,
    tol: f64,
    canonicalize: bool,
) -> Result<Option<Vec<f64>>> {
    let mut flipped = false;
    let mut cons: Vec<(Vec<f64>, f64)> = constraints.to_vec();
    if canonicalize {
        let first = constraints
            .iter()
            .flat_map(|(a, _)| a.iter())
            .find(|v| **v != 0.0);
        if let Some(&v) = first {
            if v < 0.0 {
                flipped = true;
                for (a, _) in cons.iter_mut() {
                    for c in a.iter_mut() {
                        *c = -*c;
                    }
                }
            }
        }
    }
    let solution = if p.is_infinite() {
        let mut lp = LinearProgram::new(n);
        for j in 0..n {
            lp.set_bounds(j, Some(-1.0), Some(1.0));
        }
        for (coeffs, bound) in &cons {
            lp.add_constraint(coeffs.clone(), Relation::Ge, *bound);
        }
        solve_lp(&lp, tol.min(FEAS_TOL))?.solution
    } else {
        let st = min_pnorm_point(n, &cons, p, tol)?;
        st.solution
    };
    Ok(solution.map(|mut x| {
        if flipped {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        x
    }))
}

/// Exhaustive sign-pattern search with the default enumeration cap.
///
/// Enumerates patterns `tau` in Gray-code order (only `tau_0 = +1` when
/// `b = 0`; the global flip is redundant), solves each feasibility
/// subproblem, and returns the first certificate that passes independent
/// verification. Under the plank hypothesis an empty search is an
/// [`Error::InternalContradiction`]: the theorem guarantees existence, so
/// coming up empty falsifies the implementation or its floating-point
/// assumptions.
pub fn find_witness(prob: &EscapeProblem, tol: f64) -> Result<WitnessSearch> {
    find_witness_with_cap(prob, tol, ENUM_CAP)
}

pub fn find_witness_with_cap(
    prob: &EscapeProblem,
    tol: f64,
    cap: usize,
) -> Result<WitnessSearch> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let m = prob.matrix.rows();
    let n = prob.matrix.cols();
    if m > cap {
        return Err(Error::CapExceeded {
            what: "sign-pattern enumeration",
            limit: cap,
            requested: m,
        });
    }
    let lambda = prob.lambda();
    let b_zero = prob.offsets.iter().all(|&v| v == 0.0);
    let mut base = starting_pattern(&prob.matrix, &prob.offsets, prob.p);
    let free: Vec<usize> = if b_zero {
        // Global sign symmetry: pin tau_0 = +1 by flipping the whole base.
        if base[0] < 0 {
            for s in base.iter_mut() {
                *s = -*s;
            }
        }
        (1..m).collect()
    } else {
        (0..m).collect()
    };

    let mut patterns_tried = 0usize;
    for tau in PatternIter::new(base, free) {
        patterns_tried += 1;
        let cons = pattern_constraints(&prob.matrix, &prob.offsets, &lambda, &tau);
        if let Some(x) = solve_pattern(n, &cons, prob.p, tol, b_zero)? {
            let cert = certify(prob, x, tau)?;
            if cert.verified {
                return Ok(WitnessSearch {
                    certificate: Some(cert),
                    hypothesis_sum: prob.hypothesis_sum,
                    hypothesis_holds: prob.hypothesis_holds,
                    patterns_tried,
                });
            }
        }
    }
    if prob.hypothesis_holds {
        return Err(Error::InternalContradiction(format!(
            "no verified witness after {patterns_tried} patterns although the plank \
             hypothesis holds (sum = {:.6})",
            prob.hypothesis_sum
        )));
    }
    Ok(WitnessSearch {
        certificate: None,
        hypothesis_sum: prob.hypothesis_sum,
        hypothesis_holds: false,
        patterns_tried,
    })
}

/// Result of optimizing the uniform margin `t` over the unit `l_p` ball.
#[derive(Debug, Clone)]
pub struct MarginResult {
    /// Best `t` with `|Ax| >= t e` attainable for `||x||_p <= 1`.
    pub t_star: f64,
    pub certificate: WitnessCertificate,
    /// `(sum_i 1 / ||r_i||_q)^-1`: the weighted escape theorem guarantees
    /// `t_star` at least this large whenever all rows are nonzero.
    pub guarantee: f64,
    /// Set when a zero row forces `t_star = 0`.
    pub zero_row: Option<usize>,
}

/// Maximizes the uniform margin: over each sign pattern `tau`, the best `t`
/// with `tau_i (Ax)_i >= t` and `||x||_p <= 1`, then the best pattern.
///
/// For `p = infinity` each pattern is a single LP in `(x, t)`. For finite
/// `p` the margin constraints are homogeneous, so the minimum-norm solution
/// of `tau_i (Ax)_i >= 1` scales linearly and the pattern optimum is exactly
/// `1 / min-norm`; no bisection over `t` is needed.
pub fn max_uniform_margin(a: &Matrix, p: PExponent) -> Result<MarginResult> {
    max_uniform_margin_with_cap(a, p, ENUM_CAP)
}

pub fn max_uniform_margin_with_cap(a: &Matrix, p: PExponent, cap: usize) -> Result<MarginResult> {
    let m = a.rows();
    let n = a.cols();
    if m > cap {
        return Err(Error::CapExceeded {
            what: "sign-pattern enumeration",
            limit: cap,
            requested: m,
        });
    }
    let norms = row_dual_norms(a, p);
    let zeros = vec![0.0; m];
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        // A zero row caps every margin at zero; report rather than search.
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        let ax = a.matvec(&e)?;
        let margins = ax.iter().map(|v| v.abs()).collect();
        return Ok(MarginResult {
            t_star: 0.0,
            certificate: WitnessCertificate {
                x: e,
                margins,
                ball_norm: 1.0,
                pattern: vec![1; m],
                verified: true,
            },
            guarantee: 0.0,
            zero_row: Some(i),
        });
    }
    let guarantee = 1.0 / norms.iter().map(|v| 1.0 / v).sum::<f64>();

    let mut base = starting_pattern(a, &zeros, p);
    if base[0] < 0 {
        for s in base.iter_mut() {
            *s = -*s;
        }
    }
    let free: Vec<usize> = (1..m).collect();

    let mut best: Option<(f64, Vec<f64>, Vec<i8>)> = None;
    for tau in PatternIter::new(base, free) {
        let solved = if p.is_infinite() {
            solve_margin_lp(a, &tau)?
        } else {
            solve_margin_scaling(a, &tau, p)?
        };
        if let Some((t, x)) = solved {
            if best.as_ref().is_none_or(|(bt, _, _)| t > *bt) {
                best = Some((t, x, tau));
            }
        }
    }
    let (t_star, x, pattern) =
        best.expect("t = 0 is feasible for every pattern, so some pattern solves");
    let ax = a.matvec(&x)?;
    let margins: Vec<f64> = ax.iter().map(|v| v.abs()).collect();
    let ball_norm = lp_norm(&x, p);
    let verified =
        margins.iter().all(|mu| *mu >= t_star - CHECK_TOL) && ball_norm <= 1.0 + CHECK_TOL;
    Ok(MarginResult {
        t_star,
        certificate: WitnessCertificate {
            x,
            margins,
            ball_norm,
            pattern,
            verified,
        },
        guarantee,
        zero_row: None,
    })
}

/// One margin LP for `p = infinity`: maximize `t` with
/// `tau_i (Ax)_i - t >= 0` over the cube, canonicalized by a global sign
/// flip for determinism under `A -> -A`.
fn solve_margin_lp(a: &Matrix, tau: &[i8]) -> Result<Option<(f64, Vec<f64>)>> {
    let m = a.rows();
    let n = a.cols();
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let s = tau[i] as f64;
            a.row(i).iter().map(|v| v * s).collect()
        })
        .collect();
    let first = rows
        .iter()
        .flat_map(|r| r.iter())
        .find(|v| **v != 0.0)
        .copied()
        .unwrap_or(1.0);
    let flipped = first < 0.0;
    if flipped {
        for r in rows.iter_mut() {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut lp = LinearProgram::new(n + 1);
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    lp.set_objective(obj);
    for r in &rows {
        let mut coeffs = r.clone();
        coeffs.push(-1.0);
        lp.add_constraint(coeffs, Relation::Ge, 0.0);
    }
    for j in 0..n {
        lp.set_bounds(j, Some(-1.0), Some(1.0));
    }
    lp.set_bounds(n, Some(0.0), None);
    let st = solve_lp(&lp, FEAS_TOL)?;
    Ok(st.solution.map(|sol| {
        let mut x = sol[..n].to_vec();
        if flipped {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        (sol[n], x)
    }))
}

/// Finite-p margin optimum via the scaling identity `t = 1 / min-norm`.
fn solve_margin_scaling(
    a: &Matrix,
    tau: &[i8],
    p: PExponent,
) -> Result<Option<(f64, Vec<f64>)>> {
    let n = a.cols();
    let cons: Vec<(Vec<f64>, f64)> = (0..a.rows())
        .map(|i| {
            let s = tau[i] as f64;
            (a.row(i).iter().map(|v| v * s).collect(), 1.0)
        })
        .collect();
    let Some(x) = solve_pattern(n, &cons, p, crate::defaults::CONVEX_TOL, true)? else {
        return Ok(None);
    };
    let norm = lp_norm(&x, p);
    if norm == 0.0 {
        return Ok(None);
    }
    let t = 1.0 / norm;
    Ok(Some((t, x.iter().map(|v| v * t).collect())))
}
