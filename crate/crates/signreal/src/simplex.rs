//! Dense two-phase simplex for small linear programs.
//!
//! Bland's anti-cycling rule throughout; problem sizes in this crate are tiny
//! (tens of variables and constraints), so numerical robustness beats speed.
//! Reduced costs are recomputed from the tableau every iteration instead of
//! being updated incrementally, which removes drift at quadratic cost.
//!
//! Every reported feasible point is re-verified against the original
//! constraints by an independent pass; a failed re-check surfaces as
//! [`SolveOutcome::ToleranceFailure`], never as a silently wrong answer.

use crate::linalg::dot;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub bound: f64,
}

/// Dense LP: optional maximized objective, row constraints, per-variable box
/// bounds (`None` = unbounded on that side).
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Option<Vec<f64>>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    /// Pure-feasibility program over free variables.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: None,
            constraints: Vec::new(),
            bounds: vec![(None, None); num_vars],
        }
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) {
        self.objective = Some(objective);
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, bound: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            bound,
        });
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<f64>, upper: Option<f64>) {
        self.bounds[var] = (lower, upper);
    }

    fn validate(&self) -> Result<()> {
        if let Some(obj) = &self.objective {
            if obj.len() != self.num_vars {
                return Err(Error::DimensionMismatch {
                    expected: self.num_vars,
                    got: obj.len(),
                });
            }
        }
        for c in &self.constraints {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::DimensionMismatch {
                    expected: self.num_vars,
                    got: c.coeffs.len(),
                });
            }
        }
        if self.bounds.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: self.bounds.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal,
    Feasible,
    Infeasible,
    Unbounded,
    ToleranceFailure,
}

#[derive(Debug, Clone)]
pub struct SolveStatus {
    pub outcome: SolveOutcome,
    pub solution: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
}

impl SolveStatus {
    fn plain(outcome: SolveOutcome) -> Self {
        SolveStatus {
            outcome,
            solution: None,
            objective_value: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Optimal | SolveOutcome::Feasible)
    }
}

/// How an original variable is represented in standard form.
enum VarMap {
    /// `x = lo + y`, `y >= 0`.
    Shift { col: usize, lo: f64 },
    /// `x = up - y`, `y >= 0`.
    Flip { col: usize, up: f64 },
    /// Free variable split `x = y_pos - y_neg`.
    Split { pos: usize, neg: usize },
}

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 20_000;

struct Tableau {
    /// `rows[i]` has `ncols + 1` entries, rhs last.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    art_start: usize,
    pivots: usize,
}

enum PhaseEnd {
    Converged,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let scale = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= scale;
        }
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for k in 0..=self.ncols {
                    let d = self.rows[r][k] * f;
                    self.rows[i][k] -= d;
                }
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Minimizes `cost * z` from the current basis. Only columns below
    /// `allowed` may enter (used to ban artificials in phase 2).
    fn run(&mut self, cost: &[f64], allowed: usize) -> PhaseEnd {
        let cost_scale = cost.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        let enter_eps = 1e-10 * cost_scale;
        loop {
            if self.pivots > MAX_PIVOTS {
                return PhaseEnd::IterationLimit;
            }
            // Reduced costs, recomputed fresh: red_j = c_j - c_B . T_j.
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut red = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    red -= cost[self.basis[i]] * row[j];
                }
                red < -enter_eps
            });
            let Some(j) = entering else {
                return PhaseEnd::Converged;
            };
            // Bland ratio test: min ratio, ties to the lowest basis index.
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.rows.len() {
                let t = self.rows[i][j];
                if t > PIVOT_EPS {
                    let ratio = self.rhs(i) / t;
                    best = match best {
                        None => Some((ratio, i)),
                        Some((r, bi)) => {
                            if ratio < r - 1e-12 * (1.0 + r.abs())
                                || ((ratio - r).abs() <= 1e-12 * (1.0 + r.abs())
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((ratio, i))
                            } else {
                                Some((r, bi))
                            }
                        }
                    };
                }
            }
            match best {
                Some((_, r)) => self.pivot(r, j),
                None => return PhaseEnd::Unbounded,
            }
        }
    }
}

/// Solves the LP. Outcomes:
/// - `Optimal` (objective present) or `Feasible` (pure feasibility), with a
///   solution re-verified against every original constraint within
///   `feas_tol`;
/// - `Infeasible` / `Unbounded` as certified by the two phases;
/// - `ToleranceFailure` when the pivot budget runs out or the re-check
///   fails.
pub fn solve_lp(lp: &LinearProgram, feas_tol: f64) -> Result<SolveStatus> {
    lp.validate()?;
    if !(feas_tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "feas_tol must be positive, got {feas_tol}"
        )));
    }

    for (lo, up) in &lp.bounds {
        if let (Some(l), Some(u)) = (lo, up) {
            if u < l {
                return Ok(SolveStatus::plain(SolveOutcome::Infeasible));
            }
        }
    }

    // Map variables to the nonnegative standard form.
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut upper_rows: Vec<(usize, f64)> = Vec::new(); // y_col <= ub
    let mut n_struct = 0usize;
    for &(lo, up) in &lp.bounds {
        match (lo, up) {
            (Some(l), Some(u)) => {
                maps.push(VarMap::Shift { col: n_struct, lo: l });
                upper_rows.push((n_struct, u - l));
                n_struct += 1;
            }
            (Some(l), None) => {
                maps.push(VarMap::Shift { col: n_struct, lo: l });
                n_struct += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Flip { col: n_struct, up: u });
                n_struct += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split {
                    pos: n_struct,
                    neg: n_struct + 1,
                });
                n_struct += 2;
            }
        }
    }

    // Constraint rows over structural columns.
    let mut raw_rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut coefs = vec![0.0; n_struct];
        let mut shift = 0.0;
        for (j, &a) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    coefs[col] += a;
                    shift += a * lo;
                }
                VarMap::Flip { col, up } => {
                    coefs[col] -= a;
                    shift += a * up;
                }
                VarMap::Split { pos, neg } => {
                    coefs[pos] += a;
                    coefs[neg] -= a;
                }
            }
        }
        raw_rows.push((coefs, c.relation, c.bound - shift));
    }
    for &(col, ub) in &upper_rows {
        let mut coefs = vec![0.0; n_struct];
        coefs[col] = 1.0;
        raw_rows.push((coefs, Relation::Le, ub));
    }

    // Canonical equality form with slack/surplus and artificial columns.
    let m = raw_rows.len();
    let mut needs_slack = Vec::with_capacity(m);
    for (coefs, rel, rhs) in &mut raw_rows {
        if *rhs < 0.0 {
            for v in coefs.iter_mut() {
                *v = -*v;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
            };
        }
        needs_slack.push(*rel != Relation::Eq);
    }
    let n_slack = needs_slack.iter().filter(|&&s| s).count();
    let n_art = raw_rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Le)
        .count();
    let art_start = n_struct + n_slack;
    let ncols = art_start + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = n_struct;
    let mut art_at = art_start;
    for (coefs, rel, rhs) in &raw_rows {
        let mut row = vec![0.0; ncols + 1];
        row[..n_struct].copy_from_slice(coefs);
        row[ncols] = *rhs;
        match rel {
            Relation::Le => {
                row[slack_at] = 1.0;
                basis.push(slack_at);
                slack_at += 1;
            }
            Relation::Ge => {
                row[slack_at] = -1.0;
                slack_at += 1;
                row[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
            Relation::Eq => {
                row[art_at] = 1.0;
                basis.push(art_at);
                art_at += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        basis,
        ncols,
        art_start,
        pivots: 0,
    };

    // Phase 1: minimize the artificial sum.
    if n_art > 0 {
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = 1.0;
        }
        match t.run(&cost, ncols) {
            PhaseEnd::Converged => {}
            PhaseEnd::Unbounded => {
                return Err(Error::ToleranceFailure(
                    "phase-1 objective reported unbounded; it is bounded below by zero".into(),
                ))
            }
            PhaseEnd::IterationLimit => {
                return Ok(SolveStatus::plain(SolveOutcome::ToleranceFailure))
            }
        }
        let infeas: f64 = (0..t.rows.len())
            .filter(|&i| t.basis[i] >= art_start)
            .map(|i| t.rhs(i))
            .sum();
        if infeas > feas_tol {
            return Ok(SolveStatus::plain(SolveOutcome::Infeasible));
        }
        // Drive remaining artificials out of the basis; rows that admit no
        // pivot are redundant and dropped.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| t.rows[i][j].abs() > PIVOT_EPS) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2 (skipped for pure feasibility).
    let mut unbounded = false;
    if let Some(obj) = &lp.objective {
        let mut cost = vec![0.0; ncols];
        for (j, &o) in obj.iter().enumerate() {
            // Maximize obj.x  ==  minimize -(obj.x); constants drop out.
            match maps[j] {
                VarMap::Shift { col, .. } => cost[col] -= o,
                VarMap::Flip { col, .. } => cost[col] += o,
                VarMap::Split { pos, neg } => {
                    cost[pos] -= o;
                    cost[neg] += o;
                }
            }
        }
        match t.run(&cost, t.art_start) {
            PhaseEnd::Converged => {}
            PhaseEnd::Unbounded => unbounded = true,
            PhaseEnd::IterationLimit => {
                return Ok(SolveStatus::plain(SolveOutcome::ToleranceFailure))
            }
        }
    }
    if unbounded {
        return Ok(SolveStatus::plain(SolveOutcome::Unbounded));
    }

    // Extract the structural solution and map it back.
    let mut y = vec![0.0; n_struct];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n_struct {
            y[b] = t.rhs(i);
        }
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Flip { col, up } => up - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();

    if !solution_feasible(lp, &x, feas_tol) {
        return Ok(SolveStatus::plain(SolveOutcome::ToleranceFailure));
    }
    let (outcome, objective_value) = match &lp.objective {
        Some(obj) => (SolveOutcome::Optimal, Some(dot(obj, &x))),
        None => (SolveOutcome::Feasible, None),
    };
    Ok(SolveStatus {
        outcome,
        solution: Some(x),
        objective_value,
    })
}

/// Independent feasibility re-check against the original data. Tolerances
/// scale with the bound magnitude so large-bound rows are not over-penalized.
pub fn solution_feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    if x.len() != lp.num_vars {
        return false;
    }
    for c in &lp.constraints {
        let v = dot(&c.coeffs, x);
        let s = tol * (1.0 + c.bound.abs());
        let ok = match c.relation {
            Relation::Ge => v >= c.bound - s,
            Relation::Le => v <= c.bound + s,
            Relation::Eq => (v - c.bound).abs() <= s,
        };
        if !ok {
            return false;
        }
    }
    for (j, &(lo, up)) in lp.bounds.iter().enumerate() {
        if let Some(l) = lo {
            if x[j] < l - tol * (1.0 + l.abs()) {
                return false;
            }
        }
        if let Some(u) = up {
            if x[j] > u + tol * (1.0 + u.abs()) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::SplitMix64;

    const TOL: f64 = 1e-9;

    #[test]
    fn bounds_only_maximum() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![1.0]);
        lp.set_bounds(0, Some(-1.0), Some(1.0));
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Optimal);
        assert!((st.solution.unwrap()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_upper_bounds_pick_the_tighter() {
        // maximize t s.t. t <= 1, t <= 2.
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        lp.add_constraint(vec![1.0], Relation::Le, 2.0);
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Optimal);
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_halfspaces_are_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0);
        lp.add_constraint(vec![1.0], Relation::Le, 0.0);
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Infeasible);
    }

    #[test]
    fn unbounded_ray_detected() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.0);
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Unbounded);
    }

    #[test]
    fn equality_constraints_via_artificials() {
        // maximize x + y s.t. x + y = 1, x, y >= 0.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Optimal);
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        // x + y = 1 stated twice (scaled); still solvable.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Optimal);
        assert!((st.objective_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_feasibility_reports_feasible_point() {
        let mut lp = LinearProgram::new(2);
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, 1.0);
        lp.set_bounds(0, Some(-1.0), Some(1.0));
        lp.set_bounds(1, Some(-1.0), Some(1.0));
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Feasible);
        assert!(solution_feasible(&lp, &st.solution.unwrap(), TOL));
    }

    #[test]
    fn crossing_box_is_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, Some(1.0), Some(0.0));
        let st = solve_lp(&lp, TOL).unwrap();
        assert_eq!(st.outcome, SolveOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut lp = LinearProgram::new(2);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.0);
        assert!(matches!(
            solve_lp(&lp, TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    /// Brute-force oracle: enumerate all candidate vertices (intersections
    /// of n constraint/bound hyperplanes), keep the feasible ones, maximize.
    fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
        let n = lp.num_vars;
        let obj = lp.objective.as_ref().unwrap();
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for c in &lp.constraints {
            planes.push((c.coeffs.clone(), c.bound));
        }
        for (j, &(lo, up)) in lp.bounds.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            if let Some(l) = lo {
                planes.push((e.clone(), l));
            }
            if let Some(u) = up {
                planes.push((e, u));
            }
        }
        let k = planes.len();
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; n];
        fn rec(
            depth: usize,
            start: usize,
            pick: &mut Vec<usize>,
            planes: &[(Vec<f64>, f64)],
            lp: &LinearProgram,
            obj: &[f64],
            best: &mut Option<f64>,
            k: usize,
        ) {
            let n = lp.num_vars;
            if depth == n {
                let a: Vec<Vec<f64>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
                let b: Vec<f64> = pick.iter().map(|&i| planes[i].1).collect();
                if let Some(x) = crate::linalg::solve_dense_system(&a, &b) {
                    if solution_feasible(lp, &x, 1e-9) {
                        let v = dot(obj, &x);
                        *best = Some(best.map_or(v, |b: f64| b.max(v)));
                    }
                }
                return;
            }
            for i in start..k {
                pick[depth] = i;
                rec(depth + 1, i + 1, pick, planes, lp, obj, best, k);
            }
        }
        rec(0, 0, &mut pick, &planes, lp, obj, &mut best, k);
        best
    }

    #[test]
    fn random_bounded_lps_match_vertex_enumeration() {
        let mut rng = SplitMix64::new(0x5eed_1);
        for case in 0..200 {
            let n = 1 + (rng.next_u64() % 4) as usize;
            let mut lp = LinearProgram::new(n);
            for j in 0..n {
                lp.set_bounds(j, Some(-2.0), Some(2.0));
            }
            // Interior point all constraints must pass, so the LP is feasible.
            let z: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
            let k = (rng.next_u64() % 5) as usize;
            for _ in 0..k {
                let coeffs: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let slack = rng.next_f64();
                let v = dot(&coeffs, &z);
                if rng.next_u64() % 2 == 0 {
                    lp.add_constraint(coeffs, Relation::Le, v + slack);
                } else {
                    lp.add_constraint(coeffs, Relation::Ge, v - slack);
                }
            }
            lp.set_objective((0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect());

            let st = solve_lp(&lp, TOL).unwrap();
            assert_eq!(st.outcome, SolveOutcome::Optimal, "case {case}");
            let oracle = vertex_oracle(&lp).expect("bounded feasible LP has a vertex optimum");
            let got = st.objective_value.unwrap();
            assert!(
                (got - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()),
                "case {case}: simplex {got} vs oracle {oracle}"
            );
        }
    }
}
