//! Dense two-phase simplex and the matrix-game reduction built on it.
//!
//! Problems are converted to `min c'x', A'x' {<=,=,>=} b', x' >= 0` with
//! nonnegative right-hand sides, solved on a full tableau, and mapped back.
//! Every optimal answer is certified against the original data (primal
//! residual, dual sign conditions, duality gap) before it is reported as
//! optimal; anything that fails the certificate is reported as
//! [`LpStatus::NoConvergence`] instead.

use crate::error::{Error, Result};

/// Primal/dual feasibility and relative duality gap accepted on output.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Smallest tableau entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-10;
const OPTIMALITY_TOL: f64 = 1e-9;
/// Phase-one objective above this means the problem is infeasible.
const PHASE_ONE_TOL: f64 = 1e-9;
/// Relative size of the phase-two rhs perturbation.
const PERTURBATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }
}

/// A linear program with dense rows. Variables default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    sense: Sense,
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<usize> {
        if coeffs.len() != self.objective.len() {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite constraint data".into()));
        }
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
        Ok(self.rows.len() - 1)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.objective.len() {
            return Err(Error::Dimension(format!("no variable {var}")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(format!(
                "bad bounds [{lower}, {upper}] for variable {var}"
            )));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> (&[f64], Relation, f64) {
        (&self.rows[i], self.relations[i], self.rhs[i])
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    fn check(&self) -> Result<()> {
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite objective coefficient".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration budget exhausted, or the final basis failed certification.
    NoConvergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values in the caller's variable space.
    pub x: Vec<f64>,
    /// One multiplier per constraint, signed for the caller's sense:
    /// for a minimization `Le` rows carry `y <= 0` and `Ge` rows `y >= 0`.
    pub duals: Vec<f64>,
    /// `c - A^T y` in the caller's space.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `|primal - dual| / max(1, |primal|)`.
    pub duality_gap: f64,
}

impl LpSolution {
    fn without_solution(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            x: vec![0.0; n],
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            iterations,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            duality_gap: f64::NAN,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Hard pivot budget; `None` scales with problem size.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots tolerated before switching from
    /// Dantzig pricing to Bland's rule.
    pub degeneracy_threshold: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: None,
            degeneracy_threshold: 50,
        }
    }
}

pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(problem, &SimplexOptions::default())
}

pub fn solve_lp_with(problem: &LpProblem, options: &SimplexOptions) -> Result<LpSolution> {
    problem.check()?;
    let std = StandardForm::build(problem);
    let mut tab = Tableau::new(&std);
    let budget = options
        .max_iterations
        .unwrap_or(50 * (tab.rows + tab.cols) + 1000);
    let n = problem.num_vars();
    let m = problem.num_constraints();

    if tab.n_art > 0 {
        tab.set_phase_one_costs();
        match tab.run(true, budget, options.degeneracy_threshold) {
            Outcome::Optimal => {}
            Outcome::Budget => {
                return Ok(LpSolution::without_solution(LpStatus::NoConvergence, n, m, tab.iterations))
            }
            // Phase one is bounded below by zero.
            Outcome::Unbounded => {
                return Ok(LpSolution::without_solution(LpStatus::NoConvergence, n, m, tab.iterations))
            }
        }
        let scale = 1.0 + std.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if -tab.obj[tab.cols] > PHASE_ONE_TOL * scale {
            return Ok(LpSolution::without_solution(LpStatus::Infeasible, n, m, tab.iterations));
        }
        tab.drive_out_artificials();
    }

    tab.set_costs(&std.cost);
    tab.perturb_rhs(&std.rhs);
    match tab.run(false, budget, options.degeneracy_threshold) {
        Outcome::Optimal => {}
        Outcome::Budget => {
            return Ok(LpSolution::without_solution(LpStatus::NoConvergence, n, m, tab.iterations))
        }
        Outcome::Unbounded => {
            return Ok(LpSolution::without_solution(LpStatus::Unbounded, n, m, tab.iterations))
        }
    }
    tab.restore_rhs(&std.rhs);
    let settled = tab.dual_cleanup(budget)
        && matches!(tab.run(false, budget, options.degeneracy_threshold), Outcome::Optimal);
    if !settled {
        return Ok(LpSolution::without_solution(LpStatus::NoConvergence, n, m, tab.iterations));
    }

    let xs = tab.primal();
    let ys = tab.row_duals(&std);
    Ok(certify(problem, &std, &xs, &ys, tab.iterations))
}

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = offset + x'
    Shift { col: usize, offset: f64 },
    /// x = offset - x'
    Mirror { col: usize, offset: f64 },
    /// x = x'+ - x'-
    Free { col: usize },
}

struct StandardForm {
    vars: Vec<VarMap>,
    n_struct: usize,
    /// Rows of the standard form, original rows first, then upper-bound rows.
    rows: Vec<Vec<f64>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
    /// Whether the row was negated to make its right-hand side nonnegative.
    flipped: Vec<bool>,
    /// Minimization costs on structural columns.
    cost: Vec<f64>,
    n_orig_rows: usize,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let sign = match p.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut vars = Vec::with_capacity(p.num_vars());
        let mut col = 0;
        let mut bound_rows = Vec::new();
        for j in 0..p.num_vars() {
            let (lo, hi) = (p.lower[j], p.upper[j]);
            let map = if lo.is_finite() {
                if hi.is_finite() {
                    bound_rows.push((col, hi - lo));
                }
                VarMap::Shift { col, offset: lo }
            } else if hi.is_finite() {
                VarMap::Mirror { col, offset: hi }
            } else {
                col += 1;
                VarMap::Free { col: col - 1 }
            };
            col += 1;
            vars.push(map);
        }
        let n_struct = col;

        let expand = |coeffs: &[f64], out: &mut [f64]| -> f64 {
            let mut shift = 0.0;
            for (j, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match vars[j] {
                    VarMap::Shift { col, offset } => {
                        out[col] += a;
                        shift += a * offset;
                    }
                    VarMap::Mirror { col, offset } => {
                        out[col] -= a;
                        shift += a * offset;
                    }
                    VarMap::Free { col } => {
                        out[col] += a;
                        out[col + 1] -= a;
                    }
                }
            }
            shift
        };

        let mut cost = vec![0.0; n_struct];
        let signed: Vec<f64> = p.objective.iter().map(|c| sign * c).collect();
        expand(&signed, &mut cost);

        let mut rows = Vec::with_capacity(p.num_constraints() + bound_rows.len());
        let mut relations = Vec::with_capacity(rows.capacity());
        let mut rhs = Vec::with_capacity(rows.capacity());
        for i in 0..p.num_constraints() {
            let mut r = vec![0.0; n_struct];
            let shift = expand(&p.rows[i], &mut r);
            rows.push(r);
            relations.push(p.relations[i]);
            rhs.push(p.rhs[i] - shift);
        }
        for &(c, width) in &bound_rows {
            let mut r = vec![0.0; n_struct];
            r[c] = 1.0;
            rows.push(r);
            relations.push(Relation::Le);
            rhs.push(width);
        }
        let mut flipped = vec![false; rows.len()];
        for i in 0..rows.len() {
            if rhs[i] < 0.0 {
                rows[i].iter_mut().for_each(|a| *a = -*a);
                rhs[i] = -rhs[i];
                relations[i] = relations[i].flipped();
                flipped[i] = true;
            }
        }
        Self {
            vars,
            n_struct,
            rows,
            relations,
            rhs,
            flipped,
            cost,
            n_orig_rows: p.num_constraints(),
        }
    }

    fn to_original(&self, xs: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|&v| match v {
                VarMap::Shift { col, offset } => offset + xs[col],
                VarMap::Mirror { col, offset } => offset - xs[col],
                VarMap::Free { col } => xs[col] - xs[col + 1],
            })
            .collect()
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    Budget,
}

/// Full simplex tableau. Columns: structural, one slack or surplus per
/// inequality row, one artificial per `>=`/`=` row, then the right-hand side.
struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    t: Vec<f64>,
    /// Reduced costs; `obj[cols]` holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Column holding `+e_i` in the initial tableau for each row.
    unit_col: Vec<usize>,
    art_start: usize,
    n_art: usize,
    iterations: usize,
    scratch: Vec<f64>,
    nz: Vec<usize>,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.rows.len();
        let n_slack = std.relations.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = std.relations.iter().filter(|r| **r != Relation::Le).count();
        let cols = std.n_struct + n_slack + n_art;
        let width = cols + 1;
        let art_start = std.n_struct + n_slack;
        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let (mut next_slack, mut next_art) = (std.n_struct, art_start);
        for i in 0..m {
            let row = &mut t[i * width..(i + 1) * width];
            row[..std.n_struct].copy_from_slice(&std.rows[i]);
            row[cols] = std.rhs[i];
            match std.relations[i] {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Self {
            rows: m,
            cols,
            width,
            t,
            obj: vec![0.0; width],
            basis,
            unit_col,
            art_start,
            n_art,
            iterations: 0,
            scratch: vec![0.0; width],
            nz: Vec::with_capacity(width),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn set_phase_one_costs(&mut self) {
        let mut cost = vec![0.0; self.cols];
        cost[self.art_start..].iter_mut().for_each(|c| *c = 1.0);
        self.price_from(&cost);
    }

    fn set_costs(&mut self, structural: &[f64]) {
        let mut cost = vec![0.0; self.cols];
        cost[..structural.len()].copy_from_slice(structural);
        self.price_from(&cost);
    }

    /// obj = c - c_B B^{-1} A, with the objective value in the last slot.
    fn price_from(&mut self, cost: &[f64]) {
        let w = self.width;
        self.obj[..self.cols].copy_from_slice(cost);
        self.obj[self.cols] = 0.0;
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * w..(i + 1) * w];
            for (o, a) in self.obj.iter_mut().zip(row) {
                *o -= cb * a;
            }
        }
    }

    fn run(&mut self, phase_one: bool, budget: usize, degeneracy_threshold: usize) -> Outcome {
        let enter_limit = if phase_one { self.cols } else { self.art_start };
        let mut bland = false;
        let mut streak = 0usize;
        loop {
            let entering = if bland {
                (0..enter_limit).find(|&j| self.obj[j] < -OPTIMALITY_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..enter_limit {
                    let d = self.obj[j];
                    if d < -OPTIMALITY_TOL && best.is_none_or(|(_, b)| d < b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(s) = entering else {
                return Outcome::Optimal;
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, s);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(i, self.cols).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((r, best, pa)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        let better = if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > pa
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((i, ratio, a))
                        } else {
                            Some((r, best, pa))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return Outcome::Unbounded;
            };

            if ratio <= 1e-12 {
                streak += 1;
                if streak > degeneracy_threshold {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }

            self.pivot(r, s);
            self.iterations += 1;
            if self.iterations > budget {
                return Outcome::Budget;
            }
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let w = self.width;
        let inv = 1.0 / self.t[r * w + s];
        {
            let prow = &mut self.t[r * w..(r + 1) * w];
            prow.iter_mut().for_each(|v| *v *= inv);
            prow[s] = 1.0;
            self.scratch.copy_from_slice(prow);
        }
        self.nz.clear();
        self.nz.extend((0..w).filter(|&k| self.scratch[k] != 0.0));
        let sparse = self.nz.len() * 3 < w;
        let (pivot_row, nz) = (&self.scratch, &self.nz);

        let eliminate = |row: &mut [f64]| {
            let f = row[s];
            if f == 0.0 {
                return;
            }
            if sparse {
                for &k in nz {
                    row[k] -= f * pivot_row[k];
                }
            } else {
                for (a, b) in row.iter_mut().zip(pivot_row) {
                    *a -= f * b;
                }
            }
            row[s] = 0.0;
        };

        for (i, row) in self.t.chunks_exact_mut(w).enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = s;
    }

    /// Shifts every basic value up by a small distinct amount. This is the
    /// rhs of a nearby problem for which the current basis is still feasible
    /// and on which ratio-test ties (and the stalling they cause) are rare.
    fn perturb_rhs(&mut self, rhs: &[f64]) {
        let scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for i in 0..self.rows {
            let u = 1.0 + ((i * 7919) % 1009) as f64 / 1009.0;
            self.t[i * self.width + self.cols] += PERTURBATION * scale * u;
        }
    }

    /// Recomputes basic values for the unperturbed rhs as `B^{-1} b`, reading
    /// `B^{-1}` off the columns that held the initial identity.
    fn restore_rhs(&mut self, rhs: &[f64]) {
        let w = self.width;
        for r in 0..self.rows {
            let row = &self.t[r * w..(r + 1) * w];
            let v: f64 = self.unit_col.iter().zip(rhs).map(|(&k, b)| row[k] * b).sum();
            self.t[r * w + self.cols] = v;
        }
    }

    /// Dual simplex pivots until the basis is primal feasible again. Reduced
    /// costs are untouched by the rhs restore, so the basis starts dual
    /// feasible and usually needs no pivots at all.
    fn dual_cleanup(&mut self, budget: usize) -> bool {
        let w = self.width;
        loop {
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let b = self.t[r * w + self.cols];
                if b < -PIVOT_TOL && leave.is_none_or(|(_, v)| b < v) {
                    leave = Some((r, b));
                }
            }
            let Some((r, _)) = leave else {
                return true;
            };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.art_start {
                let a = self.at(r, j);
                if a < -PIVOT_TOL {
                    let ratio = self.obj[j].max(0.0) / -a;
                    if enter.is_none_or(|(_, v)| ratio < v) {
                        enter = Some((j, ratio));
                    }
                }
            }
            let Some((s, _)) = enter else {
                return false;
            };
            self.pivot(r, s);
            self.iterations += 1;
            if self.iterations > budget {
                return false;
            }
        }
    }

    /// Pivot basic artificials (necessarily at zero after a feasible phase
    /// one) out of the basis where a structural or slack column allows it.
    /// Rows where none does are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows {
            if self.basis[r] < self.art_start {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.art_start {
                let a = self.at(r, j).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for i in 0..self.rows {
            x[self.basis[i]] = self.at(i, self.cols).max(0.0);
        }
        x
    }

    /// Duals of the original rows of the minimization, in the caller's row
    /// orientation (undoing any negation done to fix the rhs sign).
    fn row_duals(&self, std: &StandardForm) -> Vec<f64> {
        (0..std.n_orig_rows)
            .map(|i| {
                let y = -self.obj[self.unit_col[i]];
                if std.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}

fn certify(p: &LpProblem, std: &StandardForm, xs: &[f64], ys_min: &[f64], iterations: usize) -> LpSolution {
    let n = p.num_vars();
    let x = std.to_original(&xs[..std.n_struct]);
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let c_min: Vec<f64> = p.objective.iter().map(|c| sign * c).collect();

    let mut primal_residual = 0.0f64;
    for i in 0..p.num_constraints() {
        let ax: f64 = p.rows[i].iter().zip(&x).map(|(a, v)| a * v).sum();
        let scale = 1.0 + p.rhs[i].abs();
        let v = match p.relations[i] {
            Relation::Le => (ax - p.rhs[i]).max(0.0),
            Relation::Ge => (p.rhs[i] - ax).max(0.0),
            Relation::Eq => (ax - p.rhs[i]).abs(),
        };
        primal_residual = primal_residual.max(v / scale);
    }
    for j in 0..n {
        primal_residual = primal_residual
            .max((p.lower[j] - x[j]).max(0.0))
            .max((x[j] - p.upper[j]).max(0.0));
    }

    let mut r_min = c_min.clone();
    for (i, row) in p.rows.iter().enumerate() {
        let y = ys_min[i];
        if y != 0.0 {
            for (r, a) in r_min.iter_mut().zip(row) {
                *r -= y * a;
            }
        }
    }
    let mut dual_residual = 0.0f64;
    let mut dual_obj = 0.0;
    for i in 0..p.num_constraints() {
        let y = ys_min[i];
        dual_residual = dual_residual.max(match p.relations[i] {
            Relation::Le => y.max(0.0),
            Relation::Ge => (-y).max(0.0),
            Relation::Eq => 0.0,
        });
        dual_obj += y * p.rhs[i];
    }
    for j in 0..n {
        let r = r_min[j];
        if r > 0.0 {
            if p.lower[j].is_finite() {
                dual_obj += r * p.lower[j];
            } else {
                dual_residual = dual_residual.max(r);
            }
        } else if r < 0.0 {
            if p.upper[j].is_finite() {
                dual_obj += r * p.upper[j];
            } else {
                dual_residual = dual_residual.max(-r);
            }
        }
    }
    let primal_obj: f64 = c_min.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duality_gap = (primal_obj - dual_obj).abs() / primal_obj.abs().max(1.0);

    let certified = primal_residual <= FEASIBILITY_TOL
        && dual_residual <= FEASIBILITY_TOL
        && duality_gap <= FEASIBILITY_TOL;
    LpSolution {
        status: if certified {
            LpStatus::Optimal
        } else {
            LpStatus::NoConvergence
        },
        x,
        duals: ys_min.iter().map(|y| sign * y).collect(),
        reduced_costs: r_min.iter().map(|r| sign * r).collect(),
        objective: sign * primal_obj,
        dual_objective: sign * dual_obj,
        iterations,
        primal_residual,
        dual_residual,
        duality_gap,
    }
}

/// Solution of a finite two-player zero-sum game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameResult {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
    /// Constant added to every payoff before solving, subtracted back from
    /// `value`.
    pub shift: f64,
}

impl MatrixGameResult {
    /// Worst case for the row player's mix: `min_j sum_i x_i a_ij`.
    pub fn row_guarantee(&self, payoff: &[Vec<f64>]) -> f64 {
        let cols = payoff[0].len();
        (0..cols)
            .map(|j| payoff.iter().zip(&self.row_mix).map(|(r, x)| r[j] * x).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Worst case for the column player's mix: `max_i sum_j a_ij y_j`.
    pub fn col_guarantee(&self, payoff: &[Vec<f64>]) -> f64 {
        payoff
            .iter()
            .map(|r| r.iter().zip(&self.col_mix).map(|(a, y)| a * y).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Value and optimal mixes of the game where the row player maximizes.
///
/// Payoffs are shifted so the smallest entry is 1, then
/// `max sum w  s.t.  A w <= 1, w >= 0` is solved: `w / sum w` is the column
/// mix, the row duals normalized the same way are the row mix, and the
/// shifted value is `1 / sum w`.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<MatrixGameResult> {
    let rows = payoff.len();
    let cols = payoff.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("empty payoff matrix".into()));
    }
    if payoff.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("ragged payoff matrix".into()));
    }
    if payoff.iter().flatten().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("non-finite payoff".into()));
    }
    let min = payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;

    let mut lp = LpProblem::new(Sense::Maximize, vec![1.0; cols]);
    for r in payoff {
        lp.add_constraint(r.iter().map(|a| a + shift).collect(), Relation::Le, 1.0)?;
    }
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::Solver(format!(
            "matrix game LP ended with status {:?} after {} pivots",
            sol.status, sol.iterations
        )));
    }
    let total = sol.objective;
    Ok(MatrixGameResult {
        value: 1.0 / total - shift,
        row_mix: normalized(&sol.duals),
        col_mix: normalized(&sol.x),
        shift,
    })
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    clipped.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_certified(sol: &LpSolution) {
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.primal_residual <= FEASIBILITY_TOL);
        assert!(sol.dual_residual <= FEASIBILITY_TOL);
        assert!((sol.objective - sol.dual_objective).abs() <= 1e-7 * sol.objective.abs().max(1.0));
    }

    #[test]
    fn single_upper_bound() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 5.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_certified(&sol);
        assert!((sol.objective - 5.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0).unwrap();
        lp.add_constraint(vec![1.0], Relation::Le, 0.0).unwrap();
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_detected() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x - y  with x free, y <= 3, x + y >= -2, x >= -10 via row.
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        lp.set_bounds(1, f64::NEG_INFINITY, 3.0).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, -2.0).unwrap();
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, -10.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_certified(&sol);
        assert!((sol.x[0] + 5.0).abs() < 1e-9, "{:?}", sol.x);
        assert!((sol.x[1] - 3.0).abs() < 1e-9);
        assert!((sol.objective + 8.0).abs() < 1e-9);
    }

    #[test]
    fn boxed_variables_and_equalities() {
        // max 3a + 2b, a + b = 4, 1 <= a <= 2.5, b in [0, 10]
        let mut lp = LpProblem::new(Sense::Maximize, vec![3.0, 2.0]);
        lp.set_bounds(0, 1.0, 2.5).unwrap();
        lp.set_bounds(1, 0.0, 10.0).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 4.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_certified(&sol);
        assert!((sol.objective - 10.5).abs() < 1e-9);
        // a sits at its upper bound with positive reduced profit.
        assert!(sol.reduced_costs[0] > 0.5);
    }

    #[test]
    fn redundant_equalities_survive_phase_one() {
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_certified(&sol);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_budget_reports_no_convergence() {
        let mut lp = LpProblem::new(Sense::Maximize, vec![1.0, 1.0, 1.0]);
        lp.add_constraint(vec![1.0, 2.0, 3.0], Relation::Le, 4.0).unwrap();
        lp.add_constraint(vec![3.0, 1.0, 1.0], Relation::Le, 4.0).unwrap();
        let opts = SimplexOptions {
            max_iterations: Some(0),
            ..SimplexOptions::default()
        };
        assert_eq!(solve_lp_with(&lp, &opts).unwrap().status, LpStatus::NoConvergence);
    }

    #[test]
    fn malformed_rows_rejected() {
        let mut lp = LpProblem::new(Sense::Minimize, vec![1.0, 1.0]);
        assert!(lp.add_constraint(vec![1.0], Relation::Le, 1.0).is_err());
        assert!(lp.set_bounds(0, 2.0, 1.0).is_err());
        assert!(lp.set_bounds(5, 0.0, 1.0).is_err());
    }

    #[test]
    fn rock_paper_scissors() {
        let g = vec![
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, -1.0],
            vec![-1.0, 1.0, 0.0],
        ];
        let res = solve_matrix_game(&g).unwrap();
        assert!(res.value.abs() < 1e-9);
        for p in res.row_mix.iter().chain(&res.col_mix) {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn one_by_one_game() {
        let res = solve_matrix_game(&[vec![1.0]]).unwrap();
        assert!((res.value - 1.0).abs() < 1e-12);
        assert_eq!(res.row_mix, vec![1.0]);
    }

    #[test]
    fn two_by_two_indifference() {
        // Row mix p solves 3p = p + 2(1-p): p = 1/2, value 3/2.
        let g = vec![vec![3.0, 1.0], vec![0.0, 2.0]];
        let res = solve_matrix_game(&g).unwrap();
        assert!((res.value - 1.5).abs() < 1e-9);
        assert!((res.row_mix[0] - 0.5).abs() < 1e-9);
        assert!((res.col_mix[0] - 0.25).abs() < 1e-9);
        assert!((res.row_guarantee(&g) - 1.5).abs() < 1e-9);
        assert!((res.col_guarantee(&g) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn empty_game_rejected() {
        assert!(solve_matrix_game(&[]).is_err());
        assert!(solve_matrix_game(&[vec![]]).is_err());
    }
}
