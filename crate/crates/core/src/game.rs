//! The discretized vector game between an algorithm designer `A` (choosing
//! JMS or the filtered rounding with some `gamma`) and an adversary `B`
//! (choosing a threshold profile `h_q`), with payoff
//!
//! ```text
//! (C_f, C_c) = (gamma, alpha(gamma, h_q))   for a rounding row
//!            = (1.11, 1.78)                 for the JMS row
//! ```
//!
//! Approachability of the corner `{x <= beta, y <= beta}` is decided one
//! supporting line `phi x + (1 - phi) y = beta` at a time: the scalarized
//! zero-sum game has value `V(phi)` (A minimizing), and the line is
//! approachable iff `V(phi) <= beta`. The frontier is `beta* = max_phi V(phi)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::{self, PiecewiseConstant, Profile, ThresholdTerm};
use crate::error::{Error, Result};
use crate::linprog::{solve_lp, solve_matrix_game, LpProblem, LpStatus, Relation, Sense};

/// Facility-cost factor of the JMS greedy.
pub const JMS_FACILITY: f64 = 1.11;
/// Connection-cost factor of the JMS greedy.
pub const JMS_CONNECTION: f64 = 1.78;
/// Smallest `gamma` for which the filtered rounding alone is an optimal
/// bifactor algorithm.
pub const GAMMA_0: f64 = 1.67736;
/// Slack above zero that counts as a strictly positive adversary margin.
pub const BLOCKING_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameGrid {
    pub gamma_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub phi_grid: Vec<f64>,
    pub include_jms: bool,
}

impl GameGrid {
    /// `k_gamma` points evenly spaced on `[1, gamma_max]`, `k_p` points
    /// `0, 1/k_p, ..., (k_p - 1)/k_p`, and `k_phi` points evenly spaced on
    /// `[0, 1]`.
    pub fn uniform(k_gamma: usize, k_p: usize, k_phi: usize, gamma_max: f64, include_jms: bool) -> Result<Self> {
        if k_gamma == 0 || k_p == 0 || k_phi == 0 {
            return Err(Error::InvalidArgument("grid sizes must be positive".into()));
        }
        if !(gamma_max >= 1.0 && gamma_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma_max = {gamma_max} must be >= 1")));
        }
        Self::new(
            linspace(1.0, gamma_max, k_gamma),
            (0..k_p).map(|k| k as f64 / k_p as f64).collect(),
            linspace(0.0, 1.0, k_phi),
            include_jms,
        )
    }

    pub fn new(gamma_grid: Vec<f64>, p_grid: Vec<f64>, phi_grid: Vec<f64>, include_jms: bool) -> Result<Self> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if gamma_grid.is_empty() && !include_jms {
            return Err(Error::InvalidArgument("A has no strategies".into()));
        }
        if p_grid.is_empty() || phi_grid.is_empty() {
            return Err(Error::InvalidArgument("empty p or phi grid".into()));
        }
        if !sorted(&gamma_grid) || !sorted(&p_grid) || !sorted(&phi_grid) {
            return Err(Error::InvalidArgument("grids must be strictly increasing".into()));
        }
        if gamma_grid.iter().any(|g| !(*g >= 1.0 && g.is_finite())) {
            return Err(Error::InvalidArgument("gamma grid must lie in [1, M]".into()));
        }
        if p_grid.iter().any(|p| !(0.0..1.0).contains(p)) {
            return Err(Error::InvalidArgument("p grid must lie in [0, 1)".into()));
        }
        if phi_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("phi grid must lie in [0, 1]".into()));
        }
        Ok(Self {
            gamma_grid,
            p_grid,
            phi_grid,
            include_jms,
        })
    }
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k)
        .map(|i| if i + 1 == k { b } else { a + (b - a) * i as f64 / (k - 1) as f64 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffVector {
    pub c_f: f64,
    pub c_c: f64,
}

/// A pure strategy of the algorithm designer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PureStrategy {
    Jms,
    Rounding { gamma: f64 },
}

pub fn payoff(strategy: PureStrategy, q: f64) -> Result<PayoffVector> {
    let h = charfn::threshold(q)?;
    match strategy {
        PureStrategy::Jms => Ok(PayoffVector {
            c_f: JMS_FACILITY,
            c_c: JMS_CONNECTION,
        }),
        PureStrategy::Rounding { gamma } => Ok(PayoffVector {
            c_f: gamma,
            c_c: charfn::alpha(gamma, &h)?,
        }),
    }
}

/// Both coordinates of the game, rows = A's pure strategies (JMS first when
/// enabled), columns = the `p` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrices {
    rows: Vec<PureStrategy>,
    ps: Vec<f64>,
    facility: Vec<f64>,
    connection: Vec<Vec<f64>>,
}

impl PayoffMatrices {
    pub fn rows(&self) -> &[PureStrategy] {
        &self.rows
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    /// `M_f[r][c]`; constant along each row.
    pub fn facility(&self, row: usize, _col: usize) -> f64 {
        self.facility[row]
    }

    pub fn connection(&self, row: usize, col: usize) -> f64 {
        self.connection[row][col]
    }

    /// `phi M_f + (1 - phi) M_c`, rows = A strategies.
    pub fn scalarized(&self, phi: f64) -> Vec<Vec<f64>> {
        self.connection
            .iter()
            .zip(&self.facility)
            .map(|(row, &f)| row.iter().map(|&c| phi * f + (1.0 - phi) * c).collect())
            .collect()
    }
}

pub fn build_matrices(grid: &GameGrid) -> Result<PayoffMatrices> {
    let mut rows = Vec::with_capacity(grid.gamma_grid.len() + 1);
    if grid.include_jms {
        rows.push(PureStrategy::Jms);
    }
    rows.extend(grid.gamma_grid.iter().map(|&gamma| PureStrategy::Rounding { gamma }));
    let thresholds = grid
        .p_grid
        .iter()
        .map(|&q| charfn::threshold(q))
        .collect::<Result<Vec<_>>>()?;
    let mut facility = Vec::with_capacity(rows.len());
    let mut connection = Vec::with_capacity(rows.len());
    for &s in &rows {
        match s {
            PureStrategy::Jms => {
                facility.push(JMS_FACILITY);
                connection.push(vec![JMS_CONNECTION; grid.p_grid.len()]);
            }
            PureStrategy::Rounding { gamma } => {
                facility.push(gamma);
                connection.push(
                    thresholds
                        .iter()
                        .map(|h| charfn::alpha(gamma, h))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
        }
    }
    Ok(PayoffMatrices {
        rows,
        ps: grid.p_grid.clone(),
        facility,
        connection,
    })
}

/// Mixed strategy of A: JMS with probability `theta`, the filtered
/// rounding with parameter `gamma` with probability `weight`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyA {
    pub theta: f64,
    pub mu: Vec<(f64, f64)>,
}

impl StrategyA {
    pub fn new(theta: f64, mu: Vec<(f64, f64)>) -> Result<Self> {
        if theta < 0.0 || mu.iter().any(|&(g, w)| w < 0.0 || g < 1.0) {
            return Err(Error::InvalidArgument("negative weight or gamma < 1".into()));
        }
        let total = theta + mu.iter().map(|m| m.1).sum::<f64>();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("strategy mass {total} != 1")));
        }
        Ok(Self { theta, mu })
    }

    pub fn pure_jms() -> Self {
        Self { theta: 1.0, mu: Vec::new() }
    }

    pub fn pure_rounding(gamma: f64) -> Self {
        Self {
            theta: 0.0,
            mu: vec![(gamma, 1.0)],
        }
    }

    fn from_rows(rows: &[PureStrategy], weights: &[f64]) -> Self {
        let mut theta = 0.0;
        let mut mu = Vec::new();
        for (s, &w) in rows.iter().zip(weights) {
            match s {
                PureStrategy::Jms => theta += w,
                PureStrategy::Rounding { gamma } => mu.push((*gamma, w)),
            }
        }
        Self { theta, mu }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceResult {
    pub phi: f64,
    /// `min_A max_B` of the scalarized payoff.
    pub value: f64,
    pub a_mix: StrategyA,
    /// Weights over the `p` grid.
    pub b_mix: Vec<f64>,
}

/// Solves the scalarized game for one supporting line. The transposed game
/// (B's thresholds as maximizing rows) is handed to the matrix-game LP, so
/// the LP primal is A's mix and its duals are B's.
pub fn halfspace_value(phi: f64, matrices: &PayoffMatrices) -> Result<HalfspaceResult> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidArgument(format!("phi = {phi} outside [0, 1]")));
    }
    let scalar = matrices.scalarized(phi);
    let cols = matrices.ps.len();
    let transposed: Vec<Vec<f64>> = (0..cols)
        .map(|c| scalar.iter().map(|row| row[c]).collect())
        .collect();
    let game = solve_matrix_game(&transposed)?;
    Ok(HalfspaceResult {
        phi,
        value: game.value,
        a_mix: StrategyA::from_rows(&matrices.rows, &game.col_mix),
        b_mix: game.row_mix,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierResult {
    pub beta_star: f64,
    pub phi_star: f64,
    /// `(phi, V(phi))` over the whole phi grid.
    pub curve: Vec<(f64, f64)>,
    /// Both players' strategies at `phi_star`.
    pub witness: HalfspaceResult,
    pub ps: Vec<f64>,
}

/// `beta* = max_phi V(phi)`. The per-phi games are independent and solved on
/// a pool of `jobs` threads; the reduction runs over the collected curve in
/// grid order, so ties resolve to the smallest phi regardless of `jobs`.
pub fn frontier(grid: &GameGrid, jobs: usize) -> Result<FrontierResult> {
    let matrices = build_matrices(grid)?;
    let per_phi = run_pool(jobs, || {
        grid.phi_grid
            .par_iter()
            .map(|&phi| halfspace_value(phi, &matrices))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut best = 0;
    for (k, r) in per_phi.iter().enumerate() {
        if r.value > per_phi[best].value {
            best = k;
        }
    }
    let curve = per_phi.iter().map(|r| (r.phi, r.value)).collect();
    let witness = per_phi.into_iter().nth(best).expect("phi grid is nonempty");
    Ok(FrontierResult {
        beta_star: witness.value,
        phi_star: witness.phi,
        curve,
        witness,
        ps: grid.p_grid.clone(),
    })
}

fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

impl FrontierResult {
    /// CSV `phi,value`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("phi,value\n");
        for (phi, v) in &self.curve {
            let _ = writeln!(out, "{phi},{v}");
        }
        out
    }

    /// CSV `q,weight` of B's mix at `phi_star`, in grid order.
    pub fn witness_csv(&self) -> String {
        let mut out = String::from("q,weight\n");
        for (q, w) in self.ps.iter().zip(&self.witness.b_mix) {
            let _ = writeln!(out, "{q},{w}");
        }
        out
    }
}

/// Outcome of testing one corner `{x <= beta, y <= beta}`.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaCheck {
    Approachable,
    Blocked {
        phi: f64,
        /// B's mix over the `p` grid.
        b_mix: Vec<f64>,
        /// Margin `t` by which B's mix beats `beta` against every A row.
        margin: f64,
    },
}

/// Largest margin `t` such that some B mix scores at least `beta + t`
/// against every pure A strategy on the line `phi`:
///
/// ```text
/// max t  s.t.  sum_c w_c P_phi(r, c) - t >= beta  for every A row r,
///              sum_c w_c = 1,  w >= 0,  t free.
/// ```
///
/// A positive optimum is a witness that the line is not approachable.
pub fn blocking_margin(phi: f64, beta: f64, matrices: &PayoffMatrices) -> Result<(f64, Vec<f64>)> {
    let cols = matrices.ps.len();
    let mut objective = vec![0.0; cols + 1];
    objective[cols] = 1.0;
    let mut lp = LpProblem::new(Sense::Maximize, objective);
    lp.set_bounds(cols, f64::NEG_INFINITY, f64::INFINITY)?;
    for row in matrices.scalarized(phi) {
        let mut coeffs = row;
        coeffs.push(-1.0);
        lp.add_constraint(coeffs, Relation::Ge, beta)?;
    }
    let mut simplex = vec![1.0; cols + 1];
    simplex[cols] = 0.0;
    lp.add_constraint(simplex, Relation::Eq, 1.0)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "blocking LP at phi = {phi} ended with status {:?}",
            sol.status
        )));
    }
    Ok((sol.objective, sol.x[..cols].to_vec()))
}

/// Tests every grid line; returns the first blocked phi in grid order.
pub fn check_beta(beta: f64, grid: &GameGrid, jobs: usize) -> Result<BetaCheck> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    let matrices = build_matrices(grid)?;
    let margins = run_pool(jobs, || {
        grid.phi_grid
            .par_iter()
            .map(|&phi| blocking_margin(phi, beta, &matrices).map(|m| (phi, m)))
            .collect::<Result<Vec<_>>>()
    })??;
    for (phi, (t, w)) in margins {
        if t > BLOCKING_TOL {
            return Ok(BetaCheck::Blocked {
                phi,
                b_mix: w,
                margin: t,
            });
        }
    }
    Ok(BetaCheck::Approachable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessProfile {
    /// `(q, weight)` sorted by decreasing weight, ties by increasing q.
    pub entries: Vec<(f64, f64)>,
    pub mass_at_smallest_q: f64,
    /// Largest weight on any q other than the smallest grid point.
    pub max_other_weight: f64,
}

impl WitnessProfile {
    /// The adversary's mix read as one characteristic function
    /// `sum weight * h_q`.
    pub fn characteristic(&self) -> Result<PiecewiseConstant> {
        let mut terms: Vec<ThresholdTerm> = self
            .entries
            .iter()
            .filter(|e| e.1 > 0.0)
            .map(|&(q, weight)| ThresholdTerm { q, weight })
            .collect();
        terms.sort_by(|a, b| a.q.total_cmp(&b.q));
        charfn::reconstruct(&terms)
    }
}

pub fn witness_profile(result: &FrontierResult) -> WitnessProfile {
    let mix = &result.witness.b_mix;
    let mut entries: Vec<(f64, f64)> = result.ps.iter().copied().zip(mix.iter().copied()).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let mass_at_smallest_q = mix[0];
    let max_other_weight = mix[1..].iter().copied().fold(0.0, f64::max);
    WitnessProfile {
        entries,
        mass_at_smallest_q,
        max_other_weight,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub gamma: f64,
    pub theta: f64,
    pub ratio: f64,
}

/// The `theta` in `[0, 1]` minimizing `max(C_f(theta), C_c(theta))` for the
/// two lines `C(theta) = (1 - theta) start + theta * jms`.
pub fn balance(facility: f64, connection: f64) -> (f64, f64) {
    let at = |t: f64| {
        ((1.0 - t) * facility + t * JMS_FACILITY).max((1.0 - t) * connection + t * JMS_CONNECTION)
    };
    let mut best = (0.0, at(0.0));
    let slope_diff = (JMS_FACILITY - facility) - (JMS_CONNECTION - connection);
    if slope_diff != 0.0 {
        let t = (connection - facility) / slope_diff;
        if (0.0..=1.0).contains(&t) && at(t) < best.1 {
            best = (t, at(t));
        }
    }
    if at(1.0) < best.1 {
        best = (1.0, at(1.0));
    }
    best
}

/// For a known instance profile, pick the grid `gamma` and mixing `theta`
/// with the smallest balanced ratio (ties to the smaller gamma).
pub fn best_response(profile: &Profile, gammas: &[f64]) -> Result<BestResponse> {
    if gammas.is_empty() {
        return Err(Error::InvalidArgument("empty gamma grid".into()));
    }
    let mut best: Option<BestResponse> = None;
    for &gamma in gammas {
        let (theta, ratio) = match profile {
            Profile::Normalized(h) => balance(gamma, charfn::alpha(gamma, h)?),
            // No connection cost to pay: only the facility coordinate counts.
            Profile::Degenerate => {
                if gamma <= JMS_FACILITY {
                    (0.0, gamma)
                } else {
                    (1.0, JMS_FACILITY)
                }
            }
        };
        if best.is_none_or(|b| ratio < b.ratio) {
            best = Some(BestResponse { gamma, theta, ratio });
        }
    }
    Ok(best.expect("gamma grid is nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyValue {
    pub facility: f64,
    pub connection: f64,
    /// `max(facility, connection)`.
    pub value: f64,
}

pub fn evaluate_strategy(a: &StrategyA, h: &PiecewiseConstant) -> Result<StrategyValue> {
    let mut facility = a.theta * JMS_FACILITY;
    let mut connection = a.theta * JMS_CONNECTION;
    for &(gamma, w) in &a.mu {
        facility += w * gamma;
        connection += w * charfn::alpha(gamma, h)?;
    }
    Ok(StrategyValue {
        facility,
        connection,
        value: facility.max(connection),
    })
}

/// JMS with probability `theta`, a point mass at `gamma_low`, and the rest
/// spread uniformly over `[gamma_low, gamma_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiStrategy {
    pub theta: f64,
    pub point_mass: f64,
    pub gamma_low: f64,
    pub gamma_high: f64,
}

impl Default for LiStrategy {
    /// Parameters refined from theta ~ 0.2, mass ~ 0.5 at ~1.5 and an upper
    /// end ~ 2 by minimizing the worst case over a 200-point threshold grid.
    fn default() -> Self {
        Self {
            theta: 0.2,
            point_mass: 0.5227,
            gamma_low: 1.4956,
            gamma_high: 1.9974,
        }
    }
}

impl LiStrategy {
    /// Discretizes the uniform part with the trapezoid rule on `nodes`
    /// points; the point mass is kept exact.
    pub fn to_strategy(&self, nodes: usize) -> Result<StrategyA> {
        let spread = 1.0 - self.theta - self.point_mass;
        if nodes < 2 || spread < 0.0 || self.gamma_low < 1.0 || !(self.gamma_high > self.gamma_low) {
            return Err(Error::InvalidArgument(format!("bad strategy parameters {self:?}")));
        }
        let width = self.gamma_high - self.gamma_low;
        let step = width / (nodes - 1) as f64;
        let density = spread / width;
        let mut mu: Vec<(f64, f64)> = (0..nodes)
            .map(|k| {
                let g = if k + 1 == nodes { self.gamma_high } else { self.gamma_low + step * k as f64 };
                let w = if k == 0 || k + 1 == nodes { 0.5 } else { 1.0 };
                (g, w * step * density)
            })
            .collect();
        mu[0].1 += self.point_mass;
        StrategyA::new(self.theta, mu)
    }
}

/// The bifactor hardness curve `gamma_c = 1 + 2 e^{-gamma_f}`.
pub fn hardness_curve(gamma_f: f64) -> Result<f64> {
    if !(gamma_f >= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma_f = {gamma_f} must be >= 1")));
    }
    Ok(1.0 + 2.0 * (-gamma_f).exp())
}
