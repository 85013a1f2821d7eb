//! The UFL linear relaxation
//!
//! ```text
//! min  sum_{i,j} d(i,j) x_ij + sum_i f_i y_i
//! s.t. sum_i x_ij = 1        for every client j
//!      x_ij <= y_i           for every facility i, client j
//!      x, y >= 0
//! ```
//!
//! Variable order: `x` client-major (`x_ij` at `j * n_f + i`), then `y`.
//! Rows: the `n_c` assignment equalities, then `x_ij - y_i <= 0` in the same
//! client-major order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::UflInstance;
use crate::linprog::{solve_lp, LpProblem, LpStatus, Relation, Sense};

/// `x_ij` above this counts as support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

pub fn x_index(inst: &UflInstance, client: usize, facility: usize) -> usize {
    client * inst.facility_count() + facility
}

pub fn y_index(inst: &UflInstance, facility: usize) -> usize {
    inst.client_count() * inst.facility_count() + facility
}

pub fn build_relaxation(inst: &UflInstance) -> LpProblem {
    let (nf, nc) = (inst.facility_count(), inst.client_count());
    let nvars = nf * nc + nf;
    let mut objective = Vec::with_capacity(nvars);
    for j in 0..nc {
        objective.extend_from_slice(inst.row(j));
    }
    objective.extend_from_slice(inst.opening_cost());
    let mut lp = LpProblem::new(Sense::Minimize, objective);
    for j in 0..nc {
        let mut row = vec![0.0; nvars];
        row[j * nf..(j + 1) * nf].iter_mut().for_each(|a| *a = 1.0);
        lp.add_constraint(row, Relation::Eq, 1.0)
            .expect("row width matches");
    }
    for j in 0..nc {
        for i in 0..nf {
            let mut row = vec![0.0; nvars];
            row[x_index(inst, j, i)] = 1.0;
            row[y_index(inst, i)] = -1.0;
            lp.add_constraint(row, Relation::Le, 0.0)
                .expect("row width matches");
        }
    }
    lp
}

/// Optimal fractional solution `(x*, y*)` with per-client supports `F_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    instance: UflInstance,
    x: Vec<f64>,
    y: Vec<f64>,
    support: Vec<Vec<usize>>,
    facility_cost: f64,
    connection_cost: f64,
    objective: f64,
}

impl FractionalSolution {
    /// Assembles a solution from raw values, recomputing supports and costs.
    /// `x` is client-major, `n_c * n_f` long.
    pub fn from_values(instance: &UflInstance, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let (nf, nc) = (instance.facility_count(), instance.client_count());
        if x.len() != nf * nc || y.len() != nf {
            return Err(Error::Dimension(format!(
                "x has {} entries and y {}, expected {} and {nf}",
                x.len(),
                y.len(),
                nf * nc
            )));
        }
        let support: Vec<Vec<usize>> = (0..nc)
            .map(|j| (0..nf).filter(|&i| x[j * nf + i] > SUPPORT_THRESHOLD).collect())
            .collect();
        let facility_cost: f64 = y.iter().zip(instance.opening_cost()).map(|(a, f)| a * f).sum();
        let connection_cost: f64 = (0..nc)
            .flat_map(|j| (0..nf).map(move |i| (j, i)))
            .map(|(j, i)| x[j * nf + i] * instance.distance(j, i))
            .sum();
        Ok(Self {
            instance: instance.clone(),
            x,
            y,
            support,
            facility_cost,
            connection_cost,
            objective: facility_cost + connection_cost,
        })
    }

    pub fn instance(&self) -> &UflInstance {
        &self.instance
    }

    pub fn client_count(&self) -> usize {
        self.instance.client_count()
    }

    pub fn facility_count(&self) -> usize {
        self.instance.facility_count()
    }

    pub fn distance(&self, client: usize, facility: usize) -> f64 {
        self.instance.distance(client, facility)
    }

    pub fn x(&self, client: usize, facility: usize) -> f64 {
        self.x[client * self.facility_count() + facility]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// `F_j` for every client, facilities in index order.
    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    /// `F* = sum_i f_i y_i`.
    pub fn facility_cost(&self) -> f64 {
        self.facility_cost
    }

    /// `C* = sum_{i,j} d(i,j) x_ij`.
    pub fn connection_cost(&self) -> f64 {
        self.connection_cost
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn to_export(&self) -> FractionalExport {
        let nf = self.facility_count();
        let mut x = Vec::new();
        for j in 0..self.client_count() {
            for i in 0..nf {
                let v = self.x[j * nf + i];
                if v != 0.0 {
                    x.push((j, i, v));
                }
            }
        }
        FractionalExport {
            y: self.y.clone(),
            x,
            facility_cost: self.facility_cost,
            connection_cost: self.connection_cost,
            objective: self.objective,
        }
    }

    pub fn from_export(instance: &UflInstance, export: &FractionalExport) -> Result<Self> {
        let (nf, nc) = (instance.facility_count(), instance.client_count());
        let mut x = vec![0.0; nf * nc];
        for &(j, i, v) in &export.x {
            if j >= nc || i >= nf {
                return Err(Error::Dimension(format!("x entry ({j}, {i}) out of range")));
            }
            x[j * nf + i] = v;
        }
        Self::from_values(instance, x, export.y.clone())
    }
}

/// JSON document for a fractional solution; `x` holds sparse
/// `(client, facility, value)` triplets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalExport {
    pub y: Vec<f64>,
    pub x: Vec<(usize, usize, f64)>,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub objective: f64,
}

impl FractionalExport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn solve_relaxation(inst: &UflInstance) -> Result<FractionalSolution> {
    let lp = build_relaxation(inst);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        status => {
            return Err(Error::Solver(format!(
                "relaxation LP ended with status {status:?} after {} pivots",
                sol.iterations
            )))
        }
    }
    let n = inst.facility_count() * inst.client_count();
    let x: Vec<f64> = sol.x[..n].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    // A zero-cost facility may sit above 1 at an optimal vertex; capping it
    // keeps x <= y and leaves the objective unchanged.
    let y: Vec<f64> = sol.x[n..].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    FractionalSolution::from_values(inst, x, y)
}
