//! Non-decreasing step functions on `[0, 1]`: per-client and instance
//! characteristic functions, threshold functions, their decomposition, and
//! the closed-form connection-cost bound `alpha(gamma, h)`.
//!
//! Every function is left-continuous: the value on `(p_{t-1}, p_t]` is
//! `c_t`, and the value at `p = 0` is `c_1`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::relaxation::FractionalSolution;

/// Slack allowed when checking that a normalized profile integrates to 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Intervals shorter than this are dropped when building step functions.
const MIN_WIDTH: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    /// `breakpoints` runs from 0 to 1 strictly increasing; `values[t]` is the
    /// value on `(breakpoints[t], breakpoints[t + 1]]`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::Dimension(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("breakpoints must span [0, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("breakpoints must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("values must be finite and nonnegative".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("values must be non-decreasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![c])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(p_{t-1}, p_t, c_t)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &c)| (w[0], w[1], c))
    }

    pub fn eval(&self, p: f64) -> f64 {
        // First t >= 1 with p <= p_t.
        let t = self.breakpoints[1..].partition_point(|&b| b < p);
        self.values[t.min(self.values.len() - 1)]
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, c)| c * (b - a)).sum()
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.values.iter().map(|v| v * k).collect())
    }

    /// Pointwise sum. Breakpoints are merged; each merged interval takes the
    /// sum of both functions' values on it.
    pub fn add(&self, other: &Self) -> Self {
        let mut bps: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < MIN_WIDTH);
        *bps.last_mut().unwrap() = 1.0;
        bps[0] = 0.0;
        let values = bps
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.eval(mid) + other.eval(mid)
            })
            .collect();
        Self {
            breakpoints: bps,
            values,
        }
    }

    /// Divides by the integral; a zero integral yields [`Profile::Degenerate`].
    pub fn normalize(&self) -> Profile {
        let s = self.integral();
        if s <= 0.0 {
            Profile::Degenerate
        } else {
            Profile::Normalized(Self {
                breakpoints: self.breakpoints.clone(),
                values: self.values.iter().map(|v| v / s).collect(),
            })
        }
    }

    /// CSV with header `p,value`, one row per piece's right endpoint.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,value\n");
        for (_, b, c) in self.pieces() {
            let _ = writeln!(out, "{b},{c}");
        }
        out
    }
}

/// A characteristic function scaled to unit integral, or the marker for an
/// instance whose fractional connection cost is zero.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Normalized(PiecewiseConstant),
    Degenerate,
}

/// One term `weight * h_q` of a threshold decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdTerm {
    pub q: f64,
    pub weight: f64,
}

/// `h_q`: 0 on `[0, q]`, `1/(1-q)` on `(q, 1]`.
pub fn threshold(q: f64) -> Result<PiecewiseConstant> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("threshold q = {q} outside [0, 1)")));
    }
    let top = 1.0 / (1.0 - q);
    if q == 0.0 {
        PiecewiseConstant::constant(top)
    } else {
        PiecewiseConstant::new(vec![0.0, q, 1.0], vec![0.0, top])
    }
}

/// `h = sum_i (c_{i+1} - c_i)(1 - p_i) h_{p_i}` with `c_0 = 0`.
pub fn decompose(h: &PiecewiseConstant) -> Vec<ThresholdTerm> {
    let mut prev = 0.0;
    let mut terms = Vec::new();
    for (a, _, c) in h.pieces() {
        let jump = c - prev;
        if jump > 0.0 {
            terms.push(ThresholdTerm {
                q: a,
                weight: jump * (1.0 - a),
            });
        }
        prev = c;
    }
    terms
}

/// `sum weight * h_q` as a step function.
pub fn reconstruct(terms: &[ThresholdTerm]) -> Result<PiecewiseConstant> {
    let mut acc = PiecewiseConstant::constant(0.0)?;
    for t in terms {
        acc = acc.add(&threshold(t.q)?.scaled(t.weight)?);
    }
    Ok(acc)
}

/// `h_j` for client `j`: facilities of `F_j` sorted by distance (ties by
/// index), breakpoints at the prefix sums of `x_ij`, and on each interval the
/// distance of the first facility whose prefix sum reaches it. In a complete
/// solution `x_ij = y_i` on the support, so these are the `y` prefix sums of
/// the split facilities.
pub fn characteristic_of_client(frac: &FractionalSolution, client: usize) -> Result<PiecewiseConstant> {
    let support = frac
        .support()
        .get(client)
        .ok_or_else(|| Error::InvalidArgument(format!("no client {client}")))?;
    let mut order: Vec<(f64, usize)> = support
        .iter()
        .map(|&i| (frac.distance(client, i), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mass: f64 = support.iter().map(|&i| frac.x(client, i)).sum();
    if mass < 1.0 - NORMALIZATION_TOL {
        return Err(Error::InvalidArgument(format!(
            "client {client} has fractional support mass {mass} < 1"
        )));
    }
    let mut breakpoints = vec![0.0];
    let mut values = Vec::new();
    let mut prefix = 0.0;
    for &(d, i) in &order {
        prefix += frac.x(client, i);
        let end = prefix.min(1.0);
        if end - breakpoints.last().unwrap() < MIN_WIDTH {
            continue;
        }
        breakpoints.push(end);
        values.push(d);
        if end >= 1.0 {
            break;
        }
    }
    *breakpoints.last_mut().unwrap() = 1.0;
    PiecewiseConstant::new(breakpoints, values)
}

/// `h = sum_j h_j`.
pub fn characteristic_of_instance(frac: &FractionalSolution) -> Result<PiecewiseConstant> {
    if frac.client_count() == 0 {
        return Err(Error::InvalidArgument("no clients".into()));
    }
    let mut h = characteristic_of_client(frac, 0)?;
    for j in 1..frac.client_count() {
        h = h.add(&characteristic_of_client(frac, j)?);
    }
    Ok(h)
}

/// Expected connection-cost bound of the filtered rounding with parameter
/// `gamma` against profile `h`:
///
/// `int_0^1 h(p) gamma e^{-gamma p} dp + e^{-gamma} (gamma int h + (3 - gamma) h(1/gamma))`.
///
/// The first integral is exact per piece since
/// `int_a^b gamma e^{-gamma p} dp = e^{-gamma a} - e^{-gamma b}`.
pub fn bound_lemma20(gamma: f64, h: &PiecewiseConstant) -> Result<f64> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be >= 1")));
    }
    let decay: f64 = h
        .pieces()
        .map(|(a, b, c)| c * ((-gamma * a).exp() - (-gamma * b).exp()))
        .sum();
    let tail = (-gamma).exp() * (gamma * h.integral() + (3.0 - gamma) * h.eval(1.0 / gamma));
    Ok(decay + tail)
}

/// [`bound_lemma20`] restricted to profiles with unit integral.
pub fn alpha(gamma: f64, h: &PiecewiseConstant) -> Result<f64> {
    let s = h.integral();
    if (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidArgument(format!(
            "alpha needs a normalized profile, integral is {s}"
        )));
    }
    bound_lemma20(gamma, h)
}
