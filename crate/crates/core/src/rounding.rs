//! Filtering, clustering and randomized rounding of a fractional solution.
//!
//! Each original facility `i` owns a line `[0, gamma * y_i]` of scaled
//! opening mass. Client `j` uses the prefix `[0, gamma * x_ij]` of that line.
//! The greedy filter marks the first unit of a client's mass (by distance)
//! as close and the rest as distant. Cutting every line at all client
//! boundaries, at every `gamma * x_ij` and at integers yields pieces that are
//! either fully inside or fully outside any client's close or distant set,
//! so the split solution is complete by construction. Pieces are the
//! co-located copies that clustering and rounding operate on; opening any
//! piece opens its original facility.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::UflInstance;
use crate::relaxation::FractionalSolution;

/// Cut points closer than this on one facility line are merged.
const CUT_TOL: f64 = 1e-12;
/// Slack for the mass and cost invariants.
pub const INVARIANT_TOL: f64 = 1e-9;
/// Trials per reduction chunk in [`estimate_cost`]. Fixed so the summation
/// order, and therefore every output bit, does not depend on thread count.
const CHUNK: usize = 4096;

/// One co-located copy of an original facility: the segment
/// `[start, end)` of that facility's scaled opening line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFacility {
    pub facility: usize,
    pub start: f64,
    pub end: f64,
}

impl SplitFacility {
    /// `ybar` of this copy.
    pub fn mass(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSolution {
    instance: UflInstance,
    gamma: f64,
    pieces: Vec<SplitFacility>,
    close: Vec<Vec<usize>>,
    distant: Vec<Vec<usize>>,
    scaled_y: Vec<f64>,
    lp_facility_cost: f64,
    lp_connection_cost: f64,
}

impl FilteredSolution {
    pub fn instance(&self) -> &UflInstance {
        &self.instance
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pieces(&self) -> &[SplitFacility] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn ybar(&self, piece: usize) -> f64 {
        self.pieces[piece].mass()
    }

    /// Original facility behind each piece.
    pub fn split_map(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.facility).collect()
    }

    /// `F_j^C` as piece indices.
    pub fn close(&self, client: usize) -> &[usize] {
        &self.close[client]
    }

    /// `F_j^D` as piece indices.
    pub fn distant(&self, client: usize) -> &[usize] {
        &self.distant[client]
    }

    /// `xbar_{j,p}`: the piece's full mass if it is close to `j`, else 0.
    pub fn xbar(&self, client: usize, piece: usize) -> f64 {
        if self.close[client].binary_search(&piece).is_ok() {
            self.ybar(piece)
        } else {
            0.0
        }
    }

    pub fn piece_distance(&self, client: usize, piece: usize) -> f64 {
        self.instance.distance(client, self.pieces[piece].facility)
    }

    /// `F*` of the underlying fractional solution.
    pub fn lp_facility_cost(&self) -> f64 {
        self.lp_facility_cost
    }

    /// `C*` of the underlying fractional solution.
    pub fn lp_connection_cost(&self) -> f64 {
        self.lp_connection_cost
    }

    /// Human-readable descriptions of every broken invariant; empty when the
    /// solution is complete and consistent.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (p, piece) in self.pieces.iter().enumerate() {
            let m = piece.mass();
            if !(m > 0.0 && m <= 1.0 + INVARIANT_TOL) {
                out.push(format!("piece {p} has ybar {m} outside (0, 1]"));
            }
        }
        let mut per_facility = vec![0.0; self.instance.facility_count()];
        for piece in &self.pieces {
            per_facility[piece.facility] += piece.mass();
        }
        for (i, (&got, &want)) in per_facility.iter().zip(&self.scaled_y).enumerate() {
            if (got - want).abs() > INVARIANT_TOL {
                out.push(format!("facility {i}: copies carry {got}, gamma * y = {want}"));
            }
        }
        for j in 0..self.close.len() {
            let mass: f64 = self.close[j].iter().map(|&p| self.ybar(p)).sum();
            if (mass - 1.0).abs() > INVARIANT_TOL {
                out.push(format!("client {j}: close mass {mass}"));
            }
            if let Some(p) = self.distant[j].iter().find(|p| self.close[j].binary_search(p).is_ok()) {
                out.push(format!("client {j}: piece {p} both close and distant"));
            }
            for p in 0..self.pieces.len() {
                let x = self.xbar(j, p);
                if x != 0.0 && x != self.ybar(p) {
                    out.push(format!("client {j}: xbar on piece {p} is {x}, not 0 or ybar"));
                }
            }
        }
        out
    }
}

/// Greedy filter with parameter `gamma`; see the module docs for the
/// splitting rule.
pub fn filter(frac: &FractionalSolution, gamma: f64) -> Result<FilteredSolution> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must be >= 1")));
    }
    let inst = frac.instance();
    let (nf, nc) = (inst.facility_count(), inst.client_count());
    let scaled_y: Vec<f64> = frac.y().iter().map(|y| gamma * y).collect();
    let scaled_x = |j: usize, i: usize| (gamma * frac.x(j, i)).min(scaled_y[i]);

    // Close prefix length on each support facility, per client.
    let mut close_len: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nc);
    for j in 0..nc {
        let mut order: Vec<usize> = frac.support()[j].clone();
        order.sort_by(|&a, &b| inst.distance(j, a).total_cmp(&inst.distance(j, b)).then(a.cmp(&b)));
        let mut remaining = 1.0;
        let mut lens = Vec::with_capacity(order.len());
        for i in order {
            let avail = scaled_x(j, i);
            let take = if remaining <= CUT_TOL {
                0.0
            } else if avail - remaining <= CUT_TOL {
                avail
            } else {
                remaining
            };
            remaining -= take;
            lens.push((i, take));
        }
        if remaining > INVARIANT_TOL {
            return Err(Error::InvalidArgument(format!(
                "client {j} has scaled mass short of 1 by {remaining}"
            )));
        }
        close_len.push(lens);
    }

    let mut cuts: Vec<Vec<f64>> = scaled_y
        .iter()
        .map(|&top| {
            let mut c = vec![0.0, top];
            c.extend((1..).map(|k| k as f64).take_while(|&k| k < top));
            c
        })
        .collect();
    for (j, lens) in close_len.iter().enumerate() {
        for &(i, len) in lens {
            cuts[i].push(len);
            cuts[i].push(scaled_x(j, i));
        }
    }
    for c in &mut cuts {
        c.sort_by(f64::total_cmp);
        let mut kept: Vec<f64> = Vec::with_capacity(c.len());
        for &v in c.iter() {
            match kept.last() {
                Some(&last) if v - last <= CUT_TOL => {}
                _ => kept.push(v),
            }
        }
        // Keep the exact line end so per-facility masses sum to gamma * y.
        if let Some(last) = kept.last_mut() {
            *last = *c.last().unwrap();
        }
        *c = kept;
    }

    let mut pieces = Vec::new();
    let mut first_piece = vec![0; nf];
    for (i, c) in cuts.iter().enumerate() {
        first_piece[i] = pieces.len();
        pieces.extend(c.windows(2).map(|w| SplitFacility {
            facility: i,
            start: w[0],
            end: w[1],
        }));
    }
    let cut_index = |i: usize, v: f64| -> usize {
        let c = &cuts[i];
        let k = c.partition_point(|&t| t < v);
        if k == c.len() || (k > 0 && v - c[k - 1] < c[k] - v) {
            k - 1
        } else {
            k
        }
    };

    let mut close = Vec::with_capacity(nc);
    let mut distant = Vec::with_capacity(nc);
    for (j, lens) in close_len.iter().enumerate() {
        let (mut cj, mut dj) = (Vec::new(), Vec::new());
        for &(i, len) in lens {
            let base = first_piece[i];
            let kc = cut_index(i, len);
            let kx = cut_index(i, scaled_x(j, i));
            cj.extend(base..base + kc);
            dj.extend(base + kc..base + kx);
        }
        cj.sort_unstable();
        dj.sort_unstable();
        close.push(cj);
        distant.push(dj);
    }

    Ok(FilteredSolution {
        instance: inst.clone(),
        gamma,
        pieces,
        close,
        distant,
        scaled_y,
        lp_facility_cost: frac.facility_cost(),
        lp_connection_cost: frac.connection_cost(),
    })
}

/// Per-client distance summary of a filtered solution. All averages are
/// `ybar`-weighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceStats {
    pub d_ave_c: f64,
    /// Absent when `F_j^D` is empty.
    pub d_ave_d: Option<f64>,
    pub d_max_c: f64,
    pub d_ave: f64,
    /// `d_max_c + d_ave_c`, the clustering key.
    pub k: f64,
}

impl DistanceStats {
    /// `|d_ave - ((1/gamma) d_ave_c + ((gamma-1)/gamma) d_ave_d)|`, or `None`
    /// when there are no distant facilities.
    pub fn identity_residual(&self, gamma: f64) -> Option<f64> {
        self.d_ave_d
            .map(|dd| (self.d_ave - (self.d_ave_c / gamma + (gamma - 1.0) / gamma * dd)).abs())
    }
}

fn weighted_average(fs: &FilteredSolution, client: usize, pieces: &[usize]) -> Option<f64> {
    let mass: f64 = pieces.iter().map(|&p| fs.ybar(p)).sum();
    if mass <= CUT_TOL {
        return None;
    }
    let total: f64 = pieces.iter().map(|&p| fs.ybar(p) * fs.piece_distance(client, p)).sum();
    Some(total / mass)
}

pub fn distance_stats(fs: &FilteredSolution, client: usize) -> Result<DistanceStats> {
    if client >= fs.close.len() {
        return Err(Error::InvalidArgument(format!("no client {client}")));
    }
    let close = fs.close(client);
    let d_ave_c = weighted_average(fs, client, close)
        .ok_or_else(|| Error::InvalidArgument(format!("client {client} has no close facility")))?;
    let d_ave_d = weighted_average(fs, client, fs.distant(client));
    let d_max_c = close
        .iter()
        .map(|&p| fs.piece_distance(client, p))
        .fold(0.0, f64::max);
    let all: Vec<usize> = close.iter().chain(fs.distant(client)).copied().collect();
    let d_ave = weighted_average(fs, client, &all).unwrap_or(d_ave_c);
    Ok(DistanceStats {
        d_ave_c,
        d_ave_d,
        d_max_c,
        d_ave,
        k: d_max_c + d_ave_c,
    })
}

/// The per-client connection estimate
/// `(1 - e^{-1} + e^{-gamma}) d_ave_c + (e^{-1} + e^{-gamma}) d_ave_d`.
/// Reported for comparison only; it is not a proven bound here.
pub fn simple_connection_estimate(stats: &DistanceStats, gamma: f64) -> Option<f64> {
    let (e1, eg) = ((-1.0f64).exp(), (-gamma).exp());
    stats
        .d_ave_d
        .map(|dd| (1.0 - e1 + eg) * stats.d_ave_c + (e1 + eg) * dd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStructure {
    /// Centers in the order they were chosen.
    pub centers: Vec<usize>,
    /// Center of every client; centers map to themselves.
    pub center_of: Vec<usize>,
    pub stats: Vec<DistanceStats>,
    /// Piece index to the center whose close set contains it.
    owner: Vec<Option<usize>>,
}

impl ClusterStructure {
    pub fn is_center(&self, client: usize) -> bool {
        self.center_of[client] == client
    }

    /// Center owning `piece`, if any.
    pub fn owner(&self, piece: usize) -> Option<usize> {
        self.owner[piece]
    }

    pub fn invariant_violations(&self, fs: &FilteredSolution) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = vec![None; fs.piece_count()];
        for &c in &self.centers {
            for &p in fs.close(c) {
                if let Some(other) = seen[p] {
                    out.push(format!("centers {other} and {c} share piece {p}"));
                }
                seen[p] = Some(c);
            }
        }
        for (j, &c) in self.center_of.iter().enumerate() {
            if !self.is_center(c) {
                out.push(format!("client {j} mapped to non-center {c}"));
            }
            if c != j && !fs.close(j).iter().any(|p| fs.close(c).binary_search(p).is_ok()) {
                out.push(format!("client {j} shares no close piece with center {c}"));
            }
            if self.stats[c].k > self.stats[j].k {
                out.push(format!("center {c} of client {j} has larger K"));
            }
        }
        out
    }
}

/// Greedy sweep in increasing `K` (ties by client index). A client whose
/// close set meets an existing center's close set joins the earliest such
/// center; otherwise it becomes a center.
pub fn cluster(fs: &FilteredSolution) -> Result<ClusterStructure> {
    let nc = fs.instance.client_count();
    let stats = (0..nc)
        .map(|j| distance_stats(fs, j))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| stats[a].k.total_cmp(&stats[b].k).then(a.cmp(&b)));

    let mut owner: Vec<Option<usize>> = vec![None; fs.piece_count()];
    let mut rank = vec![usize::MAX; nc];
    let mut centers = Vec::new();
    let mut center_of = vec![usize::MAX; nc];
    for j in order {
        let earliest = fs
            .close(j)
            .iter()
            .filter_map(|&p| owner[p])
            .min_by_key(|&c| rank[c]);
        match earliest {
            Some(c) => center_of[j] = c,
            None => {
                rank[j] = centers.len();
                centers.push(j);
                center_of[j] = j;
                for &p in fs.close(j) {
                    owner[p] = Some(j);
                }
            }
        }
    }
    Ok(ClusterStructure {
        centers,
        center_of,
        stats,
        owner,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSolution {
    /// Open original facilities, ascending.
    pub open: Vec<usize>,
    /// Facility serving each client.
    pub assignment: Vec<usize>,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub client_costs: Vec<f64>,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
}

impl IntegralSolution {
    /// Connects every client to its nearest open facility (ties by index).
    pub fn from_open(inst: &UflInstance, open: Vec<usize>, seed: Option<u64>, gamma: Option<f64>) -> Result<Self> {
        if open.is_empty() {
            return Err(Error::InvalidArgument("no open facility".into()));
        }
        let mut open = open;
        open.sort_unstable();
        open.dedup();
        if let Some(&i) = open.iter().find(|&&i| i >= inst.facility_count()) {
            return Err(Error::InvalidArgument(format!("no facility {i}")));
        }
        let assignment: Vec<usize> = (0..inst.client_count())
            .map(|j| nearest(inst, j, &open))
            .collect();
        let client_costs: Vec<f64> = assignment
            .iter()
            .enumerate()
            .map(|(j, &i)| inst.distance(j, i))
            .collect();
        Ok(Self {
            facility_cost: open.iter().map(|&i| inst.opening_cost()[i]).sum(),
            connection_cost: client_costs.iter().sum(),
            open,
            assignment,
            client_costs,
            seed,
            gamma,
        })
    }

    pub fn cost(&self) -> f64 {
        self.facility_cost + self.connection_cost
    }

    /// Problems with the stored assignment or costs against `inst`.
    pub fn invariant_violations(&self, inst: &UflInstance) -> Vec<String> {
        let mut out = Vec::new();
        for (j, &i) in self.assignment.iter().enumerate() {
            if self.open.binary_search(&i).is_err() {
                out.push(format!("client {j} assigned to closed facility {i}"));
                continue;
            }
            let best = inst.distance(j, nearest(inst, j, &self.open));
            if inst.distance(j, i) > best + INVARIANT_TOL {
                out.push(format!("client {j} not at its nearest open facility"));
            }
        }
        let (f, c) = inst.cost_of(&self.open);
        if (f - self.facility_cost).abs() > INVARIANT_TOL || (c - self.connection_cost).abs() > INVARIANT_TOL {
            out.push(format!(
                "stored costs ({}, {}) differ from recomputed ({f}, {c})",
                self.facility_cost, self.connection_cost
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn nearest(inst: &UflInstance, client: usize, open: &[usize]) -> usize {
    let row = inst.row(client);
    let mut best = open[0];
    for &i in &open[1..] {
        if row[i] < row[best] {
            best = i;
        }
    }
    best
}

/// Generator for trial `trial` under `seed`; streams are independent, so a
/// trial's draw does not depend on which other trials run.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One draw: the opened pieces' original facilities plus the split-level
/// facility cost, where every open copy pays its facility's full cost.
fn draw(fs: &FilteredSolution, cs: &ClusterStructure, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let open_cost = fs.instance.opening_cost();
    let mut opened = Vec::new();
    for &c in &cs.centers {
        let close = fs.close(c);
        let total: f64 = close.iter().map(|&p| fs.ybar(p)).sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = *close.last().expect("centers have close pieces");
        for &p in close {
            acc += fs.ybar(p);
            if u < acc {
                chosen = p;
                break;
            }
        }
        opened.push(chosen);
    }
    for p in 0..fs.piece_count() {
        if cs.owner(p).is_none() && rng.gen::<f64>() < fs.ybar(p) {
            opened.push(p);
        }
    }
    let split_cost = opened.iter().map(|&p| open_cost[fs.pieces[p].facility]).sum();
    (opened.iter().map(|&p| fs.pieces[p].facility).collect(), split_cost)
}

pub fn round_once(fs: &FilteredSolution, cs: &ClusterStructure, seed: u64) -> Result<IntegralSolution> {
    let (open, _) = draw(fs, cs, &mut trial_rng(seed, 0));
    IntegralSolution::from_open(&fs.instance, open, Some(seed), Some(fs.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; absent for one trial.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub trials: usize,
    /// Cost of the merged solution: each open facility paid once.
    pub facility_cost: Statistic,
    /// Every opened copy pays its facility's cost; expectation `gamma F*`.
    pub split_facility_cost: Statistic,
    pub connection_cost: Statistic,
    pub client_costs: Vec<Statistic>,
}

/// Running mean and centered second moment, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn statistic(&self) -> Statistic {
        let std_error = (self.n > 1.0).then(|| (self.m2 / (self.n - 1.0)).sqrt() / self.n.sqrt());
        Statistic {
            mean: self.mean,
            std_error,
        }
    }
}

/// Per-chunk accumulators: merged facility cost, split facility cost,
/// connection cost, then one per client.
fn run_chunk(fs: &FilteredSolution, cs: &ClusterStructure, seed: u64, range: std::ops::Range<usize>) -> Vec<Moments> {
    let inst = &fs.instance;
    let mut acc = vec![Moments::default(); 3 + inst.client_count()];
    let mut is_open = vec![false; inst.facility_count()];
    for t in range {
        let (open, split_cost) = draw(fs, cs, &mut trial_rng(seed, t as u64));
        is_open.iter_mut().for_each(|o| *o = false);
        let mut merged = 0.0;
        for &i in &open {
            if !is_open[i] {
                is_open[i] = true;
                merged += inst.opening_cost()[i];
            }
        }
        let mut conn = 0.0;
        for j in 0..inst.client_count() {
            let d = inst
                .row(j)
                .iter()
                .zip(&is_open)
                .filter(|(_, &o)| o)
                .map(|(&d, _)| d)
                .fold(f64::INFINITY, f64::min);
            acc[3 + j].push(d);
            conn += d;
        }
        acc[0].push(merged);
        acc[1].push(split_cost);
        acc[2].push(conn);
    }
    acc
}

pub fn estimate_cost(fs: &FilteredSolution, cs: &ClusterStructure, trials: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let chunks: Vec<Vec<Moments>> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| run_chunk(fs, cs, seed, k * CHUNK..((k + 1) * CHUNK).min(trials)))
        .collect();
    let total = chunks
        .into_iter()
        .reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect())
        .expect("at least one chunk");
    Ok(MonteCarloEstimate {
        trials,
        facility_cost: total[0].statistic(),
        split_facility_cost: total[1].statistic(),
        connection_cost: total[2].statistic(),
        client_costs: total[3..].iter().map(Moments::statistic).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BackupCheck {
    /// The center's close set lies inside `F_j`, or `F_j^D` is empty.
    NotApplicable,
    Checked {
        /// Average distance from `j` to the center's close pieces outside `F_j`.
        lhs: f64,
        /// `d_ave_d(j) + d_max_c(j) + d_ave_c(j)`.
        rhs_simple: f64,
        /// `(2-gamma) d_max_c(j) + (gamma-1) d_ave_d(j) + d_max_c(c) + d_ave_c(c)`.
        rhs_refined: f64,
        holds: bool,
        /// False for `gamma > 2`, where the refined bound is not claimed.
        in_range: bool,
    },
}

/// Checks the distance to the fallback facilities of a non-center client.
pub fn backup_distance_check(fs: &FilteredSolution, cs: &ClusterStructure, client: usize) -> Result<BackupCheck> {
    if client >= cs.center_of.len() {
        return Err(Error::InvalidArgument(format!("no client {client}")));
    }
    if cs.is_center(client) {
        return Err(Error::InvalidArgument(format!("client {client} is a cluster center")));
    }
    let center = cs.center_of[client];
    let (sj, sc) = (cs.stats[client], cs.stats[center]);
    let Some(d_ave_d) = sj.d_ave_d else {
        return Ok(BackupCheck::NotApplicable);
    };
    let own = |p: &usize| fs.close(client).binary_search(p).is_ok() || fs.distant(client).binary_search(p).is_ok();
    let outside: Vec<usize> = fs.close(center).iter().filter(|p| !own(p)).copied().collect();
    let Some(lhs) = weighted_average(fs, client, &outside) else {
        return Ok(BackupCheck::NotApplicable);
    };
    let g = fs.gamma;
    let rhs_simple = d_ave_d + sj.d_max_c + sj.d_ave_c;
    let rhs_refined = (2.0 - g) * sj.d_max_c + (g - 1.0) * d_ave_d + sc.d_max_c + sc.d_ave_c;
    Ok(BackupCheck::Checked {
        lhs,
        rhs_simple,
        rhs_refined,
        holds: lhs <= rhs_simple.min(rhs_refined) + INVARIANT_TOL,
        in_range: g <= 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relaxation::solve_relaxation;

    fn two_facility_half() -> FractionalSolution {
        let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![1.0, 2.0]]).unwrap();
        FractionalSolution::from_values(&inst, vec![0.5, 0.5], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn splits_boundary_facility() {
        let fs = filter(&two_facility_half(), 1.2).unwrap();
        let masses: Vec<f64> = (0..fs.piece_count()).map(|p| fs.ybar(p)).collect();
        assert_eq!(fs.split_map(), vec![0, 1, 1]);
        assert!((masses[0] - 0.6).abs() < 1e-12);
        assert!((masses[1] - 0.4).abs() < 1e-12);
        assert!((masses[2] - 0.2).abs() < 1e-12);
        assert_eq!(fs.close(0), &[0, 1]);
        assert_eq!(fs.distant(0), &[2]);
        let s = distance_stats(&fs, 0).unwrap();
        assert!((s.d_ave_c - 1.4).abs() < 1e-12);
        assert!((s.d_ave_d.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(s.d_max_c, 2.0);
        assert!((s.d_ave - 1.5).abs() < 1e-12);
        assert!((s.k - 3.4).abs() < 1e-12);
        assert!(s.identity_residual(1.2).unwrap() < 1e-12);
        assert!(fs.invariant_violations().is_empty());
    }

    #[test]
    fn unit_scale_has_no_distant_set() {
        let inst = crate::instance::generate_euclidean(5, 8, 3).unwrap();
        let fs = filter(&solve_relaxation(&inst).unwrap(), 1.0).unwrap();
        for j in 0..8 {
            assert!(fs.distant(j).is_empty());
            let s = distance_stats(&fs, j).unwrap();
            assert!((s.d_ave_c - s.d_ave).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_prefix_needs_no_split() {
        let fs = filter(&two_facility_half(), 2.0).unwrap();
        assert_eq!(fs.piece_count(), 2);
        assert_eq!(fs.close(0), &[0]);
        assert_eq!(fs.distant(0), &[1]);
    }

    #[test]
    fn rejects_small_gamma() {
        assert!(filter(&two_facility_half(), 0.9).is_err());
    }

    #[test]
    fn masses_above_one_get_unit_pieces() {
        let inst = UflInstance::new(vec![1.0], vec![vec![2.0]]).unwrap();
        let frac = FractionalSolution::from_values(&inst, vec![1.0], vec![1.0]).unwrap();
        let fs = filter(&frac, 2.5).unwrap();
        let masses: Vec<f64> = (0..fs.piece_count()).map(|p| fs.ybar(p)).collect();
        assert_eq!(masses, vec![1.0, 1.0, 0.5]);
        let s = distance_stats(&fs, 0).unwrap();
        assert_eq!((s.d_ave_c, s.d_ave_d, s.d_max_c, s.d_ave), (2.0, Some(2.0), 2.0, 2.0));
        assert!(fs.invariant_violations().is_empty());
    }

    #[test]
    fn sweep_picks_smaller_key() {
        // Both clients' nearest facility is 0; client 1 is closer, so it leads.
        let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![2.0, 5.0], vec![1.0, 4.0]]).unwrap();
        let frac = FractionalSolution::from_values(&inst, vec![1.0, 0.0, 1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let fs = filter(&frac, 1.0).unwrap();
        let cs = cluster(&fs).unwrap();
        assert_eq!(cs.centers, vec![1]);
        assert_eq!(cs.center_of, vec![1, 1]);
        assert!(cs.invariant_violations(&fs).is_empty());
    }

    #[test]
    fn disjoint_close_sets_are_all_centers() {
        let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        let frac = FractionalSolution::from_values(&inst, vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let cs = cluster(&filter(&frac, 1.0).unwrap()).unwrap();
        assert_eq!(cs.centers, vec![0, 1]);
    }

    #[test]
    fn one_center_opens_exactly_one() {
        let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![1.0, 1.0]]).unwrap();
        let frac = FractionalSolution::from_values(&inst, vec![0.3, 0.7], vec![0.3, 0.7]).unwrap();
        let fs = filter(&frac, 1.0).unwrap();
        let cs = cluster(&fs).unwrap();
        let mut second = 0;
        for seed in 0..2000 {
            let sol = round_once(&fs, &cs, seed).unwrap();
            assert_eq!(sol.open.len(), 1);
            second += usize::from(sol.open == [1]);
            assert!(sol.invariant_violations(&inst).is_empty());
        }
        assert!((second as f64 / 2000.0 - 0.7).abs() < 0.05);
        assert_eq!(round_once(&fs, &cs, 9).unwrap(), round_once(&fs, &cs, 9).unwrap());
    }

    #[test]
    fn single_trial_has_no_error_bar() {
        let inst = crate::instance::generate_euclidean(3, 4, 1).unwrap();
        let fs = filter(&solve_relaxation(&inst).unwrap(), 1.5).unwrap();
        let cs = cluster(&fs).unwrap();
        let est = estimate_cost(&fs, &cs, 1, 5).unwrap();
        assert!(est.facility_cost.std_error.is_none());
        assert!(estimate_cost(&fs, &cs, 0, 5).is_err());
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|k| ((k * 37) % 11) as f64 * 0.5).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12 && (m.m2 - all.m2).abs() < 1e-9);
    }
}
