//! The JMS greedy, simulated event by event.
//!
//! Every unconnected client raises its budget at unit rate. A closed facility
//! opens once the budgets it can absorb cover its opening cost: each
//! unconnected client offers `max(t - d, 0)`, each connected client offers
//! the saving `max(c - d, 0)` over its current connection `c`. When a
//! facility opens, unconnected clients within reach connect to it and
//! connected clients strictly closer to it switch. An unconnected client also
//! connects as soon as its budget reaches an open facility.
//!
//! Simultaneous events resolve facilities first (by index), then clients
//! (by index). The returned solution assigns every client to its nearest open
//! facility.

use crate::error::Result;
use crate::instance::UflInstance;
use crate::rounding::IntegralSolution;

/// Event times closer than this are treated as simultaneous.
const TIME_TOL: f64 = 1e-12;

enum Event {
    Open(usize),
    Reach(usize, usize),
}

pub fn jms_solve(inst: &UflInstance) -> Result<IntegralSolution> {
    let (nf, nc) = (inst.facility_count(), inst.client_count());
    let mut is_open = vec![false; nf];
    // Current connection cost, `None` while unconnected.
    let mut conn: Vec<Option<f64>> = vec![None; nc];
    let mut now = 0.0f64;
    let mut scratch = Vec::with_capacity(nc);

    while conn.iter().any(Option::is_none) {
        let mut best: Option<(f64, Event)> = None;
        let consider = |t: f64, e: Event, best: &mut Option<(f64, Event)>| {
            if best.as_ref().is_none_or(|(bt, _)| t < *bt - TIME_TOL) {
                *best = Some((t, e));
            }
        };
        for i in (0..nf).filter(|&i| !is_open[i]) {
            let t = opening_time(inst, i, &conn, now, &mut scratch);
            consider(t, Event::Open(i), &mut best);
        }
        for j in (0..nc).filter(|&j| conn[j].is_none()) {
            let reach = (0..nf)
                .filter(|&i| is_open[i])
                .map(|i| (inst.distance(j, i), i))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if let Some((d, i)) = reach {
                consider(d.max(now), Event::Reach(j, i), &mut best);
            }
        }
        let (t, event) = best.expect("an unconnected client always has a pending event");
        now = now.max(t);
        match event {
            Event::Open(i) => {
                is_open[i] = true;
                for j in 0..nc {
                    let d = inst.distance(j, i);
                    match conn[j] {
                        None if d <= now + TIME_TOL => conn[j] = Some(d),
                        Some(c) if d < c => conn[j] = Some(d),
                        _ => {}
                    }
                }
            }
            Event::Reach(j, i) => conn[j] = Some(inst.distance(j, i)),
        }
    }

    let open: Vec<usize> = (0..nf).filter(|&i| is_open[i]).collect();
    IntegralSolution::from_open(inst, open, None, None)
}

/// Earliest `t >= now` at which facility `i` is paid for, assuming no other
/// event happens first.
fn opening_time(inst: &UflInstance, i: usize, conn: &[Option<f64>], now: f64, reach: &mut Vec<f64>) -> f64 {
    let f = inst.opening_cost()[i];
    let mut paid = 0.0;
    reach.clear();
    for (j, c) in conn.iter().enumerate() {
        let d = inst.distance(j, i);
        match c {
            Some(c) => paid += (c - d).max(0.0),
            None => reach.push(d),
        }
    }
    if paid >= f {
        return now;
    }
    reach.sort_by(f64::total_cmp);
    // Offer at time t is paid + sum over reach of max(t - d, 0): piecewise
    // linear with slope k on [reach[k-1], reach[k]].
    let mut sum_d = 0.0;
    for k in 0..reach.len() {
        sum_d += reach[k];
        let slope = (k + 1) as f64;
        let t = (f - paid + sum_d) / slope;
        let next = reach.get(k + 1).copied().unwrap_or(f64::INFINITY);
        if t <= next {
            return t.max(now);
        }
    }
    f64::INFINITY
}
