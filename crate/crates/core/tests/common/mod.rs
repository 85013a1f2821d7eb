//! Independent reference computations for the integration tests. Nothing
//! here calls the simplex or the rounding code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ufl_core::instance::UflInstance;

/// Best integral solution by trying every nonempty facility subset:
/// `(cost, facility_cost, connection_cost, open)`.
pub fn brute_force_ufl(inst: &UflInstance) -> (f64, f64, f64, Vec<usize>) {
    let nf = inst.facility_count();
    assert!(nf <= 20, "subset enumeration is exponential");
    let mut best = (f64::INFINITY, 0.0, 0.0, Vec::new());
    for mask in 1u32..(1 << nf) {
        let open: Vec<usize> = (0..nf).filter(|i| mask >> i & 1 == 1).collect();
        let fac: f64 = open.iter().map(|&i| inst.opening_cost()[i]).sum();
        let conn: f64 = (0..inst.client_count())
            .map(|j| open.iter().map(|&i| inst.distance(j, i)).fold(f64::INFINITY, f64::min))
            .sum();
        if fac + conn < best.0 {
            best = (fac + conn, fac, conn, open);
        }
    }
    best
}

/// Metric instance with a fractional LP optimum most of the time: each client
/// sits at distance 1 from two random facilities and 3 from the rest.
pub fn cover_instance(facilities: usize, clients: usize, seed: u64) -> UflInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let open = (0..facilities).map(|_| rng.gen_range(1.0..3.0)).collect();
    let rows = (0..clients)
        .map(|_| {
            let a = rng.gen_range(0..facilities);
            let mut b = rng.gen_range(0..facilities);
            if b == a {
                b = (a + 1) % facilities;
            }
            (0..facilities).map(|i| if i == a || i == b { 1.0 } else { 3.0 }).collect()
        })
        .collect();
    UflInstance::new(open, rows).unwrap()
}

/// Small dense LP `max c x, A x <= b, 0 <= x <= upper` used by the vertex oracle.
#[derive(Debug, Clone)]
pub struct BoxLp {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub upper: f64,
}

pub fn random_box_lp(seed: u64) -> BoxLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=4);
    let c = (0..n).map(|_| rng.gen_range(-3.0..5.0)).collect();
    let a = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect())
        .collect();
    let b = (0..m).map(|_| rng.gen_range(-1.0..6.0)).collect();
    BoxLp { c, a, b, upper: rng.gen_range(1.0..5.0) }
}

/// Optimum of a [`BoxLp`] by enumerating every basis of tight constraints.
/// `None` when the feasible region is empty.
pub fn vertex_optimum(lp: &BoxLp) -> Option<f64> {
    let n = lp.c.len();
    // Every constraint as (row, rhs) with row . x <= rhs.
    let mut rows: Vec<(Vec<f64>, f64)> = lp.a.iter().cloned().zip(lp.b.iter().copied()).collect();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = -1.0;
        rows.push((e.clone(), 0.0));
        e[k] = 1.0;
        rows.push((e, lp.upper));
    }
    let feasible = |x: &[f64]| {
        rows.iter()
            .all(|(r, b)| r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= b + 1e-9)
    };
    let mut best: Option<f64> = None;
    for subset in combinations(rows.len(), n) {
        let m: Vec<Vec<f64>> = subset.iter().map(|&k| rows[k].0.clone()).collect();
        let rhs: Vec<f64> = subset.iter().map(|&k| rows[k].1).collect();
        if let Some(x) = solve_square(m, rhs) {
            if feasible(&x) {
                let v: f64 = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..n {
                    m[r][k] -= f * m[col][k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    Some((0..n).map(|k| rhs[k] / m[k][k]).collect())
}

/// Composite Simpson rule with `n` (even) panels on `[a, b]`.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `alpha(gamma, h_q)` evaluated by quadrature of its defining integral,
/// splitting at the jump of `h_q` so each panel integrates a smooth function.
pub fn alpha_threshold_by_quadrature(gamma: f64, q: f64) -> f64 {
    let height = 1.0 / (1.0 - q);
    let decay = simpson(|p| height * gamma * (-gamma * p).exp(), q, 1.0, 2000);
    let at_inverse = if 1.0 / gamma > q { height } else { 0.0 };
    decay + (-gamma).exp() * (gamma + (3.0 - gamma) * at_inverse)
}

/// The gap instance: three facilities of cost 1, three clients each at
/// distance 1 from two facilities and 3 from the third. Half of every
/// facility opens in the LP (4.5); any integral solution costs at least 5.
pub fn gap_instance() -> UflInstance {
    UflInstance::new(
        vec![1.0, 1.0, 1.0],
        vec![vec![1.0, 1.0, 3.0], vec![1.0, 3.0, 1.0], vec![3.0, 1.0, 1.0]],
    )
    .unwrap()
}
