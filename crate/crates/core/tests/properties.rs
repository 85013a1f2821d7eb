mod common;

use proptest::prelude::*;
use ufl_core::charfn::{alpha, decompose, reconstruct, threshold, PiecewiseConstant, Profile};
use ufl_core::instance::{self, UflInstance};
use ufl_core::jms::jms_solve;
use ufl_core::relaxation::solve_relaxation;
use ufl_core::rounding::{cluster, distance_stats, filter, round_once};

/// Nondecreasing step function on `[0, 1]` with up to eight pieces.
fn step_function() -> impl Strategy<Value = PiecewiseConstant> {
    (prop::collection::vec(0.01f64..1.0, 1..8), prop::collection::vec(0.0f64..5.0, 8)).prop_map(|(cuts, incs)| {
        let mut bps: Vec<f64> = cuts;
        bps.push(0.0);
        bps.push(1.0);
        bps.sort_by(f64::total_cmp);
        bps.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let mut level = 0.0;
        let values = (0..bps.len() - 1)
            .map(|k| {
                level += incs[k];
                level
            })
            .collect();
        PiecewiseConstant::new(bps, values).unwrap()
    })
}

fn instance_strategy() -> impl Strategy<Value = UflInstance> {
    (1usize..6, 1usize..9, any::<u64>(), any::<bool>()).prop_map(|(nf, nc, seed, cover)| {
        if cover && nf >= 2 {
            common::cover_instance(nf, nc, seed)
        } else {
            instance::generate_euclidean(nf, nc, seed).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_reconstructs_the_profile(h in step_function()) {
        let terms = decompose(&h);
        let back = reconstruct(&terms).unwrap();
        for (a, b, c) in h.pieces() {
            prop_assert!((back.eval(0.5 * (a + b)) - c).abs() < 1e-9);
        }
        let weight: f64 = terms.iter().map(|t| t.weight).sum();
        prop_assert!((weight - h.integral()).abs() < 1e-9);
        prop_assert!(terms.iter().all(|t| t.weight > 0.0 && (0.0..1.0).contains(&t.q)));
    }

    #[test]
    fn alpha_is_linear_over_thresholds(h in step_function(), gamma in 1.0f64..3.0) {
        match h.normalize() {
            Profile::Normalized(n) => {
                prop_assert!((n.integral() - 1.0).abs() < 1e-12);
                let mixed: f64 = decompose(&n)
                    .iter()
                    .map(|t| t.weight * alpha(gamma, &threshold(t.q).unwrap()).unwrap())
                    .sum();
                prop_assert!((alpha(gamma, &n).unwrap() - mixed).abs() < 1e-9);
            }
            Profile::Degenerate => prop_assert_eq!(h.integral(), 0.0),
        }
    }

    #[test]
    fn native_text_round_trips(inst in instance_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.txt");
        instance::write_instance(&inst, &path).unwrap();
        prop_assert_eq!(instance::read_instance(&path, instance::Format::Native).unwrap(), inst);
    }

    #[test]
    fn relaxation_is_a_lower_bound(inst in instance_strategy()) {
        let frac = solve_relaxation(&inst).unwrap();
        let (opt, ..) = common::brute_force_ufl(&inst);
        prop_assert!(frac.objective() <= opt + 1e-7);
        let jms = jms_solve(&inst).unwrap();
        prop_assert!(jms.invariant_violations(&inst).is_empty());
        prop_assert!(jms.cost() >= opt - 1e-9);
    }

    #[test]
    fn filtering_and_clustering_invariants(inst in instance_strategy(), gamma in 1.0f64..3.0) {
        let frac = solve_relaxation(&inst).unwrap();
        let fs = filter(&frac, gamma).unwrap();
        prop_assert!(fs.invariant_violations().is_empty(), "{:?}", fs.invariant_violations());
        let cs = cluster(&fs).unwrap();
        prop_assert!(cs.invariant_violations(&fs).is_empty(), "{:?}", cs.invariant_violations(&fs));
        for j in 0..inst.client_count() {
            if let Some(r) = distance_stats(&fs, j).unwrap().identity_residual(gamma) {
                prop_assert!(r < 1e-9);
            }
        }
    }

    #[test]
    fn every_client_has_a_backup_within_its_cluster(inst in instance_strategy(), gamma in 1.0f64..3.0, seed in any::<u64>()) {
        let frac = solve_relaxation(&inst).unwrap();
        let fs = filter(&frac, gamma).unwrap();
        let cs = cluster(&fs).unwrap();
        let sol = round_once(&fs, &cs, seed).unwrap();
        prop_assert!(sol.invariant_violations(&inst).is_empty());
        for j in 0..inst.client_count() {
            let own = distance_stats(&fs, j).unwrap().d_max_c;
            let center = distance_stats(&fs, cs.center_of[j]).unwrap().d_max_c;
            prop_assert!(sol.client_costs[j] <= own + 2.0 * center + 1e-9);
        }
    }
}
