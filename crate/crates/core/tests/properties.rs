use proptest::prelude::*;
use rustc_hash::FxHashSet;

use invasion_lab::connectivity::{
    defect_costs, disconnecting_edges, origin_cluster, origin_connects, origin_reach_radius, reach_with_defects,
};
use invasion_lab::experiments::{
    read_csv, tally_block, write_csv, Experiment, PondRadiiExperiment, PondRadiiParams, Row,
};
use invasion_lab::invasion::{decompose_ponds_with, run_invasion, PondOptions, StopRule};
use invasion_lab::lattice::Site;
use invasion_lab::stats::{wilson, Estimate};
use invasion_lab::weights::{Thresholded, WeightField};

const HORIZON: i32 = 24;

fn field(seed: u64) -> WeightField {
    WeightField::new(seed, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outlet_weights_strictly_decrease(seed in any::<u64>()) {
        let w = field(seed);
        let trace = run_invasion(&w, StopRule::radius(HORIZON)).unwrap();
        let d = decompose_ponds_with(&trace, PondOptions::default()).unwrap();
        let outs = d.outlets();
        prop_assert!(!outs.is_empty());
        for pair in outs.windows(2) {
            prop_assert!(pair[0].tau > pair[1].tau);
            prop_assert!(pair[0].index < pair[1].index);
        }
        // each outlet is the maximum of everything invaded from it on
        for o in outs {
            let tail_max = trace.taus()[o.index..].iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(tail_max, o.tau);
        }
        // confirmed outlets form a prefix
        let j = d.confirmed_prefix();
        prop_assert!(outs[j..].iter().all(|o| !o.confirmed));
    }

    #[test]
    fn pond_radii_nondecreasing(seed in any::<u64>()) {
        let w = field(seed);
        let trace = run_invasion(&w, StopRule::radius(HORIZON)).unwrap();
        let d = decompose_ponds_with(&trace, PondOptions::default()).unwrap();
        let radii = d.raw_radii();
        for pair in radii.windows(2) {
            prop_assert!(pair[0].0 <= pair[1].0);
        }
        prop_assert!(radii[0].0 <= radii[0].1 && radii[0].1 <= 2 * radii[0].0);
        for k in 1..radii.len() {
            let (hat, bar) = radii[k];
            prop_assert!(hat - radii[k - 1].0 - 1 <= bar && bar <= 2 * hat);
        }
        // the lower bound never exceeds the exact value once confirmed
        for k in 1..=d.confirmed_prefix() {
            let (b, exact) = d.hat_radius_bound(k).unwrap();
            prop_assert!(exact);
            prop_assert_eq!(b, radii[k - 1].0);
        }
        let j = d.confirmed_prefix();
        for k in j + 1..=radii.len() + 1 {
            let (b, exact) = d.hat_radius_bound(k).unwrap();
            prop_assert!(!exact);
            prop_assert!(b <= trace.max_radius());
            if let Some(r) = radii.get(j) {
                prop_assert!(r.0 <= b);
            }
        }
    }

    #[test]
    fn critical_cluster_inside_first_pond(seed in any::<u64>()) {
        let w = field(seed);
        let trace = run_invasion(&w, StopRule::radius(HORIZON)).unwrap();
        let d = decompose_ponds_with(&trace, PondOptions::default()).unwrap();
        let status = Thresholded::new(&w, 0.5);
        prop_assume!(d.confirmed_prefix() >= 1);
        prop_assume!(origin_reach_radius(&status, HORIZON) < HORIZON);
        let first = d.outlets()[0].index;
        let pond: FxHashSet<Site> = trace.sites_until(first).collect();
        for s in origin_cluster(&status, HORIZON) {
            prop_assert!(pond.contains(&s), "{:?} outside the first pond", s);
        }
    }

    #[test]
    fn confirmed_outlets_are_bridges(seed in any::<u64>()) {
        let w = field(seed);
        let trace = run_invasion(&w, StopRule::radius(HORIZON)).unwrap();
        let d = decompose_ponds_with(&trace, PondOptions::default()).unwrap();
        let (hit, step) = *trace.sites().iter().find(|(s, _)| s.norm() >= HORIZON).unwrap();
        let bridges = disconnecting_edges(&trace.edges()[..step as usize], Site::ORIGIN, &[hit]).unwrap();
        for o in d.outlets().iter().filter(|o| o.confirmed) {
            prop_assert!(bridges.contains(&o.edge));
        }
    }

    #[test]
    fn defect_reach_monotone(seed in any::<u64>(), p in 0.3f64..0.7) {
        let w = field(seed);
        let status = Thresholded::new(&w, p);
        let n_max = 12;
        let costs = defect_costs(&status, n_max, 4);
        // harder to reach further out
        for pair in costs.windows(2) {
            if let (Some(a), Some(b)) = (pair[0], pair[1]) {
                prop_assert!(a <= b);
            }
            prop_assert!(pair[1].is_none() || pair[0].is_some());
        }
        for n in [1, 4, 8, 12] {
            let reach: Vec<bool> = (0..=4).map(|k| reach_with_defects(&status, k, n).unwrap()).collect();
            prop_assert!(reach.windows(2).all(|r| r[0] <= r[1]));
            prop_assert_eq!(reach[0], origin_connects(&status, n));
            prop_assert!(reach_with_defects(&status, n as u32, n).unwrap());
        }
    }

    #[test]
    fn thresholds_are_monotone(seed in any::<u64>(), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let w = field(seed);
        let a = Thresholded::new(&w, lo);
        let b = Thresholded::new(&w, hi);
        for n in [1, 3, 6] {
            prop_assert!(!origin_connects(&a, n) || origin_connects(&b, n));
        }
        prop_assert!(origin_reach_radius(&a, 10) <= origin_reach_radius(&b, 10));
        let small: FxHashSet<Site> = origin_cluster(&a, 8).into_iter().collect();
        let big: FxHashSet<Site> = origin_cluster(&b, 8).into_iter().collect();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn wilson_brackets_the_estimate(t in 1u64..100_000, frac in 0.0f64..=1.0, conf in 0.5f64..0.999) {
        let s = ((t as f64) * frac).floor() as u64;
        let (lo, hi) = wilson(s, t, conf);
        let phat = s as f64 / t as f64;
        prop_assert!(0.0 <= lo && lo <= phat + 1e-12);
        prop_assert!(phat <= hi + 1e-12 && hi <= 1.0);
        let e = Estimate::new(s, t, conf);
        prop_assert_eq!(e.ci_lo, lo);
        // wider at higher confidence
        let (lo2, hi2) = wilson(s, t, (conf + 1.0) / 2.0);
        prop_assert!(lo2 <= lo + 1e-12 && hi2 + 1e-12 >= hi);
    }

    #[test]
    fn csv_round_trips(
        k in proptest::option::of(0i64..10),
        n in proptest::option::of(1i64..1000),
        s in 0u64..1000,
        extra in 0u64..1000,
        est in proptest::num::f64::NORMAL | proptest::num::f64::ZERO,
    ) {
        let row = Row {
            schema_version: 1,
            experiment: "exp_x".into(),
            quantity: "P(a, b)".into(),
            k,
            m: None,
            n,
            horizon: Some(64),
            successes: Some(s),
            trials: Some(s + extra),
            estimate: est,
            ci_lo: f64::NAN,
            ci_hi: est,
            discards: extra,
            seed: 9,
            flag: "underpowered".into(),
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, std::slice::from_ref(&row)).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        prop_assert!(b.ci_lo.is_nan());
        prop_assert_eq!(b.estimate, row.estimate);
        prop_assert_eq!((b.k, b.n, b.successes, b.trials, &b.quantity), (row.k, row.n, row.successes, row.trials, &row.quantity));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn split_tallies_equal_whole(seed in any::<u64>(), cut in 0u64..=40) {
        let params = PondRadiiParams { k_max: 2, n_grid: vec![2, 4], trials: 40, horizon: 16, ..PondRadiiParams::default() };
        let exp = PondRadiiExperiment::new(params, seed).unwrap();
        let width = exp.phases()[0].width;
        let whole = tally_block(&exp, 0, width, 0..40);
        let a = tally_block(&exp, 0, width, 0..cut);
        let b = tally_block(&exp, 0, width, cut..40);
        let sum: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(sum, whole);
    }
}
