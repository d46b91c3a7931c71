use std::path::Path;

use num::{BigRational as Rational, Zero, One};

use invasion_lab::oracle::{fixtures, ratio_to_f64};
use invasion_lab::scaling::{estimate_onearm, self_dual_crossing};

fn committed() -> Vec<fixtures::Fixture> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/oracle_fixtures.json");
    fixtures::read(&path).expect("committed fixtures")
}

fn parse(s: &str) -> Rational {
    s.parse().expect("num/den")
}

fn lookup(f: &[fixtures::Fixture], name: &str, universe: &str, p: &str) -> f64 {
    let hit = f
        .iter()
        .find(|x| x.name == name && x.universe == universe && x.p == p)
        .unwrap_or_else(|| panic!("no fixture {name} on {universe} at p = {p}"));
    ratio_to_f64(&parse(&hit.probability))
}

#[test]
fn committed_fixtures_match_enumeration() {
    let fresh = fixtures::from_checks(&fixtures::small_checks().unwrap());
    assert_eq!(committed(), fresh);
}

#[test]
fn fixtures_are_probabilities() {
    for f in committed() {
        let p = parse(&f.probability);
        assert!(p >= Rational::zero() && p <= Rational::one(), "{f:?}");
    }
}

#[test]
fn known_closed_forms() {
    let f = committed();
    // origin to the boundary of B(1): fails only if all four edges are closed
    assert_eq!(lookup(&f, "origin_connects", "B(1)", "1/2"), 15.0 / 16.0);
    // self-dual rectangle crossing is exactly one half
    assert_eq!(lookup(&f, "has_crossing", "[0,2]x[0,1] self-dual", "1/2"), 0.5);
}

#[test]
fn monte_carlo_agrees_with_exact_values() {
    let f = committed();
    let trials = 40_000;
    for (p, ps) in [(0.5, "1/2"), (0.25, "1/4")] {
        let exact = lookup(&f, "origin_connects", "B(1)", ps);
        let est = estimate_onearm(p, 1, trials, 17).unwrap();
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est.estimate - exact).abs() <= 4.0 * sd, "p = {p}: {} vs {exact}", est.estimate);
    }
    let exact = lookup(&f, "has_crossing", "[0,2]x[0,1] self-dual", "1/2");
    let est = self_dual_crossing(2, trials, 23).unwrap();
    let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((est.estimate - exact).abs() <= 4.0 * sd);
}
