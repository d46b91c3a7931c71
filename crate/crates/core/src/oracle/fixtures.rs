//! Exact event probabilities exported as JSON fixtures.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conformance::{self, CheckResult};
use super::EdgeSet;
use crate::error::Result;
use crate::lattice::Orientation;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub universe: String,
    pub event: String,
    /// Probability of an edge being open, as `num/den`.
    pub p: String,
    /// Exact probability of the event, as `num/den`.
    pub probability: String,
    pub edges: usize,
}

/// One fixture per exact value of every exhaustive check that passed.
pub fn from_checks(checks: &[CheckResult]) -> Vec<Fixture> {
    checks
        .iter()
        .filter(|c| c.exhaustive && c.passed())
        .flat_map(|c| {
            c.values.iter().map(move |v| Fixture {
                name: c.detector.clone(),
                universe: c.instance.clone(),
                event: c.event.clone(),
                p: v.p.clone(),
                probability: v.reference.clone(),
                edges: c.edges,
            })
        })
        .collect()
}

/// Checks cheap enough for a unit test: at most 16 edges each.
pub fn small_checks() -> Result<Vec<CheckResult>> {
    Ok(vec![
        conformance::check_clusters_b1()?,
        conformance::check_origin_connects(1, EdgeSet::ball(1)?, "B(1)")?,
        conformance::check_crossing((-1, 1, -1, 1), Orientation::Horizontal, "B(1)")?,
        conformance::check_crossing((0, 1, 0, 1), Orientation::Horizontal, "2x2 sites")?,
        conformance::check_crossing((0, 2, 0, 1), Orientation::Horizontal, "[0,2]x[0,1] self-dual")?,
        conformance::check_circuit(0, 1)?,
        conformance::check_circuit(1, 2)?,
        conformance::check_surrounding(1, EdgeSet::ball(1)?, "B(1)")?,
        conformance::check_arms(0, 1, EdgeSet::ball(1)?, "Ann(0,1)")?,
        conformance::check_defects(1, EdgeSet::ball(1)?, "B(1)")?,
    ])
}

pub fn write(path: &Path, fixtures: &[Fixture]) -> Result<()> {
    let mut s = serde_json::to_string_pretty(fixtures)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Vec<Fixture>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = from_checks(&small_checks().unwrap());
        assert_eq!(f.len(), 30);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.json");
        write(&p, &f).unwrap();
        assert_eq!(read(&p).unwrap(), f);
    }
}
