//! Bundled tables for the smoking example and the simulated four-valued model.
//!
//! The CSV sources live in `fixtures/` at the crate root and are compiled in.

use crate::error::Result;
use crate::io::{parse_cpt_str, parse_utility_str};
use crate::table::{Cpt, CptKind, UtilityTable};

pub const SMOKING_CPT_CSV: &str = include_str!("../fixtures/smoking_cpt.csv");
pub const SMOKING_UTIL_CSV: &str = include_str!("../fixtures/smoking_util.csv");
pub const SCM_CPT_CSV: &str = include_str!("../fixtures/scm_cpt.csv");
pub const SCM_UTIL_CSV: &str = include_str!("../fixtures/scm_util.csv");

/// Interventional CPT of mortality age given smoking habit.
pub fn smoking_cpt() -> Result<Cpt<f64>> {
    parse_cpt_str(SMOKING_CPT_CSV, CptKind::Interventional)
}

/// Utility of each (smoking habit, mortality age) pair.
pub fn smoking_utility() -> Result<UtilityTable<f64>> {
    parse_utility_str(SMOKING_UTIL_CSV)
}

/// Observational CPT `p(E | C)` of the simulated model, values in {-2, -1, 1, 2}.
pub fn scm_cpt() -> Result<Cpt<f64>> {
    parse_cpt_str(SCM_CPT_CSV, CptKind::Observational)
}

pub fn scm_utility() -> Result<UtilityTable<f64>> {
    parse_utility_str(SCM_UTIL_CSV)
}

/// Expected interventional utilities for the smoking example and their maximum.
pub const SMOKING_EU: [f64; 3] = [1772.00, 1729.32, 1947.05];
pub const SMOKING_ETA: f64 = 1947.05;

/// Expected observational utilities of the simulated model, as reported (two decimals).
pub const SCM_EU_REPORTED: [f64; 4] = [2.25, 4.50, 7.50, 2.25];

/// Coarse CPT expected from CFL: causes `-2, -1∨1, 2`, effects `-2∨2, -1, 1`.
pub const CFL_EXPECTED: [[f64; 3]; 3] = [[0.496, 0.189, 0.315], [0.504, 0.248, 0.248], [0.496, 0.315, 0.189]];
/// Coarse CPT reported from a sampled CFL run.
pub const CFL_OBSERVED: [[f64; 3]; 3] = [[0.491, 0.186, 0.323], [0.510, 0.255, 0.236], [0.514, 0.295, 0.191]];

/// Coarse CPT expected from PCFL: causes `-2∨2, -1, 1`, effects `-2, -1∨1, 2`.
pub const PCFL_EXPECTED: [[f64; 3]; 3] = [[0.248, 0.504, 0.248], [0.252, 0.496, 0.252], [0.252, 0.496, 0.252]];
