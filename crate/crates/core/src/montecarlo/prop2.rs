//! Empirical probe of the claim that the pragmatic causal coarsening is a quotient of the
//! observational pragmatic one except on a measure-zero set of joints.
//!
//! Exact observational ties have probability zero under continuous sampling, so the probe
//! works two ways: an eps-relaxation curve over generic random joints, and generators that
//! plant exact ties.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex::{sample_joint, sample_simplex, sample_utility, trial_rng};
use crate::dist::{cause_marginal, eq_constraint_residual, interventional_cpt, observational_cpt, ConfoundedJoint};
use crate::equiv::{expected_utilities, observational_pragmatic_causal_coarsening, pragmatic_causal_coarsening};
use crate::error::{Error, Result};
use crate::partition::refines;
use crate::table::UtilityTable;

pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_UTILITY_RANGE: (f64, f64) = (0.0, 10.0);

const NOTE: &str = "approximate observational pragmatic equivalence is operationalized as \
|EU_obs(j) - EU_obs(k)| < eps; a flagged pair violates the quotient relation when its \
interventional expected utilities differ by more than max(delta, eps) and exactly one of them \
attains eta within max(delta, eps)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Config {
    /// (causes, effects, confounder values)
    pub dims: (usize, usize, usize),
    pub trials: u64,
    pub eps_grid: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    /// Utilities are drawn i.i.d. uniform on this range.
    pub utility_range: (f64, f64),
}

impl Prop2Config {
    pub fn new(dims: (usize, usize, usize), trials: u64, eps_grid: Vec<f64>, seed: u64) -> Self {
        Prop2Config {
            dims,
            trials,
            eps_grid,
            delta: DEFAULT_DELTA,
            seed,
            utility_range: DEFAULT_UTILITY_RANGE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, w) = self.dims;
        if m < 2 || n == 0 || w == 0 {
            return Err(Error::Config("dims need at least 2 causes, 1 effect, 1 confounder value".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("eps grid must be non-empty and positive".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config("delta must be positive".into()));
        }
        let (lo, hi) = self.utility_range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config("utility range must be a finite interval".into()));
        }
        Ok(())
    }

    fn pairs(&self) -> u64 {
        let m = self.dims.0 as u64;
        m * (m - 1) / 2
    }
}

/// One point of the eps curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRow {
    pub eps: f64,
    /// Cause pairs flagged as approximately observationally equivalent.
    pub flagged: u64,
    /// Flagged pairs that the interventional maximizer split separates.
    pub violations: u64,
    /// `violations / (trials · pairs)`.
    pub violation_rate: f64,
    /// `violations / flagged` (0 when nothing was flagged).
    pub conditional_rate: f64,
    /// Largest `|residual| / (p(c_j) p(c_k))` over flagged pairs.
    pub max_scaled_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub dims: (usize, usize, usize),
    pub trials: u64,
    pub pairs_per_trial: u64,
    pub delta: f64,
    pub seed: u64,
    pub rows: Vec<EpsRow>,
    pub note: String,
}

impl Prop2Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Columns `eps,flagged,violations,rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,flagged,violations,rate\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.eps, r.flagged, r.violations, r.violation_rate));
        }
        out
    }

    /// True when the violation rate never increases as eps decreases along the grid.
    pub fn rate_non_increasing(&self) -> bool {
        let mut rows: Vec<&EpsRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        rows.windows(2).all(|w| w[1].violation_rate <= w[0].violation_rate)
    }
}

/// How a cause pair fares at one eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub flagged: bool,
    pub violation: bool,
    /// `|residual| / (p(c_j) p(c_k))`, which equals `|EU_obs(j) - EU_obs(k)|`.
    pub scaled_residual: f64,
}

struct Profiles {
    obs: Vec<f64>,
    int: Vec<f64>,
    eta: f64,
    marginal: Vec<f64>,
}

fn profiles(joint: &ConfoundedJoint<f64>, util: &UtilityTable<f64>) -> Result<Profiles> {
    let obs = expected_utilities(&observational_cpt(joint)?, util)?.values;
    let int = expected_utilities(&interventional_cpt(joint)?, util)?;
    Ok(Profiles {
        obs,
        eta: int.eta.expect("interventional profile has eta"),
        int: int.values,
        marginal: cause_marginal(joint),
    })
}

fn outcome(
    joint: &ConfoundedJoint<f64>,
    util: &UtilityTable<f64>,
    p: &Profiles,
    j: usize,
    k: usize,
    eps: f64,
    delta: f64,
) -> Result<PairOutcome> {
    let flagged = (p.obs[j] - p.obs[k]).abs() < eps;
    let tol = delta.max(eps);
    let maximal = |x: f64| x >= p.eta - tol;
    let violation =
        flagged && (p.int[j] - p.int[k]).abs() > tol && (maximal(p.int[j]) != maximal(p.int[k]));
    let scaled_residual = if flagged {
        eq_constraint_residual(joint, util, j, k)?.abs() / (p.marginal[j] * p.marginal[k])
    } else {
        0.0
    };
    Ok(PairOutcome {
        flagged,
        violation,
        scaled_residual,
    })
}

/// Classifies the cause pair `(j, k)` of one joint at tolerance `eps`.
pub fn pair_outcome(
    joint: &ConfoundedJoint<f64>,
    util: &UtilityTable<f64>,
    j: usize,
    k: usize,
    eps: f64,
    delta: f64,
) -> Result<PairOutcome> {
    outcome(joint, util, &profiles(joint, util)?, j, k, eps, delta)
}

/// Eps curve over `cfg.trials` generic random (joint, utility) pairs. Trials run in parallel;
/// each uses its own generator derived from `cfg.seed`, so the report is reproducible.
pub fn prop2_probe(cfg: &Prop2Config) -> Result<Prop2Report> {
    cfg.validate()?;
    let (m, n, w) = cfg.dims;
    let g = cfg.eps_grid.len();
    let zero = || (vec![0u64; g], vec![0u64; g], vec![0.0f64; g]);
    let (flagged, violations, max_res) = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut rng = trial_rng(cfg.seed, t);
            let joint = sample_joint(m, n, w, &mut rng)?;
            let util = sample_utility(m, n, cfg.utility_range.0, cfg.utility_range.1, &mut rng)?;
            let p = profiles(&joint, &util)?;
            let mut acc = zero();
            for j in 0..m {
                for k in (j + 1)..m {
                    for (e, &eps) in cfg.eps_grid.iter().enumerate() {
                        let o = outcome(&joint, &util, &p, j, k, eps, cfg.delta)?;
                        acc.0[e] += u64::from(o.flagged);
                        acc.1[e] += u64::from(o.violation);
                        acc.2[e] = acc.2[e].max(o.scaled_residual);
                    }
                }
            }
            Ok(acc)
        })
        .try_reduce(zero, |mut a, b| {
            for e in 0..g {
                a.0[e] += b.0[e];
                a.1[e] += b.1[e];
                a.2[e] = a.2[e].max(b.2[e]);
            }
            Ok(a)
        })?;
    let total = (cfg.trials * cfg.pairs()) as f64;
    let rows = cfg
        .eps_grid
        .iter()
        .enumerate()
        .map(|(e, &eps)| EpsRow {
            eps,
            flagged: flagged[e],
            violations: violations[e],
            violation_rate: violations[e] as f64 / total,
            conditional_rate: if flagged[e] > 0 {
                violations[e] as f64 / flagged[e] as f64
            } else {
                0.0
            },
            max_scaled_residual: max_res[e],
        })
        .collect();
    Ok(Prop2Report {
        dims: cfg.dims,
        trials: cfg.trials,
        pairs_per_trial: cfg.pairs(),
        delta: cfg.delta,
        seed: cfg.seed,
        rows,
        note: NOTE.into(),
    })
}

/// Makes `c_j` an exact observational copy of `c_k`: same `p(E | z, c)` slice, same utility
/// row, and `p(c_j | z)` proportional to `p(c_k | z)` across `z` (each column keeps its sum).
pub fn plant_duplicate_tie<R: Rng + ?Sized>(
    joint: &ConfoundedJoint<f64>,
    util: &UtilityTable<f64>,
    j: usize,
    k: usize,
    rng: &mut R,
) -> Result<(ConfoundedJoint<f64>, UtilityTable<f64>)> {
    let (m, n, w) = (joint.n_causes(), joint.n_effects(), joint.n_confounders());
    if j >= m || k >= m || j == k {
        return Err(Error::Config("need two distinct cause indices".into()));
    }
    let share: f64 = rng.random_range(0.05..0.95);
    let mut iota: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..w).map(|l| (0..m).map(|c| joint.iota(i, l, c)).collect()).collect())
        .collect();
    let mut beta: Vec<Vec<f64>> = (0..m).map(|c| (0..w).map(|l| joint.beta(c, l)).collect()).collect();
    for l in 0..w {
        for slice in iota.iter_mut() {
            slice[l][j] = slice[l][k];
        }
        let mass = beta[j][l] + beta[k][l];
        beta[j][l] = share * mass;
        beta[k][l] = (1.0 - share) * mass;
    }
    let mut values = util.values().to_vec();
    values[j] = values[k].clone();
    Ok((
        ConfoundedJoint::new(
            joint.cause_space().clone(),
            joint.effect_space().clone(),
            joint.confounder_space().clone(),
            iota,
            beta,
            joint.gamma_vec().to_vec(),
        )?,
        UtilityTable::new(util.cause_space().clone(), util.effect_space().clone(), values)?,
    ))
}

/// Searches for a confounder distribution `gamma` that makes the observational expected
/// utilities of `c_j` and `c_k` equal, keeping the conditionals fixed: random `gamma` pairs
/// until the constraint residual changes sign, then bisection along the segment between them.
/// Returns `None` when no sign change turns up in `attempts` draws.
pub fn plant_constraint_tie<R: Rng + ?Sized>(
    joint: &ConfoundedJoint<f64>,
    util: &UtilityTable<f64>,
    j: usize,
    k: usize,
    attempts: usize,
    rng: &mut R,
) -> Result<Option<ConfoundedJoint<f64>>> {
    let w = joint.n_confounders();
    let residual = |g: &[f64]| -> Result<f64> { eq_constraint_residual(&joint.with_gamma(g.to_vec())?, util, j, k) };
    let base = joint.gamma_vec().to_vec();
    let r0 = residual(&base)?;
    if r0 == 0.0 {
        return Ok(Some(joint.clone()));
    }
    for _ in 0..attempts {
        let other = sample_simplex(w, rng);
        let r1 = residual(&other)?;
        if r1.signum() == r0.signum() {
            continue;
        }
        let mix = |t: f64| -> Vec<f64> { base.iter().zip(&other).map(|(a, b)| (1.0 - t) * a + t * b).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let r = residual(&mix(mid))?;
            if r == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if r.signum() == r0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(Some(joint.with_gamma(mix(0.5 * (lo + hi)))?));
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantMode {
    /// Exact tie by duplicating one cause value's observational behaviour.
    Duplicate,
    /// Tie by solving the observational-equality constraint for the confounder distribution.
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedReport {
    pub mode: PlantMode,
    pub dims: (usize, usize, usize),
    pub trials: u64,
    /// Trials where a tie was planted and shows up as a shared observational class.
    pub tied: u64,
    /// Tied trials where the pragmatic coarsening is a quotient of the observational one.
    pub refinement_holds: u64,
    /// Tied trials where it is not.
    pub violations: u64,
    /// Largest `|residual| / (p(c_j) p(c_k))` of a planted pair.
    pub max_scaled_residual: f64,
}

impl PlantedReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Plants a tie between causes 0 and 1 in each of `cfg.trials` random instances and checks
/// whether the pragmatic coarsening refines into the observational one (at tolerance `tol`).
pub fn planted_refinement(cfg: &Prop2Config, mode: PlantMode, tol: f64) -> Result<PlantedReport> {
    cfg.validate()?;
    let (m, n, w) = cfg.dims;
    let results: Vec<Option<(bool, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let mut rng = trial_rng(cfg.seed, t);
            let joint = sample_joint(m, n, w, &mut rng)?;
            let util = sample_utility(m, n, cfg.utility_range.0, cfg.utility_range.1, &mut rng)?;
            let (joint, util) = match mode {
                PlantMode::Duplicate => plant_duplicate_tie(&joint, &util, 0, 1, &mut rng)?,
                PlantMode::Constraint => match plant_constraint_tie(&joint, &util, 0, 1, 1000, &mut rng)? {
                    Some(j) => (j, util),
                    None => return Ok(None),
                },
            };
            let opc = observational_pragmatic_causal_coarsening(&observational_cpt(&joint)?, &util, tol)?;
            if opc.class_of(0) != opc.class_of(1) {
                return Ok(None);
            }
            let pc = pragmatic_causal_coarsening(&interventional_cpt(&joint)?, &util, tol)?;
            let marginal = cause_marginal(&joint);
            let res = eq_constraint_residual(&joint, &util, 0, 1)?.abs() / (marginal[0] * marginal[1]);
            Ok(Some((refines(&pc, &opc)?, res)))
        })
        .collect::<Result<_>>()?;
    let tied: Vec<(bool, f64)> = results.into_iter().flatten().collect();
    let holds = tied.iter().filter(|(h, _)| *h).count() as u64;
    Ok(PlantedReport {
        mode,
        dims: cfg.dims,
        trials: cfg.trials,
        tied: tied.len() as u64,
        refinement_holds: holds,
        violations: tied.len() as u64 - holds,
        max_scaled_residual: tied.iter().map(|t| t.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::observational_cpt;

    #[test]
    fn unconfounded_has_no_violations() {
        let cfg = Prop2Config::new((4, 3, 1), 500, vec![1e-1, 1e-2, 1e-3], 5);
        let r = prop2_probe(&cfg).unwrap();
        assert!(r.rows[0].flagged > 0);
        assert!(r.rows.iter().all(|row| row.violations == 0));
    }

    #[test]
    fn probe_is_reproducible() {
        let cfg = Prop2Config::new((3, 3, 2), 200, vec![1e-1, 1e-2], 9);
        assert_eq!(prop2_probe(&cfg).unwrap(), prop2_probe(&cfg).unwrap());
    }

    #[test]
    fn duplicate_tie_is_exact() {
        let mut rng = trial_rng(1, 0);
        let joint = sample_joint(3, 3, 2, &mut rng).unwrap();
        let util = sample_utility(3, 3, 0.0, 10.0, &mut rng).unwrap();
        let (joint, util) = plant_duplicate_tie(&joint, &util, 0, 2, &mut rng).unwrap();
        let obs = observational_cpt(&joint).unwrap();
        for i in 0..3 {
            assert!((obs.prob(0, i) - obs.prob(2, i)).abs() < 1e-12);
        }
        assert!(eq_constraint_residual(&joint, &util, 0, 2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn constraint_tie_solves_residual() {
        let mut found = 0;
        for t in 0..20 {
            let mut rng = trial_rng(2, t);
            let joint = sample_joint(2, 2, 2, &mut rng).unwrap();
            let util = sample_utility(2, 2, 0.0, 10.0, &mut rng).unwrap();
            if let Some(j) = plant_constraint_tie(&joint, &util, 0, 1, 500, &mut rng).unwrap() {
                assert!(eq_constraint_residual(&j, &util, 0, 1).unwrap().abs() < 1e-12);
                found += 1;
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = Prop2Config::new((4, 4, 3), 1, vec![0.1], 0);
        assert!(cfg.validate().is_ok());
        cfg.eps_grid = vec![];
        assert!(cfg.validate().is_err());
        cfg.eps_grid = vec![-1.0];
        assert!(cfg.validate().is_err());
        assert!(Prop2Config::new((1, 4, 3), 1, vec![0.1], 0).validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let r = prop2_probe(&Prop2Config::new((2, 2, 2), 10, vec![0.5, 0.05], 0)).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("eps,flagged,violations,rate\n0.5,"));
        assert_eq!(csv.lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(v["rows"].is_array());
    }
}
