//! Equivalence relations over cause and effect values, and the coarsenings they induce.
//!
//! All comparisons use an absolute tolerance `tol`. Approximate equality is not transitive,
//! so every relation is closed transitively; `tol` should sit below half the smallest real
//! gap between distinct values.

use serde::{Deserialize, Serialize};

use crate::dist::{cause_marginal, interventional_cpt, observational_cpt, ConfoundedJoint};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::scalar::Scalar;
use crate::table::{coarsen_cpt, Cpt, CptKind, UtilityTable};

/// Expected utility of each cause value, `⟨u(c_j, ·), p(· | c_j)⟩`.
///
/// For interventional profiles `eta` holds the maximum expected utility over interventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ExpectedUtilityProfile<T: Scalar> {
    pub values: Vec<T>,
    pub kind: CptKind,
    pub eta: Option<T>,
}

impl<T: Scalar> ExpectedUtilityProfile<T> {
    pub fn from_values(values: Vec<T>, kind: CptKind) -> Self {
        let eta = match kind {
            CptKind::Interventional => Some(max_of(&values)),
            CptKind::Observational => None,
        };
        ExpectedUtilityProfile { values, kind, eta }
    }

    /// Indices attaining the maximum within `tol`.
    pub fn maximizers(&self, tol: T) -> Vec<usize> {
        let best = max_of(&self.values);
        (0..self.values.len())
            .filter(|&j| self.values[j] >= best - tol)
            .collect()
    }
}

fn max_of<T: Scalar>(values: &[T]) -> T {
    values.iter().copied().fold(T::neg_infinity(), T::max)
}

pub fn expected_utilities<T: Scalar>(
    cpt: &Cpt<T>,
    util: &UtilityTable<T>,
) -> Result<ExpectedUtilityProfile<T>> {
    util.check_matches(cpt)?;
    let values = (0..cpt.n_causes())
        .map(|j| {
            cpt.row(j)
                .iter()
                .zip(util.row(j))
                .map(|(&p, &u)| p * u)
                .sum()
        })
        .collect();
    Ok(ExpectedUtilityProfile::from_values(values, cpt.kind()))
}

fn rows_close<T: Scalar>(a: &[T], b: &[T], tol: T) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x.close(y, tol))
}

fn row_partition<T: Scalar>(rows: &[Vec<T>], tol: T) -> Partition {
    Partition::closure_of(rows.len(), |j, k| rows_close(&rows[j], &rows[k], tol))
}

fn column_partition<T: Scalar>(rows: &[Vec<T>], n_cols: usize, tol: T) -> Partition {
    Partition::closure_of(n_cols, |i, s| {
        rows.iter().all(|r| r[i].close(r[s], tol))
    })
}

fn scalar_partition<T: Scalar>(values: &[T], tol: T) -> Partition {
    Partition::closure_of(values.len(), |j, k| values[j].close(values[k], tol))
}

/// Causal coarsening: merges cause values whose interventional effect distributions agree.
pub fn causal_coarsening<T: Scalar>(int_cpt: &Cpt<T>, tol: T) -> Result<Partition> {
    int_cpt.expect_kind(CptKind::Interventional)?;
    Ok(row_partition(int_cpt.rows(), tol))
}

/// Effect coarsening: merges effect values equally probable under every intervention.
pub fn effect_coarsening<T: Scalar>(int_cpt: &Cpt<T>, tol: T) -> Result<Partition> {
    int_cpt.expect_kind(CptKind::Interventional)?;
    Ok(column_partition(int_cpt.rows(), int_cpt.n_effects(), tol))
}

pub fn observational_causal_coarsening<T: Scalar>(obs_cpt: &Cpt<T>, tol: T) -> Result<Partition> {
    obs_cpt.expect_kind(CptKind::Observational)?;
    Ok(row_partition(obs_cpt.rows(), tol))
}

pub fn observational_effect_coarsening<T: Scalar>(obs_cpt: &Cpt<T>, tol: T) -> Result<Partition> {
    obs_cpt.expect_kind(CptKind::Observational)?;
    Ok(column_partition(obs_cpt.rows(), obs_cpt.n_effects(), tol))
}

/// Boolean split of the cause values: those attaining the maximum expected utility over
/// interventions (within `tol`) versus all others.
pub fn pragmatic_causal_coarsening<T: Scalar>(
    int_cpt: &Cpt<T>,
    util: &UtilityTable<T>,
    tol: T,
) -> Result<Partition> {
    int_cpt.expect_kind(CptKind::Interventional)?;
    let profile = expected_utilities(int_cpt, util)?;
    Ok(maximizer_split(&profile.values, tol))
}

fn maximizer_split<T: Scalar>(values: &[T], tol: T) -> Partition {
    let best = max_of(values);
    let keys: Vec<bool> = values.iter().map(|&v| v >= best - tol).collect();
    Partition::from_assignment(&keys)
}

/// Merges effect values with identical utility under every cause value. Does not depend on
/// any probability distribution.
pub fn pragmatic_effect_coarsening<T: Scalar>(util: &UtilityTable<T>, tol: T) -> Partition {
    column_partition(util.values(), util.effect_space().len(), tol)
}

/// Merges cause values with equal observational expected utility.
pub fn observational_pragmatic_causal_coarsening<T: Scalar>(
    obs_cpt: &Cpt<T>,
    util: &UtilityTable<T>,
    tol: T,
) -> Result<Partition> {
    obs_cpt.expect_kind(CptKind::Observational)?;
    let profile = expected_utilities(obs_cpt, util)?;
    Ok(scalar_partition(&profile.values, tol))
}

/// Output of [`pragmatic_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult<T: Scalar> {
    /// Observational pragmatic coarsening of the causes (first step).
    pub observational_partition: Partition,
    /// Interventional expected utility of each observational class (marginal-weighted mixture).
    pub class_utilities: ExpectedUtilityProfile<T>,
    /// Pragmatic causal coarsening, lifted back onto the fine cause values.
    pub cause_partition: Partition,
    /// Pragmatic effect coarsening.
    pub effect_partition: Partition,
    /// Interventional CPT over the pragmatic macro-values.
    pub coarse_cpt: Cpt<T>,
}

/// Learns the pragmatic coarsening of `(C, E)` the economical way: coarsen observationally
/// first, intervene only on the observational classes, then split those classes into
/// maximizers and non-maximizers. Effect values are coarsened from the utility table alone.
pub fn pragmatic_pipeline<T: Scalar>(
    joint: &ConfoundedJoint<T>,
    util: &UtilityTable<T>,
    tol: T,
) -> Result<PipelineResult<T>> {
    let obs = observational_cpt(joint)?;
    let opc = observational_pragmatic_causal_coarsening(&obs, util, tol)?;
    let marginal = cause_marginal(joint);
    let int = interventional_cpt(joint)?;
    let fine_eu = expected_utilities(&int, util)?;

    let mut class_eu = Vec::with_capacity(opc.n_classes());
    for (c, class) in opc.classes().iter().enumerate() {
        let mass: T = class.iter().map(|&j| marginal[j]).sum();
        if !(mass > T::zero()) {
            return Err(Error::DegenerateClass {
                class: c,
                label: opc.macro_labels(joint.cause_space())[c].clone(),
            });
        }
        class_eu.push(
            class
                .iter()
                .map(|&j| marginal[j] * fine_eu.values[j])
                .sum::<T>()
                / mass,
        );
    }
    let coarse_pc = maximizer_split(&class_eu, tol);
    let cause_partition = opc.lift(&coarse_pc)?;
    let effect_partition = pragmatic_effect_coarsening(util, tol);
    let coarse_cpt = coarsen_cpt(&int, &cause_partition, &effect_partition, &marginal)?;
    Ok(PipelineResult {
        observational_partition: opc,
        class_utilities: ExpectedUtilityProfile::from_values(class_eu, CptKind::Interventional),
        cause_partition,
        effect_partition,
        coarse_cpt,
    })
}
