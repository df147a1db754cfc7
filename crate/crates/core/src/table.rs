//! Conditional probability tables, utility tables, and their coarsening onto macro-values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::scalar::Scalar;
use crate::space::ValueSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CptKind {
    Observational,
    Interventional,
}

impl CptKind {
    pub fn name(self) -> &'static str {
        match self {
            CptKind::Observational => "observational",
            CptKind::Interventional => "interventional",
        }
    }
}

impl fmt::Display for CptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Row-stochastic table `p(effect | cause)`, one row per cause value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Cpt<T: Scalar> {
    cause_space: ValueSpace,
    effect_space: ValueSpace,
    rows: Vec<Vec<T>>,
    kind: CptKind,
}

impl<T: Scalar> Cpt<T> {
    pub fn new(
        cause_space: ValueSpace,
        effect_space: ValueSpace,
        rows: Vec<Vec<T>>,
        kind: CptKind,
    ) -> Result<Self> {
        check_shape(&cause_space, &effect_space, &rows)?;
        let slack = T::stochastic_slack();
        let mut rows = rows;
        for (j, row) in rows.iter_mut().enumerate() {
            for (i, p) in row.iter_mut().enumerate() {
                // rounding may push a merged probability a hair past 0 or 1
                if *p >= -slack && *p <= T::one() + slack {
                    *p = p.max(T::zero()).min(T::one());
                } else {
                    return Err(Error::InvalidProbability(format!(
                        "p({} | {}) = {}",
                        effect_space.label(i),
                        cause_space.label(j),
                        *p
                    )));
                }
            }
            let sum: T = row.iter().copied().sum();
            if !sum.close(T::one(), slack) {
                return Err(Error::NotStochastic {
                    row: j,
                    label: cause_space.label(j).to_string(),
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Cpt {
            cause_space,
            effect_space,
            rows,
            kind,
        })
    }

    pub fn cause_space(&self) -> &ValueSpace {
        &self.cause_space
    }

    pub fn effect_space(&self) -> &ValueSpace {
        &self.effect_space
    }

    pub fn kind(&self) -> CptKind {
        self.kind
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, cause: usize) -> &[T] {
        &self.rows[cause]
    }

    pub fn prob(&self, cause: usize, effect: usize) -> T {
        self.rows[cause][effect]
    }

    pub fn n_causes(&self) -> usize {
        self.rows.len()
    }

    pub fn n_effects(&self) -> usize {
        self.effect_space.len()
    }

    /// Same table, reinterpreted under a different kind.
    pub fn with_kind(mut self, kind: CptKind) -> Self {
        self.kind = kind;
        self
    }

    pub(crate) fn expect_kind(&self, kind: CptKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Kind {
                expected: kind.name(),
                found: self.kind.name(),
            });
        }
        Ok(())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<Cpt<U>> {
        Cpt::new(
            self.cause_space.clone(),
            self.effect_space.clone(),
            cast_rows(&self.rows),
            self.kind,
        )
    }
}

/// Utility `u(cause, effect)` over the product of two value spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UtilityTable<T: Scalar> {
    cause_space: ValueSpace,
    effect_space: ValueSpace,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> UtilityTable<T> {
    pub fn new(cause_space: ValueSpace, effect_space: ValueSpace, values: Vec<Vec<T>>) -> Result<Self> {
        check_shape(&cause_space, &effect_space, &values)?;
        if let Some((j, i)) = values
            .iter()
            .enumerate()
            .flat_map(|(j, r)| r.iter().enumerate().map(move |(i, v)| (j, i, v)))
            .find(|(_, _, v)| !v.is_finite())
            .map(|(j, i, _)| (j, i))
        {
            return Err(Error::Input(format!(
                "utility u({}, {}) is not finite",
                cause_space.label(j),
                effect_space.label(i)
            )));
        }
        Ok(UtilityTable {
            cause_space,
            effect_space,
            values,
        })
    }

    /// Table with the same utility everywhere.
    pub fn constant(cause_space: ValueSpace, effect_space: ValueSpace, value: T) -> Result<Self> {
        let values = vec![vec![value; effect_space.len()]; cause_space.len()];
        Self::new(cause_space, effect_space, values)
    }

    pub fn cause_space(&self) -> &ValueSpace {
        &self.cause_space
    }

    pub fn effect_space(&self) -> &ValueSpace {
        &self.effect_space
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn row(&self, cause: usize) -> &[T] {
        &self.values[cause]
    }

    pub fn get(&self, cause: usize, effect: usize) -> T {
        self.values[cause][effect]
    }

    /// Looks up a utility by labels.
    pub fn lookup(&self, cause: &str, effect: &str) -> Option<T> {
        let j = self.cause_space.index_of(cause)?;
        let i = self.effect_space.index_of(effect)?;
        Some(self.values[j][i])
    }

    /// `scale * u + shift`, entrywise.
    pub fn affine(&self, scale: T, shift: T) -> Result<Self> {
        let values = self
            .values
            .iter()
            .map(|r| r.iter().map(|&v| scale * v + shift).collect())
            .collect();
        Self::new(self.cause_space.clone(), self.effect_space.clone(), values)
    }

    pub fn cast<U: Scalar>(&self) -> Result<UtilityTable<U>> {
        UtilityTable::new(
            self.cause_space.clone(),
            self.effect_space.clone(),
            cast_rows(&self.values),
        )
    }

    pub(crate) fn check_matches<U: Scalar>(&self, cpt: &Cpt<U>) -> Result<()> {
        if self.cause_space.len() != cpt.cause_space.len()
            || self.effect_space.len() != cpt.effect_space.len()
        {
            return Err(Error::Shape(format!(
                "utility table is {}x{}, CPT is {}x{}",
                self.cause_space.len(),
                self.effect_space.len(),
                cpt.cause_space.len(),
                cpt.effect_space.len()
            )));
        }
        Ok(())
    }
}

fn check_shape<T>(cause: &ValueSpace, effect: &ValueSpace, rows: &[Vec<T>]) -> Result<()> {
    if rows.len() != cause.len() {
        return Err(Error::Shape(format!(
            "{} rows for {} cause values",
            rows.len(),
            cause.len()
        )));
    }
    if let Some((j, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != effect.len()) {
        return Err(Error::Shape(format!(
            "row {j} has {} entries for {} effect values",
            r.len(),
            effect.len()
        )));
    }
    Ok(())
}

fn cast_rows<T: Scalar, U: Scalar>(rows: &[Vec<T>]) -> Vec<Vec<U>> {
    rows.iter()
        .map(|r| r.iter().map(|v| U::from(*v).unwrap_or_else(U::nan)).collect())
        .collect()
}

/// Within-class weights for cause rows: the marginal renormalized within each class.
fn class_weights<T: Scalar>(
    part: &Partition,
    space: &ValueSpace,
    marginal: &[T],
) -> Result<Vec<Vec<T>>> {
    part.classes()
        .iter()
        .enumerate()
        .map(|(c, class)| {
            let mass: T = class.iter().map(|&j| marginal[j]).sum();
            if !(mass > T::zero()) {
                return Err(Error::DegenerateClass {
                    class: c,
                    label: part.macro_labels(space)[c].clone(),
                });
            }
            Ok(class.iter().map(|&j| marginal[j] / mass).collect())
        })
        .collect()
}

fn check_marginal<T: Scalar>(space: &ValueSpace, marginal: &[T]) -> Result<()> {
    if marginal.len() != space.len() {
        return Err(Error::Shape(format!(
            "cause marginal of length {} for {} cause values",
            marginal.len(),
            space.len()
        )));
    }
    if marginal.iter().any(|&w| !(w >= T::zero())) {
        return Err(Error::InvalidProbability("negative cause marginal".into()));
    }
    let sum: T = marginal.iter().copied().sum();
    if !sum.close(T::one(), T::stochastic_slack()) {
        return Err(Error::InvalidProbability(format!(
            "cause marginal sums to {sum}"
        )));
    }
    Ok(())
}

/// Uniform probability vector of length `n`.
pub fn uniform<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one() / T::from_usize(n).expect("size fits scalar"); n]
}

/// Coarse CPT over macro-values: effect columns within a class are summed, cause rows
/// within a class are mixed with `cause_marginal` renormalized inside the class.
///
/// A coarse intervention on a merged cause class is read as the marginal-weighted mixture
/// of interventions on its members.
pub fn coarsen_cpt<T: Scalar>(
    cpt: &Cpt<T>,
    cause_part: &Partition,
    effect_part: &Partition,
    cause_marginal: &[T],
) -> Result<Cpt<T>> {
    cause_part.check_space(&cpt.cause_space)?;
    effect_part.check_space(&cpt.effect_space)?;
    check_marginal(&cpt.cause_space, cause_marginal)?;
    let weights = class_weights(cause_part, &cpt.cause_space, cause_marginal)?;

    let mut rows = Vec::with_capacity(cause_part.n_classes());
    for (class, w) in cause_part.classes().iter().zip(&weights) {
        let row: Vec<T> = effect_part
            .classes()
            .iter()
            .map(|eclass| {
                class
                    .iter()
                    .zip(w)
                    .map(|(&j, &wj)| wj * eclass.iter().map(|&i| cpt.rows[j][i]).sum::<T>())
                    .sum()
            })
            .collect();
        rows.push(row);
    }
    Cpt::new(
        cause_part.macro_space(&cpt.cause_space)?,
        effect_part.macro_space(&cpt.effect_space)?,
        rows,
        cpt.kind,
    )
}

/// Macro-level utilities.
///
/// Cause rows are mixed with the renormalized `cause_marginal`. Effect columns are weighted
/// by the within-class conditional probabilities from `cpt` when one is given, which makes
/// the coarse expected utilities equal the marginal-weighted fine ones; without a CPT (or when
/// a coarse cell has zero probability mass) effect columns are averaged uniformly.
/// Singleton classes pass through unchanged.
pub fn coarsen_utility<T: Scalar>(
    util: &UtilityTable<T>,
    cause_part: &Partition,
    effect_part: &Partition,
    cause_marginal: &[T],
    cpt: Option<&Cpt<T>>,
) -> Result<UtilityTable<T>> {
    cause_part.check_space(&util.cause_space)?;
    effect_part.check_space(&util.effect_space)?;
    check_marginal(&util.cause_space, cause_marginal)?;
    if let Some(cpt) = cpt {
        util.check_matches(cpt)?;
    }
    let weights = class_weights(cause_part, &util.cause_space, cause_marginal)?;

    let mut values = Vec::with_capacity(cause_part.n_classes());
    for (class, w) in cause_part.classes().iter().zip(&weights) {
        let row: Vec<T> = effect_part
            .classes()
            .iter()
            .map(|eclass| {
                let weighted = cpt.and_then(|cpt| {
                    let mut num = T::zero();
                    let mut den = T::zero();
                    for (&j, &wj) in class.iter().zip(w) {
                        for &i in eclass {
                            let m = wj * cpt.rows[j][i];
                            num = num + m * util.values[j][i];
                            den = den + m;
                        }
                    }
                    (den > T::zero()).then(|| num / den)
                });
                weighted.unwrap_or_else(|| {
                    let ne = T::from_usize(eclass.len()).expect("size fits scalar");
                    class
                        .iter()
                        .zip(w)
                        .map(|(&j, &wj)| {
                            wj * eclass.iter().map(|&i| util.values[j][i]).sum::<T>() / ne
                        })
                        .sum()
                })
            })
            .collect();
        values.push(row);
    }
    UtilityTable::new(
        cause_part.macro_space(&util.cause_space)?,
        effect_part.macro_space(&util.effect_space)?,
        values,
    )
}
