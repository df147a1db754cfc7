//! Observed (cause, effect[, utility]) records.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::ValueSpace;

/// One side of a dataset: either discrete labels or real vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Labels(Vec<String>),
    Vectors { dim: usize, rows: Vec<Vec<f64>> },
}

impl Column {
    pub fn labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Column::Labels(labels.into_iter().map(Into::into).collect())
    }

    pub fn vectors(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if dim == 0 && !rows.is_empty() {
            return Err(Error::Input("vector column with dimension 0".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Input(format!(
                    "record {i} has dimension {}, expected {dim}",
                    r.len()
                )));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input(format!("record {i} has a non-finite coordinate")));
            }
        }
        Ok(Column::Vectors { dim, rows })
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Labels(l) => l.len(),
            Column::Vectors { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Column::Vectors { .. })
    }

    /// Distinct values of the column and the index of each record's value.
    pub fn levels(&self, prefix: &str) -> Result<Levels> {
        match self {
            Column::Labels(labels) => Levels::from_labels(labels),
            Column::Vectors { rows, .. } => Levels::from_vectors(rows, prefix),
        }
    }
}

/// Distinct values observed in a column.
///
/// Labels are ordered numerically when every label parses as a number, otherwise by first
/// appearance. Vectors are ordered by first appearance and labelled `prefix0, prefix1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub space: ValueSpace,
    /// Coordinates of each distinct value (vector columns only).
    pub points: Option<Vec<Vec<f64>>>,
    /// Distinct-value index of every record.
    pub index: Vec<usize>,
    /// Number of records taking each distinct value.
    pub counts: Vec<usize>,
}

impl Levels {
    fn from_labels(labels: &[String]) -> Result<Self> {
        let mut order: Vec<&String> = Vec::new();
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for l in labels {
            if seen.insert(l.as_str(), ()).is_none() {
                order.push(l);
            }
        }
        let numeric: Option<Vec<f64>> = order.iter().map(|l| l.trim().parse::<f64>().ok()).collect();
        if let Some(values) = numeric {
            let mut idx: Vec<usize> = (0..order.len()).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            order = idx.into_iter().map(|i| order[i]).collect();
        }
        let space = ValueSpace::new(order.iter().map(|s| s.as_str()))?;
        let pos: HashMap<&str, usize> = order.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let index: Vec<usize> = labels.iter().map(|l| pos[l.as_str()]).collect();
        Ok(Self::finish(space, None, index))
    }

    fn from_vectors(rows: &[Vec<f64>], prefix: &str) -> Result<Self> {
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut pos: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut index = Vec::with_capacity(rows.len());
        for r in rows {
            // +0.0 and -0.0 are the same point
            let key: Vec<u64> = r.iter().map(|x| (x + 0.0).to_bits()).collect();
            let next = points.len();
            let id = *pos.entry(key).or_insert(next);
            if id == next {
                points.push(r.clone());
            }
            index.push(id);
        }
        let space = ValueSpace::indexed(prefix, points.len())?;
        Ok(Self::finish(space, Some(points), index))
    }

    fn finish(space: ValueSpace, points: Option<Vec<Vec<f64>>>, index: Vec<usize>) -> Self {
        let mut counts = vec![0; space.len()];
        for &i in &index {
            counts[i] += 1;
        }
        Levels {
            space,
            points,
            index,
            counts,
        }
    }
}

/// A dataset of (cause, effect) records with optional per-record utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    causes: Column,
    effects: Column,
    utilities: Option<Vec<f64>>,
}

impl SampleSet {
    pub fn new(causes: Column, effects: Column, utilities: Option<Vec<f64>>) -> Result<Self> {
        if causes.is_empty() {
            return Err(Error::Input("dataset has no records".into()));
        }
        if causes.len() != effects.len() {
            return Err(Error::Input(format!(
                "{} causes but {} effects",
                causes.len(),
                effects.len()
            )));
        }
        if let Some(u) = &utilities {
            if u.len() != causes.len() {
                return Err(Error::Input(format!(
                    "{} utilities for {} records",
                    u.len(),
                    causes.len()
                )));
            }
            if let Some(i) = u.iter().position(|x| !x.is_finite()) {
                return Err(Error::Input(format!("record {i} has a non-finite utility")));
            }
        }
        Ok(SampleSet {
            causes,
            effects,
            utilities,
        })
    }

    /// Discrete dataset from (cause, effect) label pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        Self::new(
            Column::labels(pairs.iter().map(|(c, _)| c.as_ref())),
            Column::labels(pairs.iter().map(|(_, e)| e.as_ref())),
            None,
        )
    }

    /// Discrete dataset from (cause, effect, utility) triples.
    pub fn from_triples<S: AsRef<str>>(triples: &[(S, S, f64)]) -> Result<Self> {
        Self::new(
            Column::labels(triples.iter().map(|(c, _, _)| c.as_ref())),
            Column::labels(triples.iter().map(|(_, e, _)| e.as_ref())),
            Some(triples.iter().map(|t| t.2).collect()),
        )
    }

    pub fn len(&self) -> usize {
        self.causes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.causes.is_empty()
    }

    pub fn causes(&self) -> &Column {
        &self.causes
    }

    pub fn effects(&self) -> &Column {
        &self.effects
    }

    pub fn utilities(&self) -> Option<&[f64]> {
        self.utilities.as_deref()
    }

    pub fn has_utilities(&self) -> bool {
        self.utilities.is_some()
    }

    pub fn with_utilities(self, utilities: Vec<f64>) -> Result<Self> {
        Self::new(self.causes, self.effects, Some(utilities))
    }

    pub fn without_utilities(mut self) -> Self {
        self.utilities = None;
        self
    }
}
