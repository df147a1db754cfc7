//! Sample-based pragmatic causal feature learning.
//!
//! Causes are coarsened by their conditional expected utility `E[u | c]`, effects by their
//! utility profile across cause values.

use serde::{Deserialize, Serialize};

use crate::cfl::{assemble, partition_by_clustering, regress, Assembled, CoarseningResult, Regression};
use crate::cluster::ClusterConfig;
use crate::error::{Error, Result};
use crate::sample::{Column, Levels, SampleSet};
use crate::table::UtilityTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcflOptions {
    pub cluster: ClusterConfig,
    /// Additive (Laplace) smoothing of the empirical coarse CPT.
    pub smoothing: f64,
}

impl PcflOptions {
    pub fn new(cluster: ClusterConfig) -> Self {
        PcflOptions { cluster, smoothing: 0.0 }
    }

    pub fn with_smoothing(mut self, alpha: f64) -> Self {
        self.smoothing = alpha;
        self
    }
}

fn utilities(data: &SampleSet) -> Result<&[f64]> {
    data.utilities()
        .ok_or_else(|| Error::Input("dataset has no utility column".into()))
}

/// Per-cause mean of the observed utilities.
pub fn regress_conditional_utility(data: &SampleSet, knn_k: usize) -> Result<Regression> {
    if knn_k == 0 {
        return Err(Error::Config("knn_k must be at least 1".into()));
    }
    let targets: Vec<Vec<f64>> = utilities(data)?.iter().map(|&u| vec![u]).collect();
    regress(data.causes(), &targets, knn_k)
}

/// Utility profile of every distinct effect value.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectProfiles {
    pub effect_levels: Levels,
    pub cause_levels: Levels,
    /// `profiles[e][c] = u(c, e)` for labelled data.
    pub profiles: Vec<Vec<f64>>,
}

/// Profile `[u(c_1, e), ..., u(c_m, e)]` across the observed cause values, for every observed
/// effect value `e`.
///
/// Utilities come from `table` when given, otherwise from the records (averaged over repeats),
/// in which case every (cause, effect) pair must have been observed. When either side holds
/// vectors the profile is the effect's mean observed utility alone.
pub fn effect_utility_profiles(data: &SampleSet, table: Option<&UtilityTable<f64>>) -> Result<EffectProfiles> {
    let cause_levels = data.causes().levels("c")?;
    let effect_levels = data.effects().levels("e")?;
    let (m, n) = (cause_levels.space.len(), effect_levels.space.len());
    let vector_mode = cause_levels.points.is_some() || effect_levels.points.is_some();

    let profiles = if let Some(table) = table {
        if vector_mode {
            return Err(Error::Input("a utility table needs labelled causes and effects".into()));
        }
        let cause_idx = lookup_all(&cause_levels, table.cause_space().labels(), "cause")?;
        let effect_idx = lookup_all(&effect_levels, table.effect_space().labels(), "effect")?;
        effect_idx
            .iter()
            .map(|&e| cause_idx.iter().map(|&c| table.get(c, e)).collect())
            .collect()
    } else if vector_mode {
        let u = utilities(data)?;
        let mut sums = vec![0.0; n];
        for (&e, &x) in effect_levels.index.iter().zip(u) {
            sums[e] += x;
        }
        sums.iter()
            .zip(&effect_levels.counts)
            .map(|(s, &k)| vec![s / k as f64])
            .collect()
    } else {
        let u = utilities(data)?;
        let mut sums = vec![vec![0.0; m]; n];
        let mut seen = vec![vec![0usize; m]; n];
        for ((&c, &e), &x) in cause_levels.index.iter().zip(&effect_levels.index).zip(u) {
            sums[e][c] += x;
            seen[e][c] += 1;
        }
        let mut missing = Vec::new();
        for c in 0..m {
            for e in 0..n {
                if seen[e][c] == 0 {
                    missing.push((
                        cause_levels.space.label(c).to_string(),
                        effect_levels.space.label(e).to_string(),
                    ));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Coverage { missing });
        }
        sums.iter()
            .zip(&seen)
            .map(|(s, k)| s.iter().zip(k).map(|(x, &k)| x / k as f64).collect())
            .collect()
    };
    Ok(EffectProfiles {
        effect_levels,
        cause_levels,
        profiles,
    })
}

fn lookup_all(levels: &Levels, table_labels: &[String], side: &str) -> Result<Vec<usize>> {
    levels
        .space
        .labels()
        .iter()
        .map(|l| {
            table_labels
                .iter()
                .position(|t| t == l)
                .ok_or_else(|| Error::Input(format!("utility table has no {side} value {l:?}")))
        })
        .collect()
}

/// Attaches utilities looked up in `table` to a labelled dataset.
pub fn attach_utilities(data: &SampleSet, table: &UtilityTable<f64>) -> Result<SampleSet> {
    let (Column::Labels(causes), Column::Labels(effects)) = (data.causes(), data.effects()) else {
        return Err(Error::Input("a utility table needs labelled causes and effects".into()));
    };
    let u = causes
        .iter()
        .zip(effects)
        .map(|(c, e)| {
            table
                .lookup(c, e)
                .ok_or_else(|| Error::Input(format!("utility table has no entry for ({c}, {e})")))
        })
        .collect::<Result<Vec<f64>>>()?;
    data.clone().with_utilities(u)
}

/// Runs PCFL. Records without utilities take them from `table`; effect profiles use `table`
/// when it is given.
pub fn run_pcfl(data: &SampleSet, opts: &PcflOptions, table: Option<&UtilityTable<f64>>) -> Result<CoarseningResult> {
    let cfg = &opts.cluster;
    cfg.validate()?;
    let owned;
    let data = match (data.has_utilities(), table) {
        (true, _) => data,
        (false, Some(t)) => {
            owned = attach_utilities(data, t)?;
            &owned
        }
        (false, None) => return Err(Error::Input("PCFL needs a utility column or a utility table".into())),
    };

    let f = regress_conditional_utility(data, cfg.knn_k)?;
    let cause_partition = partition_by_clustering(&f.values, &f.levels.counts, cfg)?;

    let g = effect_utility_profiles(data, table)?;
    let effect_partition = partition_by_clustering(&g.profiles, &g.effect_levels.counts, cfg)?;

    assemble(
        Assembled {
            cause_levels: f.levels,
            effect_levels: g.effect_levels,
            cause_partition,
            effect_partition,
            cause_statistic: f.values,
            effect_features: g.profiles,
        },
        opts.smoothing,
    )
}

pub const RBF_MEAN: f64 = 26.0;
pub const RBF_BANDWIDTH: f64 = 0.02;
pub const RBF_SHIFT: f64 = -1.0;

/// Shifted Gaussian utility of a temperature `y` (°C), rounded to one decimal first:
/// `shift + exp(-(y* - mean)² / bandwidth) / sqrt(bandwidth·π)`.
///
/// The formula as usually printed has a positive exponent, which makes the utility blow up
/// away from `mean`; the kernel is implemented with the negative exponent.
pub fn rbf_utility(y: f64, mean: f64, bandwidth: f64, shift: f64) -> Result<f64> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Config(format!("bandwidth {bandwidth} must be positive")));
    }
    if !y.is_finite() {
        return Err(Error::Input(format!("temperature {y} is not finite")));
    }
    let y = (y * 10.0).round() / 10.0;
    let d = y - mean;
    Ok(shift + (-d * d / bandwidth).exp() / (bandwidth * std::f64::consts::PI).sqrt())
}

/// [`rbf_utility`] with the default mean 26, bandwidth 0.02 and shift −1.
pub fn rbf_utility_default(y: f64) -> Result<f64> {
    rbf_utility(y, RBF_MEAN, RBF_BANDWIDTH, RBF_SHIFT)
}
