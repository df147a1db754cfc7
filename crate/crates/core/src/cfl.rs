//! Sample-based observational causal feature learning.
//!
//! The cause coarsening `W` clusters the regressed conditional expectation `f(c) = E[e | c]`;
//! the effect coarsening `T` clusters kNN distance features `g(e)` computed within each
//! cause class.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_weighted, knn_mean, kth_neighbor_distance, ClusterConfig};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::sample::{Column, Levels, SampleSet};
use crate::space::ValueSpace;
use crate::table::{Cpt, CptKind};

/// How labelled effects are turned into numbers for regression and kNN distances.
/// Vector effects are always used as given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectCoding {
    /// Parse each label as a number.
    #[default]
    Numeric,
    /// Code each distinct label by its position (0, 1, ...) in the effect space.
    Enumeration,
    /// Explicit label → code table.
    Codes(Vec<(String, f64)>),
    /// One-hot vectors, so that `f(c)` estimates the whole conditional distribution.
    Indicator,
}

impl EffectCoding {
    /// Coordinates of every distinct effect value.
    pub fn encode(&self, levels: &Levels) -> Result<Vec<Vec<f64>>> {
        if let Some(points) = &levels.points {
            return Ok(points.clone());
        }
        let labels = levels.space.labels();
        let n = labels.len();
        match self {
            EffectCoding::Numeric => labels
                .iter()
                .map(|l| {
                    l.trim().parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| vec![x]).ok_or_else(|| {
                        Error::Coding(format!(
                            "effect label {l:?} is not numeric; supply codes or use enumeration/indicator coding"
                        ))
                    })
                })
                .collect(),
            EffectCoding::Enumeration => Ok((0..n).map(|i| vec![i as f64]).collect()),
            EffectCoding::Codes(codes) => labels
                .iter()
                .map(|l| {
                    codes
                        .iter()
                        .find(|(k, _)| k == l)
                        .map(|(_, v)| vec![*v])
                        .ok_or_else(|| Error::Coding(format!("no code for effect label {l:?}")))
                })
                .collect(),
            EffectCoding::Indicator => Ok((0..n)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v
                })
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CflOptions {
    pub cluster: ClusterConfig,
    pub coding: EffectCoding,
    /// Additive (Laplace) smoothing of the empirical coarse CPT.
    pub smoothing: f64,
}

impl CflOptions {
    pub fn new(cluster: ClusterConfig) -> Self {
        CflOptions {
            cluster,
            coding: EffectCoding::default(),
            smoothing: 0.0,
        }
    }

    pub fn with_coding(mut self, coding: EffectCoding) -> Self {
        self.coding = coding;
        self
    }

    pub fn with_smoothing(mut self, alpha: f64) -> Self {
        self.smoothing = alpha;
        self
    }
}

/// A regressed statistic for every distinct cause value.
#[derive(Debug, Clone, PartialEq)]
pub struct Regression {
    pub levels: Levels,
    pub values: Vec<Vec<f64>>,
}

impl Regression {
    pub fn get(&self, label: &str) -> Option<&[f64]> {
        self.levels.space.index_of(label).map(|i| self.values[i].as_slice())
    }
}

/// Output of a CFL or PCFL run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseningResult {
    /// Distinct observed cause values.
    pub cause_space: ValueSpace,
    /// Distinct observed effect values.
    pub effect_space: ValueSpace,
    pub cause_partition: Partition,
    pub effect_partition: Partition,
    /// Empirical `p(effect class | cause class)` from counts.
    pub coarse_cpt: Cpt<f64>,
    /// Regressed statistic `f(c)` per distinct cause value.
    pub cause_statistic: Vec<Vec<f64>>,
    /// Feature vector `g(e)` per distinct effect value.
    pub effect_features: Vec<Vec<f64>>,
    /// Cause class of every record.
    pub cause_classes: Vec<usize>,
    /// Effect class of every record.
    pub effect_classes: Vec<usize>,
}

impl CoarseningResult {
    pub fn cause_classes_labelled(&self) -> Vec<Vec<String>> {
        self.cause_partition.labelled_classes(&self.cause_space)
    }

    pub fn effect_classes_labelled(&self) -> Vec<Vec<String>> {
        self.effect_partition.labelled_classes(&self.effect_space)
    }
}

/// Per-group mean of `targets` for labelled causes; kNN regression (over `knn_k` nearest
/// records, including the record itself) for vector causes.
pub(crate) fn regress(causes: &Column, targets: &[Vec<f64>], knn_k: usize) -> Result<Regression> {
    let levels = causes.levels("c")?;
    let dim = targets[0].len();
    let values = match (causes, &levels.points) {
        (Column::Vectors { rows, .. }, Some(points)) => points
            .par_iter()
            .map(|p| knn_mean(p, rows, targets, knn_k))
            .collect(),
        _ => {
            let mut sums = vec![vec![0.0; dim]; levels.space.len()];
            for (&c, t) in levels.index.iter().zip(targets) {
                for (s, x) in sums[c].iter_mut().zip(t) {
                    *s += x;
                }
            }
            sums.into_iter()
                .zip(&levels.counts)
                .map(|(s, &n)| s.into_iter().map(|x| x / n as f64).collect())
                .collect()
        }
    };
    Ok(Regression { levels, values })
}

/// Least-squares regression of the coded effect on the cause.
pub fn regress_conditional_mean(data: &SampleSet, coding: &EffectCoding, knn_k: usize) -> Result<Regression> {
    if knn_k == 0 {
        return Err(Error::Config("knn_k must be at least 1".into()));
    }
    let effects = data.effects().levels("e")?;
    let coded = coding.encode(&effects)?;
    let targets: Vec<Vec<f64>> = effects.index.iter().map(|&i| coded[i].clone()).collect();
    regress(data.causes(), &targets, knn_k)
}

/// Clusters the distinct values' statistics, weighting each by its multiplicity.
pub(crate) fn partition_by_clustering(values: &[Vec<f64>], counts: &[usize], cfg: &ClusterConfig) -> Result<Partition> {
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let labels = cluster_weighted(values, &weights, cfg)?;
    Ok(Partition::from_assignment(&labels))
}

/// kNN distance features of every distinct effect value, one coordinate per cause class.
fn effect_knn_features(
    points: &[Vec<f64>],
    effect_index: &[usize],
    cause_classes: &[usize],
    class_names: &[String],
    knn_k: usize,
) -> Result<Vec<Vec<f64>>> {
    let n_classes = class_names.len();
    let mut counts = vec![vec![0usize; points.len()]; n_classes];
    for (&e, &b) in effect_index.iter().zip(cause_classes) {
        counts[b][e] += 1;
    }
    for (b, c) in counts.iter().enumerate() {
        let size: usize = c.iter().sum();
        if size.saturating_sub(1) < knn_k {
            return Err(Error::UndersizedCluster {
                cluster: class_names[b].clone(),
                available: size.saturating_sub(1),
                needed: knn_k,
            });
        }
    }
    Ok(points
        .par_iter()
        .map(|q| {
            counts
                .iter()
                .map(|c| kth_neighbor_distance(q, points, c, knn_k).expect("cluster size checked"))
                .collect()
        })
        .collect())
}

/// Distance from each record's effect to its `knn_k`-th nearest neighbour among the effects
/// of every cause class. `cause_labels` gives each record's cause class.
pub fn knn_features(
    data: &SampleSet,
    coding: &EffectCoding,
    cause_labels: &[usize],
    knn_k: usize,
) -> Result<Vec<Vec<f64>>> {
    if cause_labels.len() != data.len() {
        return Err(Error::Shape(format!(
            "{} cause labels for {} records",
            cause_labels.len(),
            data.len()
        )));
    }
    if knn_k == 0 {
        return Err(Error::Config("knn_k must be at least 1".into()));
    }
    let effects = data.effects().levels("e")?;
    let points = coding.encode(&effects)?;
    let n_classes = cause_labels.iter().max().map_or(0, |m| m + 1);
    let names: Vec<String> = (0..n_classes).map(|b| b.to_string()).collect();
    let per_value = effect_knn_features(&points, &effects.index, cause_labels, &names, knn_k)?;
    Ok(effects.index.iter().map(|&e| per_value[e].clone()).collect())
}

/// Names of the coarse values: joined member labels for labelled data, `prefix0, ...` for
/// vector data, where member labels are synthetic.
pub(crate) fn coarse_space(part: &Partition, levels: &Levels, prefix: &str) -> Result<ValueSpace> {
    if levels.points.is_some() {
        ValueSpace::indexed(prefix, part.n_classes())
    } else {
        part.macro_space(&levels.space)
    }
}

/// Row-normalized class co-occurrence counts, with additive smoothing `alpha`.
pub(crate) fn empirical_coarse_cpt(
    cause_space: ValueSpace,
    effect_space: ValueSpace,
    cause_classes: &[usize],
    effect_classes: &[usize],
    alpha: f64,
) -> Result<Cpt<f64>> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("smoothing {alpha} must be finite and >= 0")));
    }
    let (m, n) = (cause_space.len(), effect_space.len());
    let mut counts = vec![vec![0usize; n]; m];
    for (&b, &t) in cause_classes.iter().zip(effect_classes) {
        counts[b][t] += 1;
    }
    let rows = counts
        .iter()
        .map(|row| {
            let total = row.iter().sum::<usize>() as f64 + alpha * n as f64;
            row.iter().map(|&c| (c as f64 + alpha) / total).collect()
        })
        .collect();
    Cpt::new(cause_space, effect_space, rows, CptKind::Observational)
}

pub(crate) struct Assembled {
    pub cause_levels: Levels,
    pub effect_levels: Levels,
    pub cause_partition: Partition,
    pub effect_partition: Partition,
    pub cause_statistic: Vec<Vec<f64>>,
    pub effect_features: Vec<Vec<f64>>,
}

pub(crate) fn assemble(parts: Assembled, smoothing: f64) -> Result<CoarseningResult> {
    let Assembled {
        cause_levels,
        effect_levels,
        cause_partition,
        effect_partition,
        cause_statistic,
        effect_features,
    } = parts;
    let cause_classes: Vec<usize> = cause_levels.index.iter().map(|&c| cause_partition.class_of(c)).collect();
    let effect_classes: Vec<usize> = effect_levels.index.iter().map(|&e| effect_partition.class_of(e)).collect();
    let coarse_cpt = empirical_coarse_cpt(
        coarse_space(&cause_partition, &cause_levels, "C")?,
        coarse_space(&effect_partition, &effect_levels, "E")?,
        &cause_classes,
        &effect_classes,
        smoothing,
    )?;
    Ok(CoarseningResult {
        cause_space: cause_levels.space,
        effect_space: effect_levels.space,
        cause_partition,
        effect_partition,
        coarse_cpt,
        cause_statistic,
        effect_features,
        cause_classes,
        effect_classes,
    })
}

/// Runs observational CFL on a dataset.
pub fn run_cfl(data: &SampleSet, opts: &CflOptions) -> Result<CoarseningResult> {
    let cfg = &opts.cluster;
    cfg.validate()?;
    let effect_levels = data.effects().levels("e")?;
    let points = opts.coding.encode(&effect_levels)?;
    let targets: Vec<Vec<f64>> = effect_levels.index.iter().map(|&i| points[i].clone()).collect();

    let f = regress(data.causes(), &targets, cfg.knn_k)?;
    let cause_partition = partition_by_clustering(&f.values, &f.levels.counts, cfg)?;

    let cause_classes: Vec<usize> = f.levels.index.iter().map(|&c| cause_partition.class_of(c)).collect();
    let names = coarse_space(&cause_partition, &f.levels, "C")?.labels().to_vec();
    let g = effect_knn_features(&points, &effect_levels.index, &cause_classes, &names, cfg.knn_k)?;
    let effect_partition = partition_by_clustering(&g, &effect_levels.counts, cfg)?;

    assemble(
        Assembled {
            cause_levels: f.levels,
            effect_levels,
            cause_partition,
            effect_partition,
            cause_statistic: f.values,
            effect_features: g,
        },
        opts.smoothing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::observational_causal_coarsening;

    fn repeat(pairs: &[(&str, &str, usize)]) -> SampleSet {
        let mut out = Vec::new();
        for &(c, e, n) in pairs {
            out.extend(std::iter::repeat_n((c, e), n));
        }
        SampleSet::from_pairs(&out).unwrap()
    }

    #[test]
    fn conditional_mean_arithmetic() {
        let data = SampleSet::from_pairs(&[("a", "1"), ("a", "3"), ("b", "2")]).unwrap();
        let f = regress_conditional_mean(&data, &EffectCoding::Numeric, 5).unwrap();
        assert_eq!(f.get("a"), Some(&[2.0][..]));
        assert_eq!(f.get("b"), Some(&[2.0][..]));
    }

    #[test]
    fn single_sample_per_cause() {
        let data = SampleSet::from_pairs(&[("a", "7"), ("b", "-1.5")]).unwrap();
        let f = regress_conditional_mean(&data, &EffectCoding::Numeric, 5).unwrap();
        assert_eq!(f.get("a"), Some(&[7.0][..]));
        assert_eq!(f.get("b"), Some(&[-1.5][..]));
    }

    #[test]
    fn non_numeric_effects_need_a_coding() {
        let data = SampleSet::from_pairs(&[("a", "low"), ("b", "high")]).unwrap();
        let err = regress_conditional_mean(&data, &EffectCoding::Numeric, 5).unwrap_err();
        assert!(matches!(err, Error::Coding(_)));
        let f = regress_conditional_mean(&data, &EffectCoding::Enumeration, 5).unwrap();
        assert_eq!(f.get("b"), Some(&[1.0][..]));
        let codes = EffectCoding::Codes(vec![("low".into(), -3.0), ("high".into(), 3.0)]);
        assert_eq!(regress_conditional_mean(&data, &codes, 5).unwrap().get("a"), Some(&[-3.0][..]));
        let missing = EffectCoding::Codes(vec![("low".into(), 0.0)]);
        assert!(matches!(regress_conditional_mean(&data, &missing, 5), Err(Error::Coding(_))));
    }

    #[test]
    fn indicator_coding_estimates_distribution() {
        let data = repeat(&[("a", "x", 1), ("a", "y", 3)]);
        let f = regress_conditional_mean(&data, &EffectCoding::Indicator, 5).unwrap();
        assert_eq!(f.get("a"), Some(&[0.25, 0.75][..]));
    }

    #[test]
    fn knn_single_cluster() {
        let data = SampleSet::from_pairs(&[("a", "0"), ("a", "1"), ("a", "2"), ("a", "3")]).unwrap();
        let g = knn_features(&data, &EffectCoding::Numeric, &[0, 0, 0, 0], 1).unwrap();
        assert_eq!(g[0], vec![1.0]);
        assert_eq!(g[3], vec![1.0]);
    }

    #[test]
    fn knn_symmetric_clusters() {
        let data = repeat(&[("a", "0", 2), ("a", "5", 3), ("b", "0", 2), ("b", "5", 3)]);
        let labels: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let g = knn_features(&data, &EffectCoding::Numeric, &labels, 2).unwrap();
        assert_eq!(g[0][0], g[0][1]);
        assert_eq!(g[0], g[5]);
        assert_eq!(g[2], g[7]);
    }

    #[test]
    fn knn_undersized_cluster_is_named() {
        let data = SampleSet::from_pairs(&[("a", "0"), ("a", "1"), ("b", "2")]).unwrap();
        let err = knn_features(&data, &EffectCoding::Numeric, &[0, 0, 1], 1).unwrap_err();
        assert!(matches!(err, Error::UndersizedCluster { ref cluster, .. } if cluster == "1"));
    }

    #[test]
    fn identical_rows_give_one_cause_class() {
        let data = repeat(&[("a", "0", 3), ("a", "1", 7), ("b", "0", 3), ("b", "1", 7), ("c", "0", 3), ("c", "1", 7)]);
        let opts = CflOptions::new(ClusterConfig::tolerance(1e-9).with_knn_k(2));
        let r = run_cfl(&data, &opts).unwrap();
        assert_eq!(r.cause_partition.n_classes(), 1);
        assert_eq!(r.coarse_cpt.n_causes(), 1);
        assert_eq!(r.coarse_cpt.cause_space().label(0), "a∨b∨c");
        for row in r.coarse_cpt.rows() {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn mean_heuristic_merges_distinct_distributions() {
        // equal conditional means, different conditional distributions
        let data = repeat(&[("a", "0", 10), ("b", "-1", 5), ("b", "1", 5)]);
        let opts = CflOptions::new(ClusterConfig::tolerance(1e-9).with_knn_k(1));
        let r = run_cfl(&data, &opts).unwrap();
        assert_eq!(r.cause_partition, Partition::whole(2));

        let exact = Cpt::new(
            r.cause_space.clone(),
            r.effect_space.clone(),
            vec![vec![0.0, 1.0, 0.0], vec![0.5, 0.0, 0.5]],
            CptKind::Observational,
        )
        .unwrap();
        assert_eq!(r.effect_space.labels(), ["-1", "0", "1"]);
        assert_eq!(observational_causal_coarsening(&exact, 1e-9).unwrap(), Partition::singletons(2));

        let indicator = run_cfl(&data, &opts.clone().with_coding(EffectCoding::Indicator)).unwrap();
        assert_eq!(indicator.cause_partition, Partition::singletons(2));
    }

    #[test]
    fn smoothing() {
        let data = repeat(&[("a", "0", 3), ("a", "1", 1), ("b", "0", 2), ("b", "1", 2)]);
        let opts = CflOptions::new(ClusterConfig::tolerance(1e-9).with_knn_k(1)).with_smoothing(1.0);
        let r = run_cfl(&data, &opts).unwrap();
        assert_eq!(r.coarse_cpt.row(0), &[4.0 / 6.0, 2.0 / 6.0]);
        assert!(run_cfl(&data, &opts.clone().with_smoothing(-1.0)).is_err());
    }

    #[test]
    fn vector_mode_kmeans() {
        let mut causes = Vec::new();
        let mut effects = Vec::new();
        for i in 0..40 {
            let hi = i % 2 == 0;
            let jitter = (i as f64 * 0.7).sin() * 0.01;
            causes.push(vec![if hi { 5.0 } else { 0.0 } + jitter, jitter]);
            effects.push(vec![if hi { 1.0 } else { -1.0 } + jitter]);
        }
        let data = SampleSet::new(
            Column::vectors(causes).unwrap(),
            Column::vectors(effects).unwrap(),
            None,
        )
        .unwrap();
        let opts = CflOptions::new(ClusterConfig::kmeans(2, 3).with_knn_k(3));
        let r = run_cfl(&data, &opts).unwrap();
        assert_eq!(r.cause_partition.n_classes(), 2);
        assert_eq!(r.coarse_cpt.cause_space().labels(), ["C0", "C1"]);
        for (i, &c) in r.cause_classes.iter().enumerate() {
            assert_eq!(c, r.cause_classes[i % 2]);
        }
        assert_eq!(run_cfl(&data, &opts).unwrap(), r);
    }
}
