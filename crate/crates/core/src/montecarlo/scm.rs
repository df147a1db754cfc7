use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};

use crate::dist::ConfoundedJoint;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::pcfl::attach_utilities;
use crate::sample::{Column, SampleSet};
use crate::space::ValueSpace;
use crate::table::{Cpt, UtilityTable};

/// Confounder value `Z1` that accompanies cause value `c` in the simulation model: 0 for
/// negative causes, 1 for positive ones.
pub fn fig1_confounder_of(c: f64) -> usize {
    usize::from(c > 0.0)
}

/// Multinomial-logit model `p(E | C=c, Z1=z) = softmax(alpha + c·beta + z·gamma)`, with the
/// first effect value as the reference category (its coefficients are 0).
#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl LogitFit {
    pub fn logits(&self, c: f64, z: f64) -> Vec<f64> {
        (0..self.alpha.len())
            .map(|i| self.alpha[i] + c * self.beta[i] + z * self.gamma[i])
            .collect()
    }

    pub fn probs(&self, c: f64, z: f64) -> Vec<f64> {
        let logits = self.logits(c, z);
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<f64> = logits.iter().map(|x| (x - top).exp()).collect();
        let s: f64 = ex.iter().sum();
        ex.into_iter().map(|x| x / s).collect()
    }
}

fn numeric_labels(space: &ValueSpace) -> Result<Vec<f64>> {
    space
        .labels()
        .iter()
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Input(format!("cause label {l:?} is not numeric")))
        })
        .collect()
}

/// Least-squares fit of the logit model to the rows of `table`, each observed at
/// `Z1 = fig1_confounder_of(c)`.
///
/// The four-valued table is not exactly representable by the model, so log-odds against the
/// reference effect are fitted per effect value by solving the normal equations.
pub fn fit_fig1_logits(table: &Cpt<f64>) -> Result<LogitFit> {
    let cs = numeric_labels(table.cause_space())?;
    let n = table.n_effects();
    let mut xtx = Matrix3::<f64>::zeros();
    for &c in &cs {
        let x = Vector3::new(1.0, c, fig1_confounder_of(c) as f64);
        xtx += x * x.transpose();
    }
    let lu = xtx.lu();
    let mut fit = LogitFit {
        alpha: vec![0.0; n],
        beta: vec![0.0; n],
        gamma: vec![0.0; n],
    };
    for i in 1..n {
        let mut xty = Vector3::<f64>::zeros();
        for (j, &c) in cs.iter().enumerate() {
            let (p0, pi) = (table.prob(j, 0), table.prob(j, i));
            if p0 <= 0.0 || pi <= 0.0 {
                return Err(Error::Solver(format!(
                    "zero probability in row {} has no log-odds",
                    table.cause_space().label(j)
                )));
            }
            xty += Vector3::new(1.0, c, fig1_confounder_of(c) as f64) * (pi / p0).ln();
        }
        let theta = lu
            .solve(&xty)
            .ok_or_else(|| Error::Solver("singular normal equations".into()))?;
        fit.alpha[i] = theta[0];
        fit.beta[i] = theta[1];
        fit.gamma[i] = theta[2];
    }
    Ok(fit)
}

/// Exact joint of the four-valued simulation model.
///
/// `Z1 ~ Bern(0.5)` picks the sign of `C` and an independent fair coin (absorbed into `beta`)
/// picks its magnitude, so `C` is uniform on {-2, -1, 1, 2}. At the observed `(c, Z1)`
/// combinations `p(E | c, Z1)` is the tabulated row; the other combinations come from the
/// fitted logit model.
pub fn build_fig1_scm() -> Result<ConfoundedJoint<f64>> {
    let table = fixtures::scm_cpt()?;
    let fit = fit_fig1_logits(&table)?;
    let cs = numeric_labels(table.cause_space())?;
    let (m, n, w) = (cs.len(), table.n_effects(), 2);
    let mut iota = vec![vec![vec![0.0; m]; w]; n];
    let mut beta = vec![vec![0.0; w]; m];
    for (j, &c) in cs.iter().enumerate() {
        let z_obs = fig1_confounder_of(c);
        let same_sign = cs.iter().filter(|&&x| fig1_confounder_of(x) == z_obs).count();
        beta[j][z_obs] = 1.0 / same_sign as f64;
        for l in 0..w {
            let row = if l == z_obs {
                table.row(j).to_vec()
            } else {
                fit.probs(c, l as f64)
            };
            for i in 0..n {
                iota[i][l][j] = row[i];
            }
        }
    }
    ConfoundedJoint::new(
        table.cause_space().clone(),
        table.effect_space().clone(),
        ValueSpace::new(["0", "1"])?,
        iota,
        beta,
        vec![0.5, 0.5],
    )
}

fn weighted(weights: impl Iterator<Item = f64>) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights).map_err(|e| Error::InvalidProbability(format!("cannot sample: {e}")))
}

/// `n` i.i.d. records by ancestral sampling (`z`, then `c`, then `e`). Utilities are attached
/// by table lookup when `util` is given.
pub fn sample_dataset<R: Rng + ?Sized>(
    joint: &ConfoundedJoint<f64>,
    n: usize,
    rng: &mut R,
    util: Option<&UtilityTable<f64>>,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let (m, ne, w) = (joint.n_causes(), joint.n_effects(), joint.n_confounders());
    let z_dist = weighted(joint.gamma_vec().iter().copied())?;
    let c_dist = (0..w)
        .map(|l| weighted((0..m).map(|j| joint.beta(j, l))))
        .collect::<Result<Vec<_>>>()?;
    let e_dist = (0..w)
        .map(|l| {
            (0..m)
                .map(|j| weighted((0..ne).map(|i| joint.iota(i, l, j))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut causes = Vec::with_capacity(n);
    let mut effects = Vec::with_capacity(n);
    for _ in 0..n {
        let l = z_dist.sample(rng);
        let j = c_dist[l].sample(rng);
        let i = e_dist[l][j].sample(rng);
        causes.push(joint.cause_space().label(j).to_string());
        effects.push(joint.effect_space().label(i).to_string());
    }
    let data = SampleSet::new(Column::Labels(causes), Column::Labels(effects), None)?;
    match util {
        Some(u) => attach_utilities(&data, u),
        None => Ok(data),
    }
}

/// Dataset holding exactly `counts[j][i]` copies of `(c_j, e_i)`, in row-major order.
pub fn dataset_from_counts(
    cause_space: &ValueSpace,
    effect_space: &ValueSpace,
    counts: &[Vec<usize>],
    util: Option<&UtilityTable<f64>>,
) -> Result<SampleSet> {
    if counts.len() != cause_space.len() || counts.iter().any(|r| r.len() != effect_space.len()) {
        return Err(Error::Shape("counts must be causes x effects".into()));
    }
    let mut causes = Vec::new();
    let mut effects = Vec::new();
    for (j, row) in counts.iter().enumerate() {
        for (i, &k) in row.iter().enumerate() {
            causes.extend(std::iter::repeat_n(cause_space.label(j).to_string(), k));
            effects.extend(std::iter::repeat_n(effect_space.label(i).to_string(), k));
        }
    }
    let data = SampleSet::new(Column::Labels(causes), Column::Labels(effects), None)?;
    match util {
        Some(u) => attach_utilities(&data, u),
        None => Ok(data),
    }
}
