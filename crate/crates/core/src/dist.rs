//! Exact joint distribution over cause `C`, effect `E` and confounder `Z`, factored as
//! `p(e | z, c) · p(c | z) · p(z)`.
//!
//! Any additional exogenous parent of `C` alone is absorbed into `p(c | z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ValueSpace;
use crate::table::{Cpt, CptKind, UtilityTable};

/// Confounded joint in the `(iota, beta, gamma)` parametrization:
///
/// * `iota[i][l][j] = p(e_i | z_l, c_j)`
/// * `beta[j][l] = p(c_j | z_l)`
/// * `gamma[l] = p(z_l)`
///
/// Arrays are effect-major for `iota` and cause-major for `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfoundedJoint<T: Scalar> {
    cause_space: ValueSpace,
    effect_space: ValueSpace,
    confounder_space: ValueSpace,
    iota: Vec<Vec<Vec<T>>>,
    beta: Vec<Vec<T>>,
    gamma: Vec<T>,
}

/// JSON layout of a [`ConfoundedJoint`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct JointDocument<T: Scalar> {
    pub cause_labels: Vec<String>,
    pub effect_labels: Vec<String>,
    pub confounder_labels: Vec<String>,
    pub iota: Vec<Vec<Vec<T>>>,
    pub beta: Vec<Vec<T>>,
    pub gamma: Vec<T>,
}

impl<T: Scalar> ConfoundedJoint<T> {
    pub fn new(
        cause_space: ValueSpace,
        effect_space: ValueSpace,
        confounder_space: ValueSpace,
        iota: Vec<Vec<Vec<T>>>,
        beta: Vec<Vec<T>>,
        gamma: Vec<T>,
    ) -> Result<Self> {
        let (m, n, w) = (cause_space.len(), effect_space.len(), confounder_space.len());
        let shape_ok = iota.len() == n
            && iota.iter().all(|a| a.len() == w && a.iter().all(|b| b.len() == m))
            && beta.len() == m
            && beta.iter().all(|b| b.len() == w)
            && gamma.len() == w;
        if !shape_ok {
            return Err(Error::Shape(format!(
                "joint arrays must be iota {n}x{w}x{m}, beta {m}x{w}, gamma {w}"
            )));
        }
        let nonneg = |x: &T| *x >= T::zero() && x.is_finite();
        if !(iota.iter().flatten().flatten().all(nonneg)
            && beta.iter().flatten().all(nonneg)
            && gamma.iter().all(nonneg))
        {
            return Err(Error::InvalidProbability("negative or non-finite joint entry".into()));
        }
        let slack = T::stochastic_slack();
        for l in 0..w {
            for j in 0..m {
                let s: T = (0..n).map(|i| iota[i][l][j]).sum();
                if !s.close(T::one(), slack) {
                    return Err(Error::InvalidProbability(format!(
                        "p(E | z={}, c={}) sums to {s}",
                        confounder_space.label(l),
                        cause_space.label(j)
                    )));
                }
            }
            let s: T = (0..m).map(|j| beta[j][l]).sum();
            if !s.close(T::one(), slack) {
                return Err(Error::InvalidProbability(format!(
                    "p(C | z={}) sums to {s}",
                    confounder_space.label(l)
                )));
            }
        }
        let s: T = gamma.iter().copied().sum();
        if !s.close(T::one(), slack) {
            return Err(Error::InvalidProbability(format!("p(Z) sums to {s}")));
        }
        Ok(ConfoundedJoint {
            cause_space,
            effect_space,
            confounder_space,
            iota,
            beta,
            gamma,
        })
    }

    pub fn cause_space(&self) -> &ValueSpace {
        &self.cause_space
    }

    pub fn effect_space(&self) -> &ValueSpace {
        &self.effect_space
    }

    pub fn confounder_space(&self) -> &ValueSpace {
        &self.confounder_space
    }

    pub fn n_causes(&self) -> usize {
        self.cause_space.len()
    }

    pub fn n_effects(&self) -> usize {
        self.effect_space.len()
    }

    pub fn n_confounders(&self) -> usize {
        self.confounder_space.len()
    }

    /// `p(e_i | z_l, c_j)`
    pub fn iota(&self, i: usize, l: usize, j: usize) -> T {
        self.iota[i][l][j]
    }

    /// `p(c_j | z_l)`
    pub fn beta(&self, j: usize, l: usize) -> T {
        self.beta[j][l]
    }

    /// `p(z_l)`
    pub fn gamma(&self, l: usize) -> T {
        self.gamma[l]
    }

    pub fn gamma_vec(&self) -> &[T] {
        &self.gamma
    }

    /// `p(c, e, z)`
    pub fn joint_prob(&self, j: usize, i: usize, l: usize) -> T {
        self.iota[i][l][j] * self.beta[j][l] * self.gamma[l]
    }

    /// Copy of this joint with a different confounder distribution.
    pub fn with_gamma(&self, gamma: Vec<T>) -> Result<Self> {
        Self::new(
            self.cause_space.clone(),
            self.effect_space.clone(),
            self.confounder_space.clone(),
            self.iota.clone(),
            self.beta.clone(),
            gamma,
        )
    }

    pub fn into_parts(self) -> JointDocument<T> {
        JointDocument {
            cause_labels: self.cause_space.into(),
            effect_labels: self.effect_space.into(),
            confounder_labels: self.confounder_space.into(),
            iota: self.iota,
            beta: self.beta,
            gamma: self.gamma,
        }
    }

    pub fn from_document(doc: JointDocument<T>) -> Result<Self> {
        Self::new(
            ValueSpace::new(doc.cause_labels)?,
            ValueSpace::new(doc.effect_labels)?,
            ValueSpace::new(doc.confounder_labels)?,
            doc.iota,
            doc.beta,
            doc.gamma,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.clone().into_parts())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }
}

/// `p(e_i | do(c_j)) = Σ_l p(e_i | z_l, c_j) p(z_l)`.
pub fn interventional_cpt<T: Scalar>(joint: &ConfoundedJoint<T>) -> Result<Cpt<T>> {
    let rows = (0..joint.n_causes())
        .map(|j| {
            (0..joint.n_effects())
                .map(|i| {
                    (0..joint.n_confounders())
                        .map(|l| joint.iota[i][l][j] * joint.gamma[l])
                        .sum()
                })
                .collect()
        })
        .collect();
    Cpt::new(
        joint.cause_space.clone(),
        joint.effect_space.clone(),
        rows,
        CptKind::Interventional,
    )
}

/// `p(c_j) = Σ_l p(c_j | z_l) p(z_l)`.
pub fn cause_marginal<T: Scalar>(joint: &ConfoundedJoint<T>) -> Vec<T> {
    (0..joint.n_causes())
        .map(|j| {
            (0..joint.n_confounders())
                .map(|l| joint.beta[j][l] * joint.gamma[l])
                .sum()
        })
        .collect()
}

fn nonzero_marginal<T: Scalar>(joint: &ConfoundedJoint<T>, marginal: &[T], j: usize) -> Result<T> {
    let p = marginal[j];
    if p > T::zero() {
        Ok(p)
    } else {
        Err(Error::ZeroMarginal {
            value: joint.cause_space.label(j).to_string(),
        })
    }
}

/// `p(e_i | c_j) = Σ_l p(e_i | z_l, c_j) p(c_j | z_l) p(z_l) / p(c_j)`.
pub fn observational_cpt<T: Scalar>(joint: &ConfoundedJoint<T>) -> Result<Cpt<T>> {
    let marginal = cause_marginal(joint);
    let mut rows = Vec::with_capacity(joint.n_causes());
    for j in 0..joint.n_causes() {
        let pc = nonzero_marginal(joint, &marginal, j)?;
        let row: Vec<T> = (0..joint.n_effects())
            .map(|i| {
                (0..joint.n_confounders())
                    .map(|l| joint.joint_prob(j, i, l))
                    .sum::<T>()
                    / pc
            })
            .collect();
        // renormalize away rounding so the row passes the stochastic check at any scale
        let s: T = row.iter().copied().sum();
        rows.push(row.into_iter().map(|p| p / s).collect());
    }
    Cpt::new(
        joint.cause_space.clone(),
        joint.effect_space.clone(),
        rows,
        CptKind::Observational,
    )
}

/// Left-minus-right of the observational expected-utility equality between `c_j` and `c_k`,
/// after clearing the `p(c)` denominators:
///
/// `Σ_{l'} Σ_l γ[l'] γ[l] ( Σ_i u(c_j,e_i) ι[i,l,j] β[k,l'] β[j,l] − Σ_i u(c_k,e_i) ι[i,l,k] β[j,l'] β[k,l] )`
///
/// This equals `p(c_j) p(c_k) (EU_obs(c_j) − EU_obs(c_k))`, so it vanishes exactly when the
/// two cause values have equal observational expected utility.
pub fn eq_constraint_residual<T: Scalar>(
    joint: &ConfoundedJoint<T>,
    util: &UtilityTable<T>,
    j: usize,
    k: usize,
) -> Result<T> {
    let (m, n, w) = (joint.n_causes(), joint.n_effects(), joint.n_confounders());
    if util.cause_space().len() != m || util.effect_space().len() != n {
        return Err(Error::Shape("utility table does not match the joint".into()));
    }
    if j >= m || k >= m {
        return Err(Error::Shape(format!("cause index out of range for {m} causes")));
    }
    let marginal = cause_marginal(joint);
    nonzero_marginal(joint, &marginal, j)?;
    nonzero_marginal(joint, &marginal, k)?;

    let mut total = T::zero();
    for lp in 0..w {
        for l in 0..w {
            let mut inner = T::zero();
            for i in 0..n {
                inner = inner
                    + util.get(j, i) * joint.iota[i][l][j] * joint.beta[k][lp] * joint.beta[j][l]
                    - util.get(k, i) * joint.iota[i][l][k] * joint.beta[j][lp] * joint.beta[k][l];
            }
            total = total + joint.gamma[lp] * joint.gamma[l] * inner;
        }
    }
    Ok(total)
}
