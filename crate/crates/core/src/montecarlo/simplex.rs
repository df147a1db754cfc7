use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Uniform};

use crate::dist::ConfoundedJoint;
use crate::error::{Error, Result};
use crate::space::ValueSpace;
use crate::table::UtilityTable;

/// Uniform draw from the probability simplex with `n` vertices (normalized exponential spacings).
pub fn sample_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.into_iter().map(|v| v / s).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

/// Random joint over `m` causes, `n` effects and `w` confounder values, each conditional drawn
/// uniformly from its simplex.
pub fn sample_joint<R: Rng + ?Sized>(m: usize, n: usize, w: usize, rng: &mut R) -> Result<ConfoundedJoint<f64>> {
    if m == 0 || n == 0 || w == 0 {
        return Err(Error::Config("joint dimensions must be at least 1".into()));
    }
    let mut iota = vec![vec![vec![0.0; m]; w]; n];
    for l in 0..w {
        for j in 0..m {
            for (i, p) in sample_simplex(n, rng).into_iter().enumerate() {
                iota[i][l][j] = p;
            }
        }
    }
    let mut beta = vec![vec![0.0; w]; m];
    for l in 0..w {
        for (j, p) in sample_simplex(m, rng).into_iter().enumerate() {
            beta[j][l] = p;
        }
    }
    let gamma = sample_simplex(w, rng);
    ConfoundedJoint::new(
        ValueSpace::indexed("c", m)?,
        ValueSpace::indexed("e", n)?,
        ValueSpace::indexed("z", w)?,
        iota,
        beta,
        gamma,
    )
}

/// Utility table with i.i.d. entries uniform on `[lo, hi)`, labelled like [`sample_joint`].
pub fn sample_utility<R: Rng + ?Sized>(m: usize, n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<UtilityTable<f64>> {
    let dist = Uniform::new(lo, hi).map_err(|e| Error::Config(format!("utility range: {e}")))?;
    let values = (0..m).map(|_| (0..n).map(|_| dist.sample(rng)).collect()).collect();
    UtilityTable::new(ValueSpace::indexed("c", m)?, ValueSpace::indexed("e", n)?, values)
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
