//! Acceptance criteria. Runs without the libtest harness and prints one PASS/FAIL line per
//! criterion; exits non-zero if any criterion fails.

use std::time::Instant;

use pcfl_core::cfl::{run_cfl, CflOptions, EffectCoding};
use pcfl_core::cluster::ClusterConfig;
use pcfl_core::dist::{cause_marginal, eq_constraint_residual, interventional_cpt, observational_cpt};
use pcfl_core::equiv::{
    causal_coarsening, effect_coarsening, expected_utilities, observational_pragmatic_causal_coarsening,
    pragmatic_causal_coarsening, pragmatic_effect_coarsening, pragmatic_pipeline,
};
use pcfl_core::montecarlo::{
    build_fig1_scm, dataset_from_counts, plant_duplicate_tie, planted_refinement, prop2_probe, sample_dataset,
    sample_joint, sample_utility, trial_rng, PlantMode, Prop2Config,
};
use pcfl_core::pcfl::{rbf_utility_default, run_pcfl, PcflOptions};
use pcfl_core::sample::{Column, SampleSet};
use pcfl_core::table::{uniform, Cpt, UtilityTable};
use pcfl_core::{coarsen_cpt, coarsen_utility, fixtures, refines, CptKind, Partition, ValueSpace};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

const TAU: f64 = 1e-9;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn max_dev(rows: &[Vec<f64>], expected: &[[f64; 3]; 3]) -> f64 {
    rows.iter()
        .zip(expected)
        .flat_map(|(r, x)| r.iter().zip(x).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn ac1() -> Check {
    let eu = expected_utilities(&fixtures::smoking_cpt().map_err(e)?, &fixtures::smoking_utility().map_err(e)?)
        .map_err(e)?;
    for (got, want) in eu.values.iter().zip(fixtures::SMOKING_EU) {
        ensure((got - want).abs() <= 1e-9, format!("EU {got} != {want}"))?;
    }
    let eta = eu.eta.ok_or("no eta")?;
    ensure((eta - fixtures::SMOKING_ETA).abs() <= 1e-9, format!("eta {eta}"))?;
    Ok(format!("profile {:?}, eta = {eta:.2}", eu.values))
}

fn ac2() -> Check {
    let cpt = fixtures::smoking_cpt().map_err(e)?;
    let util = fixtures::smoking_utility().map_err(e)?;
    let pc = pragmatic_causal_coarsening(&cpt, &util, TAU).map_err(e)?;
    ensure(pc == Partition::from_classes(3, vec![vec![0, 1], vec![2]]).unwrap(), format!("pc {pc:?}"))?;
    let pe = pragmatic_effect_coarsening(&util, TAU);
    ensure(pe.is_singletons(), format!("pe {pe:?}"))?;
    ensure(pe.class_of(0) != pe.class_of(3), "[0,49] and [90,Inf] share a pe class")?;
    let c = causal_coarsening(&cpt, TAU).map_err(e)?;
    ensure(c.is_singletons(), format!("causal {c:?}"))?;
    let ef = effect_coarsening(&cpt, TAU).map_err(e)?;
    let want = Partition::from_classes(4, vec![vec![0, 3], vec![1], vec![2]]).unwrap();
    ensure(ef == want, format!("effect {ef:?}"))?;
    Ok(format!(
        "pc {:?}, e {:?}",
        pc.labelled_classes(cpt.cause_space()),
        ef.labelled_classes(cpt.effect_space())
    ))
}

fn ac3() -> Check {
    let joint = build_fig1_scm().map_err(e)?;
    let obs = observational_cpt(&joint).map_err(e)?;
    let table4 = fixtures::scm_cpt().map_err(e)?;
    let d4 = obs
        .rows()
        .iter()
        .flatten()
        .zip(table4.rows().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(d4 <= 1e-6, format!("observational CPT deviation {d4}"))?;
    let u = uniform::<f64>(4);
    let cfl_c = Partition::from_classes(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    let cfl_e = Partition::from_classes(4, vec![vec![0, 3], vec![1], vec![2]]).unwrap();
    let t5 = coarsen_cpt(&table4, &cfl_c, &cfl_e, &u).map_err(e)?;
    let d5 = max_dev(t5.rows(), &fixtures::CFL_EXPECTED);
    ensure(d5 <= 1e-9, format!("CFL coarse CPT deviation {d5}"))?;
    let pcfl_c = Partition::from_classes(4, vec![vec![0, 3], vec![1], vec![2]]).unwrap();
    let pcfl_e = Partition::from_classes(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    let t7 = coarsen_cpt(&table4, &pcfl_c, &pcfl_e, &u).map_err(e)?;
    let d7 = max_dev(t7.rows(), &fixtures::PCFL_EXPECTED);
    ensure(d7 <= 1e-9, format!("PCFL coarse CPT deviation {d7}"))?;
    Ok(format!("max deviations: observational CPT {d4:.1e}, CFL coarse CPT {d5:.1e}, PCFL coarse CPT {d7:.1e}"))
}

const SEEDS: u64 = 100;
const N_SAMPLES: usize = 10_000;

fn sampled(seed: u64) -> SampleSet {
    let joint = build_fig1_scm().expect("model");
    let util = fixtures::scm_utility().expect("utility");
    sample_dataset(&joint, N_SAMPLES, &mut trial_rng(seed, 0), Some(&util)).expect("sample")
}

/// Sampled-CFL settings: the regression target is the indicator-coded effect, so `f(c)`
/// estimates `p(E | c)`; kNN uses `k` between the per-class counts of rare and common effect
/// values.
fn cfl_options() -> CflOptions {
    CflOptions::new(ClusterConfig::tolerance(0.05).with_knn_k(540)).with_coding(EffectCoding::Indicator)
}

fn pcfl_options() -> PcflOptions {
    PcflOptions::new(ClusterConfig::tolerance(0.5))
}

fn ac4() -> Check {
    let w = Partition::from_classes(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    let t = Partition::from_classes(4, vec![vec![0, 3], vec![1], vec![2]]).unwrap();
    let results: Vec<(bool, f64)> = (0..SEEDS)
        .into_par_iter()
        .map(|seed| match run_cfl(&sampled(seed), &cfl_options()) {
            Ok(r) if r.cause_space.labels() == ["-2", "-1", "1", "2"] && r.cause_partition == w && r.effect_partition == t => {
                let d = max_dev(r.coarse_cpt.rows(), &fixtures::CFL_EXPECTED);
                (d <= 0.03, d)
            }
            _ => (false, f64::NAN),
        })
        .collect();
    let ok = results.iter().filter(|r| r.0).count();
    let worst = results.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max);
    ensure(ok >= 95, format!("recovered in {ok}/{SEEDS} seeds"))?;
    Ok(format!("W, T and coarse CPT recovered in {ok}/{SEEDS} seeds (worst CPT deviation {worst:.3})"))
}

fn ac5() -> Check {
    let w = Partition::from_classes(4, vec![vec![0, 3], vec![1], vec![2]]).unwrap();
    let t = Partition::from_classes(4, vec![vec![0], vec![1, 2], vec![3]]).unwrap();
    let results: Vec<(bool, f64)> = (0..SEEDS)
        .into_par_iter()
        .map(|seed| match run_pcfl(&sampled(seed), &pcfl_options(), None) {
            Ok(r) if r.cause_partition == w && r.effect_partition == t => {
                let d = max_dev(r.coarse_cpt.rows(), &fixtures::PCFL_EXPECTED);
                (d <= 0.03, d)
            }
            _ => (false, f64::NAN),
        })
        .collect();
    let ok = results.iter().filter(|r| r.0).count();
    let worst = results.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max);
    ensure(ok >= 95, format!("recovered in {ok}/{SEEDS} seeds"))?;
    Ok(format!("W_p, T_p and coarse CPT recovered in {ok}/{SEEDS} seeds (worst CPT deviation {worst:.3})"))
}

fn ac6() -> Check {
    let planted = planted_refinement(&Prop2Config::new((4, 4, 3), 10_000, vec![1e-1], 2024), PlantMode::Duplicate, TAU)
        .map_err(e)?;
    ensure(planted.tied == planted.trials, format!("only {} of {} ties visible", planted.tied, planted.trials))?;
    ensure(planted.violations == 0, format!("{} planted trials violate refinement", planted.violations))?;

    let grid = vec![1e-1, 1e-2, 1e-3, 1e-4];
    let small = prop2_probe(&Prop2Config::new((4, 4, 3), 20_000, grid.clone(), 7)).map_err(e)?;
    let large = prop2_probe(&Prop2Config::new((4, 4, 3), 200_000, grid, 8)).map_err(e)?;
    for r in [&small, &large] {
        ensure(r.rate_non_increasing(), format!("rates not monotone: {:?}", r.rows))?;
        for row in &r.rows {
            ensure(row.max_scaled_residual < row.eps, format!("residual {} at eps {}", row.max_scaled_residual, row.eps))?;
        }
    }
    let rates: Vec<String> = large.rows.iter().map(|r| format!("{:.1e}", r.violation_rate)).collect();
    Ok(format!(
        "planted: refinement in {}/{} trials; eps curve rates {} (200k trials)",
        planted.refinement_holds,
        planted.trials,
        rates.join(" ≥ ")
    ))
}

fn ac7() -> Check {
    let mut rng = trial_rng(77, 0);
    let instances = 1200;
    for inst in 0..instances {
        let m = rng.random_range(1..=4usize);
        let n = rng.random_range(1..=4usize);
        let weights: Vec<Vec<usize>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(1..=3)).collect()).collect();
        let values: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(0..=3) as f64).collect()).collect();
        let cs = ValueSpace::indexed("c", m).unwrap();
        let es = ValueSpace::indexed("e", n).unwrap();
        let util = UtilityTable::new(cs.clone(), es.clone(), values).map_err(e)?;
        let rows: Vec<Vec<f64>> = weights
            .iter()
            .map(|r| {
                let s: usize = r.iter().sum();
                r.iter().map(|&x| x as f64 / s as f64).collect()
            })
            .collect();
        let cpt = Cpt::new(cs.clone(), es.clone(), rows, CptKind::Observational).map_err(e)?;
        let data = dataset_from_counts(&cs, &es, &weights, Some(&util)).map_err(e)?;
        let r = run_pcfl(&data, &PcflOptions::new(ClusterConfig::tolerance(TAU)), None).map_err(e)?;
        let opc = observational_pragmatic_causal_coarsening(&cpt, &util, TAU).map_err(e)?;
        let pe = pragmatic_effect_coarsening(&util, TAU);
        ensure(r.cause_partition == opc, format!("instance {inst}: W_p {:?} vs opc {opc:?}", r.cause_partition))?;
        ensure(r.effect_partition == pe, format!("instance {inst}: T_p {:?} vs pe {pe:?}", r.effect_partition))?;
        let total: usize = weights.iter().flatten().sum();
        let marginal: Vec<f64> = weights.iter().map(|r| r.iter().sum::<usize>() as f64 / total as f64).collect();
        let exact = coarsen_cpt(&cpt, &opc, &pe, &marginal).map_err(e)?;
        for (a, b) in exact.rows().iter().flatten().zip(r.coarse_cpt.rows().iter().flatten()) {
            ensure((a - b).abs() <= 1e-9, format!("instance {inst}: coarse CPT mismatch"))?;
        }
    }

    let mut pairs = 0;
    for t in 0..1000u64 {
        let mut rng = trial_rng(78, t);
        let joint = sample_joint(4, 3, 2, &mut rng).map_err(e)?;
        let util = sample_utility(4, 3, 0.0, 10.0, &mut rng).map_err(e)?;
        let (joint, util) = if t % 2 == 0 {
            plant_duplicate_tie(&joint, &util, 1, 3, &mut rng).map_err(e)?
        } else {
            (joint, util)
        };
        let opc = observational_pragmatic_causal_coarsening(&observational_cpt(&joint).map_err(e)?, &util, TAU)
            .map_err(e)?;
        let p = cause_marginal(&joint);
        for j in 0..4 {
            for k in 0..4 {
                let res = eq_constraint_residual(&joint, &util, j, k).map_err(e)?;
                let zero = res.abs() <= TAU * p[j] * p[k];
                ensure(
                    zero == (opc.class_of(j) == opc.class_of(k)),
                    format!("joint {t}, pair ({j},{k}): residual {res:e}"),
                )?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{instances} exact-proportion instances agree; residual test agrees on {pairs} pairs"))
}

fn random_problem(rng: &mut impl Rng, m: usize, n: usize) -> (Cpt<f64>, UtilityTable<f64>, Vec<f64>) {
    let joint = sample_joint(m, n, 2, rng).unwrap();
    let util = sample_utility(m, n, -5.0, 5.0, rng).unwrap();
    (interventional_cpt(&joint).unwrap(), util, cause_marginal(&joint))
}

fn ac8() -> Check {
    let mut rng = trial_rng(88, 0);
    let mut n_checks = 0;
    for _ in 0..500 {
        let m = rng.random_range(2..=5);
        let n = rng.random_range(2..=5);
        let (int, util, marginal) = random_problem(&mut rng, m, n);
        // merge some utility columns so the effect coarsening is non-trivial
        let mut values = util.values().to_vec();
        let src = rng.random_range(0..n);
        let dst = rng.random_range(0..n);
        for row in values.iter_mut() {
            row[dst] = row[src];
        }
        let util = UtilityTable::new(util.cause_space().clone(), util.effect_space().clone(), values).unwrap();
        let obs = int.clone().with_kind(CptKind::Observational);

        // affine invariance
        let a = rng.random_range(0.1..10.0);
        let b = rng.random_range(-10.0..10.0);
        let scaled = util.affine(a, b).unwrap();
        let tol = 1e-9 * a.max(1.0);
        ensure(
            pragmatic_causal_coarsening(&int, &util, TAU).unwrap() == pragmatic_causal_coarsening(&int, &scaled, tol).unwrap(),
            "pc not affine invariant",
        )?;
        ensure(
            pragmatic_effect_coarsening(&util, TAU) == pragmatic_effect_coarsening(&scaled, tol),
            "pe not affine invariant",
        )?;
        ensure(
            observational_pragmatic_causal_coarsening(&obs, &util, TAU).unwrap()
                == observational_pragmatic_causal_coarsening(&obs, &scaled, tol).unwrap(),
            "opc not affine invariant",
        )?;

        // partition order and coverage
        let pe = pragmatic_effect_coarsening(&util, TAU);
        let pc = pragmatic_causal_coarsening(&int, &util, TAU).unwrap();
        for p in [&pe, &pc] {
            let mut all: Vec<usize> = p.classes().iter().flatten().copied().collect();
            all.sort_unstable();
            ensure(all == (0..p.n_elements()).collect::<Vec<_>>(), "partition not exhaustive/disjoint")?;
            ensure(p.classes().windows(2).all(|w| w[0][0] < w[1][0]), "classes out of order")?;
            ensure(p.classes().iter().all(|c| c.windows(2).all(|w| w[0] < w[1])), "members unsorted")?;
        }
        ensure(pc.n_classes() <= 2, "pc has more than two classes")?;

        // row-stochasticity of coarsened CPTs
        let coarse = coarsen_cpt(&int, &pc, &pe, &marginal).unwrap();
        for row in coarse.rows() {
            ensure((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "coarse row not stochastic")?;
        }

        // eta preserved by the pragmatic causal coarsening
        let fine = expected_utilities(&int, &util).unwrap();
        let cu = coarsen_utility(&util, &pc, &Partition::singletons(n), &marginal, Some(&int)).unwrap();
        let cc = coarsen_cpt(&int, &pc, &Partition::singletons(n), &marginal).unwrap();
        let coarse_eu = expected_utilities(&cc, &cu).unwrap();
        ensure(
            (coarse_eu.eta.unwrap() - fine.eta.unwrap()).abs() <= 1e-9,
            "eta not preserved",
        )?;

        // expected utilities preserved by the pragmatic effect coarsening
        let cu = coarsen_utility(&util, &Partition::singletons(m), &pe, &marginal, Some(&int)).unwrap();
        let cc = coarsen_cpt(&int, &Partition::singletons(m), &pe, &marginal).unwrap();
        let ce = expected_utilities(&cc, &cu).unwrap();
        for (x, y) in ce.values.iter().zip(&fine.values) {
            ensure((x - y).abs() <= 1e-9, "EU not preserved under pe")?;
        }

        // refines: partial order against subset containment
        let p1 = Partition::from_assignment(&(0..m).map(|_| rng.random_range(0..3)).collect::<Vec<_>>());
        let p2 = Partition::from_assignment(&(0..m).map(|_| rng.random_range(0..3)).collect::<Vec<_>>());
        let brute = |coarse: &Partition, fine: &Partition| {
            fine.classes().iter().all(|f| coarse.classes().iter().any(|c| f.iter().all(|x| c.contains(x))))
        };
        ensure(refines(&p1, &p2).unwrap() == brute(&p1, &p2), "refines disagrees with brute force")?;
        ensure(refines(&p1, &p1).unwrap(), "refines not reflexive")?;
        if refines(&p1, &p2).unwrap() && refines(&p2, &p1).unwrap() {
            ensure(p1 == p2, "refines not antisymmetric")?;
        }
        let meet = Partition::singletons(m);
        ensure(refines(&p1, &meet).unwrap(), "singletons not finest")?;
        n_checks += 1;
    }
    Ok(format!("{n_checks} random instances: affine invariance, coverage, stochasticity, eta and EU preservation, refinement order"))
}

/// Synthetic 9×55 grids: four cause regimes, each shifting a smooth field, and an effect
/// field whose mean temperature depends on the regime.
fn synthetic_grids(seed: u64, n: usize) -> SampleSet {
    let mut rng = trial_rng(seed, 0);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let cells = 9 * 55;
    let mut causes = Vec::with_capacity(n);
    let mut effects = Vec::with_capacity(n);
    let mut utils = Vec::with_capacity(n);
    for s in 0..n {
        let regime = s % 4;
        let c: Vec<f64> = (0..cells)
            .map(|x| (x as f64 / 30.0 + regime as f64).sin() * (1.0 + regime as f64) + noise.sample(&mut rng))
            .collect();
        let temp = 25.7 + 0.2 * regime as f64 + noise.sample(&mut rng);
        let ef: Vec<f64> = (0..cells)
            .map(|x| temp + 0.1 * (x as f64 / 55.0).cos() + noise.sample(&mut rng))
            .collect();
        utils.push(rbf_utility_default(ef.iter().sum::<f64>() / cells as f64).unwrap());
        causes.push(c);
        effects.push(ef);
    }
    SampleSet::new(
        Column::vectors(causes).unwrap(),
        Column::vectors(effects).unwrap(),
        Some(utils),
    )
    .unwrap()
}

fn ac9() -> Check {
    let peak = rbf_utility_default(26.0).map_err(e)?;
    let want = -1.0 + 1.0 / (0.02 * std::f64::consts::PI).sqrt();
    ensure((peak - want).abs() < 1e-12 && (peak - 2.9894).abs() < 1e-4, format!("peak {peak}"))?;
    let tail = rbf_utility_default(40.0).map_err(e)?;
    ensure((tail + 1.0).abs() < 1e-12, format!("tail {tail}"))?;

    let data = synthetic_grids(9, 120);
    let cfg = ClusterConfig::kmeans(4, 11).with_knn_k(5);
    let a = run_cfl(&data, &CflOptions::new(cfg)).map_err(e)?;
    let b = run_cfl(&data, &CflOptions::new(cfg)).map_err(e)?;
    ensure(a == b, "CFL not deterministic")?;
    ensure(a.cause_statistic.iter().all(|f| f.len() == 495), "f has wrong dimension")?;
    ensure(a.effect_features.iter().all(|g| g.len() == 4), "g has wrong dimension")?;
    ensure(a.cause_partition.n_classes() == 4 && a.effect_partition.n_classes() == 4, "CFL cluster counts")?;
    ensure(a.coarse_cpt.n_causes() == 4 && a.coarse_cpt.n_effects() == 4, "coarse CPT shape")?;

    let p = run_pcfl(&data, &PcflOptions::new(cfg), None).map_err(e)?;
    ensure(p == run_pcfl(&data, &PcflOptions::new(cfg), None).map_err(e)?, "PCFL not deterministic")?;
    ensure(p.cause_partition.n_classes() == 4 && p.effect_partition.n_classes() == 4, "PCFL cluster counts")?;
    Ok(format!("rbf(26.0) = {peak:.5}, rbf(40.0) = {tail}; 120 synthetic 9x55 grids: 4x4 coarse CPTs, deterministic"))
}

fn ac_pipeline_extra() -> Check {
    // the observational-first procedure agrees with the direct pragmatic coarsening
    let joint = build_fig1_scm().map_err(e)?;
    let util = fixtures::scm_utility().map_err(e)?;
    let r = pragmatic_pipeline(&joint, &util, TAU).map_err(e)?;
    let direct = pragmatic_causal_coarsening(&interventional_cpt(&joint).map_err(e)?, &util, TAU).map_err(e)?;
    ensure(refines(&r.cause_partition, &r.observational_partition).map_err(e)?, "pc not a quotient of opc")?;
    ensure(r.cause_partition == direct, "pipeline disagrees with direct pc")?;
    Ok(String::new())
}

fn main() {
    let criteria: [(&str, &str, fn() -> Check); 9] = [
        ("AC1", "smoking expected utilities and eta", ac1),
        ("AC2", "smoking coarsenings", ac2),
        ("AC3", "exact simulation tables", ac3),
        ("AC4", "sampled CFL recovery", ac4),
        ("AC5", "sampled PCFL recovery", ac5),
        ("AC6", "planted ties and eps curve", ac6),
        ("AC7", "oracle equivalence", ac7),
        ("AC8", "invariant suites", ac8),
        ("AC9", "rbf utility and continuous smoke test", ac9),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {name} ({secs:.2}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL  {name} ({secs:.2}s): {why}");
            }
        }
    }
    if let Err(why) = ac_pipeline_extra() {
        failed += 1;
        println!("pipeline check FAIL: {why}");
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed.min(9));
    if failed > 0 {
        std::process::exit(1);
    }
}
