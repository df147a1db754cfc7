//! Worked examples, printed as expected-versus-computed checks followed by full reports.

use serde_json::{json, Value};

use pcfl_core::cfl::{run_cfl, CflOptions, EffectCoding};
use pcfl_core::cluster::ClusterConfig;
use pcfl_core::dist::{cause_marginal, interventional_cpt, observational_cpt};
use pcfl_core::equiv::{
    causal_coarsening, effect_coarsening, expected_utilities, observational_causal_coarsening,
    observational_effect_coarsening, observational_pragmatic_causal_coarsening, pragmatic_causal_coarsening,
    pragmatic_effect_coarsening,
};
use pcfl_core::montecarlo::{build_fig1_scm, sample_dataset, trial_rng};
use pcfl_core::pcfl::{run_pcfl, PcflOptions};
use pcfl_core::report::{emit_report, Format, Report};
use pcfl_core::table::uniform;
use pcfl_core::{coarsen_cpt, fixtures, Partition, Result, ValueSpace};

use crate::args::DemoName;

const TAU: f64 = 1e-9;
const DEMO_SEED: u64 = 0;
const DEMO_SAMPLES: usize = 10_000;

struct Check {
    name: String,
    expected: String,
    computed: String,
    ok: bool,
}

fn check(name: &str, expected: impl Into<String>, computed: impl Into<String>, ok: bool) -> Check {
    Check {
        name: name.into(),
        expected: expected.into(),
        computed: computed.into(),
        ok,
    }
}

fn classes(p: &Partition, space: &ValueSpace) -> String {
    p.macro_labels(space)
        .iter()
        .map(|l| format!("{{{l}}}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn partition_check(name: &str, got: &Partition, want: &Partition, space: &ValueSpace) -> Check {
    check(name, classes(want, space), classes(got, space), got == want)
}

fn rows_check(name: &str, got: &[Vec<f64>], want: &[[f64; 3]; 3], tol: f64) -> Check {
    let dev = got
        .iter()
        .zip(want)
        .flat_map(|(r, w)| r.iter().zip(w).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    let fmt = |rows: Vec<Vec<f64>>| {
        rows.iter()
            .map(|r| r.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(" | ")
    };
    check(
        name,
        fmt(want.iter().map(|r| r.to_vec()).collect()),
        format!("{} (max deviation {dev:.3}, allowed {tol})", fmt(got.to_vec())),
        dev <= tol,
    )
}

fn classes_of(n: usize, classes: &[&[usize]]) -> Partition {
    Partition::from_classes(n, classes.iter().map(|c| c.to_vec()).collect()).expect("valid classes")
}

fn smoking() -> Result<(Vec<Check>, Vec<Report>)> {
    let cpt = fixtures::smoking_cpt()?;
    let util = fixtures::smoking_utility()?;
    let (cs, es) = (cpt.cause_space().clone(), cpt.effect_space().clone());
    let eu = expected_utilities(&cpt, &util)?;
    let eta = eu.eta.expect("interventional");
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    let eu_ok = eu.values.iter().zip(fixtures::SMOKING_EU).all(|(a, b)| (a - b).abs() <= 1e-9);

    let pc = pragmatic_causal_coarsening(&cpt, &util, TAU)?;
    let pe = pragmatic_effect_coarsening(&util, TAU);
    let checks = vec![
        check("expected utilities", fmt(&fixtures::SMOKING_EU), fmt(&eu.values), eu_ok),
        check(
            "eta",
            format!("{:.2}", fixtures::SMOKING_ETA),
            format!("{eta:.2}"),
            (eta - fixtures::SMOKING_ETA).abs() <= 1e-9,
        ),
        partition_check("causal coarsening", &causal_coarsening(&cpt, TAU)?, &Partition::singletons(3), &cs),
        partition_check(
            "effect coarsening",
            &effect_coarsening(&cpt, TAU)?,
            &classes_of(4, &[&[0, 3], &[1], &[2]]),
            &es,
        ),
        partition_check("pragmatic causal coarsening", &pc, &classes_of(3, &[&[0, 1], &[2]]), &cs),
        partition_check("pragmatic effect coarsening", &pe, &Partition::singletons(4), &es),
    ];
    let coarse = coarsen_cpt(&cpt, &pc, &pe, &uniform(3))?;
    let report = Report::new("smoking: pragmatic coarsening", cs, es, pc, pe, coarse)
        .with_profile(eu)
        .with_note("merged cause rows are mixed with a uniform cause marginal");
    Ok((checks, vec![report]))
}

fn scm() -> Result<(Vec<Check>, Vec<Report>)> {
    let joint = build_fig1_scm()?;
    let util = fixtures::scm_utility()?;
    let reference = fixtures::scm_cpt()?;
    let obs = observational_cpt(&joint)?;
    let (cs, es) = (reference.cause_space().clone(), reference.effect_space().clone());
    let mut checks = Vec::new();

    let d4 = obs
        .rows()
        .iter()
        .flatten()
        .zip(reference.rows().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.push(check("model reproduces p(E | C)", "deviation <= 1e-6", format!("{d4:.1e}"), d4 <= 1e-6));
    let marginal = cause_marginal(&joint);
    checks.push(check(
        "cause marginal",
        "0.25 each",
        format!("{marginal:?}"),
        marginal.iter().all(|p| (p - 0.25).abs() < 1e-12),
    ));

    let cfl_c = classes_of(4, &[&[0], &[1, 2], &[3]]);
    let cfl_e = classes_of(4, &[&[0, 3], &[1], &[2]]);
    let pcfl_c = classes_of(4, &[&[0, 3], &[1], &[2]]);
    let pcfl_e = classes_of(4, &[&[0], &[1, 2], &[3]]);
    checks.push(partition_check("observational causal", &observational_causal_coarsening(&obs, TAU)?, &cfl_c, &cs));
    checks.push(partition_check("observational effect", &observational_effect_coarsening(&obs, TAU)?, &cfl_e, &es));
    checks.push(partition_check(
        "observational pragmatic causal",
        &observational_pragmatic_causal_coarsening(&obs, &util, TAU)?,
        &pcfl_c,
        &cs,
    ));
    checks.push(partition_check("pragmatic effect", &pragmatic_effect_coarsening(&util, TAU), &pcfl_e, &es));

    let eu = expected_utilities(&obs, &util)?;
    let eu_ok = eu
        .values
        .iter()
        .zip(fixtures::SCM_EU_REPORTED)
        .all(|(a, b)| (a - b).abs() <= 0.005);
    checks.push(check(
        "observational expected utilities",
        format!("{:?}", fixtures::SCM_EU_REPORTED),
        format!("{:?}", eu.values.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>()),
        eu_ok,
    ));

    let u = uniform(4);
    let cfl_exact = coarsen_cpt(&reference, &cfl_c, &cfl_e, &u)?;
    checks.push(rows_check("exact CFL coarse CPT", cfl_exact.rows(), &fixtures::CFL_EXPECTED, 1e-9));
    let pcfl_exact = coarsen_cpt(&reference, &pcfl_c, &pcfl_e, &u)?;
    checks.push(rows_check("exact PCFL coarse CPT", pcfl_exact.rows(), &fixtures::PCFL_EXPECTED, 1e-9));

    let data = sample_dataset(&joint, DEMO_SAMPLES, &mut trial_rng(DEMO_SEED, 0), Some(&util))?;
    let cfl_opts =
        CflOptions::new(ClusterConfig::tolerance(0.05).with_knn_k(540)).with_coding(EffectCoding::Indicator);
    let cfl = run_cfl(&data, &cfl_opts)?;
    checks.push(partition_check("sampled CFL causes", &cfl.cause_partition, &cfl_c, &cfl.cause_space));
    checks.push(partition_check("sampled CFL effects", &cfl.effect_partition, &cfl_e, &cfl.effect_space));
    checks.push(rows_check("sampled CFL coarse CPT", cfl.coarse_cpt.rows(), &fixtures::CFL_EXPECTED, 0.03));

    let pcfl = run_pcfl(&data, &PcflOptions::new(ClusterConfig::tolerance(0.5)), None)?;
    checks.push(partition_check("sampled PCFL causes", &pcfl.cause_partition, &pcfl_c, &pcfl.cause_space));
    checks.push(partition_check("sampled PCFL effects", &pcfl.effect_partition, &pcfl_e, &pcfl.effect_space));
    checks.push(rows_check("sampled PCFL coarse CPT", pcfl.coarse_cpt.rows(), &fixtures::PCFL_EXPECTED, 0.03));

    let int = interventional_cpt(&joint)?;
    let pc = pragmatic_causal_coarsening(&int, &util, TAU)?;
    let reports = vec![
        Report::from_coarsening(format!("sampled CFL ({DEMO_SAMPLES} records, seed {DEMO_SEED})"), &cfl),
        Report::from_coarsening(format!("sampled PCFL ({DEMO_SAMPLES} records, seed {DEMO_SEED})"), &pcfl),
        Report::new(
            "interventional pragmatic coarsening of the model",
            cs,
            es.clone(),
            pc.clone(),
            pragmatic_effect_coarsening(&util, TAU),
            coarsen_cpt(&int, &pc, &pragmatic_effect_coarsening(&util, TAU), &u)?,
        )
        .with_profile(expected_utilities(&int, &util)?),
    ];
    Ok((checks, reports))
}

pub fn run(name: DemoName, format: Format) -> Result<String> {
    let (checks, reports) = match name {
        DemoName::Smoking => smoking()?,
        DemoName::Scm => scm()?,
    };
    match format {
        Format::Text => {
            let mut out = String::new();
            for c in &checks {
                out.push_str(&format!(
                    "[{}] {}\n    expected: {}\n    computed: {}\n",
                    if c.ok { "ok" } else { "MISMATCH" },
                    c.name,
                    c.expected,
                    c.computed
                ));
            }
            for r in &reports {
                out.push('\n');
                out.push_str(&emit_report(r, Format::Text)?);
            }
            Ok(out)
        }
        Format::Json => {
            let reports = reports
                .iter()
                .map(|r| Ok(serde_json::from_str::<Value>(&emit_report(r, Format::Json)?)?))
                .collect::<Result<Vec<Value>>>()?;
            let checks: Vec<Value> = checks
                .iter()
                .map(|c| json!({"name": c.name, "expected": c.expected, "computed": c.computed, "ok": c.ok}))
                .collect();
            Ok(serde_json::to_string_pretty(&json!({"checks": checks, "reports": reports}))? + "\n")
        }
        Format::Csv => {
            let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
            let mut out = String::from("check,expected,computed,ok\n");
            for c in &checks {
                out.push_str(&format!("{},{},{},{}\n", quote(&c.name), quote(&c.expected), quote(&c.computed), c.ok));
            }
            Ok(out)
        }
    }
}
