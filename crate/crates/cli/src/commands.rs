use std::io::Write;

use pcfl_core::cfl::{run_cfl, CflOptions, EffectCoding};
use pcfl_core::cluster::ClusterConfig;
use pcfl_core::dist::ConfoundedJoint;
use pcfl_core::equiv::{
    causal_coarsening, effect_coarsening, expected_utilities, observational_causal_coarsening,
    observational_effect_coarsening, observational_pragmatic_causal_coarsening, pragmatic_causal_coarsening,
    pragmatic_effect_coarsening, pragmatic_pipeline, ExpectedUtilityProfile,
};
use pcfl_core::io::{parse_cpt_csv, parse_samples_csv, parse_utility_csv, samples_to_csv};
use pcfl_core::montecarlo::{build_fig1_scm, planted_refinement, prop2_probe, sample_dataset, trial_rng, PlantMode, Prop2Config};
use pcfl_core::pcfl::{run_pcfl, PcflOptions};
use pcfl_core::report::{emit_report, Format, Report};
use pcfl_core::table::{uniform, UtilityTable};
use pcfl_core::{coarsen_cpt, fixtures, CptKind, Error, Partition, Result};

use crate::args::*;
use crate::demo;

/// Settings shared by the sample-based commands, validated up front.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cluster: ClusterConfig,
    pub smoothing: f64,
}

impl RunConfig {
    fn from_args(args: &ClusterArgs) -> Result<Self> {
        let method = match (args.method, args.cluster_tol, args.k) {
            (MethodArg::Tol, Some(tol), None) => ClusterConfig::tolerance(tol).method,
            (MethodArg::Kmeans, None, Some(k)) => ClusterConfig::kmeans(k, args.seed).method,
            (MethodArg::Tol, None, _) => return Err(Error::Config("--method tol needs --cluster-tol".into())),
            (MethodArg::Kmeans, _, None) => return Err(Error::Config("--method kmeans needs -k".into())),
            (MethodArg::Tol, Some(_), Some(_)) => return Err(Error::Config("-k only applies to --method kmeans".into())),
            (MethodArg::Kmeans, Some(_), Some(_)) => {
                return Err(Error::Config("--cluster-tol only applies to --method tol".into()))
            }
        };
        let cluster = ClusterConfig {
            method,
            knn_k: args.knn_k,
            seed: args.seed,
        };
        cluster.validate()?;
        if !(args.smoothing >= 0.0 && args.smoothing.is_finite()) {
            return Err(Error::Config("--smoothing must be finite and >= 0".into()));
        }
        Ok(RunConfig {
            cluster,
            smoothing: args.smoothing,
        })
    }
}

pub fn format_of(cli: &Cli) -> Format {
    match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    }
}

pub fn write_output(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let format = format_of(cli);
    match &cli.command {
        Command::Exact(a) => write_output(cli, &emit_report(&exact(a)?, format)?),
        Command::Cfl(a) => write_output(cli, &emit_report(&cfl(a)?, format)?),
        Command::Pcfl(a) => write_output(cli, &emit_report(&pcfl(a)?, format)?),
        Command::Pipeline(a) => write_output(cli, &emit_report(&pipeline(a)?, format)?),
        Command::Simulate(a) => simulate(cli, a),
        Command::Prop2(a) => write_output(cli, &prop2(a, format)?),
        Command::Demo(a) => write_output(cli, &demo::run(a.name, format)?),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("--tol {tol} must be finite and >= 0")))
    }
}

fn exact(a: &ExactArgs) -> Result<Report> {
    check_tol(a.tol)?;
    let kind = match a.kind {
        KindArg::Obs => CptKind::Observational,
        KindArg::Int => CptKind::Interventional,
    };
    let cpt = parse_cpt_csv(&a.cpt, kind)?;
    let util = a.util.as_ref().map(parse_utility_csv).transpose()?;
    let need_util = || -> Result<&UtilityTable<f64>> {
        util.as_ref()
            .ok_or_else(|| Error::Config("this relation needs --util".into()))
    };
    let (m, n) = (cpt.n_causes(), cpt.n_effects());
    let (cause_part, effect_part, name) = match a.relation {
        Relation::C => (causal_coarsening(&cpt, a.tol)?, Partition::singletons(n), "causal"),
        Relation::E => (Partition::singletons(m), effect_coarsening(&cpt, a.tol)?, "effect"),
        Relation::Oc => (observational_causal_coarsening(&cpt, a.tol)?, Partition::singletons(n), "observational causal"),
        Relation::Oe => (Partition::singletons(m), observational_effect_coarsening(&cpt, a.tol)?, "observational effect"),
        Relation::Pc => (pragmatic_causal_coarsening(&cpt, need_util()?, a.tol)?, Partition::singletons(n), "pragmatic causal"),
        Relation::Pe => (Partition::singletons(m), pragmatic_effect_coarsening(need_util()?, a.tol), "pragmatic effect"),
        Relation::Opc => (
            observational_pragmatic_causal_coarsening(&cpt, need_util()?, a.tol)?,
            Partition::singletons(n),
            "observational pragmatic causal",
        ),
    };
    let marginal = match &a.marginal {
        Some(p) => {
            if p.len() != m {
                return Err(Error::Shape(format!("--marginal has {} entries for {m} causes", p.len())));
            }
            if p.iter().any(|x| !(*x >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidProbability("--marginal must be a probability vector".into()));
            }
            p.clone()
        }
        None => uniform(m),
    };
    let coarse = coarsen_cpt(&cpt, &cause_part, &effect_part, &marginal)?;
    let mut report = Report::new(
        format!("{name} coarsening ({kind} CPT, tol = {:e})", a.tol),
        cpt.cause_space().clone(),
        cpt.effect_space().clone(),
        cause_part,
        effect_part,
        coarse,
    );
    if let Some(u) = &util {
        report = report.with_profile(expected_utilities(&cpt, u)?);
    }
    if a.marginal.is_none() && report.cause_partition.n_classes() < m {
        report = report.with_note("merged cause rows are mixed with a uniform cause marginal");
    }
    Ok(report)
}

fn cfl(a: &CflArgs) -> Result<Report> {
    let cfg = RunConfig::from_args(&a.cluster)?;
    let data = parse_samples_csv(&a.data)?;
    let coding = match a.coding {
        CodingArg::Numeric => EffectCoding::Numeric,
        CodingArg::Enumeration => EffectCoding::Enumeration,
        CodingArg::Indicator => EffectCoding::Indicator,
    };
    let opts = CflOptions::new(cfg.cluster).with_coding(coding).with_smoothing(cfg.smoothing);
    let r = run_cfl(&data, &opts)?;
    Ok(Report::from_coarsening(format!("CFL on {} records", data.len()), &r))
}

fn pcfl(a: &PcflArgs) -> Result<Report> {
    let cfg = RunConfig::from_args(&a.cluster)?;
    let data = parse_samples_csv(&a.data)?;
    let util = a.util.as_ref().map(parse_utility_csv).transpose()?;
    let opts = PcflOptions::new(cfg.cluster).with_smoothing(cfg.smoothing);
    let r = run_pcfl(&data, &opts, util.as_ref())?;
    let report = Report::from_coarsening(format!("PCFL on {} records", data.len()), &r);
    Ok(if data.causes().is_vector() {
        report
    } else {
        let eu: Vec<f64> = r.cause_statistic.iter().map(|f| f[0]).collect();
        report.with_profile(ExpectedUtilityProfile::from_values(eu, CptKind::Observational))
    })
}

fn pipeline(a: &PipelineArgs) -> Result<Report> {
    check_tol(a.tol)?;
    let joint = ConfoundedJoint::<f64>::from_json(&std::fs::read_to_string(&a.joint)?)?;
    let util = parse_utility_csv(&a.util)?;
    let r = pragmatic_pipeline(&joint, &util, a.tol)?;
    let fine = expected_utilities(&pcfl_core::dist::interventional_cpt(&joint)?, &util)?;
    let opc_labels = r.observational_partition.macro_labels(joint.cause_space());
    let class_eu: Vec<String> = opc_labels
        .iter()
        .zip(&r.class_utilities.values)
        .map(|(l, v)| format!("{l}: {v:.4}"))
        .collect();
    Ok(Report::new(
        "pragmatic pipeline (observational classes first)",
        joint.cause_space().clone(),
        joint.effect_space().clone(),
        r.cause_partition,
        r.effect_partition,
        r.coarse_cpt,
    )
    .with_profile(fine)
    .with_note(format!(
        "observational pragmatic classes: {}",
        opc_labels.join(" | ")
    ))
    .with_note(format!("interventional utility per observational class: {}", class_eu.join(", "))))
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let joint = match a.scm {
        ScmArg::Fig1 => build_fig1_scm()?,
    };
    let util = a.with_utility.then(fixtures::scm_utility).transpose()?;
    let data = sample_dataset(&joint, a.n, &mut trial_rng(a.seed, 0), util.as_ref())?;
    write_output(cli, &samples_to_csv(&data)?)?;
    if let Some(path) = &cli.out {
        eprintln!("wrote {} records to {}", data.len(), path.display());
    }
    Ok(())
}

fn prop2(a: &Prop2Args, format: Format) -> Result<String> {
    let dims = match a.dims.as_slice() {
        &[m, n, w] => (m, n, w),
        _ => return Err(Error::Config("--dims takes three values m,n,w".into())),
    };
    let mut cfg = Prop2Config::new(dims, a.trials, a.eps_grid.clone(), a.seed);
    cfg.delta = a.delta;
    if let Some(plant) = a.planted {
        let mode = match plant {
            PlantArg::Duplicate => PlantMode::Duplicate,
            PlantArg::Constraint => PlantMode::Constraint,
        };
        let r = planted_refinement(&cfg, mode, 1e-9)?;
        return Ok(match format {
            Format::Json => r.to_json()? + "\n",
            Format::Csv => format!(
                "mode,trials,tied,refinement_holds,violations\n{},{},{},{},{}\n",
                match mode {
                    PlantMode::Duplicate => "duplicate",
                    PlantMode::Constraint => "constraint",
                },
                r.trials,
                r.tied,
                r.refinement_holds,
                r.violations
            ),
            Format::Text => format!(
                "planted ties ({mode:?}), dims {:?}, {} trials\n  tied: {}\n  refinement holds: {}\n  violations: {}\n  max |EU_obs difference| of planted pair: {:.2e}\n",
                r.dims, r.trials, r.tied, r.refinement_holds, r.violations, r.max_scaled_residual
            ),
        });
    }
    let r = prop2_probe(&cfg)?;
    Ok(match format {
        Format::Json => r.to_json()? + "\n",
        Format::Csv => r.to_csv(),
        Format::Text => {
            let mut out = format!(
                "eps curve, dims {:?}, {} trials x {} pairs, delta = {:e}\n{:>10}  {:>10}  {:>10}  {:>12}  {:>12}\n",
                r.dims, r.trials, r.pairs_per_trial, r.delta, "eps", "flagged", "violations", "rate", "given flag"
            );
            for row in &r.rows {
                out.push_str(&format!(
                    "{:>10.1e}  {:>10}  {:>10}  {:>12.3e}  {:>12.3e}\n",
                    row.eps, row.flagged, row.violations, row.violation_rate, row.conditional_rate
                ));
            }
            out.push_str(&format!("note: {}\n", r.note));
            out
        }
    })
}
