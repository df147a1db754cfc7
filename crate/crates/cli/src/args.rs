use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pcfl", version, about = "Causal and pragmatic causal feature learning")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,

    /// Write output here instead of stdout (`simulate`: the dataset file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coarsening of a CPT (and utility table) under one equivalence relation.
    Exact(ExactArgs),
    /// Sample-based causal feature learning.
    Cfl(CflArgs),
    /// Sample-based pragmatic causal feature learning.
    Pcfl(PcflArgs),
    /// Observational-first pragmatic coarsening of an exact confounded joint.
    Pipeline(PipelineArgs),
    /// Sample a dataset from a built-in structural model.
    Simulate(SimulateArgs),
    /// Monte Carlo probe of the quotient claim for pragmatic coarsenings.
    Prop2(Prop2Args),
    /// Reproduce the worked examples end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Obs,
    Int,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    C,
    E,
    Oc,
    Oe,
    Pc,
    Pe,
    Opc,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// CPT in matrix CSV form (effect labels in the first row, cause labels in the first column).
    #[arg(long)]
    pub cpt: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Utility table in matrix CSV form.
    #[arg(long)]
    pub util: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub relation: Relation,
    /// Absolute tolerance for equality of probabilities and utilities.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Cause marginal used to mix merged rows (comma-separated); uniform by default.
    #[arg(long, value_delimiter = ',')]
    pub marginal: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Tol,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Tol)]
    pub method: MethodArg,
    /// Merge threshold for tolerance linkage.
    #[arg(long)]
    pub cluster_tol: Option<f64>,
    /// Number of clusters for k-means.
    #[arg(short = 'k', long = "k-clusters")]
    pub k: Option<usize>,
    /// Neighbour rank used by kNN features and kNN regression.
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Additive smoothing of the empirical coarse CPT.
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodingArg {
    Numeric,
    Enumeration,
    Indicator,
}

#[derive(Debug, Args)]
pub struct CflArgs {
    /// Dataset CSV with header `c,e[,u]` or `c_1..,e_1..[,u]`.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    /// Numeric coding of labelled effects.
    #[arg(long, value_enum, default_value_t = CodingArg::Numeric)]
    pub coding: CodingArg,
}

#[derive(Debug, Args)]
pub struct PcflArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Utility table in matrix CSV form; needed when the data has no `u` column or does not
    /// cover every (cause, effect) pair.
    #[arg(long)]
    pub util: Option<PathBuf>,
    #[command(flatten)]
    pub cluster: ClusterArgs,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Joint distribution as JSON (`cause_labels`, `effect_labels`, `confounder_labels`,
    /// `iota`, `beta`, `gamma`).
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub util: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScmArg {
    Fig1,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scm: ScmArg,
    #[arg(short = 'n', long = "samples")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Attach utilities from the model's built-in utility table.
    #[arg(long)]
    pub with_utility: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlantArg {
    Duplicate,
    Constraint,
}

#[derive(Debug, Args)]
pub struct Prop2Args {
    /// Causes, effects and confounder values, e.g. `4,4,3`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub trials: u64,
    /// Observational-equality tolerances, e.g. `1e-1,1e-2,1e-3`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub eps_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interventional tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    /// Plant exact ties instead of sampling generic joints.
    #[arg(long, value_enum)]
    pub planted: Option<PlantArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Smoking,
    Scm,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
}
