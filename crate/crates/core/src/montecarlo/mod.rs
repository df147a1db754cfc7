//! Random joints, the four-valued simulation model, and the quotient-claim probe.

mod prop2;
mod scm;
mod simplex;

pub use prop2::{
    pair_outcome, plant_duplicate_tie, plant_constraint_tie, planted_refinement, prop2_probe, EpsRow, PairOutcome,
    PlantMode, PlantedReport, Prop2Config, Prop2Report,
};
pub use scm::{
    build_fig1_scm, dataset_from_counts, fit_fig1_logits, fig1_confounder_of, sample_dataset, LogitFit,
};
pub use simplex::{sample_joint, sample_simplex, sample_utility, trial_rng};
