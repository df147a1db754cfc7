//! Causal feature learning (CFL) and pragmatic causal feature learning (PCFL).
//!
//! The exact machinery ([`table`], [`dist`], [`equiv`]) is generic over the [`Scalar`]
//! type (`f32` or `f64`); the sample-based algorithms ([`cfl`], [`pcfl`]) and the Monte
//! Carlo harness ([`montecarlo`]) work in `f64`. Aliases for the common concrete types
//! are provided at the crate root.

pub mod cfl;
pub mod cluster;
pub mod dist;
pub mod equiv;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod montecarlo;
pub mod partition;
pub mod pcfl;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod space;
pub mod table;

pub use error::{Error, Result};
pub use partition::{partition_from_pairs, refines, Partition};
pub use scalar::Scalar;
pub use space::ValueSpace;
pub use table::{coarsen_cpt, coarsen_utility, CptKind};

pub type Cpt64 = table::Cpt<f64>;
pub type Cpt32 = table::Cpt<f32>;
pub type UtilityTable64 = table::UtilityTable<f64>;
pub type UtilityTable32 = table::UtilityTable<f32>;
pub type Joint64 = dist::ConfoundedJoint<f64>;
pub type Joint32 = dist::ConfoundedJoint<f32>;
pub type Profile64 = equiv::ExpectedUtilityProfile<f64>;
pub type Profile32 = equiv::ExpectedUtilityProfile<f32>;
