//! Casimir free energy and entropy between two identical half-spaces at finite temperature.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod harness;
pub mod lifshitz;
pub mod materials;
pub mod quadrature;
pub mod real;
pub mod reflection;
pub mod special;
pub mod summation;
pub mod units;

pub use error::{Error, Result};
pub use real::Real;

pub use asymptotics::Polarisation;
pub use config::parse_config;
pub use harness::{Spacing, SweepOptions, SweepRow, SweepTable};

pub type Gap = config::GapConfiguration<f64>;
pub type Numerics = config::NumericsSettings<f64>;
pub type Material = materials::PermittivityModel<f64>;
pub type FreeEnergy = lifshitz::FreeEnergyResult<f64>;
pub type Entropy = lifshitz::EntropyEstimate<f64>;
pub type ClosedForm = asymptotics::ClosedForm<f64>;
