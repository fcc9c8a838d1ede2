pub mod chain;
pub mod diagnostics;
pub mod dispersion;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod modulation;
pub mod nonlinearity;
pub mod noise;
pub mod nsoliton;
pub mod numerics;
pub mod profile;
pub mod scenarios;
pub mod transform;

pub use chain::ChainSpec;
pub use error::{Error, Result};
pub use evolve::{EvolveConfig, Snapshot, Trajectory};
pub use grid::Grid;
pub use nonlinearity::{Family, HypothesisReport, Nonlinearity};
pub use profile::TravelingWaveProfile;
pub use transform::{HydroField, WaveField};
