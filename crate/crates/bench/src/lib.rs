//! Fixtures shared by the benchmarks.

use gsl_core::chain::build_original_chain;
use gsl_core::noise::{band_limited_noise, NoiseSpec};
use gsl_core::transform::to_hydro;
use gsl_core::{ChainSpec, EvolveConfig, HydroField, Nonlinearity, WaveField};

pub fn two_chain() -> ChainSpec {
    ChainSpec::new(vec![0.6, 1.0], vec![-20.0, 20.0], 0.0).expect("valid chain")
}

/// Default-resolution box (`L = 400`, `n = 4096`).
pub fn chain_field(nl: &Nonlinearity) -> WaveField {
    let cfg = EvolveConfig::default();
    build_original_chain(nl, &two_chain(), &cfg.grid().expect("grid")).expect("chain")
}

/// The two-chain plus `1e-3` of seeded noise, in hydrodynamic variables.
pub fn perturbed_hydro(nl: &Nonlinearity) -> HydroField {
    let (q, _) = to_hydro(&chain_field(nl)).expect("hydro");
    let noise = band_limited_noise(&q.grid, &NoiseSpec::new(1, 1e-3)).expect("noise");
    q.add(&noise).expect("same grid")
}
