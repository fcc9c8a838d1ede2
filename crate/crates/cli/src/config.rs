use std::path::{Path, PathBuf};

use gsl_core::dispersion::DispersionConfig;
use gsl_core::noise::NoiseSpec;
use gsl_core::nsoliton::BackwardSchedule;
use gsl_core::{ChainSpec, EvolveConfig, Nonlinearity};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Top level of every config file. `cases` may be empty.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig<C> {
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub cases: Vec<C>,
}

pub struct Loaded<C> {
    pub config: RunConfig<C>,
    pub sha256: String,
}

pub fn load<C: DeserializeOwned>(path: &Path) -> Result<Loaded<C>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    let config = serde_path_to_error::deserialize(de).map_err(|e| CliError::Config {
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    Ok(Loaded { config, sha256 })
}

/// Seeded noise without the seed: it is derived from the run seed and the case index.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub norm: f64,
    #[serde(default = "one")]
    pub k_max: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "forty")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

fn forty() -> f64 {
    40.0
}

impl Perturbation {
    pub fn spec(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            seed,
            norm: self.norm,
            k_max: self.k_max,
            center: self.center,
            width: self.width,
        }
    }
}

pub fn case_seed(run_seed: u64, index: usize) -> u64 {
    run_seed.wrapping_add(index as u64)
}

fn check_speeds(nl: &Nonlinearity, speeds: &[f64]) -> gsl_core::Result<()> {
    for &c in speeds {
        if !(c > 0.0 && c < nl.cs()) {
            return Err(gsl_core::Error::SpeedNotAdmissible { c });
        }
    }
    Ok(())
}

/// Case validation reports the offending field relative to the case.
pub type Invalid = (&'static str, gsl_core::Error);

fn at<T>(field: &'static str, r: gsl_core::Result<T>) -> Result<T, Invalid> {
    r.map_err(|e| (field, e))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwCheckCase {
    pub nonlinearity: Nonlinearity,
    pub speed: f64,
}

impl TwCheckCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        at("speed", check_speeds(&self.nonlinearity, &[self.speed]))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveCase {
    pub nonlinearity: Nonlinearity,
    pub chain: ChainSpec,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub noise: Option<Perturbation>,
    #[serde(default = "yes")]
    pub write_snapshots: bool,
}

fn yes() -> bool {
    true
}

fn validate_run(
    nl: &Nonlinearity,
    chain: &ChainSpec,
    evolve: &EvolveConfig,
    noise: Option<&Perturbation>,
) -> Result<(), Invalid> {
    at("chain", chain.validate())?;
    at("chain.speeds", check_speeds(nl, &chain.speeds))?;
    at("evolve", evolve.validate())?;
    if let Some(p) = noise {
        at("noise", p.spec(0).validate())?;
    }
    Ok(())
}

impl EvolveCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        validate_run(&self.nonlinearity, &self.chain, &self.evolve, self.noise.as_ref())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityCase {
    pub nonlinearity: Nonlinearity,
    pub chain: ChainSpec,
    #[serde(default)]
    pub evolve: EvolveConfig,
    pub noise: Perturbation,
    #[serde(default = "five")]
    pub probe_width: f64,
}

fn five() -> f64 {
    5.0
}

impl StabilityCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        validate_run(&self.nonlinearity, &self.chain, &self.evolve, Some(&self.noise))?;
        if !(self.probe_width > 0.0) {
            return Err((
                "probe_width",
                gsl_core::Error::InvalidParameter(format!("{} must be positive", self.probe_width)),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsolitonCase {
    pub nonlinearity: Nonlinearity,
    pub schedule: BackwardSchedule,
    #[serde(default)]
    pub evolve: EvolveConfig,
}

impl NsolitonCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        at("schedule", self.schedule.validate())?;
        at("schedule.speeds", check_speeds(&self.nonlinearity, &self.schedule.speeds))?;
        if self.schedule.times.len() < 3 {
            return Err((
                "schedule.times",
                gsl_core::Error::InvalidParameter("at least 3 schedule times are needed".into()),
            ));
        }
        at("evolve", self.evolve.validate())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionCase {
    pub nonlinearity: Nonlinearity,
    pub xi: Vec<f64>,
    #[serde(default)]
    pub measure: DispersionConfig,
}

impl DispersionCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        if self.xi.is_empty() || self.xi.iter().any(|x| !(*x > 0.0)) {
            return Err((
                "xi",
                gsl_core::Error::InvalidParameter("wavenumbers must be positive and non-empty".into()),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityCase {
    pub nonlinearity: Nonlinearity,
    pub chain: ChainSpec,
    #[serde(default)]
    pub evolve: EvolveConfig,
    pub noise: Perturbation,
    /// Index of the gap whose tracked midpoint is the moving frame.
    #[serde(default)]
    pub gap: usize,
    pub r_primes: Vec<f64>,
    #[serde(default = "tau_default")]
    pub tau: f64,
    #[serde(default)]
    pub t_min: f64,
}

fn tau_default() -> f64 {
    0.05
}

impl MonotonicityCase {
    pub fn validate(&self) -> Result<(), Invalid> {
        validate_run(&self.nonlinearity, &self.chain, &self.evolve, Some(&self.noise))?;
        if self.gap + 1 >= self.chain.len() {
            return Err((
                "gap",
                gsl_core::Error::InvalidParameter(format!(
                    "gap {} needs {} solitons",
                    self.gap,
                    self.gap + 2
                )),
            ));
        }
        if self.r_primes.is_empty() {
            return Err(("r_primes", gsl_core::Error::InvalidParameter("empty".into())));
        }
        if !(self.tau > 0.0) {
            return Err(("tau", gsl_core::Error::InvalidParameter(format!("{}", self.tau))));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check<C: DeserializeOwned>(name: &str, validate: fn(&C) -> Result<(), Invalid>) {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        let loaded = load::<C>(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(!loaded.config.cases.is_empty());
        for c in &loaded.config.cases {
            validate(c).unwrap_or_else(|(f, e)| panic!("{name}: {f}: {e}"));
        }
    }

    #[test]
    fn shipped_configs_validate() {
        check::<TwCheckCase>("tw_check.json", TwCheckCase::validate);
        check::<EvolveCase>("evolve.json", EvolveCase::validate);
        check::<StabilityCase>("stability.json", StabilityCase::validate);
        check::<NsolitonCase>("nsoliton.json", NsolitonCase::validate);
        check::<DispersionCase>("dispersion.json", DispersionCase::validate);
        check::<MonotonicityCase>("monotonicity.json", MonotonicityCase::validate);
    }

    #[test]
    fn seeds_differ_per_case() {
        assert_eq!(case_seed(5, 0), 5);
        assert_ne!(case_seed(5, 1), case_seed(5, 0));
        assert_eq!(case_seed(u64::MAX, 1), 0);
    }
}
