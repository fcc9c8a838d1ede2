use std::path::{Path, PathBuf};
use std::time::Instant;

use gsl_core::chain::build_original_chain;
use gsl_core::diagnostics::{energy, momentum, moving_cutoff_momentum};
use gsl_core::dispersion::measure_frequency;
use gsl_core::evolve::run_plain;
use gsl_core::io::{profile_table, write_trajectory, Table};
use gsl_core::nonlinearity::Family;
use gsl_core::nsoliton::cauchy_check;
use gsl_core::profile::{amplitude_from_speed, gp_exact_eta, profile_residual, solve_profile_default};
use gsl_core::scenarios::{hydro_states, monotonicity, perturbed_chain, stability_run};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{self, case_seed, Invalid};
use crate::error::CliError;

pub const MANIFEST_VERSION: u32 = 1;

pub struct CaseContext<'a> {
    pub index: usize,
    pub seed: u64,
    pub out: &'a Path,
}

impl CaseContext<'_> {
    fn file(&self, stem: &str, ext: &str) -> PathBuf {
        PathBuf::from(format!("{stem}_{:03}.{ext}", self.index))
    }

    fn write_table(&self, name: &Path, t: &Table) -> gsl_core::Result<PathBuf> {
        t.write(&self.out.join(name))?;
        Ok(name.to_path_buf())
    }
}

#[derive(Default)]
pub struct CaseOutput {
    pub artifacts: Vec<PathBuf>,
    /// Rows of the scenario summary table, without the leading case column.
    pub summary: Vec<Vec<f64>>,
}

pub trait Scenario {
    const NAME: &'static str;
    /// Summary columns after `case`.
    const SUMMARY: &'static [&'static str];
    type Case: DeserializeOwned + Send + Sync;

    fn validate(case: &Self::Case) -> Result<(), Invalid>;
    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput>;
}

#[derive(Serialize)]
struct Versions {
    gsl: &'static str,
    manifest: u32,
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: &'static str,
    config: &'a Path,
    config_sha256: &'a str,
    seed: u64,
    cases: usize,
    jobs: usize,
    versions: Versions,
    wall_time_s: f64,
    artifacts: Vec<PathBuf>,
}

pub struct Summary {
    pub out: PathBuf,
    pub cases: usize,
    pub artifacts: Vec<PathBuf>,
}

pub fn output_dir(configured: Option<&Path>, scenario: &str) -> PathBuf {
    match std::env::var_os("GSL_OUT") {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => configured
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("gsl-out").join(scenario)),
    }
}

/// Validate every case, then run them on a pool of `jobs` threads and write
/// the summary table and `manifest.json`. An empty case list writes nothing.
pub fn execute<S: Scenario>(config_path: &Path, jobs: Option<usize>) -> Result<Summary, CliError> {
    let start = Instant::now();
    let loaded = config::load::<S::Case>(config_path)?;
    let cfg = loaded.config;
    for (index, case) in cfg.cases.iter().enumerate() {
        S::validate(case).map_err(|(field, source)| CliError::InvalidCase { index, field, source })?;
    }
    let out = output_dir(cfg.out.as_deref(), S::NAME);
    if cfg.cases.is_empty() {
        return Ok(Summary {
            out,
            cases: 0,
            artifacts: Vec::new(),
        });
    }
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(out.clone(), e))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let threads = pool.current_num_threads();
    let results = pool.install(|| {
        cfg.cases
            .par_iter()
            .enumerate()
            .map(|(index, case)| {
                let ctx = CaseContext {
                    index,
                    seed: case_seed(cfg.seed, index),
                    out: &out,
                };
                S::run(case, &ctx).map_err(|source| CliError::Scenario {
                    scenario: S::NAME,
                    index,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut header = vec!["case"];
    header.extend_from_slice(S::SUMMARY);
    let mut table = Table::new(header);
    let mut artifacts = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        for row in r.summary {
            let mut full = vec![i as f64];
            full.extend(row);
            table.push(full)?;
        }
        artifacts.extend(r.artifacts);
    }
    let summary_name = PathBuf::from(format!("{}.csv", S::NAME.replace('-', "_")));
    table.write(&out.join(&summary_name))?;
    artifacts.insert(0, summary_name);

    let manifest = Manifest {
        scenario: S::NAME,
        config: config_path,
        config_sha256: &loaded.sha256,
        seed: cfg.seed,
        cases: cfg.cases.len(),
        jobs: threads,
        versions: Versions {
            gsl: env!("CARGO_PKG_VERSION"),
            manifest: MANIFEST_VERSION,
        },
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: artifacts.clone(),
    };
    let path = out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(gsl_core::Error::from)?;
    std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))?;
    Ok(Summary {
        out,
        cases: cfg.cases.len(),
        artifacts,
    })
}

pub struct TwCheck;

impl Scenario for TwCheck {
    const NAME: &'static str = "tw-check";
    const SUMMARY: &'static [&'static str] = &["speed", "amplitude", "residual", "gp_deviation"];
    type Case = config::TwCheckCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let nl = &case.nonlinearity;
        let p = solve_profile_default(nl, case.speed)?;
        let residual = profile_residual(nl, &p);
        // closed form only for GP
        let gp_deviation = match nl.family() {
            Family::GrossPitaevskii {} => (0..p.grid.n)
                .map(|j| (p.eta[j] - gp_exact_eta(case.speed, p.grid.x(j))).abs())
                .fold(0.0, f64::max),
            _ => f64::NAN,
        };
        let name = ctx.write_table(&ctx.file("profile", "csv"), &profile_table(&p))?;
        Ok(CaseOutput {
            artifacts: vec![name],
            summary: vec![vec![case.speed, amplitude_from_speed(nl, case.speed)?, residual, gp_deviation]],
        })
    }
}

pub struct Evolve;

impl Scenario for Evolve {
    const NAME: &'static str = "evolve";
    const SUMMARY: &'static [&'static str] = &["t_end", "max_rel_energy_drift", "max_momentum_drift"];
    type Case = config::EvolveCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let nl = &case.nonlinearity;
        let w0 = match &case.noise {
            Some(p) => perturbed_chain(nl, &case.chain, &case.evolve, &p.spec(ctx.seed))?,
            None => build_original_chain(nl, &case.chain, &case.evolve.grid()?)?,
        };
        let traj = run_plain(&w0, nl, &case.evolve)?;
        let states = hydro_states(&traj)?;
        let mut t = Table::new(["t", "energy", "momentum", "max_eta", "theta0"]);
        for (s, q) in traj.snapshots.iter().zip(&states) {
            t.push(vec![s.t, energy(q, nl)?, momentum(q), q.max_eta().0, s.field.theta0()])?;
        }
        let (e0, p0) = (t.rows[0][1], t.rows[0][2]);
        let de = t.rows.iter().map(|r| ((r[1] - e0) / e0).abs()).fold(0.0, f64::max);
        let dp = t.rows.iter().map(|r| (r[2] - p0).abs()).fold(0.0, f64::max);
        let mut artifacts = vec![ctx.write_table(&ctx.file("diagnostics", "csv"), &t)?];
        if case.write_snapshots {
            let dir = PathBuf::from(format!("snapshots_{:03}", ctx.index));
            write_trajectory(&ctx.out.join(&dir), &traj, nl)?;
            artifacts.push(dir.join("trajectory.json"));
        }
        Ok(CaseOutput {
            artifacts,
            summary: vec![vec![case.evolve.t_end, de, dp]],
        })
    }
}

pub struct Stability;

impl Scenario for Stability {
    const NAME: &'static str = "stability";
    const SUMMARY: &'static [&'static str] = &["delta", "sup_eps_norm", "max_mean_speed_mismatch"];
    type Case = config::StabilityCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let noise = case.noise.spec(ctx.seed);
        let run = stability_run(&case.nonlinearity, &case.chain, &noise, &case.evolve, case.probe_width)?;
        let tr = &run.track;
        let mut m = Table::new(["t", "k", "speed", "center", "center_velocity", "eps_norm"]);
        for i in 0..tr.len() {
            for k in 0..tr.solitons() {
                m.push(vec![
                    tr.times[i],
                    k as f64,
                    tr.speeds[i][k],
                    tr.centers[i][k],
                    tr.center_velocity[i][k],
                    tr.eps_norm[i],
                ])?;
            }
        }
        let mut p = Table::new(["t", "gap", "center", "eta_norm", "v_norm", "phase_variation"]);
        for (g, series) in run.probes.iter().enumerate() {
            for s in series {
                p.push(vec![s.t, g as f64, s.center, s.eta_norm, s.v_norm, s.phase_variation])?;
            }
        }
        let t_end = *tr.times.last().unwrap_or(&0.0);
        let mismatch = tr
            .mean_speed_mismatch(0.5 * t_end, t_end)
            .into_iter()
            .fold(0.0, f64::max);
        Ok(CaseOutput {
            artifacts: vec![
                ctx.write_table(&ctx.file("modulation", "csv"), &m)?,
                ctx.write_table(&ctx.file("probe", "csv"), &p)?,
            ],
            summary: vec![vec![noise.norm, tr.sup_eps_norm(f64::INFINITY), mismatch]],
        })
    }
}

pub struct Nsoliton;

impl Scenario for Nsoliton {
    const NAME: &'static str = "nsoliton";
    const SUMMARY: &'static [&'static str] = &["s_n", "tau0", "r_squared", "distance_at_s0", "lyapunov_gain"];
    type Case = config::NsolitonCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let rep = cauchy_check(&case.schedule, &case.nonlinearity, &case.evolve)?;
        let mut decay = Table::new(["s_n", "t", "distance", "lyapunov"]);
        let mut summary = Vec::new();
        for r in &rep.runs {
            for i in 0..r.times.len() {
                decay.push(vec![r.s_n, r.times[i], r.distances[i], r.lyapunov[i]])?;
            }
            let (tau0, r2) = r.fit.map_or((f64::NAN, f64::NAN), |f| (f.tau0, f.fit.r_squared));
            summary.push(vec![r.s_n, tau0, r2, r.distance_at_s0, r.lyapunov_gain]);
        }
        let mut pairs = Table::new(["s_m", "s_n", "distance"]);
        for p in &rep.pairwise {
            pairs.push(vec![p.s_m, p.s_n, p.distance])?;
        }
        let report = ctx.file("report", "json");
        let text = serde_json::to_string_pretty(&rep)?;
        std::fs::write(ctx.out.join(&report), text)?;
        Ok(CaseOutput {
            artifacts: vec![
                ctx.write_table(&ctx.file("decay", "csv"), &decay)?,
                ctx.write_table(&ctx.file("pairwise", "csv"), &pairs)?,
                report,
            ],
            summary,
        })
    }
}

pub struct Dispersion;

impl Scenario for Dispersion {
    const NAME: &'static str = "dispersion";
    const SUMMARY: &'static [&'static str] = &["xi", "measured", "predicted", "rel_error"];
    type Case = config::DispersionCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, _ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let summary = case
            .xi
            .par_iter()
            .map(|&xi| {
                let s = measure_frequency(&case.nonlinearity, xi, &case.measure)?;
                Ok(vec![s.xi, s.measured, s.predicted, s.rel_error])
            })
            .collect::<gsl_core::Result<Vec<_>>>()?;
        Ok(CaseOutput {
            artifacts: Vec::new(),
            summary,
        })
    }
}

pub struct Monotonicity;

impl Scenario for Monotonicity {
    const NAME: &'static str = "monotonicity";
    const SUMMARY: &'static [&'static str] = &["tau", "slope", "intercept", "r_squared"];
    type Case = config::MonotonicityCase;

    fn validate(case: &Self::Case) -> Result<(), Invalid> {
        case.validate()
    }

    fn run(case: &Self::Case, ctx: &CaseContext) -> gsl_core::Result<CaseOutput> {
        let noise = case.noise.spec(ctx.seed);
        let run = stability_run(&case.nonlinearity, &case.chain, &noise, &case.evolve, 5.0)?;
        let rep = monotonicity(&run, case.gap, &case.r_primes, case.tau, case.t_min)?;
        let frame = run.track.midpoints(case.gap);
        let mut series = Table::new(["t", "r_prime", "frame_center", "p"]);
        for &r in &case.r_primes {
            let p = moving_cutoff_momentum(&run.states, &frame, r, case.tau)?;
            for i in 0..p.len() {
                series.push(vec![run.track.times[i], r, frame[i], p[i]])?;
            }
        }
        let mut dips = Table::new(["r_prime", "dip"]);
        for (r, d) in rep.r_primes.iter().zip(&rep.dips) {
            dips.push(vec![*r, *d])?;
        }
        let (slope, intercept, r2) = rep
            .fit
            .map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.slope, f.intercept, f.r_squared));
        Ok(CaseOutput {
            artifacts: vec![
                ctx.write_table(&ctx.file("momentum", "csv"), &series)?,
                ctx.write_table(&ctx.file("dips", "csv"), &dips)?,
            ],
            summary: vec![vec![case.tau, slope, intercept, r2]],
        })
    }
}
