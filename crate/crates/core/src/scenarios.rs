//! End-to-end experiments shared by the CLI and the acceptance suite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_hydro_chain, ChainSpec};
use crate::diagnostics::{energy, max_dip, momentum, moving_cutoff_momentum};
use crate::error::{Error, Result};
use crate::evolve::{propagate, run_plain, EvolveConfig, Scheme, Trajectory};
use crate::modulation::{between_probe, track, ModulationTrack, ProbeSample};
use crate::noise::{band_limited_noise, NoiseSpec};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{exponential_fit, LinearFit};
use crate::transform::{to_hydro, to_original, HydroField, WaveField};

/// Hydrodynamic chain plus seeded noise, lifted with phase `spec.theta`.
pub fn perturbed_chain(nl: &Nonlinearity, spec: &ChainSpec, cfg: &EvolveConfig, noise: &NoiseSpec) -> Result<WaveField> {
    let grid = cfg.grid()?;
    let q = build_hydro_chain(nl, spec, &grid)?;
    let q = q.add(&band_limited_noise(&grid, noise)?)?;
    to_original(&q, spec.theta)
}

pub fn hydro_states(traj: &Trajectory) -> Result<Vec<HydroField>> {
    traj.snapshots
        .par_iter()
        .map(|s| to_hydro(&s.field).map(|(q, _)| q).map_err(|e| e.at_time(s.t)))
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConservationReport {
    pub energy0: f64,
    pub momentum0: f64,
    pub max_rel_energy_drift: f64,
    pub max_momentum_drift: f64,
}

/// Drift of `E` and `p` over the stored snapshots.
pub fn conservation(states: &[HydroField], nl: &Nonlinearity) -> Result<ConservationReport> {
    let e: Vec<f64> = states.iter().map(|q| energy(q, nl)).collect::<Result<_>>()?;
    let p: Vec<f64> = states.iter().map(momentum).collect();
    let (e0, p0) = (e[0], p[0]);
    Ok(ConservationReport {
        energy0: e0,
        momentum0: p0,
        max_rel_energy_drift: e.iter().map(|x| ((x - e0) / e0).abs()).fold(0.0, f64::max),
        max_momentum_drift: p.iter().map(|x| (x - p0).abs()).fold(0.0, f64::max),
    })
}

/// `‖u_dt − u_{dt/2}‖ / ‖u_{dt/2} − u_{dt/4}‖` at time `t_end`; 4 for a second-order scheme.
pub fn convergence_factor(w0: &WaveField, nl: &Nonlinearity, dt: f64, t_end: f64, scheme: Scheme) -> Result<f64> {
    let runs = [dt, 0.5 * dt, 0.25 * dt]
        .par_iter()
        .map(|&h| propagate(w0, nl, h, t_end, scheme))
        .collect::<Result<Vec<_>>>()?;
    let d = |a: &WaveField, b: &WaveField| {
        a.psi
            .iter()
            .zip(&b.psi)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    Ok(d(&runs[0], &runs[1]) / d(&runs[1], &runs[2]))
}

#[derive(Clone, Debug)]
pub struct StabilityRun {
    pub trajectory: Trajectory,
    pub states: Vec<HydroField>,
    pub track: ModulationTrack,
    /// Between consecutive solitons `k, k+1` at the tracked midpoint, one series per gap.
    pub probes: Vec<Vec<ProbeSample>>,
}

/// Evolve a perturbed chain, track the modulation parameters and probe the
/// gaps between solitons with half-width `probe_width`.
pub fn stability_run(
    nl: &Nonlinearity,
    spec: &ChainSpec,
    noise: &NoiseSpec,
    cfg: &EvolveConfig,
    probe_width: f64,
) -> Result<StabilityRun> {
    let w0 = perturbed_chain(nl, spec, cfg, noise)?;
    let trajectory = run_plain(&w0, nl, cfg)?;
    let track = track(&trajectory, nl, (&spec.speeds, &spec.centers))?;
    let states = hydro_states(&trajectory)?;
    let mut probes = Vec::new();
    for k in 0..spec.len().saturating_sub(1) {
        let mids = track.midpoints(k);
        let times = track.times.clone();
        let b = move |t: f64| {
            let i = times
                .iter()
                .position(|s| (s - t).abs() < 1e-9)
                .unwrap_or(0);
            mids[i]
        };
        probes.push(between_probe(&trajectory, Some(&track), b, probe_width)?);
    }
    Ok(StabilityRun {
        trajectory,
        states,
        track,
        probes,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub tau: f64,
    pub t_min: f64,
    pub r_primes: Vec<f64>,
    pub dips: Vec<f64>,
    /// `log dip` against `R'`; `None` when fewer than two dips are positive.
    pub fit: Option<LinearFit>,
}

/// Dips of `p_{A(t) + R'}` with `A` the tracked midpoint of gap `gap`.
pub fn monotonicity(run: &StabilityRun, gap: usize, r_primes: &[f64], tau: f64, t_min: f64) -> Result<MonotonicityReport> {
    if gap + 1 >= run.track.solitons() {
        return Err(Error::InvalidParameter(format!(
            "gap {gap} needs at least {} solitons",
            gap + 2
        )));
    }
    let frame = run.track.midpoints(gap);
    let dips = r_primes
        .iter()
        .map(|&r| {
            let p = moving_cutoff_momentum(&run.states, &frame, r, tau)?;
            Ok(max_dip(&run.track.times, &p, t_min))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = exponential_fit(r_primes, &dips).filter(|f| f.n >= 2);
    Ok(MonotonicityReport {
        tau,
        t_min,
        r_primes: r_primes.to_vec(),
        dips,
        fit,
    })
}
