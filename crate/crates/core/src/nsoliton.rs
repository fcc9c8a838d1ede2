//! Backward construction of chains that decouple as `t → +∞`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{build_original_chain, hydro_distance_with, ChainProfiles, ChainSpec};
use crate::diagnostics::{lyapunov_g, Partition};
use crate::error::{Error, Result};
use crate::evolve::{run, run_plain, Direction, EvolveConfig, Trajectory};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{exponential_fit, LinearFit};
use crate::transform::{hydro_norm, to_hydro, WaveField};

/// Steepness of the partition used for `G` along backward runs.
pub const PARTITION_TAU: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackwardSchedule {
    pub speeds: Vec<f64>,
    pub offsets: Vec<f64>,
    /// Final times `s_1 < s_2 < …`.
    pub times: Vec<f64>,
    pub s0: f64,
    /// Fit only where `d_n ≤ alpha0`.
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    /// Fit only where `d_n ≥ floor_factor · d_n(s_n)`.
    #[serde(default = "default_floor_factor")]
    pub floor_factor: f64,
}

fn default_alpha0() -> f64 {
    0.1
}

fn default_floor_factor() -> f64 {
    100.0
}

impl BackwardSchedule {
    pub fn new(speeds: Vec<f64>, offsets: Vec<f64>, times: Vec<f64>, s0: f64) -> Result<Self> {
        let s = Self {
            speeds,
            offsets,
            times,
            s0,
            alpha0: default_alpha0(),
            floor_factor: default_floor_factor(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.speeds.len() != self.offsets.len() || self.speeds.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} speeds and {} offsets",
                self.speeds.len(),
                self.offsets.len()
            )));
        }
        if self.speeds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("speeds must increase strictly".into()));
        }
        if self.offsets.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("offsets must be non-decreasing".into()));
        }
        if self.times.is_empty() || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("schedule times must increase strictly".into()));
        }
        if !(self.s0 < self.times[0]) {
            return Err(Error::InvalidParameter(format!(
                "checkpoint s0 = {} not before s_1 = {}",
                self.s0, self.times[0]
            )));
        }
        if !(self.alpha0 > 0.0 && self.floor_factor >= 1.0) {
            return Err(Error::InvalidParameter("alpha0 > 0 and floor_factor >= 1 required".into()));
        }
        Ok(())
    }

    /// `σ₀ = min (c_{k+1} − c_k)`.
    pub fn sigma0(&self) -> f64 {
        self.speeds
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Centers `a* + c* t`.
    pub fn centers_at(&self, t: f64) -> Vec<f64> {
        self.offsets
            .iter()
            .zip(&self.speeds)
            .map(|(a, c)| a + c * t)
            .collect()
    }

    pub fn chain_at(&self, t: f64) -> Result<ChainSpec> {
        ChainSpec::new(self.speeds.clone(), self.centers_at(t), 0.0)
    }
}

#[derive(Clone, Debug)]
pub struct BackwardRun {
    pub s_n: f64,
    pub trajectory: Trajectory,
    pub times: Vec<f64>,
    /// `d_n(t)`, distance to the chain `a* + c* t`.
    pub distances: Vec<f64>,
    /// `G` with the partition at the chain midpoints.
    pub lyapunov: Vec<f64>,
}

impl BackwardRun {
    /// Log-linear fit of `d_n` over the times with
    /// `floor_factor · d_n(s_n) ≤ d_n ≤ alpha0`.
    pub fn decay_fit(&self, sched: &BackwardSchedule) -> Option<DecayFit> {
        let end = self
            .times
            .iter()
            .zip(&self.distances)
            .find(|(t, _)| (**t - self.s_n).abs() < 1e-9)
            .map_or(0.0, |(_, d)| *d);
        let floor = sched.floor_factor * end;
        let (t, d): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.distances)
            .filter(|(_, &d)| d <= sched.alpha0 && d >= floor && d > 0.0)
            .map(|(&t, &d)| (t, d))
            .unzip();
        let fit = exponential_fit(&t, &d)?;
        Some(DecayFit {
            k0: fit.intercept.exp(),
            tau0: -fit.slope,
            fit,
            t_min: t.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn at_s0(&self) -> Option<&WaveField> {
        self.trajectory.last().map(|s| &s.field)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub k0: f64,
    pub tau0: f64,
    pub fit: LinearFit,
    pub t_min: f64,
    pub t_max: f64,
}

fn stride_for(dt: f64) -> usize {
    ((1.0 / dt).round() as usize).max(1)
}

/// Integrate the chain at `s_n` back to `s0`, recording `d_n(t)` and `G`
/// at unit time intervals. Only `dt`, `l_box`, `n`, `edge_margin` and
/// `scheme` are taken from `cfg`.
pub fn backward_run(sched: &BackwardSchedule, s_n: f64, nl: &Nonlinearity, cfg: &EvolveConfig) -> Result<BackwardRun> {
    sched.validate()?;
    let cfg = EvolveConfig {
        t_start: s_n,
        t_end: sched.s0,
        direction: Direction::Backward,
        snapshot_stride: stride_for(cfg.dt),
        ..cfg.clone()
    };
    cfg.validate()?;
    let grid = cfg.grid()?;
    let half = 0.5 * grid.length();
    for t in [sched.s0, s_n] {
        for a in sched.centers_at(t) {
            if a.abs() + cfg.edge_margin > half {
                return Err(Error::BoundaryBreach {
                    t,
                    center: a,
                    margin: cfg.edge_margin,
                    required_l_box: 2.0 * (a.abs() + cfg.edge_margin) + 1.0,
                });
            }
        }
    }
    let profiles = ChainProfiles::solve(nl, &sched.speeds)?;
    let w0 = build_original_chain(nl, &sched.chain_at(s_n)?, &grid)?;
    let mut times = Vec::new();
    let mut distances = Vec::new();
    let mut lyapunov = Vec::new();
    let trajectory = run(&w0, nl, &cfg, |snap| {
        let (q, _) = to_hydro(&snap.field)?;
        let centers = sched.centers_at(snap.t);
        let d = hydro_distance_with(&q, &profiles, &centers)?;
        let part = Partition::from_centers(&centers, PARTITION_TAU)?;
        times.push(snap.t);
        distances.push(d);
        lyapunov.push(lyapunov_g(&q, nl, &sched.speeds, &part)?);
        Ok(())
    })?;
    Ok(BackwardRun {
        s_n,
        trajectory,
        times,
        distances,
        lyapunov,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub s_n: f64,
    pub fit: Option<DecayFit>,
    pub distance_at_s0: f64,
    /// `G(s_n) − min_t G(t)` over the run.
    pub lyapunov_gain: f64,
    /// Recorded `t`, `d_n(t)` and `G(t)`, in integration order.
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub lyapunov: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairDistance {
    pub s_m: f64,
    pub s_n: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CauchyReport {
    pub runs: Vec<RunSummary>,
    pub pairwise: Vec<PairDistance>,
    /// Consecutive pairwise distances strictly decrease.
    pub monotone: bool,
    /// Exponential rate of the pairwise distances against `s_n`.
    pub rate: Option<f64>,
    /// Field at `s0` of the last schedule time: the limit candidate.
    #[serde(skip)]
    pub candidate: Option<WaveField>,
}

/// Run every schedule time in parallel and compare the states at `s0`.
pub fn cauchy_check(sched: &BackwardSchedule, nl: &Nonlinearity, cfg: &EvolveConfig) -> Result<CauchyReport> {
    sched.validate()?;
    if sched.times.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "cauchy check needs at least 3 schedule times, got {}",
            sched.times.len()
        )));
    }
    let runs = sched
        .times
        .par_iter()
        .map(|&s| backward_run(sched, s, nl, cfg))
        .collect::<Result<Vec<_>>>()?;
    let states = runs
        .iter()
        .map(|r| {
            let w = r.at_s0().ok_or_else(|| Error::InvalidParameter("empty run".into()))?;
            Ok(to_hydro(w)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = Vec::new();
    for i in 1..runs.len() {
        pairwise.push(PairDistance {
            s_m: runs[i - 1].s_n,
            s_n: runs[i].s_n,
            distance: hydro_norm(&states[i].sub(&states[i - 1])?),
        });
    }
    let monotone = pairwise.windows(2).all(|w| w[1].distance < w[0].distance);
    let rate = exponential_fit(
        &pairwise.iter().map(|p| p.s_m).collect::<Vec<_>>(),
        &pairwise.iter().map(|p| p.distance).collect::<Vec<_>>(),
    )
    .map(|f| -f.slope);
    let summaries = runs
        .iter()
        .map(|r| RunSummary {
            s_n: r.s_n,
            fit: r.decay_fit(sched),
            distance_at_s0: *r.distances.last().unwrap_or(&f64::NAN),
            lyapunov_gain: r.lyapunov.first().copied().unwrap_or(f64::NAN)
                - r.lyapunov.iter().copied().fold(f64::INFINITY, f64::min),
            times: r.times.clone(),
            distances: r.distances.clone(),
            lyapunov: r.lyapunov.clone(),
        })
        .collect();
    Ok(CauchyReport {
        runs: summaries,
        pairwise,
        monotone,
        rate,
        candidate: runs.last().and_then(|r| r.at_s0().cloned()),
    })
}

/// Forward re-run of a state at `s0` to `t_end`: returns `(d(s0), d(t_end))`
/// against the chain `a* + c* t`.
pub fn forward_rerun(
    candidate: &WaveField,
    sched: &BackwardSchedule,
    t_end: f64,
    nl: &Nonlinearity,
    cfg: &EvolveConfig,
) -> Result<(f64, f64)> {
    let cfg = EvolveConfig {
        t_start: sched.s0,
        t_end,
        direction: Direction::Forward,
        snapshot_stride: usize::MAX / 2,
        ..cfg.clone()
    };
    let profiles = ChainProfiles::solve(nl, &sched.speeds)?;
    let traj = run_plain(candidate, nl, &cfg)?;
    let d = |w: &WaveField, t: f64| -> Result<f64> {
        let (q, _) = to_hydro(w)?;
        hydro_distance_with(&q, &profiles, &sched.centers_at(t))
    };
    let first = &traj.snapshots[0];
    let last = traj.last().ok_or_else(|| Error::InvalidParameter("empty run".into()))?;
    Ok((d(&first.field, first.t)?, d(&last.field, last.t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Scheme;

    fn cfg() -> EvolveConfig {
        EvolveConfig {
            dt: 2e-3,
            l_box: 120.0,
            n: 1024,
            edge_margin: 10.0,
            scheme: Scheme::Yoshida4,
            ..Default::default()
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(BackwardSchedule::new(vec![0.6, 1.0], vec![0.0, 0.0], vec![40.0, 60.0], 10.0).is_ok());
        assert!(BackwardSchedule::new(vec![1.0, 0.6], vec![0.0, 0.0], vec![40.0], 10.0).is_err());
        assert!(BackwardSchedule::new(vec![0.6], vec![0.0], vec![40.0, 30.0], 10.0).is_err());
        assert!(BackwardSchedule::new(vec![0.6], vec![0.0], vec![40.0], 50.0).is_err());
        let s = BackwardSchedule::new(vec![0.5, 0.6, 1.0], vec![-3.0, 0.0, 0.0], vec![40.0], 10.0).unwrap();
        assert!((s.sigma0() - 0.1).abs() < 1e-15);
        assert_eq!(s.centers_at(10.0), vec![2.0, 6.0, 10.0]);
    }

    #[test]
    fn single_soliton_backward_is_exact() {
        let nl = Nonlinearity::gross_pitaevskii();
        let sched = BackwardSchedule::new(vec![0.8], vec![-20.0], vec![20.0, 30.0, 40.0], 10.0).unwrap();
        let r = backward_run(&sched, 30.0, &nl, &cfg()).unwrap();
        assert_eq!(r.times.len(), 21);
        assert!(r.distances.iter().all(|&d| d < 1e-6), "{:?}", r.distances);
        let rep = cauchy_check(&sched, &nl, &cfg()).unwrap();
        assert!(rep.pairwise.iter().all(|p| p.distance < 1e-6));
    }

    #[test]
    fn box_too_small_reports_hint() {
        let nl = Nonlinearity::gross_pitaevskii();
        let sched = BackwardSchedule::new(vec![0.8], vec![0.0], vec![100.0], 10.0).unwrap();
        match backward_run(&sched, 100.0, &nl, &cfg()) {
            Err(Error::BoundaryBreach { required_l_box, .. }) => assert!(required_l_box > 180.0),
            other => panic!("{other:?}"),
        }
    }
}
