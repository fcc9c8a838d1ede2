//! Split-step Fourier integration on a periodic box.
//!
//! The stored samples are `psi = Ψ e^{iκx}`, so the linear part
//! `i∂tΨ + Ψ'' = 0` becomes the Fourier multiplier `exp(−i dt (ξ − κ)²)`
//! on `psi`. The nonlinear part `i∂tΨ + Ψ f(|Ψ|²) = 0` keeps `|Ψ|` fixed
//! and is the exact rotation `exp(i dt f(|psi|²))`.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{fft_plan, Grid};
use crate::nonlinearity::Nonlinearity;
use crate::transform::WaveField;

/// Deficit above which a sample counts as part of a soliton for the edge check.
pub const EDGE_ETA_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second-order Strang splitting.
    #[default]
    Strang,
    /// Fourth-order triple-jump composition of Strang steps.
    Yoshida4,
}

impl Scheme {
    /// Largest linear sub-step as a multiple of `dt`.
    pub fn max_weight(self) -> f64 {
        self.weights().0.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Linear sub-step weights and the nonlinear weights around them.
    fn weights(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Scheme::Strang => (vec![1.0], vec![0.5, 0.5]),
            Scheme::Yoshida4 => {
                let cbrt2 = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - cbrt2);
                let w0 = -cbrt2 / (2.0 - cbrt2);
                (
                    vec![w1, w0, w1],
                    vec![0.5 * w1, 0.5 * (w1 + w0), 0.5 * (w0 + w1), 0.5 * w1],
                )
            }
        }
    }
}

/// Missing fields take their defaults when deserialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub l_box: f64,
    pub n: usize,
    pub edge_margin: f64,
    /// Steps between stored snapshots.
    pub snapshot_stride: usize,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_start: 0.0,
            t_end: 10.0,
            l_box: 400.0,
            n: 4096,
            edge_margin: 20.0,
            snapshot_stride: 1000,
            direction: Direction::Forward,
            scheme: Scheme::Strang,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !self.n.is_power_of_two() || self.n < 8 {
            return Err(Error::InvalidParameter(format!("n = {} is not a power of two", self.n)));
        }
        if !(self.l_box > 0.0) {
            return Err(Error::InvalidParameter(format!("l_box = {}", self.l_box)));
        }
        if !(self.edge_margin >= 0.0 && 2.0 * self.edge_margin < self.l_box) {
            return Err(Error::InvalidParameter(format!(
                "edge_margin = {} incompatible with l_box = {}",
                self.edge_margin, self.l_box
            )));
        }
        // split-step on a nonzero background resonates once a linear
        // sub-step rotates the top mode by π
        let k_max = std::f64::consts::PI * self.n as f64 / self.l_box;
        let w_max = self.scheme.max_weight();
        if w_max * self.dt * k_max * k_max >= std::f64::consts::PI {
            return Err(Error::InvalidParameter(format!(
                "dt·ξ_max² = {:.3} reaches the split-step resonance π; lower n or dt",
                w_max * self.dt * k_max * k_max
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be >= 1".into()));
        }
        let span = self.t_end - self.t_start;
        let ok = match self.direction {
            Direction::Forward => span >= 0.0,
            Direction::Backward => span <= 0.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "t_start = {} and t_end = {} disagree with direction {:?}",
                self.t_start, self.t_end, self.direction
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::periodic_box(self.l_box, self.n)
    }

    pub fn signed_dt(&self) -> f64 {
        match self.direction {
            Direction::Forward => self.dt,
            Direction::Backward => -self.dt,
        }
    }

    pub fn total_steps(&self) -> usize {
        ((self.t_end - self.t_start).abs() / self.dt).round() as usize
    }
}

/// Reusable stepper for one grid, nonlinearity, time step and gauge.
pub struct Evolver {
    grid: Grid,
    nl: Nonlinearity,
    dt: f64,
    kappa: f64,
    linear_weights: Vec<f64>,
    nonlinear_weights: Vec<f64>,
    multipliers: Vec<Vec<Complex64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Evolver {
    pub fn new(grid: Grid, nl: Nonlinearity, dt: f64, kappa: f64, scheme: Scheme) -> Result<Self> {
        if !grid.periodic {
            return Err(Error::Shape("time stepping needs a periodic grid".into()));
        }
        let (linear_weights, nonlinear_weights) = scheme.weights();
        let ks = grid.wavenumbers();
        let scale = 1.0 / grid.n as f64;
        let multipliers = linear_weights
            .iter()
            .map(|w| {
                ks.iter()
                    .map(|k| {
                        let s = k - kappa;
                        Complex64::from_polar(scale, -w * dt * s * s)
                    })
                    .collect()
            })
            .collect();
        let forward = fft_plan(grid.n, FftDirection::Forward);
        let inverse = fft_plan(grid.n, FftDirection::Inverse);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            grid,
            nl,
            dt,
            kappa,
            linear_weights,
            nonlinear_weights,
            multipliers,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    fn nonlinear(&self, psi: &mut [Complex64], tau: f64) {
        let nl = self.nl;
        for z in psi.iter_mut() {
            let (s, c) = (tau * nl.f(z.norm_sqr())).sin_cos();
            *z *= Complex64::new(c, s);
        }
    }

    fn linear(&mut self, psi: &mut [Complex64], i: usize) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (z, m) in psi.iter_mut().zip(&self.multipliers[i]) {
            *z *= m;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    /// Advance `steps` steps, fusing adjacent nonlinear rotations.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: usize) {
        if steps == 0 {
            return;
        }
        let a = self.nonlinear_weights.clone();
        let nb = self.linear_weights.len();
        let mut pending = a[0];
        for step in 0..steps {
            for i in 0..nb {
                self.nonlinear(psi, pending * self.dt);
                self.linear(psi, i);
                pending = a[i + 1];
            }
            if step + 1 < steps {
                pending += a[0];
            }
        }
        self.nonlinear(psi, pending * self.dt);
    }
}

/// One Strang step of size `dt` (negative for backward).
pub fn step(w: &WaveField, nl: &Nonlinearity, dt: f64) -> Result<WaveField> {
    let mut ev = Evolver::new(w.grid, *nl, dt, w.kappa, Scheme::Strang)?;
    let mut psi = w.psi.clone();
    ev.advance(&mut psi, 1);
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::BlowUp { t: dt });
    }
    Ok(WaveField {
        grid: w.grid,
        psi,
        kappa: w.kappa,
    })
}

/// Set `κ` so that the stored samples are periodic.
pub fn apply_gauge(w: &WaveField) -> WaveField {
    w.apply_gauge()
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub field: WaveField,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshot whose time is closest to `t`.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().min_by(|a, b| {
            (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap()
        })
    }
}

/// Abort if any soliton sample (`η > 0.05`) lies within `margin` of an end.
pub fn check_edges(w: &WaveField, margin: f64, t: f64) -> Result<()> {
    let g = w.grid;
    let (lo, hi) = (g.x0, g.x0 + g.length());
    for (j, z) in w.psi.iter().enumerate() {
        let x = g.x(j);
        if (x - lo < margin || hi - x < margin) && 1.0 - z.norm_sqr() > EDGE_ETA_THRESHOLD {
            return Err(Error::BoundaryBreach {
                t,
                center: x,
                margin,
                required_l_box: 2.0 * (x.abs() + margin) + 1.0,
            });
        }
    }
    Ok(())
}

fn check_finite(psi: &[Complex64], t: f64) -> Result<()> {
    if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() > 1e6) {
        return Err(Error::BlowUp { t });
    }
    Ok(())
}

/// Fields that already carry a gauge are trusted; re-gauging them would
/// change `κ` and break the periodicity of the stored samples.
fn gauged(w0: &WaveField) -> WaveField {
    if w0.kappa == 0.0 && w0.boundary_jump() > 1e-8 {
        w0.apply_gauge()
    } else {
        w0.clone()
    }
}

/// Integrate from `cfg.t_start` to `cfg.t_end`, storing a snapshot every
/// `snapshot_stride` steps plus the initial and final states. The observer
/// sees every stored snapshot and may abort the run.
pub fn run<F>(w0: &WaveField, nl: &Nonlinearity, cfg: &EvolveConfig, mut observer: F) -> Result<Trajectory>
where
    F: FnMut(&Snapshot) -> Result<()>,
{
    cfg.validate()?;
    let grid = cfg.grid()?;
    w0.grid.check_same(&grid)?;
    let w = gauged(w0);

    let dt = cfg.signed_dt();
    let mut ev = Evolver::new(grid, *nl, dt, w.kappa, cfg.scheme)?;
    let total = cfg.total_steps();
    let mut traj = Trajectory::default();
    let mut psi = w.psi.clone();
    let mut done = 0usize;
    let mut t = cfg.t_start;

    check_edges(&w, cfg.edge_margin, t)?;
    let snap = Snapshot { t, field: w };
    observer(&snap)?;
    traj.snapshots.push(snap);

    while done < total {
        let chunk = cfg.snapshot_stride.min(total - done);
        ev.advance(&mut psi, chunk);
        done += chunk;
        t = cfg.t_start + dt * done as f64;
        check_finite(&psi, t)?;
        let field = WaveField {
            grid,
            psi: psi.clone(),
            kappa: ev.kappa(),
        };
        check_edges(&field, cfg.edge_margin, t)?;
        let snap = Snapshot { t, field };
        observer(&snap).map_err(|e| e.at_time(t))?;
        traj.snapshots.push(snap);
    }
    Ok(traj)
}

/// [`run`] without an observer.
pub fn run_plain(w0: &WaveField, nl: &Nonlinearity, cfg: &EvolveConfig) -> Result<Trajectory> {
    run(w0, nl, cfg, |_| Ok(()))
}

/// Advance a field by `duration` (any sign) without storing snapshots.
pub fn propagate(w0: &WaveField, nl: &Nonlinearity, dt: f64, duration: f64, scheme: Scheme) -> Result<WaveField> {
    let w = gauged(w0);
    let steps = (duration.abs() / dt).round() as usize;
    let sdt = if duration < 0.0 { -dt } else { dt };
    let mut ev = Evolver::new(w.grid, *nl, sdt, w.kappa, scheme)?;
    let mut psi = w.psi.clone();
    ev.advance(&mut psi, steps);
    check_finite(&psi, duration)?;
    Ok(WaveField {
        grid: w.grid,
        psi,
        kappa: w.kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_original_chain, ChainSpec};

    fn small_cfg(t_end: f64) -> EvolveConfig {
        EvolveConfig {
            dt: 1e-3,
            t_start: 0.0,
            t_end,
            l_box: 80.0,
            n: 1024,
            edge_margin: 10.0,
            snapshot_stride: 500,
            direction: Direction::Forward,
            scheme: Scheme::Strang,
        }
    }

    #[test]
    fn constant_states_are_fixed_points() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::periodic_box(40.0, 256).unwrap();
        for theta in [0.0, 1.1] {
            let w = WaveField::constant(g, Complex64::from_polar(1.0, theta));
            let s = step(&w, &gp, 0.01).unwrap();
            for z in &s.psi {
                assert!((z - Complex64::from_polar(1.0, theta)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_duration_run_returns_initial_state() {
        let gp = Nonlinearity::gross_pitaevskii();
        let cfg = small_cfg(0.0);
        let w = WaveField::constant(cfg.grid().unwrap(), Complex64::new(1.0, 0.0));
        let tr = run_plain(&w, &gp, &cfg).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.snapshots[0].field, w);
    }

    #[test]
    fn strang_is_time_reversible() {
        let gp = Nonlinearity::gross_pitaevskii();
        let mut cfg = small_cfg(5.0);
        let g = cfg.grid().unwrap();
        let spec = ChainSpec::new(vec![1.0], vec![-5.0], 0.3).unwrap();
        let w0 = build_original_chain(&gp, &spec, &g).unwrap();
        let fwd = run_plain(&w0, &gp, &cfg).unwrap();
        cfg.direction = Direction::Backward;
        cfg.t_start = 5.0;
        cfg.t_end = 0.0;
        let back = run_plain(&fwd.last().unwrap().field, &gp, &cfg).unwrap();
        let end = &back.last().unwrap().field;
        let err = g.integrate_with(|j| (end.psi[j] - w0.psi[j]).norm_sqr()).sqrt();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn fused_steps_equal_repeated_single_steps() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::periodic_box(80.0, 512).unwrap();
        let spec = ChainSpec::new(vec![0.8], vec![0.0], 0.0).unwrap();
        let w0 = build_original_chain(&gp, &spec, &g).unwrap();
        let mut w = w0.clone();
        for _ in 0..10 {
            w = step(&w, &gp, 0.01).unwrap();
        }
        let fused = propagate(&w0, &gp, 0.01, 0.1, Scheme::Strang).unwrap();
        for j in 0..g.n {
            assert!((fused.psi[j] - w.psi[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_breach_is_reported() {
        let gp = Nonlinearity::gross_pitaevskii();
        let cfg = small_cfg(20.0);
        let g = cfg.grid().unwrap();
        let spec = ChainSpec::new(vec![1.0], vec![15.0], 0.0).unwrap();
        let w0 = build_original_chain(&gp, &spec, &g).unwrap();
        let err = run_plain(&w0, &gp, &cfg).unwrap_err();
        assert!(
            matches!(&err, Error::BoundaryBreach { .. })
                || matches!(&err, Error::AtTime { source, .. } if matches!(**source, Error::BoundaryBreach { .. })),
            "{err}"
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(1.0);
        cfg.n = 1000;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg(1.0);
        cfg.direction = Direction::Backward;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg(1.0);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
    }
}
