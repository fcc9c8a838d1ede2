//! Modulated chain plus residual, fixed by orthogonality conditions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::chain::{sample_shifted, separation, ShiftedWave};
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::grid::Grid;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{parabolic_peak, solve_dense};
use crate::profile::{solve_profile_default, speed_from_amplitude, TravelingWaveProfile};
use crate::transform::{hydro_norm, to_hydro, HydroField};

/// Threshold on `η` for a local maximum to count as a soliton.
pub const DETECTION_THRESHOLD: f64 = 0.05;
pub const MAX_ITERATIONS: usize = 50;
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
const FD_STEP_C: f64 = 1e-6;
const FD_STEP_B: f64 = 1e-5;
const CACHE_LIMIT: usize = 256;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulationState {
    pub speeds: Vec<f64>,
    pub centers: Vec<f64>,
    pub eps: HydroField,
    pub residual_norm: f64,
    /// Largest absolute orthogonality residual.
    pub orthogonality: f64,
    pub iterations: usize,
}

/// Parameters of the local maxima of `η` above the detection threshold.
pub fn detect_peaks(q: &HydroField) -> Vec<(f64, f64)> {
    let g = &q.grid;
    let n = g.n;
    let mut out = Vec::new();
    for i in 1..n - 1 {
        let (a, b, c) = (q.eta[i - 1], q.eta[i], q.eta[i + 1]);
        if b > DETECTION_THRESHOLD && b > a && b >= c {
            let (off, val) = parabolic_peak(a, b, c);
            out.push((g.x(i) + off * g.h, val));
        }
    }
    out
}

/// Centers at the maxima of `η`, speeds from their amplitudes.
pub fn initial_guess(q: &HydroField, nl: &Nonlinearity, expected: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let peaks = detect_peaks(q);
    if peaks.len() != expected || expected == 0 {
        return Err(Error::Detection {
            expected,
            found: peaks.len(),
        });
    }
    let mut speeds = Vec::with_capacity(expected);
    let mut centers = Vec::with_capacity(expected);
    for (x, a) in peaks {
        speeds.push(speed_from_amplitude(nl, a)?);
        centers.push(x);
    }
    Ok((speeds, centers))
}

/// Profiles keyed by the bit pattern of the speed.
pub struct ProfileCache {
    nl: Nonlinearity,
    map: HashMap<u64, TravelingWaveProfile>,
}

impl ProfileCache {
    pub fn new(nl: Nonlinearity) -> Self {
        Self {
            nl,
            map: HashMap::new(),
        }
    }

    pub fn nl(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn get(&mut self, c: f64) -> Result<&TravelingWaveProfile> {
        let key = c.to_bits();
        if !self.map.contains_key(&key) {
            if self.map.len() >= CACHE_LIMIT {
                self.map.clear();
            }
            let p = solve_profile_default(&self.nl, c)?;
            self.map.insert(key, p);
        }
        Ok(&self.map[&key])
    }
}

struct Evaluation {
    eps: HydroField,
    residual: Vec<f64>,
}

fn shifted(cache: &mut ProfileCache, grid: &Grid, c: f64, b: f64) -> Result<ShiftedWave> {
    let p = cache.get(c)?;
    Ok(sample_shifted(p, grid, b))
}

/// `ε = q − Σ Q_k` and the `2N` conditions
/// `⟨ε, ∂xQ_k⟩`, `½∫(v_k ε_η + η_k ε_v)`.
fn evaluate(q: &HydroField, cache: &mut ProfileCache, speeds: &[f64], centers: &[f64]) -> Result<Evaluation> {
    let g = q.grid;
    let waves = speeds
        .iter()
        .zip(centers)
        .map(|(&c, &b)| shifted(cache, &g, c, b))
        .collect::<Result<Vec<_>>>()?;
    let mut eps = q.clone();
    for w in &waves {
        for j in 0..g.n {
            eps.eta[j] -= w.eta[j];
            eps.v[j] -= w.v[j];
        }
    }
    let n = waves.len();
    let mut residual = vec![0.0; 2 * n];
    for (k, w) in waves.iter().enumerate() {
        residual[k] = g.integrate_with(|j| eps.eta[j] * w.eta_x[j] + eps.v[j] * w.v_x[j]);
        residual[n + k] = 0.5 * g.integrate_with(|j| w.v[j] * eps.eta[j] + w.eta[j] * eps.v[j]);
    }
    Ok(Evaluation { eps, residual })
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_gap(centers: &[f64]) -> Result<()> {
    let gap = separation(centers);
    if centers.len() > 1 && !(gap >= 1.0) {
        return Err(Error::Separation { gap });
    }
    Ok(())
}

/// Newton solve for `(c_k, b_k)` starting from `guess = (speeds, centers)`.
pub fn decompose(q: &HydroField, nl: &Nonlinearity, guess: (&[f64], &[f64])) -> Result<ModulationState> {
    let mut cache = ProfileCache::new(*nl);
    decompose_cached(q, &mut cache, guess)
}

pub fn decompose_cached(q: &HydroField, cache: &mut ProfileCache, guess: (&[f64], &[f64])) -> Result<ModulationState> {
    let (s0, b0) = guess;
    if s0.len() != b0.len() || s0.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "guess with {} speeds and {} centers",
            s0.len(),
            b0.len()
        )));
    }
    let n = s0.len();
    let mut speeds = s0.to_vec();
    let mut centers = b0.to_vec();
    check_gap(&centers)?;
    let cs = cache.nl().cs();
    let mut cur = evaluate(q, cache, &speeds, &centers)?;
    let mut res = max_abs(&cur.residual);
    let mut iterations = 0;
    while res >= ORTHOGONALITY_TOL {
        if iterations == MAX_ITERATIONS {
            return Err(Error::ModulationFailure {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        // columns: c_1..c_N then b_1..b_N
        let m = 2 * n;
        let mut jac = vec![0.0; m * m];
        for col in 0..m {
            let (mut sp, mut sm) = (speeds.clone(), speeds.clone());
            let (mut bp, mut bm) = (centers.clone(), centers.clone());
            let h = if col < n {
                sp[col] += FD_STEP_C;
                sm[col] -= FD_STEP_C;
                FD_STEP_C
            } else {
                bp[col - n] += FD_STEP_B;
                bm[col - n] -= FD_STEP_B;
                FD_STEP_B
            };
            let rp = evaluate(q, cache, &sp, &bp)?.residual;
            let rm = evaluate(q, cache, &sm, &bm)?.residual;
            for row in 0..m {
                jac[row * m + col] = (rp[row] - rm[row]) / (2.0 * h);
            }
        }
        let rhs: Vec<f64> = cur.residual.iter().map(|r| -r).collect();
        let delta = solve_dense(jac, rhs).ok_or(Error::ModulationFailure {
            iterations,
            residual: res,
        })?;
        let mut lambda = 1.0;
        let accepted = loop {
            let ts: Vec<f64> = (0..n).map(|k| speeds[k] + lambda * delta[k]).collect();
            let tb: Vec<f64> = (0..n).map(|k| centers[k] + lambda * delta[n + k]).collect();
            let admissible = ts.iter().all(|&c| c > 0.0 && c < cs);
            if admissible {
                check_gap(&tb)?;
                let trial = evaluate(q, cache, &ts, &tb)?;
                let r = max_abs(&trial.residual);
                if r < res || lambda < 1e-3 {
                    break Some((ts, tb, trial, r));
                }
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                break None;
            }
        };
        let Some((ts, tb, trial, r)) = accepted else {
            return Err(Error::ModulationFailure {
                iterations,
                residual: res,
            });
        };
        speeds = ts;
        centers = tb;
        cur = trial;
        res = r;
    }
    let residual_norm = hydro_norm(&cur.eps);
    Ok(ModulationState {
        speeds,
        centers,
        eps: cur.eps,
        residual_norm,
        orthogonality: res,
        iterations,
    })
}

/// Orthogonality residuals of `ε` against the chain `(speeds, centers)`,
/// recomputed from scratch.
pub fn orthogonality_residuals(eps: &HydroField, nl: &Nonlinearity, speeds: &[f64], centers: &[f64]) -> Result<Vec<f64>> {
    let g = eps.grid;
    let n = speeds.len();
    let mut out = vec![0.0; 2 * n];
    for k in 0..n {
        let p = solve_profile_default(nl, speeds[k])?;
        let w = sample_shifted(&p, &g, centers[k]);
        out[k] = g.integrate_with(|j| eps.eta[j] * w.eta_x[j] + eps.v[j] * w.v_x[j]);
        out[n + k] = 0.5 * g.integrate_with(|j| w.v[j] * eps.eta[j] + w.eta[j] * eps.v[j]);
    }
    Ok(out)
}

/// Decomposition along a trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulationTrack {
    pub times: Vec<f64>,
    pub speeds: Vec<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub eps_norm: Vec<f64>,
    /// Finite-difference `b'_k(t)`.
    pub center_velocity: Vec<Vec<f64>>,
}

impl ModulationTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn solitons(&self) -> usize {
        self.speeds.first().map_or(0, |s| s.len())
    }

    pub fn sup_eps_norm(&self, t_max: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.eps_norm)
            .filter(|(t, _)| **t <= t_max + 1e-9)
            .fold(0.0, |m, (_, e)| m.max(*e))
    }

    /// Time average of `|b'_k − c_k|` per soliton over `[t0, t1]`.
    pub fn mean_speed_mismatch(&self, t0: f64, t1: f64) -> Vec<f64> {
        let n = self.solitons();
        let mut acc = vec![0.0; n];
        let mut count = 0usize;
        for (i, &t) in self.times.iter().enumerate() {
            if t < t0 - 1e-9 || t > t1 + 1e-9 {
                continue;
            }
            count += 1;
            for k in 0..n {
                acc[k] += (self.center_velocity[i][k] - self.speeds[i][k]).abs();
            }
        }
        acc.iter().map(|a| a / count.max(1) as f64).collect()
    }

    /// Center of the gap between solitons `k` and `k + 1` (0-based) at each time.
    pub fn midpoints(&self, k: usize) -> Vec<f64> {
        self.centers.iter().map(|b| 0.5 * (b[k] + b[k + 1])).collect()
    }
}

/// Finite differences of `y` against `t`: central inside, one-sided at the ends.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (y[b] - y[a]) / (t[b] - t[a])
        })
        .collect()
}

/// Decompose every snapshot, warm-started from the previous one.
pub fn track(traj: &Trajectory, nl: &Nonlinearity, guess: (&[f64], &[f64])) -> Result<ModulationTrack> {
    let mut cache = ProfileCache::new(*nl);
    let mut speeds = guess.0.to_vec();
    let mut centers = guess.1.to_vec();
    let mut out = ModulationTrack {
        times: Vec::new(),
        speeds: Vec::new(),
        centers: Vec::new(),
        eps_norm: Vec::new(),
        center_velocity: Vec::new(),
    };
    let mut last_t: Option<f64> = None;
    for snap in &traj.snapshots {
        let t = snap.t;
        // advance the guess along the previous speeds
        if let Some(t0) = last_t {
            for (b, c) in centers.iter_mut().zip(&speeds) {
                *b += c * (t - t0);
            }
        }
        let (q, _) = to_hydro(&snap.field).map_err(|e| e.at_time(t))?;
        let st = decompose_cached(&q, &mut cache, (&speeds, &centers)).map_err(|e| e.at_time(t))?;
        speeds = st.speeds.clone();
        centers = st.centers.clone();
        out.times.push(t);
        out.speeds.push(st.speeds);
        out.centers.push(st.centers);
        out.eps_norm.push(st.residual_norm);
        last_t = Some(t);
    }
    let n = speeds.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let b: Vec<f64> = out.centers.iter().map(|c| c[k]).collect();
            time_derivative(&out.times, &b)
        })
        .collect();
    out.center_velocity = (0..out.times.len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub t: f64,
    pub center: f64,
    pub eta_norm: f64,
    pub v_norm: f64,
    /// `∫|v|` over the window: total variation of `arg Ψ` there.
    pub phase_variation: f64,
}

/// Windowed norms on `[B(t) − w, B(t) + w]`. With a track, `B(t) ± w` must
/// stay strictly between consecutive tracked centers.
pub fn between_probe<B: Fn(f64) -> f64>(
    traj: &Trajectory,
    track: Option<&ModulationTrack>,
    b: B,
    w: f64,
) -> Result<Vec<ProbeSample>> {
    let mut out = Vec::with_capacity(traj.len());
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let t = snap.t;
        let center = b(t);
        if let Some(tr) = track {
            let cs = tr.centers.get(i).ok_or_else(|| Error::Probe {
                t,
                reason: "track shorter than trajectory".into(),
            })?;
            let inside = cs.windows(2).any(|p| p[0] < center - w && center + w < p[1]);
            if !inside {
                return Err(Error::Probe {
                    t,
                    reason: format!("window [{}, {}] not between tracked centers {cs:?}", center - w, center + w),
                });
            }
        }
        let (q, _) = to_hydro(&snap.field).map_err(|e| e.at_time(t))?;
        let g = &q.grid;
        let win = |j: usize| ((g.x(j) - center).abs() <= w) as u8 as f64;
        out.push(ProbeSample {
            t,
            center,
            eta_norm: g.integrate_with(|j| win(j) * q.eta[j] * q.eta[j]).sqrt(),
            v_norm: g.integrate_with(|j| win(j) * q.v[j] * q.v[j]).sqrt(),
            phase_variation: g.integrate_with(|j| win(j) * q.v[j].abs()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hydro_chain, ChainSpec};

    fn setup(centers: [f64; 2]) -> (Nonlinearity, HydroField) {
        let nl = Nonlinearity::gross_pitaevskii();
        let g = Grid::periodic_box(200.0, 4096).unwrap();
        let spec = ChainSpec::new(vec![0.6, 1.0], centers.to_vec(), 0.0).unwrap();
        (nl, build_hydro_chain(&nl, &spec, &g).unwrap())
    }

    #[test]
    fn guess_on_exact_chain() {
        let (nl, q) = setup([-20.0, 20.0]);
        let (s, b) = initial_guess(&q, &nl, 2).unwrap();
        assert!((s[0] - 0.6).abs() < 1e-3 && (s[1] - 1.0).abs() < 1e-3);
        assert!((b[0] + 20.0).abs() < q.grid.h && (b[1] - 20.0).abs() < q.grid.h);
        assert!(matches!(
            initial_guess(&q, &nl, 3),
            Err(Error::Detection { expected: 3, found: 2 })
        ));
        let z = HydroField::zeros(q.grid);
        assert!(matches!(initial_guess(&z, &nl, 1), Err(Error::Detection { found: 0, .. })));
    }

    #[test]
    fn exact_chain_is_a_fixed_point() {
        let (nl, q) = setup([-20.0, 20.0]);
        let st = decompose(&q, &nl, (&[0.6, 1.0], &[-20.0, 20.0])).unwrap();
        assert_eq!(st.iterations, 0);
        assert!(st.residual_norm < 1e-9);
    }

    #[test]
    fn perturbed_centers_are_recovered() {
        let (nl, q) = setup([-19.9, 20.1]);
        let st = decompose(&q, &nl, (&[0.6, 1.0], &[-20.0, 20.0])).unwrap();
        assert!((st.centers[0] + 19.9).abs() < 1e-8, "{:?}", st.centers);
        assert!((st.centers[1] - 20.1).abs() < 1e-8);
        assert!((st.speeds[0] - 0.6).abs() < 1e-8 && (st.speeds[1] - 1.0).abs() < 1e-8);
        assert!(st.residual_norm < 1e-8);
        let o = orthogonality_residuals(&st.eps, &nl, &st.speeds, &st.centers).unwrap();
        assert!(max_abs(&o) < 1e-9);
    }

    #[test]
    fn collision_is_reported() {
        let (nl, q) = setup([-20.0, 20.0]);
        assert!(matches!(
            decompose(&q, &nl, (&[0.6, 1.0], &[0.0, 0.5])),
            Err(Error::Separation { .. })
        ));
    }

    #[test]
    fn time_derivative_of_line() {
        let t = [0.0, 1.0, 2.5, 3.0];
        let y: Vec<f64> = t.iter().map(|s| 2.0 * s + 1.0).collect();
        for d in time_derivative(&t, &y) {
            assert!((d - 2.0).abs() < 1e-14);
        }
    }
}
