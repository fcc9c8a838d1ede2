//! Conserved and localized functionals of `(η, v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::transform::{HydroField, WaveField};

/// `χ(x) = ½(1 + tanh(τ(x − R)/2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub tau: f64,
    pub center: f64,
}

impl Cutoff {
    pub fn new(tau: f64, center: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff steepness {tau}")));
        }
        Ok(Self { tau, center })
    }

    #[inline]
    pub fn chi(&self, x: f64) -> f64 {
        0.5 * (1.0 + (0.5 * self.tau * (x - self.center)).tanh())
    }

    #[inline]
    pub fn chi_prime(&self, x: f64) -> f64 {
        let s = 1.0 / (0.5 * self.tau * (x - self.center)).cosh();
        0.25 * self.tau * s * s
    }

    #[inline]
    pub fn chi_third(&self, x: f64) -> f64 {
        let u = 0.5 * self.tau * (x - self.center);
        let th = u.tanh();
        let s = 1.0 - th * th;
        -self.tau.powi(3) / 8.0 * s * (s - 2.0 * th * th)
    }
}

/// Interfaces `X_1 < … < X_{N−1}` between consecutive solitons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub interfaces: Vec<f64>,
    pub tau: f64,
}

impl Partition {
    /// Interfaces at the midpoints `(b_k + b_{k+1})/2`.
    pub fn from_centers(centers: &[f64], tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("partition steepness {tau}")));
        }
        let interfaces: Vec<f64> = centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        if interfaces.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("centers must be increasing".into()));
        }
        Ok(Self { interfaces, tau })
    }

    /// Number of solitons `N`.
    pub fn len(&self) -> usize {
        self.interfaces.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `χ̃_k(x)` for `k = 1..=N+1`, with `χ̃_1 ≡ 1` and `χ̃_{N+1} ≡ 0`.
    pub fn chi_tilde(&self, k: usize, x: f64) -> f64 {
        let n = self.len();
        if k <= 1 {
            1.0
        } else if k > n {
            0.0
        } else {
            0.5 * (1.0 + (0.5 * self.tau * (x - self.interfaces[k - 2])).tanh())
        }
    }

    /// Window `χ̃_k − χ̃_{k+1}`.
    pub fn window(&self, k: usize, x: f64) -> f64 {
        self.chi_tilde(k, x) - self.chi_tilde(k + 1, x)
    }
}

fn check_vacuum(q: &HydroField) -> Result<()> {
    let (m, i) = q.max_eta();
    if m >= 1.0 {
        return Err(Error::Vacuum { x: q.grid.x(i), eta: m });
    }
    Ok(())
}

/// Energy densities `(kinetic from η', kinetic from v, potential)`.
pub fn energy_parts(q: &HydroField, nl: &Nonlinearity) -> Result<(f64, f64, f64)> {
    check_vacuum(q)?;
    let d = q.eta_prime();
    let g = &q.grid;
    let a = g.integrate_with(|i| d[i] * d[i] / (1.0 - q.eta[i])) / 8.0;
    let b = g.integrate_with(|i| (1.0 - q.eta[i]) * q.v[i] * q.v[i]) / 2.0;
    let c = g.integrate_with(|i| {
        let e = q.eta[i];
        e * e * nl.reduced_potential(e)
    }) / 2.0;
    Ok((a, b, c))
}

/// `E = ⅛∫η'²/(1−η) + ½∫(1−η)v² + ½∫F(1−η)`.
pub fn energy(q: &HydroField, nl: &Nonlinearity) -> Result<f64> {
    let (a, b, c) = energy_parts(q, nl)?;
    Ok(a + b + c)
}

/// `½∫|Ψ'|² + ½∫F(|Ψ|²)` in the original frame.
pub fn energy_original(w: &WaveField, nl: &Nonlinearity) -> f64 {
    let d = w.physical_derivative();
    let g = &w.grid;
    g.integrate_with(|i| {
        let e = 1.0 - w.psi[i].norm_sqr();
        0.5 * d[i].norm_sqr() + 0.5 * e * e * nl.reduced_potential(e)
    })
}

/// `p = ½∫ηv`.
pub fn momentum(q: &HydroField) -> f64 {
    0.5 * q.grid.integrate_with(|i| q.eta[i] * q.v[i])
}

/// `p_R = ½∫ηvχ(x − R)`.
pub fn localized_momentum(q: &HydroField, cut: &Cutoff) -> f64 {
    let g = &q.grid;
    0.5 * g.integrate_with(|i| q.eta[i] * q.v[i] * cut.chi(g.x(i)))
}

/// `q_k = ∫ηv(χ̃_k − χ̃_{k+1})`, no ½ factor; `k` is 1-based.
pub fn windowed_momentum(q: &HydroField, part: &Partition, k: usize) -> f64 {
    let g = &q.grid;
    g.integrate_with(|i| q.eta[i] * q.v[i] * part.window(k, g.x(i)))
}

/// `p̃_k = ½∫ηvχ̃_k`; `k` is 1-based.
pub fn partial_momentum(q: &HydroField, part: &Partition, k: usize) -> f64 {
    let g = &q.grid;
    0.5 * g.integrate_with(|i| q.eta[i] * q.v[i] * part.chi_tilde(k, g.x(i)))
}

/// `G = E − Σ c_k q_k`.
pub fn lyapunov_g(q: &HydroField, nl: &Nonlinearity, speeds: &[f64], part: &Partition) -> Result<f64> {
    if speeds.len() != part.len() {
        return Err(Error::InvalidParameter(format!(
            "{} speeds for a partition of {} windows",
            speeds.len(),
            part.len()
        )));
    }
    let e = energy(q, nl)?;
    let s: f64 = speeds
        .iter()
        .enumerate()
        .map(|(i, c)| c * windowed_momentum(q, part, i + 1))
        .sum();
    Ok(e - s)
}

/// Summation by parts of `G`: with `q_k = 2(p̃_k − p̃_{k+1})`,
/// `G = E − 2c₁p − 2Σ_{k=2}^{N} (c_k − c_{k−1}) p̃_k`.
pub fn lyapunov_g_abel(q: &HydroField, nl: &Nonlinearity, speeds: &[f64], part: &Partition) -> Result<f64> {
    let e = energy(q, nl)?;
    let mut s = 2.0 * speeds[0] * momentum(q);
    for k in 2..=speeds.len() {
        s += 2.0 * (speeds[k - 1] - speeds[k - 2]) * partial_momentum(q, part, k);
    }
    Ok(e - s)
}

/// `V = ∫(x − A)ηv`, refused when the integrand does not vanish at the ends.
pub fn virial(q: &HydroField, a: f64) -> Result<f64> {
    let g = &q.grid;
    let n = g.n;
    let edge = [0, n - 1]
        .iter()
        .map(|&i| ((g.x(i) - a) * q.eta[i] * q.v[i]).abs())
        .fold(0.0, f64::max);
    if edge >= 1e-10 {
        return Err(Error::Localization { edge_value: edge });
    }
    Ok(g.integrate_with(|i| (g.x(i) - a) * q.eta[i] * q.v[i]))
}

/// `W₁ = ½∫η'² + ∫v² + (c_s²/2)∫η² − A'∫ηv` and the lower bound
/// `½∫η'² + (c_s² − A'²)/2 ∫η² + ½∫v²`.
pub fn w1_lower_bound_check(q: &HydroField, a_prime: f64, nl: &Nonlinearity) -> Result<(f64, f64)> {
    if a_prime.abs() >= nl.cs() {
        return Err(Error::InvalidParameter(format!("|A'| = {} not below c_s", a_prime.abs())));
    }
    let g = &q.grid;
    let d = q.eta_prime();
    let dd = g.integrate_with(|i| d[i] * d[i]);
    let vv = g.integrate_with(|i| q.v[i] * q.v[i]);
    let ee = g.integrate_with(|i| q.eta[i] * q.eta[i]);
    let ev = g.integrate_with(|i| q.eta[i] * q.v[i]);
    let cs2 = nl.cs2();
    let lhs = 0.5 * dd + vv + 0.5 * cs2 * ee - a_prime * ev;
    let rhs = 0.5 * dd + 0.5 * (cs2 - a_prime * a_prime) * ee + 0.5 * vv;
    Ok((lhs, rhs))
}

/// Pointwise density of `d/dt p_{R(t)}` in a frame moving at speed `β`.
pub fn pi_density(q: &HydroField, cut: &Cutoff, beta: f64, nl: &Nonlinearity) -> Result<Vec<f64>> {
    check_vacuum(q)?;
    let g = &q.grid;
    let d = q.eta_prime();
    Ok((0..g.n)
        .map(|i| {
            let x = g.x(i);
            let (e, v, de) = (q.eta[i], q.v[i], d[i]);
            let one = 1.0 - e;
            let bracket = (1.0 - 2.0 * e) * v * v
                + nl.f_tilde(e)
                + (3.0 - 2.0 * e) * de * de / (4.0 * one * one)
                - beta * e * v;
            0.5 * cut.chi_prime(x) * bracket + 0.25 * cut.chi_third(x) * (e + (-e).ln_1p())
        })
        .collect())
}

/// `δ₁η² − β|ηv| + (1 − 2η)v²` with `δ₁ = −∫₀¹ r f'(1 − rη)dr − τ²C_ln`.
pub fn coercivity_q(eta: f64, v: f64, nl: &Nonlinearity, beta: f64, tau: f64, c_ln: f64) -> f64 {
    let d1 = nl.delta1_integral(eta) - tau * tau * c_ln;
    d1 * eta * eta - beta * (eta * v).abs() + (1.0 - 2.0 * eta) * v * v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivitySweep {
    pub min_ratio: f64,
    pub argmin_eta: f64,
    pub argmin_v: f64,
    pub samples: usize,
}

/// Minimum of `q/(η² + v²)` over a regular grid of `n_eta × n_dir` samples:
/// `η` in `[−eta_max, eta_max]` and directions `(η, v) ∝ (cos φ, sin φ)`.
/// The ratio depends on `(η, v)` only through `η` and the direction.
pub fn coercivity_sweep(
    nl: &Nonlinearity,
    beta: f64,
    tau: f64,
    c_ln: f64,
    eta_max: f64,
    n_eta: usize,
    n_dir: usize,
) -> CoercivitySweep {
    let mut best = CoercivitySweep {
        min_ratio: f64::INFINITY,
        argmin_eta: 0.0,
        argmin_v: 0.0,
        samples: 0,
    };
    for i in 0..n_eta {
        let eta = -eta_max + 2.0 * eta_max * i as f64 / (n_eta - 1) as f64;
        if eta == 0.0 {
            continue;
        }
        for j in 0..n_dir {
            let phi = std::f64::consts::PI * (j as f64 + 0.5) / n_dir as f64;
            // direction fixes v/η; rescale so that the η sample is kept
            let (c, s) = (phi.cos(), phi.sin());
            let v = if c.abs() > 1e-12 { eta * s / c } else { continue };
            let r = coercivity_q(eta, v, nl, beta, tau, c_ln) / (eta * eta + v * v);
            best.samples += 1;
            if r < best.min_ratio {
                best.min_ratio = r;
                best.argmin_eta = eta;
                best.argmin_v = v;
            }
        }
    }
    best
}

/// Largest drop `p(t₁) − p(t₂)` over `t_min ≤ t₁ ≤ t₂`, zero when `p` is
/// nondecreasing there.
pub fn max_dip(t: &[f64], p: &[f64], t_min: f64) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut dip = 0.0f64;
    for (&s, &v) in t.iter().zip(p) {
        if s < t_min {
            continue;
        }
        peak = peak.max(v);
        dip = dip.max(peak - v);
    }
    dip
}

/// `p_{A(t) + R'}` along a sequence of hydrodynamic states.
pub fn moving_cutoff_momentum(states: &[HydroField], frame: &[f64], r_prime: f64, tau: f64) -> Result<Vec<f64>> {
    if states.len() != frame.len() {
        return Err(Error::Shape(format!("{} states for {} frame positions", states.len(), frame.len())));
    }
    states
        .iter()
        .zip(frame)
        .map(|(q, a)| Ok(localized_momentum(q, &Cutoff::new(tau, a + r_prime)?)))
        .collect()
}
