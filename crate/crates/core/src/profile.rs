//! Traveling waves in hydrodynamic variables.
//!
//! A wave of speed `c` has `v = cη / (2(1 − η))` and `η` solves
//! `η'' = 2(1−η)f(1−η) − 2F(1−η) − c²η`, with first integral
//! `(η')² = 4F(1−η)(1−η) − c²η² = η² (4(1−η)F̃₂(η) − c²)` where
//! `F̃₂(η) = F(1−η)/η²`. The maximum `ξ = η(0)` is the smallest positive
//! zero of the bracket.
//!
//! Integrating the second-order equation outward is unstable on the tail
//! (the homoclinic orbit is a saddle connection), so the solver switches to
//! the decaying branch `η' = −η sqrt(4(1−η)F̃₂(η) − c²)` once `η < ξ/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{bisect, exponential_fit};

/// Bracket `4(1−ξ)F(1−ξ)/ξ² − c²` whose first zero is the amplitude.
fn amplitude_bracket(nl: &Nonlinearity, xi: f64) -> f64 {
    4.0 * (1.0 - xi) * nl.reduced_potential(xi)
}

/// Smallest `ξ ∈ (0, 1)` with `4F(1−ξ)(1−ξ) = c²ξ²`.
pub fn amplitude_from_speed(nl: &Nonlinearity, c: f64) -> Result<f64> {
    let c2 = c * c;
    if !(c > 0.0) || c >= nl.cs() {
        return Err(Error::SpeedNotAdmissible { c });
    }
    let g = |xi: f64| amplitude_bracket(nl, xi) - c2;
    // scan geometrically near 0 (sonic limit) and linearly elsewhere
    let mut pts: Vec<f64> = (0..=240).map(|i| 1e-12 * 1e12f64.powf(i as f64 / 240.0)).collect();
    pts.extend((1..4000).map(|i| i as f64 / 4000.0));
    pts.push(1.0 - 1e-6);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.retain(|&x| x < 1.0 - 1e-6 || x == 1.0 - 1e-6);
    let mut prev = pts[0];
    if g(prev) <= 0.0 {
        return Err(Error::SpeedNotAdmissible { c });
    }
    for &x in &pts[1..] {
        if g(x) <= 0.0 {
            let xi = bisect(g, prev, x, 0.0);
            if 1.0 - xi < 1e-6 {
                break;
            }
            return Ok(xi);
        }
        prev = x;
    }
    Err(Error::SpeedNotAdmissible { c })
}

/// Inverse of [`amplitude_from_speed`]: `c = sqrt(4F(1−ξ)(1−ξ)) / ξ`.
pub fn speed_from_amplitude(nl: &Nonlinearity, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::AmplitudeOutOfRange { xi });
    }
    let c2 = amplitude_bracket(nl, xi);
    if !(c2 > 0.0 && c2 < nl.cs2()) {
        return Err(Error::AmplitudeOutOfRange { xi });
    }
    Ok(c2.sqrt())
}

/// `sqrt(c_s² − c²)`, the linear decay rate of the tail.
pub fn decay_rate(nl: &Nonlinearity, c: f64) -> f64 {
    (nl.cs2() - c * c).max(0.0).sqrt()
}

/// Right-hand side `η''` of the profile equation, written to avoid cancellation.
#[inline]
pub fn profile_eta_second(nl: &Nonlinearity, c: f64, eta: f64) -> f64 {
    eta * (2.0 * (1.0 - eta) * nl.f_over_eta(eta) - 2.0 * eta * nl.reduced_potential(eta) - c * c)
}

/// `v = cη / (2(1 − η))`.
#[inline]
pub fn velocity_from_eta(c: f64, eta: f64) -> f64 {
    0.5 * c * eta / (1.0 - eta)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TravelingWaveProfile {
    pub c: f64,
    pub nl: Nonlinearity,
    pub grid: Grid,
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
    pub v: Vec<f64>,
    pub amplitude: f64,
    pub decay_rate: f64,
}

/// Default sample spacing: at least 20 points per decay length, and fine
/// enough to resolve the core.
pub fn default_spacing(nl: &Nonlinearity, c: f64) -> f64 {
    // slow waves carry a phase jump of width ~c; the residual scales like (h/c)^4
    let slow = 0.01 * (2.0 * c / nl.cs()).clamp(0.02, 1.0);
    (0.05 / decay_rate(nl, c)).min(slow)
}

/// Default half-width: the tail is below `1e-15` of the amplitude.
pub fn default_extent(nl: &Nonlinearity, c: f64) -> f64 {
    40.0 / decay_rate(nl, c)
}

pub fn solve_profile_default(nl: &Nonlinearity, c: f64) -> Result<TravelingWaveProfile> {
    solve_profile(nl, c, default_extent(nl, c), default_spacing(nl, c))
}

pub fn solve_profile(nl: &Nonlinearity, c: f64, x_max: f64, h: f64) -> Result<TravelingWaveProfile> {
    let xi = amplitude_from_speed(nl, c)?;
    let k = decay_rate(nl, c);
    if !(h > 0.0) || h > 0.1 / k {
        return Err(Error::InvalidParameter(format!("profile spacing h = {h} exceeds 0.1/k = {}", 0.1 / k)));
    }
    if x_max < 15.0 / k {
        return Err(Error::InvalidParameter(format!("profile extent {x_max} below 15/k = {}", 15.0 / k)));
    }
    let grid = Grid::symmetric(x_max, h)?;
    let m = grid.n / 2;

    let sub = ((h / (0.005_f64.min(0.005 / k))).ceil() as usize).max(1);
    let dx = h / sub as f64;

    let second = |e: f64| profile_eta_second(nl, c, e);
    let slope = |e: f64| {
        let s = amplitude_bracket(nl, e) - c * c;
        -e * s.max(0.0).sqrt()
    };

    let mut eta_pos = Vec::with_capacity(m + 1);
    let mut deta_pos = Vec::with_capacity(m + 1);
    eta_pos.push(xi);
    deta_pos.push(0.0);

    let (mut e, mut d) = (xi, 0.0);
    let mut first_order = false;
    for j in 1..=m {
        for _ in 0..sub {
            if !first_order {
                let (k1e, k1d) = (d, second(e));
                let (k2e, k2d) = (d + 0.5 * dx * k1d, second(e + 0.5 * dx * k1e));
                let (k3e, k3d) = (d + 0.5 * dx * k2d, second(e + 0.5 * dx * k2e));
                let (k4e, k4d) = (d + dx * k3d, second(e + dx * k3e));
                e += dx / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
                d += dx / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            } else {
                let k1 = slope(e);
                let k2 = slope(e + 0.5 * dx * k1);
                let k3 = slope(e + 0.5 * dx * k2);
                let k4 = slope(e + dx * k3);
                e += dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                d = slope(e);
            }
        }
        let x = j as f64 * h;
        if !e.is_finite() || !d.is_finite() {
            return Err(Error::ProfileFailure { x, reason: "non-finite value".into() });
        }
        if e >= 1.0 || e < 0.0 || e > xi * (1.0 + 1e-9) {
            return Err(Error::ProfileFailure {
                x,
                reason: format!("eta = {e} left (0, amplitude]"),
            });
        }
        if !first_order && e < 0.5 * xi {
            first_order = true;
            d = slope(e);
        }
        eta_pos.push(e);
        deta_pos.push(d);
    }

    let n = grid.n;
    let mut eta = vec![0.0; n];
    let mut eta_prime = vec![0.0; n];
    for j in 0..=m {
        eta[m + j] = eta_pos[j];
        eta[m - j] = eta_pos[j];
        eta_prime[m + j] = deta_pos[j];
        eta_prime[m - j] = -deta_pos[j];
    }
    let v = eta.iter().map(|&e| velocity_from_eta(c, e)).collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=m)
        .filter(|&j| (1e-10..=1e-4).contains(&eta_pos[j]))
        .map(|j| (j as f64 * h, eta_pos[j]))
        .unzip();
    let fitted = exponential_fit(&xs, &ys).map(|f| -f.slope).unwrap_or(f64::NAN);

    Ok(TravelingWaveProfile {
        c,
        nl: *nl,
        grid,
        eta,
        eta_prime,
        v,
        amplitude: xi,
        decay_rate: fitted,
    })
}

impl TravelingWaveProfile {
    pub fn x_max(&self) -> f64 {
        self.grid.x_max()
    }

    /// Linear decay rate `sqrt(c_s² − c²)`.
    pub fn linear_decay_rate(&self) -> f64 {
        decay_rate(&self.nl, self.c)
    }

    /// `(η, η')` at an arbitrary point, by Hermite interpolation inside the
    /// sampled window and exponential continuation outside it.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let h = self.grid.h;
        let m = self.grid.n / 2;
        let ax = x.abs();
        let sgn = if x < 0.0 { -1.0 } else { 1.0 };
        let xm = m as f64 * h;
        if ax >= xm {
            let k = self.linear_decay_rate();
            let e = self.eta[self.grid.n - 1] * (-k * (ax - xm)).exp();
            return (e, -sgn * k * e);
        }
        let j = ((ax / h) as usize).min(m - 1);
        let s = ax - j as f64 * h;
        let (e0, e1) = (self.eta[m + j], self.eta[m + j + 1]);
        let (d0, d1) = (self.eta_prime[m + j], self.eta_prime[m + j + 1]);
        // quintic Hermite using η'' from the ODE
        let (s0, s1) = (
            profile_eta_second(&self.nl, self.c, e0),
            profile_eta_second(&self.nl, self.c, e1),
        );
        let (e, d) = quintic_hermite(e0, d0, s0, e1, d1, s1, h, s);
        (e, sgn * d)
    }

    pub fn eta_at(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn v_at(&self, x: f64) -> f64 {
        velocity_from_eta(self.c, self.eta_at(x))
    }

    /// `∫_ℝ v_c`, the total phase decrement across the wave.
    pub fn phase_jump(&self) -> f64 {
        let k = self.linear_decay_rate();
        // tails beyond the window contribute v(X)/k on each side
        let tail = self.v[self.grid.n - 1] / k;
        self.grid.integrate(&self.v) + 2.0 * tail
    }
}

/// Quintic Hermite interpolant on `[0, h]` and its derivative at `s`.
fn quintic_hermite(y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64, h: f64, s: f64) -> (f64, f64) {
    let t = s / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h20 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h21 = 0.5 * (t3 - 2.0 * t4 + t5);
    let y = h00 * y0 + h * h10 * d0 + h * h * h20 * s0 + h01 * y1 + h * h11 * d1 + h * h * h21 * s1;
    let dh00 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let dh10 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let dh20 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let dh01 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let dh11 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let dh21 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let d = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1 + h * (dh20 * s0 + dh21 * s1);
    (y, d)
}

/// L² norm of the traveling-wave residual `−icu' + u'' + u f(|u|²)` of the
/// reconstructed complex profile, with fourth-order differences.
pub fn profile_residual(nl: &Nonlinearity, p: &TravelingWaveProfile) -> f64 {
    let u = crate::transform::phi(&p.grid, &p.eta, &p.v, 0.0);
    tw_residual_norm(nl, p.c, &p.grid, &u)
}

pub fn tw_residual_norm(
    nl: &Nonlinearity,
    c: f64,
    grid: &Grid,
    u: &[num_complex::Complex64],
) -> f64 {
    use num_complex::Complex64;
    let d1 = grid.derivative_complex(u);
    let d2 = grid.second_derivative_complex(u);
    let r: Vec<f64> = (0..grid.n)
        .map(|i| {
            let z = Complex64::new(0.0, -c) * d1[i] + d2[i] + u[i] * nl.f(u[i].norm_sqr());
            z.norm_sqr()
        })
        .collect();
    grid.integrate(&r).sqrt()
}

/// Closed-form GP wave `η = (1 − c²/2) sech²(sqrt(2 − c²) x / 2)`.
pub fn gp_exact_eta(c: f64, x: f64) -> f64 {
    let k = (2.0 - c * c).sqrt();
    let s = 1.0 / (0.5 * k * x).cosh();
    (1.0 - 0.5 * c * c) * s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::gross_pitaevskii(),
            Nonlinearity::perturbed_gp(0.5, 2).unwrap(),
            Nonlinearity::pure_power(1.5, 2.0).unwrap(),
            Nonlinearity::saturated(0.5).unwrap(),
            Nonlinearity::saturated(1.0).unwrap(),
        ]
    }

    #[test]
    fn gp_amplitudes() {
        let gp = Nonlinearity::gross_pitaevskii();
        assert!((amplitude_from_speed(&gp, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((amplitude_from_speed(&gp, 1.4).unwrap() - 0.02).abs() < 1e-12);
        assert!((amplitude_from_speed(&gp, 0.5).unwrap() - 0.875).abs() < 1e-12);
        assert!((speed_from_amplitude(&gp, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((speed_from_amplitude(&gp, 0.875).unwrap() - 0.5).abs() < 1e-14);
        assert!((speed_from_amplitude(&gp, 1e-9).unwrap() - 2f64.sqrt()).abs() < 1e-8);
        assert!(amplitude_from_speed(&gp, 1.5).is_err());
        assert!(amplitude_from_speed(&gp, 0.0).is_err());
        assert!(speed_from_amplitude(&gp, 1.0).is_err());
        assert!(speed_from_amplitude(&gp, 0.0).is_err());
    }

    #[test]
    fn round_trip_and_monotone_amplitude() {
        for nl in families() {
            let mut prev = f64::INFINITY;
            for i in 0..50 {
                let c = nl.cs() * (0.1 + 0.89 * i as f64 / 49.0);
                let xi = match amplitude_from_speed(&nl, c) {
                    Ok(xi) => xi,
                    // pure power / saturated waves may not exist at low speed
                    Err(_) => continue,
                };
                let back = speed_from_amplitude(&nl, xi).unwrap();
                assert!((back - c).abs() < 1e-10, "{} c = {c}: {back}", nl.name());
                assert!(xi < prev);
                prev = xi;
            }
        }
    }

    #[test]
    fn gp_profile_matches_closed_form() {
        let gp = Nonlinearity::gross_pitaevskii();
        let p = solve_profile_default(&gp, 1.0).unwrap();
        let mut err: f64 = 0.0;
        for (i, x) in p.grid.xs().into_iter().enumerate() {
            if x.abs() <= 20.0 {
                err = err.max((p.eta[i] - gp_exact_eta(1.0, x)).abs());
            }
        }
        assert!(err < 1e-8, "{err}");
        let m = p.grid.n / 2;
        assert!((p.v[m] - 0.5).abs() < 1e-14);
        assert!((p.decay_rate - 1.0).abs() < 0.05);
        // off-grid evaluation
        for x in [-7.3171, -0.0049, 0.3333, 2.71828, 12.5] {
            assert!((p.eta_at(x) - gp_exact_eta(1.0, x)).abs() < 1e-9);
        }
        assert!(profile_residual(&gp, &p) < 1e-6);
    }

    #[test]
    fn profile_invariants_across_families() {
        for nl in families() {
            for frac in [0.5, 0.6, 0.8, 0.95] {
                let c = frac * nl.cs();
                let p = match solve_profile_default(&nl, c) {
                    Ok(p) => p,
                    Err(Error::SpeedNotAdmissible { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let n = p.grid.n;
                let m = n / 2;
                assert!(p.amplitude > 0.0 && p.amplitude < 1.0);
                for j in 0..n {
                    assert!((p.eta[j] - p.eta[n - 1 - j]).abs() < 1e-10);
                    assert!(p.eta[j] <= p.eta[m]);
                    assert!((p.v[j] - velocity_from_eta(c, p.eta[j])).abs() < 1e-10);
                    let g = p.eta[j] * p.eta[j] * (amplitude_bracket(&nl, p.eta[j]) - c * c);
                    assert!((p.eta_prime[j].powi(2) - g).abs() < 1e-8);
                }
                let d = p.grid.derivative(&p.eta);
                assert!(d[m].abs() < 1e-8);
                let k = p.linear_decay_rate();
                assert!((p.decay_rate - k).abs() < 0.05 * k, "{} c={c}", nl.name());
                let res = profile_residual(&nl, &p);
                assert!(res < 1e-6, "{} c={c}: residual {res}", nl.name());
            }
        }
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(10.0, 0.05).unwrap();
        let u = vec![num_complex::Complex64::new(1.0, 0.0); g.n];
        assert!(tw_residual_norm(&gp, 0.7, &g, &u) < 1e-12);
    }

    #[test]
    fn closed_form_profile_residual_is_small() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(30.0, 0.01).unwrap();
        let eta: Vec<f64> = g.xs().iter().map(|&x| gp_exact_eta(1.0, x)).collect();
        let v: Vec<f64> = eta.iter().map(|&e| velocity_from_eta(1.0, e)).collect();
        let u = crate::transform::phi(&g, &eta, &v, 0.0);
        assert!(tw_residual_norm(&gp, 1.0, &g, &u) < 1e-6);
    }

    #[test]
    fn solver_residual_across_families_and_speeds() {
        for nl in [
            Nonlinearity::gross_pitaevskii(),
            Nonlinearity::pure_power(1.5, 2.0).unwrap(),
            Nonlinearity::saturated(0.5).unwrap(),
            Nonlinearity::saturated(1.0).unwrap(),
        ] {
            for i in 1..20 {
                let c = nl.cs() * i as f64 / 20.0;
                let p = solve_profile_default(&nl, c).unwrap();
                let r = profile_residual(&nl, &p);
                assert!(r < 1e-6, "{} c = {c}: {r}", nl.name());
            }
        }
    }

    #[test]
    fn phase_jump_matches_gp_formula() {
        // GP: ∫v = 2 arctan(sqrt(2 − c²)/c)
        let gp = Nonlinearity::gross_pitaevskii();
        for c in [0.6, 1.0, 1.3] {
            let p = solve_profile_default(&gp, c).unwrap();
            let exact = 2.0 * ((2.0 - c * c).sqrt() / c).atan();
            assert!((p.phase_jump() - exact).abs() < 1e-10, "c = {c}");
        }
    }

    #[test]
    fn preconditions_are_checked() {
        let gp = Nonlinearity::gross_pitaevskii();
        assert!(solve_profile(&gp, 1.0, 40.0, 0.5).is_err());
        assert!(solve_profile(&gp, 1.0, 5.0, 0.01).is_err());
        assert!(matches!(
            solve_profile(&gp, 2.0, 40.0, 0.01),
            Err(Error::SpeedNotAdmissible { .. })
        ));
    }
}
