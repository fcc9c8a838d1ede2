//! Linear waves on the constant background: measured against `ω(ξ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Evolver, Scheme};
use crate::grid::Grid;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{linear_fit, zero_crossings};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub l_box: f64,
    pub n: usize,
    pub amplitude: f64,
    pub dt: f64,
    /// Integration time; at least three periods are required.
    pub t_end: f64,
    /// Steps between samples of the mode coefficient.
    pub sample_stride: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            l_box: 16.0 * std::f64::consts::PI,
            n: 256,
            amplitude: 1e-4,
            dt: 1e-3,
            t_end: 40.0,
            sample_stride: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub xi: f64,
    pub measured: f64,
    pub predicted: f64,
    pub rel_error: f64,
}

/// Frequency of the box mode `ξ` of `Re Ψ` after `Ψ(0) = 1 + ε cos(ξx)`,
/// from the spacing of its zero crossings.
pub fn measure_frequency(nl: &Nonlinearity, xi: f64, cfg: &DispersionConfig) -> Result<DispersionSample> {
    let grid = Grid::periodic_box(cfg.l_box, cfg.n)?;
    let dk = std::f64::consts::TAU / cfg.l_box;
    let j = xi / dk;
    if (j - j.round()).abs() > 1e-9 || j.round() < 1.0 {
        return Err(Error::InvalidParameter(format!("ξ = {xi} is not a box mode (spacing {dk})")));
    }
    if xi >= std::f64::consts::PI * cfg.n as f64 / cfg.l_box {
        return Err(Error::InvalidParameter(format!("ξ = {xi} is above the grid Nyquist wavenumber")));
    }
    let predicted = nl.dispersion_omega(xi);
    if cfg.t_end * predicted < 3.0 * std::f64::consts::TAU {
        return Err(Error::InvalidParameter(format!(
            "t_end = {} covers fewer than three periods at ξ = {xi}",
            cfg.t_end
        )));
    }
    let xs = grid.xs();
    let mut psi: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::new(1.0 + cfg.amplitude * (xi * x).cos(), 0.0))
        .collect();
    let mode = |psi: &[Complex64]| -> f64 {
        2.0 / cfg.n as f64 * psi.iter().zip(&xs).map(|(z, &x)| z.re * (xi * x).cos()).sum::<f64>()
    };
    let mut ev = Evolver::new(grid, *nl, cfg.dt, 0.0, Scheme::Strang)?;
    let samples = (cfg.t_end / (cfg.dt * cfg.sample_stride as f64)).round() as usize;
    let mut t = vec![0.0];
    let mut y = vec![mode(&psi)];
    for s in 1..=samples {
        ev.advance(&mut psi, cfg.sample_stride);
        t.push(s as f64 * cfg.dt * cfg.sample_stride as f64);
        y.push(mode(&psi));
    }
    let zc = zero_crossings(&t, &y);
    if zc.len() < 4 {
        return Err(Error::InvalidParameter(format!("only {} zero crossings at ξ = {xi}", zc.len())));
    }
    let idx: Vec<f64> = (0..zc.len()).map(|i| i as f64).collect();
    let fit = linear_fit(&idx, &zc).expect("at least four crossings");
    let measured = std::f64::consts::PI / fit.slope;
    Ok(DispersionSample {
        xi,
        measured,
        predicted,
        rel_error: (measured - predicted).abs() / predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_box_modes() {
        let gp = Nonlinearity::gross_pitaevskii();
        assert!(measure_frequency(&gp, 0.3, &DispersionConfig::default()).is_err());
        assert!(measure_frequency(&gp, 100.0, &DispersionConfig::default()).is_err());
    }

    #[test]
    fn gp_unit_mode() {
        let gp = Nonlinearity::gross_pitaevskii();
        let cfg = DispersionConfig {
            t_end: 20.0,
            ..Default::default()
        };
        let s = measure_frequency(&gp, 1.0, &cfg).unwrap();
        assert!(s.rel_error < 1e-3, "{s:?}");
    }
}
