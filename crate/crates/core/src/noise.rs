//! Seeded band-limited perturbations of `(η, v)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::transform::{hydro_norm, HydroField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub seed: u64,
    /// Target `H¹ × L²` norm.
    pub norm: f64,
    /// Largest wavenumber kept.
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    /// Gaussian envelope `exp(−((x − center)/width)²)`.
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_k_max() -> f64 {
    1.0
}

fn default_width() -> f64 {
    40.0
}

impl NoiseSpec {
    pub fn new(seed: u64, norm: f64) -> Self {
        Self {
            seed,
            norm,
            k_max: default_k_max(),
            center: 0.0,
            width: default_width(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.norm >= 0.0 && self.norm.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise norm {}", self.norm)));
        }
        if !(self.k_max > 0.0 && self.width > 0.0) {
            return Err(Error::InvalidParameter("noise k_max and width must be positive".into()));
        }
        Ok(())
    }
}

fn random_signal(rng: &mut ChaCha8Rng, grid: &Grid, modes: &[f64]) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = modes
        .iter()
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            modes
                .iter()
                .zip(&coeffs)
                .map(|(k, (a, ph))| a * (k * x + ph).cos())
                .sum()
        })
        .collect()
}

/// Sum of box modes `0 < ξ ≤ k_max` with uniform random amplitudes and
/// phases, times the envelope, scaled to `spec.norm`. The stream depends
/// only on the seed and the grid.
pub fn band_limited_noise(grid: &Grid, spec: &NoiseSpec) -> Result<HydroField> {
    spec.validate()?;
    let mut q = HydroField::zeros(*grid);
    if spec.norm == 0.0 {
        return Ok(q);
    }
    let dk = std::f64::consts::TAU / grid.length();
    let count = (spec.k_max / dk).floor() as usize;
    if count == 0 {
        return Err(Error::InvalidParameter(format!(
            "k_max = {} is below the box wavenumber {dk}",
            spec.k_max
        )));
    }
    let modes: Vec<f64> = (1..=count).map(|j| j as f64 * dk).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let eta = random_signal(&mut rng, grid, &modes);
    let v = random_signal(&mut rng, grid, &modes);
    for j in 0..grid.n {
        let y = (grid.x(j) - spec.center) / spec.width;
        let env = (-y * y).exp();
        q.eta[j] = env * eta[j];
        q.v[j] = env * v[j];
    }
    let s = spec.norm / hydro_norm(&q);
    Ok(q.scaled(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_determinism() {
        let g = Grid::periodic_box(200.0, 1024).unwrap();
        let spec = NoiseSpec::new(7, 1e-3);
        let a = band_limited_noise(&g, &spec).unwrap();
        let b = band_limited_noise(&g, &spec).unwrap();
        assert_eq!(a.eta, b.eta);
        assert_eq!(a.v, b.v);
        assert!((hydro_norm(&a) - 1e-3).abs() < 1e-15);
        let c = band_limited_noise(&g, &NoiseSpec::new(8, 1e-3)).unwrap();
        assert_ne!(a.eta, c.eta);
        let z = band_limited_noise(&g, &NoiseSpec::new(7, 0.0)).unwrap();
        assert!(z.eta.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn spectrum_is_band_limited() {
        let g = Grid::periodic_box(200.0, 1024).unwrap();
        let mut spec = NoiseSpec::new(3, 1.0);
        spec.width = 1e6;
        let q = band_limited_noise(&g, &spec).unwrap();
        let ks = g.wavenumbers();
        let mut buf: Vec<num_complex::Complex64> = q.eta.iter().map(|&e| e.into()).collect();
        crate::grid::fft_forward(&mut buf);
        let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
        let outside: f64 = buf
            .iter()
            .zip(&ks)
            .filter(|(_, k)| k.abs() > 1.0 + 1e-9)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        assert!(outside / total < 1e-12);
    }
}
