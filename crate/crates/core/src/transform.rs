//! Madelung correspondence between the complex field and `(η, v)`.
//!
//! `Ψ = sqrt(1 − η) exp(−i ∫_0^x v + iθ)`, and back
//! `η = 1 − |Ψ|²`, `v = −Im(conj(Ψ) Ψ') / |Ψ|²`, `θ = arg Ψ(0)`.
//!
//! A [`WaveField`] on a periodic grid stores the gauged samples
//! `psi = Ψ e^{iκx}`: dark solitons carry a net phase drop `W` between the
//! two ends of the box, and the linear ramp with `κ = W/L` makes `psi`
//! exactly periodic. On open grids `κ` is normally zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Modulus below which the hydrodynamic variables are not extracted.
pub const VACUUM_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HydroField {
    pub grid: Grid,
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
}

impl HydroField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            eta: vec![0.0; grid.n],
            v: vec![0.0; grid.n],
        }
    }

    pub fn new(grid: Grid, eta: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if eta.len() != grid.n || v.len() != grid.n {
            return Err(Error::Shape(format!(
                "expected {} samples, got eta {} and v {}",
                grid.n,
                eta.len(),
                v.len()
            )));
        }
        Ok(Self { grid, eta, v })
    }

    pub fn eta_prime(&self) -> Vec<f64> {
        self.grid.derivative(&self.eta)
    }

    pub fn max_eta(&self) -> (f64, usize) {
        self.eta
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |acc, (i, &e)| if e > acc.0 { (e, i) } else { acc })
    }

    pub fn sub(&self, other: &HydroField) -> Result<HydroField> {
        self.grid.check_same(&other.grid)?;
        Ok(HydroField {
            grid: self.grid,
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| a - b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &HydroField) -> Result<HydroField> {
        self.grid.check_same(&other.grid)?;
        Ok(HydroField {
            grid: self.grid,
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| a + b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> HydroField {
        HydroField {
            grid: self.grid,
            eta: self.eta.iter().map(|a| a * s).collect(),
            v: self.v.iter().map(|a| a * s).collect(),
        }
    }

    /// Discrete `H¹ × L²` norm.
    pub fn norm(&self) -> f64 {
        hydro_norm(self)
    }
}

/// `‖(η, v)‖² = ‖η‖²_{L²} + ‖η'‖²_{L²} + ‖v‖²_{L²}`.
pub fn hydro_norm(q: &HydroField) -> f64 {
    let d = q.eta_prime();
    let g = &q.grid;
    g.integrate_with(|i| q.eta[i] * q.eta[i] + d[i] * d[i] + q.v[i] * q.v[i])
        .sqrt()
}

/// `sqrt(1 − η) exp(−i ∫_0^x v + iθ)` sampled on the grid, no gauge.
pub fn phi(grid: &Grid, eta: &[f64], v: &[f64], theta: f64) -> Vec<Complex64> {
    let phase = grid.cumulative_from_origin(v);
    eta.iter()
        .zip(phase)
        .map(|(&e, p)| Complex64::from_polar((1.0 - e).max(0.0).sqrt(), theta - p))
        .collect()
}

/// Hydrodynamic pair to complex field. Periodic grids get the gauge ramp.
pub fn to_original(q: &HydroField, theta: f64) -> Result<WaveField> {
    let (max_eta, i) = q.max_eta();
    if max_eta >= 1.0 {
        return Err(Error::Vacuum {
            x: q.grid.x(i),
            eta: max_eta,
        });
    }
    let grid = q.grid;
    if !grid.periodic {
        return Ok(WaveField {
            grid,
            psi: phi(&grid, &q.eta, &q.v, theta),
            kappa: 0.0,
        });
    }
    // On the periodic grid the spectral primitive is mean·(x − x₀) plus a
    // periodic part, so adding κx with κ = mean leaves an exactly periodic psi.
    let kappa = grid.integrate(&q.v) / grid.length();
    let phase = grid.cumulative_from_origin(&q.v);
    let psi = (0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            Complex64::from_polar((1.0 - q.eta[j]).sqrt(), theta - phase[j] + kappa * x)
        })
        .collect();
    Ok(WaveField { grid, psi, kappa })
}

/// Complex field to `(η, v)` and `θ₀ = arg Ψ(0)`.
pub fn to_hydro(w: &WaveField) -> Result<(HydroField, f64)> {
    let g = w.grid;
    for (i, z) in w.psi.iter().enumerate() {
        if !(z.norm() >= VACUUM_THRESHOLD) {
            return Err(Error::Vacuum {
                x: g.x(i),
                eta: 1.0 - z.norm_sqr(),
            });
        }
    }
    let d = g.derivative_complex(&w.psi);
    let eta = w.psi.iter().map(|z| 1.0 - z.norm_sqr()).collect();
    let v = w
        .psi
        .iter()
        .zip(&d)
        .map(|(z, dz)| -(z.conj() * dz).im / z.norm_sqr() + w.kappa)
        .collect();
    Ok((HydroField { grid: g, eta, v }, w.theta0()))
}

impl WaveField {
    pub fn constant(grid: Grid, value: Complex64) -> Self {
        Self {
            grid,
            psi: vec![value; grid.n],
            kappa: 0.0,
        }
    }

    /// Physical samples `Ψ = psi e^{−iκx}`.
    pub fn physical(&self) -> Vec<Complex64> {
        if self.kappa == 0.0 {
            return self.psi.clone();
        }
        (0..self.grid.n)
            .map(|j| self.psi[j] * Complex64::from_polar(1.0, -self.kappa * self.grid.x(j)))
            .collect()
    }

    /// `Ψ'` of the physical field.
    pub fn physical_derivative(&self) -> Vec<Complex64> {
        let d = self.grid.derivative_complex(&self.psi);
        (0..self.grid.n)
            .map(|j| {
                let dz = d[j] - Complex64::new(0.0, self.kappa) * self.psi[j];
                dz * Complex64::from_polar(1.0, -self.kappa * self.grid.x(j))
            })
            .collect()
    }

    pub fn modulus_sq(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `arg Ψ(0)`.
    pub fn theta0(&self) -> f64 {
        let j = self.grid.origin_index();
        let x = self.grid.x(j);
        (self.psi[j] * Complex64::from_polar(1.0, -self.kappa * x)).arg()
    }

    /// Multiply by `e^{iα}`.
    pub fn rotated(&self, alpha: f64) -> WaveField {
        let r = Complex64::from_polar(1.0, alpha);
        WaveField {
            grid: self.grid,
            psi: self.psi.iter().map(|z| z * r).collect(),
            kappa: self.kappa,
        }
    }

    /// Total phase decrement `W = −Σ arg(Ψ_{j+1}/Ψ_j)` of the physical field
    /// across the grid, equal to `∫ v` for smooth fields.
    pub fn winding(&self) -> f64 {
        let p = self.physical();
        -p.windows(2).map(|w| (w[1] * w[0].conj()).arg()).sum::<f64>()
    }

    /// Set `κ = W / L` and store `psi = Ψ e^{iκx}`.
    pub fn apply_gauge(&self) -> WaveField {
        let phys = self.physical();
        let kappa = self.winding() / self.grid.length();
        let psi = (0..self.grid.n)
            .map(|j| phys[j] * Complex64::from_polar(1.0, kappa * self.grid.x(j)))
            .collect();
        WaveField {
            grid: self.grid,
            psi,
            kappa,
        }
    }

    /// Physical samples with `κ = 0`.
    pub fn ungauge(&self) -> WaveField {
        WaveField {
            grid: self.grid,
            psi: self.physical(),
            kappa: 0.0,
        }
    }

    /// Mismatch between `psi_0` and the periodic continuation of the last
    /// sample, `|Ψ_{n−1} e^{iκ(x₀+L)} − psi_0|`.
    pub fn boundary_jump(&self) -> f64 {
        let n = self.grid.n;
        let last = self.psi[n - 1] * Complex64::from_polar(1.0, -self.kappa * self.grid.x(n - 1));
        let wrapped = last * Complex64::from_polar(1.0, self.kappa * (self.grid.x0 + n as f64 * self.grid.h));
        (wrapped - self.psi[0]).norm()
    }

    /// Translate by an integer number of grid cells (periodic wrap on
    /// periodic grids, edge extension otherwise).
    pub fn shifted_cells(&self, cells: isize) -> WaveField {
        let n = self.grid.n as isize;
        let phys = self.physical();
        let psi = (0..n)
            .map(|j| {
                let src = j - cells;
                let k = if self.grid.periodic {
                    src.rem_euclid(n)
                } else {
                    src.clamp(0, n - 1)
                };
                phys[k as usize]
            })
            .collect();
        WaveField {
            grid: self.grid,
            psi,
            kappa: 0.0,
        }
    }
}

/// `‖ψ₁ − ψ₂‖_{L∞([−1,1])} + ‖|ψ₁|² − |ψ₂|²‖_{L²} + ‖ψ₁' − ψ₂'‖_{L²}`.
pub fn metric_d(a: &WaveField, b: &WaveField) -> Result<f64> {
    a.grid.check_same(&b.grid)?;
    let g = a.grid;
    let (pa, pb) = (a.physical(), b.physical());
    let (da, db) = (a.physical_derivative(), b.physical_derivative());
    let mut sup: f64 = 0.0;
    for j in 0..g.n {
        if g.x(j).abs() <= 1.0 + 1e-12 {
            sup = sup.max((pa[j] - pb[j]).norm());
        }
    }
    let m2 = g
        .integrate_with(|j| (pa[j].norm_sqr() - pb[j].norm_sqr()).powi(2))
        .sqrt();
    let d2 = g.integrate_with(|j| (da[j] - db[j]).norm_sqr()).sqrt();
    Ok(sup + m2 + d2)
}
