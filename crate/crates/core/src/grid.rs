//! Uniform 1D grids and the discrete calculus used across the crate.
//!
//! Two flavours share one type. Periodic grids (the evolution box) use
//! spectral differentiation and spectral cumulative integration; open grids
//! (profiles, test fields) use centered fourth-order differences with
//! one-sided fourth-order closures at the ends. Quadrature is the trapezoid
//! rule in both cases, which is spectrally accurate for decaying or periodic
//! integrands.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
    pub periodic: bool,
}

impl Grid {
    pub fn new(x0: f64, h: f64, n: usize, periodic: bool) -> Result<Self> {
        if !(h > 0.0) || n < 6 {
            return Err(Error::InvalidParameter(format!(
                "grid needs h > 0 and at least 6 points (h = {h}, n = {n})"
            )));
        }
        Ok(Self { x0, h, n, periodic })
    }

    /// Periodic box `[-L/2, L/2)` with `n` points.
    pub fn periodic_box(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("box length {length}")));
        }
        Self::new(-0.5 * length, length / n as f64, n, true)
    }

    /// Open grid with `x = 0` at its center and nodes `-m h ..= m h`,
    /// `m = ceil(x_max / h)`.
    pub fn symmetric(x_max: f64, h: f64) -> Result<Self> {
        if !(x_max > 0.0) {
            return Err(Error::InvalidParameter(format!("x_max {x_max}")));
        }
        let m = (x_max / h).ceil() as usize;
        Self::new(-(m as f64) * h, h, 2 * m + 1, false)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Period for periodic grids, span for open ones.
    pub fn length(&self) -> f64 {
        if self.periodic {
            self.n as f64 * self.h
        } else {
            (self.n - 1) as f64 * self.h
        }
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Index of the node nearest to `x = 0`.
    pub fn origin_index(&self) -> usize {
        let j = (-self.x0 / self.h).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        let j = ((x - self.x0) / self.h).round();
        if j < 0.0 || j >= self.n as f64 {
            None
        } else {
            Some(j as usize)
        }
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.n == other.n
            && self.periodic == other.periodic
            && (self.h - other.h).abs() <= 1e-12 * self.h
            && (self.x0 - other.x0).abs() <= 1e-9 * self.h.max(1.0)
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!("{self:?} vs {other:?}")))
        }
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * self.h);
        (0..n)
            .map(|m| {
                let m = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
                m * dk
            })
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        let s: f64 = f.iter().sum();
        if self.periodic {
            self.h * s
        } else {
            self.h * (s - 0.5 * (f[0] + f[self.n - 1]))
        }
    }

    pub fn integrate_with<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let w = if !self.periodic && (i == 0 || i == self.n - 1) { 0.5 } else { 1.0 };
            s += w * f(i);
        }
        self.h * s
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.integrate_with(|i| f[i] * f[i]).sqrt()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        if self.periodic {
            spectral_derivative_real(f, self, 1)
        } else {
            fd4_first(f, self.h)
        }
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        if self.periodic {
            spectral_derivative_real(f, self, 2)
        } else {
            fd4_second(f, self.h)
        }
    }

    /// Derivative of a complex field that is periodic on this grid.
    pub fn derivative_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        if self.periodic {
            spectral_derivative_complex(f, self, 1)
        } else {
            fd4_first(f, self.h)
        }
    }

    pub fn second_derivative_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        if self.periodic {
            spectral_derivative_complex(f, self, 2)
        } else {
            fd4_second(f, self.h)
        }
    }

    /// `F(x_j) = ∫_0^{x_j} f`, based at the node nearest to the origin.
    pub fn cumulative_from_origin(&self, f: &[f64]) -> Vec<f64> {
        let j0 = self.origin_index();
        let mut out = if self.periodic {
            spectral_cumulative(f, self, j0)
        } else {
            fd4_cumulative(f, self.h, j0)
        };
        // origin between nodes: shift base point by the local rectangle
        let offset = self.x(j0) * f[j0];
        if offset != 0.0 {
            out.iter_mut().for_each(|v| *v += offset);
        }
        out
    }
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

pub(crate) fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        let key = (n, direction == FftDirection::Forward);
        cache
            .entry(key)
            .or_insert_with(|| planner.plan_fft(n, direction))
            .clone()
    })
}

/// Unnormalized forward transform in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    fft_plan(buf.len(), FftDirection::Forward).process(buf);
}

/// Normalized inverse transform in place.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    fft_plan(n, FftDirection::Inverse).process(buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
}

fn spectral_multiplier(grid: &Grid, order: u32) -> Vec<Complex64> {
    let n = grid.n;
    grid.wavenumbers()
        .into_iter()
        .enumerate()
        .map(|(m, k)| {
            if order % 2 == 1 && n % 2 == 0 && m == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k).powu(order)
            }
        })
        .collect()
}

fn spectral_derivative_complex(f: &[Complex64], grid: &Grid, order: u32) -> Vec<Complex64> {
    let mut buf = f.to_vec();
    fft_forward(&mut buf);
    for (z, m) in buf.iter_mut().zip(spectral_multiplier(grid, order)) {
        *z *= m;
    }
    fft_inverse(&mut buf);
    buf
}

fn spectral_derivative_real(f: &[f64], grid: &Grid, order: u32) -> Vec<f64> {
    let buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    spectral_derivative_complex(&buf, grid, order)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

fn spectral_cumulative(f: &[f64], grid: &Grid, j0: usize) -> Vec<f64> {
    let n = f.len();
    let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_forward(&mut buf);
    let mean = buf[0].re / n as f64;
    let ks = grid.wavenumbers();
    for (m, z) in buf.iter_mut().enumerate() {
        if m == 0 || (n % 2 == 0 && m == n / 2) {
            *z = Complex64::new(0.0, 0.0);
        } else {
            *z /= Complex64::new(0.0, ks[m]);
        }
    }
    fft_inverse(&mut buf);
    let base = buf[j0].re;
    let x_base = grid.x(j0);
    (0..n)
        .map(|j| mean * (grid.x(j) - x_base) + buf[j].re - base)
        .collect()
}

fn fd4_first<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    let s = 1.0 / (12.0 * h);
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i >= 2 && i + 2 < n {
            (f[i - 2] - f[i + 2]) * s + (f[i + 1] - f[i - 1]) * (8.0 * s)
        } else if i == 0 {
            f[0] * (-25.0 * s) + f[1] * (48.0 * s) + f[2] * (-36.0 * s) + f[3] * (16.0 * s)
                + f[4] * (-3.0 * s)
        } else if i == 1 {
            f[0] * (-3.0 * s) + f[1] * (-10.0 * s) + f[2] * (18.0 * s) + f[3] * (-6.0 * s)
                + f[4] * s
        } else if i == n - 1 {
            f[n - 1] * (25.0 * s) + f[n - 2] * (-48.0 * s) + f[n - 3] * (36.0 * s)
                + f[n - 4] * (-16.0 * s)
                + f[n - 5] * (3.0 * s)
        } else {
            f[n - 1] * (3.0 * s) + f[n - 2] * (10.0 * s) + f[n - 3] * (-18.0 * s)
                + f[n - 4] * (6.0 * s)
                + f[n - 5] * (-s)
        };
        d.push(v);
    }
    d
}

fn fd4_second<T>(f: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    let s = 1.0 / (12.0 * h * h);
    let one_sided = |g: &dyn Fn(usize) -> T, near: bool| -> T {
        if near {
            g(0) * (45.0 * s) + g(1) * (-154.0 * s) + g(2) * (214.0 * s) + g(3) * (-156.0 * s)
                + g(4) * (61.0 * s)
                + g(5) * (-10.0 * s)
        } else {
            g(0) * (10.0 * s) + g(1) * (-15.0 * s) + g(2) * (-4.0 * s) + g(3) * (14.0 * s)
                + g(4) * (-6.0 * s)
                + g(5) * s
        }
    };
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = if i >= 2 && i + 2 < n {
            (f[i - 1] + f[i + 1]) * (16.0 * s) - (f[i - 2] + f[i + 2]) * s + f[i] * (-30.0 * s)
        } else if i < 2 {
            one_sided(&|k| f[k], i == 0)
        } else {
            one_sided(&|k| f[n - 1 - k], i == n - 1)
        };
        d.push(v);
    }
    d
}

fn fd4_cumulative(f: &[f64], h: f64, j0: usize) -> Vec<f64> {
    let n = f.len();
    // ∫ over [x_j, x_{j+1}] with a cubic through four neighbouring nodes
    let cell = |j: usize| -> f64 {
        if j == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if j + 2 >= n {
            h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
        } else {
            h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
        }
    };
    let mut out = vec![0.0; n];
    for j in j0..n - 1 {
        out[j + 1] = out[j] + cell(j);
    }
    for j in (0..j0).rev() {
        out[j] = out[j + 1] - cell(j);
    }
    out
}
