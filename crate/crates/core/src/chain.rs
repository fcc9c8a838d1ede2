//! Well-prepared chains: sums of shifted profiles in `(η, v)` and their
//! lift to the complex field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::nonlinearity::Nonlinearity;
use crate::profile::{solve_profile_default, TravelingWaveProfile};
use crate::transform::{hydro_norm, to_original, HydroField, WaveField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub speeds: Vec<f64>,
    pub centers: Vec<f64>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_floor: Option<f64>,
}

impl ChainSpec {
    pub fn new(speeds: Vec<f64>, centers: Vec<f64>, theta: f64) -> Result<Self> {
        let spec = Self {
            speeds,
            centers,
            theta,
            separation_floor: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn empty() -> Self {
        Self {
            speeds: vec![],
            centers: vec![],
            theta: 0.0,
            separation_floor: None,
        }
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.speeds.len() != self.centers.len() {
            return Err(Error::InvalidParameter(format!(
                "chain has {} speeds but {} centers",
                self.speeds.len(),
                self.centers.len()
            )));
        }
        if let Some(floor) = self.separation_floor {
            if !self.is_separated(floor) {
                return Err(Error::Separation {
                    gap: self.separation(),
                });
            }
        }
        Ok(())
    }

    /// `c₁ < … < c_N`.
    pub fn is_ordered(&self) -> bool {
        self.speeds.windows(2).all(|w| w[0] < w[1])
    }

    /// `a_{k+1} − a_k > L` for all `k`.
    pub fn is_separated(&self, l: f64) -> bool {
        self.centers.windows(2).all(|w| w[1] - w[0] > l)
    }

    /// Smallest gap between consecutive centers (`+∞` for N < 2).
    pub fn separation(&self) -> f64 {
        separation(&self.centers)
    }

    /// `min (c_{k+1} − c_k)`.
    pub fn speed_gap(&self) -> f64 {
        self.speeds
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, s: f64) -> ChainSpec {
        ChainSpec {
            centers: self.centers.iter().map(|a| a + s).collect(),
            ..self.clone()
        }
    }

    /// Centers moved along their own speeds, `a + c t`.
    pub fn advanced(&self, t: f64) -> ChainSpec {
        ChainSpec {
            centers: self
                .centers
                .iter()
                .zip(&self.speeds)
                .map(|(a, c)| a + c * t)
                .collect(),
            ..self.clone()
        }
    }
}

pub fn separation(centers: &[f64]) -> f64 {
    centers
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// One profile per speed, solved once and reused for any centers.
#[derive(Clone, Debug)]
pub struct ChainProfiles {
    pub profiles: Vec<TravelingWaveProfile>,
}

impl ChainProfiles {
    pub fn solve(nl: &Nonlinearity, speeds: &[f64]) -> Result<Self> {
        let profiles = speeds
            .iter()
            .map(|&c| solve_profile_default(nl, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profiles })
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.profiles.iter().map(|p| p.c).collect()
    }
}

/// Samples of one shifted wave: `(η, ∂xη, v, ∂xv)`.
pub struct ShiftedWave {
    pub eta: Vec<f64>,
    pub eta_x: Vec<f64>,
    pub v: Vec<f64>,
    pub v_x: Vec<f64>,
}

pub fn sample_shifted(p: &TravelingWaveProfile, grid: &Grid, a: f64) -> ShiftedWave {
    let n = grid.n;
    let mut out = ShiftedWave {
        eta: Vec::with_capacity(n),
        eta_x: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        v_x: Vec::with_capacity(n),
    };
    let c = p.c;
    for j in 0..n {
        let (e, d) = p.eval(grid.x(j) - a);
        let one = 1.0 - e;
        out.eta.push(e);
        out.eta_x.push(d);
        out.v.push(0.5 * c * e / one);
        out.v_x.push(0.5 * c * d / (one * one));
    }
    out
}

/// Sum of shifted profiles with the vacuum guard.
pub fn build_hydro_chain_with(profiles: &ChainProfiles, centers: &[f64], grid: &Grid) -> Result<HydroField> {
    if profiles.profiles.len() != centers.len() {
        return Err(Error::InvalidParameter(format!(
            "{} profiles for {} centers",
            profiles.profiles.len(),
            centers.len()
        )));
    }
    let mut q = HydroField::zeros(*grid);
    for (p, &a) in profiles.profiles.iter().zip(centers) {
        for j in 0..grid.n {
            let e = p.eta_at(grid.x(j) - a);
            q.eta[j] += e;
            q.v[j] += 0.5 * p.c * e / (1.0 - e);
        }
    }
    let (max_eta, i) = q.max_eta();
    if max_eta >= 1.0 {
        return Err(Error::VacuumBreach {
            x: grid.x(i),
            max_eta,
        });
    }
    Ok(q)
}

/// Check that every center sits at least `decay_lengths` decay lengths away
/// from the grid ends.
pub fn check_margin(nl: &Nonlinearity, spec: &ChainSpec, grid: &Grid, decay_lengths: f64) -> Result<()> {
    let (lo, hi) = (grid.x0, grid.x_max());
    for (&c, &a) in spec.speeds.iter().zip(&spec.centers) {
        let k = crate::profile::decay_rate(nl, c);
        let need = decay_lengths / k;
        if a - lo < need || hi - a < need {
            return Err(Error::InvalidParameter(format!(
                "center {a} (speed {c}) is closer than {need:.3} to the grid ends [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// `R^hy`: the plain sum of shifted profile pairs.
pub fn build_hydro_chain(nl: &Nonlinearity, spec: &ChainSpec, grid: &Grid) -> Result<HydroField> {
    spec.validate()?;
    check_margin(nl, spec, grid, 15.0)?;
    let profiles = ChainProfiles::solve(nl, &spec.speeds)?;
    build_hydro_chain_with(&profiles, &spec.centers, grid)
}

/// `R^or = sqrt(1 − η) exp(−i∫_0^x v + iΘ)` of the hydrodynamic chain.
pub fn build_original_chain(nl: &Nonlinearity, spec: &ChainSpec, grid: &Grid) -> Result<WaveField> {
    let q = build_hydro_chain(nl, spec, grid)?;
    to_original(&q, spec.theta)
}

/// Total phase decrement of a field.
pub fn winding(w: &WaveField) -> f64 {
    w.winding()
}

/// `‖q − R^hy(spec)‖` in `H¹ × L²`.
pub fn hydro_distance_to_chain(q: &HydroField, nl: &Nonlinearity, spec: &ChainSpec) -> Result<f64> {
    let profiles = ChainProfiles::solve(nl, &spec.speeds)?;
    hydro_distance_with(q, &profiles, &spec.centers)
}

pub fn hydro_distance_with(q: &HydroField, profiles: &ChainProfiles, centers: &[f64]) -> Result<f64> {
    let r = build_hydro_chain_with(profiles, centers, &q.grid)?;
    Ok(hydro_norm(&q.sub(&r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::gp_exact_eta;
    use num_complex::Complex64;

    #[test]
    fn separation_and_flags() {
        let s = ChainSpec::new(vec![0.5, 0.6, 0.7], vec![0.0, 30.0, 45.0], 0.0).unwrap();
        assert_eq!(s.separation(), 15.0);
        assert!(s.is_ordered());
        assert!(s.is_separated(14.0));
        assert!(!s.is_separated(15.0));
        assert!(ChainSpec::new(vec![0.5], vec![0.0, 1.0], 0.0).is_err());
        let mut f = s.clone();
        f.separation_floor = Some(20.0);
        assert!(matches!(f.validate(), Err(Error::Separation { .. })));
    }

    #[test]
    fn empty_chain_is_background() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(20.0, 0.05).unwrap();
        let w = build_original_chain(&gp, &ChainSpec::empty(), &g).unwrap();
        assert!(w.psi.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        assert_eq!(winding(&w), 0.0);
        let tw = WaveField::constant(g, Complex64::from_polar(1.0, 0.4));
        assert!(winding(&tw).abs() < 1e-15);
    }

    #[test]
    fn two_chain_maximum_and_vacuum_breach() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(60.0, 0.05).unwrap();
        let spec = ChainSpec::new(vec![0.6, 1.0], vec![-15.0, 15.0], 0.0).unwrap();
        let q = build_hydro_chain(&gp, &spec, &g).unwrap();
        let (m, i) = q.max_eta();
        assert!((m - 0.82).abs() < 1e-6);
        assert!((g.x(i) + 15.0).abs() < 1e-9);
        let close = ChainSpec::new(vec![0.3, 0.4], vec![0.0, 0.1], 0.0).unwrap();
        assert!(matches!(
            build_hydro_chain(&gp, &close, &g),
            Err(Error::VacuumBreach { .. })
        ));
    }

    #[test]
    fn single_wave_matches_profile_and_transform() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(40.0, 0.02).unwrap();
        let spec = ChainSpec::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let q = build_hydro_chain(&gp, &spec, &g).unwrap();
        for (j, x) in g.xs().into_iter().enumerate() {
            assert!((q.eta[j] - gp_exact_eta(1.0, x)).abs() < 1e-9);
        }
        let w = build_original_chain(&gp, &spec, &g).unwrap();
        let direct = to_original(&q, 0.0).unwrap();
        assert_eq!(w, direct);
        for j in 0..g.n {
            assert!((w.psi[j].norm_sqr() + q.eta[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn winding_is_additive() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(80.0, 0.02).unwrap();
        let spec = ChainSpec::new(vec![0.6, 1.0], vec![-15.0, 15.0], 0.0).unwrap();
        let w = build_original_chain(&gp, &spec, &g).unwrap();
        // single jumps by an independent quadrature of the closed form
        let jump = |c: f64| {
            let h = 1e-3;
            (0..80_001)
                .map(|i| {
                    let x = -40.0 + i as f64 * h;
                    let e = gp_exact_eta(c, x);
                    let wgt = if i == 0 || i == 80_000 { 0.5 } else { 1.0 };
                    wgt * h * 0.5 * c * e / (1.0 - e)
                })
                .sum::<f64>()
        };
        let total = jump(0.6) + jump(1.0);
        assert!((winding(&w) - total).abs() < 1e-8, "{} vs {total}", winding(&w));
    }

    #[test]
    fn translation_equivariance() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(60.0, 0.05).unwrap();
        let spec = ChainSpec::new(vec![0.6, 1.0], vec![-15.0, 15.0], 0.0).unwrap();
        let a = build_hydro_chain(&gp, &spec, &g).unwrap();
        let b = build_hydro_chain(&gp, &spec.shifted(0.5), &g).unwrap();
        for j in 0..g.n - 10 {
            assert!((b.eta[j + 10] - a.eta[j]).abs() < 1e-10);
            assert!((b.v[j + 10] - a.v[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn distance_to_own_chain_is_zero() {
        let gp = Nonlinearity::gross_pitaevskii();
        let g = Grid::symmetric(60.0, 0.05).unwrap();
        let spec = ChainSpec::new(vec![0.6, 1.0], vec![-15.0, 15.0], 0.0).unwrap();
        let q = build_hydro_chain(&gp, &spec, &g).unwrap();
        assert_eq!(hydro_distance_to_chain(&q, &gp, &spec).unwrap(), 0.0);
    }
}
