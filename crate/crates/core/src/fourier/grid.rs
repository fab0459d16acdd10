//! Equispaced sampling grids on `[0, 2π)`, the discrete Fourier transform
//! and trigonometric interpolation.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::FourierCoeffs;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Samples `φ(2πj/N_g)`, `j = 0, …, N_g − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridJson", try_from = "GridJson")]
pub struct SampledGrid {
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    ng: usize,
    /// Interleaved `re, im` pairs.
    values: Vec<f64>,
}

impl From<SampledGrid> for GridJson {
    fn from(g: SampledGrid) -> Self {
        GridJson {
            ng: g.ng(),
            values: g.values.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<GridJson> for SampledGrid {
    type Error = String;

    fn try_from(j: GridJson) -> std::result::Result<Self, String> {
        if j.values.len() != 2 * j.ng || j.ng == 0 {
            return Err(format!(
                "grid header ng = {} does not match {} stored reals",
                j.ng,
                j.values.len()
            ));
        }
        Ok(SampledGrid {
            values: j
                .values
                .chunks(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        })
    }
}

impl SampledGrid {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Argument(
                "a sampling grid needs at least one point".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    pub fn sample(ng: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(
            (0..ng)
                .map(|j| Complex64::new(f(grid_point(ng, j)), 0.0))
                .collect(),
        )
    }

    #[inline]
    pub fn ng(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn points(&self) -> impl Iterator<Item = f64> {
        let ng = self.ng();
        (0..ng).map(move |j| grid_point(ng, j))
    }
}

#[inline]
pub fn grid_point(ng: usize, j: usize) -> f64 {
    2.0 * PI * j as f64 / ng as f64
}

/// `φ̂^FFT_g = (1/N_g) Σ_r φ(r) e^{−igr}`, an `N_g`-periodic sequence in `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    data: Vec<Complex64>,
}

impl DiscreteSpectrum {
    pub fn ng(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn get(&self, g: i64) -> Complex64 {
        self.data[g.rem_euclid(self.data.len() as i64) as usize]
    }

    /// Coefficients `(2π)^{1/2} φ̂^FFT_g` for `|g| ≤ m` in the `e_g` basis.
    /// For `|g| < N_g/2` these are the coefficients of `I_{N_g}(φ)`.
    pub fn to_coeffs(&self, m: usize) -> FourierCoeffs {
        let s = (2.0 * PI).sqrt();
        FourierCoeffs::from_fn(m, |g| self.get(g) * s)
    }
}

pub fn dft(samples: &SampledGrid) -> DiscreteSpectrum {
    let ng = samples.ng();
    let mut buf = samples.values.clone();
    forward_plan(ng).process(&mut buf);
    let inv = 1.0 / ng as f64;
    for c in &mut buf {
        *c *= inv;
    }
    DiscreteSpectrum { data: buf }
}

/// The expansion of `I_{N_g}(φ)` in the canonical basis of `W_{N_g}`,
/// returned with cutoff `⌊N_g/2⌋`. For even `N_g` the Nyquist coefficient is
/// split evenly between `e_{N_g/2}` and `e_{−N_g/2}`.
pub fn interpolate(samples: &SampledGrid) -> FourierCoeffs {
    let ng = samples.ng();
    let spectrum = dft(samples);
    let half = ng / 2;
    let mut out = spectrum.to_coeffs(half);
    if ng % 2 == 0 {
        let s = (2.0 * PI).sqrt();
        let nyquist = spectrum.get(half as i64) * (0.5 * s);
        out.set(half as i64, nyquist);
        out.set(-(half as i64), nyquist);
    }
    out
}

/// Values of `v = Σ v̂_k e_k` at the `N_g` grid points. Modes with `|k| ≥
/// N_g/2` alias onto the grid.
pub fn synthesize(v: &FourierCoeffs, ng: usize) -> SampledGrid {
    let mut buf = vec![Complex64::new(0.0, 0.0); ng];
    for (k, c) in v.modes() {
        buf[k.rem_euclid(ng as i64) as usize] += c;
    }
    inverse_plan(ng).process(&mut buf);
    let norm = 1.0 / (2.0 * PI).sqrt();
    for c in &mut buf {
        *c *= norm;
    }
    SampledGrid { values: buf }
}

/// Smallest power of two that is at least `min`. Grids of this size keep
/// the transforms on the radix-2 fast path.
pub fn fft_size_at_least(min: usize) -> usize {
    min.max(1).next_power_of_two()
}

/// `∫_0^{2π} φ` by the rectangle rule on the grid; exact for trigonometric
/// polynomials of degree `< N_g`.
pub fn grid_integral(samples: &SampledGrid) -> Complex64 {
    samples.values.iter().sum::<Complex64>() * (2.0 * PI / samples.ng() as f64)
}
