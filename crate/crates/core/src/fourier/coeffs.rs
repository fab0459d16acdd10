use std::f64::consts::PI;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coefficients of `v = Σ_{|k| ≤ N} v̂_k e_k` with `e_k(x) = (2π)^{-1/2} e^{ikx}`.
///
/// `data[i]` holds `v̂_{i−N}`. Real functions satisfy `v̂_{−k} = conj(v̂_k)`.
/// In one dimension the mode norm `|k|_*` is the absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    n: usize,
    data: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        if data.len() % 2 == 0 {
            return Err(Error::Argument(format!(
                "coefficient vector length {} is not odd",
                data.len()
            )));
        }
        Ok(Self {
            n: (data.len() - 1) / 2,
            data,
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let data = (-(n as i64)..=n as i64).map(&mut f).collect();
        Self { n, data }
    }

    /// The basis function `e_k` as a coefficient vector with cutoff `n`.
    pub fn mode(n: usize, k: i64) -> Self {
        let mut v = Self::zeros(n);
        v.set(k, Complex64::new(1.0, 0.0));
        v
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// `v̂_k`, zero outside the stored range.
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[(k + self.n as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, k: i64, value: Complex64) {
        let idx = (k + self.n as i64) as usize;
        self.data[idx] = value;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n as i64;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - n, *c))
    }

    /// `Π_M v`: truncation to `|k| ≤ M`.
    pub fn project(&self, m: usize) -> Result<Self> {
        if m > self.n {
            return Err(Error::Argument(format!(
                "projection cutoff {m} exceeds stored cutoff {}",
                self.n
            )));
        }
        let start = self.n - m;
        Ok(Self {
            n: m,
            data: self.data[start..start + 2 * m + 1].to_vec(),
        })
    }

    /// Zero-extension to a larger cutoff.
    pub fn embed(&self, m: usize) -> Result<Self> {
        if m < self.n {
            return Err(Error::Argument(format!(
                "embedding cutoff {m} is below stored cutoff {}",
                self.n
            )));
        }
        let mut out = Self::zeros(m);
        out.data[m - self.n..m + self.n + 1].copy_from_slice(&self.data);
        Ok(out)
    }

    /// Brings `self` to cutoff `m` by truncation or zero-extension.
    pub fn resized(&self, m: usize) -> Self {
        if m <= self.n {
            self.project(m).expect("m <= n")
        } else {
            self.embed(m).expect("m >= n")
        }
    }

    /// `(Σ_k (1 + k²)^r |v̂_k|²)^{1/2}`; any real `r`.
    pub fn sobolev_norm(&self, r: f64) -> f64 {
        self.modes()
            .map(|(k, c)| (1.0 + (k * k) as f64).powf(r) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `∫ conj(self) other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let m = self.n.min(other.n) as i64;
        (-m..=m).map(|k| self.get(k).conj() * other.get(k)).sum()
    }

    /// `∫ v = (2π)^{1/2} v̂_0`.
    pub fn mean_integral(&self) -> Complex64 {
        self.get(0) * (2.0 * PI).sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.data {
            *c *= s;
        }
    }

    /// `self + alpha · other`, with the result at the larger cutoff.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Self {
        let m = self.n.max(other.n);
        let mut out = self.resized(m);
        for (k, c) in other.modes() {
            let idx = (k + m as i64) as usize;
            out.data[idx] += alpha * c;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// Largest violation of `v̂_{−k} = conj(v̂_k)`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        self.modes()
            .map(|(k, c)| (c - self.get(-k).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces `v` by the real part of the function it represents.
    pub fn symmetrize(&mut self) {
        let sym = Self::from_fn(self.n, |k| 0.5 * (self.get(k) + self.get(-k).conj()));
        *self = sym;
    }

    /// Evaluates `v(x)` directly from the series.
    pub fn eval(&self, x: f64) -> Complex64 {
        let norm = 1.0 / (2.0 * PI).sqrt();
        self.modes()
            .map(|(k, c)| c * Complex64::from_polar(norm, k as f64 * x))
            .sum()
    }
}

impl Serialize for FourierCoeffs {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.data.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierCoeffs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let data = pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        FourierCoeffs::from_vec(data).map_err(D::Error::custom)
    }
}
