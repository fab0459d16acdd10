//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use groundstate::fourier::FourierCoeffs;
use num_complex::Complex64;
use rand::Rng;

pub fn random_coeffs(n: usize, rng: &mut impl Rng) -> FourierCoeffs {
    FourierCoeffs::from_fn(n, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Coefficients of a real function: `v_{−k} = conj(v_k)`.
pub fn random_real_coeffs(n: usize, rng: &mut impl Rng) -> FourierCoeffs {
    let mut v = random_coeffs(n, rng);
    for k in 0..=n as i64 {
        let c = v.get(k);
        v.set(-k, c.conj());
        if k == 0 {
            v.set(0, Complex64::new(c.re, 0.0));
        }
    }
    v
}

/// `ρ̂_g = (2π)^{-1/2} Σ_k u_k conj(u_{k−g})`, summed term by term.
pub fn density_by_convolution(u: &FourierCoeffs) -> FourierCoeffs {
    let n = u.cutoff() as i64;
    FourierCoeffs::from_fn(2 * n as usize, |g| {
        let mut s = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            let l = k - g;
            if l.abs() <= n {
                s += u.get(k) * u.get(l).conj();
            }
        }
        s / (2.0 * PI).sqrt()
    })
}

/// Gauss-Legendre nodes and weights on `[a, b]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w));
    }
    out
}

/// Ground state of the kinked-sine benchmark in the real trigonometric
/// basis of degree `n`, by projected gradient descent on the unit sphere.
/// Integrals use Gauss-Legendre rules on each smooth half of the period.
pub struct BruteForce {
    pub n: usize,
    pub coeffs: Vec<f64>,
    pub lambda: f64,
    pub energy: f64,
    pub iterations: usize,
    nodes: Vec<(f64, f64)>,
}

fn basis(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut v, mut d) = (vec![(2.0 * PI).sqrt().recip()], vec![0.0]);
    let s = PI.sqrt().recip();
    for k in 1..=n {
        let kf = k as f64;
        v.push(s * (kf * x).cos());
        d.push(-s * kf * (kf * x).sin());
        v.push(s * (kf * x).sin());
        d.push(s * kf * (kf * x).cos());
    }
    (v, d)
}

impl BruteForce {
    pub fn solve(n: usize) -> Self {
        let mut nodes = gauss_legendre(96, 0.0, PI);
        nodes.extend(gauss_legendre(96, PI, 2.0 * PI));
        let dim = 2 * n + 1;
        let tables: Vec<(Vec<f64>, Vec<f64>)> = nodes.iter().map(|&(x, _)| basis(n, x)).collect();
        let mut a = vec![vec![0.0; dim]; dim];
        for (&(x, w), (phi, dphi)) in nodes.iter().zip(&tables) {
            let pot = ((x - PI).abs() / 2.0).sin();
            for i in 0..dim {
                for j in 0..dim {
                    a[i][j] += w * (dphi[i] * dphi[j] + pot * phi[i] * phi[j]);
                }
            }
        }
        let eval = |c: &[f64], phi: &[f64]| phi.iter().zip(c).map(|(p, c)| p * c).sum::<f64>();
        // (gradient, energy) with F(ρ) = ρ²/2, i.e. ¼∫v⁴ and gradient ∫v³φ.
        let grad = |c: &[f64]| -> (Vec<f64>, f64) {
            let mut g: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| a[i][j] * c[j]).sum())
                .collect();
            let mut e = 0.5 * g.iter().zip(c).map(|(g, c)| g * c).sum::<f64>();
            for (&(_, w), (phi, _)) in nodes.iter().zip(&tables) {
                let v = eval(c, phi);
                e += 0.25 * w * v.powi(4);
                for i in 0..dim {
                    g[i] += w * v.powi(3) * phi[i];
                }
            }
            (g, e)
        };
        let tau = 1.0 / (n * n) as f64 / 1.5;
        let mut c = vec![0.0; dim];
        c[0] = 1.0;
        let mut iterations = 0;
        let (mut lambda, mut energy);
        loop {
            let (g, e) = grad(&c);
            lambda = g.iter().zip(&c).map(|(g, c)| g * c).sum::<f64>();
            energy = e;
            let r: Vec<f64> = g.iter().zip(&c).map(|(g, c)| g - lambda * c).collect();
            let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if rn < 1e-13 || iterations >= 200_000 {
                break;
            }
            for (ci, ri) in c.iter_mut().zip(&r) {
                *ci -= tau * ri;
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            c.iter_mut().for_each(|x| *x /= norm);
            iterations += 1;
        }
        Self {
            n,
            coeffs: c,
            lambda,
            energy,
            iterations,
            nodes,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        basis(self.n, x)
            .0
            .iter()
            .zip(&self.coeffs)
            .map(|(p, c)| p * c)
            .sum()
    }

    /// `‖u − self‖_{L²}` after choosing the sign of `u`.
    pub fn l2_distance(&self, u: impl Fn(f64) -> f64) -> f64 {
        let (mut plus, mut minus) = (0.0, 0.0);
        for &(x, w) in &self.nodes {
            let (a, b) = (u(x), self.value(x));
            plus += w * (a - b).powi(2);
            minus += w * (a + b).powi(2);
        }
        plus.min(minus).sqrt()
    }
}
