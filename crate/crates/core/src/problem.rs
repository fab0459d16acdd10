//! The continuous problem: geometry, external potential and the power-law
//! nonlinearity, plus the closed-form ground states used as oracles.
//!
//! The energy being minimized over `‖v‖_{L²} = 1` is
//!
//! ```text
//! E(v) = ½ ∫ |∇v|² + ½ ∫ V v² + ½ ∫ F(v²)
//! ```
//!
//! and its Euler equation is `−Δu + V u + f(u²) u = λ u` with `f = F′`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power-law nonlinearity `F(ρ) = c ρ^m`.
///
/// `c = 0` describes the linear problem (`f ≡ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub c: f64,
    pub m: f64,
}

/// Value of `(F, f, f′)` at a given density. `fprime` is `None` where
/// `f′` blows up (`ρ = 0` with `m < 2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityValue {
    pub big_f: f64,
    pub f: f64,
    pub fprime: Option<f64>,
}

impl Nonlinearity {
    pub fn new(c: f64, m: f64) -> Result<Self> {
        let nl = Self { c, m };
        nl.validate()?;
        Ok(nl)
    }

    /// `F(ρ) = ρ²/2`, the Gross-Pitaevskii quartic term used by all the
    /// reproduction studies.
    pub fn quadratic() -> Self {
        Self { c: 0.5, m: 2.0 }
    }

    pub fn linear() -> Self {
        Self { c: 0.0, m: 2.0 }
    }

    pub fn is_linear(&self) -> bool {
        self.c == 0.0
    }

    /// `F(ρ) = c ρ²` makes `f(ρ)` a linear function of `ρ`, so the
    /// nonlinear matrix entries can be assembled exactly.
    pub fn is_quadratic(&self) -> bool {
        self.m == 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::Argument(format!(
                "nonlinearity coefficient c = {} must be >= 0",
                self.c
            )));
        }
        if !(self.m > 1.0 && self.m < 3.0) {
            return Err(Error::Argument(format!(
                "nonlinearity exponent m = {} must lie in (1, 3)",
                self.m
            )));
        }
        Ok(())
    }

    pub fn eval(&self, rho: f64) -> Result<NonlinearityValue> {
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::Domain(format!(
                "density must be nonnegative, got {rho}"
            )));
        }
        let fprime = if rho > 0.0 || self.m > 2.0 || self.c == 0.0 {
            Some(self.fprime(rho))
        } else if self.m == 2.0 {
            Some(self.c * 2.0)
        } else {
            None
        };
        Ok(NonlinearityValue {
            big_f: self.big_f(rho),
            f: self.f(rho),
            fprime,
        })
    }

    /// `F(ρ)`, unchecked.
    #[inline]
    pub fn big_f(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        self.c * rho.powf(self.m)
    }

    /// `f(ρ) = F′(ρ)`, unchecked. `f(0) = 0` since `m > 1`.
    #[inline]
    pub fn f(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if self.m == 2.0 {
            return 2.0 * self.c * rho;
        }
        self.c * self.m * rho.powf(self.m - 1.0)
    }

    /// `f′(ρ)`, unchecked. Infinite at `ρ = 0` when `m < 2`.
    #[inline]
    pub fn fprime(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if self.m == 2.0 {
            return 2.0 * self.c;
        }
        self.c * self.m * (self.m - 1.0) * rho.powf(self.m - 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    /// `V(x) = sin(|x − π|/2)` on `(0, 2π)`.
    SinKink,
    /// `V(x₁, x₂) = x₁² + x₂²`.
    Harmonic2d,
    /// Periodic potential given by equispaced samples on `[0, 2π)`; it is
    /// the trigonometric interpolant of the samples.
    CustomSamples,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Zero => "zero",
            PotentialKind::SinKink => "sin_kink",
            PotentialKind::Harmonic2d => "harmonic_2d",
            PotentialKind::CustomSamples => "custom_samples",
        }
    }
}

/// Regularity index recorded for potentials that are analytic.
pub const SMOOTH_SIGMA: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub kind: PotentialKind,
    /// Declared Sobolev regularity of `V`; only used to predict rates.
    pub sigma: f64,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Potential {
    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Zero,
            sigma: SMOOTH_SIGMA,
            params: Vec::new(),
        }
    }

    /// `V ∈ H^σ` for every `σ < 3/2`.
    pub fn sin_kink() -> Self {
        Self {
            kind: PotentialKind::SinKink,
            sigma: 1.5,
            params: Vec::new(),
        }
    }

    pub fn harmonic_2d() -> Self {
        Self {
            kind: PotentialKind::Harmonic2d,
            sigma: SMOOTH_SIGMA,
            params: Vec::new(),
        }
    }

    pub fn custom_samples(samples: Vec<f64>) -> Self {
        Self {
            kind: PotentialKind::CustomSamples,
            sigma: SMOOTH_SIGMA,
            params: samples,
        }
    }

    /// Pointwise value. `x` has one coordinate per space dimension.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::SinKink => ((x[0] - PI).abs() / 2.0).sin(),
            PotentialKind::Harmonic2d => x.iter().map(|xi| xi * xi).sum(),
            PotentialKind::CustomSamples => trig_interpolant(&self.params, x[0]),
        }
    }

    /// Exact Fourier coefficient `V̂_k = ∫ V ē_k`, `e_k = (2π)^{-1/2} e^{ikx}`.
    ///
    /// Only the kinked sine has a closed form. For `V(x) = sin(|x − π|/2)`
    /// the coefficients are `(−1)^{k+1} / (√(2π) (k² − 1/4))`; the sign
    /// alternation comes from the kink sitting at `x = π`.
    pub fn fourier_coeff(&self, k: i64) -> Result<f64> {
        match self.kind {
            PotentialKind::SinKink => Ok(sin_kink_coeff(k)),
            other => Err(Error::UnsupportedExactCoefficients(other.name())),
        }
    }
}

#[inline]
pub(crate) fn sin_kink_coeff(k: i64) -> f64 {
    let kf = k as f64;
    let sign = if k.rem_euclid(2) == 0 { -1.0 } else { 1.0 };
    sign / ((2.0 * PI).sqrt() * (kf * kf - 0.25))
}

/// Evaluates the trigonometric interpolant of equispaced periodic samples.
/// For an even sample count the Nyquist mode is split symmetrically.
fn trig_interpolant(samples: &[f64], x: f64) -> f64 {
    let n = samples.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let half = n / 2;
    let mut total = 0.0;
    for g in 0..=half {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, s) in samples.iter().enumerate() {
            let phase = -2.0 * PI * (g * j) as f64 / nf;
            re += s * phase.cos();
            im += s * phase.sin();
        }
        re /= nf;
        im /= nf;
        let gx = g as f64 * x;
        let term = re * gx.cos() - im * gx.sin();
        total += if g == 0 || (n % 2 == 0 && g == half) {
            term
        } else {
            2.0 * term
        };
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// `(0, 2π)` with periodic boundary conditions.
    PeriodicInterval,
    /// `(0, s₁) × … × (0, s_d)` with homogeneous Dirichlet conditions.
    DirichletRectangle { sides: Vec<f64> },
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::PeriodicInterval => 1,
            Geometry::DirichletRectangle { sides } => sides.len(),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Geometry::PeriodicInterval => 2.0 * PI,
            Geometry::DirichletRectangle { sides } => sides.iter().product(),
        }
    }
}

/// The continuous problem. The diffusion coefficient is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub geometry: Geometry,
    pub potential: Potential,
    pub nonlinearity: Nonlinearity,
}

impl ProblemSpec {
    pub fn new(
        geometry: Geometry,
        potential: Potential,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        let p = Self {
            geometry,
            potential,
            nonlinearity,
        };
        p.validate()?;
        Ok(p)
    }

    /// The periodic 1D benchmark: kinked sine potential, `F(ρ) = ρ²/2`.
    pub fn sin_kink_benchmark() -> Self {
        Self {
            geometry: Geometry::PeriodicInterval,
            potential: Potential::sin_kink(),
            nonlinearity: Nonlinearity::quadratic(),
        }
    }

    /// The 2D Dirichlet benchmark on `(0, π)²` with a harmonic potential.
    pub fn harmonic_square_benchmark() -> Self {
        Self {
            geometry: Geometry::DirichletRectangle {
                sides: vec![PI, PI],
            },
            potential: Potential::harmonic_2d(),
            nonlinearity: Nonlinearity::quadratic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        match &self.geometry {
            Geometry::PeriodicInterval => {
                if self.potential.kind == PotentialKind::Harmonic2d {
                    return Err(Error::Argument(
                        "harmonic_2d potential needs a 2D rectangle".into(),
                    ));
                }
            }
            Geometry::DirichletRectangle { sides } => {
                if sides.is_empty() || sides.len() > 2 {
                    return Err(Error::Argument(format!(
                        "rectangle dimension must be 1 or 2, got {}",
                        sides.len()
                    )));
                }
                if sides.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::Argument("rectangle sides must be positive".into()));
                }
                if self.potential.kind == PotentialKind::CustomSamples {
                    return Err(Error::Argument(
                        "custom_samples potentials are periodic only".into(),
                    ));
                }
            }
        }
        if self.potential.kind == PotentialKind::CustomSamples && self.potential.params.is_empty() {
            return Err(Error::Argument(
                "custom_samples potential needs at least one sample".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A closed-form ground state.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Constant(f64),
    /// `amplitude · Π_i sin(π x_i / s_i)`.
    SineProduct {
        amplitude: f64,
        sides: Vec<f64>,
    },
}

impl ClosedForm {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ClosedForm::Constant(c) => *c,
            ClosedForm::SineProduct { amplitude, sides } => {
                amplitude
                    * x.iter()
                        .zip(sides)
                        .map(|(xi, s)| (PI * xi / s).sin())
                        .product::<f64>()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticGroundState {
    pub u: ClosedForm,
    pub lambda: f64,
    pub energy: f64,
}

/// Looks up a closed-form ground state for the problem, if one is known.
///
/// * periodic, `V = 0`, any admissible `F`: the constant `(2π)^{-1/2}`
///   (Jensen's inequality makes it the minimizer), `λ = f(1/2π)`,
///   `E = π F(1/2π)`;
/// * Dirichlet rectangle, `V = 0`, linear: the first Laplace mode.
pub fn analytic_ground_state(problem: &ProblemSpec) -> Option<AnalyticGroundState> {
    if problem.potential.kind != PotentialKind::Zero {
        return None;
    }
    let nl = problem.nonlinearity;
    match &problem.geometry {
        Geometry::PeriodicInterval => {
            let rho = 1.0 / (2.0 * PI);
            Some(AnalyticGroundState {
                u: ClosedForm::Constant(rho.sqrt()),
                lambda: nl.f(rho),
                energy: PI * nl.big_f(rho),
            })
        }
        Geometry::DirichletRectangle { sides } if nl.is_linear() => {
            let lambda: f64 = sides.iter().map(|s| (PI / s).powi(2)).sum();
            let amplitude = sides.iter().map(|s| (2.0 / s).sqrt()).product();
            Some(AnalyticGroundState {
                u: ClosedForm::SineProduct {
                    amplitude,
                    sides: sides.clone(),
                },
                lambda,
                energy: 0.5 * lambda,
            })
        }
        _ => None,
    }
}

/// Error norms. `Hm1` is the dual `H^{-1}` norm, available for Fourier
/// discretizations only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    H1,
    L2,
    Hm1,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::H1 => "H1",
            Norm::L2 => "L2",
            Norm::Hm1 => "Hm1",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn nonlinearity_values() {
        let v = Nonlinearity::quadratic().eval(2.0).unwrap();
        assert!(close(v.big_f, 2.0, 1e-15) && close(v.f, 2.0, 1e-15));
        assert!(close(v.fprime.unwrap(), 1.0, 1e-15));

        let tf = Nonlinearity::new(1.0, 5.0 / 3.0)
            .unwrap()
            .eval(1.0)
            .unwrap();
        assert!(close(tf.big_f, 1.0, 1e-15));
        assert!(close(tf.f, 5.0 / 3.0, 1e-15));
        assert!(close(tf.fprime.unwrap(), 10.0 / 9.0, 1e-15));

        let zero = Nonlinearity::quadratic().eval(0.0).unwrap();
        assert_eq!((zero.big_f, zero.f), (0.0, 0.0));
        assert!(close(zero.fprime.unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn fprime_undefined_at_zero_for_small_exponent() {
        let tf = Nonlinearity::new(1.0, 5.0 / 3.0).unwrap();
        assert_eq!(tf.eval(0.0).unwrap().fprime, None);
        let cubic = Nonlinearity::new(1.0, 2.5).unwrap();
        assert_eq!(cubic.eval(0.0).unwrap().fprime, Some(0.0));
    }

    #[test]
    fn negative_density_is_a_domain_error() {
        assert!(matches!(
            Nonlinearity::quadratic().eval(-1e-3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exponent_outside_admissible_range_rejected() {
        assert!(Nonlinearity::new(1.0, 3.0).is_err());
        assert!(Nonlinearity::new(1.0, 1.0).is_err());
        assert!(Nonlinearity::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn convexity_and_growth_on_a_grid() {
        for &m in &[1.2, 5.0 / 3.0, 2.0, 2.7] {
            let nl = Nonlinearity::new(0.7, m).unwrap();
            let q = m - 1.0;
            let mut prev = nl.f(0.0);
            for i in 1..2000 {
                let rho = i as f64 * 0.01;
                let f = nl.f(rho);
                assert!(f > prev, "f not increasing at rho={rho}, m={m}");
                assert!(f.abs() <= nl.c * m * (1.0 + rho.powf(q)) + 1e-12);
                prev = f;
            }
        }
    }

    #[test]
    fn sin_kink_coefficients() {
        let s = (2.0 * PI).sqrt();
        let v = Potential::sin_kink();
        assert!(close(v.fourier_coeff(0).unwrap(), 4.0 / s, 1e-14));
        assert!(close(v.fourier_coeff(0).unwrap(), 1.595769, 1e-6));
        // V(x) = sin(|x−π|/2) has its kink at π: V̂_1 = +4/(3√2π).
        assert!(close(v.fourier_coeff(1).unwrap(), 4.0 / (3.0 * s), 1e-14));
        assert_eq!(v.fourier_coeff(10).unwrap(), v.fourier_coeff(-10).unwrap());
        assert!(close(
            v.fourier_coeff(10).unwrap().abs(),
            1.0 / s / 99.75,
            1e-14
        ));
        for k in 50..400 {
            let ratio = v.fourier_coeff(k).unwrap().abs() * (k * k) as f64 * s;
            assert!((ratio - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn sin_kink_coefficients_match_quadrature() {
        // Midpoint rule on a fine grid is accurate to O(h²) for the kink.
        let v = Potential::sin_kink();
        let n = 200_000;
        let h = 2.0 * PI / n as f64;
        for k in [0i64, 1, 2, 3, 7] {
            let mut acc = 0.0;
            for j in 0..n {
                let x = (j as f64 + 0.5) * h;
                acc += v.value(&[x]) * (k as f64 * x).cos();
            }
            let quad = acc * h / (2.0 * PI).sqrt();
            assert!((quad - v.fourier_coeff(k).unwrap()).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn exact_coefficients_only_for_sin_kink() {
        assert!(matches!(
            Potential::zero().fourier_coeff(0),
            Err(Error::UnsupportedExactCoefficients("zero"))
        ));
        assert!(Potential::custom_samples(vec![1.0, 2.0])
            .fourier_coeff(1)
            .is_err());
    }

    #[test]
    fn custom_samples_interpolate() {
        let samples: Vec<f64> = (0..8)
            .map(|j| (2.0 * PI * j as f64 / 8.0).cos() + 0.5)
            .collect();
        let v = Potential::custom_samples(samples.clone());
        for (j, s) in samples.iter().enumerate() {
            assert!(close(v.value(&[2.0 * PI * j as f64 / 8.0]), *s, 1e-13));
        }
        assert!(close(v.value(&[0.3]), 0.3f64.cos() + 0.5, 1e-13));
    }

    #[test]
    fn analytic_states() {
        let mut p = ProblemSpec {
            geometry: Geometry::PeriodicInterval,
            potential: Potential::zero(),
            nonlinearity: Nonlinearity::quadratic(),
        };
        let gs = analytic_ground_state(&p).unwrap();
        assert!(close(gs.lambda, 1.0 / (2.0 * PI), 1e-15));
        assert!(close(gs.lambda, 0.1591549, 1e-7));
        assert!(close(gs.energy, 1.0 / (8.0 * PI), 1e-15));
        assert!(close(gs.energy, 0.0397887, 1e-6));

        p.geometry = Geometry::DirichletRectangle { sides: vec![PI] };
        p.nonlinearity = Nonlinearity::linear();
        let gs = analytic_ground_state(&p).unwrap();
        assert!(close(gs.lambda, 1.0, 1e-15));
        assert!(close(gs.u.value(&[PI / 2.0]), (2.0 / PI).sqrt(), 1e-15));

        assert!(analytic_ground_state(&ProblemSpec::sin_kink_benchmark()).is_none());
    }

    #[test]
    fn json_round_trip() {
        let p = ProblemSpec::harmonic_square_benchmark();
        let text = p.to_json().unwrap();
        assert!(text.contains("\"dirichlet_rectangle\""));
        assert_eq!(ProblemSpec::from_json(&text).unwrap(), p);

        let raw = r#"{"geometry":{"kind":"periodic_interval"},
                      "potential":{"kind":"sin_kink","sigma":1.5,"params":[]},
                      "nonlinearity":{"c":0.5,"m":2.0}}"#;
        assert_eq!(
            ProblemSpec::from_json(raw).unwrap(),
            ProblemSpec::sin_kink_benchmark()
        );
    }
}
