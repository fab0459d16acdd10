use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::problem::{sin_kink_coeff, Potential, PotentialKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliasNorm {
    /// `(Σ_{|g| ≤ 2N} |Σ_{0 < |k| ≤ K} V̂_{g + k N_g}|²)^{1/2}`.
    pub value: f64,
    /// Upper bound on the contribution of the neglected `|k| > K` terms.
    pub tail_bound: f64,
}

/// Default inner truncation `10 ⌈N_g / N⌉`.
pub fn default_tail(n: usize, ng: usize) -> usize {
    10 * ng.div_ceil(n.max(1))
}

/// `‖Π_{2N}(V − I_{N_g} V)‖_{L²}` for the kinked sine, from the aliasing sum
/// over exact coefficients. Requires `N_g ≥ 4N + 1`.
pub fn alias_error_norm(pot: &Potential, n: usize, ng: usize, ktail: usize) -> Result<AliasNorm> {
    if pot.kind != PotentialKind::SinKink {
        return Err(Error::UnsupportedExactCoefficients(pot.kind.name()));
    }
    if ng < 4 * n + 1 {
        return Err(Error::Precondition(format!(
            "N_g = {ng} must be at least 4N + 1 = {}",
            4 * n + 1
        )));
    }
    if ktail < 2 {
        return Err(Error::Argument(
            "inner truncation must be at least 2".into(),
        ));
    }
    let (n, ng, kt) = (n as i64, ng as i64, ktail as i64);
    let mut total = 0.0;
    for g in -2 * n..=2 * n {
        let mut inner = 0.0;
        // Pair k with −k and sum small terms first.
        for k in (1..=kt).rev() {
            inner += sin_kink_coeff(g + k * ng) + sin_kink_coeff(g - k * ng);
        }
        total += inner * inner;
    }
    // |g + kN_g| ≥ (|k| − ½) N_g since 2N < N_g/2, and Σ_{k>K} (k − ½)^{-2} ≤ 1/(K − ½).
    let per_mode = 4.0 / ((2.0 * PI).sqrt() * (ng * ng) as f64 * (kt as f64 - 0.5));
    let tail_bound = per_mode * ((4 * n + 1) as f64).sqrt();
    Ok(AliasNorm {
        value: total.sqrt(),
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{dft, SampledGrid};

    /// `Π_{2N}(V − I_{N_g} V)` coefficient by coefficient: exact V̂ minus the
    /// transform of exact samples.
    fn brute_force(n: usize, ng: usize) -> f64 {
        let pot = Potential::sin_kink();
        let samples = SampledGrid::sample(ng, |x| pot.value(&[x])).unwrap();
        let spectrum = dft(&samples);
        let s = (2.0 * PI).sqrt();
        let m = 2 * n as i64;
        (-m..=m)
            .map(|g| (pot.fourier_coeff(g).unwrap() - s * spectrum.get(g).re).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn agrees_with_brute_force() {
        let pot = Potential::sin_kink();
        let b = brute_force(30, 128);
        // K = 64 leaves a tail of relative size ~1e-2; the reported bound covers it.
        let a = alias_error_norm(&pot, 30, 128, 64).unwrap();
        assert!(
            (a.value - b).abs() <= a.tail_bound,
            "{} vs {} (bound {})",
            a.value,
            b,
            a.tail_bound
        );
        // Four digits need the inner sum to run much further.
        let a = alias_error_norm(&pot, 30, 128, 20_000).unwrap();
        assert!((a.value - b).abs() <= 1e-4 * b, "{} vs {}", a.value, b);
        assert!((a.value - b).abs() <= a.tail_bound);
    }

    #[test]
    fn precondition_and_kind() {
        let pot = Potential::sin_kink();
        assert!(matches!(
            alias_error_norm(&pot, 30, 120, 10),
            Err(Error::Precondition(_))
        ));
        assert!(alias_error_norm(&Potential::zero(), 1, 8, 10).is_err());
    }

    #[test]
    fn scales_like_sqrt_n_over_ng_squared() {
        let pot = Potential::sin_kink();
        let mut scaled = Vec::new();
        for n in [10usize, 20, 30] {
            for p in 7..=12 {
                let ng = 1usize << p;
                let a = alias_error_norm(&pot, n, ng, default_tail(n, ng)).unwrap();
                scaled.push(a.value * (ng * ng) as f64 / (n as f64).sqrt());
            }
        }
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo <= 3.0, "spread {lo}..{hi}");
    }
}
