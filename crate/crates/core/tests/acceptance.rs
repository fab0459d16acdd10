//! One pass/fail line per acceptance criterion. Runs the full-size studies,
//! so build with optimizations (the test profile already does).
//!
//! Exits 0 even when a criterion fails so the rest of the suite still runs;
//! set `ACCEPTANCE_STRICT=1` to turn failures into a non-zero exit.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use groundstate::analysis::{
    convergence_study, lambda_decomposition, quadrature_study, solve_adjoint, ReferenceSpec,
    StudyFamily, StudyOptions, StudyTable,
};
use groundstate::fourier::{
    assemble_hamiltonian, interpolate, nonlinear_density_coeffs, nonlinear_potential_coeffs,
    potential_coeffs, synthesize, PotentialAssembly, SampledGrid,
};
use groundstate::problem::{Geometry, Nonlinearity, Potential, ProblemSpec};
use groundstate::scf::{
    energy, rayleigh_value, solve_ground_state, Discretization, SCFConfig, State,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Slope targets and half-widths for the Fourier study.
const FOURIER_TARGETS: [(&str, f64, f64); 4] = [
    ("H1", -2.67, 0.15),
    ("L2", -3.67, 0.20),
    ("Hm1", -4.67, 0.25),
    ("lambda", -5.0, 0.30),
];
const FOURIER_BUDGET: Duration = Duration::from_secs(30);
// Regularity of the kinked sine is 3/2 - ε.
const SIGMA_EPS: f64 = 0.05;

const P1_TARGETS: [(&str, f64); 3] = [("H1", 1.0), ("L2", 2.0), ("lambda", 2.0)];
const P2_TARGETS: [(&str, f64); 3] = [("H1", 2.0), ("L2", 3.0), ("lambda", 4.0)];
const P1_WIDTH: f64 = 0.15;
const P2_WIDTH: f64 = 0.20;
const FEM_BUDGET: Duration = Duration::from_secs(300);

const QUAD_SLOPE: f64 = -2.0;
const QUAD_WIDTH: f64 = 0.2;
const QUAD_REL: f64 = 0.01;
const QUAD_BUDGET: Duration = Duration::from_secs(60);

const ORACLE_LAMBDA: f64 = 1e-8;
const ORACLE_STATE: f64 = 1e-6;

const QUARTIC_REL: f64 = 1e-11;
const CONVOLUTION_TOL: f64 = 1e-12;
const ROUNDTRIP_TOL: f64 = 1e-12;

const FIXED_POINT_TOL: f64 = 1e-12;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn slope(t: &StudyTable, col: &str) -> f64 {
    t.slope(col).unwrap_or(f64::NAN)
}

fn opts() -> StudyOptions {
    StudyOptions {
        jobs: 1,
        ..StudyOptions::default()
    }
}

fn criterion_fourier() -> (Outcome, Outcome) {
    let start = Instant::now();
    let family = StudyFamily::Fourier {
        ns: (4..=30).collect(),
    };
    let t = match convergence_study(
        &ProblemSpec::sin_kink_benchmark(),
        &family,
        &ReferenceSpec::Fourier { n: 65 },
        &opts(),
    ) {
        Ok(t) => t,
        Err(e) => return (outcome(false, e.to_string()), outcome(false, e.to_string())),
    };
    let elapsed = start.elapsed();
    let mut ok1 = elapsed < FOURIER_BUDGET;
    let mut parts = Vec::new();
    for (col, target, width) in FOURIER_TARGETS {
        let s = slope(&t, col);
        let pass = (s - target).abs() <= width;
        ok1 &= pass;
        parts.push(format!(
            "{col} {s:.3} (want {target} ± {width}{})",
            if pass { "" } else { ", out" }
        ));
    }
    let first = outcome(
        ok1,
        format!("{}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    );

    let sigma = 1.5 - SIGMA_EPS;
    let bounds = [
        ("H1", -(sigma + 2.0 - 1.0)),
        ("L2", -(sigma + 2.0)),
        ("Hm1", -(sigma + 3.0)),
        ("lambda", -2.0 * (sigma + 1.0)),
    ];
    let mut ok2 = true;
    let mut parts = Vec::new();
    for (col, bound) in bounds {
        let s = slope(&t, col);
        ok2 &= s <= bound;
        parts.push(format!("{col} {s:.3} <= {bound:.2}"));
    }
    (first, outcome(ok2, parts.join(", ")))
}

fn criterion_fem() -> Outcome {
    let start = Instant::now();
    let problem = ProblemSpec::harmonic_square_benchmark();
    let mut ok = true;
    let mut parts = Vec::new();
    for (degree, ns, targets, width) in [
        (1, vec![8, 16, 32, 64], P1_TARGETS, P1_WIDTH),
        (2, vec![4, 8, 16, 32], P2_TARGETS, P2_WIDTH),
    ] {
        let family = StudyFamily::Fem { degree, ns };
        match convergence_study(
            &problem,
            &family,
            &ReferenceSpec::Fem {
                degree: 2,
                factor: 8,
            },
            &opts(),
        ) {
            Ok(t) => {
                for (col, target) in targets {
                    let s = slope(&t, col);
                    ok &= (s - target).abs() <= width;
                    parts.push(format!("P{degree} {col} {s:.3} (want {target} ± {width})"));
                }
            }
            Err(e) => {
                ok = false;
                parts.push(format!("P{degree}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < FEM_BUDGET;
    outcome(
        ok,
        format!("{}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn criterion_quadrature() -> Outcome {
    let start = Instant::now();
    let ngs: Vec<usize> = (7..=15).map(|p| 1usize << p).collect();
    let t = match quadrature_study(
        &ProblemSpec::sin_kink_benchmark(),
        30,
        &ngs,
        &ReferenceSpec::Fourier { n: 65 },
        &opts(),
    ) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = start.elapsed();
    let mut ok = elapsed < QUAD_BUDGET;
    let mut parts = Vec::new();
    for col in ["H1_int", "L2_int", "Hm1_int", "lambda_int"] {
        let s = slope(&t, col);
        ok &= (s - QUAD_SLOPE).abs() <= QUAD_WIDTH;
        parts.push(format!("{col} slope {s:.3}"));
    }
    let exact = &t.metadata["exact_assembly_errors"];
    let finest = *ngs.last().expect("non-empty") as f64;
    for col in ["H1", "L2", "Hm1", "lambda"] {
        let grid = t.value(finest, col).unwrap_or(f64::NAN);
        let ex = exact[col].as_f64().unwrap_or(f64::NAN);
        let rel = (grid - ex).abs() / ex;
        let pass = rel <= QUAD_REL;
        ok &= pass;
        parts.push(format!(
            "{col} at 2^15 {grid:.4e} vs exact {ex:.4e} ({:.2}%{})",
            100.0 * rel,
            if pass { "" } else { ", out" }
        ));
    }
    outcome(
        ok,
        format!("{}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn criterion_oracle() -> Outcome {
    let problem = ProblemSpec::sin_kink_benchmark();
    let cfg = SCFConfig {
        tol_density: 1e-13,
        tol_lambda: 1e-14,
        ..SCFConfig::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 6] {
        let bf = common::BruteForce::solve(n);
        match solve_ground_state(&problem, &Discretization::fourier(n), &cfg) {
            Ok(r) => {
                let u = r.u.as_fourier().expect("Fourier state").clone();
                let dl = (r.lambda - bf.lambda).abs();
                let du = bf.l2_distance(|x| u.eval(x).re);
                ok &= dl <= ORACLE_LAMBDA && du <= ORACLE_STATE;
                parts.push(format!("N={n} |dλ| {dl:.1e} ‖du‖ {du:.1e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("N={n}: {e}"));
            }
        }
    }
    outcome(ok, parts.join(", "))
}

fn criterion_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut quartic, mut conv, mut roundtrip): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let n = rng.gen_range(1..=20usize);
        let v = common::random_coeffs(n, &mut rng);
        let ng = 4 * n + 1 + rng.gen_range(0..64usize);
        let grid = synthesize(&v, ng)
            .values()
            .iter()
            .map(|c| c.norm_sqr().powi(2))
            .sum::<f64>()
            * 2.0
            * PI
            / ng as f64;
        let exact = nonlinear_density_coeffs(&v).l2_norm().powi(2);
        quartic = quartic.max((grid - exact).abs() / exact);

        let slow = common::density_by_convolution(&v);
        conv =
            conv.max(nonlinear_density_coeffs(&v).sub(&slow).l2_norm() / slow.l2_norm().max(1.0));

        let back = interpolate(&synthesize(&v, ng)).resized(n);
        roundtrip = roundtrip.max(back.sub(&v).l2_norm() / v.l2_norm());
        let samples: Vec<f64> = (0..rng.gen_range(1..100usize))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let grid = SampledGrid::from_real(&samples).expect("non-empty");
        let again = synthesize(&interpolate(&grid), samples.len());
        let err = again
            .values()
            .iter()
            .zip(&samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        roundtrip = roundtrip.max(err);
    }
    outcome(
        quartic <= QUARTIC_REL && conv <= CONVOLUTION_TOL && roundtrip <= ROUNDTRIP_TOL,
        format!("quartic {quartic:.1e}, convolution {conv:.1e}, roundtrip {roundtrip:.1e} over 100 samples"),
    )
}

fn criterion_fixed_point() -> Outcome {
    let problem = ProblemSpec::new(
        Geometry::PeriodicInterval,
        Potential::zero(),
        Nonlinearity::quadratic(),
    )
    .expect("valid");
    let mut worst: f64 = 0.0;
    for n in [0usize, 1, 2, 4, 8, 16, 32, 64] {
        match solve_ground_state(&problem, &Discretization::fourier(n), &SCFConfig::default()) {
            Ok(r) => {
                worst = worst
                    .max((r.lambda - 1.0 / (2.0 * PI)).abs())
                    .max((r.energy - 1.0 / (8.0 * PI)).abs());
            }
            Err(e) => return outcome(false, format!("N={n}: {e}")),
        }
    }
    outcome(
        worst <= FIXED_POINT_TOL,
        format!("max deviation {worst:.1e} over N in 0..=64"),
    )
}

fn structural() -> Result<Vec<(&'static str, bool, String)>, groundstate::Error> {
    let problem = ProblemSpec::sin_kink_benchmark();
    let cfg = SCFConfig::default();
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let mut norm_dev: f64 = 0.0;
    let mut rayleigh_dev: f64 = 0.0;
    let mut energies = Vec::new();
    for n in 2..=30usize {
        let disc = Discretization::fourier(n);
        let r = solve_ground_state(&problem, &disc, &cfg)?;
        norm_dev = norm_dev.max((r.u.l2_norm() - 1.0).abs());
        rayleigh_dev = rayleigh_dev.max((rayleigh_value(&problem, &disc, &r.u)? - r.lambda).abs());
        energies.push(r.energy);
    }
    for (n, degree) in [(8, 1), (4, 2)] {
        let disc = Discretization::fem(n, degree);
        let r = solve_ground_state(&ProblemSpec::harmonic_square_benchmark(), &disc, &cfg)?;
        norm_dev = norm_dev.max((r.u.l2_norm() - 1.0).abs());
        rayleigh_dev = rayleigh_dev.max(
            (rayleigh_value(&ProblemSpec::harmonic_square_benchmark(), &disc, &r.u)? - r.lambda)
                .abs(),
        );
    }
    checks.push(("unit norm", norm_dev <= 1e-12, format!("{norm_dev:.1e}")));
    checks.push((
        "lambda = Rayleigh value",
        rayleigh_dev <= 1e-9,
        format!("{rayleigh_dev:.1e}"),
    ));
    let rise = energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push((
        "energy non-increasing in N",
        rise <= 1e-13,
        format!("largest step {rise:.1e}"),
    ));

    let n = 12;
    let vhat = potential_coeffs(&problem.potential, 2 * n, PotentialAssembly::Exact)?;
    let v = common::random_real_coeffs(n, &mut rng);
    let fhat = nonlinear_potential_coeffs(
        &nonlinear_density_coeffs(&v),
        &problem.nonlinearity,
        4 * n + 1,
    )?;
    let h = assemble_hamiltonian(&vhat, &fhat, n)?;
    let asym = (&h - h.adjoint()).norm() / h.norm();
    checks.push(("Hermitian assembly", asym <= 1e-15, format!("{asym:.1e}")));

    let disc = Discretization::fourier(n);
    let mut fd_err: f64 = 0.0;
    for _ in 0..5 {
        let w = common::random_real_coeffs(n, &mut rng);
        let eps = 1e-5;
        let ep = energy(&problem, &disc, &State::Fourier(v.axpy(eps, &w)))?;
        let em = energy(&problem, &disc, &State::Fourier(v.axpy(-eps, &w)))?;
        let fd = (ep - em) / (2.0 * eps);
        let av = &h * DVector::from_column_slice(v.as_slice());
        let exact: f64 = w
            .as_slice()
            .iter()
            .zip(av.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        fd_err = fd_err.max((fd - exact).abs() / exact.abs());
    }
    checks.push((
        "E'(v) = A_v v by finite differences",
        fd_err <= 1e-6,
        format!("relative {fd_err:.1e}"),
    ));

    let coarse = solve_ground_state(&problem, &Discretization::fourier(10), &cfg)?;
    let ref_disc = Discretization::fourier(40);
    let fine = solve_ground_state(&problem, &ref_disc, &cfg)?;
    let d = lambda_decomposition(&coarse.u, &fine.u, fine.lambda, &problem, &ref_disc)?;
    let defect = (d.term1 + d.term2 - (coarse.lambda - fine.lambda)).abs();
    checks.push((
        "term1 + term2 = lambda error",
        defect <= 1e-10,
        format!("defect {defect:.1e}"),
    ));

    let w1 = State::Fourier(common::random_real_coeffs(40, &mut rng));
    let w2 = State::Fourier(common::random_real_coeffs(40, &mut rng));
    let p1 = solve_adjoint(&w1, &fine.u, fine.lambda, &problem, &ref_disc)?.psi;
    let p2 = solve_adjoint(&w2, &fine.u, fine.lambda, &problem, &ref_disc)?.psi;
    let f = |s: &State| s.as_fourier().expect("Fourier").clone();
    let sym = (f(&w2).inner(&f(&p1)) - f(&w1).inner(&f(&p2))).norm();
    checks.push((
        "adjoint self-adjointness",
        sym <= 1e-10,
        format!("{sym:.1e}"),
    ));
    Ok(checks)
}

fn criterion_structural() -> Outcome {
    match structural() {
        Ok(checks) => {
            let ok = checks.iter().all(|c| c.1);
            let detail = checks
                .iter()
                .map(|(name, pass, d)| format!("{name} {d}{}", if *pass { "" } else { " FAIL" }))
                .collect::<Vec<_>>()
                .join(", ");
            outcome(ok, detail)
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: usize| only.as_ref().is_none_or(|o| o.contains(&i));
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    if wanted(1) || wanted(2) {
        let (a, b) = criterion_fourier();
        results.push((1, "Fourier convergence slopes", a));
        results.push((2, "Fourier slopes within theoretical bounds", b));
    }
    if wanted(3) {
        results.push((3, "P1/P2 finite-element rates", criterion_fem()));
    }
    if wanted(4) {
        results.push((4, "grid-assembled potential", criterion_quadrature()));
    }
    if wanted(5) {
        results.push((5, "brute-force minimizer agreement", criterion_oracle()));
    }
    if wanted(6) {
        results.push((6, "exact quadrature and transforms", criterion_exactness()));
    }
    if wanted(7) {
        results.push((7, "constant-state fixed point", criterion_fixed_point()));
    }
    if wanted(8) {
        results.push((8, "structural invariants", criterion_structural()));
    }

    let failed = results.iter().filter(|r| !r.2.ok).count();
    for (i, name, o) in &results {
        println!(
            "criterion {i} {}: {name}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
