use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::errors::{compare, ErrorSummary};
use super::linearized::{lambda_decomposition, RHO_FLOOR};
use super::table::{Column, StudyRow, StudyTable};
use crate::error::{Error, Result};
use crate::fourier::PotentialAssembly;
use crate::problem::ProblemSpec;
use crate::scf::{solve_fem, solve_ground_state, Discretization, SCFConfig, SolveResult, State};

/// Discretizations swept by a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StudyFamily {
    /// Fourier cutoffs `N`, exact potential coefficients.
    Fourier { ns: Vec<usize> },
    /// Lagrange elements of one degree on `n × n` meshes.
    Fem { degree: usize, ns: Vec<usize> },
}

/// The solve that plays the role of the exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Fourier cutoff `n` with exact potential coefficients.
    Fourier { n: usize },
    /// Degree `degree` on a mesh `factor` times finer than the finest
    /// study mesh, started from the finest study solution.
    Fem { degree: usize, factor: usize },
}

impl ReferenceSpec {
    pub fn default_for(family: &StudyFamily) -> Self {
        match family {
            StudyFamily::Fourier { .. } => ReferenceSpec::Fourier { n: 65 },
            StudyFamily::Fem { .. } => ReferenceSpec::Fem {
                degree: 2,
                factor: 8,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyOptions {
    /// Solver settings for the study rows.
    pub cfg: SCFConfig,
    /// Solver settings for the reference solve; its tolerances set the
    /// saturation floors.
    pub reference_cfg: SCFConfig,
    /// Worker threads for independent rows.
    pub jobs: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            cfg: SCFConfig::default(),
            reference_cfg: SCFConfig {
                tol_density: 1e-12,
                tol_lambda: 1e-13,
                damping: 1.0,
                ..SCFConfig::default()
            },
            jobs: 1,
        }
    }
}

impl StudyOptions {
    fn norm_floor(&self) -> f64 {
        100.0 * self.reference_cfg.tol_density
    }

    fn lambda_floor(&self) -> f64 {
        100.0 * self.reference_cfg.tol_lambda
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
    }
}

fn sorted_unique(ns: &[usize], what: &str) -> Result<Vec<usize>> {
    if ns.is_empty() {
        return Err(Error::Argument(format!("empty {what} list")));
    }
    let mut v = ns.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn study_error(param: f64, table: StudyTable, source: Error) -> Error {
    Error::Study {
        param,
        partial: Box::new(table),
        source: Box::new(source),
    }
}

fn reference_metadata(table: &mut StudyTable, reference: &SolveResult) {
    table
        .metadata
        .insert("reference_lambda".into(), json!(reference.lambda));
    table
        .metadata
        .insert("reference_energy".into(), json!(reference.energy));
    table
        .metadata
        .insert("reference_residual".into(), json!(reference.residual));
    table
        .metadata
        .insert("reference_iterations".into(), json!(reference.iterations));
}

fn sign_changes(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Errors, fitted rates and diagnostics for a family of discretizations.
pub fn convergence_study(
    problem: &ProblemSpec,
    family: &StudyFamily,
    reference: &ReferenceSpec,
    opts: &StudyOptions,
) -> Result<StudyTable> {
    problem.validate()?;
    opts.cfg.validate()?;
    opts.reference_cfg.validate()?;
    let (nf, lf) = (opts.norm_floor(), opts.lambda_floor());
    let fourier = matches!(family, StudyFamily::Fourier { .. });
    let mut columns = vec![Column::fitted("H1", nf), Column::fitted("L2", nf)];
    if fourier {
        columns.push(Column::fitted("Hm1", nf));
    }
    columns.extend([
        Column::fitted("lambda", lf),
        Column::fitted("energy", lf),
        Column::plain("lambda_signed"),
        Column::plain("term1"),
        Column::plain("term2"),
        Column::plain("energy_ratio"),
    ]);

    let (params, discs, ref_disc, parameter, abscissa, description) = match (family, reference) {
        (StudyFamily::Fourier { ns }, ReferenceSpec::Fourier { n: nref }) => {
            let ns = sorted_unique(ns, "cutoff")?;
            if ns.last().is_some_and(|n| n >= nref) {
                return Err(Error::Precondition(format!(
                    "reference cutoff {nref} is not above every study cutoff"
                )));
            }
            let discs: Vec<Discretization> =
                ns.iter().map(|&n| Discretization::fourier(n)).collect();
            let desc = format!("Fourier N = {nref}, exact potential coefficients");
            (ns, discs, Discretization::fourier(*nref), "N", "2N+1", desc)
        }
        (
            StudyFamily::Fem { degree, ns },
            ReferenceSpec::Fem {
                degree: rdeg,
                factor,
            },
        ) => {
            let ns = sorted_unique(ns, "mesh size")?;
            let nref = factor * ns.last().expect("non-empty");
            if *factor < 2 || rdeg < degree || ns.iter().any(|n| nref % n != 0) {
                return Err(Error::Precondition(format!(
                    "P{rdeg} on n = {nref} does not contain every study space"
                )));
            }
            let discs: Vec<Discretization> = ns
                .iter()
                .map(|&n| Discretization::fem(n, *degree))
                .collect();
            let desc = format!("P{rdeg} on n = {nref} ({factor}x the finest mesh), started from the finest study solution");
            (ns, discs, Discretization::fem(nref, *rdeg), "n", "h", desc)
        }
        _ => {
            return Err(Error::Argument(
                "reference family does not match the study family".into(),
            ))
        }
    };

    let mut table = StudyTable::new(parameter, abscissa, columns, description);
    table
        .metadata
        .insert("family".into(), serde_json::to_value(family)?);
    table
        .metadata
        .insert("reference_spec".into(), serde_json::to_value(reference)?);
    let pool = opts.pool()?;

    let solves: Vec<Result<SolveResult>> = pool.install(|| {
        discs
            .par_iter()
            .map(|d| solve_ground_state(problem, d, &opts.cfg))
            .collect()
    });

    let ref_result = if fourier {
        solve_ground_state(problem, &ref_disc, &opts.reference_cfg)
    } else {
        let space = ref_disc.fe_space(problem).map(Arc::new);
        let warm = solves
            .iter()
            .rev()
            .find_map(|r| r.as_ref().ok())
            .and_then(|r| r.u.as_fem());
        space.and_then(|s| solve_fem(problem, s, &opts.reference_cfg, warm))
    };
    let ref_param = match &ref_disc {
        Discretization::Fourier { n, .. } | Discretization::Fem { n, .. } => *n as f64,
    };
    let ref_result = match ref_result {
        Ok(r) => r,
        Err(e) => {
            table.partial = true;
            return Err(study_error(ref_param, table, e));
        }
    };
    reference_metadata(&mut table, &ref_result);
    if problem.nonlinearity.m < 2.0 {
        table.metadata.insert("rho_floor".into(), json!(RHO_FLOOR));
    }

    let rows: Vec<Result<StudyRow>> = pool.install(|| {
        params
            .par_iter()
            .zip(solves.par_iter())
            .map(|(&p, solve)| {
                let solve = solve.as_ref().map_err(clone_error)?;
                let e = compare(solve, &ref_result)?;
                let d = lambda_decomposition(
                    &solve.u,
                    &ref_result.u,
                    ref_result.lambda,
                    problem,
                    &ref_result.disc,
                )?;
                let x = match &solve.u {
                    State::Fourier(_) => (2 * p + 1) as f64,
                    State::Fem(f) => f.space.mesh.h,
                };
                Ok(StudyRow {
                    param: p as f64,
                    x,
                    values: row_values(&e, d.term1, d.term2),
                })
            })
            .collect()
    });

    let mut failure = None;
    for (p, row) in params.iter().zip(rows) {
        match row {
            Ok(r) => table.rows.push(r),
            Err(e) if failure.is_none() => failure = Some((*p as f64, e)),
            Err(_) => {}
        }
    }
    let signed = table
        .series("lambda_signed")
        .iter()
        .map(|(_, v)| *v)
        .collect::<Vec<_>>();
    table
        .metadata
        .insert("lambda_sign_changes".into(), json!(sign_changes(&signed)));
    table.refit();
    if let Some((p, e)) = failure {
        table.partial = true;
        return Err(study_error(p, table, e));
    }
    Ok(table)
}

fn row_values(e: &ErrorSummary, term1: f64, term2: f64) -> Vec<Option<f64>> {
    let mut v = vec![Some(e.h1), Some(e.l2)];
    if let Some(h) = e.hm1 {
        v.push(Some(h));
    }
    v.extend([
        Some(e.lambda.abs()),
        Some(e.energy.abs()),
        Some(e.lambda),
        Some(term1),
        Some(term2),
        (e.h1 > 0.0).then(|| e.energy / (e.h1 * e.h1)),
    ]);
    v
}

/// Errors cannot be cloned in general; a failed row is re-reported by
/// message.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::ScfConvergence { iterations, trace } => Error::ScfConvergence {
            iterations: *iterations,
            trace: trace.clone(),
        },
        other => Error::Config(other.to_string()),
    }
}

/// Effect of computing the potential coefficients on an `N_g`-point grid,
/// at fixed cutoff `n`.
///
/// Columns `H1`, `L2`, `Hm1`, `lambda` compare with the reference solve;
/// the `*_int` columns compare with the exact-coefficient solve at the same
/// `n`, isolating the integration error, and carry the fitted slopes.
pub fn quadrature_study(
    problem: &ProblemSpec,
    n: usize,
    ngs: &[usize],
    reference: &ReferenceSpec,
    opts: &StudyOptions,
) -> Result<StudyTable> {
    problem.validate()?;
    opts.cfg.validate()?;
    opts.reference_cfg.validate()?;
    let ngs = sorted_unique(ngs, "grid size")?;
    if let Some(ng) = ngs.iter().find(|&&ng| ng < 4 * n + 1) {
        return Err(Error::Precondition(format!(
            "N_g = {ng} is below 4N + 1 = {}",
            4 * n + 1
        )));
    }
    let ReferenceSpec::Fourier { n: nref } = *reference else {
        return Err(Error::Argument(
            "the quadrature study needs a Fourier reference".into(),
        ));
    };
    if nref <= n {
        return Err(Error::Precondition(format!(
            "reference cutoff {nref} is not above N = {n}"
        )));
    }
    let (nf, lf) = (opts.norm_floor(), opts.lambda_floor());
    let columns = vec![
        Column::plain("H1"),
        Column::plain("L2"),
        Column::plain("Hm1"),
        Column::plain("lambda"),
        Column::plain("lambda_signed"),
        Column::fitted("H1_int", nf),
        Column::fitted("L2_int", nf),
        Column::fitted("Hm1_int", nf),
        Column::fitted("lambda_int", lf),
    ];
    let description = format!("Fourier N = {nref}, exact potential coefficients; integration error against N = {n}, exact");
    let mut table = StudyTable::new("Ng", "Ng", columns, description);
    table.metadata.insert("n".into(), json!(n));

    let fine = solve_ground_state(problem, &Discretization::fourier(nref), &opts.reference_cfg)
        .map_err(|e| study_error(nref as f64, table.clone(), e))?;
    let exact = solve_ground_state(problem, &Discretization::fourier(n), &opts.reference_cfg)
        .map_err(|e| study_error(n as f64, table.clone(), e))?;
    reference_metadata(&mut table, &fine);
    let ex = compare(&exact, &fine)?;
    table.metadata.insert(
        "exact_assembly_errors".into(),
        json!({ "H1": ex.h1, "L2": ex.l2, "Hm1": ex.hm1, "lambda": ex.lambda.abs(), "lambda_signed": ex.lambda }),
    );

    let pool = opts.pool()?;
    let rows: Vec<Result<StudyRow>> = pool.install(|| {
        ngs.par_iter()
            .map(|&ng| {
                let disc = Discretization::Fourier {
                    n,
                    assembly: PotentialAssembly::Grid { ng },
                    nonlinear_grid: None,
                };
                let r = solve_ground_state(problem, &disc, &opts.cfg)?;
                let e = compare(&r, &fine)?;
                let i = compare(&r, &exact)?;
                let values = vec![
                    Some(e.h1),
                    Some(e.l2),
                    e.hm1,
                    Some(e.lambda.abs()),
                    Some(e.lambda),
                    Some(i.h1),
                    Some(i.l2),
                    i.hm1,
                    Some(i.lambda.abs()),
                ];
                Ok(StudyRow {
                    param: ng as f64,
                    x: ng as f64,
                    values,
                })
            })
            .collect()
    });
    let mut failure = None;
    for (ng, row) in ngs.iter().zip(rows) {
        match row {
            Ok(r) => table.rows.push(r),
            Err(e) if failure.is_none() => failure = Some((*ng as f64, e)),
            Err(_) => {}
        }
    }
    let signed = table
        .series("lambda_signed")
        .iter()
        .map(|(_, v)| *v)
        .collect::<Vec<_>>();
    table
        .metadata
        .insert("lambda_sign_changes".into(), json!(sign_changes(&signed)));
    table.refit();
    if let Some((p, e)) = failure {
        table.partial = true;
        return Err(study_error(p, table, e));
    }
    Ok(table)
}
