//! Command-line front end: solves and studies driven by flags or a JSON
//! config, writing JSON/CSV artifacts and a run manifest.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    convergence_study, fit_slope, lambda_decomposition, quadrature_study, ReferenceSpec,
    StudyFamily, StudyOptions, StudyTable,
};
use crate::error::{Error, Result};
use crate::fourier::{nonlinear_density_coeffs, synthesize, FourierCoeffs, PotentialAssembly};
use crate::problem::{Geometry, Nonlinearity, Potential, ProblemSpec};
use crate::scf::{solve_ground_state, Discretization, SCFConfig};

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "GROUNDSTATE_OUTPUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// What to run, with the parameters specific to each command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Solve {
        disc: Discretization,
    },
    StudyFourier {
        ns: Vec<usize>,
        ref_n: usize,
    },
    StudyFem {
        degree: usize,
        ns: Vec<usize>,
        ref_degree: usize,
        ref_factor: usize,
    },
    StudyQuadrature {
        n: usize,
        ngs: Vec<usize>,
        ref_n: usize,
    },
    Selftest,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Solve { .. } => "solve",
            Task::StudyFourier { .. } => "study-fourier",
            Task::StudyFem { .. } => "study-fem",
            Task::StudyQuadrature { .. } => "study-quadrature",
            Task::Selftest => "selftest",
        }
    }
}

/// A complete, self-describing run. The manifest echoes it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub scf: SCFConfig,
    #[serde(default = "default_reference_scf")]
    pub reference_scf: SCFConfig,
    pub output: PathBuf,
    #[serde(default = "one")]
    pub jobs: usize,
    /// Reserved; every algorithm is deterministic. Seeds the selftest data.
    #[serde(default)]
    pub seed: u64,
}

fn default_reference_scf() -> SCFConfig {
    StudyOptions::default().reference_cfg
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn defaults_for(command: &str, output: PathBuf) -> Result<Self> {
        let (task, problem) = match command {
            "solve" => (
                Task::Solve {
                    disc: Discretization::fourier(16),
                },
                ProblemSpec::sin_kink_benchmark(),
            ),
            "study-fourier" => (
                Task::StudyFourier {
                    ns: (4..=30).collect(),
                    ref_n: 65,
                },
                ProblemSpec::sin_kink_benchmark(),
            ),
            "study-fem" => (
                Task::StudyFem {
                    degree: 1,
                    ns: vec![8, 16, 32, 64],
                    ref_degree: 2,
                    ref_factor: 8,
                },
                ProblemSpec::harmonic_square_benchmark(),
            ),
            "study-quadrature" => (
                Task::StudyQuadrature {
                    n: 30,
                    ngs: (7..=15).map(|p| 1usize << p).collect(),
                    ref_n: 65,
                },
                ProblemSpec::sin_kink_benchmark(),
            ),
            "selftest" => (Task::Selftest, ProblemSpec::sin_kink_benchmark()),
            other => return Err(Error::Config(format!("unknown command `{other}`"))),
        };
        Ok(Self {
            task,
            problem,
            scf: SCFConfig::default(),
            reference_scf: default_reference_scf(),
            output,
            jobs: 1,
            seed: 0,
        })
    }

    /// Field-level checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        self.problem
            .validate()
            .map_err(|e| Error::Config(format!("problem: {e}")))?;
        self.scf
            .validate()
            .map_err(|e| Error::Config(format!("scf: {e}")))?;
        self.reference_scf
            .validate()
            .map_err(|e| Error::Config(format!("reference_scf: {e}")))?;
        if self.jobs == 0 {
            return Err(Error::Config("jobs: must be at least 1".into()));
        }
        let sorted = |field: &str, v: &[usize]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::Config(format!("task.{field}: list is empty")));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "task.{field}: values must be strictly increasing"
                )));
            }
            Ok(())
        };
        match &self.task {
            Task::StudyFourier { ns, ref_n } => {
                sorted("ns", ns)?;
                if ns.last().is_some_and(|n| n >= ref_n) {
                    return Err(Error::Config(format!(
                        "task.ref_n: {ref_n} must exceed every study cutoff"
                    )));
                }
            }
            Task::StudyFem { ns, .. } => sorted("ns", ns)?,
            Task::StudyQuadrature { n, ngs, ref_n } => {
                sorted("ngs", ngs)?;
                if let Some(ng) = ngs.iter().find(|&&ng| ng < 4 * n + 1) {
                    return Err(Error::Config(format!(
                        "task.ngs: {ng} is below 4N + 1 = {}",
                        4 * n + 1
                    )));
                }
                if ref_n <= n {
                    return Err(Error::Config(format!(
                        "task.ref_n: {ref_n} must exceed N = {n}"
                    )));
                }
            }
            Task::Solve { .. } | Task::Selftest => {}
        }
        Ok(())
    }

    /// Reads a config, or the `config` member of a run manifest.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Manifest {
            config: RunConfig,
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("tool").is_some() && value.get("config").is_some() {
            return Ok(serde_json::from_str::<Manifest>(text)?.config);
        }
        Ok(serde_json::from_str(text)?)
    }

    fn study_options(&self) -> StudyOptions {
        StudyOptions {
            cfg: self.scf.clone(),
            reference_cfg: self.reference_scf.clone(),
            jobs: self.jobs,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "groundstate",
    version,
    about = "Ground states of nonlinear Schrödinger-type eigenvalue problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One ground-state solve.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Fourier cutoff.
        #[arg(long = "N")]
        cutoff: Option<usize>,
        /// Grid size for the potential coefficients (default: exact).
        #[arg(long = "Ng")]
        ng: Option<usize>,
        /// Mesh subdivisions per side (finite elements).
        #[arg(long = "n")]
        mesh: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Fourier convergence study in N.
    StudyFourier {
        #[command(flatten)]
        common: CommonArgs,
        /// Cutoffs, e.g. `4..30`, `4..30:2` or `4,8,16`.
        #[arg(long = "N")]
        cutoffs: Option<String>,
        #[arg(long = "ref-N")]
        ref_n: Option<usize>,
    },
    /// Finite-element convergence study in h.
    StudyFem {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        degree: Option<usize>,
        /// Mesh subdivisions, e.g. `8,16,32,64`.
        #[arg(long = "n")]
        meshes: Option<String>,
        #[arg(long)]
        ref_degree: Option<usize>,
        /// Reference mesh refinement relative to the finest study mesh.
        #[arg(long)]
        ref_factor: Option<usize>,
    },
    /// Effect of grid-computed potential coefficients at fixed N.
    StudyQuadrature {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "N")]
        cutoff: Option<usize>,
        /// Grid sizes, e.g. `128,256,...,32768`.
        #[arg(long = "Ng")]
        grids: Option<String>,
        #[arg(long = "ref-N")]
        ref_n: Option<usize>,
    },
    /// Quick internal consistency checks.
    Selftest {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON run config (or a previous run manifest); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $GROUNDSTATE_OUTPUT or `output`].
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `periodic` or `rectangle`.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Rectangle sides, e.g. `pi,pi`.
    #[arg(long)]
    pub sides: Option<String>,
    /// `zero`, `sin-kink`, `harmonic` or `samples=<file>`.
    #[arg(long)]
    pub potential: Option<String>,
    /// Nonlinearity `F(ρ) = c ρ^m`, e.g. `c=0.5,m=2`.
    #[arg(long = "nl")]
    pub nonlinearity: Option<String>,
    #[arg(long)]
    pub tol_density: Option<f64>,
    #[arg(long)]
    pub tol_lambda: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Disable the energy-decrease safeguard.
    #[arg(long)]
    pub fixed_damping: bool,
}

/// Parses `a..b` (inclusive), `a..b:s`, or a comma list whose `...`
/// element continues the geometric progression of its two neighbours up
/// to the last entry.
pub fn parse_list(text: &str) -> Result<Vec<usize>> {
    let bad = |why: &str| Error::Config(format!("cannot parse list `{text}`: {why}"));
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| bad(&format!("`{}` is not a non-negative integer", s.trim())))
    };
    if let Some((a, rest)) = text.split_once("..") {
        if !text.contains(',') && !rest.starts_with('.') {
            let (b, step) = match rest.split_once(':') {
                Some((b, s)) => (num(b)?, num(s)?),
                None => (num(rest)?, 1),
            };
            let a = num(a)?;
            if step == 0 || b < a {
                return Err(bad("empty range"));
            }
            return Ok((a..=b).step_by(step).collect());
        }
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut out: Vec<usize> = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        if *p == "..." {
            let last = *parts
                .get(i + 1)
                .ok_or_else(|| bad("`...` needs a final value"))?;
            let last = num(last)?;
            if out.len() < 2 {
                return Err(bad("`...` needs two leading values"));
            }
            let (x0, x1) = (out[out.len() - 2], out[out.len() - 1]);
            if x1 <= x0 {
                return Err(bad("`...` needs increasing leading values"));
            }
            loop {
                let cur = *out.last().expect("non-empty");
                let next = if x1 % x0 == 0 {
                    cur * (x1 / x0)
                } else {
                    cur + (x1 - x0)
                };
                if next >= last {
                    break;
                }
                out.push(next);
            }
        } else {
            out.push(num(p)?);
        }
    }
    Ok(out)
}

fn parse_float(s: &str) -> Result<f64> {
    let t = s.trim();
    let scale_pi = |f: &str| -> Option<f64> {
        if f == "pi" {
            return Some(PI);
        }
        f.strip_suffix("pi")
            .and_then(|c| c.trim_end_matches('*').parse::<f64>().ok())
            .map(|c| c * PI)
    };
    t.parse::<f64>()
        .ok()
        .or_else(|| scale_pi(t))
        .ok_or_else(|| Error::Config(format!("`{t}` is not a number")))
}

/// `c=0.5,m=2` (either key may be omitted; defaults `c = 1/2`, `m = 2`).
pub fn parse_nonlinearity(text: &str) -> Result<Nonlinearity> {
    let mut nl = Nonlinearity::quadratic();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("nl: expected key=value, got `{part}`")))?;
        match k.trim() {
            "c" => nl.c = parse_float(v)?,
            "m" => nl.m = parse_float(v)?,
            other => return Err(Error::Config(format!("nl: unknown key `{other}`"))),
        }
    }
    Nonlinearity::new(nl.c, nl.m).map_err(|e| Error::Config(format!("nl: {e}")))
}

fn parse_potential(text: &str) -> Result<Potential> {
    match text.trim() {
        "zero" => Ok(Potential::zero()),
        "sin-kink" | "sin_kink" => Ok(Potential::sin_kink()),
        "harmonic" | "harmonic-2d" | "harmonic_2d" => Ok(Potential::harmonic_2d()),
        other => {
            let path = other
                .strip_prefix("samples=")
                .ok_or_else(|| Error::Config(format!("potential: unknown kind `{other}`")))?;
            let text = std::fs::read_to_string(path)?;
            let samples = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(parse_float)
                .collect::<Result<Vec<f64>>>()?;
            Ok(Potential::custom_samples(samples))
        }
    }
}

fn apply_common(cfg: &mut RunConfig, c: &CommonArgs) -> Result<()> {
    if let Some(o) = &c.output {
        cfg.output = o.clone();
    }
    if let Some(j) = c.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    match c.geometry.as_deref() {
        None => {}
        Some("periodic") => cfg.problem.geometry = Geometry::PeriodicInterval,
        Some("rectangle") => {
            if !matches!(cfg.problem.geometry, Geometry::DirichletRectangle { .. }) {
                cfg.problem.geometry = Geometry::DirichletRectangle {
                    sides: vec![PI, PI],
                };
            }
        }
        Some(other) => return Err(Error::Config(format!("geometry: unknown `{other}`"))),
    }
    if let Some(s) = &c.sides {
        let sides = s
            .split(',')
            .map(parse_float)
            .collect::<Result<Vec<f64>>>()?;
        cfg.problem.geometry = Geometry::DirichletRectangle { sides };
    }
    if let Some(p) = &c.potential {
        cfg.problem.potential = parse_potential(p)?;
    }
    if let Some(nl) = &c.nonlinearity {
        cfg.problem.nonlinearity = parse_nonlinearity(nl)?;
    }
    let scf = &mut cfg.scf;
    if let Some(t) = c.tol_density {
        scf.tol_density = t;
    }
    if let Some(t) = c.tol_lambda {
        scf.tol_lambda = t;
    }
    if let Some(d) = c.damping {
        scf.damping = d;
    }
    if let Some(m) = c.max_iter {
        scf.max_iter = m;
    }
    if c.fixed_damping {
        scf.adaptive = false;
    }
    Ok(())
}

fn default_output() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("output"))
}

fn base_config(name: &str, common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg = RunConfig::from_json(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            if cfg.task.name() != name {
                return Err(Error::Config(format!(
                    "{}: task.command is `{}` but the subcommand is `{name}`",
                    path.display(),
                    cfg.task.name()
                )));
            }
            cfg
        }
        None => RunConfig::defaults_for(name, default_output())?,
    };
    apply_common(&mut cfg, common)?;
    Ok(cfg)
}

/// Turns parsed arguments into a validated run config.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    let cfg = match command {
        Command::Solve {
            common,
            cutoff,
            ng,
            mesh,
            degree,
        } => {
            let mut cfg = base_config("solve", common)?;
            let fem = mesh.is_some()
                || degree.is_some()
                || matches!(cfg.problem.geometry, Geometry::DirichletRectangle { .. });
            if fem {
                let (n0, d0) = match &cfg.task {
                    Task::Solve {
                        disc: Discretization::Fem { n, degree },
                    } => (*n, *degree),
                    _ => (16, 1),
                };
                cfg.task = Task::Solve {
                    disc: Discretization::fem(mesh.unwrap_or(n0), degree.unwrap_or(d0)),
                };
            } else if cutoff.is_some() || ng.is_some() {
                let (n0, a0) = match &cfg.task {
                    Task::Solve {
                        disc: Discretization::Fourier { n, assembly, .. },
                    } => (*n, *assembly),
                    _ => (16, PotentialAssembly::Exact),
                };
                let assembly = ng.map_or(a0, |ng| PotentialAssembly::Grid { ng });
                cfg.task = Task::Solve {
                    disc: Discretization::Fourier {
                        n: cutoff.unwrap_or(n0),
                        assembly,
                        nonlinear_grid: None,
                    },
                };
            }
            cfg
        }
        Command::StudyFourier {
            common,
            cutoffs,
            ref_n,
        } => {
            let mut cfg = base_config("study-fourier", common)?;
            if let Task::StudyFourier { ns, ref_n: r } = &mut cfg.task {
                if let Some(c) = cutoffs {
                    *ns = parse_list(c)?;
                }
                if let Some(v) = ref_n {
                    *r = *v;
                }
            }
            cfg
        }
        Command::StudyFem {
            common,
            degree,
            meshes,
            ref_degree,
            ref_factor,
        } => {
            let mut cfg = base_config("study-fem", common)?;
            if let Task::StudyFem {
                degree: d,
                ns,
                ref_degree: rd,
                ref_factor: rf,
            } = &mut cfg.task
            {
                if let Some(v) = degree {
                    *d = *v;
                    if meshes.is_none() && common.config.is_none() && *v == 2 {
                        *ns = vec![4, 8, 16, 32];
                    }
                }
                if let Some(m) = meshes {
                    *ns = parse_list(m)?;
                }
                if let Some(v) = ref_degree {
                    *rd = *v;
                }
                if let Some(v) = ref_factor {
                    *rf = *v;
                }
            }
            cfg
        }
        Command::StudyQuadrature {
            common,
            cutoff,
            grids,
            ref_n,
        } => {
            let mut cfg = base_config("study-quadrature", common)?;
            if let Task::StudyQuadrature { n, ngs, ref_n: r } = &mut cfg.task {
                if let Some(v) = cutoff {
                    *n = *v;
                }
                if let Some(g) = grids {
                    *ngs = parse_list(g)?;
                }
                if let Some(v) = ref_n {
                    *r = *v;
                }
            }
            cfg
        }
        Command::Selftest { common } => base_config("selftest", common)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    wall_time_s: f64,
    partial: bool,
    status: String,
    exit_code: i32,
    files: Vec<String>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Argument(_)
        | Error::Precondition(_)
        | Error::Json(_)
        | Error::Domain(_)
        | Error::UnsupportedNorm(_)
        | Error::UnsupportedExactCoefficients(_) => EXIT_INVALID,
        Error::ScfConvergence { .. }
        | Error::Convergence { .. }
        | Error::IndefiniteAdjoint
        | Error::Matrix(_) => EXIT_NO_CONVERGENCE,
        Error::Study { source, .. } => match exit_code(source) {
            EXIT_INVALID => EXIT_INVALID,
            _ => EXIT_NO_CONVERGENCE,
        },
        Error::Io(_) => EXIT_FAILURE,
    }
}

fn write_table(dir: &Path, stem: &str, table: &StudyTable, files: &mut Vec<String>) -> Result<()> {
    table.write_files(dir, stem)?;
    files.extend(
        ["csv", "json", "dat"]
            .iter()
            .map(|ext| format!("{stem}.{ext}")),
    );
    Ok(())
}

fn print_slopes(table: &StudyTable) {
    for s in &table.slopes {
        match (s.fit, s.range) {
            (Some(f), Some((a, b))) => {
                println!(
                    "slope {:<10} {:>8.4}  ({} points, {} in [{a}, {b}])",
                    s.column, f.slope, s.points, table.abscissa
                )
            }
            _ => println!("slope {:<10} n/a", s.column),
        }
    }
}

/// Executes a validated config; returns the exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    let start = Instant::now();
    let mut files = Vec::new();
    let mut partial = false;
    let outcome: Result<()> = (|| {
        std::fs::create_dir_all(&cfg.output)?;
        match &cfg.task {
            Task::Solve { disc } => {
                let r = solve_ground_state(&cfg.problem, disc, &cfg.scf)?;
                std::fs::write(cfg.output.join("solve.json"), r.to_json()?)?;
                files.push("solve.json".into());
                println!("lambda   {:.15e}", r.lambda);
                println!("energy   {:.15e}", r.energy);
                println!(
                    "residual {:.3e} after {} iterations",
                    r.residual, r.iterations
                );
            }
            Task::StudyFourier { ns, ref_n } => {
                let t = convergence_study(
                    &cfg.problem,
                    &StudyFamily::Fourier { ns: ns.clone() },
                    &ReferenceSpec::Fourier { n: *ref_n },
                    &cfg.study_options(),
                );
                finish_study(t, &cfg.output, "study_fourier", &mut files, &mut partial)?;
            }
            Task::StudyFem {
                degree,
                ns,
                ref_degree,
                ref_factor,
            } => {
                let t = convergence_study(
                    &cfg.problem,
                    &StudyFamily::Fem {
                        degree: *degree,
                        ns: ns.clone(),
                    },
                    &ReferenceSpec::Fem {
                        degree: *ref_degree,
                        factor: *ref_factor,
                    },
                    &cfg.study_options(),
                );
                finish_study(
                    t,
                    &cfg.output,
                    &format!("study_fem_p{degree}"),
                    &mut files,
                    &mut partial,
                )?;
            }
            Task::StudyQuadrature { n, ngs, ref_n } => {
                let t = quadrature_study(
                    &cfg.problem,
                    *n,
                    ngs,
                    &ReferenceSpec::Fourier { n: *ref_n },
                    &cfg.study_options(),
                );
                finish_study(t, &cfg.output, "study_quadrature", &mut files, &mut partial)?;
            }
            Task::Selftest => {
                let failures = selftest(cfg.seed);
                if failures > 0 {
                    return Err(Error::Config(format!(
                        "{failures} selftest check(s) failed"
                    )));
                }
            }
        }
        Ok(())
    })();
    let (code, status) = match &outcome {
        Ok(()) => (EXIT_OK, "ok".to_string()),
        Err(e) if matches!(cfg.task, Task::Selftest) => (EXIT_FAILURE, e.to_string()),
        Err(e) => (exit_code(e), e.to_string()),
    };
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.task.name(),
        config: cfg,
        wall_time_s: start.elapsed().as_secs_f64(),
        partial,
        status,
        exit_code: code,
        files,
    };
    let written = serde_json::to_string_pretty(&manifest)
        .map_err(Error::from)
        .and_then(|m| std::fs::write(cfg.output.join("manifest.json"), m).map_err(Error::from));
    if let Err(e) = written {
        eprintln!("error: cannot write manifest: {e}");
        return code.max(EXIT_FAILURE);
    }
    code
}

fn finish_study(
    table: Result<StudyTable>,
    dir: &Path,
    stem: &str,
    files: &mut Vec<String>,
    partial: &mut bool,
) -> Result<()> {
    match table {
        Ok(t) => {
            print_slopes(&t);
            write_table(dir, stem, &t, files)
        }
        Err(Error::Study {
            param,
            partial: table,
            source,
        }) => {
            *partial = true;
            write_table(dir, stem, &table, files)?;
            Err(Error::Study {
                param,
                partial: table,
                source,
            })
        }
        Err(e) => Err(e),
    }
}

fn check(name: &str, ok: bool, detail: String) -> usize {
    println!("{} {name}: {detail}", if ok { "pass" } else { "FAIL" });
    usize::from(!ok)
}

/// Fast checks of the main identities; returns the number of failures.
pub fn selftest(seed: u64) -> usize {
    let mut failures = 0;
    let free = ProblemSpec::new(
        Geometry::PeriodicInterval,
        Potential::zero(),
        Nonlinearity::quadratic(),
    )
    .expect("valid");
    match solve_ground_state(&free, &Discretization::fourier(8), &SCFConfig::default()) {
        Ok(r) => {
            let err = (r.lambda - 1.0 / (2.0 * PI))
                .abs()
                .max((r.energy - 1.0 / (8.0 * PI)).abs());
            failures += check(
                "constant state",
                err < 1e-12,
                format!("max error {err:.2e}"),
            );
        }
        Err(e) => failures += check("constant state", false, e.to_string()),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..12usize);
        let v = FourierCoeffs::from_fn(n, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let exact = nonlinear_density_coeffs(&v).l2_norm().powi(2);
        let ng = 4 * n + 1;
        let grid: f64 = synthesize(&v, ng)
            .values()
            .iter()
            .map(|c| c.norm_sqr().powi(2))
            .sum::<f64>()
            * 2.0
            * PI
            / ng as f64;
        worst = worst.max((grid - exact).abs() / exact);
    }
    failures += check(
        "quartic quadrature",
        worst < 1e-11,
        format!("max relative error {worst:.2e}"),
    );

    let xs: Vec<f64> = (2..10).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x.powi(-3)).collect();
    let slope = fit_slope(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    failures += check(
        "slope fit",
        (slope + 3.0).abs() < 1e-12,
        format!("slope {slope}"),
    );

    let problem = ProblemSpec::sin_kink_benchmark();
    let study = convergence_study(
        &problem,
        &StudyFamily::Fourier {
            ns: (4..=10).collect(),
        },
        &ReferenceSpec::Fourier { n: 24 },
        &StudyOptions::default(),
    );
    match study {
        Ok(t) => {
            let slopes: Vec<f64> = ["H1", "L2", "Hm1", "lambda"]
                .iter()
                .map(|c| t.slope(c).unwrap_or(f64::NAN))
                .collect();
            let ordered = slopes.windows(2).all(|w| w[1] < w[0]) && slopes[0] < -2.0;
            failures += check(
                "small Fourier study",
                ordered,
                format!("slopes {slopes:.3?}"),
            );
            let defect = t
                .rows
                .iter()
                .map(|r| {
                    let v =
                        |c: &str| r.values[t.column_index(c).expect("column")].unwrap_or(f64::NAN);
                    (v("term1") + v("term2") - v("lambda_signed")).abs()
                })
                .fold(0.0, f64::max);
            failures += check(
                "lambda decomposition",
                defect < 1e-9,
                format!("max defect {defect:.2e}"),
            );
        }
        Err(e) => failures += check("small Fourier study", false, e.to_string()),
    }

    let r = solve_ground_state(&problem, &Discretization::fourier(6), &SCFConfig::default())
        .and_then(|r| {
            lambda_decomposition(&r.u, &r.u, r.lambda, &problem, &r.disc).map(|d| (r, d))
        });
    match r {
        Ok((_, d)) => {
            failures += check(
                "trivial decomposition",
                d.term1 == 0.0 && d.term2 == 0.0,
                format!("{d:?}"),
            )
        }
        Err(e) => failures += check("trivial decomposition", false, e.to_string()),
    }
    failures
}

/// Parses `args`, runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match resolve(&cli.command) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_FAILURE,
                _ => EXIT_INVALID,
            }
        }
    }
}
