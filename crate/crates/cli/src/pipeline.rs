//! Subcommand pipelines and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use lane_emden::bounds::{
    construct, construct_auto, prepare_auxiliary, verify_pair, Auxiliary, HypothesisCertificate, Recipe,
    SubSupPair, VerifyTolerances,
};
use lane_emden::enclosure::{
    solve_system, uniqueness_experiment, FixedPointConfig, Start, SystemSummary, UniquenessReport,
};
use lane_emden::spectral::{
    boundedness_check, first_eigenpair_dirichlet, first_eigenpair_dirichlet_from, first_eigenpair_neumann,
    refinement_ladder, torsion, BoundednessReport, EigenSummary, TorsionSummary,
};
use lane_emden::{build_grid, BoundaryCondition, Grid, GridSpec, ScalarField, ValidationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{LambdaMode, RunConfig, StartMode};
use crate::error::{io_err, CliError};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Eigen,
    Torsion,
    Construct,
    Verify,
    Solve,
    Uniqueness,
    Boundedness,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Torsion => "torsion",
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Uniqueness => "uniqueness",
            Command::Boundedness => "boundedness",
            Command::Report => "report",
        }
    }
}

/// Random-restart check of the Dirichlet eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartCheck {
    pub p: f64,
    pub lambda: f64,
    pub restarts: usize,
    pub min_restart_lambda: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: Command,
    pub status: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub seed: Option<u64>,
    pub config: Option<RunConfig>,
    pub grid: Option<GridSpec>,
    pub exponent_report: Option<ValidationReport>,
    pub eigen: Vec<EigenSummary>,
    pub restart_checks: Vec<RestartCheck>,
    pub torsion: Vec<TorsionSummary>,
    pub lambda: Option<f64>,
    pub certificate: Option<HypothesisCertificate>,
    pub solution: Option<SystemSummary>,
    pub uniqueness: Option<UniquenessReport>,
    pub boundedness: Vec<BoundednessReport>,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// Field name to CSV file name, relative to the run directory.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: Command, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            status: "ok".into(),
            exit_code: 0,
            error: None,
            seed,
            config: None,
            grid: None,
            exponent_report: None,
            eigen: Vec::new(),
            restart_checks: Vec::new(),
            torsion: Vec::new(),
            lambda: None,
            certificate: None,
            solution: None,
            uniqueness: None,
            boundedness: Vec::new(),
            timings: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn record_error(&mut self, err: &CliError) {
        self.exit_code = err.exit_code();
        self.status = match self.exit_code {
            2 => "invalid_input",
            3 => "certificate_failed",
            _ => "not_converged",
        }
        .into();
        self.error = Some(err.to_string());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n").map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Live state of one invocation: manifest plus the fields computed so far.
pub struct Run {
    pub manifest: RunManifest,
    pub fields: BTreeMap<String, ScalarField>,
    out: PathBuf,
}

impl Run {
    pub fn new(command: Command, seed: Option<u64>, out: PathBuf) -> Self {
        Self { manifest: RunManifest::new(command, seed), fields: BTreeMap::new(), out }
    }

    pub fn out(&self) -> &Path {
        &self.out
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.manifest.timings.entry(stage.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
        out
    }

    fn store(&mut self, name: &str, field: ScalarField) -> Result<(), CliError> {
        let file = format!("{name}.csv");
        let path = self.out.join(&file);
        fs::write(&path, field.to_csv_string()).map_err(io_err(&path))?;
        self.manifest.files.insert(name.to_string(), file);
        self.fields.insert(name.to_string(), field);
        Ok(())
    }

    /// Writes the manifest, recording `outcome` when it is an error.
    pub fn finish(mut self, outcome: Result<(), CliError>) -> (RunManifest, Result<(), CliError>) {
        if let Err(e) = &outcome {
            self.manifest.record_error(e);
        }
        let written = self.manifest.write(&self.out);
        let outcome = outcome.and(written.map(|_| ()));
        (self.manifest, outcome)
    }
}

fn component(i: usize) -> &'static str {
    if i == 0 { "u" } else { "v" }
}

fn build(cfg: &RunConfig) -> Result<Arc<Grid>, CliError> {
    Ok(build_grid(cfg.domain, &cfg.extents, &cfg.nodes)?)
}

/// Runs `command` for `cfg`, writing fields and the manifest into `out`.
pub fn run(command: Command, cfg: &RunConfig, out: &Path, seed: Option<u64>) -> (RunManifest, Result<(), CliError>) {
    let mut run = Run::new(command, seed, out.to_path_buf());
    if let Err(e) = fs::create_dir_all(out).map_err(io_err(out)) {
        run.manifest.record_error(&e);
        return (run.manifest, Err(e));
    }
    run.manifest.config = Some(cfg.clone());
    let outcome = execute(&mut run, command, cfg);
    run.finish(outcome)
}

fn execute(run: &mut Run, command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let grid = build(cfg)?;
    run.manifest.grid = Some(grid.spec().clone());
    run.manifest.exponent_report = Some(lane_emden::validate_exponents(&cfg.exponents, grid.dimension()));
    match command {
        Command::Eigen => eigen(run, cfg, &grid),
        Command::Torsion => torsions(run, cfg, &grid),
        Command::Construct => construct_stage(run, cfg, &grid).map(|_| ()),
        Command::Verify => {
            let pair = construct_stage(run, cfg, &grid)?;
            certify(run, cfg, &pair)
        }
        Command::Solve => {
            let pair = construct_stage(run, cfg, &grid)?;
            certify(run, cfg, &pair)?;
            solve(run, cfg, &grid, &pair)
        }
        Command::Uniqueness => {
            let pair = construct_stage(run, cfg, &grid)?;
            certify(run, cfg, &pair)?;
            uniqueness(run, cfg, &grid, &pair)
        }
        Command::Boundedness => boundedness(run, cfg, &grid),
        Command::Report => Err(CliError::Usage("report reads an existing run directory given by --out".into())),
    }
}

fn eigen(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<(), CliError> {
    let inner = cfg.inner();
    let ps = [cfg.exponents.p1, cfg.exponents.p2];
    let mut rng = ChaCha8Rng::seed_from_u64(run.manifest.seed.unwrap_or(0));
    for (i, &p) in ps.iter().enumerate() {
        let pair = run.timed("eigen", || first_eigenpair_dirichlet(grid, p, &inner))?;
        let neumann = first_eigenpair_neumann(grid, p)?;
        run.manifest.eigen.push(pair.summary());
        run.manifest.eigen.push(neumann.summary());
        if cfg.eigen_restarts > 0 {
            let mut best = f64::INFINITY;
            for _ in 0..cfg.eigen_restarts {
                let values = (0..grid.len())
                    .map(|k| if grid.is_boundary(k) { 0.0 } else { rng.gen_range(0.01..1.0) })
                    .collect();
                let start = ScalarField::new(grid.clone(), values)?;
                let other = run.timed("eigen_restarts", || first_eigenpair_dirichlet_from(grid, p, &inner, &start))?;
                best = best.min(other.lambda);
            }
            let consistent = pair.lambda <= best + 1e-6 * pair.lambda.abs().max(1.0);
            run.manifest.restart_checks.push(RestartCheck {
                p,
                lambda: pair.lambda,
                restarts: cfg.eigen_restarts,
                min_restart_lambda: best,
                consistent,
            });
            if !consistent {
                run.store(&format!("eigen_dirichlet_{}", component(i)), pair.phi.clone())?;
                return Err(CliError::Failed(format!(
                    "a random restart found a smaller eigenvalue for p = {p}: {best} < {}",
                    pair.lambda
                )));
            }
        }
        run.store(&format!("eigen_dirichlet_{}", component(i)), pair.phi)?;
    }
    Ok(())
}

fn torsions(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<(), CliError> {
    let inner = cfg.inner();
    for (i, p) in [cfg.exponents.p1, cfg.exponents.p2].into_iter().enumerate() {
        for (bc, tag) in [(BoundaryCondition::DirichletZero, "dirichlet"), (BoundaryCondition::NeumannZero, "neumann")] {
            let t = run.timed("torsion", || torsion(grid, p, bc, &inner))?;
            run.manifest.torsion.push(t.summary());
            run.store(&format!("torsion_{tag}_{}", component(i)), t.result.solution)?;
        }
    }
    Ok(())
}

fn record_aux(run: &mut Run, aux: &Auxiliary) {
    let m = &mut run.manifest;
    m.eigen.extend(aux.neumann_eigen.iter().map(|e| e.summary()));
    if let Some(d) = &aux.dirichlet_eigen {
        m.eigen.extend(d.iter().map(|e| e.summary()));
    }
    for t in [&aux.neumann_torsion, &aux.dirichlet_torsion].into_iter().flatten() {
        m.torsion.extend(t.iter().map(|t| t.summary()));
    }
}

fn construct_stage(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<SubSupPair, CliError> {
    let e = cfg.exponents;
    let inner = cfg.inner();
    let aux = run.timed("auxiliary", || prepare_auxiliary(grid, &e, cfg.recipe, &inner))?;
    record_aux(run, &aux);
    let pair = match cfg.lambda {
        LambdaMode::Auto => {
            let tol = VerifyTolerances::default();
            let found = run.timed("construct", || construct_auto(cfg.recipe, grid, &e, &aux, cfg.eps_grad, &tol));
            let (pair, cert) = found?;
            run.manifest.certificate = Some(cert);
            pair
        }
        LambdaMode::Value(lambda) => run.timed("construct", || construct(cfg.recipe, grid, &e, lambda, &aux))?,
    };
    run.manifest.lambda = Some(pair.lambda);
    run.store("u_lower", pair.u_lower.clone())?;
    run.store("v_lower", pair.v_lower.clone())?;
    run.store("u_upper", pair.u_upper.clone())?;
    run.store("v_upper", pair.v_upper.clone())?;
    Ok(pair)
}

fn certify(run: &mut Run, cfg: &RunConfig, pair: &SubSupPair) -> Result<(), CliError> {
    if run.manifest.certificate.is_none() {
        let tol = VerifyTolerances::default();
        let cert = run.timed("verify", || verify_pair(pair, &cfg.exponents, cfg.eps_grad, &tol))?;
        run.manifest.certificate = Some(cert);
    }
    let cert = run.manifest.certificate.as_ref().expect("set above");
    if cert.passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} certificate at lambda = {} fails: {}",
            cert.recipe,
            cert.lambda,
            cert.failures().join("; ")
        )))
    }
}

fn fixed_point(cfg: &RunConfig, recipe: Recipe) -> FixedPointConfig {
    let start = match cfg.start {
        StartMode::Lower => Start::FromLower,
        StartMode::Upper => Start::FromUpper,
        StartMode::Auto if recipe.zero_trace() => Start::FromUpper,
        StartMode::Auto => Start::FromLower,
    };
    FixedPointConfig {
        tol_outer: cfg.tol_outer,
        max_outer_iterations: cfg.max_outer,
        start,
        inner: cfg.inner(),
        relaxation: cfg.relaxation,
        ..Default::default()
    }
}

fn solve(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>, pair: &SubSupPair) -> Result<(), CliError> {
    let fp = fixed_point(cfg, pair.recipe);
    match run.timed("solve", || solve_system(grid, &cfg.exponents, pair, &fp)) {
        Ok(sol) => {
            run.manifest.solution = Some(sol.summary());
            run.store("u", sol.u)?;
            run.store("v", sol.v)?;
            Ok(())
        }
        Err(lane_emden::Error::NotConverged(sol)) => {
            run.manifest.solution = Some(sol.summary());
            run.store("u", sol.u.clone())?;
            run.store("v", sol.v.clone())?;
            Err(lane_emden::Error::NotConverged(sol).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn uniqueness(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>, pair: &SubSupPair) -> Result<(), CliError> {
    let fp = fixed_point(cfg, pair.recipe);
    let (report, s1, s2) = run.timed("uniqueness", || uniqueness_experiment(grid, &cfg.exponents, pair, &fp))?;
    run.store("u_from_lower", s1.u)?;
    run.store("v_from_lower", s1.v)?;
    run.store("u_from_upper", s2.u)?;
    run.store("v_from_upper", s2.v)?;
    let passed = report.passed;
    let verdict = report.gate.verdict;
    run.manifest.uniqueness = Some(report);
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("uniqueness experiment did not pass (gate {verdict:?})")))
    }
}

fn boundedness(run: &mut Run, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<(), CliError> {
    let e = cfg.exponents;
    let inside = |g: f64| g > -1.0 && g <= 0.0;
    let jobs: Vec<(f64, f64)> = match cfg.gamma {
        Some(g) => {
            let mut v = vec![(e.p1, g)];
            if e.p2 != e.p1 {
                v.push((e.p2, g));
            }
            v
        }
        None => {
            let v: Vec<(f64, f64)> = [(e.p1, e.beta1), (e.p2, e.alpha2)].into_iter().filter(|&(_, g)| inside(g)).collect();
            if v.is_empty() {
                return Err(CliError::Key {
                    key: "gamma".into(),
                    msg: "required when neither beta1 nor alpha2 lies in (-1, 0]".into(),
                });
            }
            v
        }
    };
    let ladder = refinement_ladder(grid, cfg.levels)?;
    let inner = cfg.inner();
    for (p, gamma) in jobs {
        let report = run.timed("boundedness", || boundedness_check(&ladder, p, gamma, &inner))?;
        run.manifest.boundedness.push(report);
    }
    Ok(())
}

/// Reads the fields a finished run stored, keyed by field name.
pub fn load_fields(dir: &Path, manifest: &RunManifest) -> Result<BTreeMap<String, ScalarField>, CliError> {
    let spec = manifest
        .grid
        .clone()
        .ok_or_else(|| CliError::Usage("manifest has no grid".into()))?;
    let grid = Arc::new(Grid::new(spec)?);
    let mut out = BTreeMap::new();
    for (name, file) in &manifest.files {
        let path = dir.join(file);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let values = text
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.rsplit(',')
                    .next()
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| CliError::Usage(format!("{}: malformed row {l:?}", path.display())))
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        out.insert(name.clone(), ScalarField::new(grid.clone(), values)?);
    }
    Ok(out)
}
