//! Command-line front end: JSON problem files in, JSON or CSV out.
//!
//! ```text
//! svk-dual solve <input.json>
//! svk-dual sweep --k <v> --sigma-grid <n> --range a:b [--out csv|json]
//! svk-dual verify <input.json>
//! svk-dual reconstruct <input.json> --solution <idx> [--grid-csv <path>]
//! ```
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input or any
//! other error. Errors are written to stderr as
//! `{"error": "<Kind>", "message": "..."}`. Setting `KD_THREADS` caps the
//! number of worker threads.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branches::{BranchId, Combo};
use crate::dual_solver::{
    dual_equation_residual, solve_load, spectral_decompose_load, Classification, RegimeFlags,
    SolutionCensus, SpectralLoad,
};
use crate::energetics::{classify_triality, EnergyReport, LocalLabel, Triality};
use crate::error::Error;
use crate::field::{
    curl_residual, dual_functional, potential_functional, reconstruct_affine, sample_tensor_field,
    write_position_grid_csv, BoxDomain, GridField,
};
use crate::material::{first_pk_stress, MaterialParams};
use crate::oracle::{oracle_solve_all, set_compare, OracleConfig, SetComparison};
use crate::tensors::{Tensor3, Vec3};

/// Material block: Lamé pair, or coupling ratio `k` with shear modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

impl MaterialInput {
    pub fn params(&self) -> Result<MaterialParams, Error> {
        match (self.lambda, self.k) {
            (Some(l), None) => MaterialParams::new(l, self.mu),
            (None, Some(k)) => MaterialParams::from_k(k, self.mu),
            _ => Err(Error::InvalidParameter(
                "material needs exactly one of `lambda` or `k` next to `mu`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Tensor3>,
    /// Scaled mode: `σᵢ = τᵢ²/μ²` given directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigmas: Option<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Seeds the oracle start points.
    pub seed: u64,
    pub oracle_starts: usize,
    /// Absolute max-norm tolerance when matching solution sets.
    pub match_tol: f64,
    /// Reference point `X₀` of the reconstructed map.
    pub x0: Vec3,
    /// Prescribed position `χ₀ = χ(X₀)`.
    pub chi0: Vec3,
}

impl Default for RunOptions {
    fn default() -> Self {
        let oracle = OracleConfig::default();
        RunOptions {
            seed: oracle.seed,
            oracle_starts: oracle.n_starts,
            match_tol: 1e-7,
            x0: [0.0; 3],
            chi0: [0.0; 3],
        }
    }
}

/// Contents of an input JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemInput {
    pub material: MaterialInput,
    pub load: LoadInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxDomain>,
    #[serde(default)]
    pub options: RunOptions,
}

/// Validated problem ready to solve.
#[derive(Debug, Clone)]
pub struct Problem {
    pub material: MaterialParams,
    pub load: SpectralLoad,
    pub domain: Option<BoxDomain>,
    pub options: RunOptions,
}

impl ProblemInput {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::malformed(e.to_string()))
    }

    pub fn resolve(&self) -> Result<Problem, CliError> {
        let material = self.material.params()?;
        let load = match (&self.load.tau, &self.load.sigmas) {
            (Some(tau), None) => spectral_decompose_load(tau, &material)?,
            (None, Some(s)) => SpectralLoad::from_sigmas(*s, &material)?,
            _ => {
                return Err(CliError::malformed(
                    "load needs exactly one of `tau` or `sigmas`".into(),
                ))
            }
        };
        if let Some(d) = &self.domain {
            d.validate()?;
        }
        if !(self.options.match_tol > 0.0) {
            return Err(CliError::malformed(
                "options.match_tol must be positive".into(),
            ));
        }
        Ok(Problem {
            material,
            load,
            domain: self.domain.clone(),
            options: self.options,
        })
    }
}

impl Problem {
    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            n_starts: self.options.oracle_starts,
            seed: self.options.seed,
            ..OracleConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergiesRecord {
    pub dual_density: f64,
    pub potential_density: f64,
    pub gap_density: f64,
    pub complementarity_residual: f64,
    pub hessian_min_eig: f64,
    pub constitutive_residual: f64,
    pub scale: f64,
}

impl From<&EnergyReport> for EnergiesRecord {
    fn from(r: &EnergyReport) -> Self {
        EnergiesRecord {
            dual_density: r.dual_density,
            potential_density: r.potential_density,
            gap_density: r.gap_density,
            complementarity_residual: r.complementarity_residual,
            hessian_min_eig: r.hessian_min_eig,
            constitutive_residual: r.constitutive_residual,
            scale: r.scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialityLabel {
    GlobalMinimizer,
    LocalMin,
    LocalMaxCandidate,
    Saddle,
}

impl From<Triality> for TrialityLabel {
    fn from(t: Triality) -> Self {
        match t {
            Triality::GlobalMinimizer => TrialityLabel::GlobalMinimizer,
            Triality::LocalExtremumCandidate(LocalLabel::LocalMin) => TrialityLabel::LocalMin,
            Triality::LocalExtremumCandidate(LocalLabel::LocalMaxCandidate) => {
                TrialityLabel::LocalMaxCandidate
            }
            Triality::Saddle => TrialityLabel::Saddle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub index: usize,
    pub combo: Combo,
    pub q: f64,
    pub varsigmas: Vec3,
    pub s_eigs: Vec3,
    /// `T` in the input frame.
    pub t: [[f64; 3]; 3],
    pub classification: Classification,
    pub triality: TrialityLabel,
    pub residual: f64,
    pub tensor_residual: f64,
    pub det_f: f64,
    pub det_f_sign: i8,
    pub beyond_theorem: bool,
    pub energies: EnergiesRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub positive: usize,
    pub negative: usize,
    pub mixed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusOutput {
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    pub sigmas: Vec3,
    pub summary: Summary,
    pub regime: RegimeFlags,
    pub min_residual: f64,
    pub max_residual: f64,
    pub solutions: Vec<SolutionRecord>,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Census plus the energy report of each solution, in census order.
pub fn census_with_energies(
    problem: &Problem,
) -> Result<(SolutionCensus, Vec<EnergyReport>), Error> {
    let census = solve_load(&problem.load, &problem.material);
    let reports = census
        .solutions
        .par_iter()
        .map(|s| classify_triality(s, &problem.load.tau, &problem.material))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((census, reports))
}

pub fn census_output(problem: &Problem) -> Result<CensusOutput, Error> {
    let (census, reports) = census_with_energies(problem)?;
    let m = &problem.material;
    let tau = &problem.load.tau;
    let tau_sq = (tau.transpose() * *tau).norm_inf();
    let solutions = census
        .solutions
        .iter()
        .zip(&reports)
        .enumerate()
        .map(|(index, (s, r))| SolutionRecord {
            index,
            combo: s.combo,
            q: s.q,
            varsigmas: s.varsigmas,
            s_eigs: s.s_eigs,
            t: *s.t.entries(),
            classification: s.classification,
            triality: r.triality.into(),
            residual: s.residual,
            tensor_residual: dual_equation_residual(&s.t, tau, m) / tau_sq,
            det_f: s.det_f,
            det_f_sign: sign(s.det_f),
            beyond_theorem: s.beyond_theorem,
            energies: r.into(),
        })
        .collect();
    Ok(CensusOutput {
        k: m.k(),
        lambda: m.lambda(),
        mu: m.mu(),
        sigmas: census.sigmas,
        summary: Summary {
            positive: census.n_positive,
            negative: census.n_negative,
            mixed: census.n_mixed,
            total: census.solutions.len(),
        },
        regime: census.regime,
        min_residual: census.min_residual(),
        max_residual: census.max_residual(),
        solutions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail,
    }
}

/// Oracle cross-check and invariant suite for one problem.
pub fn verify_problem(problem: &Problem) -> Result<VerifyReport, Error> {
    let m = &problem.material;
    let tau = &problem.load.tau;
    let (census, reports) = census_with_energies(problem)?;
    let mut checks = Vec::new();

    let cfg = problem.oracle_config();
    cfg.validate().map_err(Error::InvalidParameter)?;
    let oracle = oracle_solve_all(&census.sigmas, census.k, &cfg);
    let ours: Vec<Vec3> = census.solutions.iter().map(|s| s.varsigmas).collect();
    let cmp = set_compare(&ours, &oracle, problem.options.match_tol);
    let detail = match &cmp {
        SetComparison::Match => format!("{} solutions matched", ours.len()),
        other => format!("{other:?}"),
    };
    checks.push(check("oracle_match", cmp.is_match(), detail));

    if census.regime.all_subcritical {
        let ok =
            census.n_positive == 1 && census.n_negative == 8 && (15..=18).contains(&census.n_mixed);
        checks.push(check(
            "census_counts",
            ok,
            format!(
                "({}, {}, {})",
                census.n_positive, census.n_negative, census.n_mixed
            ),
        ));
    } else {
        checks.push(check(
            "census_counts",
            census.n_positive == 1,
            format!(
                "supercritical load: ({}, {}, {}); only the positive solution is guaranteed",
                census.n_positive, census.n_negative, census.n_mixed
            ),
        ));
    }

    let max_res = census.max_residual();
    checks.push(check(
        "system_residual",
        max_res <= 1e-10,
        format!("max {max_res:e}"),
    ));

    let tau_sq = (tau.transpose() * *tau).norm_inf();
    let worst_tensor = census
        .solutions
        .iter()
        .map(|s| dual_equation_residual(&s.t, tau, m) / tau_sq)
        .fold(0.0, f64::max);
    checks.push(check(
        "tensor_residual",
        worst_tensor <= 1e-8,
        format!("max relative {worst_tensor:e}"),
    ));

    let worst_comp = reports
        .iter()
        .map(|r| r.complementarity_residual / r.scale)
        .fold(0.0, f64::max);
    checks.push(check(
        "complementarity",
        worst_comp <= 1e-10,
        format!("max scaled {worst_comp:e}"),
    ));

    let worst_const = reports
        .iter()
        .map(|r| r.constitutive_residual)
        .fold(0.0, f64::max);
    checks.push(check(
        "constitutive",
        worst_const <= 1e-9,
        format!("max {worst_const:e}"),
    ));

    let pos = census
        .solutions
        .iter()
        .position(|s| s.classification == Classification::Positive);
    match pos {
        Some(p) => {
            let rp = &reports[p];
            let others = reports
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != p)
                .map(|(_, r)| r.potential_density)
                .fold(f64::INFINITY, f64::min);
            checks.push(check(
                "global_minimizer",
                rp.potential_density < others && rp.hessian_min_eig >= -1e-8 * rp.scale,
                format!(
                    "potential {:e} vs next {:e}; hessian min eig {:e}",
                    rp.potential_density, others, rp.hessian_min_eig
                ),
            ));
            checks.push(check(
                "gap_nonnegative",
                rp.gap_density >= 0.0,
                format!("{:e}", rp.gap_density),
            ));
        }
        None => checks.push(check(
            "global_minimizer",
            false,
            "no positive solution".into(),
        )),
    }

    let tau_scale = tau.norm_inf();
    let mut worst_trip = 0.0_f64;
    for s in census
        .solutions
        .iter()
        .filter(|s| s.orientation_admissible())
    {
        let map = reconstruct_affine(tau, s, [0.0; 3], [0.0; 3])?;
        let f = map.gradient().expect("affine map");
        let p = first_pk_stress(&f, m)?;
        worst_trip = worst_trip.max(p.max_abs_diff(tau) / tau_scale);
    }
    checks.push(check(
        "round_trip",
        worst_trip <= 1e-8,
        format!("max relative {worst_trip:e}"),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub potential: f64,
    pub dual: f64,
    pub curl_residual: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOutput {
    pub solution: SolutionRecord,
    pub f: [[f64; 3]; 3],
    pub det_f: f64,
    pub x0: Vec3,
    pub chi0: Vec3,
    pub orientation_admissible: bool,
    /// `‖P(F) − τ‖∞ / ‖τ‖∞`.
    pub stress_round_trip: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<FunctionalRecord>,
}

/// Affine map of solution `index` plus energies; with a domain, also the
/// assembled functionals and the grid curl of `F`.
pub fn reconstruct_problem(
    problem: &Problem,
    index: usize,
) -> Result<(ReconstructOutput, Option<GridField<Vec3>>), Error> {
    let census = census_output(problem)?;
    let n = census.solutions.len();
    let record = census.solutions.get(index).cloned().ok_or_else(|| {
        Error::InvalidParameter(format!("solution index {index} out of range (0..{n})"))
    })?;
    let m = &problem.material;
    let tau = &problem.load.tau;
    let sol = solve_load(&problem.load, m).solutions.swap_remove(index);
    let (x0, chi0) = (problem.options.x0, problem.options.chi0);
    let map = reconstruct_affine(tau, &sol, x0, chi0)?;
    let f = map.gradient().expect("affine map");
    let p = crate::material::first_pk_stress_unchecked(&f, m);
    let mut grid = None;
    let functionals = match &problem.domain {
        Some(dom) => {
            let field = sample_tensor_field(dom, |_| f);
            let positions = GridField {
                n: dom.n,
                values: (0..dom.node_count())
                    .map(|i| map.eval(dom.node(dom.unflat(i))).expect("affine map"))
                    .collect(),
            };
            grid = Some(positions);
            Some(FunctionalRecord {
                potential: potential_functional(dom, &map, tau, m)?,
                dual: dual_functional(dom, &map, tau, &sol.t, m)?,
                curl_residual: curl_residual(&field, dom),
                nodes: dom.node_count(),
            })
        }
        None => None,
    };
    Ok((
        ReconstructOutput {
            solution: record,
            f: f.0,
            det_f: f.det(),
            x0,
            chi0,
            orientation_admissible: sol.orientation_admissible(),
            stress_round_trip: p.max_abs_diff(tau) / tau.norm_inf(),
            functionals,
        },
        grid,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub k: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_mixed: usize,
    pub min_residual: f64,
    pub max_residual: f64,
}

pub const SWEEP_HEADER: &str =
    "sigma1,sigma2,sigma3,k,n_pos,n_neg,n_mixed,min_residual,max_residual";

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e}",
            self.sigma1,
            self.sigma2,
            self.sigma3,
            self.k,
            self.n_pos,
            self.n_neg,
            self.n_mixed,
            self.min_residual,
            self.max_residual
        )
    }
}

/// `n` evenly spaced values on `[a, b]` (just `a` when `n == 1`).
pub fn grid_values(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Census counts over the `n³` grid of `(σ₁, σ₂, σ₃)`, σ₁ slowest.
pub fn sweep(k: f64, mu: f64, n: usize, a: f64, b: f64) -> Result<Vec<SweepRow>, Error> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sigma grid needs at least one point".into(),
        ));
    }
    if !(a > 0.0 && a <= b && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "range must satisfy 0 < a <= b, got {a}:{b}"
        )));
    }
    let m = MaterialParams::from_k(k, mu)?;
    let vals = grid_values(a, b, n);
    (0..n * n * n)
        .into_par_iter()
        .map(|i| {
            let s = [vals[i / (n * n)], vals[(i / n) % n], vals[i % n]];
            let census = solve_load(&SpectralLoad::from_sigmas(s, &m)?, &m);
            Ok(SweepRow {
                sigma1: s[0],
                sigma2: s[1],
                sigma3: s[2],
                k: census.k,
                n_pos: census.n_positive,
                n_neg: census.n_negative,
                n_mixed: census.n_mixed,
                min_residual: census.min_residual(),
                max_residual: census.max_residual(),
            })
        })
        .collect()
}

/// Error surfaced by a command: kind, message and exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn malformed(message: String) -> Self {
        CliError {
            kind: "MalformedInput".into(),
            message,
            code: 2,
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            kind: "Io".into(),
            message: format!("{}: {e}", path.display()),
            code: 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            kind: e.kind().into(),
            message: e.to_string(),
            code: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "svk-dual",
    version,
    about = "Enumerate and classify canonical dual solutions for St Venant-Kirchhoff material"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full solution census as JSON.
    Solve { input: PathBuf },
    /// Census counts over an n³ grid of scaled loads.
    Sweep {
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long = "sigma-grid")]
        sigma_grid: usize,
        /// Closed interval `a:b` for every σᵢ.
        #[arg(long)]
        range: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
    },
    /// Oracle cross-check and invariant suite; exit 1 on failure.
    Verify { input: PathBuf },
    /// Affine deformation map and energies of one solution.
    Reconstruct {
        input: PathBuf,
        #[arg(long)]
        solution: usize,
        /// Write reconstructed nodal positions (requires a domain).
        #[arg(long = "grid-csv")]
        grid_csv: Option<PathBuf>,
    },
}

fn load_problem(path: &Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ProblemInput::from_json(&text)?.resolve()
}

fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::malformed(format!("range must look like a:b, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output types serialize")
}

fn dispatch(cmd: Command, out: &mut Vec<u8>) -> Result<i32, CliError> {
    let io = |e: std::io::Error| CliError {
        kind: "Io".into(),
        message: e.to_string(),
        code: 2,
    };
    match cmd {
        Command::Solve { input } => {
            let problem = load_problem(&input)?;
            writeln!(out, "{}", to_json(&census_output(&problem)?)).map_err(io)?;
            Ok(0)
        }
        Command::Sweep {
            k,
            mu,
            sigma_grid,
            range,
            out: format,
        } => {
            let (a, b) = parse_range(&range)?;
            let rows = sweep(k, mu, sigma_grid, a, b)?;
            match format {
                OutFormat::Csv => {
                    writeln!(out, "{SWEEP_HEADER}").map_err(io)?;
                    for r in &rows {
                        writeln!(out, "{}", r.csv()).map_err(io)?;
                    }
                }
                OutFormat::Json => writeln!(out, "{}", to_json(&rows)).map_err(io)?,
            }
            Ok(0)
        }
        Command::Verify { input } => {
            let problem = load_problem(&input)?;
            let report = verify_problem(&problem)?;
            writeln!(out, "{}", to_json(&report)).map_err(io)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Reconstruct {
            input,
            solution,
            grid_csv,
        } => {
            let problem = load_problem(&input)?;
            let (report, grid) = reconstruct_problem(&problem, solution)?;
            if let Some(path) = grid_csv {
                let (Some(dom), Some(grid)) = (&problem.domain, grid) else {
                    return Err(CliError::malformed(
                        "--grid-csv needs a `domain` in the input".into(),
                    ));
                };
                let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
                write_position_grid_csv(dom, &grid, std::io::BufWriter::new(file))
                    .map_err(|e| CliError::io(&path, e))?;
            }
            writeln!(out, "{}", to_json(&report)).map_err(io)?;
            Ok(0)
        }
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("KD_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::malformed(format!(
                "KD_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn write_error(err: &mut dyn Write, e: &CliError) {
    let body = serde_json::json!({ "error": e.kind, "message": e.message });
    let _ = writeln!(err, "{body}");
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_command<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            write_error(
                err,
                &CliError {
                    kind: "Usage".into(),
                    message: e.to_string().trim_end().into(),
                    code: 2,
                },
            );
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = thread_cap().and_then(|cap| match cap {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::malformed(e.to_string()))?
            .install(|| dispatch(cli.command, &mut buf)),
        None => dispatch(cli.command, &mut buf),
    });
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            write_error(err, &e);
            e.code
        }
    }
}

/// Branch labels of a combination as printed in tables, e.g. `"(1,2,3)"`.
pub fn combo_label(c: &Combo) -> String {
    let v: Vec<String> = c.iter().map(|b: &BranchId| b.to_string()).collect();
    format!("({})", v.join(","))
}
