//! Batch front door: generate fields, run experiments, solve Monge-Ampere
//! problems, and emit CSV/JSON artifacts.
//!
//! One command per process invocation. Exit status 0 means every recorded
//! assertion passed; 2 means the run completed but at least one assertion
//! failed (artifacts are still written); 1 means a usage or I/O error.
//! Outputs are byte-stable for a fixed config and seed: wall time is recorded
//! only in the JSON summary, never in CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::experiments::{
    check_quasiconcavity, counterexample_cross_check, proof_terms, usc_probe,
    young_measure_estimate, ProofTermsReport,
};
use crate::fields::{MatrixField, Sampling, TorusGrid};
use crate::generators::{
    cofactor_hessian_field, counterexample_field, oscillation_sequence, unit_ball_volume,
    AnalyticCounterexample, SequenceSpec,
};
use crate::io::{
    read_config, write_csv, AssertionResult, Cell, FieldContainer, RunSummary,
};
use crate::ma::{select_reference_matrix, solve_periodic_ma, MAError, Normalization, ReferenceMode};
use crate::sym::SymMatrix;
use crate::util::fmt_f64;

const CONFIG_EXAMPLE: &str = "example config stanza:\n  n = 2\n  m = 64\n  k = 1..5\n  p = 2.0\n  margin = 0.1\n  R = 0.25\n  amplitude = 0.01\n  seed = 7\n  family = oscillation\n  out = runs/demo";

/// A usage or I/O failure; always maps to exit status 1.
#[derive(Debug)]
pub struct CliError(String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

fn usage(key: &str, detail: String) -> CliError {
    CliError(format!("invalid `{key}`: {detail}\n{CONFIG_EXAMPLE}"))
}

#[derive(Parser, Debug)]
#[command(
    name = "detlab",
    about = "Determinant-functional laboratory on the periodic torus",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a matrix field and write it as a container file.
    Gen(CommonArgs),
    /// Evaluate the determinant functional and norms of a field file.
    Functional(CommonArgs),
    /// Quasiconcavity gap of a field file.
    Quasiconcavity(CommonArgs),
    /// Solve the periodic Monge-Ampere problem for a scalar data file.
    MaSolve(CommonArgs),
    /// Upper-semicontinuity probe along a field sequence.
    ProbeUsc(CommonArgs),
    /// Analytic concentration family table with sampled cross-check.
    Counterexample(CommonArgs),
    /// Localized proof-term table (I, II, III, gamma, slack).
    ProofTerms(CommonArgs),
    /// Young-measure moment estimates for an oscillation family.
    Young(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Functional(_) => "functional",
            Command::Quasiconcavity(_) => "quasiconcavity",
            Command::MaSolve(_) => "ma-solve",
            Command::ProbeUsc(_) => "probe-usc",
            Command::Counterexample(_) => "counterexample",
            Command::ProofTerms(_) => "proof-terms",
            Command::Young(_) => "young",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Gen(a)
            | Command::Functional(a)
            | Command::Quasiconcavity(a)
            | Command::MaSolve(a)
            | Command::ProbeUsc(a)
            | Command::Counterexample(a)
            | Command::ProofTerms(a)
            | Command::Young(a) => a,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Torus dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Grid resolution per axis (power of two).
    #[arg(long)]
    m: Option<usize>,
    /// Scale index or inclusive range, e.g. `3` or `1..5`.
    #[arg(long)]
    k: Option<String>,
    /// Lebesgue exponent for norm reports.
    #[arg(long)]
    p: Option<f64>,
    /// Cutoff margin for localized constructions.
    #[arg(long)]
    margin: Option<f64>,
    /// Window scale for localized constructions.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Perturbation amplitude for generated fields.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Output directory for CSV/JSON/container artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed for randomized sampling; recorded in every summary.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, KEY=VAL; repeatable.
    #[arg(long = "tol-override")]
    tol_override: Vec<String>,
    /// Flat key = value config file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input field container file (for commands that read a field).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Field family: counterexample | cofactor-hessian | oscillation |
    /// mollified | constant.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Debug)]
/// Fully resolved run parameters: config file first, command line on top,
/// defaults underneath. The `echo` map reproduces the effective values in the
/// summary.
struct RunConfig {
    n: usize,
    m: usize,
    k_range: Vec<u32>,
    p: f64,
    margin: f64,
    r: f64,
    amplitude: f64,
    out: PathBuf,
    seed: u64,
    tols: BTreeMap<String, f64>,
    input: Option<PathBuf>,
    family: String,
    echo: BTreeMap<String, String>,
}

fn parse_k_range(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = |t: &str| usage("k", format!("`{t}` is not an index or inclusive range like 1..5"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad(text))?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad(text))?;
        if lo > hi {
            return Err(bad(text));
        }
        Ok((lo..=hi).collect())
    } else {
        let k: u32 = text.trim().parse().map_err(|_| bad(text))?;
        Ok(vec![k])
    }
}

impl RunConfig {
    fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> = match &args.config {
            Some(path) => read_config(path)
                .map_err(|e| usage("config", format!("{}: {e}", path.display())))?,
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v);
            }
        };
        set("n", args.n.map(|v| v.to_string()));
        set("m", args.m.map(|v| v.to_string()));
        set("k", args.k.clone());
        set("p", args.p.map(fmt_f64));
        set("margin", args.margin.map(fmt_f64));
        set("R", args.r.map(fmt_f64));
        set("amplitude", args.amplitude.map(fmt_f64));
        set("out", args.out.as_ref().map(|v| v.display().to_string()));
        set("seed", args.seed.map(|v| v.to_string()));
        set("input", args.input.as_ref().map(|v| v.display().to_string()));
        set("family", args.family.clone());
        for item in &args.tol_override {
            let Some((key, value)) = item.split_once('=') else {
                return Err(usage(
                    "tol-override",
                    format!("`{item}` is not of the form KEY=VAL"),
                ));
            };
            map.insert(format!("tol.{}", key.trim()), value.trim().to_string());
        }

        let get_usize = |map: &BTreeMap<String, String>, key: &str, default: usize| {
            match map.get(key) {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| usage(key, format!("`{v}` is not a positive integer"))),
                None => Ok(default),
            }
        };
        let get_f64 = |map: &BTreeMap<String, String>, key: &str, default: f64| {
            match map.get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| usage(key, format!("`{v}` is not a number"))),
                None => Ok(default),
            }
        };
        let get_u64 = |map: &BTreeMap<String, String>, key: &str, default: u64| {
            match map.get(key) {
                Some(v) => v
                    .parse::<u64>()
                    .map_err(|_| usage(key, format!("`{v}` is not a non-negative integer"))),
                None => Ok(default),
            }
        };

        let mut tols = BTreeMap::new();
        for (key, value) in map.iter() {
            if let Some(name) = key.strip_prefix("tol.") {
                let v: f64 = value
                    .parse()
                    .map_err(|_| usage(key, format!("`{value}` is not a number")))?;
                if !(v >= f64::EPSILON) {
                    return Err(usage(
                        key,
                        format!("tolerance {value} must be at least machine epsilon"),
                    ));
                }
                tols.insert(name.to_string(), v);
            }
        }

        let config = RunConfig {
            n: get_usize(&map, "n", 2)?,
            m: get_usize(&map, "m", 64)?,
            k_range: match map.get("k") {
                Some(v) => parse_k_range(v)?,
                None => vec![1],
            },
            p: get_f64(&map, "p", 2.0)?,
            margin: get_f64(&map, "margin", 0.1)?,
            r: get_f64(&map, "R", 0.25)?,
            amplitude: get_f64(&map, "amplitude", 0.01)?,
            out: PathBuf::from(map.get("out").cloned().unwrap_or_else(|| ".".to_string())),
            seed: get_u64(&map, "seed", 0)?,
            tols,
            input: map.get("input").map(PathBuf::from),
            family: map
                .get("family")
                .cloned()
                .unwrap_or_else(|| "oscillation".to_string()),
            echo: map,
        };
        Ok(config)
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        self.tols.get(name).copied().unwrap_or(default)
    }

    fn grid(&self) -> Result<TorusGrid, CliError> {
        TorusGrid::new(self.n, self.m)
            .map_err(|e| usage("n/m", format!("grid n={} m={}: {e}", self.n, self.m)))
    }

    fn center(&self) -> Vec<f64> {
        vec![0.5; self.n]
    }

    fn input_path(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| usage("input", "this command requires an input field file".to_string()))
    }

    fn read_matrix(&self) -> Result<MatrixField, CliError> {
        let path = self.input_path()?;
        FieldContainer::read(path)
            .and_then(FieldContainer::into_matrix)
            .map_err(|e| usage("input", format!("{}: {e}", path.display())))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Seeded random mode multi-indices for the divergence-free generator.
    /// Entries stay in {0, 1} so the perturbed potential remains convex at
    /// the default amplitude (the Hessian scale grows like (2*pi*q)^2).
    fn random_modes(&self, count: usize) -> Vec<Vec<i64>> {
        let mut rng = self.rng();
        (0..count)
            .map(|_| loop {
                let mode: Vec<i64> = (0..self.n).map(|_| rng.gen_range(0..=1)).collect();
                if mode.iter().any(|&q| q != 0) {
                    break mode;
                }
            })
            .collect()
    }

    fn base_field(&self) -> Result<MatrixField, CliError> {
        cofactor_hessian_field(self.n, self.amplitude, &self.random_modes(2), self.grid()?)
            .map_err(|e| usage("amplitude", e.to_string()))
    }
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap already formats usage help; --help/--version exit 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn run(command: &Command) -> Result<bool, CliError> {
    let started = Instant::now();
    let config = RunConfig::resolve(command.args())?;
    std::fs::create_dir_all(&config.out)
        .map_err(|e| usage("out", format!("{}: {e}", config.out.display())))?;

    let assertions = match command {
        Command::Gen(_) => cmd_gen(&config)?,
        Command::Functional(_) => cmd_functional(&config)?,
        Command::Quasiconcavity(_) => cmd_quasiconcavity(&config)?,
        Command::MaSolve(_) => cmd_ma_solve(&config)?,
        Command::ProbeUsc(_) => cmd_probe_usc(&config)?,
        Command::Counterexample(_) => cmd_counterexample(&config)?,
        Command::ProofTerms(_) => cmd_proof_terms(&config)?,
        Command::Young(_) => cmd_young(&config)?,
    };

    let mut echo = config.echo.clone();
    echo.entry("seed".to_string())
        .or_insert_with(|| config.seed.to_string());
    let summary = RunSummary {
        command: command.name().to_string(),
        config: echo,
        assertions,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let path = config.out.join(format!("{}_summary.json", command.name()));
    summary
        .write(&path)
        .map_err(|e| usage("out", format!("{}: {e}", path.display())))?;
    Ok(summary.all_passed())
}

fn write_artifact_csv(
    config: &RunConfig,
    name: &str,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> Result<(), CliError> {
    let path = config.out.join(name);
    write_csv(&path, header, rows).map_err(|e| usage("out", format!("{}: {e}", path.display())))
}

fn build_family_field(config: &RunConfig) -> Result<MatrixField, CliError> {
    let grid = config.grid()?;
    match config.family.as_str() {
        "counterexample" => {
            let (field, _) =
                counterexample_field(config.n, &config.center(), config.k_range[0], grid)
                    .map_err(|e| usage("k", e.to_string()))?;
            Ok(field)
        }
        "cofactor-hessian" => config.base_field(),
        "oscillation" => {
            let base = config.base_field()?;
            oscillation_sequence(&base, config.k_range[0]).map_err(|e| usage("k", e.to_string()))
        }
        "constant" => {
            let id = SymMatrix::identity(config.n)
                .map_err(|e| usage("n", e.to_string()))?;
            MatrixField::constant(grid, &id, true).map_err(|e| usage("n", e.to_string()))
        }
        other => Err(usage(
            "family",
            format!("`{other}` is not one of counterexample | cofactor-hessian | oscillation | constant"),
        )),
    }
}

fn cmd_gen(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let field = build_family_field(config)?;
    let path = config.out.join("field.json");
    FieldContainer::from_matrix(&field)
        .write(&path)
        .map_err(|e| usage("out", format!("{}: {e}", path.display())))?;
    let psd = field.psd_flag();
    Ok(vec![AssertionResult::new(
        "field_psd",
        psd,
        format!("family={} psd_flag={psd}", config.family),
    )])
}

fn cmd_functional(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let field = config.read_matrix()?;
    let d = field
        .functional_d()
        .map_err(|e| usage("input", e.to_string()))?;
    let lp = field
        .lp_norm(config.p)
        .map_err(|e| usage("p", e.to_string()))?;
    let mean_det = field.mean_matrix().determinant();
    write_artifact_csv(
        config,
        "functional.csv",
        &["p", "d", "lp_norm", "det_mean"],
        &[vec![
            Cell::Float(config.p),
            Cell::Float(d),
            Cell::Float(lp),
            Cell::Float(mean_det),
        ]],
    )?;
    Ok(vec![AssertionResult::new(
        "finite",
        d.is_finite() && lp.is_finite(),
        format!("d = {}, lp = {}", fmt_f64(d), fmt_f64(lp)),
    )])
}

fn cmd_quasiconcavity(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let field = config.read_matrix()?;
    let report = check_quasiconcavity(&field).map_err(|e| usage("input", e.to_string()))?;
    let div_tv = report.div_tv;
    write_artifact_csv(
        config,
        "quasiconcavity.csv",
        &["gap", "div_tv"],
        &[vec![
            Cell::Float(report.gap),
            Cell::Float(div_tv.unwrap_or(f64::NAN)),
        ]],
    )?;
    let tol = config.tol("gap", 1e-8);
    let divergence_free = div_tv.is_some_and(|tv| tv <= tol * (1.0 + field.linf_norm()));
    let assertion = if divergence_free {
        AssertionResult::new(
            "gap_nonnegative",
            report.gap >= -tol,
            format!("gap = {} (tol {})", fmt_f64(report.gap), fmt_f64(tol)),
        )
    } else {
        AssertionResult::new(
            "gap_reported",
            true,
            format!(
                "gap = {}; field is not divergence-free, inequality not asserted",
                fmt_f64(report.gap)
            ),
        )
    };
    Ok(vec![assertion])
}

fn cmd_ma_solve(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let path = config.input_path()?;
    let f = FieldContainer::read(path)
        .and_then(FieldContainer::into_scalar)
        .map_err(|e| usage("input", format!("{}: {e}", path.display())))?;
    let (s, lambda) = select_reference_matrix(&f, ReferenceMode::Isotropic)
        .map_err(|e| usage("input", e.to_string()))?;
    let problem = crate::ma::MAProblem::new(f, s.clone(), Normalization::MeanZero)
        .map_err(|e| usage("input", e.to_string()))?;
    let (result, stalled) = match solve_periodic_ma(&problem) {
        Ok(result) => (result, false),
        Err(MAError::NewtonStall { best, .. }) => (*best, true),
        Err(e) => return Err(usage("input", e.to_string())),
    };

    let phi_path = config.out.join("phi.json");
    FieldContainer::from_scalar(&result.phi)
        .write(&phi_path)
        .map_err(|e| usage("out", format!("{}: {e}", phi_path.display())))?;
    let mut rows = vec![vec![
        Cell::Float(result.residual_inf),
        Cell::Float(result.residual_l2),
        Cell::Int(result.newton_iters as i64),
        Cell::Float(result.min_hessian_eig),
        Cell::Int(result.regularized as i64),
    ]];
    rows[0].push(Cell::Float(lambda.unwrap_or(f64::NAN)));
    write_artifact_csv(
        config,
        "ma_solve.csv",
        &[
            "residual_inf",
            "residual_l2",
            "newton_iters",
            "min_hessian_eig",
            "regularized",
            "lambda",
        ],
        &rows,
    )?;

    let default_tol = if config.n == 2 { 1e-9 } else { 1e-7 };
    let tol = config.tol("residual_inf", default_tol);
    Ok(vec![
        AssertionResult::new(
            "residual_inf",
            result.residual_inf <= tol,
            format!(
                "residual_inf = {} (tol {}, stalled = {stalled})",
                fmt_f64(result.residual_inf),
                fmt_f64(tol)
            ),
        ),
        AssertionResult::new(
            "solution_convex",
            result.min_hessian_eig > 0.0,
            format!("min_hessian_eig = {}", fmt_f64(result.min_hessian_eig)),
        ),
    ])
}

fn cmd_probe_usc(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let spec = match config.family.as_str() {
        "counterexample" => SequenceSpec::Counterexample {
            n: config.n,
            x0: config.center(),
            k_range: config.k_range.clone(),
        },
        "oscillation" => SequenceSpec::Oscillation {
            base: config.base_field()?,
            k_range: config.k_range.clone(),
        },
        "mollified" => SequenceSpec::Mollified {
            base: config.base_field()?,
            eps_schedule: config
                .k_range
                .iter()
                .map(|&k| 0.5f64.powi(k as i32))
                .collect(),
        },
        "constant" => {
            let id = SymMatrix::identity(config.n).map_err(|e| usage("n", e.to_string()))?;
            SequenceSpec::Constant {
                field: MatrixField::constant(config.grid()?, &id, true)
                    .map_err(|e| usage("n", e.to_string()))?,
                count: config.k_range.len(),
            }
        }
        other => {
            return Err(usage(
                "family",
                format!("`{other}` is not one of counterexample | oscillation | mollified | constant"),
            ))
        }
    };
    let report = usc_probe(&spec, config.p).map_err(|e| usage("family", e.to_string()))?;
    let rows: Vec<Vec<Cell>> = report
        .rows
        .iter()
        .map(|row| {
            vec![
                Cell::Int(row.k as i64),
                Cell::Float(row.d_ak),
                Cell::Float(row.lp_critical),
                Cell::Float(row.lp_chosen),
                Cell::Float(row.div_tv),
            ]
        })
        .collect();
    write_artifact_csv(
        config,
        "probe_usc.csv",
        &["k", "d_ak", "lp_critical", "lp_chosen", "div_tv"],
        &rows,
    )?;

    let assertion = match config.family.as_str() {
        "oscillation" | "constant" => {
            let tol = config.tol("gap", 1e-8);
            AssertionResult::new(
                "usc_gap",
                report.gap <= tol,
                format!("gap = {} (tol {})", fmt_f64(report.gap), fmt_f64(tol)),
            )
        }
        "counterexample" => {
            let expected = unit_ball_volume(config.n);
            AssertionResult::new(
                "usc_gap_equals_ball_volume",
                (report.gap - expected).abs() <= 1e-12,
                format!(
                    "gap = {}, expected {}",
                    fmt_f64(report.gap),
                    fmt_f64(expected)
                ),
            )
        }
        _ => AssertionResult::new(
            "gap_reported",
            true,
            format!("gap = {}", fmt_f64(report.gap)),
        ),
    };
    Ok(vec![assertion])
}

fn cmd_counterexample(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let expected = unit_ball_volume(config.n);
    let mut rows = Vec::new();
    let mut analytic_constant = true;
    let mut worst_sample_rel = 0.0f64;
    for &k in &config.k_range {
        // The sampled cross-check needs the concentration ball resolved by at
        // least 8 nodes per axis, so raise the resolution with k as needed.
        let m_k = config.m.max(8usize << k);
        let grid = TorusGrid::new(config.n, m_k)
            .map_err(|e| usage("n/m", format!("grid n={} m={m_k}: {e}", config.n)))?;
        let (sampled_d, record): (f64, AnalyticCounterexample) =
            counterexample_cross_check(config.n, &config.center(), k, grid)
                .map_err(|e| usage("k", e.to_string()))?;
        analytic_constant &= record.exact_d() == expected;
        worst_sample_rel = worst_sample_rel.max((sampled_d - expected).abs() / expected);
        rows.push(vec![
            Cell::Int(k as i64),
            Cell::Float(record.support_radius()),
            Cell::Float(record.exact_d()),
            Cell::Float(sampled_d),
            Cell::Float(record.exact_lp(config.p)),
            Cell::Float(record.exact_div_tv()),
        ]);
    }
    write_artifact_csv(
        config,
        "counterexample.csv",
        &["k", "support_radius", "d", "d_sampled", "lp_norm", "div_tv"],
        &rows,
    )?;
    Ok(vec![
        AssertionResult::new(
            "d_constant_in_k",
            analytic_constant,
            format!("d = {} for every k", fmt_f64(expected)),
        ),
        AssertionResult::new(
            "sampled_d_reported",
            true,
            format!(
                "worst relative sampling deviation {} at m = {}",
                fmt_f64(worst_sample_rel),
                config.m
            ),
        ),
    ])
}

fn cmd_proof_terms(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let base = config.base_field()?;
    let aconst = SymMatrix::identity(config.n).map_err(|e| usage("n", e.to_string()))?;
    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    for &k in &config.k_range {
        let ak = oscillation_sequence(&base, k).map_err(|e| usage("k", e.to_string()))?;
        let report: ProofTermsReport = proof_terms(
            &ak,
            &aconst,
            &config.center(),
            config.r,
            config.margin,
            k as usize,
        )
        .map_err(|e| usage("k", e.to_string()))?;
        rows.push(vec![
            Cell::Int(report.k as i64),
            Cell::Float(report.r),
            Cell::Float(report.i_term),
            Cell::Float(report.ii_term),
            Cell::Float(report.iii_term),
            Cell::Float(report.iii1),
            Cell::Float(report.iii2),
            Cell::Float(report.iii3),
            Cell::Float(report.gamma),
            Cell::Float(report.lambda),
            Cell::Float(report.epsilon),
            Cell::Float(report.slack),
            Cell::Float(report.residual_inf),
            Cell::Int(report.newton_iters as i64),
        ]);
        assertions.push(AssertionResult::new(
            &format!("slack_k{k}"),
            report.slack_ok(),
            format!(
                "slack = {} vs -1e-6*(1+II) = {}",
                fmt_f64(report.slack),
                fmt_f64(-1e-6 * (1.0 + report.ii_term))
            ),
        ));
        assertions.push(AssertionResult::new(
            &format!("gamma_bound_k{k}"),
            report.gamma_bound_ok(config.n),
            format!(
                "gamma = {}, epsilon = {}",
                fmt_f64(report.gamma),
                fmt_f64(report.epsilon)
            ),
        ));
    }
    write_artifact_csv(
        config,
        "proof_terms.csv",
        &[
            "k",
            "R",
            "i",
            "ii",
            "iii",
            "iii1",
            "iii2",
            "iii3",
            "gamma",
            "lambda",
            "epsilon",
            "slack",
            "residual_inf",
            "newton_iters",
        ],
        &rows,
    )?;
    Ok(assertions)
}

fn cmd_young(config: &RunConfig) -> Result<Vec<AssertionResult>, CliError> {
    let field = match &config.input {
        Some(_) => config.read_matrix()?,
        None => {
            let base = config.base_field()?;
            oscillation_sequence(&base, config.k_range[0])
                .map_err(|e| usage("k", e.to_string()))?
        }
    };
    let tol = config.tol("moment", 1e-8);
    let bound = field
        .mean_matrix()
        .determinant()
        .max(0.0)
        .powf(1.0 / (config.n as f64 - 1.0));
    let (estimate, violated) = match young_measure_estimate(&field, true) {
        Ok(est) => (est, false),
        Err(crate::experiments::ExpError::MomentViolation { .. }) => {
            (young_measure_estimate(&field, false).map_err(|e| usage("input", e.to_string()))?, true)
        }
        Err(e) => return Err(usage("input", e.to_string())),
    };
    let mut rows = vec![vec![
        Cell::Text("det_moment".to_string()),
        Cell::Float(estimate.det_moment),
    ]];
    if let Some(moments) = &estimate.moments {
        for (i, value) in moments.iter().enumerate() {
            rows.push(vec![
                Cell::Text(format!("elementary_symmetric_{i}")),
                Cell::Float(*value),
            ]);
        }
    }
    rows.push(vec![Cell::Text("bound".to_string()), Cell::Float(bound)]);
    write_artifact_csv(config, "young.csv", &["moment", "value"], &rows)?;
    let divergence_free = matches!(field.sampling(), Sampling::Smooth)
        && field
            .divergence()
            .map(|d| d.tv_estimate <= tol * (1.0 + field.linf_norm()))
            .unwrap_or(false);
    let assertion = if divergence_free {
        AssertionResult::new(
            "det_moment_bounded",
            !violated && estimate.det_moment <= bound + tol,
            format!(
                "det_moment = {} vs bound {} + {}",
                fmt_f64(estimate.det_moment),
                fmt_f64(bound),
                fmt_f64(tol)
            ),
        )
    } else {
        AssertionResult::new(
            "det_moment_reported",
            true,
            format!(
                "det_moment = {}; field is not divergence-free, bound not asserted",
                fmt_f64(estimate.det_moment)
            ),
        )
    };
    Ok(vec![assertion])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_range_parsing_handles_single_and_range() {
        assert_eq!(parse_k_range("3").unwrap(), vec![3]);
        assert_eq!(parse_k_range("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert!(parse_k_range("5..1").is_err());
        assert!(parse_k_range("abc").is_err());
    }

    #[test]
    fn cli_flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("run.cfg");
        std::fs::write(&config_path, "n = 2\nm = 32\nseed = 9\n").unwrap();
        let args = CommonArgs {
            n: None,
            m: Some(64),
            k: None,
            p: None,
            margin: None,
            r: None,
            amplitude: None,
            out: None,
            seed: None,
            tol_override: vec!["gap=1e-7".to_string()],
            config: Some(config_path),
            input: None,
            family: None,
        };
        let config = RunConfig::resolve(&args).unwrap();
        assert_eq!(config.m, 64);
        assert_eq!(config.seed, 9);
        assert_eq!(config.tol("gap", 1e-8), 1e-7);
    }

    #[test]
    fn tolerance_overrides_below_epsilon_are_usage_errors() {
        let args = CommonArgs {
            n: None,
            m: None,
            k: None,
            p: None,
            margin: None,
            r: None,
            amplitude: None,
            out: None,
            seed: None,
            tol_override: vec!["gap=0".to_string()],
            config: None,
            input: None,
            family: None,
        };
        let err = RunConfig::resolve(&args).unwrap_err();
        assert!(err.to_string().contains("machine epsilon"));
    }

    #[test]
    fn seeded_modes_are_deterministic() {
        let args = CommonArgs {
            n: Some(2),
            m: Some(16),
            k: None,
            p: None,
            margin: None,
            r: None,
            amplitude: None,
            out: None,
            seed: Some(11),
            tol_override: vec![],
            config: None,
            input: None,
            family: None,
        };
        let config = RunConfig::resolve(&args).unwrap();
        assert_eq!(config.random_modes(3), config.random_modes(3));
    }
}
