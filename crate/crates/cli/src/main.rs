//! `walkprint`: command-line access to exact return probabilities, spectral
//! diagnostics, walk reconstruction and the representation bridge.

mod render;

use std::fmt::Debug;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use walkprint::emit::{format_significant, returns_csv};
use walkprint::io::{self, FormatError};
use walkprint::montecarlo::consistency_test;
use walkprint::rational::{format_rational, to_f64};
use walkprint::reconstruct::{reconstruct, verify};
use walkprint::rep::{dims_to_rep, invariant_dims, rep_to_walk, validate_rep, walk_to_rep};
use walkprint::returns::{distinguishing_index, growth_diagnostics, return_sequence};
use walkprint::spectral::{spectral_report, variance, SpectralOptions};
use walkprint::walk::classify;
use walkprint::{StepDistribution, WeightDecomposition};

use render::{render, Format, Rows};

pub const THREADS_ENV: &str = "WALKPRINT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "walkprint",
    version,
    about = "Return probabilities of symmetric lattice walks"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Symmetry, primitivity, properness and type of a walk.
    Classify(WalkArg),
    /// Exact return probabilities c_1..c_K.
    Returns {
        #[command(flatten)]
        walk: WalkArg,
        #[arg(long)]
        k: u32,
        /// Also report n-th roots and the variance lower bound.
        #[arg(long)]
        diagnostics: bool,
    },
    /// First index where two walks' return probabilities differ.
    Equiv {
        #[arg(long)]
        walk_a: PathBuf,
        #[arg(long)]
        walk_b: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: u32,
    },
    /// Cosine-integral diagnostics of a symmetric walk.
    Spectral {
        #[command(flatten)]
        walk: WalkArg,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 12)]
        max_n: u32,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.2, 0.5])]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 5, 10, 15])]
        decay_n: Vec<u32>,
    },
    /// Fit a symmetric walk to target return probabilities.
    Reconstruct {
        #[arg(long)]
        problem: PathBuf,
        /// Recheck the rounded walk up to this index (default K + 10).
        #[arg(long)]
        recheck: Option<usize>,
        /// Write the rounded walk here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walk of a weight decomposition.
    Rep2walk {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest weight decomposition realizing a walk.
    Walk2rep {
        #[command(flatten)]
        walk: WalkArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant dimensions d_1..d_K of tensor powers.
    Dims {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a weight decomposition from invariant dimensions.
    Dims2rep {
        #[arg(long)]
        dims: PathBuf,
        /// Largest absolute weight allowed.
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of c_n checked against the exact value.
    Simulate {
        #[command(flatten)]
        walk: WalkArg,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4.0)]
        z_max: f64,
    },
}

#[derive(Debug, Args)]
struct WalkArg {
    #[arg(long)]
    walk: PathBuf,
}

#[derive(Debug)]
enum CliError {
    /// Bad flags, unreadable or malformed files: exit 2.
    Usage(String),
    /// Valid input with no answer: exit 1.
    Domain { kind: String, message: String },
}

impl CliError {
    fn domain<E: Debug + std::fmt::Display>(e: E) -> Self {
        let debug = format!("{e:?}");
        let kind = debug
            .split(|c: char| !c.is_alphanumeric() && c != '_')
            .next()
            .unwrap_or_default()
            .to_owned();
        Self::Domain {
            kind,
            message: e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Domain { .. } => 1,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        Self::Usage(e.to_string())
    }
}

type Outcome = Result<String, CliError>;

fn read_walk(arg: &WalkArg) -> Result<StepDistribution, CliError> {
    Ok(io::parse_walk_file(&arg.walk)?)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text.to_owned() + "\n")
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn approx(q: &walkprint::Rational) -> String {
    format_significant(to_f64(q), 12)
}

fn walk_rows(w: &StepDistribution) -> (Rows, Vec<Value>) {
    let mut rows = Rows::new(["step", "prob", "prob_approx"]);
    let mut records = Vec::new();
    for (s, p) in w.entries() {
        rows.push([s.to_string(), format_rational(p), approx(p)]);
        records.push(json!({ "step": s, "prob": format_rational(p) }));
    }
    (rows, records)
}

fn rep_rows(r: &WeightDecomposition) -> (Rows, Vec<Value>) {
    let mut rows = Rows::new(["weight", "mult"]).titled(format!("dimension {}", r.dim()));
    let mut records = Vec::new();
    for (w, m) in r.entries() {
        rows.push([w.to_string(), m.to_string()]);
        records.push(json!({ "weight": w, "mult": m }));
    }
    (rows, records)
}

fn run_classify(format: Format, arg: &WalkArg) -> Outcome {
    let w = read_walk(arg)?;
    let c = classify(&w);
    let mut rows = Rows::new(["property", "value"]);
    rows.push(["symmetric".into(), c.symmetric.to_string()]);
    rows.push(["primitive".into(), c.primitive.to_string()]);
    rows.push(["proper".into(), c.proper.to_string()]);
    rows.push(["type".into(), format!("{:?}", c.walk_type)]);
    let sizes: Vec<String> = c.step_sizes.iter().map(u64::to_string).collect();
    rows.push(["step_sizes".into(), sizes.join(" ")]);
    rows.push(["gcd".into(), c.gcd_nonzero_steps.to_string()]);
    rows.push(["fingerprint".into(), w.fingerprint()]);
    let mut record = serde_json::to_value(&c).expect("serializable");
    record["fingerprint"] = json!(w.fingerprint());
    Ok(render(format, &[rows], &[record]))
}

fn run_returns(format: Format, arg: &WalkArg, k: u32, diagnostics: bool) -> Outcome {
    let w = read_walk(arg)?;
    let seq = return_sequence(&w, k);
    let report = if diagnostics {
        let var = w.is_symmetric().then(|| variance(&w));
        Some(growth_diagnostics(&seq, var.as_ref()).map_err(CliError::domain)?)
    } else {
        None
    };
    if format == Format::Csv && report.is_none() {
        return Ok(returns_csv(&seq));
    }
    let mut rows = Rows::new(["n", "c_n", "c_n_approx"]);
    let mut records = Vec::new();
    for (i, c) in seq.values.iter().enumerate() {
        rows.push([(i + 1).to_string(), format_rational(c), approx(c)]);
        records.push(json!({ "n": i + 1, "c_n": format_rational(c), "c_n_approx": to_f64(c) }));
    }
    let mut sections = vec![rows];
    if let Some(g) = report {
        let mut roots =
            Rows::new(["n", "c_n^(1/n)"]).titled(format!("odd c_n all zero: {}", g.odd_all_zero));
        for (n, r) in &g.even_roots {
            roots.push([n.to_string(), format_significant(*r, 12)]);
        }
        let mut bounds = Rows::new(["2n", "lower_bound", "holds"]);
        for b in &g.lower_bound_check {
            bounds.push([(2 * b.n).to_string(), b.bound.clone(), b.holds.to_string()]);
        }
        sections.push(roots);
        sections.push(bounds);
        records.push(json!({ "diagnostics": g }));
    }
    Ok(render(format, &sections, &records))
}

fn run_equiv(format: Format, a: &Path, b: &Path, k: u32) -> Outcome {
    let wa = io::parse_walk_file(a)?;
    let wb = io::parse_walk_file(b)?;
    let first = distinguishing_index(&wa, &wb, k);
    let verdict = match first {
        None => format!("indistinguishable up to K={k}"),
        Some(n) => format!("distinguished at n={n}"),
    };
    if format == Format::Table {
        let mut out = verdict + "\n";
        if let Some(n) = first {
            let ca = &return_sequence(&wa, n).values[n as usize - 1];
            let cb = &return_sequence(&wb, n).values[n as usize - 1];
            out += &format!(
                "c_{n}: {} vs {}\n",
                format_rational(ca),
                format_rational(cb)
            );
        }
        return Ok(out);
    }
    let mut rows = Rows::new(["k", "first_difference"]);
    rows.push([
        k.to_string(),
        first.map(|n| n.to_string()).unwrap_or_default(),
    ]);
    let record = json!({ "k": k, "indistinguishable": first.is_none(), "first_difference": first });
    Ok(render(format, &[rows], &[record]))
}

fn run_spectral(format: Format, arg: &WalkArg, opts: SpectralOptions) -> Outcome {
    let w = read_walk(arg)?;
    let report = spectral_report(&w, &opts).map_err(CliError::domain)?;
    let mut extrema =
        Rows::new(["radius", "sup_abs_f", "arg"]).titled(format!("variance {}", report.variance));
    for e in &report.near_extrema {
        extrema.push([
            e.exclusion_radius.to_string(),
            format_significant(e.sup_abs_f, 12),
            format_significant(e.arg, 8),
        ]);
    }
    let mut quad = Rows::new(["n", "integral", "abs_error_estimate"]);
    for q in &report.quadrature_values {
        quad.push([
            q.n.to_string(),
            format_significant(q.approx, 12),
            format_significant(q.abs_error_estimate, 3),
        ]);
    }
    let mut gaps = Rows::new(["n", "epsilon", "gap", "bound", "alpha"]);
    for g in &report.decay_gaps {
        gaps.push([
            g.n.to_string(),
            g.epsilon.to_string(),
            format_significant(g.measured, 6),
            format_significant(g.bound, 6),
            format_significant(g.alpha, 8),
        ]);
    }
    let record = serde_json::to_value(&report).expect("serializable");
    Ok(render(format, &[extrema, quad, gaps], &[record]))
}

fn run_reconstruct(
    format: Format,
    problem: &Path,
    recheck: Option<usize>,
    out: Option<&Path>,
) -> Outcome {
    let p = io::parse_problem_file(problem)?;
    let result = reconstruct(&p).map_err(CliError::domain)?;
    let report = verify(&result, &p, recheck.unwrap_or(p.targets.len() + 10));
    let rounded = result.rounded_walk();
    if let Some(path) = out {
        match &rounded {
            Some(w) => write_file(path, &io::walk_to_json(w))?,
            None => eprintln!(
                "warning: parameters do not round to a rational walk; {} not written",
                path.display()
            ),
        }
    }
    let mut params = Rows::new(["k", "a_k", "a_k_rounded"]).titled(format!(
        "converged {}  max_residual {}  symmetric {}  primitive {}  proper {}  exact_match {}",
        result.converged,
        format_significant(result.max_residual, 3),
        result.certificate.symmetric,
        result.certificate.primitive,
        result.certificate.proper,
        report.exact_match,
    ));
    for (k, a) in result.params.iter().enumerate() {
        let r = report
            .rounded_params
            .as_ref()
            .map(|v| v[k].clone())
            .unwrap_or_default();
        params.push([k.to_string(), format_significant(*a, 12), r]);
    }
    let mut checks = Rows::new(["n", "target", "recovered", "residual", "agrees"]);
    for c in &report.per_index {
        checks.push([
            c.n.to_string(),
            c.target.clone().unwrap_or_default(),
            c.recovered_exact
                .clone()
                .unwrap_or_else(|| format_significant(c.recovered_float, 12)),
            format_significant(c.residual, 3),
            c.agrees.to_string(),
        ]);
    }
    let record = json!({
        "certificate": result.certificate,
        "converged": result.converged,
        "max_residual": result.max_residual,
        "params": result.params,
        "rounded_params": report.rounded_params,
        "exact_match": report.exact_match,
        "condition_number": result.condition_number,
        "verification": report.per_index,
    });
    Ok(render(format, &[params, checks], &[record]))
}

fn run_rep2walk(format: Format, rep: &Path, out: Option<&Path>) -> Outcome {
    let r = io::parse_rep_file(rep)?;
    let w = rep_to_walk(&r);
    if let Some(path) = out {
        write_file(path, &io::walk_to_json(&w))?;
    }
    let (rows, records) = walk_rows(&w);
    Ok(render(format, &[rows], &records))
}

fn run_walk2rep(format: Format, arg: &WalkArg, out: Option<&Path>) -> Outcome {
    let w = read_walk(arg)?;
    let r = walk_to_rep(&w).map_err(CliError::domain)?;
    if let Some(path) = out {
        write_file(path, &io::rep_to_json(&r))?;
    }
    let (rows, records) = rep_rows(&r);
    Ok(render(format, &[rows], &records))
}

fn run_dims(format: Format, rep: &Path, k: u32, out: Option<&Path>) -> Outcome {
    let r = io::parse_rep_file(rep)?;
    let props = validate_rep(&r);
    if !props.self_dual {
        eprintln!("warning: representation is not self-dual");
    }
    let dims = invariant_dims(&r, k);
    if let Some(path) = out {
        write_file(path, &io::dims_to_json(&dims))?;
    }
    let mut rows = Rows::new(["n", "d_n"]);
    let mut records = Vec::new();
    for (i, d) in dims.dims.iter().enumerate() {
        rows.push([(i + 1).to_string(), d.to_string()]);
        records.push(json!({ "n": i + 1, "d_n": d.to_string() }));
    }
    Ok(render(format, &[rows], &records))
}

fn run_dims2rep(format: Format, dims: &Path, bound: u64, out: Option<&Path>) -> Outcome {
    let d = io::parse_dims_file(dims)?;
    let r = dims_to_rep(&d, bound).map_err(CliError::domain)?;
    if let Some(path) = out {
        write_file(path, &io::rep_to_json(&r))?;
    }
    let (rows, records) = rep_rows(&r);
    Ok(render(format, &[rows], &records))
}

fn run_simulate(
    format: Format,
    arg: &WalkArg,
    n: u32,
    trials: u64,
    seed: u64,
    z_max: f64,
) -> Outcome {
    let w = read_walk(arg)?;
    if n == 0 || trials == 0 {
        return Err(CliError::Usage("--n and --trials must be positive".into()));
    }
    let rep = consistency_test(&w, n, trials, seed, z_max).map_err(CliError::domain)?;
    let e = &rep.estimate;
    let mut rows = Rows::new([
        "n", "trials", "hits", "estimate", "stderr", "exact", "z", "pass",
    ]);
    rows.push([
        e.n_steps.to_string(),
        e.trials.to_string(),
        e.hits.to_string(),
        format_significant(e.estimate, 8),
        format_significant(e.stderr, 4),
        format_significant(rep.expected, 12),
        format_significant(rep.z_score, 4),
        rep.pass.to_string(),
    ]);
    let record = serde_json::to_value(&rep).expect("serializable");
    Ok(render(format, &[rows], &[record]))
}

fn run(cli: Cli) -> Outcome {
    let f = cli.format;
    match cli.command {
        Command::Classify(w) => run_classify(f, &w),
        Command::Returns {
            walk,
            k,
            diagnostics,
        } => run_returns(f, &walk, k, diagnostics),
        Command::Equiv { walk_a, walk_b, k } => run_equiv(f, &walk_a, &walk_b, k),
        Command::Spectral {
            walk,
            epsilon,
            max_n,
            tolerance,
            grid,
            radii,
            decay_n,
        } => run_spectral(
            f,
            &walk,
            SpectralOptions {
                exclusion_radii: radii,
                grid_points: grid,
                quadrature_max_n: max_n,
                quadrature_tol: tolerance,
                epsilon,
                decay_ns: decay_n,
            },
        ),
        Command::Reconstruct {
            problem,
            recheck,
            out,
        } => run_reconstruct(f, &problem, recheck, out.as_deref()),
        Command::Rep2walk { rep, out } => run_rep2walk(f, &rep, out.as_deref()),
        Command::Walk2rep { walk, out } => run_walk2rep(f, &walk, out.as_deref()),
        Command::Dims { rep, k, out } => run_dims(f, &rep, k, out.as_deref()),
        Command::Dims2rep { dims, bound, out } => run_dims2rep(f, &dims, bound, out.as_deref()),
        Command::Simulate {
            walk,
            n,
            trials,
            seed,
            z_max,
        } => run_simulate(f, &walk, n, trials, seed, z_max),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Domain { kind, message } => eprintln!("error: {kind}: {message}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
