//! Command-line interface.
//!
//! Exit codes: `0` success, `1` input error, `2` divergence detected,
//! `3` no convergence or a failed check (`check-lemmas` violations, a
//! failing `repro` verdict).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::energy::{self, EnergyField};
use crate::experiments;
use crate::fold;
use crate::io::{self, BoundTally};
use crate::linalg;
use crate::solver::{self, Lattice, SolveConfig};
use crate::{Error, Measure, RadialWeight, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

/// Rows a scan may emit.
pub const SCAN_MAX_ROWS: usize = 10_000_000;
/// Radius at which the kernel extension to infinity is checked.
pub const KERNEL_CHECK_RADIUS: f64 = 1e6;
pub const KERNEL_CHECK_PAIRS: usize = 100;
pub const KERNEL_CHECK_TOL: f64 = 1e-5;

#[derive(Parser, Debug)]
#[command(
    name = "gcenter",
    version,
    about = "Generalized center of mass of finite signed measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for x_c and print the report as JSON.
    Solve(SolveArgs),
    /// Solve the problem for the measure folded across a halfspace.
    FoldSolve {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        halfspace: PathBuf,
    },
    /// Energy and |V| over a lattice, as CSV.
    Scan {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Per-axis ranges, e.g. `-3..3,-3..3`.
        #[arg(long = "box", allow_hyphen_values = true)]
        bbox: String,
        #[arg(long)]
        step: f64,
    },
    /// Sampled verification of the kernel bounds and the kernel at infinity.
    CheckLemmas {
        #[arg(long)]
        weight: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Radius of the ball the sampled `y` are drawn from.
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Run a named reproducibility fixture and print its verdict.
    Repro {
        /// One of the fixture names; `list` prints them.
        fixture: String,
    },
    /// x(H) for each halfspace of a sequence; the last entry is the limit.
    Continuity {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        halfspace: PathBuf,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    weight: PathBuf,
}

#[derive(Args, Debug)]
struct ModeArgs {
    /// Minimize the renormalized energy (bounded weights only).
    #[arg(long, conflicts_with = "plain")]
    renormalized: bool,
    /// Minimize the plain energy.
    #[arg(long)]
    plain: bool,
}

impl ModeArgs {
    fn choice(&self) -> Option<bool> {
        match (self.renormalized, self.plain) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    mode: ModeArgs,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl SolveArgs {
    fn config(&self) -> SolveConfig<f64> {
        let mut cfg = SolveConfig {
            grad_tol: self.tol,
            renormalized: self.mode.choice(),
            ..SolveConfig::default()
        };
        if let Some(n) = self.max_iters {
            cfg.max_iters = n;
        }
        cfg
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self::with_code(EXIT_OK, stdout)
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        Self {
            code: exit_code(e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DivergenceDetected { .. } => EXIT_DIVERGENCE,
        Error::NoConvergence { .. } => EXIT_FAILURE,
        _ => EXIT_INPUT,
    }
}

/// Parse `args` (program name first) and run the command. Honors
/// `GCENTER_THREADS` for the size of the worker pool.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("GCENTER_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        pool = pool.num_threads(n.max(1));
    }
    match pool.build() {
        Ok(pool) => pool.install(|| dispatch(cli.command)),
        Err(e) => Outcome::error(&Error::InvalidConfig(e.to_string())),
    }
}

fn dispatch(command: Command) -> Outcome {
    let result = match command {
        Command::Solve(a) => cmd_solve(&a),
        Command::FoldSolve { solve, halfspace } => cmd_fold_solve(&solve, &halfspace),
        Command::Scan {
            input,
            mode,
            bbox,
            step,
        } => cmd_scan(&input, &mode, &bbox, step),
        Command::CheckLemmas {
            weight,
            samples,
            seed,
            epsilon,
            radius,
            dim,
        } => cmd_check_lemmas(&weight, samples, seed, epsilon, radius, dim),
        Command::Repro { fixture } => cmd_repro(&fixture),
        Command::Continuity { solve, halfspace } => cmd_continuity(&solve, &halfspace),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

fn load(input: &InputArgs) -> Result<(RadialWeight<f64>, Measure<f64>)> {
    let w = io::parse_weight(&io::read_file(&input.weight)?)?;
    let m = io::parse_measure(&io::read_file(&input.measure)?)?;
    Ok((w, m))
}

/// One JSON document per line.
fn emit(v: &Value) -> String {
    let mut s = v.to_string();
    s.push('\n');
    s
}

fn cmd_solve(a: &SolveArgs) -> Result<Outcome> {
    let (w, m) = load(&a.input)?;
    let report = solver::solve(&w, &m, &a.config())?;
    Ok(Outcome::ok(emit(&io::report_json(&report))))
}

fn cmd_fold_solve(a: &SolveArgs, path: &Path) -> Result<Outcome> {
    let (w, m) = load(&a.input)?;
    let h = io::parse_halfspace(&io::read_file(path)?)?;
    let report = fold::solve_folded(&w, &m, &h, &a.config())?;
    let mut out = io::report_json(&report);
    out["halfspace"] = io::halfspace_json(&h);
    Ok(Outcome::ok(emit(&out)))
}

fn cmd_continuity(a: &SolveArgs, path: &Path) -> Result<Outcome> {
    let (w, m) = load(&a.input)?;
    let hs = io::parse_halfspaces(&io::read_file(path)?)?;
    let xs = fold::fold_continuity_probe(&w, &m, &hs, &a.config())?;
    let limit = xs.last().expect("at least one halfspace").clone();
    let rows: Vec<Value> = hs
        .iter()
        .zip(&xs)
        .map(|(h, x)| {
            json!({
                "halfspace": io::halfspace_json(h),
                "x": io::numbers(x),
                "deviation": io::number(linalg::distance(x, &limit)),
            })
        })
        .collect();
    Ok(Outcome::ok(emit(&json!({ "sequence": rows }))))
}

/// `"-3..3,-1.5..2"` into per-axis bounds.
pub fn parse_box(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for axis in text.split(',') {
        let (a, b) = axis
            .split_once("..")
            .ok_or_else(|| Error::InvalidConfig(format!("box axis {axis:?} is not min..max")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad box bound {s:?}")))
        };
        lo.push(parse(a)?);
        hi.push(parse(b)?);
    }
    Ok((lo, hi))
}

fn cmd_scan(input: &InputArgs, mode: &ModeArgs, bbox: &str, step: f64) -> Result<Outcome> {
    let (w, m) = load(input)?;
    let (lo, hi) = parse_box(bbox)?;
    if lo.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: lo.len(),
        });
    }
    if m.dim() > 3 {
        return Err(Error::InvalidConfig(
            "scan supports dimension at most 3".into(),
        ));
    }
    let lattice = Lattice::new(&lo, &hi, step)?;
    if lattice.len() > SCAN_MAX_ROWS {
        return Err(Error::OracleTooLarge(lattice.len() as u128));
    }
    let ef = match mode.choice() {
        Some(r) => EnergyField::new(&w, &m, r)?,
        None => EnergyField::with_default_mode(&w, &m),
    };
    let rows: Vec<String> = (0..lattice.len())
        .into_par_iter()
        .map(|i| {
            let x = lattice.point(i);
            let mut line = String::new();
            for c in &x {
                write!(line, "{c},").unwrap();
            }
            writeln!(line, "{},{}", ef.energy(&x), linalg::norm(&ef.big_v(&x))).unwrap();
            line
        })
        .collect();
    let mut out = String::new();
    for a in 0..m.dim() {
        write!(out, "x{a},").unwrap();
    }
    out.push_str(if ef.is_renormalized() {
        "renormalized_energy,grad_norm\n"
    } else {
        "energy,grad_norm\n"
    });
    out.extend(rows);
    Ok(Outcome::ok(out))
}

/// Uniform direction on the unit sphere by rejection from the cube.
fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = linalg::norm(&u);
        if n > 1e-3 && n <= 1.0 {
            return linalg::scale(&u, 1.0 / n);
        }
    }
}

fn ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    linalg::scale(&unit_vector(rng, dim), r)
}

fn cmd_check_lemmas(
    weight: &Path,
    samples: usize,
    seed: u64,
    epsilon: f64,
    radius: f64,
    dim: usize,
) -> Result<Outcome> {
    let w: RadialWeight<f64> = io::parse_weight(&io::read_file(weight)?)?;
    if w.sup_abs_g().is_none() {
        return Err(Error::UnsupportedRenormalization(
            "the kernel bounds need a bounded weight".into(),
        ));
    }
    if dim == 0 || !(radius >= 0.0) || !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidConfig(
            "need dim > 0, radius >= 0 and epsilon in (0, 1/2)".into(),
        ));
    }
    let out = check_lemmas(&w, samples, seed, epsilon, radius, dim)?;
    let code = if out["violated"] == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    Ok(Outcome::with_code(code, emit(&out)))
}

/// Sampled lemma checks; `|x|` is log-uniform on `[10⁻², 10⁶]` so every
/// applicability threshold is crossed.
pub fn check_lemmas(
    w: &RadialWeight<f64>,
    samples: usize,
    seed: u64,
    epsilon: f64,
    radius: f64,
    dim: usize,
) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut global = BoundTally::default();
    let mut half = BoundTally::default();
    let mut two_sided = BoundTally::default();
    let mut thresholds = (None, None);
    for _ in 0..samples {
        let y = ball_point(&mut rng, dim, radius);
        let norm = 10f64.powf(rng.gen_range(-2.0..6.0));
        let x = linalg::scale(&unit_vector(&mut rng, dim), norm);
        let r = energy::lemma_bounds(w, &x, &y, epsilon, radius)?;
        global.record(&r.global);
        half.record(&r.half_limit);
        two_sided.record(&r.two_sided);
        thresholds = (r.half_limit_threshold, r.two_sided_threshold);
    }

    let mut kernel_errors = Vec::new();
    let limit_exists = w.limit_at_infinity().is_some();
    if limit_exists {
        for _ in 0..KERNEL_CHECK_PAIRS {
            let x = ball_point(&mut rng, dim, radius);
            let y_hat = unit_vector(&mut rng, dim);
            let far = linalg::scale(&y_hat, KERNEL_CHECK_RADIUS);
            let finite = energy::kernel_increment(w, &linalg::add(&x, &far), &far);
            let limit = energy::kernel_at_infinity(w, &x, &y_hat)?;
            kernel_errors.push((finite - limit).abs());
        }
    }
    let max_error = kernel_errors.iter().copied().fold(0.0, f64::max);
    let kernel_violated = kernel_errors
        .iter()
        .filter(|&&e| !(e <= KERNEL_CHECK_TOL))
        .count();
    let violated = global.violated + half.violated + two_sided.violated + kernel_violated;
    Ok(json!({
        "samples": samples,
        "seed": seed,
        "epsilon": io::number(epsilon),
        "radius": io::number(radius),
        "dim": dim,
        "global": global.to_json(),
        "half_limit": half.to_json(),
        "two_sided": two_sided.to_json(),
        "half_limit_threshold": thresholds.0.map(io::number),
        "two_sided_threshold": thresholds.1.map(io::number),
        "kernel_at_infinity": {
            "pairs": kernel_errors.len(),
            "r": io::number(KERNEL_CHECK_RADIUS),
            "max_error": io::number(max_error),
            "tolerance": io::number(KERNEL_CHECK_TOL),
            "violated": kernel_violated,
        },
        "violated": violated,
    }))
}

fn cmd_repro(name: &str) -> Result<Outcome> {
    if name == "list" {
        let mut s = experiments::FIXTURE_NAMES.join("\n");
        s.push('\n');
        return Ok(Outcome::ok(s));
    }
    let verdict = experiments::run_named(name)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown fixture {name:?}")))??;
    let code = if verdict.pass { EXIT_OK } else { EXIT_FAILURE };
    Ok(Outcome::with_code(code, emit(&io::verdict_json(&verdict))))
}
