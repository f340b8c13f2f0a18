//! Command implementations behind the `contcount` binary.
//!
//! Every command writes CSV with a header row to the given writer and is
//! deterministic given its arguments.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::certificates::{
    build_svd_certificate, gamma_lower, gamma_upper, verify_certificate, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::factorization::{binary_expected_mse, sqrt_coefficients};
use crate::ftrl::{run_logistic, FtrlConfig, LogisticTask, RegretReport};
use crate::linalg::DenseMatrix;
use crate::mechanism::{run_mechanism, MechanismKind, PrivacyBudget};
use crate::workload::{err_lower_bound_matrix_mech, err_upper_bound};

#[derive(Debug, Parser)]
#[command(
    name = "contcount",
    version,
    about = "Private counting under continual observation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the square-root factorization coefficients f(0..n-1).
    Coeffs(CoeffsArgs),
    /// Run a private counter over a bit stream.
    Count(CountArgs),
    /// Tabulate closed-form error bounds of the factorization and binary mechanisms.
    Compare(CompareArgs),
    /// Bound the gamma_F norm of a matrix and check its dual certificate.
    Certify(CertifyArgs),
    /// Run private FTRL on synthetic logistic regression.
    Ftrl(FtrlArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    /// One 0/1 per line; standard input when absent or "-".
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Expected stream length; must match the input when given.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "factorization", value_parser = parse_mechanism)]
    pub mechanism: MechanismKind,
    /// Disable noise entirely (no privacy).
    #[arg(long)]
    pub no_noise: bool,
    #[arg(long)]
    pub allow_large_epsilon: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub n_max: u64,
    /// Comma-separated privacy parameters.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.8])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub delta: f64,
    #[arg(long)]
    pub allow_large_epsilon: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FtrlArgs {
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub seeds_count: u64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long)]
    pub allow_large_epsilon: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_mechanism(s: &str) -> std::result::Result<MechanismKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    if (-4..17).contains(&exp) {
        let body = if exp >= 0 {
            let split = exp as usize + 1;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        format!("{sign}{}", trim_fraction(&body))
    } else {
        let body = format!("{}.{}", &digits[..1], &digits[1..]);
        format!(
            "{sign}{}e{}{:02}",
            trim_fraction(&body),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Opens `path` for writing, or standard output when `None`.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Rows `k,f(k)` for `k < n`.
pub fn cmd_coeffs(n: usize, out: &mut dyn Write) -> Result<()> {
    let factor = sqrt_coefficients(n)?;
    writeln!(out, "k,f(k)")?;
    for (k, f) in factor.coeffs().iter().enumerate() {
        writeln!(out, "{k},{}", format_float(*f))?;
    }
    out.flush()?;
    Ok(())
}

/// Parses one bit per line; blank lines (such as a trailing newline) are skipped.
pub fn read_bits<R: Read>(input: R) -> Result<Vec<u8>> {
    let mut bits = Vec::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        match line.trim() {
            "" => continue,
            "0" => bits.push(0),
            "1" => bits.push(1),
            other => return Err(Error::NotABit(other.to_string())),
        }
    }
    Ok(bits)
}

/// Runs the chosen mechanism and writes `t,true_count,noisy_count` for `t = 1..n`.
pub fn cmd_count(args: &CountArgs, input: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let bits = read_bits(input)?;
    if bits.is_empty() {
        return Err(Error::InvalidArgument("empty input stream".into()));
    }
    if let Some(n) = args.n {
        if n != bits.len() {
            return Err(Error::Dimension(format!(
                "--n is {n} but the input has {} bits",
                bits.len()
            )));
        }
    }
    let budget = if args.no_noise {
        PrivacyBudget::noiseless()
    } else {
        PrivacyBudget::with_options(args.eps, args.delta, args.allow_large_epsilon)?
    };
    let noisy = run_mechanism(args.mechanism, &bits, budget, args.seed)?;
    writeln!(out, "t,true_count,noisy_count")?;
    let mut running = 0u64;
    for (t, (b, a)) in bits.iter().zip(noisy.values()).enumerate() {
        running += u64::from(*b);
        writeln!(out, "{},{running},{}", t + 1, format_float(*a))?;
    }
    out.flush()?;
    Ok(())
}

/// One line of the mechanism comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub err_fact_upper: f64,
    pub err_lower_matrix_mech: f64,
    pub err_binary_expected: f64,
    pub ratio_binary_over_fact: f64,
}

/// Closed-form rows for every `ε` in `eps` and every power of two up to `n_max`.
///
/// The factorization curve is the mean-squared-error upper bound of the square-root
/// mechanism; the binary curve is the exact expected error of the tree mechanism with
/// popcount-based `‖L‖_F²`.
pub fn comparison_rows(
    n_max: u64,
    eps: &[f64],
    delta: f64,
    allow_large_epsilon: bool,
) -> Result<Vec<ComparisonRow>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("--n-max must be at least 1".into()));
    }
    if eps.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one epsilon is required".into(),
        ));
    }
    let mut rows = Vec::new();
    for &epsilon in eps {
        let budget = PrivacyBudget::with_options(epsilon, delta, allow_large_epsilon)?;
        let mut n = 1u64;
        while n <= n_max {
            let err_fact_upper = err_upper_bound(n, &budget)?;
            let err_binary_expected = binary_expected_mse(n, &budget)?;
            rows.push(ComparisonRow {
                n,
                epsilon,
                delta,
                err_fact_upper,
                err_lower_matrix_mech: err_lower_bound_matrix_mech(n, &budget)?,
                err_binary_expected,
                ratio_binary_over_fact: err_binary_expected / err_fact_upper,
            });
            match n.checked_mul(2) {
                Some(next) => n = next,
                None => break,
            }
        }
    }
    Ok(rows)
}

/// Smallest `n` in `rows` where the factorization curve at `eps_fact` lies strictly
/// below the binary curve at `eps_bin`.
pub fn first_crossover(rows: &[ComparisonRow], eps_fact: f64, eps_bin: f64) -> Option<u64> {
    rows.iter()
        .filter(|r| r.epsilon == eps_fact)
        .filter_map(|f| {
            rows.iter()
                .find(|b| b.epsilon == eps_bin && b.n == f.n)
                .filter(|b| f.err_fact_upper < b.err_binary_expected)
                .map(|_| f.n)
        })
        .min()
}

/// Writes the comparison table and, for each pair `ε_fact < ε_bin`, a note on stderr
/// giving the first crossover.
pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<Vec<ComparisonRow>> {
    let rows = comparison_rows(args.n_max, &args.eps, args.delta, args.allow_large_epsilon)?;
    writeln!(
        out,
        "n,epsilon,delta,err_fact_upper,err_lower_matrix_mech,err_binary_expected,ratio_binary_over_fact"
    )?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            format_float(r.epsilon),
            format_float(r.delta),
            format_float(r.err_fact_upper),
            format_float(r.err_lower_matrix_mech),
            format_float(r.err_binary_expected),
            format_float(r.ratio_binary_over_fact)
        )?;
    }
    out.flush()?;
    for &ef in &args.eps {
        for &eb in args.eps.iter().filter(|&&eb| ef < eb) {
            match first_crossover(&rows, ef, eb) {
                Some(n) => {
                    eprintln!("factorization (eps={ef}) below binary (eps={eb}) from n = {n}")
                }
                None => eprintln!(
                    "factorization (eps={ef}) never below binary (eps={eb}) up to n = {}",
                    args.n_max
                ),
            }
        }
    }
    Ok(rows)
}

/// Result of certifying a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub feasible: bool,
    pub objective: f64,
}

/// Bounds `γ_F` of the matrix in `path` and verifies its SVD dual certificate.
pub fn certify_matrix(path: &Path) -> Result<CertifyReport> {
    let a = DenseMatrix::read_csv(File::open(path)?)?;
    let cert = build_svd_certificate(&a)?;
    let check = verify_certificate(&a, &cert, DEFAULT_TOLERANCE)?;
    Ok(CertifyReport {
        lower_bound: gamma_lower(&a)?,
        upper_bound: gamma_upper(&a),
        feasible: check.feasible,
        objective: check.objective,
    })
}

pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<CertifyReport> {
    let report = certify_matrix(&args.matrix)?;
    writeln!(out, "lower_bound,upper_bound,feasible,objective")?;
    writeln!(
        out,
        "{},{},{},{}",
        format_float(report.lower_bound),
        format_float(report.upper_bound),
        report.feasible,
        format_float(report.objective)
    )?;
    out.flush()?;
    Ok(report)
}

/// Offset separating the noise seed from the data seed of one FTRL run.
pub const NOISE_SEED_OFFSET: u64 = 1 << 32;

/// One FTRL run: data from `seed`, noise from `seed + 2^32`.
pub fn ftrl_run(args: &FtrlArgs, seed: u64) -> Result<RegretReport> {
    let budget = PrivacyBudget::with_options(args.eps, args.delta, args.allow_large_epsilon)?;
    let task = LogisticTask::generate(args.n, args.d, seed)?;
    let config = FtrlConfig {
        horizon: args.n,
        dim: args.d,
        kappa: args.kappa,
        radius: args.radius,
        lambda: None,
    };
    Ok(run_logistic(&task, config, budget, seed.wrapping_add(NOISE_SEED_OFFSET))?.report)
}

/// Runs seeds `seed..seed + seeds_count` in parallel and writes `seed,regret,bound` in seed order.
pub fn cmd_ftrl(args: &FtrlArgs, out: &mut dyn Write) -> Result<Vec<(u64, RegretReport)>> {
    if args.n == 0 || args.d == 0 || args.seeds_count == 0 {
        return Err(Error::InvalidArgument(
            "--n, --d and --seeds-count must be positive".into(),
        ));
    }
    let results = (0..args.seeds_count)
        .into_par_iter()
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            ftrl_run(args, seed).map(|r| (seed, r))
        })
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "seed,regret,bound")?;
    for (seed, r) in &results {
        writeln!(
            out,
            "{seed},{},{}",
            format_float(r.regret),
            format_float(r.bound)
        )?;
    }
    out.flush()?;
    Ok(results)
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coeffs(a) => cmd_coeffs(a.n, &mut *open_output(a.out.as_deref())?),
        Command::Count(a) => {
            let mut input: Box<dyn Read> = match a.input.as_deref() {
                Some(p) if p != Path::new("-") => Box::new(File::open(p)?),
                _ => Box::new(io::stdin().lock()),
            };
            cmd_count(&a, &mut *input, &mut *open_output(a.out.as_deref())?)
        }
        Command::Compare(a) => cmd_compare(&a, &mut *open_output(a.out.as_deref())?).map(drop),
        Command::Certify(a) => cmd_certify(&a, &mut *open_output(a.out.as_deref())?).map(drop),
        Command::Ftrl(a) => cmd_ftrl(&a, &mut *open_output(a.out.as_deref())?).map(drop),
    }
}
