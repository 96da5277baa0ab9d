//! Command-line front end for the `hecke` binary.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cache::{read_cache, write_cache};
use crate::envelope::{
    envelope_coefficients, exponent_table_csv, optimize_parameters, verify_envelope, Family,
};
use crate::error::{Error, Result};
use crate::hecke::{build_coefficient_table, Backend, CoefficientTable};
use crate::lfunctions::{residual_csv, residuals_for_primes};
use crate::sums::{
    default_checkpoints, fit_exponent, power_sum_series, sandwich_check, sato_tate_stats,
    sign_count_diagnostic, sign_counts, signed_sum_ratio, signed_sum_series,
};
use crate::verify::{run_with_table, VerifyConfig, ENVELOPE_R, REFERENCE_R};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HECKE_THREADS";
pub const DEFAULT_OUT_DIR: &str = "hecke-out";
pub const DEFAULT_CACHE: &str = "tau.cache";

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hecke",
    version,
    about = "Hecke eigenvalues of the discriminant form and their power-sum envelopes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct TableArgs {
    /// Largest n in the coefficient table (accepts 1e6 style)
    #[arg(long = "max", default_value = "1000000", value_parser = parse_count)]
    pub max_x: u64,
    #[arg(long, default_value = "fast")]
    pub backend: Backend,
    /// Load coefficients from a cache instead of computing them
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute tau(n) and write a binary cache
    Tau {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value = DEFAULT_CACHE)]
        output: PathBuf,
    },
    /// Print the exponent table as CSV
    Table {
        #[arg(long = "r-values", alias = "r", value_delimiter = ',', default_values_t = REFERENCE_R.to_vec())]
        r_values: Vec<f64>,
        /// Write to a file instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the sign behaviour of the envelopes on a grid
    Envelope {
        #[arg(long = "r-values", alias = "r", value_delimiter = ',', default_values_t = ENVELOPE_R.to_vec())]
        r_values: Vec<f64>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        grid: u64,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Search contact points on a grid
    Optimize {
        #[arg(long = "r-values", alias = "r", value_delimiter = ',', default_values_t = vec![0.5])]
        r_values: Vec<f64>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Local Euler factor decomposition residuals
    Euler {
        #[arg(long = "max-p", default_value = "100", value_parser = parse_count)]
        max_p: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value = "fast")]
        backend: Backend,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Power sums, envelope summatories and exponent fits
    Powersum {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long = "r-values", alias = "r", value_delimiter = ',', default_values_t = vec![0.5, 1.0, 1.5, 2.0])]
        r_values: Vec<f64>,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Signed sums, sign counts and their diagnostics
    Signs {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Histogram of Satake angles against the Sato-Tate law
    Satotate {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
    /// Run the whole verification suite
    VerifyAll {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        grid: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value = DEFAULT_OUT_DIR)]
        output: PathBuf,
    },
}

/// Parse a positive count written either as an integer or as `1e6`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if v.fract() != 0.0 || !(0.0..=1e15).contains(&v) {
        return Err(format!("`{s}` is not a whole number in range"));
    }
    Ok(v as u64)
}

/// The validated form of a command line.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Validate numeric ranges that clap cannot express.
    pub fn new(cli: Cli, threads: Option<usize>) -> std::result::Result<Self, String> {
        let check_r = |rs: &[f64], allow_zero: bool| -> std::result::Result<(), String> {
            if rs.is_empty() {
                return Err("--r-values needs at least one value".into());
            }
            match rs
                .iter()
                .find(|&&r| !(r > 0.0 || (allow_zero && r == 0.0)) || !r.is_finite())
            {
                Some(r) => Err(format!("invalid r value {r}")),
                None => Ok(()),
            }
        };
        let check_max = |t: &TableArgs| -> std::result::Result<(), String> {
            if t.input.is_none() && (t.max_x == 0 || t.max_x > t.backend.cap() as u64) {
                return Err(format!(
                    "--max must be between 1 and {} for this backend",
                    t.backend.cap()
                ));
            }
            Ok(())
        };
        match &cli.command {
            Command::Tau { table, output } => {
                check_max(table)?;
                if output.as_os_str().is_empty() {
                    return Err("--output must not be empty".into());
                }
            }
            Command::Table { r_values, .. } => check_r(r_values, true)?,
            Command::Envelope { r_values, grid, .. } => {
                check_r(r_values, false)?;
                if *grid < 1000 {
                    return Err("--grid must be at least 1000".into());
                }
            }
            Command::Optimize { r_values, step, .. } => {
                check_r(r_values, false)?;
                if !(*step > 0.0 && *step <= 1e-2) {
                    return Err("--step must lie in (0, 0.01]".into());
                }
            }
            Command::Euler { max_p, depth, .. } => {
                if *max_p < 2 || *max_p > Backend::Fast.cap() as u64 {
                    return Err("--max-p out of range".into());
                }
                if *depth < 2 {
                    return Err("--depth must be at least 2".into());
                }
            }
            Command::Powersum {
                table, r_values, ..
            } => {
                check_max(table)?;
                check_r(r_values, true)?;
            }
            Command::Signs { table, .. } => check_max(table)?,
            Command::Satotate { table, bins, .. } => {
                check_max(table)?;
                if *bins < 10 {
                    return Err("--bins must be at least 10".into());
                }
            }
            Command::VerifyAll {
                table,
                grid,
                depth,
                bins,
                ..
            } => {
                check_max(table)?;
                if *grid < 1000 || *depth < 2 || *bins < 10 {
                    return Err("--grid >= 1000, --depth >= 2 and --bins >= 10 are required".into());
                }
            }
        }
        Ok(RunConfig {
            command: cli.command,
            threads,
        })
    }
}

/// Read the thread count from the environment.
pub fn threads_from_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be an integer >= 1, got `{v}`")),
        },
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let config = match threads_from_env().and_then(|t| RunConfig::new(cli, t)) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    run(config)
}

/// Execute a validated configuration.
pub fn run(config: RunConfig) -> u8 {
    if let Some(n) = config.threads {
        // fails only if the pool was already built, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match dispatch(config.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

/// Plain-text report of named fields, one `name = value` per line.
#[derive(Default)]
struct Report(Vec<(String, String)>);

impl Report {
    fn field(&mut self, name: impl Into<String>, value: impl Display) -> &mut Self {
        self.0.push((name.into(), value.to_string()));
        self
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn load_table(args: &TableArgs) -> Result<CoefficientTable> {
    match &args.input {
        Some(path) => read_cache(path),
        None => build_coefficient_table(args.max_x as usize, args.backend),
    }
}

fn families(family: Option<Family>) -> Vec<Family> {
    family.map_or(vec![Family::Minus, Family::Plus], |f| vec![f])
}

fn r_label(r: f64) -> String {
    format!("{r}").replace('.', "p")
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Tau { table, output } => {
            let start = Instant::now();
            let t = load_table(&table)?;
            write_cache(&t, &output)?;
            println!(
                "wrote tau(1..={}) to {} ({:.2}s)",
                t.bound(),
                output.display(),
                start.elapsed().as_secs_f64()
            );
            Ok(true)
        }
        Command::Table { r_values, output } => {
            let csv = exponent_table_csv(&r_values);
            match output {
                Some(path) => fs::write(path, csv)?,
                None => std::io::stdout().write_all(csv.as_bytes())?,
            }
            Ok(true)
        }
        Command::Envelope {
            r_values,
            family,
            grid,
            output,
        } => {
            let mut report = Report::default();
            let mut ok = true;
            for &r in &r_values {
                for f in families(family) {
                    let rep = verify_envelope(r, f, grid as usize)?;
                    let res = envelope_coefficients(r, f)?.constraint_residuals();
                    let key = format!("{}_r{}", f.name(), r_label(r));
                    println!(
                        "{} r={r} {}: min {:.3e} max {:.3e} constraints {:.1e}/{:.1e}",
                        if rep.passed { "ok  " } else { "FAIL" },
                        f.name(),
                        rep.min,
                        rep.max,
                        res.value,
                        res.derivative
                    );
                    report
                        .field(format!("{key}.min"), rep.min)
                        .field(format!("{key}.max"), rep.max)
                        .field(format!("{key}.constraint_value"), res.value)
                        .field(format!("{key}.constraint_derivative"), res.derivative)
                        .field(format!("{key}.passed"), rep.passed);
                    ok &= rep.passed;
                }
            }
            write_artifact(&output, "envelope.txt", &report.render())?;
            Ok(ok)
        }
        Command::Optimize {
            r_values,
            family,
            step,
            output,
        } => {
            let mut report = Report::default();
            for &r in &r_values {
                for f in families(family) {
                    let p = optimize_parameters(r, f, step)?;
                    let key = format!("{}_r{}", f.name(), r_label(r));
                    println!(
                        "r={r} {}: kappa {:.6} eta {:.6} rho {:.6} ({} of {} candidates valid)",
                        f.name(),
                        p.kappa,
                        p.eta,
                        p.objective,
                        p.valid,
                        p.candidates
                    );
                    report
                        .field(format!("{key}.kappa"), p.kappa)
                        .field(format!("{key}.eta"), p.eta)
                        .field(format!("{key}.rho"), p.objective)
                        .field(format!("{key}.valid"), p.valid);
                }
            }
            write_artifact(&output, "optimize.txt", &report.render())?;
            Ok(true)
        }
        Command::Euler {
            max_p,
            depth,
            backend,
            input,
            output,
        } => {
            let t = load_table(&TableArgs {
                max_x: max_p,
                backend,
                input,
            })?;
            let rows = residuals_for_primes(&t, max_p as usize, depth)?;
            let worst = rows
                .iter()
                .map(|r| r.series.coeff(1).abs())
                .fold(0.0, f64::max);
            write_artifact(&output, "euler_residuals.csv", &residual_csv(&rows))?;
            let ok = worst <= 1e-9;
            let mut report = Report::default();
            report
                .field("rows", rows.len())
                .field("max_degree1_residual", worst)
                .field("passed", ok);
            write_artifact(&output, "euler.txt", &report.render())?;
            println!("{} rows, max degree-1 residual {worst:.2e}", rows.len());
            Ok(ok)
        }
        Command::Powersum {
            table,
            r_values,
            output,
        } => {
            let t = load_table(&table)?;
            let cps = default_checkpoints(t.bound() as u64);
            let mut report = Report::default();
            let mut ok = true;
            for &r in &r_values {
                let label = r_label(r);
                let s = power_sum_series(&t, r, &cps)?;
                write_artifact(&output, &format!("powersum_r{label}.csv"), &s.to_csv())?;
                match fit_exponent(&s.restrict(10_000, u64::MAX)) {
                    Ok(fit) => {
                        report.field(format!("r{label}.rho_hat"), fit.rho_hat);
                        println!("r={r}: rho_hat {:.4}", fit.rho_hat);
                    }
                    Err(Error::InsufficientData(_)) => {}
                    Err(e) => return Err(e),
                }
                if r > 0.0 {
                    let sw = sandwich_check(&t, r, &cps)?;
                    write_artifact(
                        &output,
                        &format!("envelope_lower_r{label}.csv"),
                        &sw.lower.to_csv(),
                    )?;
                    write_artifact(
                        &output,
                        &format!("envelope_upper_r{label}.csv"),
                        &sw.upper.to_csv(),
                    )?;
                    report
                        .field(
                            format!("r{label}.worst_lower_margin"),
                            sw.worst_lower_margin,
                        )
                        .field(
                            format!("r{label}.worst_upper_margin"),
                            sw.worst_upper_margin,
                        )
                        .field(
                            format!("r{label}.violations"),
                            sw.lower_violations + sw.upper_violations,
                        )
                        .field(format!("r{label}.summatory_ordered"), sw.summatory_ordered);
                    println!(
                        "r={r}: sandwich {} (margins {:.2e} / {:.2e})",
                        if sw.passed() { "ok" } else { "VIOLATED" },
                        sw.worst_lower_margin,
                        sw.worst_upper_margin
                    );
                    ok &= sw.passed();
                }
            }
            write_artifact(&output, "powersum.txt", &report.render())?;
            Ok(ok)
        }
        Command::Signs { table, output } => {
            let t = load_table(&table)?;
            let cps = default_checkpoints(t.bound() as u64);
            write_artifact(
                &output,
                "signed_sum.csv",
                &signed_sum_series(&t, &cps)?.to_csv(),
            )?;
            let counts = sign_counts(&t, &cps)?;
            write_artifact(&output, "sign_plus.csv", &counts.plus.to_csv())?;
            write_artifact(&output, "sign_minus.csv", &counts.minus.to_csv())?;
            let ratios = signed_sum_ratio(&t, &cps)?;
            let mut csv = String::from("x,value\n");
            for (x, v) in &ratios {
                csv.push_str(&format!("{x},{v:e}\n"));
            }
            write_artifact(&output, "signed_sum_ratio.csv", &csv)?;
            let cor = sign_count_diagnostic(&t, &cps)?;
            let mut csv = String::from(
                "x,a_plus,a_minus,b,n_plus,n_minus,cs_bound_plus,cs_bound_minus,normalized_plus,normalized_minus\n",
            );
            for r in &cor.rows {
                csv.push_str(&format!(
                    "{},{:e},{:e},{:e},{},{},{:e},{:e},{:e},{:e}\n",
                    r.x,
                    r.a_plus,
                    r.a_minus,
                    r.b,
                    r.n_plus,
                    r.n_minus,
                    r.cs_bound_plus,
                    r.cs_bound_minus,
                    r.normalized_plus,
                    r.normalized_minus
                ));
            }
            write_artifact(&output, "sign_counts.csv", &csv)?;
            let last = cor.rows.last().unwrap();
            let finite = ratios.iter().all(|(_, v)| v.is_finite());
            let mut report = Report::default();
            report
                .field("max_ratio", ratios.iter().map(|p| p.1).fold(0.0, f64::max))
                .field("ratio_finite", finite)
                .field("cauchy_schwarz", cor.holds)
                .field("n_plus", last.n_plus)
                .field("n_minus", last.n_minus)
                .field("zeros", counts.zeros.last().unwrap());
            write_artifact(&output, "signs.txt", &report.render())?;
            print!("{}", report.render());
            Ok(finite && cor.holds)
        }
        Command::Satotate {
            table,
            bins,
            output,
        } => {
            let t = load_table(&table)?;
            let rep = sato_tate_stats(&t, t.bound(), bins)?;
            let mut csv = String::from("bin,lo,hi,count,expected\n");
            for (k, (c, e)) in rep.histogram.iter().zip(&rep.expected).enumerate() {
                let w = std::f64::consts::PI / bins as f64;
                csv.push_str(&format!(
                    "{k},{:.6},{:.6},{c},{e:.3}\n",
                    k as f64 * w,
                    (k + 1) as f64 * w
                ));
            }
            write_artifact(&output, "satotate.csv", &csv)?;
            let mut report = Report::default();
            report
                .field("primes", rep.primes)
                .field("bins", bins)
                .field("ks", rep.ks);
            write_artifact(&output, "satotate.txt", &report.render())?;
            print!("{}", report.render());
            Ok(true)
        }
        Command::VerifyAll {
            table,
            grid,
            depth,
            bins,
            output,
        } => {
            let start = Instant::now();
            let t = load_table(&table)?;
            let config = VerifyConfig {
                max_x: t.bound(),
                grid: grid as usize,
                depth,
                bins,
            };
            let results = run_with_table(&t, &config);
            let mut report = Report::default();
            for r in &results {
                println!("{r}");
                report
                    .field(format!("criterion{}.passed", r.id), r.passed)
                    .field(format!("criterion{}.detail", r.id), &r.detail);
            }
            let ok = results.iter().all(|r| r.passed);
            report
                .field("all_passed", ok)
                .field("seconds", format!("{:.1}", start.elapsed().as_secs_f64()));
            write_artifact(&output, "verify.txt", &report.render())?;
            println!(
                "{} of {} criteria passed in {:.1}s",
                results.iter().filter(|r| r.passed).count(),
                results.len(),
                start.elapsed().as_secs_f64()
            );
            Ok(ok)
        }
    }
}
