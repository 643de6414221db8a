//! `baseshift` — digit-map analysis from the command line.
//!
//! One-shot commands print a single JSON document on stdout; batch
//! commands (`scan`, `verify-all`) stream JSON lines. Exit codes:
//! 0 success, 2 usage or invalid parameters, 3 a machine-checked
//! statement failed on concrete input (the witness is printed), 4 I/O.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::Value;

use baseshift_core::config::{Config, Mode};
use baseshift_core::cyclotomic::check_order_cap;
use baseshift_core::error::Error;
use baseshift_core::identities::{self, IdentityReport, SweepCaps};
use baseshift_core::periodicity::{self, Agreement, FormulaSource};
use baseshift_core::polyring::MultiPoly;
use baseshift_core::{digitmap, pte};

const EXIT_USAGE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_IO: u8 = 4;

/// Environment variable naming a JSON config file with default caps.
const CONFIG_ENV: &str = "BASESHIFT_CONFIG";

#[derive(Parser)]
#[command(name = "baseshift", version, about = "Exact analysis of the base-shifting digit map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Symbolic,
    Sampled,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Symbolic => Mode::Symbolic,
            CliMode::Sampled => Mode::Sampled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the base-shifting map at one point
    Map {
        /// The number to expand (decimal, arbitrary size)
        n: String,
        /// Source base M (digits are read in this base)
        #[arg(long)]
        base: u64,
        /// Target base N (digits are evaluated in this base)
        #[arg(long)]
        target: u64,
    },
    /// Periodicity analysis of the residue sequence for one (M, N) pair
    Period { m: u64, n: u64 },
    /// Build and certify equal-power-sum partitions
    Pte {
        m: u64,
        /// Construction degree p
        #[arg(long)]
        p: u64,
        /// Shift target N (required unless --enumerate)
        #[arg(long = "N")]
        n: Option<u64>,
        /// Emit one certified solution per N coprime to M
        #[arg(long)]
        enumerate: bool,
        /// Also write the power-sum table as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify one identity and print its report
    Verify {
        /// Identity id, e.g. G-multiplicity, S_k, convolution-forward,
        /// moment-0, fd-single, fd-multi, poly-vanishing,
        /// S_pl-closed-form, first-closed-form, second-closed-form
        identity: String,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        p: Option<u64>,
        /// Comma-separated levels for the multi-sum identities
        #[arg(long = "p-list", value_delimiter = ',')]
        p_list: Option<Vec<u64>>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        a: Option<u64>,
        #[arg(long)]
        b: Option<u64>,
        /// Degree of the monomial test function for the fd identities
        #[arg(long)]
        degree: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
    /// Run every identity check within caps, streaming JSON lines
    VerifyAll {
        #[arg(long = "M-cap", default_value_t = 6)]
        m_cap: u64,
        /// Cap on N (defaults to the M cap)
        #[arg(long = "N-cap")]
        n_cap: Option<u64>,
        #[arg(long = "p-cap", default_value_t = 2)]
        p_cap: u64,
        #[arg(long = "r-cap", default_value_t = 2)]
        r_cap: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
        /// Write JSON lines here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the conjectured period formula against brute force over a
    /// parameter range, streaming JSON lines
    Scan {
        /// Inclusive M range, e.g. 2..20
        #[arg(long = "M-range", default_value = "2..20")]
        m_range: String,
        #[arg(long = "N-limit", default_value_t = 400)]
        n_limit: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Write JSON lines here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config() -> Result<Config, Error> {
    let Some(path) = std::env::var_os(CONFIG_ENV) else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(&path)?;
    let cfg: Config = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameters(format!("bad config file {path:?}: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::TheoremViolation { .. } => EXIT_VIOLATION,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(&err))
}

fn print_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string(value).expect("serializable report");
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            writeln!(file, "{text}")?;
            file.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let result = match cli.command {
        Command::Map { n, base, target } => cmd_map(&n, base, target),
        Command::Period { m, n } => cmd_period(m, n),
        Command::Pte { m, p, n, enumerate, csv, out } => cmd_pte(m, p, n, enumerate, csv, out),
        Command::Verify { identity, m, n, p, p_list, k, a, b, degree, mode } => {
            let mode = mode.map(Mode::from).unwrap_or(config.mode);
            cmd_verify(&config, &identity, m, n, p, p_list, k, a, b, degree, mode)
        }
        Command::VerifyAll { m_cap, n_cap, p_cap, r_cap, workers, mode, out } => {
            let mode = mode.map(Mode::from).unwrap_or(config.mode);
            let workers = workers.unwrap_or(config.worker_count);
            cmd_verify_all(&config, m_cap, n_cap.unwrap_or(m_cap), p_cap, r_cap, workers, mode, out)
        }
        Command::Scan { m_range, n_limit, workers, out } => {
            let workers = workers.unwrap_or(config.worker_count);
            cmd_scan(&config, &m_range, n_limit, workers, out.or(config.output_path.clone()))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => fail(e),
    }
}

#[derive(Serialize)]
struct MapOutput {
    n: String,
    base: u64,
    target: u64,
    base_shift: String,
    residue: u64,
    digits: Vec<u64>,
}

fn cmd_map(n: &str, base: u64, target: u64) -> Result<ExitCode, Error> {
    let n: BigUint = n
        .parse()
        .map_err(|e| Error::InvalidInput(format!("bad number {n:?}: {e}")))?;
    let digits = digitmap::digits(&n, base)?;
    let shifted = digitmap::base_shift(&n, base, target)?;
    let residue = digitmap::residue(&n, base, target)?;
    let output = MapOutput {
        n: n.to_string(),
        base,
        target,
        base_shift: shifted.to_string(),
        residue,
        digits: digits.digits().to_vec(),
    };
    print_json(&output, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_period(m: u64, n: u64) -> Result<ExitCode, Error> {
    let report = periodicity::period_report(m, n)?;
    print_json(&report, None)?;
    if report.agreement == Agreement::Mismatch {
        match report.formula_source {
            Some(FormulaSource::PrimePowerTheorem) => {
                eprintln!(
                    "error: prime-power formula predicts {:?} but brute force found {:?}",
                    report.formula_period, report.minimal_period
                );
                return Ok(ExitCode::from(EXIT_VIOLATION));
            }
            _ => {
                eprintln!(
                    "COUNTEREXAMPLE: conjectured period {:?} but brute force found {:?} at M={m}, N={n}",
                    report.formula_period, report.minimal_period
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_pte(
    m: u64,
    p: u64,
    n: Option<u64>,
    enumerate: bool,
    csv: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let solutions = if enumerate {
        if n.is_some() {
            return Err(Error::InvalidParameters(
                "--enumerate covers every coprime N; do not pass --N".into(),
            ));
        }
        pte::enumerate_solutions(m, p)?
    } else {
        let n = n.ok_or_else(|| {
            Error::InvalidParameters("pass --N for a single partition or use --enumerate".into())
        })?;
        vec![pte::certify(pte::build_partition(m, n, p)?, p)?]
    };
    if let Some(path) = csv {
        let mut file = BufWriter::new(File::create(path)?);
        for sol in &solutions {
            file.write_all(sol.power_sum_csv().as_bytes())?;
        }
        file.flush()?;
    }
    if enumerate {
        print_json(&solutions, out.as_ref())?;
    } else {
        print_json(&solutions[0], out.as_ref())?;
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    config: &Config,
    identity: &str,
    m: u64,
    n: u64,
    p: Option<u64>,
    p_list: Option<Vec<u64>>,
    k: Option<u64>,
    a: Option<u64>,
    b: Option<u64>,
    degree: Option<u64>,
    mode: Mode,
) -> Result<ExitCode, Error> {
    check_order_cap(m, config.order_cap)?;
    let need_p = || p.ok_or_else(|| Error::InvalidParameters("this identity needs --p".into()));
    let need_list = || {
        p_list
            .clone()
            .ok_or_else(|| Error::InvalidParameters("this identity needs --p-list".into()))
    };
    let report: IdentityReport = match identity.to_ascii_lowercase().as_str() {
        "g-multiplicity" | "g_multiplicity" => identities::check_multiplicity(need_p()?, m, n)?,
        "s_k" | "s_k-vanishing" | "s-k-vanishing" => {
            let k = k.ok_or_else(|| Error::InvalidParameters("S_k needs --k".into()))?;
            identities::check_power_sum_vanishing(k, need_p()?, m, n)?
        }
        "convolution-forward" => identities::check_convolution_forward(need_p()?, m, n)?,
        "convolution-inverse" => identities::check_convolution_inverse(need_p()?, m, n)?,
        "moment-0" | "moment0" => identities::check_moment0(need_p()?, m, n)?,
        "moment-1" | "moment1" => identities::check_moment1(need_p()?, m, n)?,
        "fd-single" => {
            let p = need_p()?;
            let d = degree.unwrap_or(p + 2);
            let f = MultiPoly::var(m, "u").pow(d as u32);
            identities::check_difference_single(p, m, n, &f, "u", "x", "y", mode)?
        }
        "fd-multi" => {
            let list = need_list()?;
            let d = degree.unwrap_or_else(|| list.iter().map(|&q| q + 1).sum::<u64>() + 1);
            let f = MultiPoly::var(m, "u").pow(d as u32);
            let y_names: Vec<String> = (1..=list.len()).map(|j| format!("y{j}")).collect();
            identities::check_difference_multi(&list, m, n, &f, "u", "x", &y_names, mode)?
        }
        "poly-vanishing" => {
            let a = a.ok_or_else(|| Error::InvalidParameters("poly-vanishing needs --a".into()))?;
            let b = b.ok_or_else(|| Error::InvalidParameters("poly-vanishing needs --b".into()))?;
            identities::check_vanishing_sum(need_p()?, m, n, a, b)?
        }
        "s_pl-closed-form" | "s-pl-closed-form" | "s_pl" => {
            identities::check_mixed_sum_closed_form(need_p()?, m, n, mode)?
        }
        "first-closed-form" => identities::check_first_closed_form(&need_list()?, m, n, mode)?,
        "second-closed-form" => identities::check_second_closed_form(&need_list()?, m, n, mode)?,
        other => {
            return Err(Error::InvalidParameters(format!("unknown identity {other:?}")));
        }
    };
    print_json(&report, None)?;
    if report.verified {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: identity not verified; witness: {:?}", report.witness);
        Ok(ExitCode::from(EXIT_VIOLATION))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_all(
    config: &Config,
    m_cap: u64,
    n_cap: u64,
    p_cap: u64,
    r_cap: u64,
    workers: usize,
    mode: Mode,
    out: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    check_order_cap(m_cap, config.order_cap)?;
    if p_cap > config.p_cap {
        return Err(Error::InvalidParameters(format!(
            "p cap {p_cap} exceeds configured limit {}",
            config.p_cap
        )));
    }
    if r_cap > config.r_cap {
        return Err(Error::InvalidParameters(format!(
            "r cap {r_cap} exceeds configured limit {}",
            config.r_cap
        )));
    }
    let caps = SweepCaps { m_cap, n_cap, p_cap, r_cap };
    let reports = identities::verify_all(&caps, mode, workers)?;
    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut failures = 0usize;
    for report in &reports {
        serde_json::to_writer(&mut sink, report).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
        if !report.verified {
            failures += 1;
            eprintln!(
                "error: {} not verified at {:?}: {:?}",
                serde_json::to_string(&report.identity).unwrap_or_default(),
                report.params,
                report.witness
            );
        }
    }
    sink.flush()?;
    let mut summary = BTreeMap::<String, Value>::new();
    summary.insert("checks".into(), Value::from(reports.len()));
    summary.insert("failures".into(), Value::from(failures));
    eprintln!("{}", serde_json::to_string(&summary).unwrap_or_default());
    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_VIOLATION))
    }
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u64>, Error> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| Error::InvalidParameters(format!("bad range {text:?}, expected LO..HI")))?;
    let lo: u64 = lo
        .trim()
        .parse()
        .map_err(|e| Error::InvalidParameters(format!("bad range start {lo:?}: {e}")))?;
    let hi: u64 = hi
        .trim()
        .parse()
        .map_err(|e| Error::InvalidParameters(format!("bad range end {hi:?}: {e}")))?;
    Ok(lo..=hi)
}

fn cmd_scan(
    config: &Config,
    m_range: &str,
    n_limit: u64,
    workers: usize,
    out: Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let range = parse_range(m_range)?;
    if *range.end() > config.scan_m_cap {
        return Err(Error::InvalidParameters(format!(
            "scan range end {} exceeds configured M cap {}",
            range.end(),
            config.scan_m_cap
        )));
    }
    let report = periodicity::conjecture_scan(range, n_limit, workers)?;
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            periodicity::write_scan_jsonl(&report, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            periodicity::write_scan_jsonl(&report, stdout.lock())?;
        }
    }
    for r in report.mismatches() {
        eprintln!(
            "COUNTEREXAMPLE: M={}, N={} predicted {} but observed {}",
            r.m, r.n, r.predicted, r.observed
        );
    }
    eprintln!(
        "scan: {} pairs tested, {} skipped, {} mismatches",
        report.summary.pairs_tested, report.summary.pairs_skipped, report.summary.mismatches
    );
    Ok(ExitCode::SUCCESS)
}
