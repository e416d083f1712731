use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hecke_spectra::cache::Cache;
use hecke_spectra::config::Config;
use hecke_spectra::experiments::{run_experiment, RunOutput, EXPERIMENTS};
use hecke_spectra::record::{write_csv, write_json_lines};
use hecke_spectra::{HarnessError, Result};

/// Run a trace-formula experiment and emit JSON-lines records.
///
/// The cache directory is taken from HECKE_SPECTRA_CACHE; without it the
/// memo cache lives only for the run. Exit status: 0 success, 1 verification
/// failure, 2 configuration or input error.
#[derive(Debug, Parser)]
#[command(name = "hecke-spectra", version)]
struct Cli {
    /// One of trace, petersson, bessel-sum, noweight, variance, arith-sum,
    /// discrepancy, orbital, verify.
    experiment: String,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Also write records here; a `.csv` extension selects CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) if out.verification_failed => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hecke-spectra: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<RunOutput> {
    if !EXPERIMENTS.contains(&cli.experiment.as_str()) {
        return Err(HarnessError::Config(format!("unknown experiment `{}`; expected one of {EXPERIMENTS:?}", cli.experiment)));
    }
    let config = Config::load(&cli.config)?;
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => config.u64_opt("threads")?.map(|t| t as usize),
    };
    let out_path = cli.out.or_else(|| config.string("out").map(PathBuf::from));
    let cache = Cache::from_env()?;
    let report = cache.load_report();
    if report.rejected > 0 {
        eprintln!(
            "hecke-spectra: cache log damaged, {} line(s) rejected; rebuilding from {} verified entries",
            report.rejected, report.entries
        );
    } else if report.torn_tail {
        eprintln!("hecke-spectra: cache log ends in an incomplete line; rebuilding from {} verified entries", report.entries);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(HarnessError::Config("threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let output = pool.install(|| run_experiment(&cli.experiment, &config, &cache))?;
    cache.flush()?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_json_lines(&output.records, &mut lock)?;
    lock.flush()?;
    if let Some(path) = out_path {
        let file = BufWriter::new(File::create(&path)?);
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            write_csv(&output.records, file)?;
        } else {
            write_json_lines(&output.records, file)?;
        }
    }
    Ok(output)
}
