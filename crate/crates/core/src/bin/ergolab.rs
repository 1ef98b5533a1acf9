use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ergolab::acceptance::{run_suite, Suite};
use ergolab::scenario;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Run entropy and ergodicity scenarios and the acceptance suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios in a JSON config and write CSV/JSON reports.
    Run {
        config: PathBuf,
        /// Report CSV path; a sibling `.json` and per-plot CSVs are written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Override every scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = LogLevel::Error)]
        log_level: LogLevel,
    },
    /// Run the built-in acceptance criteria.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Print scenario kinds and their parameter schemas.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogLevel {
    Error,
    Info,
    Debug,
}

impl LogLevel {
    fn filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ERGOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().map_err(|_| format!("ERGOLAB_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("ERGOLAB_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match &cli.command {
        Command::Run { log_level, .. } => log_level.filter(),
        _ => log::LevelFilter::Error,
    };
    env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::Run { config, out, seed, .. } => run(config, out, seed),
        Command::Verify { suite } => verify(suite),
        Command::List => {
            print!("{}", scenario::list_text());
            ExitCode::SUCCESS
        }
    }
}

fn run(config: PathBuf, out: PathBuf, seed: Option<u64>) -> ExitCode {
    let scenarios = match scenario::load_config(&config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let report = scenario::run_all(scenarios, seed);
    let written = match scenario::write_report(&out, &report) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: writing {}: {e}", out.display());
            return ExitCode::from(2);
        }
    };
    for s in &report.scenarios {
        let failed = s.rows.iter().filter(|r| !r.pass).count();
        eprintln!("{:<6} {} ({} rows, {} failed)", if s.pass { "PASS" } else { "FAIL" }, s.id, s.rows.len(), failed);
    }
    log::info!("wrote {} files", written.len());
    eprintln!("runtime {:.2}s; report {}", start.elapsed().as_secs_f64(), out.display());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify(suite: Suite) -> ExitCode {
    println!("{:<4} {:<38} {:<6} {:>9} {:>9}  detail", "id", "criterion", "result", "seconds", "budget");
    let results = run_suite(suite, |r| {
        println!(
            "{:<4} {:<38} {:<6} {:>9.2} {:>9.0}  {}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.elapsed_secs,
            r.budget_secs,
            r.detail
        );
    });
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} passed, {} failed", results.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
