use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conesolve_cli::commands::{
    cmd_lambda_range, cmd_solve, cmd_spectrum, CliError, OutputOptions, Overrides, EXIT_OK, EXIT_SOFTWARE, EXIT_USAGE,
};
use conesolve_cli::config::parse_constant;
use conesolve_cli::verify::{criteria, run_criterion, Status, VerifyOptions, REFERENCE_H};

/// Positive solutions of semilinear elliptic systems by monotone iteration.
#[derive(Parser)]
#[command(name = "conesolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the hypotheses, bracket a fixed point and certify it.
    Solve(Common),
    /// Print the admissible lambda interval of every component.
    LambdaRange(Common),
    /// Print |K(1)|, the principal characteristic value and diagnostics.
    Spectrum(Common),
    /// Run the built-in acceptance suite.
    Verify {
        /// List the criteria without running them.
        #[arg(long)]
        list: bool,
        /// Grid step; failures on grids coarser than 1/64 are reported as SKIP-coarse.
        #[arg(long, value_parser = parse_constant)]
        h: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Grid step, e.g. 1/32.
    #[arg(long, value_parser = parse_constant)]
    h: Option<f64>,
    #[arg(long, value_parser = parse_constant)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV artifacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print tables as CSV.
    #[arg(long)]
    csv: bool,
}

impl Common {
    fn split(self) -> (PathBuf, Overrides, OutputOptions) {
        (
            self.config,
            Overrides {
                h: self.h,
                tol: self.tol,
                max_iter: self.max_iter,
                seed: self.seed,
            },
            OutputOptions {
                csv: self.csv,
                out: self.out,
            },
        )
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CONESOLVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CONESOLVE_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn verify(list: bool, h: Option<f64>, seed: Option<u64>, csv: bool) -> Result<i32, CliError> {
    if list {
        for c in criteria() {
            println!("{}. {}", c.id, c.title);
        }
        return Ok(EXIT_OK);
    }
    let mut opts = VerifyOptions::default();
    if let Some(h) = h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Usage(format!("--h must be positive, got {h}")));
        }
        opts.h = h;
    }
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    if csv {
        println!("criterion,title,status,detail");
    } else if opts.h > REFERENCE_H {
        println!("note: h = {} is coarser than 1/64; grid-dependent failures are SKIP-coarse", opts.h);
    }
    let mut failed = false;
    for c in criteria() {
        let r = run_criterion(c, &opts);
        failed |= r.status == Status::Fail;
        if csv {
            println!("{},{},{},\"{}\"", r.id, r.title, r.status, r.detail.replace('"', "'"));
        } else {
            println!("{r}");
        }
    }
    Ok(if failed { 1 } else { EXIT_OK })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let body = match cli.command {
        Command::Solve(c) => {
            let (path, o, out) = c.split();
            cmd_solve(&path, &o, &out)
        }
        Command::LambdaRange(c) => {
            let (path, o, out) = c.split();
            cmd_lambda_range(&path, &o, &out)
        }
        Command::Spectrum(c) => {
            let (path, o, out) = c.split();
            cmd_spectrum(&path, &o, &out)
        }
        Command::Verify { list, h, seed, csv } => return verify(list, h, seed, csv),
    };
    let (text, code) = body?;
    print!("{text}");
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_SOFTWARE as u8))
}
