use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emrank_cli::cache::{Cache, DEFAULT_CACHE_PATH};
use emrank_cli::output::{self, Format};
use emrank_cli::{commands, CliError, Context, EXIT_INVALID, EXIT_MISMATCH};

#[derive(Parser, Debug)]
#[command(name = "emrank", version, about = "Ranks and 2-Selmer groups of the curves E_m")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// One JSON object per line.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    /// Print per-place local verdicts and witnesses for every candidate.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true, env = "EM_CACHE_PATH", default_value = DEFAULT_CACHE_PATH)]
    cache_path: PathBuf,
    /// Include wall-clock timings in analysis records.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full analysis of one curve.
    Analyze {
        #[arg(long)]
        m: u64,
    },
    /// Analyze every admissible m in a range.
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// List admissible m without analyzing them.
        #[arg(long)]
        admissible_only: bool,
    },
    /// Recompute the published table and compare.
    Table1,
    /// 2-Selmer group by complete 2-descent.
    Selmer {
        #[arg(long)]
        m: u64,
        /// Skip the exclusion shortcuts and decide every coset locally.
        #[arg(long)]
        no_filters: bool,
    },
    /// Canonical heights and the pairing matrix of P1, P2 (and P3).
    Heights {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = emrank::heights::DEFAULT_TOL)]
        tol: f64,
    },
    /// Rational torsion subgroup.
    Torsion {
        #[arg(long)]
        m: u64,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    if let Some(n) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    let cache = if g.no_cache {
        Cache::disabled()
    } else {
        Cache::open(&g.cache_path)
            .map_err(|e| CliError::invalid(format!("cannot read cache {}: {e}", g.cache_path.display())))?
    };
    let mut ctx = Context::new(g.seed, cache);
    ctx.timings = g.timings;
    let format = if g.json {
        Format::Json
    } else if g.csv {
        Format::Csv
    } else {
        Format::Human
    };

    let mut code = 0;
    let text = match cli.command {
        Command::Analyze { m } => {
            let rec = commands::analyze(&ctx, m)?;
            if g.verbose {
                let rep = commands::selmer(&ctx, m, true, true)?;
                eprint!("{}", output::selmer(Format::Human, &rep));
            }
            output::analysis(format, &rec)
        }
        Command::Scan { from, to, admissible_only } => {
            if from > to {
                return Err(CliError::invalid(format!("--from {from} exceeds --to {to}")));
            }
            if admissible_only {
                let mut ms = Vec::new();
                for r in commands::scan_admissible(&ctx, from, to) {
                    match r {
                        Ok(m) => ms.push(m),
                        Err(e) => eprintln!("error: {e}"),
                    }
                }
                output::admissible_list(format, &ms)
            } else {
                output::scan(format, &commands::scan(&ctx, from, to)?)
            }
        }
        Command::Table1 => {
            let rows = commands::table1(&ctx);
            if rows.iter().any(|r| !r.s2_match) {
                code = EXIT_MISMATCH;
            }
            output::table1(format, &rows)
        }
        Command::Selmer { m, no_filters } => {
            output::selmer(format, &commands::selmer(&ctx, m, g.verbose, !no_filters)?)
        }
        Command::Heights { m, tol } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError { code: EXIT_INVALID, message: format!("tolerance {tol} must lie in (0, 1)") });
            }
            ctx.tol = tol;
            output::heights(format, &commands::heights(&ctx, m)?)
        }
        Command::Torsion { m } => output::torsion(format, &commands::torsion(&ctx, m)?),
    };
    let mut out = std::io::stdout().lock();
    // A closed pipe is not an error worth reporting.
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
