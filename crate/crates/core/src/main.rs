use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pfexpm::bench::{
    parse_range, run_matrix_suite, run_scalar_suite, write_csv, write_plotdata, write_scalar_csv, Family,
    MatrixSpec, MatrixSuite,
};
use pfexpm::engine::{Mode, Shift, Threads};
use pfexpm::error::{Error, Result};
use pfexpm::rootgen::{build_table, load_table, save_table, table_file_name, CoeffMethod};
use pfexpm::scalar::linspace;

#[derive(Parser)]
#[command(name = "pfexpm", version, about = "Partial-fraction matrix exponential: tables, scalar and matrix benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix experiments against the eigendecomposition oracle.
    Bench(BenchArgs),
    /// Uniform scalar errors e1, e2, e3 with the bounds M1 and M2.
    Scalar(ScalarArgs),
    /// Generate root tables, or validate the ones already present.
    Tables(TablesArgs),
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: Family,
    /// Dimension, or a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    /// Spectrum interval `lo:hi` for the random family.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value = "full")]
    mode: Mode,
    /// Defaults to 10 for the random family and 1 otherwise.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "auto")]
    threads: Threads,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    digits: u32,
    /// `none`, `auto` or `c=<real>`.
    #[arg(long, default_value = "none", allow_hyphen_values = true)]
    shift: Shift,
    /// Timed repetitions per measurement (median reported).
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
    /// Optional gnuplot-style data file.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct ScalarArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// `lo:hi:count`
    #[arg(long, default_value = "-100:0:10000", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 16)]
    digits: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long)]
    dir: PathBuf,
    #[arg(long, default_value = "product")]
    method: CoeffMethod,
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::BadSpec(format!("bad grid '{s}', expected lo:hi:count"));
    let (range, count) = s.rsplit_once(':').ok_or_else(bad)?;
    let (lo, hi) = parse_range(range).map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    Ok(linspace(lo, hi, count))
}

fn bench(args: BenchArgs) -> Result<()> {
    let range = args.range.as_deref().map(parse_range).transpose()?;
    let specs: Vec<MatrixSpec> = args
        .d
        .iter()
        .map(|&d| MatrixSpec {
            family: args.family,
            d,
            range,
            seed: args.seed,
        })
        .collect();
    for spec in &specs {
        spec.validate()?;
    }
    let mut suite = MatrixSuite::new(specs, args.n, args.mode);
    suite.trials = args
        .trials
        .unwrap_or(if args.family == Family::RandomSpectrum { 10 } else { 1 });
    suite.threads = args.threads;
    suite.shift = args.shift;
    suite.digits = args.digits;
    suite.repeats = args.repeats;
    let records = run_matrix_suite(&suite)?;
    write_csv(&records, &args.out)?;
    if let Some(plot) = &args.plot {
        write_plotdata(&records, plot)?;
    }
    for r in &records {
        if r.bound.is_some_and(|b| r.error > b) {
            eprintln!(
                "note: d={} n={} trial={} error {:e} above bound {:e}",
                r.spec.d,
                r.n,
                r.trial,
                r.error,
                r.bound.unwrap_or_default()
            );
        }
    }
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn scalar(args: ScalarArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let rows = run_scalar_suite(&args.n, &grid, args.digits)?;
    write_scalar_csv(&rows, &args.out)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn tables(args: TablesArgs) -> Result<()> {
    std::fs::create_dir_all(&args.dir)?;
    for &n in &args.n {
        let path = args.dir.join(table_file_name(n));
        if path.exists() {
            let t = load_table(&path)?;
            if t.n() != n {
                return Err(Error::InvariantViolation(format!(
                    "{} holds order {}, expected {n}",
                    path.display(),
                    t.n()
                )));
            }
            println!("n={n:2} valid     residual={:.3e} {}", t.residual(), path.display());
        } else {
            let t = build_table(n, args.method)?;
            save_table(&t, &path)?;
            println!("n={n:2} generated residual={:.3e} {}", t.residual(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Scalar(a) => scalar(a),
        Command::Tables(a) => tables(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
