use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rpca_bench::report::emit_report;
use rpca_bench::{run_sweep, scaling_probe, BenchError, GroupField, Method, MethodConfigs, Scale, SweepSpec};
use rpca_core::eb::SolverConfig;
use rpca_core::pcp::PcpConfig;
use rpca_core::simgen::{gen_rpca, ExperimentSpec};
use rpca_core::DenseMatrix;

#[derive(Parser)]
#[command(name = "rpca", version, about = "Low-rank plus sparse decomposition benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted instance (y.csv, x_true.csv, s_true.csv, manifest.txt).
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = ExperimentSpec::DEFAULT_AMPLITUDE)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decompose a matrix file into x_hat.csv and s_hat.csv.
    Solve {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        lambda: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recovery sweep over rank (figure 1) or corruption level (figure 2).
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        figure: u8,
        #[arg(long, value_enum, default_value = "desk")]
        scale: Scale,
        /// Defaults to 5 at desk scale and 10 at full scale.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Square-matrix comparison at half corruption.
    Table1 {
        #[arg(long, value_enum, default_value = "desk")]
        scale: Scale,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Per-iteration EB timing at fixed m across several n.
    Probe {
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "2000,4000")]
        n_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> rpca_bench::Result<()> {
    match cli.command {
        Command::Gen { m, n, rank, rho, amplitude, seed, out_dir } => {
            let spec = ExperimentSpec { m, n, r: rank, rho, amplitude, seed };
            spec.validate()?;
            gen_rpca(&spec).write_to_dir(&out_dir)?;
            println!("wrote instance to {}", out_dir.display());
        }
        Command::Solve { method, input, lambda, max_iters, out_dir } => {
            let y = DenseMatrix::parse_text(&fs::read_to_string(&input)?)?;
            let configs = MethodConfigs {
                solver: SolverConfig { lambda, max_iterations: max_iters, ..SolverConfig::default() },
                pcp: PcpConfig { max_iterations: max_iters, ..PcpConfig::default() },
            };
            let d = method.solve(&y, &configs)?;
            fs::create_dir_all(&out_dir)?;
            d.x_hat.write_to(out_dir.join("x_hat.csv"))?;
            d.s_hat.write_to(out_dir.join("s_hat.csv"))?;
            let mut trace = String::from("iteration,cost\n");
            for (k, c) in d.cost_trace.iter().enumerate() {
                trace.push_str(&format!("{},{:.16e}\n", k + 1, c));
            }
            fs::write(out_dir.join("cost_trace.csv"), trace)?;
            println!(
                "{method}: {} iterations, converged={}, {:.1} ms",
                d.iterations_used,
                d.converged,
                d.wall_time_ms()
            );
        }
        Command::Sweep { figure, scale, trials, seed, methods, out_dir } => {
            let trials = trials.unwrap_or(scale.default_trials());
            let mut sweep = match figure {
                1 => SweepSpec::figure1(scale, trials, seed),
                _ => SweepSpec::figure2(scale, trials, seed),
            };
            if let Some(methods) = methods {
                sweep.methods = methods;
            }
            let x = if figure == 1 { GroupField::Rank } else { GroupField::Rho };
            let records = run_sweep(&sweep)?;
            let files = emit_report(&records, &[GroupField::Method, x], Some(x), &out_dir)?;
            println!("{} trials written to {}", records.len(), files.raw.display());
        }
        Command::Table1 { scale, seed, trials, out_dir } => {
            let records = run_sweep(&SweepSpec::table1(scale, trials, seed))?;
            emit_report(&records, &[GroupField::Method], None, &out_dir)?;
            print!("{}", fs::read_to_string(out_dir.join("aggregate.csv"))?);
        }
        Command::Probe { m, n_list, out } => {
            let table = scaling_probe(m, &n_list)?;
            let csv = table.to_csv();
            match out {
                Some(path) => fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let BenchError::Core(rpca_core::Error::InvalidParameter(_)) = e {
                return ExitCode::from(2);
            }
            ExitCode::FAILURE
        }
    }
}
