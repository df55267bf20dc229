use clap::{Parser, Subcommand};
use ratvec::harness::{
    self, Exp1Config, Exp2Config, SelectionRule, SqrtConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ratvec",
    about = "Orthonormal rational function vector bases: solvers, experiment sweeps and a sqrt(z) approximation pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unit-circle experiment: both solvers over a size sweep, averaged
    /// metrics per size.
    Exp1 {
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 300)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_step: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Experiment with two close nodes carrying linearly dependent weights.
    Exp2 {
        #[arg(long, default_value_t = 40)]
        close_index: usize,
        #[arg(long, default_value_t = 1e-6)]
        theta: f64,
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 300)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_step: usize,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rational approximation of sqrt(z) on [0, 1] with tapered clustered
    /// poles; one table row per N1 value.
    Sqrt {
        /// Comma-separated tapered-pole counts, e.g. 4,9,16,25,36
        #[arg(long, value_delimiter = ',', default_value = "4,9,16,25,36")]
        n1: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Optional per-basis-index error curve file for the largest N1.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Selection rule over the stagnation interval: rate | min
        #[arg(long, default_value = "rate")]
        select: String,
    },
    /// Solve a problem given as JSON and write its metrics row.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// updating | krylov
        #[arg(long, default_value = "updating")]
        algorithm: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{{\"error\":\"{}\"}}", e.to_string().replace('"', "'"));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Exp1 {
            n_min,
            n_max,
            n_step,
            runs,
            seed,
            out,
        } => {
            let cfg = Exp1Config::from_range(n_min, n_max, n_step, runs, seed);
            let csv = harness::run_exp1_csv(&cfg);
            std::fs::write(&out, csv)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Exp2 {
            close_index,
            theta,
            n_min,
            n_max,
            n_step,
            runs,
            seed,
            out,
        } => {
            let cfg = Exp2Config {
                base: Exp1Config::from_range(n_min, n_max, n_step, runs, seed),
                close_index,
                theta,
            };
            let csv = harness::run_exp2_csv(&cfg);
            std::fs::write(&out, csv)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Sqrt {
            n1,
            out,
            curves,
            select,
        } => {
            let rule = match select.as_str() {
                "rate" => SelectionRule::Rate,
                "min" => SelectionRule::Min,
                other => return Err(format!("unknown selection rule {other}").into()),
            };
            let rows = harness::run_sqrt(&n1, rule)?;
            std::fs::write(&out, harness::sqrt_csv(&rows))?;
            eprintln!("wrote {}", out.display());
            if let Some(curves_path) = curves {
                let largest = *n1.iter().max().ok_or("empty n1 list")?;
                let cfg = SqrtConfig::new(largest);
                let (_, solution) = harness::run_sqrt_single(&cfg, rule)?;
                let csv = harness::sqrt_curves_csv(&solution, &cfg)?;
                std::fs::write(&curves_path, csv)?;
                eprintln!("wrote {}", curves_path.display());
            }
        }
        Command::Solve {
            input,
            algorithm,
            out,
        } => {
            let text = std::fs::read_to_string(&input)?;
            let file: harness::ProblemFile = serde_json::from_str(&text)?;
            let problem = file.into_problem()?;
            let algorithm = harness::parse_algorithm(&algorithm)?;
            let csv = harness::solve_to_csv(&problem, algorithm)?;
            std::fs::write(&out, csv)?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}
