use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ocad_cli::{exit, Kind, DEFAULT_TOL};
use ocad_core::dg_solver::{admissible, run_case, RunConfig};
use ocad_core::{OcadError, SymmetricCAD};

#[derive(Parser)]
#[command(name = "ocad", version, about = "Optimal cell average decompositions and bound-preserving DG runs")]
struct Cli {
    /// Feasibility / admissibility tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Classic,
    Optimal,
    Quasi,
}

#[derive(Subcommand)]
enum Command {
    /// Build a decomposition, verify it and write it as JSON.
    Build {
        /// Polynomial family: P or Q.
        space: String,
        /// Polynomial degree.
        k: usize,
        /// Anisotropy parameter in [-1, 1].
        #[arg(allow_hyphen_values = true)]
        theta: f64,
        kind: KindArg,
        /// Output file (stdout when absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a decomposition file and report its certificates.
    Verify { path: PathBuf },
    /// Boundary weights at θ = 0 for k = 1..9.
    Table1,
    /// Classic and quasi-optimal weights relative to the optimum across θ.
    RatioSweep {
        k: usize,
        /// Comma-separated θ values (default: -1, -0.9, …, 1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        thetas: Option<Vec<f64>>,
    },
    /// LP lower bound, optimum and sampled upper bound of the boundary weight.
    Straddle {
        k: usize,
        #[arg(allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 81)]
        grid: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 20_240_101)]
        seed: u64,
    },
    /// Run a solver configuration (JSON) and write errors.csv / bounds.csv.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(short, long, default_value = "ocad-run")]
        out: PathBuf,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("OCAD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second initialisation can only fail if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn fail(e: &OcadError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(ocad_cli::exit_code(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}

fn execute(cli: Cli) -> Result<u8, OcadError> {
    let tol = cli.tol;
    match cli.command {
        Command::Build { space, k, theta, kind, out } => {
            let family = ocad_cli::parse_family(&space)?;
            let kind = match kind {
                KindArg::Classic => Kind::Classic,
                KindArg::Optimal => Kind::Optimal,
                KindArg::Quasi => Kind::Quasi,
            };
            let cad = ocad_cli::build(ocad_cli::space_id(family, k), theta, kind, tol)?;
            let json = cad.to_json();
            match out {
                Some(path) => {
                    std::fs::write(&path, json)?;
                    eprintln!("wrote {} (boundary weight {})", path.display(), cad.boundary_weight);
                }
                None => print!("{json}"),
            }
            Ok(exit::OK)
        }
        Command::Verify { path } => {
            let cad = SymmetricCAD::from_json(&std::fs::read_to_string(&path)?)?;
            let report = ocad_cli::verify(&cad, tol)?;
            print!("{}", report.render());
            Ok(if report.passed() { exit::OK } else { exit::VERIFICATION })
        }
        Command::Table1 => {
            print!("{}", ocad_cli::table1_csv(&ocad_cli::table1()?));
            Ok(exit::OK)
        }
        Command::RatioSweep { k, thetas } => {
            let thetas = thetas.unwrap_or_else(|| ocad_cli::theta_grid(20));
            let rows = ocad_cli::ratio_sweep(k, &thetas)?;
            print!("{}", ocad_cli::ratio_csv(k, &rows));
            Ok(exit::OK)
        }
        Command::Straddle { k, theta, grid, trials, seed } => {
            let s = ocad_cli::straddle(k, theta, grid, trials, seed)?;
            print!("{}", ocad_cli::straddle_csv(k, theta, grid, trials, seed, &s));
            Ok(if s.holds(tol) { exit::OK } else { exit::VERIFICATION })
        }
        Command::Run { config, out } => {
            let cfg = RunConfig::from_json(&std::fs::read_to_string(&config)?)?;
            let report = run_case(&cfg)?;
            report.write(&out, cfg.dump_fields)?;
            print!("{}", report.errors_csv());
            let ok = admissible(&report, cfg.problem_spec().region, tol);
            println!("bounds: {}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { exit::OK } else { exit::VERIFICATION })
        }
    }
}
