use std::path::PathBuf;
use std::process::ExitCode;

use bcd_pep::bounds::{asymptotic_ratio, bound_ratio, BoundInputs};
use bcd_pep::certificate::{certify, equal_block_certificate, write_certificate, BlockWeights, DEFAULT_PSD_TOL};
use bcd_pep::experiment::{run_figure1, ExperimentConfig};
use bcd_pep::problem::{read_instance, DEFAULT_MIN_SIGMA};
use bcd_pep::{build_sdp, run_cyclic_bcd, write_sdpa, QuadraticProblem};
use clap::{Parser, Subcommand};

const USAGE_ERROR: u8 = 1;
const VERIFICATION_FAILED: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "bcd-pep", version, about = "Cyclic BCD worst-case bounds and their dual certificate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run cyclic BCD from x0 = 0 and write the per-step trace as CSV.
    Run {
        /// Instance file; a random instance from --n/--p/--seed otherwise.
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Last outer iteration index; N + 1 cycles are run.
        #[arg(long = "N", default_value_t = 10)]
        last_outer: usize,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certificate bound, classical bound at k = N + 1, and their ratio.
    Bound {
        #[arg(long = "N")]
        last_outer: usize,
        #[arg(long)]
        p: usize,
        #[arg(long = "Lc", default_value_t = 1.0)]
        l_c: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
    },
    /// Check that the certificate matrix is PSD and compute the minimal t.
    Certify {
        #[arg(long = "N")]
        last_outer: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
        tol: f64,
        /// Write lambda, tau and S to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write the dual SDP in SDPA sparse format.
    ExportSdpa {
        #[arg(long = "N")]
        last_outer: usize,
        #[arg(long)]
        p: usize,
        /// Output file (alternatively --out).
        path: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence experiment: one CSV per p plus summary.txt.
    Figure1 {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,5,20,100")]
        p: Vec<usize>,
        /// Number of cycles per run.
        #[arg(long = "N", default_value_t = 200)]
        cycles: usize,
        /// Seeds, comma separated; 0..19 if omitted.
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
        #[arg(long = "min-sigma", default_value_t = DEFAULT_MIN_SIGMA)]
        min_sigma: f64,
        #[arg(long, default_value = "figure1")]
        out: PathBuf,
        /// Also write a gnuplot script.
        #[arg(long)]
        plot: bool,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(VERIFICATION_FAILED)
        }
    }
}

fn require_blocks(p: usize) -> Result<(), Failure> {
    if p == 0 {
        return Err(usage("--p must be at least 1"));
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            instance,
            n,
            p,
            seed,
            last_outer,
            out,
        } => {
            let problem = match instance {
                Some(path) => read_instance(&path).map_err(usage)?,
                None => QuadraticProblem::random_least_squares(n, p, seed, DEFAULT_MIN_SIGMA).map_err(usage)?,
            };
            let x0 = bcd_pep::nalgebra::DVector::zeros(problem.dim());
            let trace = run_cyclic_bcd(&problem, &x0, last_outer).map_err(usage)?;
            match out {
                Some(path) => trace.write_csv(&path).map_err(usage)?,
                None => print!("{}", trace.to_csv()),
            }
        }
        Command::Bound {
            last_outer,
            p,
            l_c,
            radius,
        } => {
            require_blocks(p)?;
            let inputs = BoundInputs::equal_constants(p, l_c, radius);
            let new = inputs.new_bound(last_outer).map_err(usage)?;
            let beck = inputs.beck(last_outer + 1).map_err(usage)?;
            println!("new={new}");
            println!("beck(k={})={beck}", last_outer + 1);
            if new > 0.0 {
                let ratio = bound_ratio(last_outer, p, l_c, radius).map_err(usage)?;
                println!("ratio={ratio}");
                println!("ratio_limit={}", asymptotic_ratio(p));
            }
        }
        Command::Certify {
            last_outer,
            p,
            tol,
            dump,
        } => {
            require_blocks(p)?;
            if !(tol >= 0.0) {
                return Err(usage(format!("--tol must be nonnegative, got {tol}")));
            }
            let report = certify(last_outer, p, tol);
            let v = report.verdict;
            let psd = if v.psd { "yes" } else { "no" };
            println!(
                "N={last_outer} p={p} M={} t={}",
                (last_outer + 1) * p,
                report.t
            );
            println!(
                "PSD: {psd}, lambda_min={:e}, margin={:e}, norm={}",
                v.lambda_min, v.margin, v.spectral_norm
            );
            match &report.schur {
                Ok(s) => println!("t*={} (rank {}, range residual {:e})", s.t_star, s.rank, s.range_residual),
                Err(e) => println!("t*: {e}"),
            }
            if let Some(path) = dump {
                let (s, c) = equal_block_certificate(last_outer, p);
                write_certificate(&path, &s, &c).map_err(usage)?;
            }
            if !report.passed() {
                return Err(Failure::Verification(format!("certificate check failed for N={last_outer} p={p}")));
            }
        }
        Command::ExportSdpa {
            last_outer,
            p,
            path,
            out,
        } => {
            require_blocks(p)?;
            let target = path.or(out).ok_or_else(|| usage("export-sdpa needs an output path"))?;
            let model = build_sdp(last_outer, p, &BlockWeights::equal(p)).map_err(usage)?;
            write_sdpa(&model, &target).map_err(usage)?;
            println!("wrote {} ({} variables, blocks {:?})", target.display(), model.num_vars, model.block_struct);
        }
        Command::Figure1 {
            n,
            p,
            cycles,
            seed,
            min_sigma,
            out,
            plot,
        } => {
            let config = ExperimentConfig {
                dim: n,
                p_list: p,
                cycles,
                seeds: if seed.is_empty() { (0..20).collect() } else { seed },
                min_sigma,
                out_dir: out,
                plot_script: plot,
            };
            let summary = run_figure1(&config).map_err(usage)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            let violations: Vec<String> = summary.matched_violations().map(ToString::to_string).collect();
            let pep = summary.pep_violations();
            println!("bound violations: {}, PEP slack violations: {pep}", violations.len());
            if !violations.is_empty() || pep > 0 {
                return Err(Failure::Verification(violations.join("; ")));
            }
        }
    }
    Ok(())
}
