use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fracrb_cli::{
    rate_table, rates_csv, run_convergence_study, run_mesh_sweep, zpoints_text, ExperimentConfig,
    StudyOutput,
};

#[derive(Parser)]
#[command(
    name = "fracrb",
    about = "Fractional elliptic solves via reduced basis surrogates with Zolotarev snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StudyArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and resolved config.
    #[arg(long)]
    out: PathBuf,
    /// Deterministic single-threaded execution; timing columns are zeroed.
    #[arg(long)]
    serial: bool,
    /// Overrides the random rhs seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the automatic-bounds safety factor.
    #[arg(long)]
    safety: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study over (r, s) on one mesh.
    Study(StudyArgs),
    /// One study per mesh resolution, plus a fitted-rate summary.
    Sweep {
        #[command(flatten)]
        common: StudyArgs,
        /// Comma-separated mesh resolutions, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
    /// Decay-rate constants C*(kappa) with intermediate quantities.
    Rates {
        /// Condition numbers, one row each.
        #[arg(required = true)]
        kappa: Vec<f64>,
        /// Write rates.csv here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zolotarev points on [delta, 1].
    Zpoints {
        #[arg(long)]
        delta: f64,
        #[arg(short, long)]
        r: usize,
        /// Write zpoints.txt here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &StudyArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.override_seed(seed);
    }
    if let Some(safety) = args.safety {
        cfg.override_safety(safety);
    }
    Ok(cfg)
}

fn write_study(out_dir: &PathBuf, name: &str, study: &StudyOutput) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(name), study.to_csv())?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Study(args) => {
            let cfg = load_config(&args)?;
            let study = run_convergence_study(&cfg, args.serial)?;
            write_study(&args.out, "study.csv", &study)?;
            fs::write(args.out.join("config.resolved.json"), cfg.to_json())?;
            if study.one_sided_violations > 0 {
                eprintln!(
                    "warning: {} rows violate the one-sided dual norm bound",
                    study.one_sided_violations
                );
            }
            println!(
                "study: N = {}, kappa = {:.6e}, C* = {:.6}, rows = {}",
                study.n_dofs,
                study.kappa,
                study.c_star,
                study.rows.len()
            );
            println!("wrote {}", args.out.join("study.csv").display());
        }
        Command::Sweep { common, n_list } => {
            let cfg = load_config(&common)?;
            let sweep = run_mesh_sweep(&cfg, &n_list, common.serial)?;
            fs::create_dir_all(&common.out)?;
            for study in &sweep.studies {
                let name = format!("study_n{}.csv", study.config.n);
                write_study(&common.out, &name, study)?;
            }
            fs::write(common.out.join("sweep_summary.csv"), sweep.summary_csv())?;
            fs::write(common.out.join("config.resolved.json"), cfg.to_json())?;
            println!(
                "sweep over n = {:?}: wrote {} studies and sweep_summary.csv to {}",
                n_list,
                sweep.studies.len(),
                common.out.display()
            );
        }
        Command::Rates { kappa, out } => {
            let (rows, rejected) = rate_table(&kappa);
            for (k, why) in &rejected {
                eprintln!("rejected kappa = {k}: {why}");
            }
            let csv = rates_csv(&rows);
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("rates.csv"), &csv)?;
                    println!("wrote {}", dir.join("rates.csv").display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Zpoints { delta, r, out } => {
            let text = zpoints_text(delta, r)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("zpoints.txt"), &text)?;
                    println!("wrote {}", dir.join("zpoints.txt").display());
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
