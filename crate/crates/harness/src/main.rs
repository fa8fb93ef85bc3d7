use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use phototaxis_harness::{
    cmd_analyze, cmd_calibrate, cmd_simulate, cmd_sweep, cmd_theory, theory_table, with_threads, Calibration,
    HarnessError, Layout, RunConfig,
};

#[derive(Parser, Debug)]
#[command(name = "phototaxis", version, about = "Phototactic swimmers in synthetic 2D turbulence")]
struct Cli {
    /// TOML configuration file; defaults apply to anything it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Phototactic coefficient; repeat to replace the configured sweep list.
    #[arg(long, global = true)]
    chi: Vec<f64>,
    /// Master seed, overriding `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, overriding `run.threads` (0 uses every core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure MSV, spectrum, D_f and lambda0 of the passive flow.
    Calibrate,
    /// Run one chi point (requires --chi and a calibration).
    Simulate {
        /// Calibration file; defaults to OUT/calibration.csv.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Run every chi in the sweep list.
    Sweep {
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Tabulate effective-diffusion predictions.
    Theory {
        #[arg(long = "d-f")]
        d_f: Option<f64>,
        #[arg(long)]
        lambda0: Option<f64>,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Box counting and pooled radial profile of stored snapshots.
    Analyze {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = t;
    }
    if !cli.chi.is_empty() {
        cfg.run.chi_list = cli.chi.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let cfg = load_config(&cli)?;
    let layout = Layout::new(&cli.out);
    let calibration_path = |p: &Option<PathBuf>| p.clone().unwrap_or_else(|| layout.calibration());
    with_threads(cfg.run.threads, || match &cli.command {
        Command::Calibrate => cmd_calibrate(&cfg, &layout).map(|c| {
            println!("MSV {:.6}  D_f {:.6} ± {:.6}  lambda0 {:.6}", c.msv, c.d_f, c.d_f_stderr, c.lambda0);
        }),
        Command::Simulate { calibration } => {
            let [chi] = cli.chi.as_slice() else {
                return Err(HarnessError::Config("simulate needs exactly one --chi".into()));
            };
            let cal = Calibration::read(&calibration_path(calibration))?;
            let r = cmd_simulate(&cfg, *chi, &cal, &layout)?;
            println!("chi {chi}: gain {:.6}  D1 {:.4}  KY {:.4}", r.gain, r.d1_boxcount, r.d1_ky);
            Ok(())
        }
        Command::Sweep { calibration } => {
            let cal = Calibration::read(&calibration_path(calibration))?;
            let results = cmd_sweep(&cfg, &cal, &layout)?;
            let failed = results.iter().filter(|r| r.is_err()).count();
            println!("sweep finished: {} points, {failed} failed", results.len());
            Ok(())
        }
        Command::Theory { d_f, lambda0, calibration } => {
            let (d_f, lambda0) = theory_table::theory_inputs_from(*d_f, *lambda0, &calibration_path(calibration))?;
            cmd_theory(&cfg, d_f, lambda0, &layout).map(|_| ())
        }
        Command::Analyze { snapshots } => {
            let report = cmd_analyze(&cfg, snapshots, &layout)?;
            for (path, n, r) in &report.files {
                println!("{}: {n} points, D1 {:.4}", path.display(), r.d1);
            }
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            if let HarnessError::Calibration { series, .. } = &e {
                eprintln!("t,msd");
                for (t, m) in series {
                    eprintln!("{t},{m}");
                }
            }
            ExitCode::FAILURE
        }
    }
}
