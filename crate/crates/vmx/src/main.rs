use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vmx::error::VmxError;
use vmx::lemma_lab;
use vmx::runner::{self, report};

/// Relativistic Vlasov-Maxwell simulation and verification laboratory.
#[derive(Parser)]
#[command(name = "vmx", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a simulation run and emit its report.
    Run {
        /// Run configuration file (strict key = value sections).
        config: PathBuf,
    },
    /// Run a lemma verification campaign.
    Verify {
        /// Lemma id: 2.4a | 2.4b | 2.4c | 3.1 | 3.3 | 4.2 | 2.2 | 2.3 | 5.1 | 5.2 | strichartz
        #[arg(long)]
        lemma: String,
        /// Optional campaign spec file overriding the built-in defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory for campaign CSV and verdict files.
        #[arg(long, default_value = "vmx-verify")]
        out: PathBuf,
    },
    /// Compare the light-cone field reconstruction against the grid solver
    /// at probe points. The run is re-executed deterministically from the
    /// config stored in the run directory.
    FieldsCompare {
        /// Run directory holding config.txt (from `vmx run`).
        run_dir: PathBuf,
        /// Probe file: one `t x y z` per line.
        probes: PathBuf,
        /// Relative tolerance against the field scale.
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
    /// Regenerate the report files from persisted artifacts.
    Report {
        /// Run directory holding channels.csv and verdicts.csv.
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("VMX_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, VmxError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = runner::load_config(&config)?;
            println!("{}", cfg.echo());
            let artifacts = runner::run_simulation(&cfg)?;
            let files = report::emit_report(&artifacts, &cfg.output_dir)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            println!("{}", report::render_summary(&artifacts));
            if artifacts.failure.is_some() {
                return Err(VmxError::RunHalted {
                    t: artifacts.series.times.last().copied().unwrap_or(0.0),
                    reason: artifacts.failure.clone().unwrap_or_default(),
                });
            }
            Ok(artifacts.all_enabled_pass())
        }
        Command::Verify { lemma, spec, out } => {
            let campaign_spec = match spec {
                Some(path) => lemma_lab::SweepSpec::load(&path)?,
                None => lemma_lab::SweepSpec::default_for(&lemma)?,
            };
            let report = lemma_lab::run_campaign(&lemma, &campaign_spec)?;
            let files = lemma_lab::emit_campaign_report(&report, &out)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            println!("{}", report.render());
            Ok(report.pass)
        }
        Command::FieldsCompare { run_dir, probes, tolerance } => {
            let rows = runner::fields_compare_from_dir(&run_dir, &probes)?;
            let out = run_dir.join("gs_compare.csv");
            runner::write_compare_csv(&rows, &out)?;
            println!("wrote {}", out.display());
            let mut worst = 0.0f64;
            for row in &rows {
                worst = worst.max(row.rel_error);
                println!(
                    "t={} x=({}, {}, {}) |E_gs - E_fdtd|/scale = {:.6}",
                    row.t, row.x.x, row.x.y, row.x.z, row.rel_error
                );
            }
            println!("worst relative deviation: {worst:.6} (tolerance {tolerance})");
            Ok(worst <= tolerance)
        }
        Command::Report { run_dir } => {
            let series = report::load_series(&run_dir)?;
            let verdicts = report::load_verdicts(&run_dir)?;
            let config_text = std::fs::read_to_string(run_dir.join("config.txt"))
                .map_err(|e| VmxError::io(run_dir.display().to_string(), e))?;
            let cfg = runner::parse_config(&config_text, "config.txt")?;
            let pass = verdicts.iter().all(|v| v.pass);
            let artifacts = runner::RunArtifacts {
                config_crc: vmx::io::crc32(cfg.echo().as_bytes()),
                config: cfg,
                series,
                verdicts,
                failure: None,
                history: None,
                code_version: env!("CARGO_PKG_VERSION"),
            };
            let files = report::emit_report(&artifacts, &run_dir)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(pass)
        }
    }
}
