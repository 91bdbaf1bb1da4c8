use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfwave_cli::dataset::cmd_dataset;
use nfwave_cli::heatmap::DEFAULT_DB_RANGE;
use nfwave_cli::run::{cmd_compare, cmd_export_csv, cmd_run, RunOptions};
use nfwave_cli::serve::{serve_on, ServeConfig, DEFAULT_JOB_CAPACITY};
use nfwave_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "nfwave", version, about = "2D near-field wave propagation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write heatmap, field dump, RX report and manifest
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dynamic range of the heatmap in dB
        #[arg(long, default_value_t = DEFAULT_DB_RANGE)]
        db_range: f64,
        /// Draw object outlines on the heatmap
        #[arg(long)]
        overlay: bool,
        /// Also write the beam trajectory and the source tree
        #[arg(long)]
        diagnostics: bool,
        /// Replace roughness seeds (reflector i gets SEED + i)
        #[arg(long)]
        seed: Option<u64>,
        /// Field dump to compare the result against
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Compare two field dumps (RMSE and NCC peak)
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded, resumable dataset from a batch spec
    Dataset {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Stop after this many new samples
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Serve the HTTP API and the bundled UI on localhost
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory that relative custom-profile paths resolve against
        #[arg(long, default_value = ".")]
        root: PathBuf,
        /// Directory of static UI files
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_JOB_CAPACITY)]
        jobs: usize,
    },
    /// Convert a field dump to x,y,re,im CSV
    ExportCsv {
        dump: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn serve(port: u16, config: ServeConfig) -> CliResult<()> {
    let rt = tokio::runtime::Runtime::new().map_err(CliError::runtime)?;
    rt.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(("127.0.0.1", port)).await {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::AddrInUse => {
                return Err(CliError::Runtime(format!("port {port} is already in use")));
            }
            Err(e) => return Err(CliError::runtime(e)),
        };
        eprintln!("serving on http://{}", listener.local_addr().map_err(CliError::runtime)?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve_on(listener, config, shutdown).await.map_err(CliError::runtime)
    })
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run {
            scenario,
            out,
            db_range,
            overlay,
            diagnostics,
            seed,
            reference,
        } => {
            let opts = RunOptions {
                db_range,
                overlay,
                diagnostics,
                seed,
                reference,
            };
            let manifest = cmd_run(&scenario, &out, &opts)?;
            println!("wrote {} files to {}", manifest.files.len() + 1, out.display());
            if let Some(m) = manifest.metrics {
                println!("rmse {:.6}  ncc_peak {:.6}  offset {:?}", m.rmse, m.ncc_peak, m.peak_offset);
            }
        }
        Command::Compare { a, b, out } => {
            let m = cmd_compare(&a, &b, out.as_deref())?;
            println!("{}", serde_json::to_string(&m).expect("metrics serialize"));
        }
        Command::Dataset { spec, out, limit } => {
            let s = cmd_dataset(&spec, &out, limit)?;
            println!(
                "generated {}, already present {}, remaining {}",
                s.generated, s.skipped, s.remaining
            );
        }
        Command::Serve {
            port,
            root,
            static_dir,
            workers,
            jobs,
        } => {
            let mut config = ServeConfig {
                scenario_root: root,
                static_dir,
                job_capacity: jobs,
                ..ServeConfig::default()
            };
            if let Some(w) = workers {
                config.workers = w;
            }
            serve(port, config)?;
        }
        Command::ExportCsv { dump, out } => cmd_export_csv(&dump, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
