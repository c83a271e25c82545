use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lane_emden_cli::{parse_config, report_run, run, CliError, Command, RunManifest};

/// Sub-/supersolution enclosure runs for singular Lane-Emden Neumann systems.
#[derive(Debug, Parser)]
#[command(name = "lane-emden", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Run directory; overrides the config's `output` key.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,

    /// Field to emit with `report` (`all` for every stored field).
    #[arg(long, default_value = "all")]
    field: String,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    configure_threads()?;
    if args.command == Command::Report {
        let dir = args.out.ok_or_else(|| CliError::Usage("report needs --out <run dir>".into()))?;
        for path in report_run(&dir, &args.field)? {
            println!("{}", path.display());
        }
        return Ok(());
    }
    let path = args.config.ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let cfg = match parse_config(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            if let Some(dir) = &args.out {
                // Best effort: the config error is what gets reported.
                let mut manifest = RunManifest::new(args.command, args.seed);
                manifest.record_error(&e);
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = manifest.write(dir);
                }
            }
            return Err(e);
        }
    };
    let out = args
        .out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Usage("no run directory: pass --out or set `output`".into()))?;
    let (manifest, outcome) = run(args.command, &cfg, &out, args.seed);
    println!("{}: {} ({})", args.command.name(), manifest.status, out.join(lane_emden_cli::MANIFEST_FILE).display());
    outcome
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
