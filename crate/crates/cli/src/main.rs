use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ellsurf_core::cli_io::{parse_monodromy, run_pipeline, PipelineConfig, PipelineError, PipelineInput, Stage};

#[derive(Parser)]
#[command(name = "ellsurf", version, about = "Monodromy, homology, periods and Neron-Severi lattices of elliptic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a pencil of plane cubics, or a monodromy representation given as JSON.
    Analyze {
        /// Pencil text, or monodromy JSON (`{"loops": [{"matrix": [[a, b], [c, d]]}, ..]}`).
        file: PathBuf,
        /// Decimal digits of precision for the periods.
        #[arg(long, default_value_t = 100)]
        digits: u32,
        /// Last stage to run: pencil, monodromy, homology, periods or ns.
        #[arg(long, default_value = "ns")]
        stage: Stage,
        /// Use this monodromy instead of computing it by continuation.
        #[arg(long, value_name = "FILE")]
        monodromy_in: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Directory for cached stage results.
        #[arg(long, value_name = "DIR")]
        cache: Option<PathBuf>,
        /// LLL parameter.
        #[arg(long, default_value_t = 0.99)]
        lll_delta: f64,
        /// Skip the comparison with the lattice found at half the digits.
        #[arg(long)]
        no_stability_check: bool,
    },
}

fn read(path: &PathBuf) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::Input(format!("{}: {e}", path.display())))
}

fn analyze(cmd: Command) -> Result<(), PipelineError> {
    let Command::Analyze { file, digits, stage, monodromy_in, out, cache, lll_delta, no_stability_check } = cmd;
    let config = PipelineConfig { digits, lll_delta, stage, cache_dir: cache, stability_check: !no_stability_check, ..PipelineConfig::default() };
    let mut input = PipelineInput::from_text(&read(&file)?)?;
    if let Some(m) = monodromy_in {
        input.monodromy = Some(parse_monodromy(&read(&m)?)?);
    }
    // Panics are bugs: report them as invariant violations rather than aborting.
    let result = std::panic::catch_unwind(|| run_pipeline(&config, &input))
        .map_err(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            PipelineError::Internal { stage, message: format!("panic: {msg}") }
        })??;
    let mut text = serde_json::to_string_pretty(&result.report(&config, &input)).expect("report serialises");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| PipelineError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match analyze(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
