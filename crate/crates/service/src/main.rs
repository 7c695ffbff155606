use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use specify_core::knowledge::{load_knowledge, Store};
use specify_core::specify::Settings;
use specify_service::repl::run_repl;
use specify_service::{parse_settings, replay_script, serve, Service};

#[derive(Parser)]
#[command(name = "specify", version, about = "Interactive construction of problem specifications")]
struct Cli {
    /// Knowledge file or directory; repeatable. The shipped knowledge is used when absent.
    #[arg(long, value_name = "DIR")]
    knowledge: Vec<PathBuf>,
    /// Replay a session script and exit with 0 iff the model is complete.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["listen", "repl"])]
    replay: Option<PathBuf>,
    /// Read commands interactively (the default without --replay or --listen).
    #[arg(long)]
    repl: bool,
    /// Serve the JSON protocol on this address, e.g. 127.0.0.1:7878.
    #[arg(long, value_name = "ADDR", conflicts_with = "repl")]
    listen: Option<String>,
    /// Default settings as key = value lines.
    #[arg(long, value_name = "FILE")]
    settings: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let store = if cli.knowledge.is_empty() {
        Store::shipped()
    } else {
        load_knowledge(&cli.knowledge).map_err(|e| e.to_string())?
    };
    let settings = match &cli.settings {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_settings(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Settings::default(),
    };
    if let Some(path) = &cli.replay {
        let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let report = replay_script(&store, &src, settings);
        if cli.json {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        } else {
            print!("{}", report.transcript());
        }
        return Ok(if report.exit_code == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let service = Arc::new(Service::new(store, settings));
    if let Some(addr) = &cli.listen {
        eprintln!("listening on {addr}");
        serve(addr.as_str(), service).map_err(|e| format!("{addr}: {e}"))?;
        return Ok(ExitCode::SUCCESS);
    }
    run_repl(&service, BufReader::new(io::stdin()), io::stdout(), cli.json).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("specify: {e}");
            ExitCode::from(2)
        }
    }
}
