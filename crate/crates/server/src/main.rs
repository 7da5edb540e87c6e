use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use tokio::net::TcpListener;
use tracing_subscriber::EnvFilter;

use vecgame_core::api::parse_json;
use vecgame_core::sim::RaceConfig;
use vecgame_server::{serve_eval, serve_http, AppState};

/// Serves the vecgame HTTP API and, optionally, the remote-evaluation stream.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// HTTP listen address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Listen address for newline-delimited remote evaluation.
    #[arg(long)]
    eval_listen: Option<SocketAddr>,
    /// Base race configuration for evaluation requests.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();
    let base = match &args.config {
        None => RaceConfig::default(),
        Some(path) => match std::fs::read(path).map_err(|e| e.to_string()).and_then(|b| {
            let c: RaceConfig = parse_json(&b).map_err(|e| e.to_string())?;
            c.validate().map_err(|e| e.to_string())?;
            Ok(c)
        }) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return std::process::ExitCode::from(2);
            }
        },
    };
    let state = AppState {
        eval_base: Arc::new(base),
    };
    match run(args, state).await {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            std::process::ExitCode::from(3)
        }
    }
}

async fn run(args: Args, state: AppState) -> std::io::Result<()> {
    let http = TcpListener::bind(args.listen).await?;
    tracing::info!("http on {}", http.local_addr()?);
    if let Some(addr) = args.eval_listen {
        let eval = TcpListener::bind(addr).await?;
        tracing::info!("evaluation stream on {}", eval.local_addr()?);
        let base = state.eval_base.clone();
        tokio::spawn(async move {
            if let Err(e) = serve_eval(eval, base).await {
                tracing::error!("evaluation listener stopped: {e}");
            }
        });
    }
    serve_http(http, state).await
}
