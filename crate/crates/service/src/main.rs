use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use seqdiag_service::{router, AppState};

/// Serve interactive diagnosis sessions over HTTP.
#[derive(Parser, Debug)]
#[command(name = "seqdiag-service", version)]
struct Args {
    /// Directory holding one JSON document per session
    #[arg(long, default_value = "sessions")]
    data_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let state = AppState::open(&args.data_dir)?;
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
