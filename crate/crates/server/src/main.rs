use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Parser;
use shrdlurn::default_curriculum;
use shrdlurn_server::{router, Store};

#[derive(Parser)]
#[command(
    name = "shrdlurn-server",
    about = "Serve shrdlurn game sessions over HTTP"
)]
struct Cli {
    #[arg(long, env = "SHRDLURN_PORT", default_value_t = 8080)]
    port: u16,
    /// Directory holding one journal per session.
    #[arg(long, env = "SHRDLURN_DATA_DIR", default_value = "shrdlurn-data")]
    data_dir: PathBuf,
    /// Static files (the browser client) served for other paths.
    #[arg(long, env = "SHRDLURN_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let store = Store::open(&cli.data_dir, default_curriculum())
        .with_context(|| format!("opening {}", cli.data_dir.display()))?;
    eprintln!(
        "restored {} session(s) from {}",
        store.len(),
        cli.data_dir.display()
    );
    let addr = SocketAddr::new(cli.host, cli.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(store, cli.static_dir)).await?;
    Ok(())
}
