use std::net::{IpAddr, SocketAddr};

use anyhow::Context;
use clap::Parser;
use iqft_core::exec::{configure_threads, Execution};
use iqft_service::{router, Config, DEFAULT_MAX_BODY_BYTES};

/// HTTP API for IQFT segmentation, baselines and evaluation.
#[derive(Debug, Parser)]
#[command(name = "iqft-serve", version)]
struct Args {
    #[arg(long, env = "IQFT_BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, env = "IQFT_PORT", default_value_t = 8080)]
    port: u16,
    /// Largest accepted request body in bytes.
    #[arg(long, env = "IQFT_MAX_BODY_BYTES", default_value_t = DEFAULT_MAX_BODY_BYTES)]
    max_body_bytes: usize,
    /// Worker threads for per-pixel work; defaults to one per core.
    #[arg(long, env = "IQFT_WORKERS")]
    workers: Option<usize>,
    /// Process each request's pixels on a single thread.
    #[arg(long, env = "IQFT_SEQUENTIAL")]
    sequential: bool,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    if let Some(n) = args.workers {
        configure_threads(n)?;
    }
    let config = Config {
        max_body_bytes: args.max_body_bytes,
        exec: if args.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
