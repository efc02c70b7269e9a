use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::Parser;
use slatrack_api::{router, ServerConfig};

/// Serves the SLA tracker over HTTP/JSON.
#[derive(Debug, Parser)]
#[command(name = "slatrack-server", version)]
struct Args {
    #[arg(long, env = "SLATRACK_PORT", default_value_t = 8080)]
    port: u16,
    /// No authentication is done, so keep this on loopback unless fronted.
    #[arg(long, env = "SLATRACK_BIND", default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, env = "SLATRACK_STORE", default_value = "requests.csv")]
    store: PathBuf,
    #[arg(long = "out-dir", env = "SLATRACK_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, env = "SLATRACK_MATRIX", default_value = "sla_matrix.json")]
    matrix: PathBuf,
    /// Pin the default report date instead of using today.
    #[arg(long = "as-of", env = "SLATRACK_AS_OF")]
    as_of: Option<NaiveDate>,
    /// Origin allowed to call the API from a browser; repeatable.
    #[arg(long = "allow-origin", env = "SLATRACK_ALLOW_ORIGIN", value_delimiter = ',')]
    allow_origin: Vec<String>,
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt::init();
    let args = Args::parse();
    let config = ServerConfig {
        store_path: args.store,
        matrix_path: args.matrix,
        output_dir: args.out_dir,
        as_of: args.as_of,
        allowed_origins: args.allow_origin,
    };
    let app = match router(config) {
        Ok(app) => app,
        Err(e) => {
            eprintln!("slatrack-server: {}", e.message);
            std::process::exit(64);
        }
    };
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("slatrack-server: cannot bind {addr}: {e}");
            std::process::exit(2);
        }
    };
    tracing::info!("listening on http://{addr}");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
        eprintln!("slatrack-server: {e}");
        std::process::exit(2);
    }
}
