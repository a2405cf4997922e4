use clap::Parser;
use tokio::net::TcpListener;

#[derive(Parser)]
#[command(name = "qsynth-server", about = "HTTP/JSON synthesis service")]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "QSYNTH_BIND", default_value = "127.0.0.1:7878")]
    bind: String,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    qsynth_core::experiments::init_thread_pool();
    let args = Args::parse();
    let listener = TcpListener::bind(&args.bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    tokio::select! {
        r = qsynth_server::serve(listener) => r,
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}
