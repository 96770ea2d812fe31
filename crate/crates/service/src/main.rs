use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use calib_service::{loopback, router, AppState, Corpus};
use clap::Parser;
use emotion_isp::PipelineConfig;

#[derive(Parser)]
#[command(name = "calib-service", version, about = "Calibration and A/B study server")]
struct Args {
    /// Directory of study images (`.ppm`/`.png`), optionally with labels.jsonl.
    #[arg(long)]
    images: PathBuf,
    /// Directory receiving calibration.jsonl and ab.jsonl.
    #[arg(long)]
    records_dir: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Address to bind instead of loopback.
    #[arg(long)]
    bind: Option<SocketAddr>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    include_calm: bool,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    match run(args).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

async fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let config = match &args.config {
        Some(path) => PipelineConfig::parse_kv(&std::fs::read_to_string(path)?)?,
        None => PipelineConfig::default(),
    };
    let corpus = Corpus::load(&args.images)?;
    eprintln!("loaded {} images, {} labels", corpus.images.len(), corpus.labels.len());
    std::fs::create_dir_all(&args.records_dir)?;
    let state = AppState::new(corpus, config, args.records_dir).with_calm(args.include_calm);
    let addr = args.bind.unwrap_or_else(|| loopback(args.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await?;
    Ok(())
}
