//! `privscan scan | serve | bench`. Exit codes: 0 on success or an empty scan,
//! 1 on usage errors, 2 on a failed scan, bench or server.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use privscan_core::detect::parse_sidecar;
use privscan_core::RasterImage;
use privscan_service::{Service, PORT_ENV};

use crate::capture::CaptureInsets;
use crate::save::save_image;
use crate::session::{ScanClient, ScanJob, SessionState, DEFAULT_ENDPOINT, ENDPOINT_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Printed when a scan finds nothing privacy related.
pub const NO_ELEMENTS: &str = "NO_CPP_ELEMENTS";

#[derive(Debug, Parser)]
#[command(name = "privscan", version, about = "Contextual privacy policies for app screenshots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan one screenshot and write an overlay per data type.
    Scan(ScanArgs),
    /// Run the scan service.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = privscan_service::DEFAULT_PORT)]
        port: u16,
    },
    /// Mean per-stage latency over the bundled screens.
    Bench {
        /// Service to measure; without it a loopback service and policy server are started.
        #[arg(long, env = ENDPOINT_ENV)]
        endpoint: Option<String>,
        /// Policy URL to scan against; required with --endpoint.
        #[arg(long, requires = "endpoint")]
        policy_url: Option<String>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
struct ScanArgs {
    #[arg(long)]
    screenshot: PathBuf,
    #[arg(long)]
    policy_url: String,
    /// JSON list of on-screen text boxes.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Rows to drop from the top and bottom, as `top,bottom`.
    #[arg(long, value_parser = parse_insets)]
    insets: Option<(u32, u32)>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = ENDPOINT_ENV, default_value = DEFAULT_ENDPOINT)]
    endpoint: String,
    /// File name prefix for saved images.
    #[arg(long, default_value = "scan")]
    stem: String,
}

fn parse_insets(s: &str) -> Result<(u32, u32), String> {
    let (t, b) = s.split_once(',').ok_or_else(|| "expected `top,bottom`".to_string())?;
    let px = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"));
    Ok((px(t)?, px(b)?))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start runtime: {e}");
            return EXIT_FAILED;
        }
    };
    match cli.command {
        Command::Scan(args) => runtime.block_on(scan(args, out, err)),
        Command::Serve { port } => runtime.block_on(serve(port, err)),
        Command::Bench { endpoint, policy_url, n, out: path } => runtime.block_on(bench(endpoint, policy_url, n, path, out, err)),
    }
}

async fn scan(args: ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let fail = |err: &mut dyn Write, msg: String| {
        let _ = writeln!(err, "error: {msg}");
        EXIT_FAILED
    };
    let capture = match std::fs::read(&args.screenshot) {
        Ok(bytes) => match RasterImage::from_png(&bytes) {
            Ok(img) => img,
            Err(e) => return fail(err, format!("{}: {e}", args.screenshot.display())),
        },
        Err(e) => return fail(err, format!("{}: {e}", args.screenshot.display())),
    };
    let sidecar = match &args.sidecar {
        None => None,
        Some(path) => match std::fs::read(path).map_err(|e| e.to_string()).and_then(|b| parse_sidecar(&b).map_err(|e| e.to_string())) {
            Ok(elements) => Some(elements),
            Err(e) => return fail(err, format!("{}: {e}", path.display())),
        },
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return fail(err, format!("{}: {e}", args.out.display()));
    }

    let mut job = ScanJob::new(capture, args.policy_url.clone());
    job.sidecar = sidecar;
    if let Some((top, bottom)) = args.insets {
        job.insets = CaptureInsets::rows(top, bottom);
    }
    let client = ScanClient::new(args.endpoint);
    let session = match client.submit_scan(job) {
        Ok(handle) => handle.wait().await,
        Err(e) => return fail(err, e.to_string()),
    };
    match session.state {
        SessionState::Empty => {
            let _ = writeln!(out, "{NO_ELEMENTS}");
            EXIT_OK
        }
        SessionState::Presenting => {
            let scan = session.result.expect("presenting sessions carry a result");
            for w in &scan.result.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            for (ty, image) in &scan.images {
                if let Some(card) = scan.result.cards.get(ty) {
                    let _ = writeln!(out, "{ty}: {}", card.summary);
                }
                match save_image(image, ty, &args.out, &args.stem) {
                    Ok(path) => {
                        let _ = writeln!(out, "  saved {}", path.display());
                    }
                    Err(e) => return fail(err, format!("saving `{ty}`: {e}")),
                }
            }
            let _ = writeln!(out, "Full privacy policy: {}", args.policy_url);
            EXIT_OK
        }
        _ => fail(err, session.error.unwrap_or_else(|| "scan failed".to_string())),
    }
}

async fn serve(port: u16, err: &mut dyn Write) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    let service = match Service::from_env() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let listener = match tokio::net::TcpListener::bind(("0.0.0.0", port)).await {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: cannot bind port {port}: {e}");
            return EXIT_FAILED;
        }
    };
    match privscan_service::serve(listener, Arc::new(service)).await {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILED
        }
    }
}

async fn bench(
    endpoint: Option<String>,
    policy_url: Option<String>,
    n: usize,
    path: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let report = match (endpoint, policy_url) {
        (Some(endpoint), Some(url)) => crate::bench::run_bench(&endpoint, &url, n).await,
        (Some(endpoint), None) => match crate::bench::serve_dummy_policy().await {
            Ok(addr) => crate::bench::run_bench(&endpoint, &format!("http://{addr}/privacy"), n).await,
            Err(e) => Err(crate::bench::BenchAbortedError(e.to_string())),
        },
        (None, _) => crate::bench::run_local_bench(n).await,
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    let _ = out.write_all(report.render_table().as_bytes());
    if let Some(path) = path {
        let json = serde_json::to_vec_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(&path, json) {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return EXIT_FAILED;
        }
    }
    EXIT_OK
}
