//! Client side of a scan: sanitize and encode a capture, upload it, decode the
//! returned overlays, and drive the single-flight session state. Also hosts the
//! latency bench and the `privscan` command line.

pub mod bench;
pub mod capture;
pub mod cli;
pub mod decode;
pub mod save;
pub mod session;

pub use bench::{run_bench, run_local_bench, BenchAbortedError, BenchReport, MeanTimings};
pub use capture::{compress_capture, sanitize_capture, CaptureInsets, CaptureTooLargeError, InsetsExceedImageError};
pub use decode::{decode_two_stage, subsample_factor, DecodeError, MAX_DECODE_DIM};
pub use save::save_image;
pub use session::{BusyError, DecodedScan, ScanClient, ScanHandle, ScanJob, ScanSession, SessionState};
