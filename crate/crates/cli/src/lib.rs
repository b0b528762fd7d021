//! Library side of the `asymcap` command-line tool: configuration merging,
//! the verification suite and the command runners.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use std::path::{Path, PathBuf};

pub use commands::Output;
pub use error::{CliError, CliResult, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
pub use verify::{run_verification, CheckResult, VerificationReport, VerifyParams};

/// Path of the configuration sidecar written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes the output (and its sidecar) to `out`, or the body to stdout.
pub fn emit(output: &Output, out: Option<&Path>) -> CliResult<()> {
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })
    };
    match out {
        Some(path) => {
            write(path, &output.body)?;
            if let Some(sidecar) = &output.sidecar {
                write(&sidecar_path(path), sidecar)?;
            }
        }
        None => print!("{}", output.body),
    }
    Ok(())
}

/// Caps rayon's global pool from `ASYMCAP_THREADS` when set.
pub fn configure_threads(value: Option<&str>) -> CliResult<()> {
    let Some(raw) = value else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::Usage(format!("ASYMCAP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}
