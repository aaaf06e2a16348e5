//! Catalog, state files, reports and theorem-verification suites.

pub mod catalog;
pub mod io;
pub mod report;
pub mod verify;

pub use catalog::catalog;
pub use io::{load, Kind, QObject, StateFile};
pub use report::{Record, Relation, TheoremReport};
pub use verify::verify_theorem;

use crate::error::{invalid, Result};

pub const THREADS_VAR: &str = "ENTCOH_THREADS";

/// Worker count from `ENTCOH_THREADS`; unset or `0` means serial.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| invalid(format!("{THREADS_VAR} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (at least one).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
