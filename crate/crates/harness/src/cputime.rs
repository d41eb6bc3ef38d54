//! CPU time of the calling thread.
//!
//! Each grid cell runs start to finish on one rayon worker, so the thread
//! clock is the cell's CPU time regardless of how many cells share the pool.

/// Seconds of CPU time consumed by this thread.
pub fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer and the clock id is a constant
    // supported on every Linux and macOS target.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// A CPU stopwatch started at construction.
#[derive(Debug, Clone, Copy)]
pub struct CpuClock {
    origin: f64,
}

impl CpuClock {
    pub fn start() -> Self {
        Self { origin: thread_cpu_seconds() }
    }

    pub fn elapsed(&self) -> f64 {
        (thread_cpu_seconds() - self.origin).max(0.0)
    }
}

impl Default for CpuClock {
    fn default() -> Self {
        Self::start()
    }
}
