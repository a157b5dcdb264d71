//! Time source abstraction.
//!
//! The core crate never reads the wall clock directly. Anytime loops and
//! runtime metrics take a [`Clock`]; the std companion supplies one backed
//! by `Instant`, tests use [`NullClock`].

/// Monotonic millisecond counter.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

/// Clock that never advances. Wall-clock budgets degenerate to a single
/// iteration under it; use iteration budgets in deterministic contexts.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_ms(&self) -> u64 {
        0
    }
}

/// Budget for the anytime improvement loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Fixed number of destroy/repair iterations; deterministic.
    Iterations(u64),
    /// Wall-clock limit in milliseconds, measured with the given clock.
    WallClockMs(u64),
}
