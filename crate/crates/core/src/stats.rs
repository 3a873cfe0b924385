//! Per-thread operation counters.
//!
//! The multiplication routines report structural events here (table row
//! additions, destination row writes, Strassen-Winograd products and
//! additions per recursion level, scratch allocations, matrix memory).
//! Counters are thread-local, so concurrent multiplications on different
//! threads never observe each other. Increments are batched per table, per
//! stripe group or per recursion step, never per word.

use std::cell::RefCell;

/// Counters for one Strassen-Winograd recursion level (level 0 is the top).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelStats {
    /// Number of times the schedule ran at this level.
    pub calls: u64,
    /// Recursive products issued from this level.
    pub products: u64,
    /// Quadrant-level additions performed at this level.
    pub additions: u64,
    /// Scratch quadrant buffers allocated for this level.
    pub temp_allocs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Combination tables built.
    pub table_builds: u64,
    /// Row additions performed while building combination tables.
    pub table_row_additions: u64,
    /// Stripe groups processed by the M4RM kernels (summed over row blocks).
    pub stripe_groups: u64,
    /// Destination rows of C written by the M4RM inner loop.
    pub c_row_writes: u64,
    /// Sum over processed stripe groups of the rows of A in the current block.
    pub expected_c_row_writes: u64,
    pub strassen_levels: Vec<LevelStats>,
    /// Base-case multiplications issued below the Strassen-Winograd crossover.
    pub base_cases: u64,
    /// Base cases whose target matrix had contiguous rows.
    pub base_cases_contiguous: u64,
    /// Strassen-Winograd recursion entries that happened during a peeling fix-up.
    pub strassen_entries_in_fixup: u64,
    /// Peeling fix-up products issued.
    pub fixup_products: u64,
    /// Bytes currently held by matrices and tables on this thread.
    pub live_bytes: u64,
    /// High-water mark of `live_bytes` since the last reset.
    pub peak_bytes: u64,
    #[doc(hidden)]
    pub in_fixup: bool,
}

thread_local! {
    static STATS: RefCell<Stats> = RefCell::new(Stats::default());
}

pub(crate) fn with<R>(f: impl FnOnce(&mut Stats) -> R) -> R {
    STATS.with(|s| f(&mut s.borrow_mut()))
}

/// Clears all counters. `live_bytes` is kept so that matrices alive across the
/// reset are still accounted for; the peak restarts from it.
pub fn reset() {
    with(|s| {
        let live = s.live_bytes;
        *s = Stats::default();
        s.live_bytes = live;
        s.peak_bytes = live;
    });
}

pub fn snapshot() -> Stats {
    with(|s| s.clone())
}

pub(crate) fn level(s: &mut Stats, depth: usize) -> &mut LevelStats {
    if s.strassen_levels.len() <= depth {
        s.strassen_levels.resize(depth + 1, LevelStats::default());
    }
    &mut s.strassen_levels[depth]
}

pub(crate) fn track_alloc(bytes: usize) {
    with(|s| {
        s.live_bytes += bytes as u64;
        s.peak_bytes = s.peak_bytes.max(s.live_bytes);
    });
}

pub(crate) fn track_free(bytes: usize) {
    // May run from a destructor during thread teardown.
    let _ = STATS.try_with(|s| {
        let mut s = s.borrow_mut();
        s.live_bytes = s.live_bytes.saturating_sub(bytes as u64);
    });
}
