//! Operation counters reported by every scheduler.
//!
//! Counting is always on; it costs a handful of integer increments per event
//! and makes the schedulers' scaling behaviour directly observable instead
//! of inferred from wall time. Each scheduler increments only the fields
//! that mean something for its data structure; the rest stay zero.

/// Per-run tallies of the elementary operations a scheduler performs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Firing-time or rate comparisons made while selecting events. For the
    /// bucket scheduler this counts one per record inspected during a scan.
    pub comparisons: u64,
    /// Record moves that unlinked from one chain and pushed onto another.
    pub moves_with_relink: u64,
    /// Record moves that stayed in place (destination bucket unchanged).
    pub moves_without_relink: u64,
    /// Sift swaps performed by the indexed heap.
    pub heap_swaps: u64,
    /// Events fired.
    pub events: u64,
    /// Bucket cursor advances over empty buckets.
    pub bucket_iterations: u64,
    /// Full redistributions of all records into a fresh window.
    pub redistributions: u64,
    /// Candidate draws rejected by the composition-rejection sampler.
    pub rejections: u64,
}

impl OpCounters {
    /// Selection work per event: comparisons plus record moves, the cost
    /// pair that dominates the bucket scheduler. Zero events yields zero.
    pub fn ops_per_event(&self) -> f64 {
        if self.events == 0 {
            return 0.0;
        }
        let ops = self.comparisons + self.moves_with_relink + self.moves_without_relink;
        ops as f64 / self.events as f64
    }

    /// Heap swaps per event. Zero events yields zero.
    pub fn heap_swaps_per_event(&self) -> f64 {
        if self.events == 0 {
            return 0.0;
        }
        self.heap_swaps as f64 / self.events as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_guard_zero_events() {
        let c = OpCounters::default();
        assert_eq!(c.ops_per_event(), 0.0);
        assert_eq!(c.heap_swaps_per_event(), 0.0);
    }

    #[test]
    fn ratios_combine_the_right_fields() {
        let c = OpCounters {
            comparisons: 30,
            moves_with_relink: 12,
            moves_without_relink: 8,
            heap_swaps: 40,
            events: 10,
            bucket_iterations: 99,
            redistributions: 3,
            rejections: 7,
        };
        assert_eq!(c.ops_per_event(), 5.0);
        assert_eq!(c.heap_swaps_per_event(), 4.0);
    }
}
