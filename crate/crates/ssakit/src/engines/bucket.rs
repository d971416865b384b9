//! Bucketed clock table: the time window [window_start, window_end) is cut
//! into Q equal buckets, each holding an unsorted intrusive doubly-linked
//! chain of clock records; one extra overflow chain holds everything at or
//! beyond the window end, disabled clocks (time +∞) included.
//!
//! Records never allocate: chains thread through prev/next fields stored in
//! one flat array, so a move is pointer surgery on at most three records.
//! A record is exactly 16 bytes (time plus the two links); the bucket it is
//! linked in is always `bucket_index` of its time, so it is never stored.
//! Advancing the window is a single linear sweep that re-buckets all M
//! records at once.
//!
//! `bucket_index` is monotone in the time argument even under floating-point
//! rounding: the window-end comparison happens first, and the scaled offset
//! is clamped at both ends. Monotonicity is what guarantees that a record
//! rescheduled to a later time can never land in an already-drained bucket.

pub const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct ClockRecord {
    time: f64,
    prev: u32,
    next: u32,
}

/// Whether a record move crossed chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    /// New time fell in the record's current bucket; time updated in place.
    Stayed,
    /// Record was unlinked and pushed onto another bucket's chain.
    Relinked,
}

pub struct BucketTable {
    records: Vec<ClockRecord>,
    /// q finite buckets followed by the overflow chain at index q.
    heads: Vec<u32>,
    q: u32,
    tau: f64,
    /// q / tau, precomputed; bucket = ⌊(t − window_start) · scale⌋.
    scale: f64,
    origin: f64,
    window_index: u64,
    window_start: f64,
    window_end: f64,
    finite: usize,
}

impl BucketTable {
    /// Build over the given initial firing times with the first window
    /// starting at `origin`. Performs one redistribution to fill window 0.
    pub fn new(times: &[f64], origin: f64, tau: f64, q: u32) -> Self {
        assert!(!times.is_empty());
        assert!(tau > 0.0 && tau.is_finite(), "window length must be positive");
        assert!(q >= 1, "need at least one bucket");
        assert!(origin.is_finite());
        let records = times
            .iter()
            .map(|&t| {
                assert!(!t.is_nan());
                ClockRecord { time: t, prev: NIL, next: NIL }
            })
            .collect::<Vec<_>>();
        let finite = times.iter().filter(|t| t.is_finite()).count();
        let mut table = BucketTable {
            records,
            heads: vec![NIL; q as usize + 1],
            q,
            tau,
            scale: q as f64 / tau,
            origin,
            window_index: 0,
            window_start: origin,
            window_end: origin + tau,
            finite,
        };
        table.redistribute(0);
        table
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn window_index(&self) -> u64 {
        self.window_index
    }

    pub fn window_start(&self) -> f64 {
        self.window_start
    }

    pub fn window_end(&self) -> f64 {
        self.window_end
    }

    /// Number of records with finite firing time.
    pub fn finite_count(&self) -> usize {
        self.finite
    }

    pub fn time(&self, rec: u32) -> f64 {
        self.records[rec as usize].time
    }

    /// Cache hint: start fetching a record that is about to be read. No
    /// observable effect.
    #[inline]
    pub fn hint_record(&self, rec: u32) {
        crate::model::prefetch_read(self.records.as_ptr().wrapping_add(rec as usize));
    }

    /// Bucket the record is currently linked in. Chains hold exactly the
    /// records whose time maps to them, so this is a recomputation, not a
    /// lookup.
    pub fn bucket_of(&self, rec: u32) -> u32 {
        self.bucket_index(self.records[rec as usize].time)
    }

    /// Bucket for an absolute time under the current window. Times at or
    /// beyond the window end (+∞ included) map to the overflow chain.
    #[inline]
    pub fn bucket_index(&self, t: f64) -> u32 {
        if !(t < self.window_end) {
            return self.q;
        }
        let offset = t - self.window_start;
        if offset <= 0.0 {
            return 0;
        }
        let idx = (offset * self.scale) as u32;
        idx.min(self.q - 1)
    }

    #[inline]
    fn push_front(&mut self, rec: u32, bucket: u32) {
        let head = self.heads[bucket as usize];
        {
            let r = &mut self.records[rec as usize];
            r.prev = NIL;
            r.next = head;
        }
        if head != NIL {
            self.records[head as usize].prev = rec;
        }
        self.heads[bucket as usize] = rec;
    }

    /// `bucket` must be the chain the record is linked in.
    #[inline]
    fn unlink(&mut self, rec: u32, bucket: u32) {
        let ClockRecord { prev, next, .. } = self.records[rec as usize];
        if prev != NIL {
            self.records[prev as usize].next = next;
        } else {
            self.heads[bucket as usize] = next;
        }
        if next != NIL {
            self.records[next as usize].prev = prev;
        }
    }

    /// Walk one chain and return its minimum-time record (ties to the lowest
    /// record id) along with the number of records inspected. Empty chain
    /// inspects nothing.
    pub fn scan_min(&self, bucket: u32) -> (Option<u32>, u64) {
        let mut cur = self.heads[bucket as usize];
        let mut best = NIL;
        let mut best_t = f64::INFINITY;
        let mut inspected = 0u64;
        while cur != NIL {
            inspected += 1;
            let r = self.records[cur as usize];
            if best == NIL || r.time < best_t || (r.time == best_t && cur < best) {
                best = cur;
                best_t = r.time;
            }
            cur = r.next;
        }
        (if best == NIL { None } else { Some(best) }, inspected)
    }

    /// Re-key one record, relinking only if its bucket changed.
    pub fn move_to(&mut self, rec: u32, new_time: f64) -> MoveKind {
        debug_assert!(!new_time.is_nan());
        let old_time = self.records[rec as usize].time;
        let b_old = self.bucket_index(old_time);
        let b = self.bucket_index(new_time);
        match (old_time.is_finite(), new_time.is_finite()) {
            (true, false) => self.finite -= 1,
            (false, true) => self.finite += 1,
            _ => {}
        }
        if b == b_old {
            self.records[rec as usize].time = new_time;
            MoveKind::Stayed
        } else {
            self.unlink(rec, b_old);
            self.records[rec as usize].time = new_time;
            self.push_front(rec, b);
            MoveKind::Relinked
        }
    }

    /// Re-bucket every record into the window with the given index. Window
    /// bounds come from exact multiples of τ off the origin, so repeated
    /// advancement cannot accumulate rounding drift.
    ///
    /// All finite buckets must already be empty (every record drained into
    /// the overflow chain); redistribution is then one cache-friendly sweep
    /// in record order rather than a chain walk.
    pub fn redistribute(&mut self, window_index: u64) {
        for b in 0..self.q {
            assert!(
                self.heads[b as usize] == NIL,
                "finite buckets must be empty before redistribution"
            );
        }
        self.window_index = window_index;
        self.window_start = self.origin + window_index as f64 * self.tau;
        self.window_end = self.origin + (window_index + 1) as f64 * self.tau;
        for h in &mut self.heads {
            *h = NIL;
        }
        for rec in 0..self.records.len() as u32 {
            let b = self.bucket_index(self.records[rec as usize].time);
            self.push_front(rec, b);
        }
    }

    /// Move to the next window.
    pub fn advance_window(&mut self) {
        self.redistribute(self.window_index + 1);
    }

    /// Records of one chain in link order (front first).
    pub fn chain(&self, bucket: u32) -> impl Iterator<Item = u32> + '_ {
        let mut cur = self.heads[bucket as usize];
        std::iter::from_fn(move || {
            if cur == NIL {
                return None;
            }
            let rec = cur;
            cur = self.records[cur as usize].next;
            Some(rec)
        })
    }

    /// Structural audit: every record sits in exactly one chain, links are
    /// mutually consistent, the chain a record is found in matches
    /// `bucket_index` of its time, the finite count is right, and the
    /// window bounds are the exact multiples they were advanced to.
    pub fn check(&self) -> Result<(), String> {
        let m = self.records.len();
        let mut seen = vec![false; m];
        for b in 0..=self.q {
            let mut cur = self.heads[b as usize];
            let mut prev = NIL;
            while cur != NIL {
                let r = &self.records[cur as usize];
                if seen[cur as usize] {
                    return Err(format!("record {cur} linked twice"));
                }
                seen[cur as usize] = true;
                if r.prev != prev {
                    return Err(format!(
                        "record {cur}: prev link {} does not match walk ({prev})",
                        r.prev
                    ));
                }
                let want = self.bucket_index(r.time);
                if want != b {
                    return Err(format!(
                        "record {cur}: time {} belongs in bucket {want}, found in {b}",
                        r.time
                    ));
                }
                if r.time.is_nan() {
                    return Err(format!("record {cur}: time is NaN"));
                }
                prev = cur;
                cur = r.next;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(format!("record {missing} not linked in any chain"));
        }
        let finite = self.records.iter().filter(|r| r.time.is_finite()).count();
        if finite != self.finite {
            return Err(format!(
                "finite count {} does not match actual {finite}",
                self.finite
            ));
        }
        let ws = self.origin + self.window_index as f64 * self.tau;
        let we = self.origin + (self.window_index + 1) as f64 * self.tau;
        if ws != self.window_start || we != self.window_end {
            return Err("window bounds drifted off the τ grid".into());
        }
        Ok(())
    }
}
