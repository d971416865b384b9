//! Indexed binary min-heap over clock firing times.
//!
//! Every clock is always present (disabled clocks sit at +∞), keyed by
//! (time, clock id) so ties resolve deterministically. The position map
//! makes keyed updates O(log M), and every swap is tallied: swap counts
//! are the scaling observable for the heap-based scheduler.

pub(crate) struct IndexedMinHeap {
    heap: Vec<u32>,
    pos: Vec<u32>,
    times: Vec<f64>,
    swaps: u64,
}

impl IndexedMinHeap {
    /// Build containing clocks 0..times.len(). Construction swaps are not
    /// counted; the tally starts at zero.
    pub fn new(times: Vec<f64>) -> Self {
        let n = times.len();
        assert!(n > 0);
        assert!(times.iter().all(|t| !t.is_nan()));
        let mut h = IndexedMinHeap {
            heap: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
            times,
            swaps: 0,
        };
        for i in (0..n / 2).rev() {
            h.sift_down(i);
        }
        h.swaps = 0;
        h
    }

    #[inline]
    fn less(&self, a: u32, b: u32) -> bool {
        let (ta, tb) = (self.times[a as usize], self.times[b as usize]);
        ta < tb || (ta == tb && a < b)
    }

    #[inline]
    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = i as u32;
        self.pos[self.heap[j] as usize] = j as u32;
        self.swaps += 1;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.less(self.heap[i], self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < n && self.less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < n && self.less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                return;
            }
            self.swap(i, best);
            i = best;
        }
    }

    /// Re-key one clock and restore heap order.
    pub fn update(&mut self, clock: u32, time: f64) {
        debug_assert!(!time.is_nan());
        let i = self.pos[clock as usize] as usize;
        let old = self.times[clock as usize];
        self.times[clock as usize] = time;
        if time < old {
            self.sift_up(i);
        } else if time > old {
            self.sift_down(i);
        }
    }

    /// Clock with the earliest (time, id) key, and its time.
    #[inline]
    pub fn min(&self) -> (u32, f64) {
        let c = self.heap[0];
        (c, self.times[c as usize])
    }

    #[inline]
    pub fn time(&self, clock: u32) -> f64 {
        self.times[clock as usize]
    }

    pub fn swaps(&self) -> u64 {
        self.swaps
    }

    /// Verify heap order and that heap/pos are mutual inverses.
    pub fn check(&self) -> Result<(), String> {
        for i in 1..self.heap.len() {
            let parent = (i - 1) / 2;
            if self.less(self.heap[i], self.heap[parent]) {
                return Err(format!(
                    "heap order violated at index {i}: clock {} under clock {}",
                    self.heap[i], self.heap[parent]
                ));
            }
        }
        for (i, &c) in self.heap.iter().enumerate() {
            if self.pos[c as usize] as usize != i {
                return Err(format!("pos[{c}] does not point back to heap slot {i}"));
            }
        }
        for (c, &p) in self.pos.iter().enumerate() {
            if self.heap[p as usize] as usize != c {
                return Err(format!("heap[{p}] does not hold clock {c}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn min_tracks_smallest_key() {
        let h = IndexedMinHeap::new(vec![5.0, 1.0, 3.0, 0.5]);
        assert_eq!(h.min(), (3, 0.5));
        h.check().unwrap();
    }

    #[test]
    fn ties_resolve_to_lowest_id() {
        let h = IndexedMinHeap::new(vec![2.0, 1.0, 1.0, 1.0]);
        assert_eq!(h.min().0, 1);
    }

    #[test]
    fn construction_swaps_are_not_counted() {
        let h = IndexedMinHeap::new(vec![9.0, 8.0, 7.0, 6.0, 5.0]);
        assert_eq!(h.swaps(), 0);
    }

    #[test]
    fn update_moves_clock_both_directions() {
        let mut h = IndexedMinHeap::new(vec![1.0, 2.0, 3.0, 4.0]);
        h.update(3, 0.5);
        assert_eq!(h.min(), (3, 0.5));
        h.update(3, 10.0);
        assert_eq!(h.min(), (0, 1.0));
        assert!(h.swaps() > 0);
        h.check().unwrap();
    }

    #[test]
    fn infinite_times_sink_to_the_bottom() {
        let mut h = IndexedMinHeap::new(vec![f64::INFINITY, 2.0, f64::INFINITY]);
        assert_eq!(h.min(), (1, 2.0));
        h.update(1, f64::INFINITY);
        // All infinite: ties resolve by id.
        assert_eq!(h.min().0, 0);
        h.check().unwrap();
    }

    #[test]
    fn random_updates_agree_with_linear_scan() {
        let mut rng = RngStream::new(31);
        let n = 64;
        let mut times: Vec<f64> = (0..n).map(|_| rng.uniform() * 100.0).collect();
        let mut h = IndexedMinHeap::new(times.clone());
        for _ in 0..10_000 {
            let c = rng.uniform_int(n);
            let t = if rng.uniform() < 0.1 {
                f64::INFINITY
            } else {
                rng.uniform() * 100.0
            };
            times[c] = t;
            h.update(c as u32, t);
            let best = (0..n)
                .min_by(|&a, &b| {
                    (times[a], a).partial_cmp(&(times[b], b)).unwrap()
                })
                .unwrap();
            assert_eq!(h.min().0, best as u32);
        }
        h.check().unwrap();
    }
}
