//! Composition-rejection method: clocks are grouped by the binary exponent
//! of their rate, so every member of a group sits within a factor of two of
//! the group's lower bound. Selection first picks a group by its summed
//! rate (composition), then rejection-samples a member inside it; each
//! trial accepts with probability at least one half.
//!
//! Holding times come from the aggregate rate exactly as in the direct
//! method. Group membership is kept by swap-remove slots, so a rate change
//! costs O(1); the group ladder extends itself (in both directions) when
//! rates leave the covered span, and groups are labeled by exponent rather
//! than position so extension never relabels members.

use crate::counters::OpCounters;
use crate::model::{Event, ProcessModel};
use crate::rng::RngStream;

use super::{AuditError, CrmParams, Method, Scheduler, StepOutcome};

const RESUM_INTERVAL: u64 = 1_000_000;
const RESUM_EPS: f64 = 1e-12;

/// Sentinel exponent for disabled clocks (members of no group).
const ZERO_GROUP: i32 = i32::MIN;

/// Binary exponent e with r in [2^e, 2^{e+1}), for finite positive r.
#[inline]
fn exponent(r: f64) -> i32 {
    debug_assert!(r > 0.0 && r.is_finite());
    let biased = ((r.to_bits() >> 52) & 0x7FF) as i32;
    if biased == 0 {
        // Subnormal: no implicit leading bit, fall back to the slow path.
        r.log2().floor() as i32
    } else {
        biased - 1023
    }
}

pub struct CompositionRejectionEngine<M: ProcessModel> {
    model: M,
    state: M::State,
    rates: Vec<f64>,
    /// Exponent of each clock's group, `ZERO_GROUP` when disabled.
    group_of: Vec<i32>,
    /// Position of each clock inside its group's member list.
    slot: Vec<u32>,
    /// Member lists, index k holding exponent `e0 + k`.
    groups: Vec<Vec<u32>>,
    group_sum: Vec<f64>,
    e0: i32,
    r_sum: f64,
    time: f64,
    rng: RngStream,
    counters: OpCounters,
    since_resum: u64,
    scratch: Vec<u32>,
}

impl<M: ProcessModel> CompositionRejectionEngine<M> {
    pub fn new(model: M, seed: u64, params: CrmParams) -> Self {
        let mut rng = RngStream::new(seed);
        let state = model.initial_state(&mut rng);
        let m = model.num_clocks() as usize;
        let rates: Vec<f64> = (0..m as u32)
            .map(|c| {
                let r = model.rate(&state, c);
                assert!(r >= 0.0 && r.is_finite(), "clock {c}: bad rate {r}");
                r
            })
            .collect();
        let mut engine = CompositionRejectionEngine {
            model,
            state,
            rates: rates.clone(),
            group_of: vec![ZERO_GROUP; m],
            slot: vec![0; m],
            groups: Vec::new(),
            group_sum: Vec::new(),
            e0: 0,
            r_sum: 0.0,
            time: 0.0,
            rng,
            counters: OpCounters::default(),
            since_resum: 0,
            scratch: Vec::new(),
        };
        for (c, &r) in rates.iter().enumerate() {
            if r > 0.0 {
                engine.insert(c as u32, r);
            }
        }
        // Pre-open the requested span so early extension churn is avoided.
        while (engine.groups.len() as u32) < params.initial_groups {
            engine.groups.push(Vec::new());
            engine.group_sum.push(0.0);
        }
        engine.resum();
        engine
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Grow the ladder to contain the group for exponent `e`.
    fn ensure_group(&mut self, e: i32) {
        assert!(e < 1023, "rate too large to group");
        if self.groups.is_empty() {
            self.e0 = e;
            self.groups.push(Vec::new());
            self.group_sum.push(0.0);
            return;
        }
        if e < self.e0 {
            let k = (self.e0 - e) as usize;
            self.groups.splice(0..0, (0..k).map(|_| Vec::new()));
            self.group_sum.splice(0..0, (0..k).map(|_| 0.0));
            self.e0 = e;
        } else {
            while e - self.e0 >= self.groups.len() as i32 {
                self.groups.push(Vec::new());
                self.group_sum.push(0.0);
            }
        }
    }

    fn insert(&mut self, clock: u32, r: f64) {
        debug_assert!(r > 0.0);
        let e = exponent(r);
        self.ensure_group(e);
        let idx = (e - self.e0) as usize;
        self.slot[clock as usize] = self.groups[idx].len() as u32;
        self.groups[idx].push(clock);
        self.group_of[clock as usize] = e;
        self.group_sum[idx] += r;
        self.r_sum += r;
    }

    fn remove(&mut self, clock: u32, r_old: f64) {
        let e = self.group_of[clock as usize];
        debug_assert!(e != ZERO_GROUP);
        let idx = (e - self.e0) as usize;
        let pos = self.slot[clock as usize] as usize;
        let members = &mut self.groups[idx];
        members.swap_remove(pos);
        if let Some(&moved) = members.get(pos) {
            self.slot[moved as usize] = pos as u32;
        }
        self.group_of[clock as usize] = ZERO_GROUP;
        self.r_sum -= r_old;
        if members.is_empty() {
            // Exact zero: an empty group must be unselectable, residue from
            // cancellation would make it a candidate.
            self.group_sum[idx] = 0.0;
        } else {
            self.group_sum[idx] -= r_old;
            if self.group_sum[idx] <= RESUM_EPS {
                self.resum_group(idx);
            }
        }
    }

    fn update_rate(&mut self, clock: u32, r_new: f64) {
        let r_old = self.rates[clock as usize];
        if r_old.to_bits() == r_new.to_bits() {
            return;
        }
        self.rates[clock as usize] = r_new;
        if r_new == 0.0 {
            if r_old > 0.0 {
                self.remove(clock, r_old);
            }
            return;
        }
        if r_old == 0.0 {
            self.insert(clock, r_new);
            return;
        }
        let e_new = exponent(r_new);
        if e_new == self.group_of[clock as usize] {
            // Same exponent: adjust sums in place, membership unchanged.
            let idx = (e_new - self.e0) as usize;
            self.group_sum[idx] += r_new - r_old;
            self.r_sum += r_new - r_old;
            if self.group_sum[idx] <= RESUM_EPS {
                self.resum_group(idx);
            }
        } else {
            self.remove(clock, r_old);
            self.insert(clock, r_new);
        }
    }

    fn resum_group(&mut self, idx: usize) {
        self.group_sum[idx] = self.groups[idx]
            .iter()
            .map(|&c| self.rates[c as usize])
            .sum();
    }

    fn resum(&mut self) {
        for idx in 0..self.groups.len() {
            self.resum_group(idx);
        }
        self.r_sum = self.group_sum.iter().sum();
        self.since_resum = 0;
    }

    /// Composition step: pick a group by cumulative sum, scanning from the
    /// largest exponent down (big groups first, so the scan is short on
    /// rate distributions with a heavy top).
    fn select_group(&mut self, target: f64) -> usize {
        let mut cum = 0.0;
        let mut last_nonempty = usize::MAX;
        for idx in (0..self.groups.len()).rev() {
            cum += self.group_sum[idx];
            self.counters.comparisons += 1;
            if target < cum {
                return idx;
            }
            if !self.groups[idx].is_empty() {
                last_nonempty = idx;
            }
        }
        debug_assert!(last_nonempty != usize::MAX, "selection needs a live group");
        last_nonempty
    }

    /// Rejection step inside one group: propose a member uniformly, accept
    /// with probability rate / 2^{e+1}. Never fewer than one-in-two odds.
    fn select_member(&mut self, idx: usize) -> u32 {
        let e = self.e0 + idx as i32;
        let upper = 2f64.powi(e + 1);
        loop {
            let members = &self.groups[idx];
            let pick = members[self.rng.uniform_int(members.len())];
            let z1 = self.rng.uniform() * upper;
            self.counters.comparisons += 1;
            if z1 <= self.rates[pick as usize] {
                return pick;
            }
            self.counters.rejections += 1;
        }
    }
}

impl<M: ProcessModel> Scheduler<M::State> for CompositionRejectionEngine<M> {
    fn method(&self) -> Method {
        Method::Crm
    }

    fn num_clocks(&self) -> u32 {
        self.model.num_clocks()
    }

    fn current_time(&self) -> f64 {
        self.time
    }

    fn state(&self) -> &M::State {
        &self.state
    }

    fn counters(&self) -> OpCounters {
        self.counters
    }

    fn audit(&self) -> Result<(), AuditError> {
        let mut grouped = 0usize;
        for (idx, members) in self.groups.iter().enumerate() {
            let e = self.e0 + idx as i32;
            let lower = 2f64.powi(e);
            let upper = 2f64.powi(e + 1);
            for (pos, &c) in members.iter().enumerate() {
                grouped += 1;
                let r = self.rates[c as usize];
                if !(r >= lower && r < upper) {
                    return Err(AuditError::Groups {
                        detail: format!("clock {c}: rate {r} outside group [{lower}, {upper})"),
                    });
                }
                if self.group_of[c as usize] != e {
                    return Err(AuditError::Groups {
                        detail: format!("clock {c}: group label {} but found under exponent {e}", self.group_of[c as usize]),
                    });
                }
                if self.slot[c as usize] as usize != pos {
                    return Err(AuditError::Groups {
                        detail: format!("clock {c}: slot {} but sits at {pos}", self.slot[c as usize]),
                    });
                }
            }
            let actual: f64 = members.iter().map(|&c| self.rates[c as usize]).sum();
            if (self.group_sum[idx] - actual).abs() > 1e-9 * actual.max(1.0) {
                return Err(AuditError::Groups {
                    detail: format!("group {e}: sum {} drifted from {actual}", self.group_sum[idx]),
                });
            }
        }
        let enabled = self.rates.iter().filter(|r| **r > 0.0).count();
        if grouped != enabled {
            return Err(AuditError::Groups {
                detail: format!("{grouped} grouped clocks but {enabled} enabled"),
            });
        }
        for (c, &stored) in self.rates.iter().enumerate() {
            let actual = self.model.rate(&self.state, c as u32);
            if stored.to_bits() != actual.to_bits() {
                return Err(AuditError::StaleRate { clock: c as u32, stored, actual });
            }
            if (stored == 0.0) != (self.group_of[c] == ZERO_GROUP) {
                return Err(AuditError::Groups {
                    detail: format!("clock {c}: rate {stored} vs membership label {}", self.group_of[c]),
                });
            }
        }
        let actual: f64 = self.rates.iter().sum();
        if (self.r_sum - actual).abs() > 1e-9 * actual.max(1.0) {
            return Err(AuditError::StaleSum { stored: self.r_sum, actual });
        }
        Ok(())
    }

    fn step_capped(&mut self, cap: f64) -> StepOutcome {
        debug_assert!(cap >= self.time);
        if self.r_sum <= RESUM_EPS || self.since_resum >= RESUM_INTERVAL {
            self.resum();
        }
        if self.r_sum == 0.0 {
            if cap.is_finite() {
                self.time = cap;
                return StepOutcome::CapReached;
            }
            return StepOutcome::Exhausted;
        }
        let t_next = self.time + self.rng.exponential(self.r_sum);
        if !(t_next < cap) {
            self.time = cap;
            return StepOutcome::CapReached;
        }
        let target = self.rng.uniform() * self.r_sum;
        let idx = self.select_group(target);
        let clock = self.select_member(idx);
        self.time = t_next;
        // The slice returned by apply_event borrows the model, and regroup
        // work needs &mut self, so stage the list in a reused scratch buffer.
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        scratch.extend_from_slice(self.model.apply_event(&mut self.state, clock, &mut self.rng));
        for &a in &scratch {
            let r_new = self.model.rate(&self.state, a);
            self.update_rate(a, r_new);
        }
        self.scratch = scratch;
        self.counters.events += 1;
        self.since_resum += 1;
        StepOutcome::Fired(Event { time: t_next, clock })
    }
}
