//! Next-reaction method: one pending firing time per clock, kept in an
//! indexed min-heap. Firing pops the minimum; the fired clock redraws, and
//! every other affected clock keeps its pending time by rescaling it to the
//! new rate, so each event costs one exponential draw plus O(log M) heap
//! work per affected clock.

use crate::counters::OpCounters;
use crate::model::{Event, ProcessModel};
use crate::rng::RngStream;

use super::heap::IndexedMinHeap;
use super::{reschedule, AuditError, Method, Scheduler, StepOutcome};

pub struct NextReactionEngine<M: ProcessModel> {
    model: M,
    state: M::State,
    rates: Vec<f64>,
    heap: IndexedMinHeap,
    time: f64,
    rng: RngStream,
    counters: OpCounters,
}

impl<M: ProcessModel> NextReactionEngine<M> {
    pub fn new(model: M, seed: u64) -> Self {
        let mut rng = RngStream::new(seed);
        let state = model.initial_state(&mut rng);
        let rates: Vec<f64> = (0..model.num_clocks())
            .map(|c| {
                let r = model.rate(&state, c);
                assert!(r >= 0.0 && r.is_finite(), "clock {c}: bad rate {r}");
                r
            })
            .collect();
        let times: Vec<f64> = rates
            .iter()
            .map(|&r| if r > 0.0 { rng.exponential(r) } else { f64::INFINITY })
            .collect();
        NextReactionEngine {
            model,
            state,
            rates,
            heap: IndexedMinHeap::new(times),
            time: 0.0,
            rng,
            counters: OpCounters::default(),
        }
    }
}

impl<M: ProcessModel> Scheduler<M::State> for NextReactionEngine<M> {
    fn method(&self) -> Method {
        Method::Nrm
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
        let mut c = self.counters;
        c.heap_swaps = self.heap.swaps();
        c
    }

    fn audit(&self) -> Result<(), AuditError> {
        for (c, &stored) in self.rates.iter().enumerate() {
            let actual = self.model.rate(&self.state, c as u32);
            if stored.to_bits() != actual.to_bits() {
                return Err(AuditError::StaleRate { clock: c as u32, stored, actual });
            }
            let t = self.heap.time(c as u32);
            if (stored == 0.0) != (t == f64::INFINITY) {
                return Err(AuditError::TimeRateMismatch { clock: c as u32, time: t, rate: stored });
            }
            if t < self.time {
                return Err(AuditError::Heap {
                    detail: format!("clock {c}: pending time {t} precedes current time {}", self.time),
                });
            }
        }
        self.heap.check().map_err(|detail| AuditError::Heap { detail })
    }

    fn step_capped(&mut self, cap: f64) -> StepOutcome {
        debug_assert!(cap >= self.time);
        let (clock, t_next) = self.heap.min();
        if !(t_next < cap) {
            if cap.is_finite() {
                self.time = cap;
                return StepOutcome::CapReached;
            }
            return StepOutcome::Exhausted;
        }
        self.time = t_next;
        let affected = self.model.apply_event(&mut self.state, clock, &mut self.rng);
        for &a in affected {
            let r_new = self.model.rate(&self.state, a);
            let r_old = self.rates[a as usize];
            let t_new = if a == clock {
                if r_new > 0.0 {
                    t_next + self.rng.exponential(r_new)
                } else {
                    f64::INFINITY
                }
            } else {
                reschedule(t_next, self.heap.time(a), r_old, r_new, &mut self.rng)
            };
            self.rates[a as usize] = r_new;
            self.heap.update(a, t_new);
        }
        self.counters.events += 1;
        StepOutcome::Fired(Event { time: t_next, clock })
    }
}
