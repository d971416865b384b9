//! Direct method: draw the holding time from the aggregate rate, then pick
//! the firing clock by a linear scan of the cumulative rates.
//!
//! The aggregate is maintained incrementally (one add per changed rate) and
//! recomputed exactly on a fixed event cadence, or whenever it falls near
//! zero, so accumulated rounding can neither bias the holding times nor
//! fake exhaustion.

use crate::counters::OpCounters;
use crate::model::{Event, ProcessModel};
use crate::rng::RngStream;

use super::{AuditError, Method, Scheduler, StepOutcome};

/// Events between exact recomputations of the aggregate rate.
const RESUM_INTERVAL: u64 = 1_000_000;
/// Aggregate this small is recomputed before use: it is either drift or a
/// genuinely tiny sum, and only the exact value can tell.
const RESUM_EPS: f64 = 1e-12;

/// Cumulative scan with strict `target < cum`. Zero-rate clocks can never
/// be selected: they leave the running sum unchanged, and reaching them
/// means the target was not below it. Rounding can leave the target at or
/// above the final sum; the scan then falls back to the last enabled clock.
fn select_linear(rates: &[f64], target: f64, comparisons: &mut u64) -> u32 {
    debug_assert!(target >= 0.0);
    let mut cum = 0.0;
    let mut last_enabled = u32::MAX;
    for (c, &r) in rates.iter().enumerate() {
        cum += r;
        *comparisons += 1;
        if target < cum {
            return c as u32;
        }
        if r > 0.0 {
            last_enabled = c as u32;
        }
    }
    debug_assert!(last_enabled != u32::MAX, "selection needs an enabled clock");
    last_enabled
}

pub struct DirectEngine<M: ProcessModel> {
    model: M,
    state: M::State,
    rates: Vec<f64>,
    r_sum: f64,
    time: f64,
    rng: RngStream,
    counters: OpCounters,
    since_resum: u64,
}

impl<M: ProcessModel> DirectEngine<M> {
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
        let r_sum = rates.iter().sum();
        DirectEngine {
            model,
            state,
            rates,
            r_sum,
            time: 0.0,
            rng,
            counters: OpCounters::default(),
            since_resum: 0,
        }
    }

    fn resum(&mut self) {
        self.r_sum = self.rates.iter().sum();
        self.since_resum = 0;
    }
}

impl<M: ProcessModel> Scheduler<M::State> for DirectEngine<M> {
    fn method(&self) -> Method {
        Method::Dm
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
        for (c, &stored) in self.rates.iter().enumerate() {
            let actual = self.model.rate(&self.state, c as u32);
            if stored.to_bits() != actual.to_bits() {
                return Err(AuditError::StaleRate { clock: c as u32, stored, actual });
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
            // Discarding the overshooting draw is exact: the remaining wait
            // past the cap is again exponential.
            self.time = cap;
            return StepOutcome::CapReached;
        }
        let target = self.rng.uniform() * self.r_sum;
        let clock = select_linear(&self.rates, target, &mut self.counters.comparisons);
        self.time = t_next;
        let affected = self.model.apply_event(&mut self.state, clock, &mut self.rng);
        for &a in affected {
            let r_new = self.model.rate(&self.state, a);
            self.r_sum += r_new - self.rates[a as usize];
            self.rates[a as usize] = r_new;
        }
        self.counters.events += 1;
        self.since_resum += 1;
        StepOutcome::Fired(Event { time: t_next, clock })
    }
}
