//! First-reaction method: every enabled clock draws a fresh candidate
//! firing time each step; the earliest candidate fires. All candidates are
//! discarded afterwards, which is exact (memorylessness) but costs one
//! exponential draw per enabled clock per event.

use crate::counters::OpCounters;
use crate::model::{Event, ProcessModel};
use crate::rng::RngStream;

use super::{AuditError, Method, Scheduler, StepOutcome};

pub struct FirstReactionEngine<M: ProcessModel> {
    model: M,
    state: M::State,
    rates: Vec<f64>,
    time: f64,
    rng: RngStream,
    counters: OpCounters,
}

impl<M: ProcessModel> FirstReactionEngine<M> {
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
        FirstReactionEngine {
            model,
            state,
            rates,
            time: 0.0,
            rng,
            counters: OpCounters::default(),
        }
    }
}

impl<M: ProcessModel> Scheduler<M::State> for FirstReactionEngine<M> {
    fn method(&self) -> Method {
        Method::Frm
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
        Ok(())
    }

    fn step_capped(&mut self, cap: f64) -> StepOutcome {
        debug_assert!(cap >= self.time);
        // Ascending scan with strict < keeps ties on the lowest clock id.
        let mut min_t = f64::INFINITY;
        let mut min_c = u32::MAX;
        for (c, &r) in self.rates.iter().enumerate() {
            if r > 0.0 {
                let t = self.time + self.rng.exponential(r);
                self.counters.comparisons += 1;
                if t < min_t {
                    min_t = t;
                    min_c = c as u32;
                }
            }
        }
        if !(min_t < cap) {
            if cap.is_finite() {
                self.time = cap;
                return StepOutcome::CapReached;
            }
            return StepOutcome::Exhausted;
        }
        self.time = min_t;
        let affected = self.model.apply_event(&mut self.state, min_c, &mut self.rng);
        for &a in affected {
            self.rates[a as usize] = self.model.rate(&self.state, a);
        }
        self.counters.events += 1;
        StepOutcome::Fired(Event { time: min_t, clock: min_c })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ConstantRates, PureDeath};

    #[test]
    fn one_draw_per_enabled_clock_per_event() {
        let mut e = FirstReactionEngine::new(ConstantRates::new(vec![1.0; 8]), 5);
        let before = 0;
        assert_eq!(before, 0);
        for step in 1..=50u64 {
            e.step().unwrap();
            // ConstantRates keeps all 8 clocks enabled throughout.
            assert_eq!(e.counters().comparisons, 8 * step);
        }
    }

    #[test]
    fn disabled_clocks_cost_no_draws() {
        let mut e = FirstReactionEngine::new(PureDeath::new(5), 8);
        while e.step().is_some() {}
        assert!(matches!(e.step_capped(f64::INFINITY), StepOutcome::Exhausted));
        e.audit().unwrap();
    }

    #[test]
    fn selection_frequencies_follow_rates() {
        let mut e = FirstReactionEngine::new(ConstantRates::new(vec![2.0, 6.0]), 21);
        let n = 40_000;
        let mut hits = [0u64; 2];
        for _ in 0..n {
            hits[e.step().unwrap().clock as usize] += 1;
        }
        let frac = hits[0] as f64 / n as f64;
        assert!((frac - 0.25).abs() < 0.01, "clock 0 fraction {frac}");
    }

    #[test]
    fn cap_discards_candidates_without_bias() {
        // Running to the horizon in one go or in many small hops must give
        // the same law; a quick moment check catches gross bias.
        let horizon = 4.0;
        let rate = 3.0;
        let replicas = 4_000;
        let mut whole = 0u64;
        let mut hopped = 0u64;
        for i in 0..replicas {
            let mut a = FirstReactionEngine::new(ConstantRates::new(vec![rate]), 1000 + i);
            whole += a.run_until(horizon);
            let mut b = FirstReactionEngine::new(ConstantRates::new(vec![rate]), 5000 + i);
            let mut t = 0.25;
            while t <= horizon {
                hopped += b.run_until(t);
                t += 0.25;
            }
        }
        let mean_whole = whole as f64 / replicas as f64;
        let mean_hopped = hopped as f64 / replicas as f64;
        let expect = rate * horizon;
        assert!((mean_whole - expect).abs() < 0.25, "whole-run mean {mean_whole}");
        assert!((mean_hopped - expect).abs() < 0.25, "hopped-run mean {mean_hopped}");
    }

    #[test]
    fn time_is_nondecreasing() {
        let mut e = FirstReactionEngine::new(ConstantRates::new(vec![0.5, 1.5, 4.0]), 13);
        let mut last = 0.0;
        for _ in 0..5_000 {
            let ev = e.step().unwrap();
            assert!(ev.time >= last);
            last = ev.time;
        }
        e.audit().unwrap();
    }

    #[test]
    fn same_seed_reproduces_the_event_sequence() {
        let mut a = FirstReactionEngine::new(ConstantRates::new(vec![1.0, 2.0]), 4);
        let mut b = FirstReactionEngine::new(ConstantRates::new(vec![1.0, 2.0]), 4);
        for _ in 0..1_000 {
            assert_eq!(a.step(), b.step());
        }
    }
}
