//! The five schedulers and their shared driving interface.
//!
//! Every engine owns its model, state, rate cache, and random stream, and
//! produces the exact jump-process law; they differ only in how the next
//! firing is located and what bookkeeping a rate change costs. All engines
//! advance through [`Scheduler::step_capped`], which never applies an event
//! at or beyond the cap, so a run can stop at an observation time, be
//! inspected, and resume exactly (the clocks are memoryless, discarding an
//! overshooting candidate draw does not bias the law).

pub mod bucket;
mod composition_rejection;
mod direct;
mod first_reaction;
mod hashing_leaping;
mod heap;
mod next_reaction;

pub use composition_rejection::CompositionRejectionEngine;
pub use direct::DirectEngine;
pub use first_reaction::FirstReactionEngine;
pub use hashing_leaping::HlmEngine;
pub use next_reaction::NextReactionEngine;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::counters::OpCounters;
use crate::model::{rescale_time, Event, ProcessModel};
use crate::rng::RngStream;

/// Scheduler selection code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Direct method: aggregate-rate holding time plus linear scan.
    Dm,
    /// First-reaction method: fresh candidate per enabled clock, take the min.
    Frm,
    /// Next-reaction method: indexed min-heap of firing times.
    Nrm,
    /// Composition-rejection: power-of-two rate groups, rejection inside.
    Crm,
    /// Hashing-leaping: firing times hashed into τ/Q buckets per window.
    Hlm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Dm,
        Method::Frm,
        Method::Nrm,
        Method::Crm,
        Method::Hlm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dm => "dm",
            Method::Frm => "frm",
            Method::Nrm => "nrm",
            Method::Crm => "crm",
            Method::Hlm => "hlm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown method '{0}' (expected dm, frm, nrm, crm, or hlm)")]
pub struct ParseMethodError(String);

impl FromStr for Method {
    type Err = ParseMethodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dm" => Ok(Method::Dm),
            "frm" => Ok(Method::Frm),
            "nrm" => Ok(Method::Nrm),
            "crm" => Ok(Method::Crm),
            "hlm" => Ok(Method::Hlm),
            _ => Err(ParseMethodError(s.into())),
        }
    }
}

/// Window length and bucket count for the hashing-leaping scheduler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HlmParams {
    pub tau: f64,
    pub q: u32,
}

impl HlmParams {
    pub fn new(tau: f64, q: u32) -> Self {
        assert!(tau > 0.0 && tau.is_finite(), "window length must be positive");
        assert!(q >= 1, "need at least one bucket");
        HlmParams { tau, q }
    }
}

/// Composition-rejection tuning. `initial_groups` is a capacity hint; the
/// group ladder grows on demand whenever rates leave the covered span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrmParams {
    pub initial_groups: u32,
}

impl Default for CrmParams {
    fn default() -> Self {
        CrmParams { initial_groups: 8 }
    }
}

/// Per-method tuning passed to [`build_engine`]. Methods ignore what they
/// do not use; only `hlm` is mandatory when building that engine.
#[derive(Clone, Copy, Debug, Default)]
pub struct EngineParams {
    pub hlm: Option<HlmParams>,
    pub crm: CrmParams,
}

/// Result of one capped step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    /// One event fired strictly before the cap; time advanced to it.
    Fired(Event),
    /// The next event would fire at or beyond the (finite) cap; time
    /// advanced to the cap and the event was not applied.
    CapReached,
    /// Every clock is disabled and the cap is infinite; nothing will ever
    /// fire again.
    Exhausted,
}

/// Invariant violation found by an engine self-audit.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("clock {clock}: cached rate {stored} but state recomputes to {actual}")]
    StaleRate { clock: u32, stored: f64, actual: f64 },
    #[error("aggregate rate {stored} drifted from recomputed {actual}")]
    StaleSum { stored: f64, actual: f64 },
    #[error("clock {clock}: firing time {time} inconsistent with rate {rate}")]
    TimeRateMismatch { clock: u32, time: f64, rate: f64 },
    #[error("heap invariant broken: {detail}")]
    Heap { detail: String },
    #[error("bucket table invariant broken: {detail}")]
    Buckets { detail: String },
    #[error("rate group structure broken: {detail}")]
    Groups { detail: String },
}

/// Common driving interface over a state type `S`.
pub trait Scheduler<S> {
    fn method(&self) -> Method;
    fn num_clocks(&self) -> u32;
    fn current_time(&self) -> f64;
    fn state(&self) -> &S;
    fn counters(&self) -> OpCounters;

    /// Check every internal invariant against a recomputation from the
    /// current state. Cost is O(M) or worse; meant for validation runs.
    fn audit(&self) -> Result<(), AuditError>;

    /// Fire the next event if it falls strictly before `cap`, else advance
    /// time to the cap (finite) or report exhaustion (infinite cap with no
    /// enabled clock). `cap` must not precede the current time.
    fn step_capped(&mut self, cap: f64) -> StepOutcome;

    /// Fire unconditionally; `None` once all clocks are disabled.
    fn step(&mut self) -> Option<Event> {
        match self.step_capped(f64::INFINITY) {
            StepOutcome::Fired(e) => Some(e),
            _ => None,
        }
    }

    /// Run to `t_end` and leave the clock exactly there. Returns events
    /// fired.
    fn run_until(&mut self, t_end: f64) -> u64 {
        self.run_events(t_end, u64::MAX)
    }

    /// Run to `t_end` or until `max_events` have fired, whichever is first.
    fn run_events(&mut self, t_end: f64, max_events: u64) -> u64 {
        let mut fired = 0;
        while fired < max_events {
            match self.step_capped(t_end) {
                StepOutcome::Fired(_) => fired += 1,
                StepOutcome::CapReached | StepOutcome::Exhausted => break,
            }
        }
        fired
    }
}

impl<S> Scheduler<S> for Box<dyn Scheduler<S>> {
    fn method(&self) -> Method {
        (**self).method()
    }
    fn num_clocks(&self) -> u32 {
        (**self).num_clocks()
    }
    fn current_time(&self) -> f64 {
        (**self).current_time()
    }
    fn state(&self) -> &S {
        (**self).state()
    }
    fn counters(&self) -> OpCounters {
        (**self).counters()
    }
    fn audit(&self) -> Result<(), AuditError> {
        (**self).audit()
    }
    fn step_capped(&mut self, cap: f64) -> StepOutcome {
        (**self).step_capped(cap)
    }
}

/// Construct the chosen engine over `model`, seeded with `seed`.
pub fn build_engine<M>(
    method: Method,
    model: M,
    seed: u64,
    params: &EngineParams,
) -> Box<dyn Scheduler<M::State>>
where
    M: ProcessModel + 'static,
    M::State: 'static,
{
    match method {
        Method::Dm => Box::new(DirectEngine::new(model, seed)),
        Method::Frm => Box::new(FirstReactionEngine::new(model, seed)),
        Method::Nrm => Box::new(NextReactionEngine::new(model, seed)),
        Method::Crm => Box::new(CompositionRejectionEngine::new(model, seed, params.crm)),
        Method::Hlm => {
            let hlm = params
                .hlm
                .expect("the hlm engine needs window parameters (tau, q)");
            Box::new(HlmEngine::new(model, seed, hlm))
        }
    }
}

/// New firing time for a clock whose rate changed from `r_old` to `r_new`
/// at event time `t_fire`, given its pending time `t_old`.
///
/// Disabled targets park at +∞; a clock coming back from rate zero has no
/// pending wait to carry and draws fresh; otherwise the pending wait is
/// rescaled in place.
#[inline]
pub(crate) fn reschedule(
    t_fire: f64,
    t_old: f64,
    r_old: f64,
    r_new: f64,
    rng: &mut RngStream,
) -> f64 {
    if r_new == 0.0 {
        f64::INFINITY
    } else if r_old == 0.0 {
        t_fire + rng.exponential(r_new)
    } else {
        rescale_time(t_old, t_fire, r_old, r_new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ConstantRates;

    #[test]
    fn method_strings_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("HLM".parse::<Method>().unwrap(), Method::Hlm);
        assert!("direct".parse::<Method>().is_err());
    }

    #[test]
    fn reschedule_disables_on_zero_rate() {
        let mut rng = RngStream::new(1);
        assert_eq!(reschedule(2.0, 5.0, 1.0, 0.0, &mut rng), f64::INFINITY);
        assert_eq!(rng.exp_draws(), 0, "no draw spent on a disabled clock");
    }

    #[test]
    fn reschedule_draws_fresh_from_zero_rate() {
        let mut rng = RngStream::new(7);
        let mut reference = rng.clone();
        let t = reschedule(2.0, f64::INFINITY, 0.0, 3.0, &mut rng);
        assert_eq!(t, 2.0 + reference.exponential(3.0));
        assert!(t > 2.0);
    }

    #[test]
    fn reschedule_rescales_between_positive_rates() {
        let mut rng = RngStream::new(7);
        assert_eq!(reschedule(2.0, 5.0, 1.0, 3.0, &mut rng), 3.0);
        assert_eq!(reschedule(2.0, 7.5, 4.0, 4.0, &mut rng), 7.5);
        assert_eq!(rng.exp_draws(), 0, "rescaling must not consume draws");
    }

    #[test]
    fn build_engine_dispatches_every_method() {
        let params = EngineParams {
            hlm: Some(HlmParams::new(0.5, 4)),
            ..EngineParams::default()
        };
        for m in Method::ALL {
            let engine = build_engine(m, ConstantRates::new(vec![1.0, 2.0]), 3, &params);
            assert_eq!(engine.method(), m);
            assert_eq!(engine.num_clocks(), 2);
            assert_eq!(engine.current_time(), 0.0);
        }
    }

    #[test]
    #[should_panic(expected = "window parameters")]
    fn build_hlm_without_params_panics() {
        build_engine(
            Method::Hlm,
            ConstantRates::new(vec![1.0]),
            3,
            &EngineParams::default(),
        );
    }

    #[test]
    fn boxed_engines_still_drive_generically() {
        fn drive<S>(e: &mut impl Scheduler<S>) -> u64 {
            e.run_until(0.5)
        }
        let mut e = build_engine(
            Method::Dm,
            ConstantRates::new(vec![10.0]),
            9,
            &EngineParams::default(),
        );
        let fired = drive(&mut e);
        assert_eq!(e.current_time(), 0.5);
        assert_eq!(e.counters().events, fired);
    }
}
