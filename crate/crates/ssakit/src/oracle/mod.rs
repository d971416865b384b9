//! Validation harness: statistical checks that an engine samples the exact
//! process law, plus structural audits of engine internals during a run.
//!
//! The statistical ops build one fresh engine per replica from a seed
//! ladder, so failures reproduce from the reported base seed. Pass/fail
//! verdicts come from [`stats`]; non-rejection at significance `alpha` is
//! the pass criterion, and under-powered samples pass with a flag rather
//! than pretending to confirm anything.

pub mod stats;

pub use stats::{
    chi_square_gof, exp_cdf, ks_one_sample, ks_two_sample, StatTestReport, DEFAULT_ALPHA,
    MIN_SAMPLES,
};

use crate::engines::{AuditError, Scheduler};
use thiserror::Error;

/// Seed offset between the two sides of a cross-engine comparison, so the
/// ensembles never share replica streams even by accident.
const CROSS_SEED_OFFSET: u64 = 0xA076_1D64_78BD_642F;

/// Run `replicas` independent engines to `t_end` and record one observable
/// from each final configuration. Replica `i` is built from `seed + i`.
pub fn collect_observable<S, E, F, G>(
    mut make: F,
    observable: G,
    t_end: f64,
    replicas: u32,
    seed: u64,
) -> Vec<f64>
where
    E: Scheduler<S>,
    F: FnMut(u64) -> E,
    G: Fn(&E) -> f64,
{
    (0..replicas)
        .map(|i| {
            let mut engine = make(seed.wrapping_add(u64::from(i)));
            engine.run_until(t_end);
            observable(&engine)
        })
        .collect()
}

/// Chi-square check that the first event lands on clock `c` with
/// probability `rates[c] / Σ rates`. Builds one engine per trial.
pub fn first_event_index_test<S, E, F>(
    name: &str,
    mut make: F,
    rates: &[f64],
    trials: u32,
    seed: u64,
    alpha: f64,
) -> StatTestReport
where
    E: Scheduler<S>,
    F: FnMut(u64) -> E,
{
    let mut observed = vec![0u64; rates.len()];
    for i in 0..trials {
        let mut engine = make(seed.wrapping_add(u64::from(i)));
        let ev = engine.step().expect("at least one clock must be enabled");
        observed[ev.clock as usize] += 1;
    }
    let r_sum: f64 = rates.iter().sum();
    let expected: Vec<f64> = rates
        .iter()
        .map(|r| r / r_sum * f64::from(trials))
        .collect();
    chi_square_gof(name, &observed, &expected, alpha)
}

/// KS check that the first event time is Exp(`r_sum`) distributed, where
/// `r_sum` is the total rate out of the initial configuration.
pub fn holding_time_test<S, E, F>(
    name: &str,
    mut make: F,
    r_sum: f64,
    trials: u32,
    seed: u64,
    alpha: f64,
) -> StatTestReport
where
    E: Scheduler<S>,
    F: FnMut(u64) -> E,
{
    let samples: Vec<f64> = (0..trials)
        .map(|i| {
            let mut engine = make(seed.wrapping_add(u64::from(i)));
            let ev = engine.step().expect("at least one clock must be enabled");
            ev.time
        })
        .collect();
    ks_one_sample(name, &samples, exp_cdf(r_sum), alpha)
}

/// Two-sample KS comparison of one observable at `t_end` across two engine
/// constructions, usually two scheduling methods over the same model. The
/// sides use disjoint replica seeds; identical laws is the null hypothesis.
#[allow(clippy::too_many_arguments)]
pub fn cross_engine_test<SA, SB, EA, EB, FA, FB, GA, GB>(
    name: &str,
    make_a: FA,
    obs_a: GA,
    make_b: FB,
    obs_b: GB,
    t_end: f64,
    replicas: u32,
    seed: u64,
    alpha: f64,
) -> StatTestReport
where
    EA: Scheduler<SA>,
    FA: FnMut(u64) -> EA,
    GA: Fn(&EA) -> f64,
    EB: Scheduler<SB>,
    FB: FnMut(u64) -> EB,
    GB: Fn(&EB) -> f64,
{
    let a = collect_observable(make_a, obs_a, t_end, replicas, seed);
    let b = collect_observable(
        make_b,
        obs_b,
        t_end,
        replicas,
        seed.wrapping_add(CROSS_SEED_OFFSET),
    );
    ks_two_sample(name, &a, &b, alpha)
}

/// An engine invariant that failed partway through an audited run.
#[derive(Debug, Error)]
#[error("after event {event_index}: {error}")]
pub struct AuditViolation {
    pub event_index: u64,
    pub error: AuditError,
}

/// Drive `engine` for up to `events` events, auditing before the first,
/// after every `check_every`-th, and after the last. Returns the number of
/// events actually fired (the engine may exhaust early).
pub fn structural_audit<S, E>(
    engine: &mut E,
    events: u64,
    check_every: u64,
) -> Result<u64, AuditViolation>
where
    E: Scheduler<S>,
{
    assert!(check_every >= 1);
    fn check<S, E: Scheduler<S>>(engine: &E, event_index: u64) -> Result<(), AuditViolation> {
        engine
            .audit()
            .map_err(|error| AuditViolation { event_index, error })
    }
    check(engine, 0)?;
    let mut fired = 0;
    while fired < events {
        match engine.step() {
            Some(_) => {
                fired += 1;
                if fired % check_every == 0 {
                    check(engine, fired)?;
                }
            }
            None => break,
        }
    }
    check(engine, fired)?;
    Ok(fired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{build_engine, EngineParams, Method};
    use crate::models::{ConstantRates, PureDeath};

    fn dm_over(rates: Vec<f64>) -> impl FnMut(u64) -> Box<dyn Scheduler<()>> {
        move |seed| {
            build_engine(
                Method::Dm,
                ConstantRates::new(rates.clone()),
                seed,
                &EngineParams::default(),
            )
        }
    }

    #[test]
    fn first_event_index_accepts_the_true_law() {
        let rates = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let report =
            first_event_index_test("dm index", dm_over(rates.clone()), &rates, 10_000, 71, 1e-3);
        assert!(report.passed && !report.low_power, "{report}");
    }

    #[test]
    fn single_clock_index_test_is_vacuous() {
        let report = first_event_index_test("one bin", dm_over(vec![2.0]), &[2.0], 50, 7, 1e-3);
        assert!(report.passed && report.low_power);
    }

    #[test]
    fn holding_time_accepts_the_true_law() {
        let report = holding_time_test("dm holding", dm_over(vec![4.0, 6.0, 5.0]), 15.0, 2000, 13, 1e-3);
        assert!(report.passed && !report.low_power, "{report}");
    }

    #[test]
    fn cross_engine_accepts_identical_laws() {
        let events = |e: &Box<dyn Scheduler<()>>| e.counters().events as f64;
        let report = cross_engine_test(
            "dm vs dm",
            dm_over(vec![1.5, 1.5]),
            events,
            dm_over(vec![1.5, 1.5]),
            events,
            20.0,
            1500,
            99,
            1e-3,
        );
        assert!(report.passed && !report.low_power, "{report}");
    }

    #[test]
    fn cross_engine_rejects_a_rate_mismatch() {
        let events = |e: &Box<dyn Scheduler<()>>| e.counters().events as f64;
        let report = cross_engine_test(
            "3.0 vs 3.3",
            dm_over(vec![3.0]),
            events,
            dm_over(vec![3.3]),
            events,
            20.0,
            1500,
            99,
            1e-3,
        );
        assert!(!report.passed, "{report}");
    }

    #[test]
    fn small_ensembles_are_flagged_not_trusted() {
        let events = |e: &Box<dyn Scheduler<()>>| e.counters().events as f64;
        let report = cross_engine_test(
            "tiny",
            dm_over(vec![2.0]),
            events,
            dm_over(vec![2.0]),
            events,
            5.0,
            100,
            3,
            1e-3,
        );
        assert!(report.low_power && report.passed);
    }

    #[test]
    fn audited_run_completes_and_counts() {
        let mut e = build_engine(
            Method::Nrm,
            PureDeath::new(500),
            42,
            &EngineParams::default(),
        );
        let fired = structural_audit(&mut e, 200, 16).expect("no violations");
        assert_eq!(fired, 200);
        // Exhaustion before the budget returns the true count.
        let mut e2 = build_engine(
            Method::Nrm,
            PureDeath::new(50),
            42,
            &EngineParams::default(),
        );
        let fired2 = structural_audit(&mut e2, 1000, 7).expect("no violations");
        assert_eq!(fired2, 50);
        // A zero-event audit still checks the initial configuration.
        let mut e3 = build_engine(
            Method::Nrm,
            PureDeath::new(5),
            42,
            &EngineParams::default(),
        );
        assert_eq!(structural_audit(&mut e3, 0, 1).expect("clean"), 0);
    }
}
