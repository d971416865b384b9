//! Process model abstraction shared by every scheduler.
//!
//! A model is a set of M exponential clocks over some state. Each clock has
//! a state-dependent rate; when clock c fires, the state changes and the
//! rates of a c-specific subset of clocks (always including c itself) may
//! change with it. Schedulers only ever see rates, firing callbacks, and
//! the static dependency structure, so the same model runs under any of
//! them unchanged.

use thiserror::Error;

use crate::rng::RngStream;

/// One firing: which clock, at what absolute time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub clock: u32,
}

/// Carry a pending firing time across a rate change without a fresh draw.
///
/// A clock holding absolute firing time `t_old` under rate `r_old` since
/// `t_fire` is, by memorylessness, redistributed exactly by shrinking the
/// remaining wait in proportion to the rates:
///
/// ```text
/// t_new = (t_old − t_fire) · r_old / r_new + t_fire
/// ```
///
/// `r_new == 0` disables the clock (returns +∞). Equal rates return `t_old`
/// bitwise unchanged so a no-op update cannot drift the schedule. The caller
/// handles `r_old == 0` (there is no pending time to carry) by drawing fresh.
#[inline]
pub fn rescale_time(t_old: f64, t_fire: f64, r_old: f64, r_new: f64) -> f64 {
    debug_assert!(r_old > 0.0, "no pending wait to rescale from rate zero");
    debug_assert!(r_new >= 0.0);
    debug_assert!(t_old >= t_fire);
    if r_new == 0.0 {
        return f64::INFINITY;
    }
    if r_old == r_new {
        return t_old;
    }
    (t_old - t_fire) * (r_old / r_new) + t_fire
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("clock {clock}: dependency list omits the clock itself")]
    MissingSelf { clock: u32 },
    #[error("clock {clock}: dependency {dep} out of range (M = {m})")]
    OutOfRange { clock: u32, dep: u32, m: u32 },
    #[error("clock {clock}: duplicate dependency {dep}")]
    Duplicate { clock: u32, dep: u32 },
}

/// Static clock-to-affected-clocks map, stored as one flat CSR-style array.
///
/// `affected(c)` is the sorted set of clocks whose rates may change when c
/// fires; it always contains c. Lists are fixed at construction: a model
/// whose influence pattern varies must declare the union.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    offsets: Vec<u32>,
    targets: Vec<u32>,
    /// Mean row length, kept so `hint_affected` can guess where a row
    /// starts without loading `offsets` first.
    degree: f64,
}

/// Start pulling one cache line toward the core without blocking or
/// faulting; a pure scheduling hint with no observable effect.
#[inline(always)]
pub(crate) fn prefetch_read<T>(p: *const T) {
    #[cfg(target_arch = "x86_64")]
    // Prefetch never faults, even on a wild address.
    unsafe {
        std::arch::x86_64::_mm_prefetch(p.cast::<i8>(), std::arch::x86_64::_MM_HINT_T0)
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = p;
}

impl DependencyGraph {
    /// Build from per-clock lists. Lists are sorted here; each must contain
    /// the owning clock, stay in range, and hold no duplicates.
    pub fn from_lists(m: u32, lists: &[Vec<u32>]) -> Result<Self, GraphError> {
        assert_eq!(lists.len(), m as usize, "one dependency list per clock");
        let mut offsets = Vec::with_capacity(m as usize + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (c, list) in lists.iter().enumerate() {
            let c = c as u32;
            let mut sorted = list.clone();
            sorted.sort_unstable();
            for pair in sorted.windows(2) {
                if pair[0] == pair[1] {
                    return Err(GraphError::Duplicate { clock: c, dep: pair[0] });
                }
            }
            for &dep in &sorted {
                if dep >= m {
                    return Err(GraphError::OutOfRange { clock: c, dep, m });
                }
            }
            if sorted.binary_search(&c).is_err() {
                return Err(GraphError::MissingSelf { clock: c });
            }
            targets.extend_from_slice(&sorted);
            offsets.push(targets.len() as u32);
        }
        let degree = targets.len() as f64 / m as f64;
        Ok(DependencyGraph { offsets, targets, degree })
    }

    pub fn num_clocks(&self) -> u32 {
        self.offsets.len() as u32 - 1
    }

    #[inline]
    pub fn affected(&self, clock: u32) -> &[u32] {
        let lo = self.offsets[clock as usize] as usize;
        let hi = self.offsets[clock as usize + 1] as usize;
        &self.targets[lo..hi]
    }

    /// Begin fetching the lookup path behind `affected(clock)` so a call a
    /// few dozen nanoseconds later finds it cached. Only a hint; does not
    /// read or change anything observable.
    ///
    /// The row itself starts at `offsets[clock]`, which is not loaded yet,
    /// but rows are laid out consecutively, so `degree · clock` lands on or
    /// next to the right cache line whenever row lengths are near-uniform.
    /// A wrong guess merely wastes the hint.
    #[inline]
    pub fn hint_affected(&self, clock: u32) {
        prefetch_read(self.offsets.as_ptr().wrapping_add(clock as usize));
        let guess = (self.degree * f64::from(clock)) as usize;
        prefetch_read(self.targets.as_ptr().wrapping_add(guess.min(self.targets.len())));
    }

    /// Mean dependency list length, a rough cost indicator for schedulers
    /// that touch every affected clock per event.
    pub fn mean_degree(&self) -> f64 {
        self.degree
    }
}

/// A Markov jump process presented as M state-dependent exponential clocks.
pub trait ProcessModel {
    type State;

    /// Number of clocks M. Fixed for the lifetime of the model.
    fn num_clocks(&self) -> u32;

    /// Fresh initial state. Models with random structure or random initial
    /// data draw it here; deterministic models ignore the stream.
    fn initial_state(&self, rng: &mut RngStream) -> Self::State;

    /// Current rate of `clock` in `state`. Zero disables the clock. Must be
    /// a pure function of the state: schedulers cache rates and audit them
    /// against recomputation.
    fn rate(&self, state: &Self::State, clock: u32) -> f64;

    /// Apply the firing of `clock`, mutating the state, and return the
    /// clocks whose rates may have changed (always including `clock`).
    /// The returned slice must match `dependency_graph().affected(clock)`.
    fn apply_event(
        &self,
        state: &mut Self::State,
        clock: u32,
        rng: &mut RngStream,
    ) -> &[u32];

    /// Static dependency structure used by schedulers that update
    /// incrementally.
    fn dependency_graph(&self) -> &DependencyGraph;
}
