//! Minimal models used to pin down scheduler semantics: one with rates
//! that never change, one that deterministically runs out of events.

use crate::model::{DependencyGraph, ProcessModel};
use crate::rng::RngStream;

/// Independent clocks with fixed rates; firing changes nothing. The law of
/// the event stream is known in closed form (exponential holding times at
/// the total rate, selection proportional to each rate), which makes this
/// the reference model for exactness tests.
#[derive(Clone, Debug)]
pub struct ConstantRates {
    rates: Vec<f64>,
    graph: DependencyGraph,
}

impl ConstantRates {
    pub fn new(rates: Vec<f64>) -> Self {
        assert!(!rates.is_empty());
        let m = rates.len() as u32;
        let lists: Vec<Vec<u32>> = (0..m).map(|c| vec![c]).collect();
        let graph = DependencyGraph::from_lists(m, &lists).expect("self lists are valid");
        ConstantRates { rates, graph }
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

impl ProcessModel for ConstantRates {
    type State = ();

    fn num_clocks(&self) -> u32 {
        self.rates.len() as u32
    }

    fn initial_state(&self, _rng: &mut RngStream) -> Self::State {}

    fn rate(&self, _state: &Self::State, clock: u32) -> f64 {
        self.rates[clock as usize]
    }

    fn apply_event(&self, _state: &mut Self::State, clock: u32, _rng: &mut RngStream) -> &[u32] {
        self.graph.affected(clock)
    }

    fn dependency_graph(&self) -> &DependencyGraph {
        &self.graph
    }
}

/// A single counter that ticks down at rate equal to its value. After
/// `initial` events the clock disables itself; useful for exercising
/// exhaustion, rate-to-zero paths, and group migration.
#[derive(Clone, Debug)]
pub struct PureDeath {
    initial: u64,
    graph: DependencyGraph,
}

impl PureDeath {
    pub fn new(initial: u64) -> Self {
        PureDeath {
            initial,
            graph: DependencyGraph::from_lists(1, &[vec![0]]).expect("self list is valid"),
        }
    }
}

impl ProcessModel for PureDeath {
    type State = u64;

    fn num_clocks(&self) -> u32 {
        1
    }

    fn initial_state(&self, _rng: &mut RngStream) -> u64 {
        self.initial
    }

    fn rate(&self, state: &u64, _clock: u32) -> f64 {
        *state as f64
    }

    fn apply_event(&self, state: &mut u64, clock: u32, _rng: &mut RngStream) -> &[u32] {
        *state -= 1;
        self.graph.affected(clock)
    }

    fn dependency_graph(&self) -> &DependencyGraph {
        &self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rates_reports_its_parameters() {
        let m = ConstantRates::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(m.num_clocks(), 5);
        assert_eq!(m.total_rate(), 15.0);
        let mut rng = RngStream::new(0);
        let s = m.initial_state(&mut rng);
        assert_eq!(m.rate(&s, 2), 3.0);
        assert_eq!(m.dependency_graph().affected(3), &[3]);
    }

    #[test]
    fn pure_death_counts_down_to_disabled() {
        let m = PureDeath::new(3);
        let mut rng = RngStream::new(0);
        let mut s = m.initial_state(&mut rng);
        assert_eq!(m.rate(&s, 0), 3.0);
        m.apply_event(&mut s, 0, &mut rng);
        m.apply_event(&mut s, 0, &mut rng);
        assert_eq!(m.rate(&s, 0), 1.0);
        m.apply_event(&mut s, 0, &mut rng);
        assert_eq!(m.rate(&s, 0), 0.0);
    }
}
