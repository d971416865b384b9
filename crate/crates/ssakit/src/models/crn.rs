//! Randomly wired reaction network. The state is the propensity vector
//! itself: firing clock c overwrites the propensities of everything on its
//! wiring list (itself included) with fresh uniform draws on (0, 2). The
//! model has no spatial or conservation structure at all; what it stresses
//! is heavy update lists, since every event rewrites up to 31 rates.

use crate::model::{DependencyGraph, ProcessModel};
use crate::rng::RngStream;

/// Largest number of other clocks on one wiring list.
const MAX_NEIGHBOURS: usize = 30;

#[derive(Clone, Debug)]
pub struct RandomCrn {
    m: u32,
    graph: DependencyGraph,
    init_seed: u64,
}

impl RandomCrn {
    /// Draw the wiring from `seed`. Each clock gets between 1 and 30 other
    /// clocks (capped by availability), chosen uniformly without
    /// replacement, plus itself.
    pub fn new(m: u32, seed: u64) -> Self {
        assert!(m >= 1);
        let mut rng = RngStream::new(seed);
        let lists: Vec<Vec<u32>> = (0..m)
            .map(|c| {
                let want = (1 + rng.uniform_int(MAX_NEIGHBOURS)).min(m as usize - 1);
                let mut list = vec![c];
                while list.len() < want + 1 {
                    let pick = rng.uniform_int(m as usize) as u32;
                    if !list.contains(&pick) {
                        list.push(pick);
                    }
                }
                list
            })
            .collect();
        let graph = DependencyGraph::from_lists(m, &lists).expect("drawn lists are valid");
        // Initial propensities come from a stream derived from the wiring
        // seed, not from the engine's stream, so every scheduler sees the
        // same network with the same starting rates.
        RandomCrn { m, graph, init_seed: seed.wrapping_add(0x9E37_79B9_7F4A_7C15) }
    }
}

impl ProcessModel for RandomCrn {
    type State = Vec<f64>;

    fn num_clocks(&self) -> u32 {
        self.m
    }

    fn initial_state(&self, _rng: &mut RngStream) -> Vec<f64> {
        let mut init_rng = RngStream::new(self.init_seed);
        (0..self.m).map(|_| 2.0 * init_rng.uniform()).collect()
    }

    fn rate(&self, state: &Vec<f64>, clock: u32) -> f64 {
        state[clock as usize]
    }

    fn apply_event(&self, state: &mut Vec<f64>, clock: u32, rng: &mut RngStream) -> &[u32] {
        let affected = self.graph.affected(clock);
        for &a in affected {
            state[a as usize] = 2.0 * rng.uniform();
        }
        affected
    }

    fn dependency_graph(&self) -> &DependencyGraph {
        &self.graph
    }
}
