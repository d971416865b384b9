//! Three-species oscillating reaction network with five channels. Counts
//! stay small (10²..10⁴) while the rates span several orders of magnitude
//! over one oscillation period, which exercises schedulers under rapidly
//! shifting propensities.

use crate::model::{DependencyGraph, ProcessModel};
use crate::rng::RngStream;

const C1: f64 = 2.0;
const C2: f64 = 0.1;
const C3: f64 = 104.0;
const C4: f64 = 0.016;
const C5: f64 = 26.0;

/// Reactions, with state written (y1, y2, y3):
///
/// 0: y2 → y1            rate c1·y2
/// 1: y1 + y2 → ∅        rate c2·y1·y2
/// 2: y1 → 2·y1 + y3     rate c3·y1      (applied as y1+1, y3+1)
/// 3: 2·y1 → ∅           rate c4·y1·(y1−1)/2
/// 4: y3 → y2            rate c5·y3
#[derive(Clone, Debug)]
pub struct Oregonator {
    init: [u64; 3],
    graph: DependencyGraph,
}

impl Default for Oregonator {
    fn default() -> Self {
        Self::new()
    }
}

impl Oregonator {
    /// Default initial population, a typical oscillatory regime.
    pub fn new() -> Self {
        Self::with_initial([500, 1000, 2000])
    }

    pub fn with_initial(init: [u64; 3]) -> Self {
        // lists[r] = clocks whose rate reads a species that reaction r writes.
        let lists: Vec<Vec<u32>> = vec![
            vec![0, 1, 2, 3],
            vec![0, 1, 2, 3],
            vec![1, 2, 3, 4],
            vec![1, 2, 3],
            vec![0, 1, 4],
        ];
        let graph = DependencyGraph::from_lists(5, &lists).expect("static lists are valid");
        Oregonator { init, graph }
    }
}

impl ProcessModel for Oregonator {
    type State = [u64; 3];

    fn num_clocks(&self) -> u32 {
        5
    }

    fn initial_state(&self, _rng: &mut RngStream) -> [u64; 3] {
        self.init
    }

    fn rate(&self, state: &[u64; 3], clock: u32) -> f64 {
        let [y1, y2, y3] = *state;
        match clock {
            0 => C1 * y2 as f64,
            1 => C2 * y1 as f64 * y2 as f64,
            2 => C3 * y1 as f64,
            3 => {
                if y1 >= 2 {
                    C4 * 0.5 * y1 as f64 * (y1 - 1) as f64
                } else {
                    0.0
                }
            }
            _ => C5 * y3 as f64,
        }
    }

    fn apply_event(&self, state: &mut [u64; 3], clock: u32, _rng: &mut RngStream) -> &[u32] {
        match clock {
            0 => {
                state[0] += 1;
                state[1] -= 1;
            }
            1 => {
                state[0] -= 1;
                state[1] -= 1;
            }
            2 => {
                state[0] += 1;
                state[2] += 1;
            }
            3 => state[0] -= 2,
            _ => {
                state[1] += 1;
                state[2] -= 1;
            }
        }
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
    fn rates_match_hand_values() {
        let m = Oregonator::new();
        let rates = |s: [u64; 3]| -> Vec<f64> { (0..5).map(|c| m.rate(&s, c)).collect() };
        assert_eq!(rates([0, 10, 0]), vec![20.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(rates([1, 1, 1]), vec![2.0, 0.1, 104.0, 0.0, 26.0]);
        // Pair count 2·1/2 = 1.
        assert_eq!(m.rate(&[2, 0, 0], 3), 0.016);
        assert_eq!(m.rate(&[100, 0, 0], 3), 0.016 * 0.5 * 100.0 * 99.0);
    }

    #[test]
    fn zero_rate_blocks_every_underflowing_reaction() {
        let m = Oregonator::new();
        // Reaction 1 removes one of each of y1, y2; reaction 3 removes two y1.
        assert_eq!(m.rate(&[0, 5, 0], 1), 0.0);
        assert_eq!(m.rate(&[5, 0, 0], 1), 0.0);
        assert_eq!(m.rate(&[1, 0, 0], 3), 0.0);
        assert_eq!(m.rate(&[0, 0, 0], 4), 0.0);
    }

    #[test]
    fn initial_population_is_configurable() {
        let mut rng = RngStream::new(0);
        assert_eq!(Oregonator::new().initial_state(&mut rng), [500, 1000, 2000]);
        let m = Oregonator::with_initial([5, 6, 7]);
        assert_eq!(m.initial_state(&mut rng), [5, 6, 7]);
    }

    #[test]
    fn stoichiometry_is_applied_exactly() {
        let m = Oregonator::new();
        let mut rng = RngStream::new(0);
        let mut s = [10, 10, 10];
        m.apply_event(&mut s, 0, &mut rng);
        assert_eq!(s, [11, 9, 10]);
        m.apply_event(&mut s, 1, &mut rng);
        assert_eq!(s, [10, 8, 10]);
        m.apply_event(&mut s, 2, &mut rng);
        assert_eq!(s, [11, 8, 11]);
        m.apply_event(&mut s, 3, &mut rng);
        assert_eq!(s, [9, 8, 11]);
        m.apply_event(&mut s, 4, &mut rng);
        assert_eq!(s, [9, 9, 10]);
    }

    #[test]
    fn update_lists_cover_every_read_species() {
        let m = Oregonator::new();
        let g = m.dependency_graph();
        assert_eq!(g.affected(0), &[0, 1, 2, 3]);
        assert_eq!(g.affected(1), &[0, 1, 2, 3]);
        assert_eq!(g.affected(2), &[1, 2, 3, 4]);
        assert_eq!(g.affected(3), &[1, 2, 3]);
        assert_eq!(g.affected(4), &[0, 1, 4]);
    }
}
