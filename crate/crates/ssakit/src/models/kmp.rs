//! Heat-conduction chain: M sites carry continuous energies, and each of
//! the M+1 bonds (including one to a thermal bath at each end) fires at a
//! rate equal to the square root of the energy of the pair it touches.
//! An interior firing repartitions the pair's pooled energy uniformly; a
//! boundary firing pools with a fresh bath draw instead, so energy flows
//! from the hot end to the cold end.
//!
//! Interior events conserve the pooled energy exactly in floating point:
//! the larger share is rounded once and the smaller share is the exact
//! remainder (Sterbenz subtraction), so their sum reproduces the pool
//! bit for bit.

use crate::model::{DependencyGraph, ProcessModel};
use crate::rng::RngStream;

const T_LEFT: f64 = 1.0;
const T_RIGHT: f64 = 2.0;

/// Split `s ≥ 0` into shares `(p·s, (1−p)·s)` whose float sum is exactly
/// `s`. The larger share is computed by one multiplication; since it lies
/// in [s/2, s], the remainder `s − big` is exact.
pub fn split_conserving(s: f64, p: f64) -> (f64, f64) {
    debug_assert!(s >= 0.0 && (0.0..1.0).contains(&p));
    let q = p.max(1.0 - p);
    let big = q * s;
    let small = s - big;
    if p >= 0.5 {
        (big, small)
    } else {
        (small, big)
    }
}

/// Energy-exchange chain over `m` sites with baths at temperatures 1 and 2.
///
/// There are `m + 1` clocks: clock 0 couples the left bath to the first
/// site, clock `m` couples the last site to the right bath, and clock `i`
/// in between couples entries `i − 1` and `i` of the state vector.
#[derive(Clone, Debug)]
pub struct Kmp {
    m: u32,
    graph: DependencyGraph,
}

impl Kmp {
    pub fn new(m: u32) -> Self {
        assert!(m >= 1);
        let clocks = m + 1;
        let lists: Vec<Vec<u32>> = (0..clocks)
            .map(|i| {
                let mut l = Vec::with_capacity(3);
                if i > 0 {
                    l.push(i - 1);
                }
                l.push(i);
                if i < clocks - 1 {
                    l.push(i + 1);
                }
                l
            })
            .collect();
        let graph = DependencyGraph::from_lists(clocks, &lists).expect("chain lists are valid");
        Kmp { m, graph }
    }

    pub fn sites(&self) -> u32 {
        self.m
    }

    #[inline]
    fn left_energy(&self, state: &[f64], clock: u32) -> f64 {
        if clock == 0 {
            T_LEFT
        } else {
            state[clock as usize - 1]
        }
    }

    #[inline]
    fn right_energy(&self, state: &[f64], clock: u32) -> f64 {
        if clock == self.m {
            T_RIGHT
        } else {
            state[clock as usize]
        }
    }
}

impl ProcessModel for Kmp {
    type State = Vec<f64>;

    fn num_clocks(&self) -> u32 {
        self.m + 1
    }

    /// Linear interpolation between the bath temperatures, the profile the
    /// chain relaxes to in the mean.
    fn initial_state(&self, _rng: &mut RngStream) -> Vec<f64> {
        let span = (self.m + 1) as f64;
        (1..=self.m)
            .map(|i| T_LEFT + (T_RIGHT - T_LEFT) * i as f64 / span)
            .collect()
    }

    fn rate(&self, state: &Vec<f64>, clock: u32) -> f64 {
        (self.left_energy(state, clock) + self.right_energy(state, clock)).sqrt()
    }

    fn apply_event(&self, state: &mut Vec<f64>, clock: u32, rng: &mut RngStream) -> &[u32] {
        if clock == 0 {
            let e = rng.exponential(1.0 / T_LEFT);
            let p = rng.uniform();
            state[0] = p * (state[0] + e);
        } else if clock == self.m {
            let e = rng.exponential(1.0 / T_RIGHT);
            let p = rng.uniform();
            let last = self.m as usize - 1;
            state[last] = p * (state[last] + e);
        } else {
            let (l, r) = (clock as usize - 1, clock as usize);
            let pool = state[l] + state[r];
            let p = rng.uniform();
            let (a, b) = split_conserving(pool, p);
            state[l] = a;
            state[r] = b;
        }
        self.graph.affected(clock)
    }

    fn dependency_graph(&self) -> &DependencyGraph {
        &self.graph
    }
}
