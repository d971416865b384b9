//! Two-species reaction-diffusion process on a K×K grid. Each cell carries
//! integer counts of U and V particles and six clocks: the autocatalytic
//! conversion U→V (driven by U·V²), linear decay of each species, a
//! constant U feed, and one diffusion channel per species. Diffusion picks
//! one of the four lattice directions uniformly; a jump off the grid is
//! absorbed.
//!
//! Update lists are static: a diffusion clock lists the union of its own
//! and all its neighbours' dependent clocks even though a single firing
//! touches only one neighbour. The unchanged entries just refresh to the
//! same rate.

use crate::model::{DependencyGraph, ProcessModel};
use crate::rng::RngStream;

/// System size: mean particle count per unit concentration.
const OMEGA: f64 = 250.0;
/// Feed / drain rate constant.
const K_F: f64 = 0.0055;
/// Rate constant of the second conversion stage in the full scheme. The
/// benchmark drives only the autocatalytic channel, but the constant is
/// part of the parameter set and kept for reference.
pub const K_2: f64 = 0.0205;
const D_U: f64 = 0.001;
const D_V: f64 = 0.002;
const K1_HAT: f64 = 1.0;
const U0_HAT: f64 = 1.0;

/// Clocks per cell, in this channel order.
const CHANNELS: u32 = 6;
const CH_REACT: u32 = 0;
const CH_U_DECAY: u32 = 1;
const CH_V_DECAY: u32 = 2;
const CH_U_BIRTH: u32 = 3;
const CH_U_DIFF: u32 = 4;
const CH_V_DIFF: u32 = 5;

/// Particle counts per cell, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridState {
    pub u: Vec<u64>,
    pub v: Vec<u64>,
}

impl GridState {
    pub fn total_u(&self) -> u64 {
        self.u.iter().sum()
    }

    pub fn total_v(&self) -> u64 {
        self.v.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct GrayScott {
    k: u32,
    graph: DependencyGraph,
}

impl GrayScott {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1);
        let cells = (k * k) as usize;
        let mut lists: Vec<Vec<u32>> = Vec::with_capacity(cells * CHANNELS as usize);
        for cell in 0..cells {
            let base = cell as u32 * CHANNELS;
            // Clocks in this cell whose rate depends on U or on V.
            let u_dep = [base + CH_REACT, base + CH_U_DECAY, base + CH_U_DIFF];
            let v_dep = [base + CH_REACT, base + CH_V_DECAY, base + CH_V_DIFF];
            let neighbours: Vec<u32> = (0..4)
                .filter_map(|d| Self::neighbour_of(k, cell, d))
                .map(|n| n as u32)
                .collect();
            for ch in 0..CHANNELS {
                let mut list: Vec<u32> = match ch {
                    CH_REACT => u_dep.iter().chain(v_dep.iter()).copied().collect(),
                    CH_U_DECAY => u_dep.to_vec(),
                    CH_V_DECAY => v_dep.to_vec(),
                    CH_U_BIRTH => {
                        let mut l = u_dep.to_vec();
                        l.push(base + CH_U_BIRTH);
                        l
                    }
                    CH_U_DIFF => {
                        let mut l = u_dep.to_vec();
                        for &n in &neighbours {
                            let nb = n * CHANNELS;
                            l.extend_from_slice(&[nb + CH_REACT, nb + CH_U_DECAY, nb + CH_U_DIFF]);
                        }
                        l
                    }
                    _ => {
                        let mut l = v_dep.to_vec();
                        for &n in &neighbours {
                            let nb = n * CHANNELS;
                            l.extend_from_slice(&[nb + CH_REACT, nb + CH_V_DECAY, nb + CH_V_DIFF]);
                        }
                        l
                    }
                };
                list.sort_unstable();
                list.dedup();
                lists.push(list);
            }
        }
        let graph = DependencyGraph::from_lists(cells as u32 * CHANNELS, &lists)
            .expect("grid lists are valid");
        GrayScott { k, graph }
    }

    pub fn grid_side(&self) -> u32 {
        self.k
    }

    fn neighbour_of(k: u32, cell: usize, dir: usize) -> Option<usize> {
        let k = k as usize;
        let (r, c) = (cell / k, cell % k);
        match dir {
            0 => (r > 0).then(|| cell - k),
            1 => (r + 1 < k).then(|| cell + k),
            2 => (c > 0).then(|| cell - 1),
            _ => (c + 1 < k).then(|| cell + 1),
        }
    }

    fn neighbour(&self, cell: usize, dir: usize) -> Option<usize> {
        Self::neighbour_of(self.k, cell, dir)
    }
}

impl ProcessModel for GrayScott {
    type State = GridState;

    fn num_clocks(&self) -> u32 {
        self.k * self.k * CHANNELS
    }

    /// Uniform U at the feed level; a small centered square seeded with V.
    fn initial_state(&self, _rng: &mut RngStream) -> GridState {
        let k = self.k as usize;
        let u = vec![(U0_HAT * OMEGA) as u64; k * k];
        let mut v = vec![0u64; k * k];
        let side = (k / 10).max(1);
        let start = (k - side) / 2;
        for r in start..start + side {
            for c in start..start + side {
                v[r * k + c] = (0.1 * OMEGA) as u64;
            }
        }
        GridState { u, v }
    }

    fn rate(&self, state: &GridState, clock: u32) -> f64 {
        let cell = (clock / CHANNELS) as usize;
        let u = state.u[cell] as f64;
        let v = state.v[cell] as f64;
        match clock % CHANNELS {
            CH_REACT => K1_HAT * u * v * v / (OMEGA * OMEGA),
            CH_U_DECAY => u * K_F,
            CH_V_DECAY => v * K_F,
            CH_U_BIRTH => K_F * U0_HAT * OMEGA,
            CH_U_DIFF => u * D_U,
            _ => v * D_V,
        }
    }

    fn apply_event(&self, state: &mut GridState, clock: u32, rng: &mut RngStream) -> &[u32] {
        let cell = (clock / CHANNELS) as usize;
        match clock % CHANNELS {
            CH_REACT => {
                state.u[cell] -= 1;
                state.v[cell] += 1;
            }
            CH_U_DECAY => state.u[cell] -= 1,
            CH_V_DECAY => state.v[cell] -= 1,
            CH_U_BIRTH => state.u[cell] += 1,
            CH_U_DIFF => {
                state.u[cell] -= 1;
                if let Some(n) = self.neighbour(cell, rng.uniform_int(4)) {
                    state.u[n] += 1;
                }
            }
            _ => {
                state.v[cell] -= 1;
                if let Some(n) = self.neighbour(cell, rng.uniform_int(4)) {
                    state.v[n] += 1;
                }
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
    fn reaction_rate_matches_hand_value() {
        let m = GrayScott::new(2);
        let mut s = {
            let mut rng = RngStream::new(0);
            m.initial_state(&mut rng)
        };
        s.u[0] = 100;
        s.v[0] = 50;
        assert_eq!(m.rate(&s, CH_REACT), 4.0); // 100·50² / 250²
        assert_eq!(m.rate(&s, CH_U_DECAY), 100.0 * K_F);
        assert_eq!(m.rate(&s, CH_U_BIRTH), 1.375);
        assert_eq!(m.rate(&s, CH_U_DIFF), 0.1);
        assert_eq!(m.rate(&s, CH_V_DIFF), 0.1);
    }

    #[test]
    fn initial_state_seeds_a_centered_patch() {
        let m = GrayScott::new(30);
        let mut rng = RngStream::new(0);
        let s = m.initial_state(&mut rng);
        assert_eq!(s.total_u(), 30 * 30 * 250);
        // Patch side 3 at rows/cols 13..16, 25 particles each.
        assert_eq!(s.total_v(), 9 * 25);
        assert_eq!(s.v[13 * 30 + 13], 25);
        assert_eq!(s.v[0], 0);
        // Small grids still seed one cell.
        let tiny = GrayScott::new(5);
        let st = tiny.initial_state(&mut rng);
        assert_eq!(st.total_v(), 25);
        assert_eq!(st.v[2 * 5 + 2], 25);
    }

    #[test]
    fn dependency_list_sizes_follow_the_neighbourhood() {
        let m = GrayScott::new(4);
        let g = m.dependency_graph();
        let clock = |cell: u32, ch: u32| cell * CHANNELS + ch;
        // Interior cell (1,1) = cell 5: 3 own + 3 per neighbour, 4 of them.
        assert_eq!(g.affected(clock(5, CH_U_DIFF)).len(), 15);
        // Corner cell 0 has two neighbours.
        assert_eq!(g.affected(clock(0, CH_U_DIFF)).len(), 9);
        // Edge cell (0,1) = cell 1 has three.
        assert_eq!(g.affected(clock(1, CH_V_DIFF)).len(), 12);
        assert_eq!(g.affected(clock(5, CH_REACT)).len(), 5);
        assert_eq!(g.affected(clock(5, CH_U_DECAY)).len(), 3);
        assert_eq!(g.affected(clock(5, CH_U_BIRTH)).len(), 4);
        // The constant feed is nobody's dependency except its own.
        for cell in 0..16 {
            let birth = clock(cell, CH_U_BIRTH);
            for ch in [CH_REACT, CH_U_DECAY, CH_V_DECAY, CH_U_DIFF, CH_V_DIFF] {
                assert!(!g.affected(clock(cell, ch)).contains(&birth));
            }
        }
    }

    #[test]
    fn conversion_swaps_one_u_for_one_v() {
        let m = GrayScott::new(3);
        let mut rng = RngStream::new(1);
        let mut s = m.initial_state(&mut rng);
        s.v[4] = 10;
        m.apply_event(&mut s, 4 * CHANNELS + CH_REACT, &mut rng);
        assert_eq!(s.u[4], 249);
        assert_eq!(s.v[4], 11);
    }

    #[test]
    fn diffusion_moves_or_absorbs() {
        // On a 1×1 grid every jump leaves the grid and is absorbed.
        let m = GrayScott::new(1);
        let mut rng = RngStream::new(2);
        let mut s = m.initial_state(&mut rng);
        let u0 = s.u[0];
        for _ in 0..10 {
            m.apply_event(&mut s, CH_U_DIFF, &mut rng);
        }
        assert_eq!(s.u[0], u0 - 10);
        // On a wider grid total mass is conserved while jumps stay inside.
        let m2 = GrayScott::new(8);
        let mut s2 = m2.initial_state(&mut rng);
        let total = s2.total_u();
        let interior_cell = 3 * 8 + 3;
        for _ in 0..50 {
            m2.apply_event(&mut s2, interior_cell as u32 * CHANNELS + CH_U_DIFF, &mut rng);
        }
        assert!(s2.total_u() <= total);
        assert!(s2.total_u() >= total - 50);
    }

    #[test]
    fn feed_adds_u_unconditionally() {
        let m = GrayScott::new(2);
        let mut rng = RngStream::new(3);
        let mut s = m.initial_state(&mut rng);
        m.apply_event(&mut s, CH_U_BIRTH, &mut rng);
        assert_eq!(s.u[0], 251);
    }
}
