//! Benchmark process models.
//!
//! Two trivial models ([`ConstantRates`], [`PureDeath`]) anchor exactness
//! tests, and four structurally different workloads exercise the
//! schedulers: a heat-conduction chain with nearest-neighbour coupling
//! ([`Kmp`]), a randomly wired reaction network with heavyweight update
//! lists ([`RandomCrn`]), a two-species reaction-diffusion grid
//! ([`GrayScott`]), and a stiff well-mixed oscillator ([`Oregonator`]).

mod constant;
mod crn;
mod gray_scott;
mod kmp;
mod oregonator;

pub use constant::{ConstantRates, PureDeath};
pub use crn::RandomCrn;
pub use gray_scott::{GrayScott, GridState, K_2};
pub use kmp::Kmp;
pub use oregonator::Oregonator;
