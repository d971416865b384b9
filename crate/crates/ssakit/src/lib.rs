//! Event-driven exact simulation of Markov jump processes.
//!
//! A system is described by M exponential clocks with state-dependent rates
//! (a [`model::ProcessModel`]). Firing clock `l` at time `t` applies a
//! transformation to the state and changes the rates of a static, usually
//! sparse, set of dependent clocks. The crate provides five interchangeable
//! schedulers that all sample the same process law:
//!
//! * `dm`  - direct method: aggregate exponential step plus linear scan,
//! * `frm` - first reaction method: fresh candidate deadline per clock,
//! * `nrm` - next reaction method: indexed binary min-heap of deadlines,
//! * `crm` - composition-rejection over power-of-two rate groups,
//! * `hlm` - hashing-leaping: bucketed deadlines over a sliding τ window
//!   with per-bucket linear draining, constant work per event under bounded
//!   rate heterogeneity and sparse dependencies.
//!
//! [`models`] ships four benchmark systems (heat-conduction oscillator
//! chain, synthetic reaction network, Gray-Scott reaction-diffusion grid,
//! Oregonator), and [`oracle`] holds the statistical and structural
//! validation suite used by the acceptance tests and the CLI `validate`
//! subcommand.

pub mod counters;
pub mod engines;
pub mod model;
pub mod models;
pub mod oracle;
pub mod rng;

pub use counters::OpCounters;
pub use engines::{
    build_engine, AuditError, CrmParams, EngineParams, HlmParams, Method, Scheduler, StepOutcome,
};
pub use model::{rescale_time, DependencyGraph, Event, ProcessModel};
pub use rng::RngStream;
