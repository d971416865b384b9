//! Run descriptions: which model at which size, driven by which scheduler,
//! for how long, with which tuning parameters. Every subcommand funnels its
//! flags into a [`RunConfig`] so defaults and validation live in one place.

use ssakit::{CrmParams, EngineParams, HlmParams, Method};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The four benchmark systems the driver knows how to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Heat-conduction oscillator chain; size is the number of sites.
    Kmp,
    /// Randomly wired reaction network; size is the number of reactions.
    Crn,
    /// Reaction-diffusion lattice; size is the grid side K (6K² clocks).
    GrayScott,
    /// Three-species limit-cycle oscillator; fixed five clocks.
    Oregonator,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Kmp => "kmp",
            ModelKind::Crn => "crn",
            ModelKind::GrayScott => "gray-scott",
            ModelKind::Oregonator => "oregonator",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown model '{0}' (expected kmp, crn, gray-scott, or oregonator)")]
pub struct ParseModelError(String);

impl FromStr for ModelKind {
    type Err = ParseModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "kmp" => Ok(ModelKind::Kmp),
            "crn" => Ok(ModelKind::Crn),
            "gray-scott" | "grayscott" | "gs" => Ok(ModelKind::GrayScott),
            "oregonator" => Ok(ModelKind::Oregonator),
            _ => Err(ParseModelError(s.into())),
        }
    }
}

/// A fully resolved benchmark cell. `size` is in the model's own unit (see
/// [`ModelKind`]); the Oregonator ignores it.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelKind,
    pub size: u32,
    pub method: Method,
    pub t_end: f64,
    /// Bucket window override; `None` picks the model default.
    pub tau: Option<f64>,
    /// Bucket count override; `None` picks the model default.
    pub q: Option<u32>,
    /// Rate-group capacity hint for the composition-rejection engine.
    pub groups: Option<u32>,
    pub seed: u64,
    pub replicas: u32,
    pub counters: bool,
    pub max_events: u64,
    pub oregonator_init: [u64; 3],
}

impl RunConfig {
    pub fn new(model: ModelKind, size: u32) -> Self {
        RunConfig {
            model,
            size,
            method: Method::Hlm,
            t_end: 10.0,
            tau: None,
            q: None,
            groups: None,
            seed: 1,
            replicas: 1,
            counters: false,
            max_events: u64::MAX,
            oregonator_init: [500, 1000, 2000],
        }
    }

    pub fn num_clocks(&self) -> u32 {
        match self.model {
            ModelKind::Kmp => self.size + 1,
            ModelKind::Crn => self.size,
            ModelKind::GrayScott => 6 * self.size * self.size,
            ModelKind::Oregonator => 5,
        }
    }

    /// Window length at which per-event work stays flat for this model.
    pub fn default_tau(&self) -> f64 {
        match self.model {
            ModelKind::Kmp => 0.2,
            ModelKind::Crn => 0.1,
            ModelKind::GrayScott => 0.5,
            ModelKind::Oregonator => 0.01,
        }
    }

    /// Bucket count paired with [`default_tau`](Self::default_tau), scaled
    /// so the expected events per bucket stay constant as the model grows.
    pub fn default_q(&self) -> u32 {
        let q = match self.model {
            ModelKind::Kmp => self.size / 10,
            ModelKind::Crn => self.size / 20,
            ModelKind::GrayScott => self.num_clocks() / 2,
            ModelKind::Oregonator => 5,
        };
        q.max(1)
    }

    pub fn hlm_params(&self) -> HlmParams {
        let tau = self.tau.unwrap_or_else(|| self.default_tau());
        let q = self.q.unwrap_or_else(|| self.default_q()).max(1);
        HlmParams::new(tau, q)
    }

    pub fn engine_params(&self) -> EngineParams {
        EngineParams {
            hlm: Some(self.hlm_params()),
            crm: self
                .groups
                .map(|g| CrmParams { initial_groups: g })
                .unwrap_or_default(),
        }
    }

    /// Reject values the engines would panic on. A zero horizon is legal
    /// and produces an empty run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.model != ModelKind::Oregonator && self.size == 0 {
            return Err(ConfigError::ZeroSize);
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(ConfigError::BadHorizon(self.t_end));
        }
        if let Some(tau) = self.tau {
            if !(tau > 0.0) || !tau.is_finite() {
                return Err(ConfigError::BadTau(tau));
            }
        }
        if self.replicas == 0 {
            return Err(ConfigError::ZeroReplicas);
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("model size must be at least 1")]
    ZeroSize,
    #[error("t-end must be finite and non-negative, got {0}")]
    BadHorizon(f64),
    #[error("tau must be finite and positive, got {0}")]
    BadTau(f64),
    #[error("replicas must be at least 1")]
    ZeroReplicas,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_round_trip() {
        let all = [
            ModelKind::Kmp,
            ModelKind::Crn,
            ModelKind::GrayScott,
            ModelKind::Oregonator,
        ];
        for kind in all {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("heat".parse::<ModelKind>().is_err());
    }

    #[test]
    fn default_buckets_scale_with_size() {
        assert_eq!(RunConfig::new(ModelKind::Kmp, 1000).default_q(), 100);
        assert_eq!(RunConfig::new(ModelKind::Crn, 10_000).default_q(), 500);
        assert_eq!(RunConfig::new(ModelKind::GrayScott, 30).default_q(), 2700);
        assert_eq!(RunConfig::new(ModelKind::Oregonator, 0).default_q(), 5);
    }

    #[test]
    fn tiny_sizes_clamp_to_one_bucket() {
        let cfg = RunConfig::new(ModelKind::Kmp, 5);
        assert_eq!(cfg.default_q(), 1);
        assert_eq!(cfg.hlm_params().q, 1);
    }

    #[test]
    fn explicit_zero_bucket_count_clamps() {
        let mut cfg = RunConfig::new(ModelKind::Kmp, 100);
        cfg.q = Some(0);
        assert_eq!(cfg.hlm_params().q, 1);
    }

    #[test]
    fn clock_counts_per_model() {
        assert_eq!(RunConfig::new(ModelKind::Kmp, 100).num_clocks(), 101);
        assert_eq!(RunConfig::new(ModelKind::Crn, 100).num_clocks(), 100);
        assert_eq!(RunConfig::new(ModelKind::GrayScott, 5).num_clocks(), 150);
        assert_eq!(RunConfig::new(ModelKind::Oregonator, 7).num_clocks(), 5);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut cfg = RunConfig::new(ModelKind::Kmp, 100);
        assert_eq!(cfg.validate(), Ok(()));
        cfg.t_end = 0.0;
        assert_eq!(cfg.validate(), Ok(()));
        cfg.t_end = -1.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::BadHorizon(_))));
        cfg.t_end = 1.0;
        cfg.tau = Some(0.0);
        assert!(matches!(cfg.validate(), Err(ConfigError::BadTau(_))));
        cfg.tau = None;
        cfg.replicas = 0;
        assert_eq!(cfg.validate(), Err(ConfigError::ZeroReplicas));
        cfg.replicas = 1;
        cfg.size = 0;
        assert_eq!(cfg.validate(), Err(ConfigError::ZeroSize));
    }
}
