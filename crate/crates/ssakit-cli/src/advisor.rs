//! Cost-model calibration and parameter suggestion for the bucketed
//! scheduler. Five machine constants are measured with micro-benchmarks on
//! the bucket table itself, the event density is measured on the target
//! model, and the suggested bucket count balances scan work against empty
//! bucket skipping. Suggestions are operating points, not guarantees; the
//! sweep subcommand exists to check them.

use crate::bench::run_replica;
use crate::config::RunConfig;
use ssakit::engines::bucket::BucketTable;
use std::hint::black_box;
use std::time::Instant;
use thiserror::Error;

/// Events driven through the target model to estimate its event density.
const ALPHA_EVENTS: u64 = 100_000;

/// Measured per-operation costs in seconds, plus the event density of the
/// model being tuned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModelConstants {
    /// Per record inspected while scanning a bucket chain.
    pub c_s: f64,
    /// Per deadline update that keeps its bucket.
    pub c_u_stay: f64,
    /// Extra cost when an update relinks into another bucket.
    pub c_u_relink: f64,
    /// Per empty bucket the cursor skips.
    pub c_i: f64,
    /// Per record swept when the window advances.
    pub c_r: f64,
    /// Events per clock per unit model time.
    pub alpha: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("measured {name} = {value:e}; calibration needs a positive value")]
    NonPositive { name: &'static str, value: f64 },
}

impl CostModelConstants {
    /// Reject constants a timing glitch drove to zero or below; every term
    /// of the cost model assumes positive prices.
    pub fn validated(self) -> Result<Self, CalibrationError> {
        let fields = [
            ("c_s", self.c_s),
            ("c_u_stay", self.c_u_stay),
            ("c_u_relink", self.c_u_relink),
            ("c_i", self.c_i),
            ("c_r", self.c_r),
            ("alpha", self.alpha),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CalibrationError::NonPositive { name, value });
            }
        }
        Ok(self)
    }

    /// Bucket count balancing expected chain length against empty-bucket
    /// skips for a window holding `alpha * clocks * tau` events.
    pub fn suggested_q(&self, clocks: u32, tau: f64) -> u32 {
        let per_window = self.alpha * f64::from(clocks) * tau;
        let q = per_window * (self.c_s / (2.0 * self.c_i)).sqrt();
        (q.round().min(f64::from(u32::MAX)) as u32).max(1)
    }

    /// Expected seconds per event at the suggested bucket count: balanced
    /// scan and skip work, the unconditional inspection of the fired
    /// record, the reschedule update (relinking with the probability that
    /// the new deadline leaves the window position), and the amortized
    /// window sweep.
    pub fn predicted_cost(&self, tau: f64) -> f64 {
        let relink_fraction = 1.0 - (-self.alpha * tau).exp();
        (2.0 * self.c_s * self.c_i).sqrt()
            + self.c_s
            + self.c_u_stay
            + self.c_u_relink * relink_fraction
            + self.c_r / (self.alpha * tau)
    }
}

/// Median of five timings; the middle sample shrugs off a scheduling spike
/// on either side.
fn median5(mut sample: impl FnMut() -> f64) -> f64 {
    let mut xs = [sample(), sample(), sample(), sample(), sample()];
    xs.sort_by(f64::total_cmp);
    xs[2]
}

/// Seconds per record inspected: one long chain, scanned repeatedly.
fn measure_scan_cost() -> f64 {
    let n = 4096usize;
    let times: Vec<f64> = (0..n)
        .map(|i| 0.5 * (i as f64 + 1.0) / (n as f64 + 1.0))
        .collect();
    let table = BucketTable::new(&times, 0.0, 1.0, 1);
    median5(|| {
        let reps = 64u64;
        let started = Instant::now();
        let mut sink = 0u64;
        for _ in 0..reps {
            let (min, inspected) = table.scan_min(black_box(0));
            sink += inspected + u64::from(min.unwrap());
        }
        black_box(sink);
        started.elapsed().as_secs_f64() / (reps * n as u64) as f64
    })
}

/// Seconds per empty bucket: every deadline parked in overflow, every
/// finite bucket scanned.
fn measure_skip_cost() -> f64 {
    let q = 4096u32;
    let times = vec![f64::INFINITY; 64];
    let table = BucketTable::new(&times, 0.0, 1.0, q);
    median5(|| {
        let reps = 32u64;
        let started = Instant::now();
        let mut sink = 0u64;
        for _ in 0..reps {
            for b in 0..q {
                sink += table.scan_min(black_box(b)).1;
            }
        }
        black_box(sink);
        started.elapsed().as_secs_f64() / (reps * u64::from(q)) as f64
    })
}

/// Seconds per in-place update, and the extra cost of a cross-bucket
/// relink on top of it.
fn measure_update_costs() -> (f64, f64) {
    let mut table = BucketTable::new(&[0.2], 0.0, 1.0, 2);
    let iters = 1u64 << 16;
    let stay = median5(|| {
        let started = Instant::now();
        for i in 0..iters {
            // 0.20 and 0.21 share bucket 0 of the [0, 1) window.
            table.move_to(0, black_box(0.20 + 0.01 * ((i & 1) as f64)));
        }
        started.elapsed().as_secs_f64() / iters as f64
    });
    let relink = median5(|| {
        let started = Instant::now();
        for i in 0..iters {
            // 0.2 and 0.7 are in different buckets; every move relinks.
            table.move_to(0, black_box(0.2 + 0.5 * ((i & 1) as f64)));
        }
        started.elapsed().as_secs_f64() / iters as f64
    });
    (stay, relink - stay)
}

/// Seconds per record swept by a window advance. Infinite deadlines keep
/// every record in overflow, so each advance sweeps all of them.
fn measure_redistribute_cost() -> f64 {
    let m = 65_536usize;
    let times = vec![f64::INFINITY; m];
    let mut table = BucketTable::new(&times, 0.0, 1.0, 64);
    median5(|| {
        let reps = 4u64;
        let started = Instant::now();
        for _ in 0..reps {
            table.advance_window();
        }
        started.elapsed().as_secs_f64() / (reps * m as u64) as f64
    })
}

/// Events per clock per unit model time, measured on the target system
/// itself with the bucketed scheduler.
fn measure_alpha(cfg: &RunConfig) -> f64 {
    let mut probe = cfg.clone();
    probe.t_end = f64::INFINITY;
    probe.max_events = ALPHA_EVENTS;
    let result = run_replica(&probe, cfg.seed);
    result.events as f64 / (f64::from(cfg.num_clocks()) * result.sim_time)
}

/// Measure every constant for the model and size in `cfg`. Costs come from
/// the table micro-benchmarks, the event density from a short run of the
/// model itself.
pub fn calibrate(cfg: &RunConfig) -> Result<CostModelConstants, CalibrationError> {
    let c_s = measure_scan_cost();
    let c_i = measure_skip_cost();
    let (c_u_stay, c_u_relink) = measure_update_costs();
    let c_r = measure_redistribute_cost();
    let alpha = measure_alpha(cfg);
    CostModelConstants { c_s, c_u_stay, c_u_relink, c_i, c_r, alpha }.validated()
}
