//! Replica execution and the CSV emitters. The stopwatch starts after the
//! engine is built, so construction and initial scheduling are never billed
//! to the per-event figures. One output schema covers single runs and
//! sweeps; cells that do not apply stay empty rather than changing shape.

use crate::config::{ModelKind, RunConfig};
use ssakit::models::{GrayScott, Kmp, Oregonator, RandomCrn};
use ssakit::{build_engine, EngineParams, Method, OpCounters, ProcessModel, Scheduler};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

/// Seed offset separating a network's wiring stream from the replica
/// streams that drive its dynamics.
const WIRING_OFFSET: u64 = 0x6C62_272E_07BB_0142;

/// Sweeps refuse cells above this size unless explicitly overridden; a
/// single oversized cell can otherwise eat the whole time budget.
pub const SWEEP_SIZE_CAP: u32 = 1_000_000;

pub struct ReplicaResult {
    pub events: u64,
    pub seconds: f64,
    /// Model time reached when the run stopped.
    pub sim_time: f64,
    pub counters: OpCounters,
}

fn drive<M>(
    model: M,
    method: Method,
    seed: u64,
    params: &EngineParams,
    t_end: f64,
    max_events: u64,
) -> ReplicaResult
where
    M: ProcessModel + 'static,
    M::State: 'static,
{
    let mut engine = build_engine(method, model, seed, params);
    let started = Instant::now();
    let events = engine.run_events(t_end, max_events);
    ReplicaResult {
        events,
        seconds: started.elapsed().as_secs_f64(),
        sim_time: engine.current_time(),
        counters: engine.counters(),
    }
}

/// One replica, seeded independently of every other replica in the run.
pub fn run_replica(cfg: &RunConfig, seed: u64) -> ReplicaResult {
    let params = cfg.engine_params();
    match cfg.model {
        ModelKind::Kmp => drive(
            Kmp::new(cfg.size),
            cfg.method,
            seed,
            &params,
            cfg.t_end,
            cfg.max_events,
        ),
        // The wiring comes from the run seed, not the replica seed, so all
        // replicas simulate the same network.
        ModelKind::Crn => drive(
            RandomCrn::new(cfg.size, cfg.seed ^ WIRING_OFFSET),
            cfg.method,
            seed,
            &params,
            cfg.t_end,
            cfg.max_events,
        ),
        ModelKind::GrayScott => drive(
            GrayScott::new(cfg.size),
            cfg.method,
            seed,
            &params,
            cfg.t_end,
            cfg.max_events,
        ),
        ModelKind::Oregonator => drive(
            Oregonator::with_initial(cfg.oregonator_init),
            cfg.method,
            seed,
            &params,
            cfg.t_end,
            cfg.max_events,
        ),
    }
}

/// All replicas of a cell. `threads > 1` spreads replicas over that many
/// worker threads; results still come back in replica order, so everything
/// except the wall-clock readings is identical to a serial run.
pub fn run_replicas(cfg: &RunConfig, threads: u32) -> Vec<ReplicaResult> {
    let threads = threads.clamp(1, cfg.replicas.max(1)) as usize;
    if threads <= 1 {
        return (0..cfg.replicas)
            .map(|i| run_replica(cfg, cfg.seed.wrapping_add(u64::from(i))))
            .collect();
    }
    let mut slots: Vec<Option<ReplicaResult>> = (0..cfg.replicas).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t as u32..cfg.replicas)
                        .step_by(threads)
                        .map(|i| (i, run_replica(cfg, cfg.seed.wrapping_add(u64::from(i)))))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            for (i, result) in handle.join().expect("replica worker panicked") {
                slots[i as usize] = Some(result);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("replica ran")).collect()
}

/// Mean and spread of the per-replica cost, in seconds per million events.
pub struct Timing {
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two samples.
    pub sd: Option<f64>,
    /// Standard error of the mean, `sd / sqrt(n)`.
    pub sem: Option<f64>,
}

pub struct Aggregate {
    pub replicas: u32,
    pub total_events: u64,
    pub events_mean: f64,
    /// Absent when no replica fired an event or when the run was parallel,
    /// where wall-clock readings are contaminated by contention.
    pub timing: Option<Timing>,
    /// Operation tallies summed over all replicas.
    pub counters: OpCounters,
}

fn add_counters(into: &mut OpCounters, c: &OpCounters) {
    into.comparisons += c.comparisons;
    into.moves_with_relink += c.moves_with_relink;
    into.moves_without_relink += c.moves_without_relink;
    into.heap_swaps += c.heap_swaps;
    into.events += c.events;
    into.bucket_iterations += c.bucket_iterations;
    into.redistributions += c.redistributions;
    into.rejections += c.rejections;
}

pub fn aggregate(results: &[ReplicaResult], timing_valid: bool) -> Aggregate {
    let mut counters = OpCounters::default();
    let mut total_events = 0u64;
    for r in results {
        add_counters(&mut counters, &r.counters);
        total_events += r.events;
    }
    let per_mev: Vec<f64> = results
        .iter()
        .filter(|r| r.events > 0)
        .map(|r| r.seconds * 1e6 / r.events as f64)
        .collect();
    let timing = if timing_valid && !per_mev.is_empty() {
        let n = per_mev.len() as f64;
        let mean = per_mev.iter().sum::<f64>() / n;
        let sd = (per_mev.len() >= 2).then(|| {
            (per_mev.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        });
        Some(Timing {
            mean,
            sd,
            sem: sd.map(|s| s / n.sqrt()),
        })
    } else {
        None
    };
    Aggregate {
        replicas: results.len() as u32,
        total_events,
        events_mean: if results.is_empty() {
            0.0
        } else {
            total_events as f64 / results.len() as f64
        },
        timing,
        counters,
    }
}

/// Fixed column set shared by `run` and `sweep`. Inapplicable cells are
/// empty: timing after a zero-event or parallel run, bucket parameters for
/// non-bucket methods, operation ratios when counters are off.
pub const CSV_HEADER: &str = "model,method,size,clocks,replicas,t_end,tau,q,seed,\
events_mean,sec_per_mev_mean,sec_per_mev_sd,sec_per_mev_sem,\
comparisons_per_event,relink_moves_per_event,stay_moves_per_event,\
heap_swaps_per_event,rejections_per_event,bucket_iterations_per_event,\
redistributions_mean,status";

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

pub fn csv_row(cfg: &RunConfig, agg: &Aggregate, status: &str) -> String {
    let (tau_cell, q_cell) = if cfg.method == Method::Hlm {
        let p = cfg.hlm_params();
        (p.tau.to_string(), p.q.to_string())
    } else {
        (String::new(), String::new())
    };
    let (t_mean, t_sd, t_sem) = match &agg.timing {
        Some(t) => (opt_cell(Some(t.mean)), opt_cell(t.sd), opt_cell(t.sem)),
        None => (String::new(), String::new(), String::new()),
    };
    let per_event = |ops: u64| {
        if cfg.counters && agg.total_events > 0 {
            format!("{:.6}", ops as f64 / agg.total_events as f64)
        } else {
            String::new()
        }
    };
    let redist_mean = if cfg.counters && agg.total_events > 0 && agg.replicas > 0 {
        format!("{:.6}", agg.counters.redistributions as f64 / f64::from(agg.replicas))
    } else {
        String::new()
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{:.3},{},{},{},{},{},{},{},{},{},{},{}",
        cfg.model,
        cfg.method,
        cfg.size,
        cfg.num_clocks(),
        agg.replicas,
        cfg.t_end,
        tau_cell,
        q_cell,
        cfg.seed,
        agg.events_mean,
        t_mean,
        t_sd,
        t_sem,
        per_event(agg.counters.comparisons),
        per_event(agg.counters.moves_with_relink),
        per_event(agg.counters.moves_without_relink),
        per_event(agg.counters.heap_swaps),
        per_event(agg.counters.rejections),
        per_event(agg.counters.bucket_iterations),
        redist_mean,
        status,
    )
}

/// Row for a cell that produced no results; only identity columns and the
/// status are filled.
fn error_row(cfg: &RunConfig, message: &str) -> String {
    // Commas would shift every downstream column.
    let clean = message.replace([',', '\n'], ";");
    format!(
        "{},{},{},{},{},{},,,{},,,,,,,,,,,,error: {}",
        cfg.model, cfg.method, cfg.size, cfg.num_clocks(), cfg.replicas, cfg.t_end, cfg.seed, clean,
    )
}

fn panic_text(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panicked".into())
}

/// Cross-product of sizes and methods under a shared base configuration,
/// one CSV row per cell. A failing cell becomes an `error:` row and the
/// sweep moves on.
pub fn sweep(
    base: &RunConfig,
    sizes: &[u32],
    methods: &[Method],
    allow_large: bool,
) -> Vec<String> {
    let mut rows = Vec::with_capacity(sizes.len() * methods.len());
    for &size in sizes {
        for &method in methods {
            let mut cfg = base.clone();
            cfg.size = size;
            cfg.method = method;
            if size > SWEEP_SIZE_CAP && !allow_large {
                rows.push(error_row(
                    &cfg,
                    &format!("size {size} above sweep cap {SWEEP_SIZE_CAP}; pass --allow-large"),
                ));
                continue;
            }
            if let Err(e) = cfg.validate() {
                rows.push(error_row(&cfg, &e.to_string()));
                continue;
            }
            let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
                let results = run_replicas(&cfg, 1);
                aggregate(&results, true)
            }));
            rows.push(match outcome {
                Ok(agg) => csv_row(&cfg, &agg, "ok"),
                Err(payload) => error_row(&cfg, &panic_text(payload)),
            });
        }
    }
    rows
}

/// U counts after every event strictly before `t_snapshot` has been
/// applied, which is the grid an observer sees at that instant. A cutoff
/// past `t_end` yields the final state instead and reports the clipping.
pub fn grid_snapshot(cfg: &RunConfig, t_snapshot: f64) -> (Vec<u64>, bool) {
    assert_eq!(cfg.model, ModelKind::GrayScott, "snapshots are grids");
    let clipped = t_snapshot > cfg.t_end;
    let cap = if clipped { cfg.t_end } else { t_snapshot };
    let mut engine = build_engine(
        cfg.method,
        GrayScott::new(cfg.size),
        cfg.seed,
        &cfg.engine_params(),
    );
    engine.run_until(cap);
    (engine.state().u.clone(), clipped)
}

/// Row-major counts as `k` CSV lines of `k` cells.
pub fn grid_csv(u: &[u64], k: u32) -> String {
    let k = k as usize;
    let mut out = String::new();
    for row in u.chunks(k) {
        let line: Vec<String> = row.iter().map(u64::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
