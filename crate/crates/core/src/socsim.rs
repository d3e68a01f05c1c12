//! Discrete-event M/D/c/FCFS simulation of a SOC alert queue under injected
//! false-positive alerts.
//!
//! Genuine (TP) alerts arrive as a Poisson process with rate
//! `lambda = eta * (1 - fp/100)`; false positives are spread evenly over
//! `[0, T]` where `T` is the last TP arrival. Analysts serve alerts in arrival
//! order, each taking a deterministic `1/mu` hours.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    /// rho must lie strictly inside (0, 1) for a steady state to exist.
    Unstable,
    InvalidParam(&'static str),
    ConfigError(&'static str),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Unstable => write!(f, "utilization at or above 1, queue is unstable"),
            SimError::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
            SimError::ConfigError(what) => write!(f, "invalid experiment config: {what}"),
        }
    }
}

impl core::error::Error for SimError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlertKind {
    Tp,
    Fp,
}

/// Simulated alert arrivals over a horizon, sorted by time (hours).
#[derive(Debug, Clone, PartialEq)]
pub struct AlertTrace {
    pub arrivals: Vec<(f64, AlertKind)>,
    pub horizon: f64,
}

/// Genuine-alert arrival times: a homogeneous Poisson process of rate
/// `eta * (1 - fp_pct/100)` over `[0, horizon)`.
pub fn gen_tp_arrivals<R: Rng>(eta: f64, fp_pct: f64, horizon: f64, rng: &mut R) -> Vec<f64> {
    let lambda = eta * (1.0 - fp_pct / 100.0);
    let mut out = Vec::new();
    if lambda <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen();
        t -= num::ln(1.0 - u) / lambda;
        if t >= horizon {
            return out;
        }
        out.push(t);
    }
}

/// `count` false-positive arrivals evenly spaced strictly inside `[0, t_last]`
/// at `k * t_last / (count + 1)`.
pub fn gen_fp_arrivals(count: usize, t_last: f64) -> Vec<f64> {
    let spacing = t_last / (count as f64 + 1.0);
    (1..=count).map(|k| k as f64 * spacing).collect()
}

/// Build a merged trace for one run. The FP count is chosen so that false
/// positives make up `fp_pct` percent of all alerts:
/// `n_fp = round(n_tp * fp / (100 - fp))`.
pub fn build_trace<R: Rng>(eta: f64, fp_pct: f64, horizon: f64, rng: &mut R) -> AlertTrace {
    let tps = gen_tp_arrivals(eta, fp_pct, horizon, rng);
    let fps = match tps.last() {
        Some(&t_last) if fp_pct > 0.0 => {
            let n_fp = num::round(tps.len() as f64 * fp_pct / (100.0 - fp_pct)) as usize;
            gen_fp_arrivals(n_fp, t_last)
        }
        _ => Vec::new(),
    };
    let mut arrivals: Vec<(f64, AlertKind)> = tps
        .into_iter()
        .map(|t| (t, AlertKind::Tp))
        .chain(fps.into_iter().map(|t| (t, AlertKind::Fp)))
        .collect();
    arrivals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    AlertTrace { arrivals, horizon }
}

/// One alert's outcome in a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServedAlert {
    pub kind: AlertKind,
    pub arrival: f64,
    /// Service start time; None when still queued at the horizon.
    pub start: Option<f64>,
    pub wait: f64,
}

/// Waiting-time outcomes of one simulation run. All times in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueResult {
    pub per_alert: Vec<ServedAlert>,
    pub cumulative_tp_wait: f64,
    pub mean_tp_wait: f64,
    pub served_count: usize,
    pub horizon_truncated_count: usize,
}

/// FCFS dispatch to `c` identical servers with deterministic service time
/// `1/mu` hours. Alerts whose service has not started by the horizon are
/// counted separately, with waiting accrued up to the horizon.
pub fn simulate_queue(trace: &AlertTrace, mu: f64, c: usize) -> Result<QueueResult, SimError> {
    if mu <= 0.0 {
        return Err(SimError::InvalidParam("mu must be positive"));
    }
    if c == 0 {
        return Err(SimError::InvalidParam("need at least one server"));
    }
    let service = 1.0 / mu;
    let mut free_at = alloc::vec![0.0f64; c];
    let mut per_alert = Vec::with_capacity(trace.arrivals.len());
    let mut cumulative_tp_wait = 0.0;
    let mut tp_count = 0usize;
    let mut served_count = 0usize;
    let mut truncated = 0usize;

    for &(arrival, kind) in &trace.arrivals {
        // earliest-free server; ties broken by index
        let (server, &soonest) = free_at
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(core::cmp::Ordering::Equal))
            .expect("c >= 1");
        let start = if soonest > arrival { soonest } else { arrival };
        let alert = if start >= trace.horizon {
            truncated += 1;
            ServedAlert {
                kind,
                arrival,
                start: None,
                wait: (trace.horizon - arrival).max(0.0),
            }
        } else {
            served_count += 1;
            free_at[server] = start + service;
            ServedAlert {
                kind,
                arrival,
                start: Some(start),
                wait: start - arrival,
            }
        };
        if kind == AlertKind::Tp {
            cumulative_tp_wait += alert.wait;
            tp_count += 1;
        }
        per_alert.push(alert);
    }

    let mean_tp_wait = if tp_count > 0 {
        cumulative_tp_wait / tp_count as f64
    } else {
        0.0
    };
    Ok(QueueResult {
        per_alert,
        cumulative_tp_wait,
        mean_tp_wait,
        served_count,
        horizon_truncated_count: truncated,
    })
}

/// Steady-state M/D/1 mean queueing delay, `rho / (2 mu (1 - rho))` hours.
/// Serves as the closed-form oracle for the `c = 1`, `fp = 0` case.
pub fn analytic_md1_wq(rho: f64, mu: f64) -> Result<f64, SimError> {
    if mu <= 0.0 {
        return Err(SimError::InvalidParam("mu must be positive"));
    }
    if rho <= 0.0 {
        return Err(SimError::InvalidParam("rho must be positive"));
    }
    if rho >= 1.0 {
        return Err(SimError::Unstable);
    }
    Ok(rho / (2.0 * mu * (1.0 - rho)))
}

/// How the eta and fp sweep lists combine into experiment cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Element-wise: cell `i` uses `(eta[i], fp[i])`. Lists must have equal length.
    Zipped,
    /// Full cartesian product of etas and fps.
    Crossed,
}

/// Experiment sweep configuration. When `rho` is set the arrival rate is
/// derived per budget as `eta = rho * mu` and `etas` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub etas: Vec<f64>,
    pub rho: Option<f64>,
    pub mus: Vec<f64>,
    pub fps: Vec<f64>,
    pub horizon: f64,
    pub repeats: usize,
    pub servers: usize,
    pub seed: u64,
    pub pairing: Pairing,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            etas: alloc::vec![115.0, 116.0, 117.0, 118.0, 119.0],
            rho: None,
            mus: alloc::vec![120.0],
            fps: alloc::vec![0.8012, 4.006, 8.012, 12.018, 16.024],
            horizon: 1.0,
            repeats: 10,
            servers: 1,
            seed: 1,
            pairing: Pairing::Zipped,
        }
    }
}

/// One averaged cell of an experiment sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub fp: f64,
    pub eta: f64,
    pub mu: f64,
    pub c: usize,
    pub horizon: f64,
    /// Cumulative TP waiting time, averaged over repeats (hours).
    pub mean_cum_wait: f64,
    /// Per-alert mean TP waiting time, averaged over repeats (hours).
    pub mean_wait: f64,
    pub mean_served: f64,
    pub mean_truncated: f64,
}

/// Replication seed: depends on the campaign seed, the budget, and the repeat
/// index, but deliberately not on eta or fp. Sweep cells thus share one
/// underlying random stream per repeat (common random numbers), so comparisons
/// across cells are coupled rather than drowned in independent noise.
fn replication_seed(seed: u64, mu: f64, repeat: usize) -> u64 {
    let s = num::splitmix64(seed ^ mu.to_bits());
    num::splitmix64(s ^ repeat as u64)
}

/// Run the full sweep, averaging each cell over `repeats` replications.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, SimError> {
    if cfg.repeats == 0 {
        return Err(SimError::ConfigError("repeats must be at least 1"));
    }
    if cfg.horizon <= 0.0 {
        return Err(SimError::ConfigError("horizon must be positive"));
    }
    if cfg.mus.is_empty() {
        return Err(SimError::ConfigError("at least one budget (mu) required"));
    }
    if cfg.fps.iter().any(|&fp| !(0.0..100.0).contains(&fp)) {
        return Err(SimError::ConfigError("fp must lie in [0, 100)"));
    }
    if let Some(rho) = cfg.rho {
        if rho <= 0.0 {
            return Err(SimError::ConfigError("rho must be positive"));
        }
    } else if cfg.etas.is_empty() {
        return Err(SimError::ConfigError("either rho or etas must be given"));
    }

    let mut rows = Vec::new();
    for &mu in &cfg.mus {
        let etas: Vec<f64> = match cfg.rho {
            Some(rho) => alloc::vec![rho * mu],
            None => cfg.etas.clone(),
        };
        let cells: Vec<(f64, f64)> = match cfg.pairing {
            Pairing::Zipped => {
                if etas.len() == 1 {
                    cfg.fps.iter().map(|&fp| (etas[0], fp)).collect()
                } else if cfg.fps.len() == 1 {
                    etas.iter().map(|&eta| (eta, cfg.fps[0])).collect()
                } else if etas.len() == cfg.fps.len() {
                    etas.iter().copied().zip(cfg.fps.iter().copied()).collect()
                } else {
                    return Err(SimError::ConfigError(
                        "zipped pairing needs equal-length eta and fp lists",
                    ));
                }
            }
            Pairing::Crossed => etas
                .iter()
                .flat_map(|&eta| cfg.fps.iter().map(move |&fp| (eta, fp)))
                .collect(),
        };

        for (eta, fp) in cells {
            let mut sum_cum = 0.0;
            let mut sum_mean = 0.0;
            let mut sum_served = 0.0;
            let mut sum_trunc = 0.0;
            for r in 0..cfg.repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(cfg.seed, mu, r));
                let trace = build_trace(eta, fp, cfg.horizon, &mut rng);
                let result = simulate_queue(&trace, mu, cfg.servers)?;
                sum_cum += result.cumulative_tp_wait;
                sum_mean += result.mean_tp_wait;
                sum_served += result.served_count as f64;
                sum_trunc += result.horizon_truncated_count as f64;
            }
            let n = cfg.repeats as f64;
            rows.push(ExperimentRow {
                fp,
                eta,
                mu,
                c: cfg.servers,
                horizon: cfg.horizon,
                mean_cum_wait: sum_cum / n,
                mean_wait: sum_mean / n,
                mean_served: sum_served / n,
                mean_truncated: sum_trunc / n,
            });
        }
    }
    Ok(rows)
}
