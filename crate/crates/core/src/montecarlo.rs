//! Shot-by-shot simulation of post-selected weak measurements.
//!
//! Each shot first decides post-selection (detector click) with the exact
//! post-selection probability, then, only for accepted shots, draws a pointer
//! reading from the normalised conditional density. The density includes the
//! interference cross terms between shifted Gaussians and is sampled by
//! inverse CDF over a tabulated grid.
//!
//! Determinism: shots are grouped into fixed blocks of [`BLOCK_SIZE`]. Block
//! `b` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, and block
//! statistics are merged in block order. Shards are only a partition of
//! blocks over threads, so the merged result is bit-identical for any shard
//! count.

use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::experiments::{build_operator, build_states, ExperimentError, ExperimentKind, OperatorName, QccConfig};
use crate::pointer::{conditional_state, ConditionalPointerState, GaussianPointer, PointerError, Readout};

/// Shots per RNG stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Default number of nodes in the inverse-CDF table.
pub const DEFAULT_TABLE_NODES: usize = 1 << 14;

/// Half-width of the tabulated window in units of the pointer spread. The
/// Gaussian mass beyond ±8 standard deviations is about 1.2e-15.
pub const TABLE_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("shot count must be at least 1")]
    NoShots,
    #[error("shard count must be at least 1")]
    NoShards,
    #[error("Monte Carlo coupling must be finite and positive, got {0}")]
    InvalidCoupling(f64),
    #[error("inverse-CDF table needs at least 2 nodes, got {0}")]
    TableTooSmall(usize),
    #[error("no shot out of {total} passed post-selection")]
    ZeroAcceptance { total: u64 },
    #[error("shot grid must be non-empty and strictly ascending")]
    BadShotGrid,
    #[error("histogram edges must be strictly ascending with at least two entries")]
    BadHistogramEdges,
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Pointer(#[from] PointerError),
}

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub cfg: QccConfig,
    pub operator: OperatorName,
    pub g: f64,
    pub pointer: GaussianPointer,
    pub shots: u64,
    pub seed: u64,
    pub readout: Readout,
    /// Worker threads; does not affect results.
    pub shards: usize,
    pub table_nodes: usize,
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: ExperimentKind,
        cfg: QccConfig,
        operator_name: &str,
        g: f64,
        pointer: GaussianPointer,
        shots: u64,
        seed: u64,
        readout: Readout,
    ) -> Result<Self, MonteCarloError> {
        let operator: OperatorName = operator_name.parse()?;
        if operator.kind() != kind {
            return Err(ExperimentError::WrongKind { operator, kind }.into());
        }
        let config = Self {
            kind,
            cfg,
            operator,
            g,
            pointer,
            shots,
            seed,
            readout,
            shards: 1,
            table_nodes: DEFAULT_TABLE_NODES,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards;
        self
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<(), MonteCarloError> {
        if self.shots == 0 {
            return Err(MonteCarloError::NoShots);
        }
        if self.shards == 0 {
            return Err(MonteCarloError::NoShards);
        }
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(MonteCarloError::InvalidCoupling(self.g));
        }
        if self.table_nodes < 2 {
            return Err(MonteCarloError::TableTooSmall(self.table_nodes));
        }
        if self.operator.kind() != self.kind {
            return Err(ExperimentError::WrongKind {
                operator: self.operator,
                kind: self.kind,
            }
            .into());
        }
        Ok(())
    }

    /// Exact conditional pointer state read out in the configured basis.
    pub fn conditional_state(&self) -> Result<ConditionalPointerState, MonteCarloError> {
        let pair = build_states(self.kind, &self.cfg);
        let op = build_operator(self.operator, &self.cfg);
        Ok(conditional_state(&op, &pair, &self.pointer, self.g)?.in_basis(self.readout))
    }

    /// Reading offset removed before accumulating sums.
    fn centre(&self) -> f64 {
        match self.readout {
            Readout::Position => self.pointer.x0(),
            Readout::Momentum => 0.0,
        }
    }

    /// Factor turning a mean displacement into a weak-value estimate:
    /// `1/g` for position (estimates Re O_w), `2σ²/g` for momentum
    /// (estimates Im O_w).
    fn estimate_scale(&self) -> f64 {
        match self.readout {
            Readout::Position => 1.0 / self.g,
            Readout::Momentum => 2.0 * self.pointer.sigma().powi(2) / self.g,
        }
    }
}

/// Aggregated outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub accepted: u64,
    pub total: u64,
    pub postselection_rate: f64,
    pub mean_reading: f64,
    pub stderr_reading: f64,
    /// Position readout: `(mean - x0)/g`, estimating `Re⟨O⟩_w`.
    /// Momentum readout: `2σ²·mean/g`, estimating `Im⟨O⟩_w`.
    pub weak_value_estimate: f64,
    pub stderr_estimate: f64,
    /// The same estimator evaluated on the exact conditional density.
    pub exact_reference: f64,
    pub exact_postselection_probability: f64,
}

impl RunResult {
    /// Binomial standard error of the acceptance rate at the exact
    /// probability.
    pub fn rate_stderr(&self) -> f64 {
        let p = self.exact_postselection_probability;
        (p * (1.0 - p) / self.total as f64).sqrt()
    }
}

/// Sufficient statistics of a set of shots.
#[derive(Debug, Clone, Default, PartialEq)]
struct ShotStats {
    total: u64,
    accepted: u64,
    sum: f64,
    sum_sq: f64,
    histogram: Vec<u64>,
}

impl ShotStats {
    fn merge(&mut self, other: &ShotStats) {
        self.total += other.total;
        self.accepted += other.accepted;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }
}

/// Tabulated inverse CDF of a conditional pointer density.
#[derive(Debug, Clone)]
pub struct ReadingSampler {
    lo: f64,
    step: f64,
    cdf: Vec<f64>,
}

impl ReadingSampler {
    pub fn new(state: &ConditionalPointerState, nodes: usize) -> Self {
        let pointer = state.pointer();
        let (lo, hi) = match state.basis() {
            Readout::Position => {
                let half = TABLE_HALF_WIDTH * pointer.sigma() + state.max_abs_shift();
                (pointer.x0() - half, pointer.x0() + half)
            }
            Readout::Momentum => {
                let half = TABLE_HALF_WIDTH * pointer.momentum_width();
                (-half, half)
            }
        };
        let step = (hi - lo) / (nodes - 1) as f64;
        let density: Vec<f64> = (0..nodes).map(|i| state.density(lo + i as f64 * step)).collect();
        let mut cdf = Vec::with_capacity(nodes);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * step;
            cdf.push(acc);
        }
        if acc > 0.0 {
            for v in &mut cdf {
                *v /= acc;
            }
        }
        Self { lo, step, cdf }
    }

    /// Maps a uniform variate in `[0, 1)` to a reading.
    pub fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.lo + (i as f64 + frac) * self.step
    }
}

struct Engine<'a> {
    config: &'a RunConfig,
    accept_probability: f64,
    sampler: ReadingSampler,
    edges: &'a [f64],
}

impl Engine<'_> {
    fn block(&self, index: u64) -> ShotStats {
        let start = index * BLOCK_SIZE;
        let shots = BLOCK_SIZE.min(self.config.shots - start);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        let centre = self.config.centre();
        let bins = self.edges.len().saturating_sub(1);
        let mut stats = ShotStats {
            total: shots,
            histogram: vec![0; bins],
            ..ShotStats::default()
        };
        for _ in 0..shots {
            let click: f64 = rng.random();
            if click >= self.accept_probability {
                continue;
            }
            let reading = self.sampler.sample(rng.random());
            stats.accepted += 1;
            let d = reading - centre;
            stats.sum += d;
            stats.sum_sq += d * d;
            if bins > 0 {
                let k = self.edges.partition_point(|&e| e <= reading);
                if k >= 1 && k <= bins {
                    stats.histogram[k - 1] += 1;
                }
            }
        }
        stats
    }

    fn run(&self) -> ShotStats {
        let blocks = self.config.shots.div_ceil(BLOCK_SIZE);
        let shards = (self.config.shards as u64).clamp(1, blocks);
        let mut per_block: Vec<(u64, ShotStats)> = if shards == 1 {
            (0..blocks).map(|b| (b, self.block(b))).collect()
        } else {
            thread::scope(|scope| {
                let handles: Vec<_> = (0..shards)
                    .map(|s| {
                        scope.spawn(move || {
                            (s..blocks)
                                .step_by(shards as usize)
                                .map(|b| (b, self.block(b)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("shard panicked"))
                    .collect()
            })
        };
        per_block.sort_by_key(|(b, _)| *b);
        let mut total = ShotStats::default();
        for (_, stats) in &per_block {
            total.merge(stats);
        }
        total
    }
}

fn simulate(config: &RunConfig, edges: &[f64]) -> Result<(RunResult, Vec<u64>), MonteCarloError> {
    config.validate()?;
    let state = config.conditional_state()?;
    let probability = state.postselection_probability();
    let engine = Engine {
        config,
        accept_probability: probability,
        sampler: ReadingSampler::new(&state, config.table_nodes),
        edges,
    };
    let stats = engine.run();
    if stats.accepted == 0 {
        return Err(MonteCarloError::ZeroAcceptance { total: stats.total });
    }
    let exact_mean = state.conditional_mean()?;

    let n = stats.accepted as f64;
    let mean_offset = stats.sum / n;
    let variance = ((stats.sum_sq - stats.sum * mean_offset) / (n - 1.0).max(1.0)).max(0.0);
    let stderr_reading = (variance / n).sqrt();
    let scale = config.estimate_scale();
    let centre = config.centre();
    let result = RunResult {
        accepted: stats.accepted,
        total: stats.total,
        postselection_rate: n / stats.total as f64,
        mean_reading: centre + mean_offset,
        stderr_reading,
        weak_value_estimate: mean_offset * scale,
        stderr_estimate: stderr_reading * scale,
        exact_reference: (exact_mean - centre) * scale,
        exact_postselection_probability: probability,
    };
    Ok((result, stats.histogram))
}

/// Runs the configured number of shots.
pub fn run(config: &RunConfig) -> Result<RunResult, MonteCarloError> {
    simulate(config, &[]).map(|(r, _)| r)
}

/// Like [`run`], also counting accepted readings in the bins delimited by
/// `edges` (`[e_k, e_{k+1})`).
pub fn run_with_histogram(config: &RunConfig, edges: &[f64]) -> Result<(RunResult, Vec<u64>), MonteCarloError> {
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(MonteCarloError::BadHistogramEdges);
    }
    simulate(config, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub shots: u64,
    pub abs_error: f64,
    pub stderr: f64,
}

/// Repeats the run at each shot count in `shot_grid`.
pub fn convergence_scan(config: &RunConfig, shot_grid: &[u64]) -> Result<Vec<ConvergenceRow>, MonteCarloError> {
    if shot_grid.is_empty() || shot_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MonteCarloError::BadShotGrid);
    }
    shot_grid
        .iter()
        .map(|&shots| {
            let r = run(&config.clone().with_shots(shots))?;
            Ok(ConvergenceRow {
                shots,
                abs_error: (r.weak_value_estimate - r.exact_reference).abs(),
                stderr: r.stderr_estimate,
            })
        })
        .collect()
}

/// Least-squares slope of `ln(stderr)` against `ln(shots)`.
pub fn log_log_slope(rows: &[ConvergenceRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.shots as f64).ln(), r.stderr.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
