use serde::{Deserialize, Serialize};

use super::{Engine, ProcessSpec, Trajectory};
use crate::error::{invalid, Result};
use crate::parallel::{mean_stderr, map_units_with};
use crate::rng::Seed;

pub const MIN_TRIALS: u64 = 100;
/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Which persistence event a trial scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum PersistenceEvent {
    /// `max_{1..n} Z <= level`.
    MaxAtMost { level: f64 },
    /// `T_0 > n`, i.e. `Z_k != 0` for `k = 1..n` (integer processes).
    Survival,
}

impl PersistenceEvent {
    /// The level column of result tables; survival avoids level 0.
    pub fn level(&self) -> f64 {
        match *self {
            PersistenceEvent::MaxAtMost { level } => level,
            PersistenceEvent::Survival => 0.0,
        }
    }

    /// True once `z` ends the event.
    #[inline]
    fn broken_by(&self, z: f64) -> bool {
        match *self {
            PersistenceEvent::MaxAtMost { level } => z > level,
            PersistenceEvent::Survival => z == 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceEstimate {
    pub n: u64,
    pub event: PersistenceEvent,
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PersistenceEstimate {
    pub fn from_counts(n: u64, event: PersistenceEvent, successes: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        Self {
            n,
            event,
            successes,
            trials,
            p_hat: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn level(&self) -> f64 {
        self.event.level()
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // clamp keeps p_hat inside the interval at the boundaries
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

fn check_grid(grid: &[u64]) -> Result<usize> {
    if grid.is_empty() {
        return Err(invalid("grid", "must contain at least one horizon"));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("grid", "horizons must be positive and strictly increasing"));
    }
    Ok(*grid.last().unwrap() as usize)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(invalid(
            "trials",
            format!("must be at least {MIN_TRIALS}, got {trials}"),
        ));
    }
    Ok(())
}

/// Steps until the event breaks; `None` if it holds up to `n_max`.
#[inline]
fn exit_time(traj: &mut Trajectory<'_>, event: &PersistenceEvent, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|_| event.broken_by(traj.advance()))
}

/// Persistence probabilities at every horizon of `grid`.
///
/// Each trial runs once up to `max(grid)` and stops when the event breaks, so
/// every horizon shares the same trials. Trial `t` draws from
/// `seed.derive(t / trials_per_unit)`; results do not depend on the number of
/// workers.
pub fn estimate_persistence_grid(
    spec: &ProcessSpec,
    grid: &[u64],
    event: PersistenceEvent,
    trials: u64,
    seed: Seed,
) -> Result<Vec<PersistenceEstimate>> {
    check_trials(trials)?;
    let n_max = check_grid(grid)?;
    if event == PersistenceEvent::Survival && !spec.integer_valued() {
        return Err(invalid(
            "event",
            "survival requires an integer-valued process",
        ));
    }
    let engine = Engine::new(spec, n_max)?;
    let per_unit = engine.trials_per_unit();
    let units = trials.div_ceil(per_unit);
    let exits: Vec<Vec<Option<usize>>> = map_units_with(
        units,
        || engine.scratch(),
        |scratch, u| {
            let mut out = Vec::with_capacity(per_unit as usize);
            engine.run_unit(scratch, seed.derive(u), &mut |sub, traj| {
                if u * per_unit + sub as u64 >= trials {
                    return;
                }
                out.push(exit_time(traj, &event, n_max));
            });
            out
        },
    );
    let mut counts = vec![0u64; grid.len()];
    for exit in exits.iter().flatten() {
        for (c, &n) in counts.iter_mut().zip(grid) {
            if exit.is_none_or(|t| t as u64 > n) {
                *c += 1;
            }
        }
    }
    Ok(grid
        .iter()
        .zip(counts)
        .map(|(&n, c)| PersistenceEstimate::from_counts(n, event, c, trials))
        .collect())
}

/// `P(max_{1..n} Z <= level)` by Monte Carlo.
pub fn estimate_persistence(
    spec: &ProcessSpec,
    n: u64,
    level: f64,
    trials: u64,
    seed: Seed,
) -> Result<PersistenceEstimate> {
    Ok(estimate_persistence_grid(
        spec,
        &[n],
        PersistenceEvent::MaxAtMost { level },
        trials,
        seed,
    )?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMaxEstimate {
    pub n: u64,
    pub a_n: f64,
    /// Mean of `max_{0..n} Z / a_n`.
    pub b_hat: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// `E[max_{0..n} Z] / a_n` at every horizon of `grid`, sharing trials.
pub fn estimate_mean_max_grid(
    spec: &ProcessSpec,
    grid: &[u64],
    trials: u64,
    seed: Seed,
) -> Result<Vec<MeanMaxEstimate>> {
    check_trials(trials)?;
    let n_max = check_grid(grid)?;
    let scales = grid
        .iter()
        .map(|&n| spec.scaling(n as f64))
        .collect::<Result<Vec<_>>>()?;
    let engine = Engine::new(spec, n_max)?;
    let per_unit = engine.trials_per_unit();
    let units = trials.div_ceil(per_unit);
    let maxima: Vec<Vec<Vec<f64>>> = map_units_with(
        units,
        || engine.scratch(),
        |scratch, u| {
            let mut out = Vec::with_capacity(per_unit as usize);
            engine.run_unit(scratch, seed.derive(u), &mut |sub, traj| {
                if u * per_unit + sub as u64 >= trials {
                    return;
                }
                let mut max = 0.0f64;
                let mut row = Vec::with_capacity(grid.len());
                let mut k = 0u64;
                for &n in grid {
                    while k < n {
                        max = max.max(traj.advance());
                        k += 1;
                    }
                    row.push(max);
                }
                out.push(row);
            });
            out
        },
    );
    let rows: Vec<&Vec<f64>> = maxima.iter().flatten().collect();
    Ok(grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let column: Vec<f64> = rows.iter().map(|r| r[g] / scales[g]).collect();
            let (b_hat, stderr) = mean_stderr(&column);
            MeanMaxEstimate {
                n,
                a_n: scales[g],
                b_hat,
                stderr,
                trials,
            }
        })
        .collect())
}

pub fn estimate_mean_max(
    spec: &ProcessSpec,
    n: u64,
    trials: u64,
    seed: Seed,
) -> Result<MeanMaxEstimate> {
    Ok(estimate_mean_max_grid(spec, &[n], trials, seed)?[0])
}
