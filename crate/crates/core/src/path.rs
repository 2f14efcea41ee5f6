//! Path containers and exact per-path statistics.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// One realized trajectory `Z_0..Z_n` with `Z_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    values: Vec<f64>,
    integer_valued: bool,
}

impl PathSample {
    /// Builds a path from its values. `values[0]` must be zero and, for
    /// integer paths, every entry an exact integer.
    pub fn from_values(values: Vec<f64>, integer_valued: bool) -> Result<Self> {
        match values.first() {
            None => return Err(Error::DegeneratePath),
            Some(&z0) if z0 != 0.0 => {
                return Err(Error::InvalidPath(format!("Z_0 must be 0, got {z0}")))
            }
            _ => {}
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPath(format!("Z_{k} = {v} is not finite")));
        }
        if integer_valued {
            if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.fract() != 0.0) {
                return Err(Error::InvalidPath(format!(
                    "integer path has non-integer Z_{k} = {v}"
                )));
            }
        }
        Ok(Self {
            values,
            integer_valued,
        })
    }

    /// Cumulative sums of `increments`, prefixed by `Z_0 = 0`.
    pub fn from_increments<I>(increments: I, integer_valued: bool) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        let mut z = 0.0;
        let values = std::iter::once(0.0)
            .chain(increments.into_iter().map(|x| {
                z += x;
                z
            }))
            .collect();
        Self::from_values(values, integer_valued)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integer_valued(&self) -> bool {
        self.integer_valued
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The prefix `Z_0..Z_m`.
    pub fn prefix(&self, m: usize) -> PathSample {
        let m = m.min(self.len());
        PathSample {
            values: self.values[..=m].to_vec(),
            integer_valued: self.integer_valued,
        }
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }
}

/// First return time to zero of an integer path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstReturn {
    /// `T_0 = k`, the smallest `k >= 1` with `Z_k = 0`.
    At(usize),
    /// No return within the horizon.
    Censored,
}

impl FirstReturn {
    pub fn is_censored(self) -> bool {
        matches!(self, FirstReturn::Censored)
    }

    /// True when `T_0 > k`.
    pub fn survives(self, k: usize) -> bool {
        match self {
            FirstReturn::At(t) => t > k,
            FirstReturn::Censored => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    /// Number of steps.
    pub n: usize,
    /// Maximum over `k = 1..n`.
    pub max_1n: f64,
    /// Minimum over `k = 1..n`.
    pub min_1n: f64,
    /// `Z_1`.
    pub first_value: f64,
    /// `None` for real-valued paths, where `T_0` is undefined.
    pub first_return: Option<FirstReturn>,
    /// `#{Z_0..Z_n}`, integer paths only.
    pub range_count: Option<usize>,
    /// `#{floor(Z_0)..floor(Z_n)}`.
    pub floor_range: usize,
    /// Every increment lies in `{-1, 0, 1}`.
    pub unit_increments: bool,
}

impl PathStats {
    /// `T_0`, or an error for real-valued paths.
    pub fn t0(&self) -> Result<FirstReturn> {
        self.first_return.ok_or(Error::FirstReturnUndefined)
    }

    /// `max_{0..n} Z`, which includes `Z_0 = 0`.
    pub fn max_0n(&self) -> f64 {
        self.max_1n.max(0.0)
    }

    pub fn min_0n(&self) -> f64 {
        self.min_1n.min(0.0)
    }
}

pub fn path_stats(path: &PathSample) -> Result<PathStats> {
    let n = path.len();
    if n == 0 {
        return Err(Error::DegeneratePath);
    }
    let vals = path.values();
    let mut max_1n = f64::NEG_INFINITY;
    let mut min_1n = f64::INFINITY;
    let mut first_return = path.integer_valued.then_some(FirstReturn::Censored);
    let mut floors: HashSet<i64> = HashSet::with_capacity(n + 1);
    let mut unit_increments = true;
    floors.insert(0);
    for k in 1..=n {
        let z = vals[k];
        max_1n = max_1n.max(z);
        min_1n = min_1n.min(z);
        floors.insert(z.floor() as i64);
        if (z - vals[k - 1]).abs() > 1.0 {
            unit_increments = false;
        }
        if first_return == Some(FirstReturn::Censored) && z == 0.0 {
            first_return = Some(FirstReturn::At(k));
        }
    }
    let floor_range = floors.len();
    // floors of integers are the integers themselves
    let range_count = path.integer_valued.then_some(floor_range);
    Ok(PathStats {
        n,
        max_1n,
        min_1n,
        first_value: vals[1],
        first_return,
        range_count,
        floor_range,
        unit_increments: unit_increments && path.integer_valued,
    })
}

/// `max_{1..n} Z <= level`.
pub fn persistence_event(stats: &PathStats, level: f64) -> bool {
    stats.max_1n <= level
}

/// Running extrema and first-passage bookkeeping for streamed paths.
#[derive(Debug, Clone)]
pub struct RunningMax {
    pub steps: usize,
    pub max: f64,
    pub min: f64,
}

impl Default for RunningMax {
    fn default() -> Self {
        Self {
            steps: 0,
            max: 0.0,
            min: 0.0,
        }
    }
}

impl RunningMax {
    #[inline]
    pub fn push(&mut self, z: f64) {
        self.steps += 1;
        if z > self.max {
            self.max = z;
        }
        if z < self.min {
            self.min = z;
        }
    }
}
