//! The Matheron–de Marsily walk on the oriented lattice `Z^2`.
//!
//! Every horizontal line `y` carries an orientation `xi_y = +/-1`. From
//! `(x, y)` the walk moves to `(x + xi_y, y)` with probability `p` and to
//! `(x, y +/- 1)` with probability `(1 - p) / 2` each. Orientations are
//! evaluated lazily from a keyed generator, so a revisited line keeps its
//! orientation. Trials are annealed: each has a fresh environment.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::path::{path_stats, FirstReturn, PathSample, PathStats};
use crate::rng::{keyed, CounterRng, Seed, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdmSpec {
    pub p: f64,
    pub length: usize,
}

impl MdmSpec {
    pub fn new(p: f64, length: usize) -> Result<Self> {
        let spec = Self { p, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate_p(self.p)?;
        if self.length == 0 {
            return Err(invalid("length", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Streams the first coordinate `M^(1)` of one trial.
#[derive(Debug, Clone)]
pub struct MdmWalker {
    p: f64,
    moves: CounterRng,
    env_key: u64,
    /// `-1` mirrors every orientation.
    sign: i64,
    x: i64,
    y: i64,
}

impl MdmWalker {
    pub fn new(p: f64, seed: Seed) -> Self {
        Self::with_orientation(p, seed, false)
    }

    /// With `flipped`, the same move sequence runs in the mirrored
    /// environment `-xi`, which produces the path `-M^(1)`.
    pub fn with_orientation(p: f64, seed: Seed, flipped: bool) -> Self {
        Self {
            p,
            moves: seed.stream(Stream::Walk).rng(),
            env_key: seed.stream(Stream::Environment).0,
            sign: if flipped { -1 } else { 1 },
            x: 0,
            y: 0,
        }
    }

    /// `xi_y` in the unflipped environment.
    #[inline]
    pub fn orientation(&self, y: i64) -> i64 {
        if keyed(self.env_key, y as u64) >> 63 == 1 {
            1
        } else {
            -1
        }
    }

    /// Advances one step and returns `M^(1)`.
    #[inline]
    pub fn advance(&mut self) -> i64 {
        let u = self.moves.uniform();
        if u < self.p {
            self.x += self.sign * self.orientation(self.y);
        } else if u < self.p + 0.5 * (1.0 - self.p) {
            self.y -= 1;
        } else {
            self.y += 1;
        }
        self.x
    }

    pub fn position(&self) -> (i64, i64) {
        (self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdmTrial {
    pub path: PathSample,
    pub first_coord_stats: PathStats,
    pub t0_first: FirstReturn,
    /// Number of vertical lines `{x = const}` visited by `M_0..M_n`.
    pub vertical_line_range: usize,
}

fn trial_from_path(path: PathSample) -> Result<MdmTrial> {
    let first_coord_stats = path_stats(&path)?;
    let t0_first = first_coord_stats.t0()?;
    let vertical_line_range = first_coord_stats
        .range_count
        .expect("integer path has a range");
    Ok(MdmTrial {
        path,
        first_coord_stats,
        t0_first,
        vertical_line_range,
    })
}

pub fn sample_mdm(spec: &MdmSpec, seed: Seed) -> Result<MdmTrial> {
    sample_mdm_oriented(spec, seed, false)
}

/// Full trial in the environment `xi` or, with `flipped`, `-xi`.
pub fn sample_mdm_oriented(spec: &MdmSpec, seed: Seed, flipped: bool) -> Result<MdmTrial> {
    spec.validate()?;
    let mut walker = MdmWalker::with_orientation(spec.p, seed, flipped);
    let mut values = Vec::with_capacity(spec.length + 1);
    values.push(0.0);
    for _ in 0..spec.length {
        values.push(walker.advance() as f64);
    }
    trial_from_path(PathSample::from_values(values, true)?)
}

/// `T_0^(1)` within `horizon`, stopping at the first return.
pub fn first_return_time(p: f64, seed: Seed, horizon: usize) -> FirstReturn {
    let mut walker = MdmWalker::new(p, seed);
    for k in 1..=horizon {
        if walker.advance() == 0 {
            return FirstReturn::At(k);
        }
    }
    FirstReturn::Censored
}

/// `K_p = p (1 - p)^{-1/4}`, the scale of `M^(1)_{nt} / n^{3/4}` relative to
/// the standard Kesten–Spitzer process.
pub fn mdm_scale(p: f64) -> Result<f64> {
    validate_p(p)?;
    Ok(p * (1.0 - p).powf(-0.25))
}

/// `(K_p, kappa)` where `kappa = 3/2 K_p E[sup Delta]` is the limit of
/// `n^{1/4} P(T_0^(1) > n)`.
pub fn mdm_constants(p: f64, sup_delta_mean: f64) -> Result<(f64, f64)> {
    if !(sup_delta_mean > 0.0 && sup_delta_mean.is_finite()) {
        return Err(invalid(
            "sup_delta_mean",
            format!("must be positive, got {sup_delta_mean}"),
        ));
    }
    let k = mdm_scale(p)?;
    Ok((k, 1.5 * k * sup_delta_mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn historical_constants() {
        let (k, kappa) = mdm_constants(1.0 / 3.0, 0.54).unwrap();
        assert!((k - (1.0 / 3.0) * 1.5f64.powf(0.25)).abs() < 1e-15);
        assert!((k - 0.36889).abs() < 1e-5);
        let three_halves_k = 1.5 * k;
        assert!((three_halves_k - (3.0f64 / 32.0).powf(0.25)).abs() < 1e-15);
        assert!((three_halves_k - 0.55334).abs() < 1e-5);
        assert!((kappa - 0.2988).abs() < 1e-4);
    }

    #[test]
    fn scale_is_increasing_in_p() {
        let mut prev = 0.0;
        for i in 1..1000 {
            let k = mdm_scale(i as f64 / 1000.0).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(MdmSpec::new(1.5, 10).is_err());
        assert!(MdmSpec::new(0.0, 10).is_err());
        assert!(MdmSpec::new(0.5, 0).is_err());
        assert!(mdm_constants(0.5, 0.0).is_err());
    }

    #[test]
    fn flipped_environment_mirrors_the_path() {
        let spec = MdmSpec::new(1.0 / 3.0, 300).unwrap();
        for t in 0..20 {
            let s = Seed(2).derive(t);
            let a = sample_mdm_oriented(&spec, s, false).unwrap();
            let b = sample_mdm_oriented(&spec, s, true).unwrap();
            for (x, y) in a.path.values().iter().zip(b.path.values()) {
                assert_eq!(*x, -*y);
            }
            assert_eq!(a.t0_first, b.t0_first);
        }
    }

    #[test]
    fn lines_keep_their_orientation() {
        let mut w = MdmWalker::new(0.5, Seed(77));
        let mut seen = std::collections::HashMap::new();
        for _ in 0..5000 {
            let (x0, y) = w.position();
            let x1 = w.advance();
            if w.position().1 == y && x1 != x0 {
                let dir = x1 - x0;
                assert_eq!(*seen.entry(y).or_insert(dir), dir);
            }
        }
        assert!(seen.len() > 5);
    }

    #[test]
    fn early_exit_agrees_with_full_trial() {
        let spec = MdmSpec::new(1.0 / 3.0, 500).unwrap();
        for t in 0..50 {
            let s = Seed(5).derive(t);
            assert_eq!(
                first_return_time(spec.p, s, spec.length),
                sample_mdm(&spec, s).unwrap().t0_first
            );
        }
    }
}
