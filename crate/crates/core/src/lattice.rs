//! Random walks on `Z^d` and their occupation statistics.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{CoinFlips, Seed, Stream};

pub type Site = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WalkKind {
    /// Nearest-neighbour steps, each of the `2d` directions equally likely.
    Simple,
    /// Holds with probability `hold`, otherwise a simple step.
    Lazy { hold: f64 },
    /// Integer-rounded symmetric `alpha`-stable steps, `d = 1` only.
    Stable { alpha: f64 },
}

impl WalkKind {
    /// Index of the stable law in whose domain the walk lies.
    pub fn alpha(&self) -> f64 {
        match *self {
            WalkKind::Stable { alpha } => alpha,
            _ => 2.0,
        }
    }

    /// Steps are nearest-neighbour (or holds).
    pub fn nearest_neighbour(&self) -> bool {
        !matches!(self, WalkKind::Stable { .. })
    }
}

/// Step law of a walk without a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkLaw {
    pub dimension: usize,
    #[serde(flatten)]
    pub kind: WalkKind,
}

impl WalkLaw {
    pub fn validate(&self) -> Result<()> {
        validate_walk(self.dimension, &self.kind)
    }

    pub fn with_length(&self, length: usize) -> WalkSpec {
        WalkSpec {
            dimension: self.dimension,
            kind: self.kind,
            length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub dimension: usize,
    #[serde(flatten)]
    pub kind: WalkKind,
    pub length: usize,
}

impl WalkSpec {
    pub fn new(dimension: usize, kind: WalkKind, length: usize) -> Result<Self> {
        let spec = Self {
            dimension,
            kind,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        validate_walk(self.dimension, &self.kind)?;
        if self.length == 0 {
            return Err(invalid("length", "must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn validate_walk(dimension: usize, kind: &WalkKind) -> Result<()> {
    if !(1..=3).contains(&dimension) {
        return Err(invalid("dimension", format!("must be 1, 2 or 3, got {dimension}")));
    }
    match *kind {
        WalkKind::Simple => {}
        WalkKind::Lazy { hold } => {
            if !(0.0..1.0).contains(&hold) {
                return Err(invalid("hold", format!("must lie in [0, 1), got {hold}")));
            }
        }
        WalkKind::Stable { alpha } => {
            if dimension != 1 {
                return Err(invalid("dimension", "stable walks are one-dimensional"));
            }
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(invalid("alpha", format!("must lie in (1, 2), got {alpha}")));
            }
        }
    }
    Ok(())
}

/// Symmetric `alpha`-stable variate with characteristic function
/// `exp(-|u|^alpha)` (Chambers–Mallows–Stuck).
#[inline]
pub fn stable_draw<R: RngCore>(alpha: f64, rng: &mut R) -> f64 {
    let v = FRAC_PI_2 * (2.0 * open01(rng) - 1.0);
    let w = -open01(rng).ln();
    stable_transform(alpha, v, w)
}

/// CMS map of `V ~ U(-pi/2, pi/2)` and `W ~ Exp(1)`.
#[inline]
pub fn stable_transform(alpha: f64, v: f64, w: f64) -> f64 {
    if alpha == 2.0 {
        return 2.0 * v.sin() * w.sqrt();
    }
    let av = alpha * v;
    av.sin() / v.cos().powf(1.0 / alpha) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
}

#[inline]
fn open01<R: RngCore>(rng: &mut R) -> f64 {
    crate::rng::open_unit(rng.next_u64())
}

/// One symmetric stable draw from `seed`.
pub fn sample_stable_step(alpha: f64, seed: Seed) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(invalid("alpha", format!("must lie in (1, 2], got {alpha}")));
    }
    Ok(stable_draw(alpha, &mut seed.rng()))
}

/// Draws i.i.d. increments of a walk.
#[derive(Debug, Clone)]
pub struct WalkStepper {
    dimension: usize,
    kind: WalkKind,
    coins: CoinFlips,
}

impl WalkStepper {
    pub fn new(dimension: usize, kind: WalkKind) -> Self {
        Self {
            dimension,
            kind,
            coins: CoinFlips::default(),
        }
    }

    /// Applies one increment to `pos`.
    #[inline]
    pub fn step<R: RngCore>(&mut self, rng: &mut R, pos: &mut Site) {
        match self.kind {
            WalkKind::Simple => self.nearest(rng, pos),
            WalkKind::Lazy { hold } => {
                if rng.random::<f64>() >= hold {
                    self.nearest(rng, pos);
                }
            }
            WalkKind::Stable { alpha } => {
                pos[0] += stable_draw(alpha, rng).round() as i64;
            }
        }
    }

    #[inline]
    fn nearest<R: RngCore>(&mut self, rng: &mut R, pos: &mut Site) {
        let axis = if self.dimension == 1 {
            0
        } else {
            rng.random_range(0..self.dimension)
        };
        pos[axis] += if self.coins.flip(rng) { 1 } else { -1 };
    }
}

/// `S_0..S_n` on `Z^d`; unused coordinates stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    pub dimension: usize,
    pub sites: Vec<Site>,
}

impl LatticePath {
    pub fn len(&self) -> usize {
        self.sites.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One-dimensional path from integer positions (starting at 0).
    pub fn from_positions(positions: &[i64]) -> Self {
        Self {
            dimension: 1,
            sites: positions.iter().map(|&x| [x, 0, 0]).collect(),
        }
    }
}

pub fn sample_walk(spec: &WalkSpec, seed: Seed) -> Result<LatticePath> {
    spec.validate()?;
    let mut rng = seed.stream(Stream::Walk).rng();
    let mut stepper = WalkStepper::new(spec.dimension, spec.kind);
    let mut pos = [0i64; 3];
    let mut sites = Vec::with_capacity(spec.length + 1);
    sites.push(pos);
    for _ in 0..spec.length {
        stepper.step(&mut rng, &mut pos);
        sites.push(pos);
    }
    Ok(LatticePath {
        dimension: spec.dimension,
        sites,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationStats {
    /// `R_n = #{S_1..S_n}`.
    pub walk_range: usize,
    /// `V_n = sum_y N_n(y)^2`.
    pub self_intersections: u64,
    /// `V_n(beta) = sum_y N_n(y)^beta`.
    pub v_beta: f64,
    /// `N_n(y)` for every visited `y`.
    pub visits: HashMap<Site, u64>,
}

impl OccupationStats {
    pub fn visits_to(&self, site: Site) -> u64 {
        self.visits.get(&site).copied().unwrap_or(0)
    }
}

/// Local times `N_n(y) = #{k = 1..n : S_k = y}` and their moments.
pub fn occupation_stats(path: &LatticePath, beta: f64) -> OccupationStats {
    let mut visits: HashMap<Site, u64> = HashMap::with_capacity(path.len());
    for site in path.sites.iter().skip(1) {
        *visits.entry(*site).or_insert(0) += 1;
    }
    let self_intersections = visits.values().map(|&c| c * c).sum();
    let v_beta = visits.values().map(|&c| (c as f64).powf(beta)).sum();
    OccupationStats {
        walk_range: visits.len(),
        self_intersections,
        v_beta,
        visits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_occupation() {
        let path = LatticePath::from_positions(&[0, 1, 0, 1]);
        let occ = occupation_stats(&path, 2.0);
        assert_eq!(occ.walk_range, 2);
        assert_eq!(occ.visits_to([0, 0, 0]), 1);
        assert_eq!(occ.visits_to([1, 0, 0]), 2);
        assert_eq!(occ.self_intersections, 5);
        assert_eq!(occ.v_beta, 5.0);
        assert_eq!(occupation_stats(&path, 1.0).v_beta, 3.0);
    }

    #[test]
    fn walk_starts_at_origin_and_is_deterministic() {
        let spec = WalkSpec::new(2, WalkKind::Simple, 50).unwrap();
        let a = sample_walk(&spec, Seed(3)).unwrap();
        assert_eq!(a.sites[0], [0, 0, 0]);
        assert_eq!(a, sample_walk(&spec, Seed(3)).unwrap());
        for w in a.sites.windows(2) {
            let d: i64 = (0..3).map(|i| (w[1][i] - w[0][i]).abs()).sum();
            assert_eq!(d, 1);
            assert_eq!(w[1][2], 0);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(WalkSpec::new(0, WalkKind::Simple, 5).is_err());
        assert!(WalkSpec::new(4, WalkKind::Simple, 5).is_err());
        assert!(WalkSpec::new(2, WalkKind::Stable { alpha: 1.5 }, 5).is_err());
        assert!(WalkSpec::new(1, WalkKind::Stable { alpha: 0.9 }, 5).is_err());
        assert!(WalkSpec::new(1, WalkKind::Lazy { hold: 1.0 }, 5).is_err());
        assert!(WalkSpec::new(1, WalkKind::Simple, 0).is_err());
        assert!(sample_stable_step(1.0, Seed(0)).is_err());
        assert!(sample_stable_step(2.0, Seed(0)).is_ok());
    }

    #[test]
    fn alpha_two_transform_matches_closed_form() {
        // sin(2v)/sqrt(cos v) * (cos v / w)^{-1/2} = 2 sin v sqrt(w)
        for &(v, w) in &[(0.3, 1.2), (-1.1, 0.4), (1.5, 3.0)] {
            let general = {
                let a: f64 = 2.0;
                (a * v).sin() / v.cos().powf(1.0 / a) * ((v - a * v).cos() / w).powf((1.0 - a) / a)
            };
            assert!((general - stable_transform(2.0, v, w)).abs() < 1e-12);
        }
    }
}
