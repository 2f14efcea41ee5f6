//! Random walk in random scenery `Z_n = xi_{S_1} + ... + xi_{S_n}`.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{stable_transform, validate_walk, Site, WalkKind, WalkSpec, WalkStepper};
use crate::path::PathSample;
use crate::rng::{keyed, open_unit, pack_site, CounterRng, Seed, Stream};

pub const DEFAULT_LAZY_ZERO_PROBABILITY: f64 = 0.5;

fn default_q() -> f64 {
    DEFAULT_LAZY_ZERO_PROBABILITY
}

/// Law of the i.i.d. scenery values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum SceneryLaw {
    /// `+1` or `-1` with probability 1/2.
    Rademacher,
    /// `0` with probability `q`, otherwise a fair sign.
    LazyRademacher {
        #[serde(default = "default_q")]
        q: f64,
    },
    /// Standard normal.
    Gaussian,
    /// Uniform on `[-1, 1]`.
    BoundedUniform,
    /// Symmetric `beta`-stable, `exp(-|u|^beta)`.
    SymmetricStable { beta: f64 },
}

impl SceneryLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SceneryLaw::LazyRademacher { q } if !(0.0..1.0).contains(&q) => {
                Err(invalid("q", format!("must lie in [0, 1), got {q}")))
            }
            SceneryLaw::SymmetricStable { beta } if !(beta > 1.0 && beta < 2.0) => {
                Err(invalid("beta", format!("must lie in (1, 2), got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Stability index of the scenery; 2 for square-integrable laws.
    pub fn beta(&self) -> f64 {
        match *self {
            SceneryLaw::SymmetricStable { beta } => beta,
            _ => 2.0,
        }
    }

    pub fn integer_valued(&self) -> bool {
        matches!(
            self,
            SceneryLaw::Rademacher | SceneryLaw::LazyRademacher { .. }
        )
    }

    /// Values lie in `{-1, 0, 1}`.
    pub fn unit_valued(&self) -> bool {
        self.integer_valued()
    }
}

/// An infinite scenery, evaluated on demand at each site.
#[derive(Debug, Clone, Copy)]
pub struct Scenery {
    law: SceneryLaw,
    key: u64,
    scale: f64,
}

impl Scenery {
    pub fn new(law: SceneryLaw, seed: Seed) -> Self {
        Self {
            law,
            key: seed.0,
            scale: 1.0,
        }
    }

    /// Multiplies every value by `scale`.
    pub fn scaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn law(&self) -> SceneryLaw {
        self.law
    }

    #[inline]
    pub fn value(&self, site: &Site) -> f64 {
        let h = pack_site(site);
        let bits = keyed(self.key, h);
        let x = match self.law {
            SceneryLaw::Rademacher => {
                if bits >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            SceneryLaw::LazyRademacher { q } => {
                let u = open_unit(bits);
                if u < q {
                    0.0
                } else if u < q + 0.5 * (1.0 - q) {
                    -1.0
                } else {
                    1.0
                }
            }
            SceneryLaw::Gaussian => {
                let u1 = open_unit(bits);
                let u2 = open_unit(keyed(self.key ^ 0x6761_7573_7369_616e, h));
                (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
            }
            SceneryLaw::BoundedUniform => 2.0 * open_unit(bits) - 1.0,
            SceneryLaw::SymmetricStable { beta } => {
                let u1 = open_unit(bits);
                let u2 = open_unit(keyed(self.key ^ 0x7374_6162_6c65_0000, h));
                stable_transform(beta, FRAC_PI_2 * (2.0 * u1 - 1.0), -u2.ln())
            }
        };
        x * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwrsSpec {
    pub walk: WalkSpec,
    pub scenery: SceneryLaw,
}

impl RwrsSpec {
    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        self.scenery.validate()
    }

    pub fn length(&self) -> usize {
        self.walk.length
    }
}

/// Streams `Z_1, Z_2, ...` of one RWRS trial.
#[derive(Debug, Clone)]
pub struct RwrsProcess {
    stepper: WalkStepper,
    walk_rng: CounterRng,
    scenery: Scenery,
    pos: Site,
    z: f64,
}

impl RwrsProcess {
    /// Walk and scenery come from separate seeds, so either can be held
    /// fixed while the other varies.
    pub fn new(
        dimension: usize,
        kind: WalkKind,
        scenery: Scenery,
        walk_seed: Seed,
    ) -> Self {
        Self {
            stepper: WalkStepper::new(dimension, kind),
            walk_rng: walk_seed.rng(),
            scenery,
            pos: [0; 3],
            z: 0.0,
        }
    }

    /// Walk and scenery sub-streams of a trial seed.
    pub fn from_trial_seed(dimension: usize, kind: WalkKind, law: SceneryLaw, seed: Seed) -> Self {
        Self::new(
            dimension,
            kind,
            Scenery::new(law, seed.stream(Stream::Scenery)),
            seed.stream(Stream::Walk),
        )
    }

    #[inline]
    pub fn advance(&mut self) -> f64 {
        self.stepper.step(&mut self.walk_rng, &mut self.pos);
        self.z += self.scenery.value(&self.pos);
        self.z
    }

    pub fn position(&self) -> Site {
        self.pos
    }

    pub fn value(&self) -> f64 {
        self.z
    }
}

pub fn sample_rwrs(spec: &RwrsSpec, seed: Seed) -> Result<PathSample> {
    spec.validate()?;
    let mut proc =
        RwrsProcess::from_trial_seed(spec.walk.dimension, spec.walk.kind, spec.scenery, seed);
    let n = spec.length();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for _ in 0..n {
        values.push(proc.advance());
    }
    PathSample::from_values(values, spec.scenery.integer_valued())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// `d = 1`, walk in the domain of an `alpha`-stable law.
    D1Alpha { alpha: f64 },
    /// `alpha = d = 2`.
    Critical,
    Transient,
}

/// Normalizing sequence of `max_{k<=n} Z_k` and the persistence exponent it
/// predicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSequence {
    pub regime: Regime,
    pub beta: f64,
    /// Regular-variation exponent of `a_n`.
    pub gamma: f64,
}

impl ScalingSequence {
    pub fn new(dimension: usize, kind: &WalkKind, law: &SceneryLaw) -> Result<Self> {
        validate_walk(dimension, kind).map_err(|e| Error::RegimeNotCovered(e.to_string()))?;
        law.validate()
            .map_err(|e| Error::RegimeNotCovered(e.to_string()))?;
        let beta = law.beta();
        let regime = match (dimension, kind.nearest_neighbour()) {
            (1, _) => Regime::D1Alpha {
                alpha: kind.alpha(),
            },
            (2, true) => Regime::Critical,
            (3, true) => Regime::Transient,
            _ => {
                return Err(Error::RegimeNotCovered(format!(
                    "d = {dimension} with {kind:?}"
                )))
            }
        };
        let gamma = match regime {
            Regime::D1Alpha { alpha } => 1.0 - 1.0 / alpha + 1.0 / (alpha * beta),
            Regime::Critical | Regime::Transient => 1.0 / beta,
        };
        Ok(Self {
            regime,
            beta,
            gamma,
        })
    }

    /// Slowly varying factor of `a_n` (non-trivial only at `alpha = d`).
    pub fn log_factor(&self, n: f64) -> f64 {
        match self.regime {
            Regime::Critical => n.ln().powf(1.0 - 1.0 / self.beta),
            _ => 1.0,
        }
    }

    pub fn a_n(&self, n: f64) -> f64 {
        n.powf(self.gamma) * self.log_factor(n)
    }

    /// `theta = 1 - gamma`.
    pub fn persistence_exponent(&self) -> f64 {
        1.0 - self.gamma
    }
}

/// `(a_n, persistence exponent)`.
pub fn scaling_for(walk: &WalkSpec, scenery: &SceneryLaw, n: f64) -> Result<(f64, f64)> {
    let s = ScalingSequence::new(walk.dimension, &walk.kind, scenery)?;
    Ok((s.a_n(n), s.persistence_exponent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_walk, WalkSpec};

    #[test]
    fn one_dimensional_diffusive_scaling() {
        let walk = WalkSpec::new(1, WalkKind::Simple, 16).unwrap();
        let (a, theta) = scaling_for(&walk, &SceneryLaw::Rademacher, 16.0).unwrap();
        assert!((a - 8.0).abs() < 1e-12);
        assert!((theta - 0.25).abs() < 1e-15);
    }

    #[test]
    fn transient_scaling() {
        let walk = WalkSpec::new(3, WalkKind::Simple, 100).unwrap();
        let (a, theta) = scaling_for(&walk, &SceneryLaw::Gaussian, 100.0).unwrap();
        assert!((a - 10.0).abs() < 1e-12);
        assert_eq!(theta, 0.5);
    }

    #[test]
    fn critical_scaling() {
        let walk = WalkSpec::new(2, WalkKind::Simple, 100).unwrap();
        let e2 = std::f64::consts::E.powi(2);
        let (a, theta) = scaling_for(&walk, &SceneryLaw::Rademacher, e2).unwrap();
        assert!((a - std::f64::consts::E * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(theta, 0.5);
    }

    #[test]
    fn stable_walk_and_stable_scenery_exponent() {
        let s = ScalingSequence::new(
            1,
            &WalkKind::Stable { alpha: 1.5 },
            &SceneryLaw::SymmetricStable { beta: 1.5 },
        )
        .unwrap();
        assert!((s.gamma - (1.0 - 1.0 / 1.5 + 1.0 / 2.25)).abs() < 1e-15);
        let g = ScalingSequence::new(1, &WalkKind::Stable { alpha: 1.5 }, &SceneryLaw::Gaussian)
            .unwrap();
        assert!((g.persistence_exponent() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_regimes() {
        assert!(matches!(
            ScalingSequence::new(2, &WalkKind::Stable { alpha: 1.5 }, &SceneryLaw::Gaussian),
            Err(Error::RegimeNotCovered(_))
        ));
        assert!(matches!(
            ScalingSequence::new(1, &WalkKind::Simple, &SceneryLaw::SymmetricStable { beta: 0.8 }),
            Err(Error::RegimeNotCovered(_))
        ));
    }

    #[test]
    fn revisits_reuse_the_scenery_value() {
        let seed = Seed(17);
        let law = SceneryLaw::Gaussian;
        let spec = RwrsSpec {
            walk: WalkSpec::new(1, WalkKind::Simple, 200).unwrap(),
            scenery: law,
        };
        let z = sample_rwrs(&spec, seed).unwrap();
        let walk = sample_walk(&spec.walk, seed).unwrap();
        let scenery = Scenery::new(law, seed.stream(Stream::Scenery));
        let mut seen = std::collections::HashMap::new();
        let mut acc = 0.0;
        for (k, site) in walk.sites.iter().enumerate().skip(1) {
            let xi = scenery.value(site);
            assert_eq!(*seen.entry(*site).or_insert(xi), xi);
            acc += xi;
            assert_eq!(z.values()[k], acc);
        }
        assert!(seen.len() < 200, "walk must revisit sites");
    }

    #[test]
    fn integer_flag_follows_law() {
        let walk = WalkSpec::new(1, WalkKind::Simple, 10).unwrap();
        let a = sample_rwrs(
            &RwrsSpec {
                walk,
                scenery: SceneryLaw::LazyRademacher { q: 0.5 },
            },
            Seed(1),
        )
        .unwrap();
        assert!(a.integer_valued());
        let b = sample_rwrs(
            &RwrsSpec {
                walk,
                scenery: SceneryLaw::BoundedUniform,
            },
            Seed(1),
        )
        .unwrap();
        assert!(!b.integer_valued());
        assert!(b.increments().all(|x| x.abs() <= 1.0));
    }
}
