//! Monte Carlo estimation, exponent fitting and the exact enumeration oracle.

mod brute;
mod estimate;
mod fit;
mod identities;

pub use brute::{
    brute_force_persistence, enumerate, BruteScenery, BruteSystem, ExactResult, ExactSummary,
    ENUMERATION_BUDGET, MAX_BRUTE_HORIZON,
};
pub use estimate::{
    estimate_mean_max, estimate_mean_max_grid, estimate_persistence, estimate_persistence_grid,
    wilson_interval, MeanMaxEstimate, PersistenceEstimate, PersistenceEvent, MIN_TRIALS, Z95,
};
pub use fit::{fit_exponent, ExponentFit, MIN_FIT_POINTS};
pub use identities::{
    verify_identities_exact, verify_identities_mc, CheckStatus, IdentityCheck, IdentityReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{FgnSampler, FgnScratch, FgnSpec};
use crate::lattice::{WalkKind, WalkLaw, WalkStepper};
use crate::mdm::{validate_p, MdmWalker};
use crate::path::PathSample;
use crate::rng::{CounterRng, Seed, Stream};
use crate::rwrs::{RwrsProcess, ScalingSequence, SceneryLaw};

/// Declarative description of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum ProcessSpec {
    /// Partial sums of fractional Gaussian noise.
    Fgn { hurst: f64 },
    /// A one-dimensional walk observed directly.
    Walk { walk: WalkLaw },
    /// Random walk in random scenery.
    Rwrs { walk: WalkLaw, scenery: SceneryLaw },
    /// First coordinate of the Matheron–de Marsily walk.
    Mdm { p: f64 },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Fgn { hurst } => FgnSpec {
                hurst: *hurst,
                length: 1,
            }
            .validate(),
            ProcessSpec::Walk { walk } => {
                walk.validate()?;
                if walk.dimension != 1 {
                    return Err(invalid("dimension", "an observed walk must be one-dimensional"));
                }
                Ok(())
            }
            ProcessSpec::Rwrs { walk, scenery } => {
                walk.validate()?;
                scenery.validate()
            }
            ProcessSpec::Mdm { p } => validate_p(*p),
        }
    }

    pub fn integer_valued(&self) -> bool {
        match self {
            ProcessSpec::Fgn { .. } => false,
            ProcessSpec::Walk { .. } | ProcessSpec::Mdm { .. } => true,
            ProcessSpec::Rwrs { scenery, .. } => scenery.integer_valued(),
        }
    }

    /// Increments lie in `{-1, 0, 1}` almost surely.
    pub fn unit_increments(&self) -> bool {
        match self {
            ProcessSpec::Fgn { .. } => false,
            ProcessSpec::Walk { walk } => walk.kind.nearest_neighbour(),
            ProcessSpec::Rwrs { scenery, .. } => scenery.unit_valued(),
            ProcessSpec::Mdm { .. } => true,
        }
    }

    /// `a_n` normalizing `max_{k<=n} Z_k`.
    pub fn scaling(&self, n: f64) -> Result<f64> {
        match self {
            ProcessSpec::Fgn { hurst } => Ok(n.powf(*hurst)),
            ProcessSpec::Walk { walk } => {
                if walk.dimension != 1 {
                    return Err(Error::RegimeNotCovered(
                        "observed walks are one-dimensional".into(),
                    ));
                }
                Ok(n.powf(1.0 / walk.kind.alpha()))
            }
            ProcessSpec::Rwrs { walk, scenery } => {
                Ok(ScalingSequence::new(walk.dimension, &walk.kind, scenery)?.a_n(n))
            }
            ProcessSpec::Mdm { .. } => Ok(n.powf(0.75)),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        fn walk_label(w: &WalkLaw) -> String {
            match w.kind {
                WalkKind::Simple => format!("simple d={}", w.dimension),
                WalkKind::Lazy { hold } => format!("lazy(h={hold}) d={}", w.dimension),
                WalkKind::Stable { alpha } => format!("stable(alpha={alpha}) d={}", w.dimension),
            }
        }
        match self {
            ProcessSpec::Fgn { hurst } => format!("fgn(H={hurst})"),
            ProcessSpec::Walk { walk } => format!("walk[{}]", walk_label(walk)),
            ProcessSpec::Rwrs { walk, scenery } => {
                format!("rwrs[{}; {:?}]", walk_label(walk), scenery)
            }
            ProcessSpec::Mdm { p } => format!("mdm(p={p})"),
        }
    }

    /// Draws one path of length `n` from trial seed `seed`.
    pub fn sample_path(&self, n: usize, seed: Seed) -> Result<PathSample> {
        let engine = Engine::new(self, n)?;
        let mut scratch = engine.scratch();
        let mut values = Vec::with_capacity(n + 1);
        engine.run_unit(&mut scratch, seed, &mut |sub, traj| {
            if sub == 0 {
                values.push(0.0);
                for _ in 0..n {
                    values.push(traj.advance());
                }
            }
        });
        PathSample::from_values(values, self.integer_valued())
    }
}

/// Per-spec state shared by all trials of an experiment.
pub(crate) enum Engine {
    Fgn(FgnSampler),
    Walk(WalkLaw),
    Rwrs(WalkLaw, SceneryLaw),
    Mdm(f64),
}

pub(crate) enum EngineScratch {
    Fgn {
        scratch: FgnScratch,
        first: Vec<f64>,
        second: Vec<f64>,
    },
    None,
}

/// One trajectory being advanced step by step.
pub(crate) enum Trajectory<'a> {
    Increments { incs: &'a [f64], k: usize, z: f64 },
    Walk {
        stepper: WalkStepper,
        rng: CounterRng,
        pos: [i64; 3],
    },
    Rwrs(RwrsProcess),
    Mdm(MdmWalker),
}

impl Trajectory<'_> {
    /// Next value `Z_k`.
    #[inline]
    pub(crate) fn advance(&mut self) -> f64 {
        match self {
            Trajectory::Increments { incs, k, z } => {
                *z += incs[*k];
                *k += 1;
                *z
            }
            Trajectory::Walk { stepper, rng, pos } => {
                stepper.step(rng, pos);
                pos[0] as f64
            }
            Trajectory::Rwrs(p) => p.advance(),
            Trajectory::Mdm(w) => w.advance() as f64,
        }
    }
}

impl Engine {
    /// Prepares trials of horizon `n_max`.
    pub(crate) fn new(spec: &ProcessSpec, n_max: usize) -> Result<Self> {
        spec.validate()?;
        if n_max == 0 {
            return Err(invalid("n", "horizon must be at least 1"));
        }
        Ok(match *spec {
            ProcessSpec::Fgn { hurst } => Engine::Fgn(FgnSampler::new(FgnSpec::new(hurst, n_max)?)?),
            ProcessSpec::Walk { walk } => Engine::Walk(walk),
            ProcessSpec::Rwrs { walk, scenery } => Engine::Rwrs(walk, scenery),
            ProcessSpec::Mdm { p } => Engine::Mdm(p),
        })
    }

    /// Trials produced by one unit of work.
    pub(crate) fn trials_per_unit(&self) -> u64 {
        match self {
            Engine::Fgn(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn scratch(&self) -> EngineScratch {
        match self {
            Engine::Fgn(s) => EngineScratch::Fgn {
                scratch: s.scratch(),
                first: Vec::new(),
                second: Vec::new(),
            },
            _ => EngineScratch::None,
        }
    }

    /// Runs the trials of one unit, handing each trajectory to `visit`
    /// together with its index inside the unit.
    pub(crate) fn run_unit(
        &self,
        scratch: &mut EngineScratch,
        seed: Seed,
        visit: &mut dyn FnMut(usize, &mut Trajectory<'_>),
    ) {
        match self {
            Engine::Fgn(sampler) => {
                let EngineScratch::Fgn {
                    scratch,
                    first,
                    second,
                } = scratch
                else {
                    unreachable!("fgn engine needs fgn scratch")
                };
                let mut rng = seed.stream(Stream::Noise).rng();
                sampler.sample_pair(&mut rng, scratch, first, second);
                for (sub, incs) in [&first[..], &second[..]].into_iter().enumerate() {
                    visit(sub, &mut Trajectory::Increments { incs, k: 0, z: 0.0 });
                }
            }
            Engine::Walk(law) => visit(
                0,
                &mut Trajectory::Walk {
                    stepper: WalkStepper::new(law.dimension, law.kind),
                    rng: seed.stream(Stream::Walk).rng(),
                    pos: [0; 3],
                },
            ),
            Engine::Rwrs(law, scenery) => visit(
                0,
                &mut Trajectory::Rwrs(RwrsProcess::from_trial_seed(
                    law.dimension,
                    law.kind,
                    *scenery,
                    seed,
                )),
            ),
            Engine::Mdm(p) => visit(0, &mut Trajectory::Mdm(MdmWalker::new(*p, seed))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_round_trip_through_json() {
        let spec = ProcessSpec::Rwrs {
            walk: WalkLaw {
                dimension: 1,
                kind: WalkKind::Lazy { hold: 0.25 },
            },
            scenery: SceneryLaw::LazyRademacher { q: 0.5 },
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProcessSpec>(&text).unwrap(), spec);
        let parsed: ProcessSpec = serde_json::from_str(
            r#"{"process":"rwrs","walk":{"dimension":2,"kind":"simple"},"scenery":{"law":"lazy_rademacher"}}"#,
        )
        .unwrap();
        assert_eq!(
            parsed,
            ProcessSpec::Rwrs {
                walk: WalkLaw {
                    dimension: 2,
                    kind: WalkKind::Simple
                },
                scenery: SceneryLaw::LazyRademacher { q: 0.5 }
            }
        );
    }

    #[test]
    fn sample_path_matches_stream_generators() {
        let seed = Seed(12);
        let spec = ProcessSpec::Mdm { p: 0.4 };
        let a = spec.sample_path(100, seed).unwrap();
        let b = crate::mdm::sample_mdm(&crate::mdm::MdmSpec::new(0.4, 100).unwrap(), seed).unwrap();
        assert_eq!(a, b.path);
    }

    #[test]
    fn observed_walks_are_one_dimensional() {
        let spec = ProcessSpec::Walk {
            walk: WalkLaw {
                dimension: 2,
                kind: WalkKind::Simple,
            },
        };
        assert!(spec.validate().is_err());
    }
}
