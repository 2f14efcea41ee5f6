//! Exact enumeration of small integer-valued systems.
//!
//! Every move sequence is enumerated together with every assignment of
//! scenery values (or line orientations) to the sites it touches. Scenery
//! values are branched on lazily, the first time a site is visited, so each
//! leaf is one equivalence class of (walk, scenery) outcomes and carries its
//! exact rational probability.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ProcessSpec;
use crate::error::{Error, Result};
use crate::lattice::WalkKind;
use crate::rwrs::SceneryLaw;

pub const MAX_BRUTE_HORIZON: usize = 8;
/// Maximum number of enumerated leaves.
pub const ENUMERATION_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum BruteScenery {
    Rademacher,
    /// `0` with probability `q`, `+/-1` with `(1 - q) / 2` each.
    LazyRademacher { q: BigRational },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BruteSystem {
    /// `Z = S`; `hold = None` is the simple walk.
    Walk { hold: Option<BigRational> },
    /// One-dimensional RWRS.
    Rwrs {
        hold: Option<BigRational>,
        scenery: BruteScenery,
    },
    /// First coordinate of the MdM walk.
    Mdm { p: BigRational },
}

fn rational(x: f64, field: &'static str) -> Result<BigRational> {
    let r = Ratio::<i64>::approximate_float(x).ok_or_else(|| Error::InvalidParameter {
        field,
        reason: format!("{x} has no rational approximation"),
    })?;
    Ok(BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom())))
}

fn probability(r: &BigRational, field: &'static str) -> Result<()> {
    if r.is_negative() || *r >= BigRational::one() {
        return Err(Error::InvalidParameter {
            field,
            reason: format!("must lie in [0, 1), got {r}"),
        });
    }
    Ok(())
}

impl BruteSystem {
    pub fn simple_walk() -> Self {
        BruteSystem::Walk { hold: None }
    }

    pub fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BruteSystem::Walk { hold } => hold.iter().try_for_each(|h| probability(h, "hold")),
            BruteSystem::Rwrs { hold, scenery } => {
                hold.iter().try_for_each(|h| probability(h, "hold"))?;
                if let BruteScenery::LazyRademacher { q } = scenery {
                    probability(q, "q")?;
                }
                Ok(())
            }
            BruteSystem::Mdm { p } => {
                if !p.is_positive() || *p >= BigRational::one() {
                    return Err(Error::InvalidParameter {
                        field: "p",
                        reason: format!("must lie in (0, 1), got {p}"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Exact counterpart of a Monte Carlo generator, where one exists.
    pub fn from_process(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let hold = |kind: &WalkKind| -> Result<Option<BigRational>> {
            match *kind {
                WalkKind::Simple => Ok(None),
                WalkKind::Lazy { hold } => Ok(Some(rational(hold, "hold")?)),
                WalkKind::Stable { .. } => Err(Error::UnsupportedSystem(
                    "stable walks have unbounded branching".into(),
                )),
            }
        };
        let system = match spec {
            ProcessSpec::Walk { walk } => BruteSystem::Walk {
                hold: hold(&walk.kind)?,
            },
            ProcessSpec::Rwrs { walk, scenery } => {
                if walk.dimension != 1 {
                    return Err(Error::UnsupportedSystem(
                        "exact enumeration covers one-dimensional walks".into(),
                    ));
                }
                let scenery = match *scenery {
                    SceneryLaw::Rademacher => BruteScenery::Rademacher,
                    SceneryLaw::LazyRademacher { q } => BruteScenery::LazyRademacher {
                        q: rational(q, "q")?,
                    },
                    other => {
                        return Err(Error::UnsupportedSystem(format!(
                            "scenery {other:?} is not finitely supported"
                        )))
                    }
                };
                BruteSystem::Rwrs {
                    hold: hold(&walk.kind)?,
                    scenery,
                }
            }
            ProcessSpec::Mdm { p } => BruteSystem::Mdm { p: rational(*p, "p")? },
            ProcessSpec::Fgn { .. } => {
                return Err(Error::UnsupportedSystem(
                    "Gaussian processes are not enumerable".into(),
                ))
            }
        };
        system.validate()?;
        Ok(system)
    }
}

fn half() -> BigRational {
    BruteSystem::ratio(1, 2)
}

fn walk_moves(hold: &Option<BigRational>) -> Vec<(i64, BigRational)> {
    let moves = match hold {
        None => vec![(-1, half()), (1, half())],
        Some(h) => {
            let side = (BigRational::one() - h) * half();
            vec![(0, h.clone()), (-1, side.clone()), (1, side)]
        }
    };
    moves.into_iter().filter(|(_, w)| !w.is_zero()).collect()
}

fn scenery_values(s: &BruteScenery) -> Vec<(i64, BigRational)> {
    let values = match s {
        BruteScenery::Rademacher => vec![(-1, half()), (1, half())],
        BruteScenery::LazyRademacher { q } => {
            let side = (BigRational::one() - q) * half();
            vec![(0, q.clone()), (-1, side.clone()), (1, side)]
        }
    };
    values.into_iter().filter(|(_, w)| !w.is_zero()).collect()
}

struct Dfs<'a> {
    n: usize,
    moves: Vec<(i64, BigRational)>,
    values: Vec<(i64, BigRational)>,
    vertical: BigRational,
    path: Vec<i64>,
    /// Sites already carrying a scenery value or orientation.
    assigned: Vec<(i64, i64)>,
    leaves: u64,
    visit: &'a mut dyn FnMut(&BigRational, &[i64]),
}

impl Dfs<'_> {
    fn lookup(&self, site: i64) -> Option<i64> {
        self.assigned
            .iter()
            .find(|(s, _)| *s == site)
            .map(|&(_, v)| v)
    }

    fn leaf(&mut self, weight: &BigRational) -> Result<()> {
        self.leaves += 1;
        if self.leaves > ENUMERATION_BUDGET {
            return Err(Error::BudgetExceeded(ENUMERATION_BUDGET));
        }
        (self.visit)(weight, &self.path);
        Ok(())
    }

    /// Appends `z`, recurses with the walk at `s`, then undoes.
    fn descend(&mut self, z: i64, s: i64, weight: &BigRational, next: fn(&mut Self, i64, &BigRational) -> Result<()>) -> Result<()> {
        self.path.push(z);
        let r = next(self, s, weight);
        self.path.pop();
        r
    }

    fn walk(&mut self, s: i64, weight: &BigRational) -> Result<()> {
        if self.path.len() > self.n {
            return self.leaf(weight);
        }
        for i in 0..self.moves.len() {
            let (dm, ref wm) = self.moves[i];
            let w = weight * wm;
            self.descend(s + dm, s + dm, &w, Self::walk)?;
        }
        Ok(())
    }

    fn rwrs(&mut self, s: i64, weight: &BigRational) -> Result<()> {
        if self.path.len() > self.n {
            return self.leaf(weight);
        }
        let z = *self.path.last().unwrap();
        for i in 0..self.moves.len() {
            let (dm, ref wm) = self.moves[i];
            let site = s + dm;
            let w = weight * wm;
            match self.lookup(site) {
                Some(v) => self.descend(z + v, site, &w, Self::rwrs)?,
                None => {
                    for j in 0..self.values.len() {
                        let (v, ref wv) = self.values[j];
                        let wj = &w * wv;
                        self.assigned.push((site, v));
                        let r = self.descend(z + v, site, &wj, Self::rwrs);
                        self.assigned.pop();
                        r?;
                    }
                }
            }
        }
        Ok(())
    }

    /// `s` is the vertical coordinate; the path holds the first coordinate.
    fn mdm(&mut self, y: i64, weight: &BigRational) -> Result<()> {
        if self.path.len() > self.n {
            return self.leaf(weight);
        }
        let x = *self.path.last().unwrap();
        // horizontal move along line y; the orientation table sits in `values`
        let wp = weight * &self.moves[0].1;
        match self.lookup(y) {
            Some(o) => self.descend(x + o, y, &wp, Self::mdm)?,
            None => {
                for o in [-1i64, 1] {
                    let wo = &wp * half();
                    self.assigned.push((y, o));
                    let r = self.descend(x + o, y, &wo, Self::mdm);
                    self.assigned.pop();
                    r?;
                }
            }
        }
        let wv = weight * &self.vertical;
        self.descend(x, y - 1, &wv, Self::mdm)?;
        self.descend(x, y + 1, &wv, Self::mdm)
    }
}

/// Calls `visit(probability, path)` for every leaf and returns the number of
/// leaves. Paths are `Z_0..Z_n` with `Z_0 = 0`.
pub fn enumerate(
    system: &BruteSystem,
    n: usize,
    visit: &mut dyn FnMut(&BigRational, &[i64]),
) -> Result<u64> {
    system.validate()?;
    if n == 0 || n > MAX_BRUTE_HORIZON {
        return Err(Error::InvalidParameter {
            field: "n",
            reason: format!("exact enumeration needs 1 <= n <= {MAX_BRUTE_HORIZON}, got {n}"),
        });
    }
    let (moves, values, vertical) = match system {
        BruteSystem::Walk { hold } => (walk_moves(hold), vec![], BigRational::zero()),
        BruteSystem::Rwrs { hold, scenery } => {
            (walk_moves(hold), scenery_values(scenery), BigRational::zero())
        }
        BruteSystem::Mdm { p } => (
            vec![(0, p.clone())],
            vec![],
            (BigRational::one() - p) * half(),
        ),
    };
    let mut dfs = Dfs {
        n,
        moves,
        values,
        vertical,
        path: vec![0],
        assigned: Vec::new(),
        leaves: 0,
        visit,
    };
    let one = BigRational::one();
    match system {
        BruteSystem::Walk { .. } => dfs.walk(0, &one)?,
        BruteSystem::Rwrs { .. } => dfs.rwrs(0, &one)?,
        BruteSystem::Mdm { .. } => dfs.mdm(0, &one)?,
    }
    Ok(dfs.leaves)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub probability: BigRational,
    pub enumerated_states: u64,
}

impl ExactResult {
    pub fn to_f64(&self) -> f64 {
        self.probability.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact `P(max_{1..n} Z <= level)`.
pub fn brute_force_persistence(system: &BruteSystem, n: usize, level: i64) -> Result<ExactResult> {
    let mut probability = BigRational::zero();
    let enumerated_states = enumerate(system, n, &mut |w, path| {
        if path[1..].iter().all(|&z| z <= level) {
            probability += w;
        }
    })?;
    Ok(ExactResult {
        probability,
        enumerated_states,
    })
}

/// Every exact quantity the identity checks need, from one enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSummary {
    pub n: usize,
    pub leaves: u64,
    pub total_probability: BigRational,
    /// `P(max_{1..n} Z <= -1)`.
    pub p_max_below: BigRational,
    /// `P(T_0 > k)` for `k = 0..n`.
    pub p_survival: Vec<BigRational>,
    /// `E[#{Z_0..Z_n}]`.
    pub expected_range: BigRational,
    /// `E[max_{0..n} Z]`.
    pub expected_max: BigRational,
    /// Leaves whose increments leave `{-1, 0, 1}`.
    pub non_unit_leaves: u64,
    /// Unit-increment leaves with `#{Z_0..Z_n} != max - min + 1`.
    pub range_violations: u64,
    /// Unit-increment leaves where `{max <= -1}` differs from
    /// `{T_0 > n, Z_1 <= -1}`.
    pub event_violations: u64,
}

impl ExactSummary {
    pub fn compute(system: &BruteSystem, n: usize) -> Result<Self> {
        let mut total = BigRational::zero();
        let mut p_max_below = BigRational::zero();
        let mut p_survival = vec![BigRational::zero(); n + 1];
        let mut expected_range = BigRational::zero();
        let mut expected_max = BigRational::zero();
        let mut non_unit_leaves = 0;
        let mut range_violations = 0;
        let mut event_violations = 0;
        let mut distinct = Vec::with_capacity(n + 1);
        let leaves = enumerate(system, n, &mut |w, path| {
            total += w;
            let max_1n = *path[1..].iter().max().unwrap();
            let max_0n = max_1n.max(0);
            let min_0n = (*path[1..].iter().min().unwrap()).min(0);
            let t0 = path[1..].iter().position(|&z| z == 0).map(|i| i + 1);
            let below = max_1n <= -1;
            if below {
                p_max_below += w;
            }
            let survive_until = t0.map_or(n, |t| t - 1);
            for p in p_survival.iter_mut().take(survive_until + 1) {
                *p += w;
            }
            distinct.clear();
            distinct.extend_from_slice(path);
            distinct.sort_unstable();
            distinct.dedup();
            expected_range += w * BigRational::from_integer(BigInt::from(distinct.len()));
            expected_max += w * BigRational::from_integer(BigInt::from(max_0n));
            if path.windows(2).all(|d| (d[1] - d[0]).abs() <= 1) {
                if distinct.len() as i64 != max_0n - min_0n + 1 {
                    range_violations += 1;
                }
                if below != (t0.is_none() && path[1] <= -1) {
                    event_violations += 1;
                }
            } else {
                non_unit_leaves += 1;
            }
        })?;
        Ok(Self {
            n,
            leaves,
            total_probability: total,
            p_max_below,
            p_survival,
            expected_range,
            expected_max,
            non_unit_leaves,
            range_violations,
            event_violations,
        })
    }

    /// `sum_{k=0..n} P(T_0 > k)`.
    pub fn survival_sum(&self) -> BigRational {
        self.p_survival
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BruteSystem::ratio(a, b)
    }

    #[test]
    fn simple_walk_two_steps() {
        let res = brute_force_persistence(&BruteSystem::simple_walk(), 2, -1).unwrap();
        assert_eq!(res.probability, r(1, 4));
        assert_eq!(res.enumerated_states, 4);
    }

    #[test]
    fn rademacher_rwrs_two_steps() {
        let sys = BruteSystem::Rwrs {
            hold: None,
            scenery: BruteScenery::Rademacher,
        };
        let res = brute_force_persistence(&sys, 2, -1).unwrap();
        assert_eq!(res.probability, r(1, 4));
        // the scenery at Z_0's site is never read, so every second step
        // lands on a fresh site: 4 * (2 + 2) leaves
        assert_eq!(res.enumerated_states, 16);
        let one = brute_force_persistence(&sys, 1, -1).unwrap();
        assert_eq!(one.probability, r(1, 2));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let systems = [
            BruteSystem::simple_walk(),
            BruteSystem::Walk {
                hold: Some(r(1, 3)),
            },
            BruteSystem::Rwrs {
                hold: Some(r(1, 4)),
                scenery: BruteScenery::LazyRademacher { q: r(1, 2) },
            },
            BruteSystem::Mdm { p: r(1, 3) },
        ];
        for sys in &systems {
            let s = ExactSummary::compute(sys, 4).unwrap();
            assert_eq!(s.total_probability, BigRational::one(), "{sys:?}");
            assert_eq!(s.p_survival[0], BigRational::one());
        }
    }

    #[test]
    fn mdm_one_step_laws() {
        let p = r(1, 3);
        let sys = BruteSystem::Mdm { p: p.clone() };
        let left = brute_force_persistence(&sys, 1, -1).unwrap();
        assert_eq!(left.probability, &p / BigInt::from(2));
        let s = ExactSummary::compute(&sys, 1).unwrap();
        // T_0 = 1 exactly when the first move is vertical
        assert_eq!(&s.p_survival[0] - &s.p_survival[1], BigRational::one() - p);
    }

    #[test]
    fn horizon_and_parameter_checks() {
        assert!(enumerate(&BruteSystem::simple_walk(), 0, &mut |_, _| {}).is_err());
        assert!(enumerate(&BruteSystem::simple_walk(), 9, &mut |_, _| {}).is_err());
        let bad = BruteSystem::Mdm { p: r(3, 2) };
        assert!(bad.validate().is_err());
        let fgn = ProcessSpec::Fgn { hurst: 0.5 };
        assert!(matches!(
            BruteSystem::from_process(&fgn),
            Err(Error::UnsupportedSystem(_))
        ));
    }

    #[test]
    fn conversion_recovers_simple_fractions() {
        let sys = BruteSystem::from_process(&ProcessSpec::Mdm { p: 1.0 / 3.0 }).unwrap();
        assert_eq!(sys, BruteSystem::Mdm { p: r(1, 3) });
    }
}
