//! Exact path and distributional identities for integer processes whose
//! increments lie in `{-1, 0, 1}`.
//!
//! * `#{Z_0..Z_n} = max_{0..n} Z - min_{0..n} Z + 1` on every path.
//! * `{max_{1..n} Z <= -1} = {T_0 > n, Z_1 <= -1}` on every path, and by
//!   symmetry `P(max_{1..n} Z <= -1) = P(T_0 > n) / 2`.
//! * `E[#{Z_0..Z_n}] = sum_{k=0..n} P(T_0 > k)` (stationary increments).
//! * `n P(max_{1..n} Z <= -1) <= E[max_{0..n} Z]`.

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::brute::{BruteSystem, ExactSummary};
use super::estimate::MIN_TRIALS;
use super::ProcessSpec;
use crate::error::{invalid, Result};
use crate::mdm::{sample_mdm_oriented, MdmSpec};
use crate::parallel::{map_units, mean_stderr};
use crate::path::{path_stats, FirstReturn, PathStats};
use crate::rng::Seed;

/// Width, in combined standard errors, allowed to the Monte Carlo
/// mean-max bound.
const MC_BOUND_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl CheckStatus {
    fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub status: CheckStatus,
    pub lhs: String,
    pub rhs: String,
    pub detail: String,
}

impl IdentityCheck {
    fn new(name: &str, ok: bool, lhs: impl ToString, rhs: impl ToString, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::from_bool(ok),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            detail: detail.into(),
        }
    }

    fn not_applicable(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: CheckStatus::NotApplicable,
            lhs: String::new(),
            rhs: String::new(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub system: String,
    pub n: usize,
    /// `None` for exact enumeration.
    pub trials: Option<u64>,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    /// No check failed; not-applicable checks do not count against it.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks every identity with exact rational arithmetic.
pub fn verify_identities_exact(system: &BruteSystem, n: usize) -> Result<IdentityReport> {
    let s = ExactSummary::compute(system, n)?;
    let mut checks = vec![IdentityCheck::new(
        "normalization",
        s.total_probability.is_one(),
        &s.total_probability,
        1,
        format!("{} leaves", s.leaves),
    )];
    if s.non_unit_leaves > 0 {
        for name in ["range", "event", "half", "range_return", "mean_max_bound"] {
            checks.push(IdentityCheck::not_applicable(
                name,
                format!("{} leaves have increments outside {{-1, 0, 1}}", s.non_unit_leaves),
            ));
        }
    } else {
        checks.push(IdentityCheck::new(
            "range",
            s.range_violations == 0,
            s.range_violations,
            0,
            "leaves with #{Z_0..Z_n} != max - min + 1",
        ));
        checks.push(IdentityCheck::new(
            "event",
            s.event_violations == 0,
            s.event_violations,
            0,
            "leaves where {max <= -1} != {T_0 > n, Z_1 <= -1}",
        ));
        let twice = &s.p_max_below + &s.p_max_below;
        checks.push(IdentityCheck::new(
            "half",
            twice == s.p_survival[n],
            &twice,
            &s.p_survival[n],
            "2 P(max <= -1) = P(T_0 > n)",
        ));
        let sum = s.survival_sum();
        checks.push(IdentityCheck::new(
            "range_return",
            s.expected_range == sum,
            &s.expected_range,
            &sum,
            "E[R_n] = sum_k P(T_0 > k)",
        ));
        let lhs = &s.p_max_below * BigRational::from_integer(n.into());
        checks.push(IdentityCheck::new(
            "mean_max_bound",
            lhs <= s.expected_max,
            &lhs,
            &s.expected_max,
            "n P(max <= -1) <= E[max_{0..n} Z]",
        ));
    }
    let monotone = s.p_survival.windows(2).all(|w| w[1] <= w[0]);
    checks.push(IdentityCheck::new(
        "monotonicity",
        monotone,
        &s.p_survival[n],
        &s.p_survival[0],
        "P(T_0 > k) non-increasing in k",
    ));
    Ok(IdentityReport {
        system: format!("{system:?}"),
        n,
        trials: None,
        checks,
    })
}

#[derive(Default, Clone, Copy)]
struct Counts {
    range_violations: u64,
    max_below: u64,
    survived_left: u64,
    survived: u64,
    max_0n: f64,
    /// Paired run in the mirrored environment.
    flipped_below: u64,
    flipped_survived: u64,
}

fn counts(stats: &PathStats) -> Result<Counts> {
    let survived = stats.first_return.is_some_and(FirstReturn::is_censored);
    let range_ok = stats
        .range_count
        .is_some_and(|r| r as f64 == stats.max_0n() - stats.min_0n() + 1.0);
    Ok(Counts {
        range_violations: u64::from(!range_ok),
        max_below: u64::from(stats.max_1n <= -1.0),
        survived_left: u64::from(survived && stats.first_value <= -1.0),
        survived: u64::from(survived),
        max_0n: stats.max_0n(),
        ..Counts::default()
    })
}

/// Checks the identities on `trials` Monte Carlo paths of length `n`.
///
/// Trial `t` uses `seed.derive(t)`. For the MdM walk every trial is paired
/// with the same move sequence in the environment with all orientations
/// reversed, which turns the symmetry `P(max <= -1) = P(T_0 > n) / 2` into
/// an exact count equality.
pub fn verify_identities_mc(spec: &ProcessSpec, n: usize, trials: u64, seed: Seed) -> Result<IdentityReport> {
    spec.validate()?;
    if trials < MIN_TRIALS {
        return Err(invalid("trials", format!("must be at least {MIN_TRIALS}, got {trials}")));
    }
    if n == 0 {
        return Err(invalid("n", "horizon must be at least 1"));
    }
    let mut report = IdentityReport {
        system: spec.label(),
        n,
        trials: Some(trials),
        checks: Vec::new(),
    };
    if !spec.unit_increments() {
        let why = if spec.integer_valued() {
            "increments are not confined to {-1, 0, 1}"
        } else {
            "paths are not integer-valued"
        };
        for name in ["range", "event", "paired_half", "mean_max_bound"] {
            report.checks.push(IdentityCheck::not_applicable(name, why));
        }
        return Ok(report);
    }

    let mdm = match *spec {
        ProcessSpec::Mdm { p } => Some(MdmSpec::new(p, n)?),
        _ => None,
    };
    let per_trial: Vec<Result<Counts>> = map_units(trials, |t| {
        let trial_seed = seed.derive(t);
        match &mdm {
            Some(m) => {
                let original = sample_mdm_oriented(m, trial_seed, false)?;
                let flipped = sample_mdm_oriented(m, trial_seed, true)?;
                let mut c = counts(&original.first_coord_stats)?;
                c.flipped_below = u64::from(flipped.first_coord_stats.max_1n <= -1.0);
                c.flipped_survived = u64::from(flipped.t0_first.is_censored());
                Ok(c)
            }
            None => counts(&path_stats(&spec.sample_path(n, trial_seed)?)?),
        }
    });
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    let total = |f: fn(&Counts) -> u64| per_trial.iter().map(f).sum::<u64>();
    let range_violations = total(|c| c.range_violations);
    let max_below = total(|c| c.max_below);
    let survived_left = total(|c| c.survived_left);
    let survived = total(|c| c.survived);

    report.checks.push(IdentityCheck::new(
        "range",
        range_violations == 0,
        range_violations,
        0,
        "paths with #{Z_0..Z_n} != max - min + 1",
    ));
    report.checks.push(IdentityCheck::new(
        "event",
        max_below == survived_left,
        max_below,
        survived_left,
        "count{max <= -1} vs count{T_0 > n, Z_1 <= -1}",
    ));
    if mdm.is_some() {
        let flipped_below = total(|c| c.flipped_below);
        let flipped_survived = total(|c| c.flipped_survived);
        report.checks.push(IdentityCheck::new(
            "paired_half",
            max_below + flipped_below == survived && flipped_survived == survived,
            max_below + flipped_below,
            survived,
            format!(
                "below {max_below} + mirrored below {flipped_below} vs survivors {survived} \
                 (mirrored survivors {flipped_survived})"
            ),
        ));
    } else {
        report.checks.push(IdentityCheck::not_applicable(
            "paired_half",
            "mirrored environments are paired for the MdM walk only",
        ));
    }

    let maxima: Vec<f64> = per_trial.iter().map(|c| c.max_0n).collect();
    let (mean_max, se_max) = mean_stderr(&maxima);
    let t = trials as f64;
    let p = max_below as f64 / t;
    let lhs = n as f64 * p;
    let se = (se_max * se_max + (n as f64).powi(2) * p * (1.0 - p) / t).sqrt();
    report.checks.push(IdentityCheck::new(
        "mean_max_bound",
        lhs <= mean_max + MC_BOUND_SIGMAS * se,
        lhs,
        mean_max,
        format!("n p_hat <= mean max within {MC_BOUND_SIGMAS} combined stderr ({se:.3e})"),
    ));
    Ok(report)
}
