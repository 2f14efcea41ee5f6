//! Weighted least-squares fit of `log p_n = c - theta log n (+ lambda log log n)`.

use serde::{Deserialize, Serialize};

use super::estimate::{PersistenceEstimate, Z95};
use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;
/// The smallest horizon is dropped when its residual exceeds this multiple
/// of the residual RMS of the other points.
const TRIM_FACTOR: f64 = 3.0;
const TRIM_MIN_POINTS: usize = 5;
const RESIDUAL_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub theta_hat: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// `(n, p_hat)` of every point offered to the fit.
    pub grid: Vec<(u64, f64)>,
    /// Coefficient of `log log n`, when requested.
    pub log_correction: Option<f64>,
    pub residual_rms: f64,
    /// Horizon removed by pre-asymptotic trimming.
    pub trimmed: Option<u64>,
}

struct Point {
    x: f64,
    loglog: f64,
    y: f64,
    w: f64,
}

struct Solution {
    beta: Vec<f64>,
    cov: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    chi2: f64,
}

fn solve(points: &[Point], with_log: bool) -> Result<Solution> {
    let k = if with_log { 3 } else { 2 };
    let row = |p: &Point| -> Vec<f64> {
        if with_log {
            vec![1.0, p.x, p.loglog]
        } else {
            vec![1.0, p.x]
        }
    };
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for p in points {
        let r = row(p);
        for i in 0..k {
            xty[i] += p.w * r[i] * p.y;
            for j in 0..k {
                xtx[i][j] += p.w * r[i] * r[j];
            }
        }
    }
    let inv = invert(xtx).ok_or_else(|| Error::InvalidGrid("singular design".into()))?;
    let beta: Vec<f64> = (0..k)
        .map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| {
            let r = row(p);
            p.y - (0..k).map(|i| beta[i] * r[i]).sum::<f64>()
        })
        .collect();
    let chi2 = points.iter().zip(&residuals).map(|(p, r)| p.w * r * r).sum();
    Ok(Solution {
        beta,
        cov: inv,
        residuals,
        chi2,
    })
}

/// Gauss–Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let mut inv: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..k {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..k {
            if i != col {
                let f = a[i][col];
                for j in 0..k {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|r| r * r).sum::<f64>() / values.len() as f64).sqrt()
}

/// Fits the persistence exponent to a geometric grid of estimates.
///
/// Weights are inverse squared relative interval widths (delta method for
/// `log p_hat`). The reported standard error is inflated by the reduced
/// chi-square when it exceeds one.
pub fn fit_exponent(grid: &[PersistenceEstimate], with_log_correction: bool) -> Result<ExponentFit> {
    if grid.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[1].n <= w[0].n) || grid[0].n < 2 {
        return Err(Error::InvalidGrid(
            "horizons must be strictly increasing and at least 2".into(),
        ));
    }
    let ratio = grid[1].n as f64 / grid[0].n as f64;
    if grid
        .windows(2)
        .any(|w| ((w[1].n as f64 / w[0].n as f64) / ratio - 1.0).abs() > 1e-9)
    {
        return Err(Error::InvalidGrid("horizons must be geometrically spaced".into()));
    }
    if let Some(e) = grid.iter().find(|e| e.p_hat <= 0.0) {
        return Err(Error::UnderpoweredGrid(e.n));
    }
    let mut points = Vec::with_capacity(grid.len());
    for e in grid {
        let sd = (e.ci_high - e.ci_low) / (2.0 * Z95 * e.p_hat);
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "degenerate confidence interval at n = {}",
                e.n
            )));
        }
        let x = (e.n as f64).ln();
        points.push(Point {
            x,
            loglog: x.ln(),
            y: e.p_hat.ln(),
            w: 1.0 / (sd * sd),
        });
    }

    let mut sol = solve(&points, with_log_correction)?;
    let mut trimmed = None;
    if points.len() >= TRIM_MIN_POINTS {
        // the first point is judged against the fit of the others
        let rest = solve(&points[1..], with_log_correction)?;
        let first = &points[0];
        let predicted = rest.beta[0]
            + rest.beta[1] * first.x
            + if with_log_correction { rest.beta[2] * first.loglog } else { 0.0 };
        let scale = rms(&rest.residuals).max(RESIDUAL_FLOOR);
        if (first.y - predicted).abs() > TRIM_FACTOR * scale {
            trimmed = Some(grid[0].n);
            points.remove(0);
            sol = rest;
        }
    }

    let params = if with_log_correction { 3 } else { 2 };
    let dof = points.len().saturating_sub(params);
    let inflation = if dof > 0 {
        (sol.chi2 / dof as f64).max(1.0)
    } else {
        1.0
    };
    Ok(ExponentFit {
        theta_hat: -sol.beta[1],
        intercept: sol.beta[0],
        stderr: (sol.cov[1][1] * inflation).sqrt(),
        grid: grid.iter().map(|e| (e.n, e.p_hat)).collect(),
        log_correction: with_log_correction.then(|| sol.beta[2]),
        residual_rms: rms(&sol.residuals),
        trimmed,
    })
}
