//! Result tables, summaries and plots.

use std::fmt::Write as _;
use std::path::Path;

use persist_core::stats::{ExponentFit, PersistenceEstimate};

use crate::CliError;

pub const PERSISTENCE_HEADER: &str = "n,level,trials,p_hat,ci_low,ci_high";

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Builds a CSV document with LF line endings.
pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn persistence_csv(grid: &[PersistenceEstimate]) -> String {
    csv(
        PERSISTENCE_HEADER,
        grid.iter().map(|e| {
            format!(
                "{},{},{},{},{},{}",
                e.n,
                e.level(),
                e.trials,
                e.p_hat,
                e.ci_low,
                e.ci_high
            )
        }),
    )
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned log10 range covering `values`.
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (lo, hi) = values
            .filter(|v| *v > 0.0)
            .map(f64::log10)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo.floor(), hi.ceil()) } else { (0.0, 1.0) };
        Axis {
            lo,
            hi: if hi > lo { hi } else { lo + 1.0 },
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }
}

/// Self-contained log-log plot of the estimates with their intervals and
/// the fitted power law.
pub fn persistence_svg(title: &str, grid: &[PersistenceEstimate], fit: Option<&ExponentFit>) -> String {
    let xs = Axis::covering(grid.iter().map(|e| e.n as f64));
    let ys = Axis::covering(
        grid.iter()
            .flat_map(|e| [e.p_hat, e.ci_low, e.ci_high]),
    );
    let px = |n: f64| MARGIN + xs.frac(n) * (WIDTH - 2.0 * MARGIN);
    let py = |p: f64| HEIGHT - MARGIN - ys.frac(p) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for d in xs.lo as i32..=xs.hi as i32 {
        let x = px(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 18.0
        );
    }
    for d in ys.lo as i32..=ys.hi as i32 {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            WIDTH - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">p_hat</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for e in grid.iter().filter(|e| e.p_hat > 0.0) {
        let x = px(e.n as f64);
        let lo = if e.ci_low > 0.0 { py(e.ci_low) } else { HEIGHT - MARGIN };
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{:.2}" stroke="#1f77b4"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="#1f77b4"/>"##,
            py(e.ci_high),
            py(e.p_hat)
        );
    }
    if let Some(f) = fit {
        let (n0, n1) = (grid[0].n as f64, grid[grid.len() - 1].n as f64);
        let model = |n: f64| {
            let l = n.ln();
            (f.intercept - f.theta_hat * l + f.log_correction.map_or(0.0, |c| c * l.ln())).exp()
        };
        let pts: Vec<String> = (0..=32)
            .map(|i| {
                let n = n0 * (n1 / n0).powf(i as f64 / 32.0);
                format!("{:.2},{:.2}", px(n), py(model(n)))
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
            pts.join(" ")
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#d62728">θ = {:.4} ± {:.4}</text>"##,
            WIDTH - MARGIN - 8.0,
            MARGIN + 18.0,
            f.theta_hat,
            f.stderr
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
