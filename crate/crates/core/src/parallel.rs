//! Order-preserving parallel evaluation of independent trials.
//!
//! Work runs on the current rayon pool; wrap calls in
//! [`rayon::ThreadPool::install`] to pin the worker count. Outputs are
//! collected in unit order, so every reduction downstream sees the same
//! sequence regardless of scheduling.

use rayon::prelude::*;

/// Evaluates `f(unit)` for `unit in 0..units`, in order.
pub fn map_units<T, F>(units: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..units).into_par_iter().map(f).collect()
}

/// Like [`map_units`] with per-worker scratch state. The scratch must not
/// influence results.
pub fn map_units_with<T, S, I, F>(units: u64, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (0..units).into_par_iter().map_init(init, f).collect()
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global
/// pool when `workers` is `None`.
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Compensated (Kahan–Babuška) sum, evaluated left to right.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + c
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let var = if values.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_pool_size() {
        let run = |threads| with_workers(Some(threads), || map_units(1000, |u| (u * u) as f64 * 0.1));
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn kahan_beats_naive_on_cancellation() {
        let v = vec![1e16, 1.0, -1e16, 1.0];
        assert_eq!(kahan_sum(v), 2.0);
    }

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
