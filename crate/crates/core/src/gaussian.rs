//! Fractional Gaussian noise and its partial sums.
//!
//! Paths are drawn by circulant embedding of the fGN autocovariance in a
//! circulant matrix of size `2n`. One complex FFT yields two independent
//! exact samples (real and imaginary parts).

use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::path::PathSample;
use crate::rng::{Seed, Stream};

/// Eigenvalues below `-EIGEN_TOLERANCE * max_eigenvalue` abort the embedding.
pub const EIGEN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnSpec {
    pub hurst: f64,
    pub length: usize,
}

impl FgnSpec {
    pub fn new(hurst: f64, length: usize) -> Result<Self> {
        let spec = Self { hurst, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(invalid("hurst", format!("must lie in (0, 1), got {}", self.hurst)));
        }
        if self.length == 0 {
            return Err(invalid("length", "must be at least 1"));
        }
        Ok(())
    }
}

/// `r(j) = E[X_0 X_j]` for unit-variance fGN with Hurst index `hurst`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let j = lag as f64;
    let lower = if lag == 0 { 1.0 } else { (j - 1.0).abs().powf(h2) };
    0.5 * ((j + 1.0).powf(h2) - 2.0 * j.powf(h2) + lower)
}

/// `r(0..n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSequence {
    pub values: Vec<f64>,
}

impl CovarianceSequence {
    pub fn new(spec: &FgnSpec) -> Self {
        Self {
            values: (0..spec.length)
                .map(|j| fgn_autocovariance(spec.hurst, j))
                .collect(),
        }
    }

    /// `sum_{i,j=1..n} r(i-j) = Var(Z_n)`.
    pub fn double_sum(&self) -> f64 {
        let n = self.values.len();
        let mut s = self.values[0] * n as f64;
        for (j, r) in self.values.iter().enumerate().skip(1) {
            s += 2.0 * (n - j) as f64 * r;
        }
        s
    }
}

/// Reusable sampler for fGN increments of a fixed length.
#[derive(Clone)]
pub struct FgnSampler {
    spec: FgnSpec,
    /// `sqrt(lambda_k / 2n)`.
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnSampler").field("spec", &self.spec).finish()
    }
}

impl FgnSampler {
    pub fn new(spec: FgnSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.length;
        let m = 2 * n;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(m);
        let mut circ: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= n { k } else { m - k };
                Complex64::new(fgn_autocovariance(spec.hurst, lag), 0.0)
            })
            .collect();
        fft.process(&mut circ);
        let lmax = circ.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let mut scale = Vec::with_capacity(m);
        for (index, c) in circ.iter().enumerate() {
            let value = c.re;
            if value < -EIGEN_TOLERANCE * lmax {
                return Err(Error::EmbeddingFailed { index, value });
            }
            scale.push((value.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { spec, scale, fft })
    }

    pub fn spec(&self) -> &FgnSpec {
        &self.spec
    }

    /// Number of standard normals consumed per call to
    /// [`FgnSampler::increments_from_normals`].
    pub fn normals_needed(&self) -> usize {
        2 * self.scale.len()
    }

    pub fn scratch(&self) -> FgnScratch {
        FgnScratch {
            buf: vec![Complex64::new(0.0, 0.0); self.scale.len()],
            fft_scratch: vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()],
            normals: vec![0.0; self.normals_needed()],
        }
    }

    /// Maps standard normals to two independent increment sequences.
    ///
    /// The map is linear: negating `normals` negates both outputs.
    pub fn increments_from_normals(
        &self,
        normals: &[f64],
        scratch: &mut FgnScratch,
        first: &mut Vec<f64>,
        second: &mut Vec<f64>,
    ) {
        assert_eq!(normals.len(), self.normals_needed());
        for (k, (b, s)) in scratch.buf.iter_mut().zip(&self.scale).enumerate() {
            *b = Complex64::new(s * normals[2 * k], s * normals[2 * k + 1]);
        }
        self.fft
            .process_with_scratch(&mut scratch.buf, &mut scratch.fft_scratch);
        let n = self.spec.length;
        first.clear();
        second.clear();
        first.extend(scratch.buf[..n].iter().map(|c| c.re));
        second.extend(scratch.buf[..n].iter().map(|c| c.im));
    }

    /// Draws two independent increment sequences.
    pub fn sample_pair<R: RngCore>(
        &self,
        rng: &mut R,
        scratch: &mut FgnScratch,
        first: &mut Vec<f64>,
        second: &mut Vec<f64>,
    ) {
        let mut normals = std::mem::take(&mut scratch.normals);
        for x in normals.iter_mut() {
            *x = StandardNormal.sample(rng);
        }
        self.increments_from_normals(&normals, scratch, first, second);
        scratch.normals = normals;
    }
}

/// Per-worker buffers for [`FgnSampler`].
#[derive(Debug, Clone)]
pub struct FgnScratch {
    buf: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
    normals: Vec<f64>,
}

/// Partial sums `Z_k = X_1 + ... + X_k` of one fGN sample.
pub fn sample_fgn(spec: FgnSpec, seed: Seed) -> Result<PathSample> {
    let sampler = FgnSampler::new(spec)?;
    let mut scratch = sampler.scratch();
    let mut rng = seed.stream(Stream::Noise).rng();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    sampler.sample_pair(&mut rng, &mut scratch, &mut a, &mut b);
    PathSample::from_increments(a, false)
}
