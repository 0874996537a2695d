//! Simulation of the truncated moving-average Gegenbauer process.
//!
//! Innovations come from ChaCha8 keyed by the seed, so a given
//! `(spec, length, seed)` always produces the same path. Output sample `t`
//! uses a full window of `n_terms` innovations; no partially filled start-up
//! samples are returned.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::series::SampledSeries;
use crate::spectral::{gegenbauer_coeffs, GegenbauerSpec};

/// Filters longer than this are applied with FFT convolution.
pub const DIRECT_CONVOLUTION_MAX_TERMS: usize = 64;

/// Knobs for [`simulate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions {
    /// Largest number of `f64` values (innovations plus output) allowed in
    /// memory at once.
    pub memory_budget: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            memory_budget: 1 << 28,
        }
    }
}

/// Simulates `length` samples of the process with unit spacing.
pub fn simulate(spec: &GegenbauerSpec, length: usize, seed: u64) -> Result<SampledSeries> {
    simulate_with(spec, length, seed, SimulateOptions::default())
}

pub fn simulate_with(
    spec: &GegenbauerSpec,
    length: usize,
    seed: u64,
    options: SimulateOptions,
) -> Result<SampledSeries> {
    spec.validate()?;
    if length == 0 {
        return Err(Error::param("length", "must be at least 1"));
    }
    let needed = length + spec.n_terms;
    if needed > options.memory_budget {
        return Err(Error::Capacity {
            needed,
            budget: options.memory_budget,
        });
    }
    let noise = innovations(length + spec.n_terms - 1, spec.sigma_eps, seed);
    let coeffs = gegenbauer_coeffs(spec, spec.n_terms - 1);
    let values = convolve_valid(&noise, &coeffs);
    debug_assert_eq!(values.len(), length);
    SampledSeries::new(values, 1.0, seed)
}

/// `count` i.i.d. `N(0, sigma²)` draws from the stream keyed by `seed`.
pub fn innovations(count: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// `out[t] = Σ_n c[n] x[t + N − 1 − n]` for every `t` where the window fits.
pub fn convolve_valid(x: &[f64], c: &[f64]) -> Vec<f64> {
    if c.is_empty() || x.len() < c.len() {
        return Vec::new();
    }
    if c.len() <= DIRECT_CONVOLUTION_MAX_TERMS {
        direct(x, c)
    } else {
        overlap_save(x, c)
    }
}

fn direct(x: &[f64], c: &[f64]) -> Vec<f64> {
    let n = c.len();
    (0..=x.len() - n)
        .map(|t| {
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate() {
                acc += ck * x[t + n - 1 - k];
            }
            acc
        })
        .collect()
}

fn overlap_save(x: &[f64], c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let out_len = x.len() - n + 1;
    let size = (4 * n).max(1 << 12).next_power_of_two();
    let block = size - n + 1;
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);

    let mut kernel: Vec<Complex<f64>> = c.iter().map(|&v| Complex::new(v, 0.0)).collect();
    kernel.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut kernel);

    let scale = 1.0 / size as f64;
    let mut out = Vec::with_capacity(out_len);
    let mut buf = vec![Complex::new(0.0, 0.0); size];
    let mut start = 0;
    while start < out_len {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = Complex::new(x.get(start + i).copied().unwrap_or(0.0), 0.0);
        }
        fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&kernel) {
            *b *= k;
        }
        inv.process(&mut buf);
        let take = block.min(out_len - start);
        out.extend(buf[n - 1..n - 1 + take].iter().map(|z| z.re * scale));
        start += take;
    }
    out
}
