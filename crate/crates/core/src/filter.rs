//! Zero-mean filters used to build the transform.
//!
//! A filter needs its time-domain shape, ideally a closed-form antiderivative
//! (used for exact cell weights), its Fourier transform, and radii outside of
//! which both are negligible.

use std::f64::consts::PI;
use std::sync::Arc;

/// Time and frequency description of a filter `psi`.
pub trait Filter: Send + Sync {
    /// The filter at time `t`.
    fn psi(&self, t: f64) -> f64;

    /// Antiderivative of `psi` vanishing at infinity, if known in closed form.
    fn antiderivative(&self, _t: f64) -> Option<f64> {
        None
    }

    /// Fourier transform of `psi` at frequency `lambda`.
    fn psi_hat(&self, lambda: f64) -> f64;

    /// Radius beyond which `psi` and its antiderivative are negligible.
    fn support_radius_time(&self) -> f64;

    /// Radius beyond which `|psi_hat|^2` is negligible.
    fn support_radius_freq(&self) -> f64;

    fn l2_norm(&self) -> f64;

    /// An upper bound on the L1 norm of `psi`.
    fn l1_bound(&self) -> f64;

    /// A frequency close to the maximiser of `|psi_hat|^2`, used to bracket it.
    fn peak_hint(&self) -> f64;
}

/// The Mexican hat (Ricker) filter with width `sigma`, normalised to unit L2
/// norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MexicanHat {
    sigma: f64,
    amp: f64,
    support_time: f64,
    support_freq: f64,
}

/// Relative level of `|psi_hat|^2`, against its maximum, where the spectral
/// support is cut.
pub const FREQ_CUTOFF: f64 = 1e-16;
/// Absolute level of the antiderivative where the time support is cut.
pub const TIME_CUTOFF: f64 = 1e-12;

/// Builds the Mexican hat filter. Panics unless `sigma` is positive and finite;
/// use [`MexicanHat::new`] for a fallible constructor.
pub fn mexican_hat(sigma: f64) -> MexicanHat {
    MexicanHat::new(sigma).expect("sigma must be positive")
}

impl MexicanHat {
    pub fn new(sigma: f64) -> crate::Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(crate::Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        let amp = 2.0 / ((3.0 * sigma).sqrt() * PI.powf(0.25));
        let mut hat = MexicanHat {
            sigma,
            amp,
            support_time: 0.0,
            support_freq: 0.0,
        };
        // Both tails are monotone beyond the peak, so bisection is enough.
        hat.support_time = decreasing_crossing(|t| hat.antiderivative_raw(t).abs(), sigma, TIME_CUTOFF);
        let peak = hat.psi_hat(2f64.sqrt() / sigma).powi(2);
        hat.support_freq =
            decreasing_crossing(|l| hat.psi_hat(l).powi(2), 2f64.sqrt() / sigma, FREQ_CUTOFF * peak);
        Ok(hat)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn antiderivative_raw(&self, t: f64) -> f64 {
        let s = self.sigma;
        self.amp * t * (-t * t / (2.0 * s * s)).exp()
    }
}

// Smallest x >= start with g(x) < level, for g decreasing beyond start.
fn decreasing_crossing<G: Fn(f64) -> f64>(g: G, start: f64, level: f64) -> f64 {
    let mut lo = start;
    let mut hi = 2.0 * start;
    while g(hi) >= level {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

impl Filter for MexicanHat {
    fn psi(&self, t: f64) -> f64 {
        let u = t / self.sigma;
        self.amp * (1.0 - u * u) * (-0.5 * u * u).exp()
    }

    fn antiderivative(&self, t: f64) -> Option<f64> {
        Some(self.antiderivative_raw(t))
    }

    fn psi_hat(&self, lambda: f64) -> f64 {
        let s = self.sigma;
        8f64.sqrt() * PI.powf(0.25) * s.powf(2.5) / 3f64.sqrt()
            * lambda
            * lambda
            * (-0.5 * s * s * lambda * lambda).exp()
    }

    fn support_radius_time(&self) -> f64 {
        self.support_time
    }

    fn support_radius_freq(&self) -> f64 {
        self.support_freq
    }

    fn l2_norm(&self) -> f64 {
        1.0
    }

    fn l1_bound(&self) -> f64 {
        // |1 - u^2| e^{-u^2/2} integrates to 4 e^{-1/2}
        self.amp * self.sigma * 4.0 * (-0.5f64).exp()
    }

    fn peak_hint(&self) -> f64 {
        2f64.sqrt() / self.sigma
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A filter assembled from closures. Without an antiderivative the cell
/// weights are computed by adaptive quadrature.
#[derive(Clone)]
pub struct FnFilter {
    pub psi: RealFn,
    pub antiderivative: Option<RealFn>,
    pub psi_hat: RealFn,
    pub support_radius_time: f64,
    pub support_radius_freq: f64,
    pub l2_norm: f64,
    pub l1_bound: f64,
    pub peak_hint: f64,
}

impl std::fmt::Debug for FnFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnFilter")
            .field("closed_form_antiderivative", &self.antiderivative.is_some())
            .field("support_radius_time", &self.support_radius_time)
            .field("support_radius_freq", &self.support_radius_freq)
            .finish_non_exhaustive()
    }
}

impl FnFilter {
    /// Wraps another filter, dropping its antiderivative. Handy for checking
    /// the quadrature fallback against the closed form.
    pub fn without_antiderivative<F: Filter + Clone + 'static>(inner: F) -> Self {
        let a = inner.clone();
        let b = inner.clone();
        FnFilter {
            psi: Arc::new(move |t| a.psi(t)),
            antiderivative: None,
            psi_hat: Arc::new(move |l| b.psi_hat(l)),
            support_radius_time: inner.support_radius_time(),
            support_radius_freq: inner.support_radius_freq(),
            l2_norm: inner.l2_norm(),
            l1_bound: inner.l1_bound(),
            peak_hint: inner.peak_hint(),
        }
    }
}

impl Filter for FnFilter {
    fn psi(&self, t: f64) -> f64 {
        (self.psi)(t)
    }
    fn antiderivative(&self, t: f64) -> Option<f64> {
        self.antiderivative.as_ref().map(|g| g(t))
    }
    fn psi_hat(&self, lambda: f64) -> f64 {
        (self.psi_hat)(lambda)
    }
    fn support_radius_time(&self) -> f64 {
        self.support_radius_time
    }
    fn support_radius_freq(&self) -> f64 {
        self.support_radius_freq
    }
    fn l2_norm(&self) -> f64 {
        self.l2_norm
    }
    fn l1_bound(&self) -> f64 {
        self.l1_bound
    }
    fn peak_hint(&self) -> f64 {
        self.peak_hint
    }
}
