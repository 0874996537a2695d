//! Spectral model with poles at `±s0`, the Gegenbauer special case, and the
//! spectral integrals that serve as oracles elsewhere.
//!
//! The density is `f(λ) = h(λ) / |λ² − s0²|^{2α}`. The transform's second
//! moment at scale `a` is `J(a) = a ∫ |ψ̂(aλ)|² f(λ) dλ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::quad::{gauss_kronrod, golden_max, tanh_sinh};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative tolerance used for `J(a)`.
pub const J_REL_TOL: f64 = 1e-8;

/// The `(s0, α, h)` parametrisation of a cyclic long-memory density.
#[derive(Clone)]
pub struct SpectralModel {
    s0: f64,
    alpha: f64,
    h: RealFn,
    /// `h` vanishes for `|λ|` beyond this.
    h_support: f64,
}

impl fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralModel")
            .field("s0", &self.s0)
            .field("alpha", &self.alpha)
            .field("h_support", &self.h_support)
            .finish_non_exhaustive()
    }
}

fn check_pole(s0: f64, alpha: f64) -> Result<()> {
    if !(s0 > 1.0 && s0.is_finite()) {
        return Err(Error::param("s0", format!("must exceed 1, got {s0}")));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param("alpha", format!("must lie in (0, 1/2), got {alpha}")));
    }
    Ok(())
}

impl SpectralModel {
    /// A model with an arbitrary even, non-negative `h`.
    pub fn new<H>(s0: f64, alpha: f64, h: H) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_support(s0, alpha, h, f64::INFINITY)
    }

    /// Like [`SpectralModel::new`] but declares that `h` is zero for
    /// `|λ| > support`, which lets integrals stop there.
    pub fn with_support<H>(s0: f64, alpha: f64, h: H, support: f64) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_pole(s0, alpha)?;
        if !(support > 0.0) {
            return Err(Error::param("support", "must be positive"));
        }
        Ok(SpectralModel {
            s0,
            alpha,
            h: Arc::new(h),
            h_support: support,
        })
    }

    /// `h ≡ 1`.
    pub fn flat(s0: f64, alpha: f64) -> Result<Self> {
        Self::new(s0, alpha, |_| 1.0)
    }

    /// Density of a Gegenbauer process sampled every `dt` time units,
    /// written in physical frequency and scaled so that `h(0) = 1`.
    ///
    /// The sampled process has the pole at `s0 = arccos(η)/dt` and density
    /// `s0^{-4α} ((1 − η) / |cos(λ dt) − η|)^{2α}` for `|λ| ≤ π/dt`.
    pub fn gegenbauer(eta: f64, alpha: f64, dt: f64) -> Result<Self> {
        if !(eta > -1.0 && eta < 1.0) {
            return Err(Error::param("eta", format!("must lie in (-1, 1), got {eta}")));
        }
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let s0 = eta.acos() / dt;
        let nyquist = PI / dt;
        let y = s0 * dt;
        let h = move |lambda: f64| {
            let l = lambda.abs();
            if l > nyquist {
                return 0.0;
            }
            let x = l * dt;
            // cos x − cos y without cancellation near the pole
            let cos_gap = (2.0 * (0.5 * (x + y)).sin() * (0.5 * (x - y)).sin()).abs();
            let quad_gap = (l - s0).abs() * (l + s0);
            if cos_gap == 0.0 {
                // removable: |λ² − s0²| / |cos λdt − cos s0dt| → 2 s0 / (dt sin(s0 dt))
                return ((2.0 * s0 * (1.0 - eta)) / (s0 * s0 * dt * y.sin())).powf(2.0 * alpha);
            }
            (quad_gap * (1.0 - eta) / (s0 * s0 * cos_gap)).powf(2.0 * alpha)
        };
        Self::with_support(s0, alpha, h, nyquist)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn h(&self, lambda: f64) -> f64 {
        (self.h)(lambda)
    }

    pub fn h_support(&self) -> f64 {
        self.h_support
    }

    /// `f(λ) = h(λ)|λ² − s0²|^{-2α}`. Fails with [`Error::Singularity`] at `±s0`.
    pub fn density(&self, lambda: f64) -> Result<f64> {
        let gap = (lambda.abs() - self.s0).abs() * (lambda.abs() + self.s0);
        if gap == 0.0 {
            return Err(Error::Singularity { lambda });
        }
        Ok(self.h(lambda) * gap.powf(-2.0 * self.alpha))
    }

    /// The density level at the origin for `h(0) = 1`, namely `s0^{-4α}`.
    pub fn level_at_origin(&self) -> f64 {
        self.s0.powf(-4.0 * self.alpha)
    }
}

/// Parameters of the truncated moving-average Gegenbauer process
/// `X(t) = Σ_{n<N} C_n^μ(2η) ε(t − n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GegenbauerSpec {
    pub mu: f64,
    pub eta: f64,
    pub sigma_eps: f64,
    pub n_terms: usize,
}

impl GegenbauerSpec {
    pub fn new(mu: f64, eta: f64, sigma_eps: f64, n_terms: usize) -> Result<Self> {
        let spec = GegenbauerSpec {
            mu,
            eta,
            sigma_eps,
            n_terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Chooses `σ_ε` so that the process, read on a grid of spacing `dt`,
    /// has spectral density `s0^{-4μ}` at the origin, i.e. `h(0) = 1`.
    ///
    /// Uses the truncated coefficient sum, so the normalisation is exact for
    /// the process that is actually simulated.
    pub fn unit_level(mu: f64, eta: f64, n_terms: usize, dt: f64) -> Result<Self> {
        let mut spec = GegenbauerSpec::new(mu, eta, 1.0, n_terms)?;
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let s0 = eta.acos() / dt;
        let total: f64 = gegenbauer_coeffs(&spec, n_terms - 1).iter().sum();
        let var = 2.0 * PI * s0.powf(-4.0 * mu) / (dt * total * total);
        spec.sigma_eps = var.sqrt();
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(Error::param("mu", format!("must lie in (0, 1/2), got {}", self.mu)));
        }
        if !(self.eta > -1.0 && self.eta < 1.0) {
            return Err(Error::param("eta", format!("must lie in (-1, 1), got {}", self.eta)));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(Error::param("sigma_eps", "must be finite and non-negative"));
        }
        if self.n_terms < 1 {
            return Err(Error::param("n_terms", "must be at least 1"));
        }
        Ok(())
    }

    /// Pole location in cycles per native sample, `arccos η`.
    pub fn native_s0(&self) -> f64 {
        self.eta.acos()
    }
}

/// `C_n^μ(2η)` for `n = 0..=n_max` by the three-term recurrence
/// `n C_n = 2η(n + μ − 1) C_{n−1} − (n + 2μ − 2) C_{n−2}`.
pub fn gegenbauer_coeffs(spec: &GegenbauerSpec, n_max: usize) -> Vec<f64> {
    let (mu, eta) = (spec.mu, spec.eta);
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(1.0);
    if n_max >= 1 {
        c.push(2.0 * mu * eta);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let next = (2.0 * eta * (nf + mu - 1.0) * c[n - 1] - (nf + 2.0 * mu - 2.0) * c[n - 2]) / nf;
        c.push(next);
    }
    c
}

/// Autocovariance of the truncated MA process at `lag`:
/// `σ_ε² Σ_{n=0}^{N−1−lag} C_n C_{n+lag}`; zero once `lag ≥ N`.
pub fn theoretical_autocovariance(spec: &GegenbauerSpec, lag: usize) -> f64 {
    if lag >= spec.n_terms {
        return 0.0;
    }
    let c = gegenbauer_coeffs(spec, spec.n_terms - 1);
    autocov_from_coeffs(&c, spec.sigma_eps, lag)
}

/// Autocovariances for lags `0..=max_lag`, sharing one coefficient table.
pub fn theoretical_autocovariances(spec: &GegenbauerSpec, max_lag: usize) -> Vec<f64> {
    let c = gegenbauer_coeffs(spec, spec.n_terms - 1);
    (0..=max_lag)
        .map(|lag| autocov_from_coeffs(&c, spec.sigma_eps, lag))
        .collect()
}

fn autocov_from_coeffs(c: &[f64], sigma_eps: f64, lag: usize) -> f64 {
    if lag >= c.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for n in 0..c.len() - lag {
        acc += c[n] * c[n + lag];
    }
    sigma_eps * sigma_eps * acc
}

/// `J(a) = a ∫ |ψ̂(aλ)|² f(λ) dλ`.
///
/// After substituting `u = aλ` the integrand is `|ψ̂(u)|² f(u/a)`. The range
/// is split at the pole `u = a s0` and cut at the filter's spectral support
/// and the support of `h`; each piece goes to the tanh-sinh rule, which never
/// touches the singular endpoint.
pub fn j_integral(a: f64, model: &SpectralModel, filter: &dyn Filter) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", format!("must be positive, got {a}")));
    }
    let upper = filter.support_radius_freq().min(a * model.h_support());
    let pole = a * model.s0();
    let integrand = |u: f64| {
        let f = model.h(u / a) * ((u / a - model.s0()).abs() * (u / a + model.s0())).powf(-2.0 * model.alpha());
        filter.psi_hat(u).powi(2) * f
    };
    let mut cuts = vec![0.0];
    let peak = filter.peak_hint();
    if peak < upper && (peak - pole).abs() > 1e-9 {
        cuts.push(peak);
    }
    if pole < upper {
        cuts.push(pole);
    }
    cuts.push(upper);
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut err = 0.0;
    for w in cuts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        match tanh_sinh(integrand, w[0], w[1], J_REL_TOL * 1e-2) {
            Ok(q) => {
                total += q.value;
                err += q.error;
            }
            Err(Error::Quadrature { estimate, error }) => {
                total += estimate;
                err += error;
            }
            Err(e) => return Err(e),
        }
    }
    if err > J_REL_TOL * total.abs() && err > 1e-300 {
        return Err(Error::Quadrature {
            estimate: 2.0 * total,
            error: 2.0 * err,
        });
    }
    Ok(2.0 * total)
}

fn spectral_moment(filter: &dyn Filter, power: i32) -> f64 {
    let r = filter.support_radius_freq();
    let p = filter.peak_hint().min(r);
    let g = |l: f64| l.powi(power) * filter.psi_hat(l).powi(2);
    let left = gauss_kronrod(g, 0.0, p, 1e-15, 1e-13, 2000);
    let right = gauss_kronrod(g, p, r, 1e-15, 1e-13, 2000);
    let v = |q: Result<crate::quad::Quadrature>| match q {
        Ok(q) => q.value,
        Err(Error::Quadrature { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    };
    2.0 * (v(left) + v(right))
}

/// `c₂ = ∫ |ψ̂(λ)|² dλ` over the spectral support.
pub fn constant_c2(filter: &dyn Filter) -> f64 {
    spectral_moment(filter, 0)
}

/// `c₃ = max |ψ̂(λ)|²`, by golden-section search around the filter's peak.
pub fn constant_c3(filter: &dyn Filter) -> f64 {
    let p = filter.peak_hint();
    golden_max(|l| filter.psi_hat(l).powi(2), 0.25 * p, 4.0 * p, 1e-12).1
}

/// `κ = 2 ∫ λ² |ψ̂(λ)|² dλ`, the coefficient that links the curvature of the
/// density at the origin to the `a^{-2}` term of `J(a)`.
///
/// For a density that is flat to second order in `h` one has
/// `J(a) = c₂ f(0) + α κ s0^{-4α-2} a^{-2} + O(a^{-4})`, so `κ` is the
/// normaliser that makes the second statistic consistent for `α s0^{-4α-2}`.
pub fn constant_kappa(filter: &dyn Filter) -> f64 {
    2.0 * spectral_moment(filter, 2)
}
