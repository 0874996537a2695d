//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's numerical code, so agreement is evidence rather than tautology.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::{gamma, ln_gamma};

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn factorial(n: usize) -> BigRational {
    let mut f = BigRational::one();
    for i in 2..=n {
        f *= rat(i as i64, 1);
    }
    f
}

/// `C_n^μ(2η) = Σ_k (−1)^k (2η)^{n−2k} Γ(μ+n−k) / (Γ(μ) k! (n−2k)!)` in exact
/// rational arithmetic, with `μ = mu.0/mu.1` and `η = eta.0/eta.1`.
///
/// The Gamma ratio is the rising factorial `(μ)_{n−k}`, which is rational.
pub fn gegenbauer_exact(mu: (i64, i64), eta: (i64, i64), n: usize) -> f64 {
    let mu = rat(mu.0, mu.1);
    let two_eta = rat(2 * eta.0, eta.1);
    let mut total = BigRational::zero();
    for k in 0..=n / 2 {
        let mut rising = BigRational::one();
        for i in 0..n - k {
            rising *= &mu + rat(i as i64, 1);
        }
        let mut pow = BigRational::one();
        for _ in 0..n - 2 * k {
            pow *= &two_eta;
        }
        let term = pow * rising / (factorial(k) * factorial(n - 2 * k));
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total.to_f64().expect("finite")
}

/// The same sum in double precision with every term written as
/// `exp(lnΓ(μ+n−k) − lnΓ(μ) − lnΓ(k+1) − lnΓ(n−2k+1))`.
pub fn gegenbauer_log_gamma(mu: f64, eta: f64, n: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..=n / 2 {
        let m = (n - 2 * k) as f64;
        let lg = ln_gamma(mu + (n - k) as f64) - ln_gamma(mu) - ln_gamma(k as f64 + 1.0) - ln_gamma(m + 1.0);
        let x = 2.0 * eta;
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 } * if x < 0.0 && (n - 2 * k) % 2 == 1 { -1.0 } else { 1.0 };
        let mag = if m == 0.0 { lg.exp() } else { (lg + m * x.abs().ln()).exp() };
        total += sign * mag;
    }
    total
}

/// Large-`n` form `cos((n+μ)ν − μπ/2) / (Γ(μ) sin^μ ν) (2/n)^{1−μ}`,
/// `ν = arccos η`, and its envelope (the same without the cosine).
pub fn gegenbauer_asymptote(mu: f64, eta: f64, n: usize) -> (f64, f64) {
    let nu = eta.acos();
    let nf = n as f64;
    let env = (2.0 / nf).powf(1.0 - mu) / (gamma(mu) * nu.sin().powf(mu));
    (((nf + mu) * nu - mu * std::f64::consts::FRAC_PI_2).cos() * env, env)
}

/// Sample autocovariance at `lag` about a known zero mean.
pub fn autocov_zero_mean(x: &[f64], lag: usize) -> f64 {
    let n = x.len() - lag;
    x[..n].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Mean and standard error of the mean over `batches` equal batches of the
/// products `x_t x_{t+lag}`.
pub fn batch_autocov(x: &[f64], lag: usize, batches: usize) -> (f64, f64) {
    let prods: Vec<f64> = x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).collect();
    let size = prods.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| prods[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (m, (var / batches as f64).sqrt())
}

/// Midpoint Riemann sum of `g` on `[a, b]` with `n` cells.
pub fn riemann<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        // Kahan summation keeps a million terms honest
        let y = g(a + (i as f64 + 0.5) * h) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc * h
}

/// Simpson's rule on `[a, b]` with `n` (even) panels.
pub fn simpson<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = g(a) + g(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Mexican hat written out independently: `(2/(√(3σ) π^{1/4})) (1−u²) e^{−u²/2}`.
pub fn hat_psi(sigma: f64, t: f64) -> f64 {
    let u = t / sigma;
    2.0 / ((3.0 * sigma).sqrt() * std::f64::consts::PI.powf(0.25)) * (1.0 - u * u) * (-0.5 * u * u).exp()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (g(a), g(b), g(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(g, a, b, fa, fm, fb, whole, tol, 40)
}

/// Antiderivative of [`hat_psi`], `(2/(√(3σ) π^{1/4})) t e^{−t²/(2σ²)}`.
pub fn hat_big_psi(sigma: f64, t: f64) -> f64 {
    2.0 / ((3.0 * sigma).sqrt() * std::f64::consts::PI.powf(0.25)) * t * (-t * t / (2.0 * sigma * sigma)).exp()
}
