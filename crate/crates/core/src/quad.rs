//! Numerical integration and one-dimensional maximisation.
//!
//! Two integrators are provided. [`tanh_sinh`] is an open rule that never
//! evaluates the endpoints, so it copes with integrable power singularities
//! sitting exactly on an endpoint. [`gauss_kronrod`] is a globally adaptive
//! G7/K15 rule for smooth integrands; it is used for filter cell weights when
//! no closed-form antiderivative exists and as an independent cross-check.

use crate::error::{Error, Result};

/// Result of a quadrature: the value and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const TS_MAX_LEVEL: u32 = 12;
const TS_T_MAX: f64 = 6.5;

/// Integrates `f` over `[a, b]` with the double-exponential (tanh-sinh) rule.
///
/// Near an endpoint `c ≠ 0` the nodes cannot get closer than one ulp of
/// `c`, so for a singularity `|x − c|^{-p}` the mass within that ulp is lost;
/// for `p < 1/2` this is far below any practical tolerance.
///
/// The step is halved until two successive levels agree to `rel_tol`
/// (relative to the magnitude of the integral) or the level budget runs out,
/// in which case [`Error::Quadrature`] carries the last estimate.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    if b < a {
        let q = tanh_sinh(f, b, a, rel_tol)?;
        return Ok(Quadrature {
            value: -q.value,
            error: q.error,
        });
    }
    let half = 0.5 * (b - a);
    let mid = a + half;
    let hp = std::f64::consts::FRAC_PI_2;

    // Contribution of the symmetric pair of nodes at parameter t > 0.
    let pair = |t: f64| -> f64 {
        let s = hp * t.sinh();
        let ch = s.cosh();
        let w = hp * t.cosh() / (ch * ch);
        // distance from the nearest endpoint, computed without cancellation
        let gap = half / (s.exp() * ch);
        if gap <= 0.0 || !w.is_finite() || w == 0.0 {
            return 0.0;
        }
        let lo = a + gap;
        let hi = b - gap;
        let mut acc = 0.0;
        if lo > a {
            acc += f(lo);
        }
        if hi < b {
            acc += f(hi);
        }
        w * acc
    };

    let mut h = 1.0;
    let mut sum = hp * f(mid);
    let mut k = 1;
    while (k as f64) * h <= TS_T_MAX {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut prev = half * h * sum;
    let mut err = f64::INFINITY;
    for _ in 1..=TS_MAX_LEVEL {
        h *= 0.5;
        // only the odd multiples of the new step are new nodes
        let mut k = 1;
        while (k as f64) * h <= TS_T_MAX {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let cur = half * h * sum;
        err = (cur - prev).abs();
        if !cur.is_finite() {
            return Err(Error::Quadrature {
                estimate: cur,
                error: f64::INFINITY,
            });
        }
        if err <= rel_tol * cur.abs() || err <= f64::MIN_POSITIVE {
            return Ok(Quadrature { value: cur, error: err });
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        estimate: prev,
        error: err,
    })
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`. At most `max_intervals` subintervals are
/// used.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        if parts.len() >= max_intervals || !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error,
            });
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, m);
        let (v2, e2) = gk15(&f, m, hi);
        parts.push((lo, m, v1, e1));
        parts.push((m, hi, v2, e2));
    }
}

/// Golden-section search for the maximiser of a unimodal `f` on `[a, b]`.
///
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol * (c.abs() + d.abs()).max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Sum of a slice by recursive halving; the rounding error grows like
/// `log n` instead of `n`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Dot product with the same recursive halving as [`pairwise_sum`].
pub fn pairwise_dot(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    }
    let m = xs.len() / 2;
    pairwise_dot(&xs[..m], &ys[..m]) + pairwise_dot(&xs[m..], &ys[m..])
}
