mod common;

use std::f64::consts::PI;

use common::*;
use cyclomem::filter::Filter;
use cyclomem::spectral::*;
use cyclomem::{mexican_hat, Error};

const MU: [(i64, i64); 3] = [(1, 20), (1, 10), (3, 10)];
const ETA: [(i64, i64); 3] = [(-1, 2), (3, 10), (9, 10)];

fn ratio(p: (i64, i64)) -> f64 {
    p.0 as f64 / p.1 as f64
}

#[test]
fn recurrence_matches_exact_explicit_sum() {
    let mut worst: f64 = 0.0;
    for mu in MU {
        for eta in ETA {
            let spec = GegenbauerSpec::new(ratio(mu), ratio(eta), 1.0, 51).unwrap();
            let c = gegenbauer_coeffs(&spec, 50);
            for (n, cn) in c.iter().enumerate() {
                worst = worst.max((cn - gegenbauer_exact(mu, eta, n)).abs());
            }
        }
    }
    assert!(worst < 1e-8, "max |diff| = {worst:e}");
}

#[test]
fn log_gamma_form_agrees_where_well_conditioned() {
    // |2η| < 1 keeps the alternating terms small, so double precision suffices
    let spec = GegenbauerSpec::new(0.1, 0.3, 1.0, 51).unwrap();
    let c = gegenbauer_coeffs(&spec, 50);
    for (n, cn) in c.iter().enumerate() {
        assert!((cn - gegenbauer_log_gamma(0.1, 0.3, n)).abs() < 1e-9, "n = {n}");
    }
}

#[test]
fn worked_small_coefficients() {
    assert_eq!(gegenbauer_exact((1, 10), (3, 10), 0), 1.0);
    assert!((gegenbauer_exact((1, 10), (3, 10), 1) - 0.06).abs() < 1e-16);
    assert!((gegenbauer_exact((1, 10), (3, 10), 2) + 0.0802).abs() < 1e-16);
}

#[test]
fn coefficients_follow_asymptotic_envelope() {
    for mu in MU {
        for eta in ETA {
            let (mu, eta) = (ratio(mu), ratio(eta));
            let spec = GegenbauerSpec::new(mu, eta, 1.0, 1001).unwrap();
            let c = gegenbauer_coeffs(&spec, 1000);
            for (n, cn) in c.iter().enumerate().skip(500) {
                let (asym, env) = gegenbauer_asymptote(mu, eta, n);
                assert!((cn - asym).abs() / env < 0.05, "mu={mu} eta={eta} n={n}");
            }
        }
    }
}

#[test]
fn autocovariance_lag_one_matches_brute_force() {
    let spec = GegenbauerSpec::new(0.1, 0.3, 1.0, 10_000).unwrap();
    let c: Vec<f64> = {
        let mut c = vec![1.0, 0.06];
        for n in 2..10_000usize {
            let nf = n as f64;
            c.push((0.6 * (nf - 0.9) * c[n - 1] - (nf - 1.8) * c[n - 2]) / nf);
        }
        c
    };
    let brute: f64 = (0..9_999).map(|n| c[n] * c[n + 1]).sum();
    let v = theoretical_autocovariance(&spec, 1);
    assert!((v - brute).abs() < 1e-12 * brute.abs().max(1.0));
    assert_eq!(v, theoretical_autocovariance(&spec, 1));
}

#[test]
fn density_even_and_non_negative() {
    let flat = SpectralModel::flat(1.27, 0.1).unwrap();
    let geg = SpectralModel::gegenbauer(0.3, 0.1, 1.0).unwrap();
    for m in [&flat, &geg] {
        for i in 0..1000 {
            let l = -6.0 + 12.0 * (i as f64 + 0.37) / 1000.0;
            let (p, q) = (m.density(l).unwrap(), m.density(-l).unwrap());
            assert_eq!(p, q);
            assert!(p >= 0.0 && p.is_finite());
        }
    }
}

#[test]
fn gegenbauer_h_matches_naive_formula_and_pole_limit() {
    let (eta, alpha) = (0.3f64, 0.1);
    let m = SpectralModel::gegenbauer(eta, alpha, 1.0).unwrap();
    let s0 = eta.acos();
    let naive = |l: f64| ((l * l - s0 * s0).abs() * (1.0 - eta) / (s0 * s0 * (l.cos() - eta).abs())).powf(2.0 * alpha);
    for i in 0..1000 {
        let l = PI * (i as f64 + 0.5) / 1000.0;
        if (l - s0).abs() > 1e-3 {
            assert!((m.h(l) / naive(l) - 1.0).abs() < 1e-12, "l = {l}");
        }
    }
    // the two density forms differ near the pole by the constant (2 s0 (1 − η) / (s0² sin s0))^{2α}
    let limit = (2.0 * (1.0 - eta) / (s0 * s0.sin())).powf(2.0 * alpha);
    for e in [1e-3, 1e-5, 1e-7] {
        assert!((m.h(s0 + e) / limit - 1.0).abs() < 2.0 * e);
        assert!((m.h(s0 - e) / limit - 1.0).abs() < 2.0 * e);
    }
}

fn hat_spectrum(sigma: f64, u: f64) -> f64 {
    let c = 8f64.sqrt() * PI.powf(0.25) * sigma.powf(2.5) / 3f64.sqrt();
    (c * u * u * (-0.5 * sigma * sigma * u * u).exp()).powi(2)
}

// J(a) by a midpoint rule after the substitution u = pole ± w^{1/(1−2α)},
// which removes the singularity, with `nodes` cells in total.
fn j_oracle<F: Fn(f64) -> f64>(a: f64, s0: f64, alpha: f64, density: F, upper: f64, nodes: usize) -> f64 {
    let pole = a * s0;
    let p = 1.0 / (1.0 - 2.0 * alpha);
    let g = |u: f64| hat_spectrum(1.0, u) * density(u / a);
    let left = |w: f64| g(pole - w.powf(p)) * p * w.powf(p - 1.0);
    let right = |w: f64| g(pole + w.powf(p)) * p * w.powf(p - 1.0);
    let wl = pole.powf(1.0 / p);
    let wr = (upper - pole).powf(1.0 / p);
    2.0 * (riemann(left, 0.0, wl, nodes / 2) + riemann(right, 0.0, wr, nodes / 2))
}

#[test]
fn j_matches_independent_riemann_sum() {
    let (s0, alpha) = (1.27, 0.1);
    let model = SpectralModel::flat(s0, alpha).unwrap();
    let h = mexican_hat(1.0);
    let j = j_integral(8.0, &model, &h).unwrap();
    let oracle = j_oracle(8.0, s0, alpha, |l| (l * l - s0 * s0).abs().powf(-2.0 * alpha), 40.0, 1_000_000);
    assert!((j / oracle - 1.0).abs() < 5e-5, "{j} vs {oracle}");

    let geg = SpectralModel::gegenbauer(0.3, alpha, 1.0).unwrap();
    let s = geg.s0();
    let dens = |l: f64| s.powf(-4.0 * alpha) * ((1.0 - 0.3) / (l.cos() - 0.3).abs()).powf(2.0 * alpha);
    for a in [2.0, 8.0] {
        let j = j_integral(a, &geg, &h).unwrap();
        let oracle = j_oracle(a, s, alpha, dens, 40f64.min(a * PI), 1_000_000);
        assert!((j / oracle - 1.0).abs() < 5e-5, "a = {a}: {j} vs {oracle}");
    }
}

#[test]
fn j_approaches_level_at_rate_a_minus_two() {
    let model = SpectralModel::gegenbauer(0.3, 0.1, 1.0).unwrap();
    let h = mexican_hat(1.0);
    let target = constant_c2(&h) * model.level_at_origin();
    let scaled: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .map(|&a| {
            let j = j_integral(a, &model, &h).unwrap();
            assert!(j > 0.0);
            (j - target).abs() * a * a
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::MAX, 0f64), |(l, u), &x| (l.min(x), u.max(x)));
    assert!(hi / lo < 1.5, "{scaled:?}");
}

#[test]
fn curvature_coefficient_is_alpha_kappa() {
    // for h ≡ 1, a²(J(a) − c₂ s0^{-4α}) → α κ s0^{-4α-2}
    let (s0, alpha) = (1.27f64, 0.1);
    let model = SpectralModel::flat(s0, alpha).unwrap();
    let h = mexican_hat(1.0);
    let c2 = constant_c2(&h);
    let kappa = constant_kappa(&h);
    assert!((kappa - 10.0 * PI).abs() < 1e-9);
    let limit = alpha * kappa * s0.powf(-4.0 * alpha - 2.0);
    let mut prev = f64::INFINITY;
    for a in [4.0, 8.0, 16.0, 32.0] {
        let j = j_integral(a, &model, &h).unwrap();
        let rel = ((j - c2 * s0.powf(-4.0 * alpha)) * a * a / limit - 1.0).abs();
        assert!(rel < prev);
        prev = rel;
    }
    assert!(prev < 0.01, "{prev}");
    // the peak power is a different number altogether
    assert!((constant_c3(&h) / kappa - 1.0).abs() > 0.5);
}

#[test]
fn zero_density_gives_zero() {
    let model = SpectralModel::new(1.27, 0.1, |_| 0.0).unwrap();
    assert_eq!(j_integral(4.0, &model, &mexican_hat(1.0)).unwrap(), 0.0);
}

#[test]
fn hat_constants_and_scaling() {
    let c3 = 32.0 * PI.sqrt() / (3.0 * 1f64.exp().powi(2));
    assert!((constant_c3(&mexican_hat(1.0)) - c3).abs() < 1e-9);
    for s in [0.5, 2.0] {
        let h = mexican_hat(s);
        assert!((constant_c3(&h) - s * c3).abs() < 1e-9 * s);
        assert!((constant_c2(&h) - 2.0 * PI).abs() < 1e-9);
        // Plancherel cross-check with an independent Simpson rule
        let r = h.support_radius_time();
        let l2 = simpson(|t| hat_psi(s, t).powi(2), -r, r, 20_000);
        assert!((l2 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn j_rejects_bad_scale() {
    let model = SpectralModel::flat(1.27, 0.1).unwrap();
    assert!(matches!(
        j_integral(0.0, &model, &mexican_hat(1.0)),
        Err(Error::InvalidParameter { .. })
    ));
}
