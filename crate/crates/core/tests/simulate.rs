mod common;

use common::*;
use cyclomem::simulate::{convolve_valid, innovations, simulate, simulate_with, SimulateOptions};
use cyclomem::spectral::{gegenbauer_coeffs, theoretical_autocovariances, GegenbauerSpec};
use cyclomem::{Error, SampledSeries};
use proptest::prelude::*;

fn paper_spec() -> GegenbauerSpec {
    GegenbauerSpec::new(0.1, 0.3, 1.0, 10_000).unwrap()
}

#[test]
fn variance_and_short_lags_match_ma_oracle() {
    let spec = paper_spec();
    let x = simulate(&spec, 100_000, 20_240_601).unwrap();
    let gamma = theoretical_autocovariances(&spec, 5);
    let var = autocov_zero_mean(x.values(), 0);
    assert!((var / gamma[0] - 1.0).abs() < 0.05, "{var} vs {}", gamma[0]);
    for (lag, g) in gamma.iter().enumerate().skip(1) {
        let (m, se) = batch_autocov(x.values(), lag, 50);
        assert!((m - g).abs() < 3.0 * se, "lag {lag}: {m} vs {g} (se {se})");
    }
}

#[test]
fn sample_mean_is_near_zero() {
    let spec = paper_spec();
    let x = simulate(&spec, 100_000, 7).unwrap();
    let mean = x.values().iter().sum::<f64>() / x.len() as f64;
    // long memory inflates the standard error, hence the generous factor
    let gamma = theoretical_autocovariances(&spec, 0)[0];
    assert!(mean.abs() < 10.0 * (gamma / x.len() as f64).sqrt(), "{mean}");
}

#[test]
fn deterministic_per_seed() {
    let spec = GegenbauerSpec::new(0.2, -0.4, 1.3, 500).unwrap();
    let a = simulate(&spec, 2_000, 99).unwrap();
    let b = simulate(&spec, 2_000, 99).unwrap();
    let c = simulate(&spec, 2_000, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.values(), c.values());
    assert_eq!(a.dt(), 1.0);
    assert_eq!(a.seed(), 99);
}

#[test]
fn degenerate_specs() {
    let quiet = GegenbauerSpec::new(0.1, 0.3, 0.0, 100).unwrap();
    assert!(simulate(&quiet, 50, 1).unwrap().values().iter().all(|&v| v == 0.0));
    let white = GegenbauerSpec::new(0.1, 0.3, 2.0, 1).unwrap();
    assert_eq!(simulate(&white, 300, 5).unwrap().into_values(), innovations(300, 2.0, 5));
}

#[test]
fn fft_path_matches_direct_convolution() {
    let spec = GegenbauerSpec::new(0.3, 0.9, 1.0, 3_000).unwrap();
    let c = gegenbauer_coeffs(&spec, 2_999);
    let x = innovations(12_000, 1.0, 3);
    let fast = convolve_valid(&x, &c);
    assert_eq!(fast.len(), x.len() - c.len() + 1);
    for t in (0..fast.len()).step_by(97) {
        let direct: f64 = c.iter().enumerate().map(|(k, ck)| ck * x[t + c.len() - 1 - k]).sum();
        assert!((fast[t] - direct).abs() < 1e-10 * (1.0 + direct.abs()), "t = {t}");
    }
}

#[test]
fn capacity_error_over_budget() {
    let spec = paper_spec();
    let opts = SimulateOptions { memory_budget: 15_000 };
    match simulate_with(&spec, 10_000, 1, opts) {
        Err(Error::Capacity { needed, budget }) => assert_eq!((needed, budget), (20_000, 15_000)),
        other => panic!("{other:?}"),
    }
    assert!(simulate(&spec, 0, 1).is_err());
}

#[test]
fn csv_and_binary_round_trip_exactly() {
    let spec = GegenbauerSpec::new(0.25, 0.1, 1.0, 200).unwrap();
    let x = simulate(&spec, 1_000, 11).unwrap().rescale(0.05).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    x.write_csv(&csv).unwrap();
    assert_eq!(SampledSeries::read_csv(&csv, 0.05).unwrap().values(), x.values());
    let bin = dir.path().join("x.bin");
    x.write_binary(&bin).unwrap();
    let back = SampledSeries::read_binary(&bin).unwrap();
    assert_eq!(back.values(), x.values());
    assert_eq!((back.dt(), back.seed()), (0.05, 11));
    assert_eq!(std::fs::metadata(&bin).unwrap().len(), 32 + 8 * 1_000);
}

#[test]
fn rescale_is_metadata_only() {
    let x = SampledSeries::new(vec![1.0; 10_000], 1.0, 0).unwrap();
    assert_eq!(x.rescale(1.0).unwrap(), x);
    let half = x.rescale(0.5).unwrap();
    assert_eq!(half.values(), x.values());
    assert_eq!(half.span(), 0.5 * x.span());
    let d5 = 5f64.powf(-22.0 - 1.0 / 6.0);
    assert_eq!(x.rescale(d5).unwrap().span(), 10_000.0 * d5);
}

proptest! {
    #[test]
    fn binary_encoding_is_bit_exact(values in prop::collection::vec(-1e300f64..1e300, 1..200), dt in 1e-9f64..1e3, seed: u64) {
        let x = SampledSeries::new(values, dt, seed).unwrap();
        let mut buf = Vec::new();
        x.encode(&mut buf).unwrap();
        let y = SampledSeries::decode(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(y.values(), x.values());
        prop_assert_eq!(y.dt().to_bits(), x.dt().to_bits());
        prop_assert_eq!(y.seed(), seed);
    }

    #[test]
    fn truncated_stream_is_rejected(len in 1usize..50, cut in 1usize..8) {
        let x = SampledSeries::new(vec![0.5; len], 1.0, 0).unwrap();
        let mut buf = Vec::new();
        x.encode(&mut buf).unwrap();
        buf.truncate(buf.len() - cut);
        prop_assert!(SampledSeries::decode(&mut buf.as_slice()).is_err());
    }
}
