//! Inversion of the moment map `Φ(s0, α) = (s0^{-4α}, α s0^{-4α-2})`.
//!
//! Raw moment estimates are first clamped into the admissible region
//! `𝒟 = (0, 1) × (0, y1²/2)` with a margin `ε`, then inverted in closed form
//! through the principal branch of the Lambert W function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::series::SampledSeries;
use crate::spectral::{constant_c2, constant_c3, constant_kappa};
use crate::stats::{block_first_statistic, first_statistic, second_statistic, LevelSchedule};

const INV_E: f64 = 0.367_879_441_171_442_33;
const MAX_HALLEY: usize = 50;

/// Principal branch `W₀` of the inverse of `w ↦ w e^w`, for `x ≥ −1/e`.
///
/// Starts from the branch-point series for `x ≤ 0.3` and from Winitzki's
/// logarithmic approximation above, then runs Halley's iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E {
        // allow the last ulp of rounding in −1/e
        if (x + INV_E).abs() <= 4.0 * f64::EPSILON * INV_E {
            return Ok(-1.0);
        }
        return Err(Error::Domain {
            what: "lambert_w0",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut w = if x <= 0.3 {
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))
    } else {
        let l = x.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    };
    if w <= -1.0 {
        return Ok(-1.0);
    }
    for _ in 0..MAX_HALLEY {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = w - step;
        let done = step.abs() <= 1e-15 * w.abs().max(1e-300);
        w = if next <= -1.0 { 0.5 * (w - 1.0) } else { next };
        if done {
            break;
        }
    }
    Ok(w)
}

/// A pair of moment estimates `(y1, y2)`, targeting
/// `(s0^{-4α}, α s0^{-4α-2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub y1: f64,
    pub y2: f64,
}

impl MomentPair {
    pub fn new(y1: f64, y2: f64) -> Self {
        MomentPair { y1, y2 }
    }

    /// Strict membership in `𝒟`.
    pub fn in_domain(&self) -> bool {
        self.y1 > 0.0 && self.y1 < 1.0 && self.y2 > 0.0 && self.y2 < 0.5 * self.y1 * self.y1
    }
}

/// Which clamps of the truncation map fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clamps(pub u8);

impl Clamps {
    pub const Y1_LOW: Clamps = Clamps(1);
    pub const Y1_HIGH: Clamps = Clamps(2);
    pub const Y2_LOW: Clamps = Clamps(4);
    pub const Y2_HIGH: Clamps = Clamps(8);

    pub fn contains(self, other: Clamps) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Whether either clamp on `y1` (index 0) or on `y2` (index 1) fired.
    pub fn per_coordinate(self) -> [bool; 2] {
        [self.0 & 3 != 0, self.0 & 12 != 0]
    }
}

impl std::ops::BitOrAssign for Clamps {
    fn bitor_assign(&mut self, rhs: Clamps) {
        self.0 |= rhs.0;
    }
}

/// The truncation map with margin `ε`:
/// `T1 = max(ε, min(y1, 1 − ε))`, `T2 = max(ε²/4, min(y2, T1²/2 − ε²/4))`.
pub fn truncate(y: MomentPair, epsilon: f64) -> MomentPair {
    truncate_flagged(y, epsilon).0
}

/// [`truncate`] plus the clamps that fired.
pub fn truncate_flagged(y: MomentPair, epsilon: f64) -> (MomentPair, Clamps) {
    let mut flags = Clamps::default();
    let (lo1, hi1) = (epsilon, 1.0 - epsilon);
    let t1 = if y.y1 < lo1 {
        flags |= Clamps::Y1_LOW;
        lo1
    } else if y.y1 > hi1 || y.y1.is_nan() {
        flags |= Clamps::Y1_HIGH;
        hi1
    } else {
        y.y1
    };
    let lo2 = 0.25 * epsilon * epsilon;
    let hi2 = 0.5 * t1 * t1 - lo2;
    let t2 = if y.y2 > hi2 || y.y2.is_nan() {
        flags |= Clamps::Y2_HIGH;
        hi2
    } else if y.y2 < lo2 {
        flags |= Clamps::Y2_LOW;
        lo2
    } else {
        y.y2
    };
    (MomentPair { y1: t1, y2: t2 }, flags)
}

/// `Φ(s0, α) = (s0^{-4α}, α s0^{-4α-2})`.
pub fn forward(s0: f64, alpha: f64) -> MomentPair {
    let y1 = s0.powf(-4.0 * alpha);
    MomentPair {
        y1,
        y2: alpha * y1 / (s0 * s0),
    }
}

/// `Φ⁻¹(y) = (e^{G/2}, (y2/y1) e^G)` with `G = W₀(−y1 ln y1 / (2 y2))`.
/// Returns `(s0, α)`; fails unless `y ∈ 𝒟`.
pub fn invert(y: MomentPair) -> Result<(f64, f64)> {
    if !y.in_domain() {
        return Err(Error::Domain {
            what: "moment inversion (y outside D)",
            value: if y.y1 > 0.0 && y.y1 < 1.0 { y.y2 } else { y.y1 },
        });
    }
    let g = lambert_w0(-y.y1 * y.y1.ln() / (2.0 * y.y2))?;
    Ok(((0.5 * g).exp(), y.y2 / y.y1 * g.exp()))
}

/// The adjusted estimate and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub s0_hat: f64,
    pub alpha_hat: f64,
    pub clamps: Clamps,
    pub epsilon: f64,
    /// The moment pair after truncation.
    pub moments: MomentPair,
}

impl Estimate {
    pub fn truncation_active(&self) -> [bool; 2] {
        self.clamps.per_coordinate()
    }
}

/// Truncates `y` with margin `ε ∈ (0, 1)` and inverts.
pub fn estimate_from_moments(y: MomentPair, epsilon: f64) -> Result<Estimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!(
            "truncation margin must lie in (0, 1), got {epsilon}; at least two averaged terms are needed"
        )));
    }
    let (t, clamps) = truncate_flagged(y, epsilon);
    let (s0_hat, alpha_hat) = invert(t)?;
    Ok(Estimate {
        s0_hat,
        alpha_hat,
        clamps,
        epsilon,
        moments: t,
    })
}

/// Normaliser applied to the second statistic before inversion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondStatNorm {
    /// `κ = 2 ∫ λ² |ψ̂|²`, the constant the second statistic actually
    /// converges with.
    #[default]
    SecondMoment,
    /// `c₃ = max |ψ̂|²`.
    PeakPower,
}

impl std::str::FromStr for SecondStatNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "second-moment" => Ok(SecondStatNorm::SecondMoment),
            "peak-power" => Ok(SecondStatNorm::PeakPower),
            other => Err(Error::Config(format!("unknown normaliser `{other}`"))),
        }
    }
}

impl SecondStatNorm {
    pub fn constant(self, filter: &dyn Filter) -> f64 {
        match self {
            SecondStatNorm::SecondMoment => constant_kappa(filter),
            SecondStatNorm::PeakPower => constant_c3(filter),
        }
    }
}

/// How [`estimate`] forms its first statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// One window, `m_j` shifts; `ε = 1/m_j`.
    #[default]
    SingleWindow,
    /// Every disjoint window of the series; `ε` is one over the total number
    /// of squared coefficients averaged.
    Blocks,
}

/// Options for [`estimate`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub norm: SecondStatNorm,
    pub averaging: Averaging,
}

/// Estimates `(s0, α)` from level `j` and `j + 1` of the schedule.
///
/// `y1 = S_j / c₂`, `y2 = ΔS_j / K` with `K` chosen by `options.norm`, then
/// truncation and inversion.
pub fn estimate(
    series: &SampledSeries,
    filter: &dyn Filter,
    schedule: &LevelSchedule,
    j: u32,
    options: EstimateOptions,
) -> Result<Estimate> {
    let (lj, lj1) = (schedule.level(j)?, schedule.level(j + 1)?);
    let (s_j, s_j1, terms) = match options.averaging {
        Averaging::SingleWindow => (
            first_statistic(series, filter, schedule, j)?,
            first_statistic(series, filter, schedule, j + 1)?,
            lj.m,
        ),
        Averaging::Blocks => {
            let a = block_first_statistic(series, filter, schedule, j)?;
            let b = block_first_statistic(series, filter, schedule, j + 1)?;
            (a.value, b.value, a.terms)
        }
    };
    let ds = second_statistic(s_j, s_j1, lj.a, lj1.a)?;
    let y = MomentPair::new(s_j / constant_c2(filter), ds / options.norm.constant(filter));
    estimate_from_moments(y, 1.0 / terms as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w0_fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-INV_E).unwrap() + 1.0).abs() < 1e-6);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!(lambert_w0(-0.5).is_err());
    }

    #[test]
    fn truncate_examples() {
        let e = 0.1;
        assert_eq!(truncate(MomentPair::new(0.5, 0.1), e), MomentPair::new(0.5, 0.1));
        let t = truncate(MomentPair::new(1.2, 0.9), e);
        assert!((t.y1 - 0.9).abs() < 1e-15);
        assert!((t.y2 - 0.4025).abs() < 1e-15);
        let (t, f) = truncate_flagged(MomentPair::new(-0.3, -0.2), e);
        assert_eq!(t.y1, 0.1);
        assert!((t.y2 - 0.0025).abs() < 1e-17);
        assert!(f.contains(Clamps::Y1_LOW) && f.contains(Clamps::Y2_LOW));
    }

    #[test]
    fn paper_point_round_trip() {
        let y = forward(1.27, 0.1);
        assert!((y.y1 - 0.9088).abs() < 1e-4);
        assert!((y.y2 - 0.05635).abs() < 1e-4);
        let (s0, a) = invert(y).unwrap();
        assert!((s0 - 1.27).abs() < 1e-12);
        assert!((a - 0.1).abs() < 1e-12);
        let g = lambert_w0(-y.y1 * y.y1.ln() / (2.0 * y.y2)).unwrap();
        assert!((g - 2.0 * 1.27f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn invert_rejects_outside() {
        assert!(invert(MomentPair::new(0.9, 0.5)).is_err());
        assert!(invert(MomentPair::new(1.5, 0.1)).is_err());
    }

    #[test]
    fn alpha_tends_to_half_at_boundary() {
        let y1 = 0.6;
        let mut last = 0.0;
        for k in 1..=40 {
            let y2 = 0.5 * y1 * y1 * (1.0 - 0.5f64.powi(k));
            let (_, a) = invert(MomentPair::new(y1, y2)).unwrap();
            assert!(a > last && a < 0.5);
            last = a;
        }
        assert!(0.5 - last < 1e-9);
    }

    #[test]
    fn margin_must_be_proper() {
        assert!(matches!(
            estimate_from_moments(MomentPair::new(0.5, 0.1), 1.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn exact_moments_need_no_clamp() {
        let e = estimate_from_moments(forward(1.27, 0.1), 1e-3).unwrap();
        assert!(e.clamps.is_empty());
        assert!((e.s0_hat - 1.27).abs() < 1e-12);
    }
}
