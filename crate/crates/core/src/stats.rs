//! Level schedules and the two statistics built from transform banks.
//!
//! At level `j` the first statistic averages `d^{(θ_j,δ_j)}(a_j, b_jk)²` over
//! the `m_j` shifts. The second statistic is the finite difference of first
//! statistics across two scales, divided by `a_j^{-2} − a_{j+1}^{-2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::quad::pairwise_sum;
use crate::series::SampledSeries;
use crate::transform::{cell_weights, CellWeights, TransformRequest};

/// Which family of sequences a schedule follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `a_j = j`, `b_jk = k`, `γ_j = 1`, `r_j = a_j^{-2.5}`, `m_j = a_j⁹`,
    /// `θ_j = j^{13/6}`, `δ_j = j^{-22-1/6}`, used verbatim.
    PaperTheory,
    /// The same growth directions, capped so that a finite series can
    /// support them.
    Desk,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-theory" => Ok(Preset::PaperTheory),
            "desk" => Ok(Preset::Desk),
            other => Err(Error::Config(format!("unknown schedule preset `{other}`"))),
        }
    }
}

/// Parameters of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub j: u32,
    pub a: f64,
    pub m: usize,
    pub gamma: f64,
    pub r: f64,
    pub theta: f64,
    pub delta: f64,
    /// `b_jk = shift_offset + k γ` for `k = 1..=m`.
    pub shift_offset: f64,
}

impl Level {
    pub fn shift(&self, k: usize) -> f64 {
        self.shift_offset + k as f64 * self.gamma
    }

    pub fn shifts(&self) -> Vec<f64> {
        (1..=self.m).map(|k| self.shift(k)).collect()
    }

    /// `b̃_j = max_k |b_jk|`.
    pub fn max_shift(&self) -> f64 {
        self.shift(1).abs().max(self.shift(self.m).abs())
    }

    pub fn request(&self, b: f64) -> TransformRequest {
        TransformRequest {
            a: self.a,
            b,
            theta: self.theta,
            delta: self.delta,
        }
    }

    /// Samples read by one window of this level.
    pub fn window_len(&self) -> usize {
        self.request(0.0).window_len()
    }
}

/// A change made by the desk preset to make a level computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repair {
    pub j: u32,
    pub field: String,
    pub from: f64,
    pub to: f64,
    pub reason: String,
}

/// Optional knobs for [`build_schedule`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    /// Upper bound on `m_j` (desk only, default 256).
    pub m_cap: Option<usize>,
    /// Shift spacing `γ_j` (default 1).
    pub gamma: Option<f64>,
    /// Smallest usable `δ_j`: the spacing of the data (desk only, default 1).
    pub native_dt: Option<f64>,
    /// Physical time spanned by the data; caps `θ_j` (desk only).
    pub available_span: Option<f64>,
}

pub const DEFAULT_M_CAP: usize = 256;

/// The materialised schedule and any repairs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSchedule {
    pub preset: Preset,
    pub levels: Vec<Level>,
    pub repairs: Vec<Repair>,
}

impl LevelSchedule {
    pub fn level(&self, j: u32) -> Result<&Level> {
        self.levels
            .iter()
            .find(|l| l.j == j)
            .ok_or_else(|| Error::Config(format!("level {j} not in schedule")))
    }

    /// Checks ordering and coverage invariants. Desk schedules may hold `θ`
    /// and `δ` constant once caps bind, so monotonicity is not strict there.
    pub fn validate(&self) -> Result<()> {
        let strict = self.preset == Preset::PaperTheory;
        for l in &self.levels {
            if l.m < 1 {
                return Err(Error::DegenerateSchedule(format!("m_{} is zero", l.j)));
            }
            if !(l.delta > 0.0 && l.delta <= l.theta) {
                return Err(Error::DegenerateSchedule(format!(
                    "level {}: delta {} must lie in (0, theta = {}]",
                    l.j, l.delta, l.theta
                )));
            }
        }
        for w in self.levels.windows(2) {
            let (p, n) = (&w[0], &w[1]);
            let bad = |what: &str| {
                Err(Error::DegenerateSchedule(format!(
                    "{what} between levels {} and {}",
                    p.j, n.j
                )))
            };
            if n.a <= p.a {
                return bad("a_j not strictly increasing");
            }
            if n.m < p.m {
                return bad("m_j decreasing");
            }
            if n.theta < p.theta || (strict && n.theta == p.theta) {
                return bad("theta_j not increasing");
            }
            if n.delta > p.delta || (strict && n.delta == p.delta) {
                return bad("delta_j not decreasing");
            }
        }
        let infeasible: Vec<u32> = self
            .levels
            .iter()
            .filter(|l| l.theta < l.max_shift())
            .map(|l| l.j)
            .collect();
        if !infeasible.is_empty() {
            return Err(Error::Feasibility { levels: infeasible });
        }
        Ok(())
    }
}

fn paper_level(j: u32, gamma: f64) -> Level {
    let jf = j as f64;
    Level {
        j,
        a: jf,
        m: (jf.powi(9)).round() as usize,
        gamma,
        r: jf.powf(-2.5),
        theta: jf.powf(13.0 / 6.0),
        delta: jf.powf(-22.0 - 1.0 / 6.0),
        shift_offset: 0.0,
    }
}

/// Materialises levels `1..=max_j` of a preset.
///
/// `PaperTheory` uses the sequences verbatim and fails with
/// [`Error::Feasibility`] listing every level whose half-width is below its
/// largest shift. `Desk` floors `δ_j` at the data spacing, caps `θ_j` so the
/// window fits the data, sets `m_j = max(2, min(m_cap, ⌊θ_j/(2γ_j)⌋))`,
/// centres the shifts in the window, and records each change as a
/// [`Repair`].
pub fn build_schedule(preset: Preset, max_j: u32, overrides: &ScheduleOverrides) -> Result<LevelSchedule> {
    if max_j < 1 {
        return Err(Error::Config("max_j must be at least 1".into()));
    }
    let gamma = overrides.gamma.unwrap_or(1.0);
    if !(gamma > 0.0) {
        return Err(Error::Config("gamma must be positive".into()));
    }
    let mut repairs = Vec::new();
    let levels = match preset {
        Preset::PaperTheory => (1..=max_j).map(|j| paper_level(j, gamma)).collect(),
        Preset::Desk => {
            let m_cap = overrides.m_cap.unwrap_or(DEFAULT_M_CAP);
            if m_cap < 2 {
                return Err(Error::Config("m_cap must be at least 2".into()));
            }
            let dt = overrides.native_dt.unwrap_or(1.0);
            if !(dt > 0.0) {
                return Err(Error::Config("native_dt must be positive".into()));
            }
            let mut out = Vec::new();
            for j in 1..=max_j {
                let raw = paper_level(j, gamma);
                let mut lvl = raw;
                let mut note = |field: &str, from: f64, to: f64, reason: &str| {
                    repairs.push(Repair {
                        j,
                        field: field.into(),
                        from,
                        to,
                        reason: reason.into(),
                    })
                };
                if lvl.delta < dt {
                    note("delta", lvl.delta, dt, "floored at the data spacing");
                    lvl.delta = dt;
                }
                if let Some(span) = overrides.available_span {
                    // the window reads at most 2θ/δ + 2 samples
                    let cap = 0.5 * (span - 2.0 * lvl.delta);
                    if lvl.theta > cap {
                        note("theta", lvl.theta, cap, "capped so the window fits the data");
                        lvl.theta = cap;
                    }
                }
                if lvl.theta < lvl.delta {
                    return Err(Error::DegenerateSchedule(format!(
                        "level {j}: the data cannot hold one window (theta {} < delta {})",
                        lvl.theta, lvl.delta
                    )));
                }
                let m = ((lvl.theta / (2.0 * gamma)).floor() as usize).min(m_cap).max(2);
                if m != raw.m {
                    note("m", raw.m as f64, m as f64, "m_j = max(2, min(m_cap, floor(theta_j / (2 gamma_j))))");
                }
                lvl.m = m;
                lvl.shift_offset = -((m + 1) as f64) / 2.0 * gamma;
                note("shift_offset", 0.0, lvl.shift_offset, "shifts centred in the window");
                out.push(lvl);
            }
            out
        }
    };
    let schedule = LevelSchedule {
        preset,
        levels,
        repairs,
    };
    schedule.validate()?;
    Ok(schedule)
}

/// Precomputed cell weights for every shift of one level.
#[derive(Debug, Clone)]
pub struct LevelKernel {
    level: Level,
    banks: Vec<CellWeights>,
}

impl LevelKernel {
    pub fn new(filter: &dyn Filter, level: &Level) -> Result<Self> {
        let banks = level
            .shifts()
            .into_iter()
            .map(|b| cell_weights(filter, &level.request(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelKernel { level: *level, banks })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn window_len(&self) -> usize {
        self.banks.first().map_or(0, CellWeights::len)
    }

    fn squares(&self, window: &[f64], out: &mut Vec<f64>) {
        out.extend(self.banks.iter().map(|w| {
            let d = w.apply(window);
            d * d
        }));
    }

    /// Average of the `m_j` squared transforms over the window starting at
    /// `values[0]`.
    pub fn first_statistic(&self, values: &[f64]) -> Result<f64> {
        let n = self.window_len();
        if values.len() < n {
            return Err(Error::Coverage {
                first: 0,
                last: n as i64 - 1,
                available: values.len(),
            });
        }
        let mut sq = Vec::with_capacity(self.banks.len());
        self.squares(&values[..n], &mut sq);
        Ok(pairwise_sum(&sq) / sq.len() as f64)
    }

    /// The first statistic averaged over `⌊len / window⌋` disjoint windows
    /// tiling `values`. Returns the value and the number of squared
    /// coefficients averaged.
    pub fn block_statistic(&self, values: &[f64]) -> Result<BlockStatistic> {
        let n = self.window_len();
        let blocks = values.len() / n;
        if blocks == 0 {
            return Err(Error::Coverage {
                first: 0,
                last: n as i64 - 1,
                available: values.len(),
            });
        }
        let mut sq = Vec::with_capacity(blocks * self.banks.len());
        for chunk in values.chunks_exact(n) {
            self.squares(chunk, &mut sq);
        }
        Ok(BlockStatistic {
            value: pairwise_sum(&sq) / sq.len() as f64,
            blocks,
            terms: sq.len(),
        })
    }
}

/// Output of [`LevelKernel::block_statistic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStatistic {
    pub value: f64,
    pub blocks: usize,
    /// Squared coefficients averaged, `m_j` times `blocks`.
    pub terms: usize,
}

fn check_grid(series: &SampledSeries, level: &Level) -> Result<()> {
    if (series.dt() - level.delta).abs() > 1e-9 * level.delta {
        return Err(Error::GridMismatch {
            series_dt: series.dt(),
            delta: level.delta,
        });
    }
    Ok(())
}

/// `(1/m_j) Σ_k d^{(θ_j,δ_j)}(a_j, b_jk)²` on the window formed by the first
/// samples of `series`, read in window-local coordinates: sample 0 sits at
/// `⌊−θ_j/δ_j⌋ δ_j`. The series spacing must equal `δ_j`.
pub fn first_statistic(series: &SampledSeries, filter: &dyn Filter, schedule: &LevelSchedule, j: u32) -> Result<f64> {
    let level = schedule.level(j)?;
    check_grid(series, level)?;
    LevelKernel::new(filter, level)?.first_statistic(series.values())
}

/// [`first_statistic`] averaged over every disjoint window of the series.
pub fn block_first_statistic(
    series: &SampledSeries,
    filter: &dyn Filter,
    schedule: &LevelSchedule,
    j: u32,
) -> Result<BlockStatistic> {
    let level = schedule.level(j)?;
    check_grid(series, level)?;
    LevelKernel::new(filter, level)?.block_statistic(series.values())
}

/// `(stat_j − stat_{j+1}) / (a_j^{-2} − a_{j+1}^{-2})`.
pub fn second_statistic(stat_j: f64, stat_j1: f64, a_j: f64, a_j1: f64) -> Result<f64> {
    if !(a_j > 0.0 && a_j1 > 0.0) {
        return Err(Error::param("a", "scales must be positive"));
    }
    if a_j == a_j1 {
        return Err(Error::DegenerateSchedule(format!("equal scales a_j = a_j+1 = {a_j}")));
    }
    Ok((stat_j - stat_j1) / (a_j.powi(-2) - a_j1.powi(-2)))
}

/// Partial sums of the four series whose convergence the consistency
/// argument needs, evaluated on a finite schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub j: Vec<u32>,
    /// `Σ 1/(r² m)`
    pub averaging: Vec<f64>,
    /// `Σ a²/(r² γ² m)`
    pub spacing: Vec<f64>,
    /// `Σ θ² δ^s / r²`
    pub discretisation: Vec<f64>,
    /// `Σ θ a^{2q−1} / (r² (θ − b̃)^{2q−2})`, infinite once `θ ≤ b̃`
    pub truncation: Vec<f64>,
}

/// Partial-sum report for a schedule, given the smoothness exponent `s` of
/// the covariance at the origin and the tail exponent `q` of the filter.
pub fn summability_report(schedule: &LevelSchedule, s: f64, q: f64) -> SummabilityReport {
    let mut rep = SummabilityReport {
        j: Vec::new(),
        averaging: Vec::new(),
        spacing: Vec::new(),
        discretisation: Vec::new(),
        truncation: Vec::new(),
    };
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    for l in &schedule.levels {
        let r2 = l.r * l.r;
        let m = l.m as f64;
        s1 += 1.0 / (r2 * m);
        s2 += l.a * l.a / (r2 * l.gamma * l.gamma * m);
        s3 += l.theta * l.theta * l.delta.powf(s) / r2;
        let gap = l.theta - l.max_shift();
        s4 += if gap > 0.0 {
            l.theta * l.a.powf(2.0 * q - 1.0) / (r2 * gap.powf(2.0 * q - 2.0))
        } else {
            f64::INFINITY
        };
        rep.j.push(l.j);
        rep.averaging.push(s1);
        rep.spacing.push(s2);
        rep.discretisation.push(s3);
        rep.truncation.push(s4);
    }
    rep
}
