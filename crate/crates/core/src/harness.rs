//! Monte Carlo harness: seeded parallel replications over a grid of levels
//! and data fractions, persisted as CSV, plus summary tables.
//!
//! Every replication simulates one path at full length and reuses it for all
//! `(fraction, level)` cells; a fraction `p` keeps the first `⌈pN⌉` samples.
//! Next to the CSV a `<output>.meta.toml` sidecar echoes the configuration,
//! the true parameters and the materialised schedules with their repairs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_from_moments, forward, Averaging, MomentPair, SecondStatNorm};
use crate::filter::MexicanHat;
use crate::simulate::simulate;
use crate::spectral::{constant_c2, constant_c3, constant_kappa, GegenbauerSpec};
use crate::stats::{build_schedule, second_statistic, LevelKernel, LevelSchedule, Preset, ScheduleOverrides};

/// Column names of the records file, in order.
pub const CSV_HEADER: [&str; 11] = [
    "replication",
    "seed",
    "j",
    "fraction",
    "stat1",
    "stat2",
    "s0_hat",
    "alpha_hat",
    "clamps",
    "error_code",
    "wall_ms",
];

/// The simulated process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub mu: f64,
    pub eta: f64,
    pub n_terms: usize,
    /// Innovation standard deviation. When absent it is chosen so the
    /// density at the origin is `s0^{-4μ}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_eps: Option<f64>,
    /// Physical time between consecutive samples (default 1).
    #[serde(default = "one")]
    pub sample_dt: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn spec(&self) -> Result<GegenbauerSpec> {
        match self.sigma_eps {
            Some(s) => GegenbauerSpec::new(self.mu, self.eta, s, self.n_terms),
            None => GegenbauerSpec::unit_level(self.mu, self.eta, self.n_terms, self.sample_dt),
        }
    }

    /// `(s0, α)` in physical units.
    pub fn truth(&self) -> (f64, f64) {
        (self.eta.acos() / self.sample_dt, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default = "one")]
    pub sigma: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { sigma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub preset: Preset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            preset: Preset::Desk,
            m_cap: None,
            gamma: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default)]
    pub norm: SecondStatNorm,
    #[serde(default = "blocks")]
    pub averaging: Averaging,
}

fn blocks() -> Averaging {
    Averaging::Blocks
}

/// A full experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub replications: usize,
    pub series_length: usize,
    pub master_seed: u64,
    /// Levels at which records are produced; level `j + 1` is computed
    /// alongside each `j` for the second statistic.
    pub levels: Vec<u32>,
    pub fractions: Vec<f64>,
    pub output_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub model: ModelConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorConfig,
}

fn default_estimator() -> EstimatorConfig {
    EstimatorConfig {
        norm: SecondStatNorm::default(),
        averaging: Averaging::Blocks,
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.series_length < 1 {
            return bad("series_length must be at least 1".into());
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return bad("levels must be a non-empty list of positive integers".into());
        }
        if self.fractions.is_empty() {
            return bad("fractions must not be empty".into());
        }
        if self.fractions.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return bad("fractions must lie in (0, 1]".into());
        }
        if self.fractions.windows(2).any(|w| w[1] <= w[0]) {
            return bad("fractions must be sorted ascending without repeats".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if !(self.model.sample_dt > 0.0) {
            return bad("model.sample_dt must be positive".into());
        }
        MexicanHat::new(self.filter.sigma)?;
        self.model.spec()?;
        let (s0, alpha) = self.model.truth();
        if !forward(s0, alpha).in_domain() {
            return bad(format!(
                "true parameters (s0 = {s0}, alpha = {alpha}) map outside the admissible moment region; \
                 s0 must exceed 1 (reduce sample_dt)"
            ));
        }
        Ok(())
    }

    fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(1) + 1
    }

    /// Number of samples kept for fraction `p`.
    pub fn prefix_len(&self, p: f64) -> usize {
        ((p * self.series_length as f64 - 1e-9).ceil() as usize).clamp(1, self.series_length)
    }

    /// The schedule used for fraction `p`: `θ_j` is capped to the prefix.
    pub fn schedule_for(&self, p: f64) -> Result<LevelSchedule> {
        let overrides = ScheduleOverrides {
            m_cap: self.schedule.m_cap,
            gamma: self.schedule.gamma,
            native_dt: Some(self.model.sample_dt),
            available_span: Some(self.prefix_len(p) as f64 * self.model.sample_dt),
        };
        build_schedule(self.schedule.preset, self.max_level(), &overrides)
    }
}

/// One outcome row. Fields are `None` when the cell could not be computed;
/// `error_code` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub replication: usize,
    pub seed: u64,
    pub j: u32,
    pub fraction: f64,
    pub stat1: Option<f64>,
    pub stat2: Option<f64>,
    pub s0_hat: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub clamps: Option<u8>,
    pub error_code: Option<String>,
    pub wall_ms: u64,
}

impl ExperimentRecord {
    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.replication.to_string(),
            self.seed.to_string(),
            self.j.to_string(),
            self.fraction.to_string(),
            opt(self.stat1),
            opt(self.stat2),
            opt(self.s0_hat),
            opt(self.alpha_hat),
            self.clamps.map(|c| c.to_string()).unwrap_or_default(),
            self.error_code.clone().unwrap_or_default(),
            self.wall_ms.to_string(),
        ]
    }

    fn is_null(&self) -> bool {
        self.s0_hat.is_none()
    }
}

/// Seed of replication `r`: a SplitMix64 scramble of `(master, r)`, so every
/// replication has an independent stream and no sequential dependence.
pub fn replication_seed(master: u64, r: usize) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(r as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// True parameters and the limits the statistics converge to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub s0: f64,
    pub alpha: f64,
    /// `c₂ s0^{-4α}`
    pub stat1_limit: f64,
    /// `α K s0^{-4α-2}` with the configured normaliser `K`.
    pub stat2_limit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FractionMeta {
    fraction: f64,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schedule: Option<LevelSchedule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Constants {
    c2: f64,
    c3: f64,
    kappa: f64,
    sigma_eps: f64,
    epsilon_rule: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Metadata {
    truth: Truth,
    constants: Constants,
    config: ExperimentConfig,
    fractions: Vec<FractionMeta>,
}

/// Path of the metadata sidecar for a records file.
pub fn sidecar_path(records: &Path) -> PathBuf {
    let mut s = records.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

struct FractionPlan {
    fraction: f64,
    samples: usize,
    kernels: std::result::Result<BTreeMap<u32, LevelKernel>, Error>,
}

fn plan(config: &ExperimentConfig, filter: &MexicanHat) -> (Vec<FractionPlan>, Vec<FractionMeta>) {
    let mut plans = Vec::new();
    let mut meta = Vec::new();
    for &p in &config.fractions {
        let samples = config.prefix_len(p);
        let sched = config.schedule_for(p);
        let kernels = sched.as_ref().map_err(clone_err).and_then(|s| {
            s.levels
                .iter()
                .map(|l| Ok((l.j, LevelKernel::new(filter, l)?)))
                .collect::<Result<BTreeMap<_, _>>>()
        });
        meta.push(FractionMeta {
            fraction: p,
            samples,
            error: sched.as_ref().err().map(|e| e.to_string()),
            schedule: sched.ok(),
        });
        plans.push(FractionPlan {
            fraction: p,
            samples,
            kernels,
        });
    }
    (plans, meta)
}

// Errors are not Clone (they may hold io errors); the plan only needs the
// code and message.
fn clone_err(e: &Error) -> Error {
    match e {
        Error::Feasibility { levels } => Error::Feasibility { levels: levels.clone() },
        Error::DegenerateSchedule(m) => Error::DegenerateSchedule(m.clone()),
        other => Error::Config(other.to_string()),
    }
}

struct Cell {
    value: f64,
    terms: usize,
    m: usize,
}

fn replicate(
    config: &ExperimentConfig,
    spec: &GegenbauerSpec,
    plans: &[FractionPlan],
    consts: (f64, f64),
    r: usize,
) -> Vec<ExperimentRecord> {
    let seed = replication_seed(config.master_seed, r);
    let mut out = Vec::with_capacity(plans.len() * config.levels.len());
    let start = Instant::now();
    let series = simulate(spec, config.series_length, seed);
    let sim_ms = start.elapsed().as_millis() as u64;
    for plan in plans {
        let t0 = Instant::now();
        let failure = match (&series, &plan.kernels) {
            (Err(e), _) | (_, Err(e)) => Some(e.code()),
            _ => None,
        };
        if let Some(code) = failure {
            for &j in &config.levels {
                out.push(ExperimentRecord {
                    replication: r,
                    seed,
                    j,
                    fraction: plan.fraction,
                    stat1: None,
                    stat2: None,
                    s0_hat: None,
                    alpha_hat: None,
                    clamps: None,
                    error_code: Some(code.to_string()),
                    wall_ms: sim_ms,
                });
            }
            continue;
        }
        let values = &series.as_ref().expect("checked").values()[..plan.samples];
        let kernels = plan.kernels.as_ref().expect("checked");
        let mut cells: BTreeMap<u32, Result<Cell>> = BTreeMap::new();
        for (&j, k) in kernels {
            let cell = match config.estimator.averaging {
                Averaging::Blocks => k.block_statistic(values).map(|b| Cell {
                    value: b.value,
                    terms: b.terms,
                    m: k.level().m,
                }),
                Averaging::SingleWindow => k.first_statistic(values).map(|v| Cell {
                    value: v,
                    terms: k.level().m,
                    m: k.level().m,
                }),
            };
            cells.insert(j, cell);
        }
        let ms = sim_ms + t0.elapsed().as_millis() as u64;
        for &j in &config.levels {
            let mut rec = ExperimentRecord {
                replication: r,
                seed,
                j,
                fraction: plan.fraction,
                stat1: None,
                stat2: None,
                s0_hat: None,
                alpha_hat: None,
                clamps: None,
                error_code: None,
                wall_ms: ms,
            };
            let outcome = (|| -> Result<()> {
                let cj = cells[&j].as_ref().map_err(clone_err)?;
                rec.stat1 = Some(cj.value);
                let cj1 = cells[&(j + 1)].as_ref().map_err(clone_err)?;
                let (aj, aj1) = (kernels[&j].level().a, kernels[&(j + 1)].level().a);
                let ds = second_statistic(cj.value, cj1.value, aj, aj1)?;
                rec.stat2 = Some(ds);
                if cj.m < 2 {
                    return Err(Error::Config(format!("m_{j} < 2 leaves no truncation margin")));
                }
                let y = MomentPair::new(cj.value / consts.0, ds / consts.1);
                let est = estimate_from_moments(y, 1.0 / cj.terms as f64)?;
                rec.s0_hat = Some(est.s0_hat);
                rec.alpha_hat = Some(est.alpha_hat);
                rec.clamps = Some(est.clamps.bits());
                Ok(())
            })();
            if let Err(e) = outcome {
                rec.error_code = Some(e.code().to_string());
            }
            out.push(rec);
        }
    }
    out
}

fn truth_and_constants(config: &ExperimentConfig, filter: &MexicanHat, spec: &GegenbauerSpec) -> (Truth, Constants) {
    let (s0, alpha) = config.model.truth();
    let c2 = constant_c2(filter);
    let c3 = constant_c3(filter);
    let kappa = constant_kappa(filter);
    let k = match config.estimator.norm {
        SecondStatNorm::SecondMoment => kappa,
        SecondStatNorm::PeakPower => c3,
    };
    let y = forward(s0, alpha);
    let rule = match config.estimator.averaging {
        Averaging::Blocks => "epsilon = 1 / (m_j * blocks_j)",
        Averaging::SingleWindow => "epsilon = 1 / m_j",
    };
    (
        Truth {
            s0,
            alpha,
            stat1_limit: c2 * y.y1,
            stat2_limit: k * y.y2,
        },
        Constants {
            c2,
            c3,
            kappa,
            sigma_eps: spec.sigma_eps,
            epsilon_rule: rule.into(),
        },
    )
}

/// Runs the experiment, writes the records CSV (rows in replication order)
/// and its sidecar, and returns the summary.
///
/// Cells that cannot be computed become rows with an `error_code`; the sweep
/// never aborts on them. Output is byte-identical across worker counts except
/// for the `wall_ms` column.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    config.validate()?;
    let spec = config.model.spec()?;
    let filter = MexicanHat::new(config.filter.sigma)?;
    let (truth, constants) = truth_and_constants(config, &filter, &spec);
    let norm_const = match config.estimator.norm {
        SecondStatNorm::SecondMoment => constants.kappa,
        SecondStatNorm::PeakPower => constants.c3,
    };
    let consts = (constants.c2, norm_const);
    let (plans, fraction_meta) = plan(config, &filter);

    let meta = Metadata {
        truth,
        constants,
        config: config.clone(),
        fractions: fraction_meta,
    };
    let out_path = &config.output_path;
    let side = sidecar_path(out_path);
    let meta_text = toml::to_string(&meta).map_err(|e| Error::Config(format!("metadata: {e}")))?;
    std::fs::write(&side, meta_text).map_err(|e| Error::io(&side, e))?;

    let file = File::create(out_path).map_err(|e| Error::io(out_path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(CSV_HEADER)?;

    let workers = config.workers.unwrap_or_else(|| rayon::current_num_threads().max(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunk = (workers * 4).max(1);
    let mut all = Vec::with_capacity(config.replications * plans.len() * config.levels.len());
    let mut r0 = 0;
    while r0 < config.replications {
        let r1 = (r0 + chunk).min(config.replications);
        let batch: Vec<Vec<ExperimentRecord>> =
            pool.install(|| (r0..r1).into_par_iter().map(|r| replicate(config, &spec, &plans, consts, r)).collect());
        for rec in batch.into_iter().flatten() {
            writer.write_record(rec.fields())?;
            all.push(rec);
        }
        writer.flush().map_err(|e| Error::io(out_path, e))?;
        r0 = r1;
    }
    writer.flush().map_err(|e| Error::io(out_path, e))?;
    Ok(summarize_records(&all, &truth))
}

/// Median, mean and interquartile range of one column in one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Spread {
    pub median: f64,
    pub mean: f64,
    pub iqr: f64,
}

/// Summary of one `(j, fraction)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub j: u32,
    pub fraction: f64,
    pub rows: usize,
    /// Rows without an estimate, excluded from the estimate columns.
    pub null_rows: usize,
    pub stat1: Spread,
    pub stat2: Spread,
    pub s0_hat: Spread,
    pub alpha_hat: Spread,
    pub rmse_s0: f64,
    pub rmse_alpha: f64,
    /// Median of `|ŝ0 − s0|`.
    pub median_abs_err_s0: f64,
}

/// Per-cell summaries, ordered by `(j, fraction)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub truth: Truth,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(&self, j: u32, fraction: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.j == j && (c.fraction - fraction).abs() < 1e-12)
    }

    /// Renders the table as CSV text.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "j",
            "fraction",
            "rows",
            "null_rows",
            "stat1_median",
            "stat1_iqr",
            "stat2_median",
            "s0_median",
            "s0_rmse",
            "alpha_median",
            "alpha_rmse",
        ])
        .expect("in-memory write");
        for c in &self.cells {
            w.write_record([
                c.j.to_string(),
                c.fraction.to_string(),
                c.rows.to_string(),
                c.null_rows.to_string(),
                format!("{:.6}", c.stat1.median),
                format!("{:.6}", c.stat1.iqr),
                format!("{:.6}", c.stat2.median),
                format!("{:.6}", c.s0_hat.median),
                format!("{:.6}", c.rmse_s0),
                format!("{:.6}", c.alpha_hat.median),
                format!("{:.6}", c.rmse_alpha),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn spread(mut xs: Vec<f64>) -> Spread {
    if xs.is_empty() {
        return Spread {
            median: f64::NAN,
            mean: f64::NAN,
            iqr: f64::NAN,
        };
    }
    xs.sort_by(f64::total_cmp);
    Spread {
        median: quantile(&xs, 0.5),
        mean: xs.iter().sum::<f64>() / xs.len() as f64,
        iqr: quantile(&xs, 0.75) - quantile(&xs, 0.25),
    }
}

/// `sqrt(mean((x − truth)²))`.
pub fn rmse(xs: &[f64], truth: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    (xs.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Summarises records against known true parameters.
pub fn summarize_records(records: &[ExperimentRecord], truth: &Truth) -> Summary {
    let mut groups: BTreeMap<(u32, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.j, r.fraction.to_bits())).or_default().push(r);
    }
    let mut cells: Vec<CellSummary> = groups
        .into_values()
        .map(|rs| {
            let col = |f: fn(&ExperimentRecord) -> Option<f64>| rs.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let ok: Vec<&&ExperimentRecord> = rs.iter().filter(|r| !r.is_null()).collect();
            let s0: Vec<f64> = ok.iter().filter_map(|r| r.s0_hat).collect();
            let al: Vec<f64> = ok.iter().filter_map(|r| r.alpha_hat).collect();
            let abs_err = spread(s0.iter().map(|x| (x - truth.s0).abs()).collect()).median;
            CellSummary {
                j: rs[0].j,
                fraction: rs[0].fraction,
                rows: rs.len(),
                null_rows: rs.len() - ok.len(),
                stat1: spread(col(|r| r.stat1)),
                stat2: spread(col(|r| r.stat2)),
                rmse_s0: rmse(&s0, truth.s0),
                rmse_alpha: rmse(&al, truth.alpha),
                s0_hat: spread(s0),
                alpha_hat: spread(al),
                median_abs_err_s0: abs_err,
            }
        })
        .collect();
    cells.sort_by(|a, b| a.j.cmp(&b.j).then(a.fraction.total_cmp(&b.fraction)));
    Summary { truth: *truth, cells }
}

/// Reads a records file. Malformed rows fail with their line number.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |msg: String| Error::Parse { line, msg };
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len())));
        }
        fn req<T: std::str::FromStr>(s: &str, name: &str, line: u64) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            s.trim().parse().map_err(|e| Error::Parse {
                line,
                msg: format!("{name}: {e}"),
            })
        }
        let opt = |i: usize| -> Result<Option<f64>> {
            let s = rec[i].trim();
            if s.is_empty() {
                Ok(None)
            } else {
                req(s, CSV_HEADER[i], line).map(Some)
            }
        };
        let clamps = if rec[8].trim().is_empty() {
            None
        } else {
            Some(req::<u8>(&rec[8], "clamps", line)?)
        };
        let error_code = Some(rec[9].trim().to_string()).filter(|s| !s.is_empty());
        let r = ExperimentRecord {
            replication: req(&rec[0], "replication", line)?,
            seed: req(&rec[1], "seed", line)?,
            j: req(&rec[2], "j", line)?,
            fraction: req(&rec[3], "fraction", line)?,
            stat1: opt(4)?,
            stat2: opt(5)?,
            s0_hat: opt(6)?,
            alpha_hat: opt(7)?,
            clamps,
            error_code,
            wall_ms: req(&rec[10], "wall_ms", line)?,
        };
        if r.s0_hat.is_some() != r.alpha_hat.is_some() {
            return Err(bad("s0_hat and alpha_hat must both be present or both empty".into()));
        }
        out.push(r);
    }
    Ok(out)
}

/// Reads the true parameters from a records file's sidecar.
pub fn read_truth(records: impl AsRef<Path>) -> Result<Truth> {
    let side = sidecar_path(records.as_ref());
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    #[derive(Deserialize)]
    struct Only {
        truth: Truth,
    }
    let only: Only = toml::from_str(&text)?;
    Ok(only.truth)
}

/// Summarises a records file against the truth stored in its sidecar.
pub fn summarize(records_path: impl AsRef<Path>) -> Result<Summary> {
    let path = records_path.as_ref();
    let truth = read_truth(path)?;
    let records = read_records(path)?;
    Ok(summarize_records(&records, &truth))
}

/// Writes the summary table as CSV. Summaries are derived from the records
/// and can always be regenerated.
pub fn write_summary(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(summary.to_csv_string().as_bytes())
        .map_err(|e| Error::io(path, e))
}
