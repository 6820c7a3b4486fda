//! Seeded Monte Carlo sweeps over grids of model parameters.
//!
//! Every trial draws its randomness from the master seed and the stream
//! `(point << 32) | trial`, so results do not depend on scheduling. Per-point
//! aggregates are integer counters and are therefore also independent of the
//! order in which trials finish.

mod config;
mod stats;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::abelianization::surjects_onto_z;
use crate::error::{Error, Result};
use crate::fa::{
    check_l_with_budget, check_sl_with, combine_verdict, positive_part, LMode, SLStrategy, Verdict,
};
use crate::freeness::eliminate_summary;
use crate::hypergraph::{diagnostics, DiagnosticsSummary};
use crate::model::{p_to_density, sample_with, stream_rng, trial_stream, ModelParams, Parameter};
use crate::presentation::ModelKind;

pub use config::{Analyses, Budgets, GridSpec, ScaledPoint, SweepConfig};
pub use stats::{estimate_crossing, wilson_interval, Observation, ThresholdEstimate, Trend, Z95};

/// Outcome of an optional analysis in a trial record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    /// Disabled for this `m` by the size limit.
    Skipped,
    BudgetExceeded,
    NotRequested,
}

impl Status {
    fn from_check(r: Result<bool>) -> Result<Status> {
        match r {
            Ok(true) => Ok(Status::Holds),
            Ok(false) => Ok(Status::Fails),
            Err(Error::BudgetExceeded { .. }) => Ok(Status::BudgetExceeded),
            Err(e) => Err(e),
        }
    }

    fn as_bool(self) -> Option<bool> {
        match self {
            Status::Holds => Some(true),
            Status::Fails => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: u32,
    pub trial: u32,
    pub m: u32,
    pub seed: u64,
    pub stream: u64,
    pub num_relators: u64,
    pub euler_characteristic: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_rank: Option<i64>,
    pub unused_generators: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surjects_z: Option<bool>,
    pub l: Status,
    pub sl: Status,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSummary>,
    pub wall_ms: f64,
}

// Wall time is not part of a trial's identity.
impl PartialEq for TrialRecord {
    fn eq(&self, o: &Self) -> bool {
        self.point == o.point
            && self.trial == o.trial
            && self.m == o.m
            && self.seed == o.seed
            && self.stream == o.stream
            && self.num_relators == o.num_relators
            && self.euler_characteristic == o.euler_characteristic
            && self.free == o.free
            && self.final_rank == o.final_rank
            && self.unused_generators == o.unused_generators
            && self.surjects_z == o.surjects_z
            && self.l == o.l
            && self.sl == o.sl
            && self.verdict == o.verdict
            && self.diagnostics == o.diagnostics
    }
}

/// What a single trial computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub analyses: Analyses,
    pub epsilon: f64,
    pub budgets: Budgets,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            analyses: Analyses::default(),
            epsilon: crate::fa::DEFAULT_EPSILON,
            budgets: Budgets::default(),
        }
    }
}

/// Samples one presentation from stream `stream` of `params.seed` and runs
/// the requested analyses. Search budget overruns are recorded in the row.
pub fn run_trial(
    kind: ModelKind,
    params: &ModelParams,
    stream: u64,
    opts: &TrialOptions,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = stream_rng(params.seed, stream);
    let pres = sample_with(kind, params, &mut rng)?;
    let m = pres.m;
    let unused = pres.unused_generators();
    let a = &opts.analyses;

    let diagnostics = a.diagnostics.then(|| diagnostics(&pres).summary());
    let (free, final_rank) = if a.freeness {
        let s = eliminate_summary(&pres);
        let rank = s.certified.then(|| i64::from(m) - pres.num_relators() as i64);
        (Some(s.certified), rank)
    } else {
        (None, None)
    };
    let surjects_z = a.surjection.then(|| surjects_onto_z(&pres));

    let (l, sl) = if !a.fa {
        (Status::NotRequested, Status::NotRequested)
    } else if m > opts.budgets.fa_max_m {
        (Status::Skipped, Status::Skipped)
    } else {
        let positive = positive_part(&pres);
        let nodes = opts.budgets.search_nodes;
        let l = Status::from_check(
            check_l_with_budget(&positive, opts.epsilon, LMode::PositiveLetters, nodes)
                .map(|c| c.holds()),
        )?;
        let sl = Status::from_check(
            check_sl_with(&positive, opts.epsilon, SLStrategy::Auto, nodes).map(|c| c.holds()),
        )?;
        (l, sl)
    };
    let verdict = combine_verdict(final_rank, &unused, l.as_bool(), sl.as_bool());

    Ok(TrialRecord {
        point: (stream >> 32) as u32,
        trial: stream as u32,
        m,
        seed: params.seed,
        stream,
        num_relators: pres.num_relators() as u64,
        euler_characteristic: pres.euler_characteristic(),
        free,
        final_rank,
        unused_generators: unused.len() as u32,
        surjects_z,
        l,
        sl,
        verdict,
        diagnostics,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One row of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: u32,
    pub m: u32,
    pub len: u32,
    pub parameter: Parameter,
    /// Grid coordinate as written in the config: `p`, `c` or `d`.
    pub x: f64,
    pub p: f64,
    pub d_equiv: f64,
}

/// Integer counters for one grid point; merging is addition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCounts {
    pub trials: u64,
    pub free: u64,
    pub free_evaluated: u64,
    pub relators_sum: u128,
    pub relators_sq_sum: u128,
    pub relators_ge_3m: u64,
    pub unused_ge_half_sqrt_m: u64,
    pub surj: u64,
    pub surj_evaluated: u64,
    pub l: u64,
    pub l_evaluated: u64,
    pub sl: u64,
    pub sl_evaluated: u64,
    pub verdict_free: u64,
    pub verdict_splits: u64,
    pub verdict_fa: u64,
    pub verdict_unknown: u64,
}

impl PointCounts {
    pub fn add(&mut self, r: &TrialRecord) {
        let m = u64::from(r.m);
        let n = r.num_relators;
        self.trials += 1;
        if let Some(f) = r.free {
            self.free_evaluated += 1;
            self.free += u64::from(f);
        }
        self.relators_sum += u128::from(n);
        self.relators_sq_sum += u128::from(n) * u128::from(n);
        self.relators_ge_3m += u64::from(n >= 3 * m);
        // unused >= sqrt(m)/2  <=>  4 unused^2 >= m
        let u = u64::from(r.unused_generators);
        self.unused_ge_half_sqrt_m += u64::from(4 * u * u >= m);
        if let Some(s) = r.surjects_z {
            self.surj_evaluated += 1;
            self.surj += u64::from(s);
        }
        if let Some(h) = r.l.as_bool() {
            self.l_evaluated += 1;
            self.l += u64::from(h);
        }
        if let Some(h) = r.sl.as_bool() {
            self.sl_evaluated += 1;
            self.sl += u64::from(h);
        }
        match r.verdict {
            Verdict::FreeCertified { .. } => self.verdict_free += 1,
            Verdict::SplitsWitness { .. } => self.verdict_splits += 1,
            Verdict::FaCertified => self.verdict_fa += 1,
            Verdict::Unknown => self.verdict_unknown += 1,
        }
    }

    pub fn merge(&mut self, o: &PointCounts) {
        self.trials += o.trials;
        self.free += o.free;
        self.free_evaluated += o.free_evaluated;
        self.relators_sum += o.relators_sum;
        self.relators_sq_sum += o.relators_sq_sum;
        self.relators_ge_3m += o.relators_ge_3m;
        self.unused_ge_half_sqrt_m += o.unused_ge_half_sqrt_m;
        self.surj += o.surj;
        self.surj_evaluated += o.surj_evaluated;
        self.l += o.l;
        self.l_evaluated += o.l_evaluated;
        self.sl += o.sl;
        self.sl_evaluated += o.sl_evaluated;
        self.verdict_free += o.verdict_free;
        self.verdict_splits += o.verdict_splits;
        self.verdict_fa += o.verdict_fa;
        self.verdict_unknown += o.verdict_unknown;
    }

    fn frac(&self, k: u64) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            k as f64 / self.trials as f64
        }
    }

    pub fn mean_relators(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.relators_sum as f64 / self.trials as f64
    }

    /// Sample standard deviation of `|R|`, from the exact integer sums.
    pub fn sd_relators(&self) -> f64 {
        let n = u128::from(self.trials);
        if n < 2 {
            return 0.0;
        }
        let num = n * self.relators_sq_sum - self.relators_sum * self.relators_sum;
        (num as f64 / (n * (n - 1)) as f64).sqrt()
    }
}

/// A fraction column, or `None` when the analysis did not run on every trial.
fn complete(c: &PointCounts, hits: u64, evaluated: u64) -> Option<f64> {
    (evaluated == c.trials).then(|| c.frac(hits))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: GridPoint,
    pub model: ModelKind,
    pub counts: PointCounts,
}

impl PointSummary {
    pub fn frac_free(&self) -> Option<f64> {
        complete(&self.counts, self.counts.free, self.counts.free_evaluated)
    }

    pub fn frac_free_ci(&self) -> Option<(f64, f64)> {
        self.frac_free()
            .map(|_| wilson_interval(self.counts.free, self.counts.trials))
    }

    pub fn frac_surj(&self) -> Option<f64> {
        complete(&self.counts, self.counts.surj, self.counts.surj_evaluated)
    }

    pub fn frac_l(&self) -> Option<f64> {
        complete(&self.counts, self.counts.l, self.counts.l_evaluated)
    }

    pub fn frac_sl(&self) -> Option<f64> {
        complete(&self.counts, self.counts.sl, self.counts.sl_evaluated)
    }

    pub fn frac_fa(&self) -> f64 {
        self.counts.frac(self.counts.verdict_fa)
    }

    pub fn frac_unknown(&self) -> f64 {
        self.counts.frac(self.counts.verdict_unknown)
    }

    pub fn frac_r_ge_3m(&self) -> f64 {
        self.counts.frac(self.counts.relators_ge_3m)
    }

    pub fn frac_unused_ge_half_sqrt_m(&self) -> f64 {
        self.counts.frac(self.counts.unused_ge_half_sqrt_m)
    }

    /// Value of a CSV statistic column with its number of successes.
    pub fn statistic(&self, stat: Statistic) -> Option<(f64, u64)> {
        let c = &self.counts;
        let v = match stat {
            Statistic::FracFree => (self.frac_free()?, c.free),
            Statistic::FracRGe3m => (self.frac_r_ge_3m(), c.relators_ge_3m),
            Statistic::FracUnusedGeHalfSqrtM => {
                (self.frac_unused_ge_half_sqrt_m(), c.unused_ge_half_sqrt_m)
            }
            Statistic::FracSurjZ => (self.frac_surj()?, c.surj),
            Statistic::FracL => (self.frac_l()?, c.l),
            Statistic::FracSL => (self.frac_sl()?, c.sl),
            Statistic::FracFA => (self.frac_fa(), c.verdict_fa),
            Statistic::FracUnknown => (self.frac_unknown(), c.verdict_unknown),
        };
        Some(v)
    }
}

/// Fraction columns that a threshold can be estimated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    FracFree,
    FracRGe3m,
    FracUnusedGeHalfSqrtM,
    FracSurjZ,
    FracL,
    FracSL,
    FracFA,
    FracUnknown,
}

impl std::str::FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "frac_free" => Statistic::FracFree,
            "frac_R_ge_3m" => Statistic::FracRGe3m,
            "frac_unused_ge_halfsqrtm" => Statistic::FracUnusedGeHalfSqrtM,
            "frac_surjZ" => Statistic::FracSurjZ,
            "frac_L" => Statistic::FracL,
            "frac_SL" => Statistic::FracSL,
            "frac_FA" => Statistic::FracFA,
            "frac_unknown" => Statistic::FracUnknown,
            other => return Err(Error::Domain(format!("unknown statistic {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<PointSummary>,
    /// Per-trial rows in `(point, trial)` order.
    pub records: Vec<TrialRecord>,
}

pub const CSV_HEADER: [&str; 18] = [
    "m",
    "ell",
    "model",
    "p",
    "d_equiv",
    "trials",
    "frac_free",
    "frac_free_ci_lo",
    "frac_free_ci_hi",
    "mean_R",
    "sd_R",
    "frac_R_ge_3m",
    "frac_unused_ge_halfsqrtm",
    "frac_surjZ",
    "frac_L",
    "frac_SL",
    "frac_FA",
    "frac_unknown",
];

const SKIPPED: &str = "skipped";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| SKIPPED.to_string(), |x| x.to_string())
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for s in &self.points {
            let ci = s.frac_free_ci();
            w.write_record([
                s.point.m.to_string(),
                s.point.len.to_string(),
                s.model.to_string(),
                s.point.p.to_string(),
                s.point.d_equiv.to_string(),
                s.counts.trials.to_string(),
                opt(s.frac_free()),
                opt(ci.map(|c| c.0)),
                opt(ci.map(|c| c.1)),
                s.counts.mean_relators().to_string(),
                s.counts.sd_relators().to_string(),
                s.frac_r_ge_3m().to_string(),
                s.frac_unused_ge_half_sqrt_m().to_string(),
                opt(s.frac_surj()),
                opt(s.frac_l()),
                opt(s.frac_sl()),
                s.frac_fa().to_string(),
                s.frac_unknown().to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Observations of `stat` along the grid for generator count `m`.
    pub fn observations(&self, m: u32, stat: Statistic) -> Result<Vec<Observation>> {
        self.points
            .iter()
            .filter(|s| s.point.m == m)
            .map(|s| {
                let (fraction, _) = s.statistic(stat).ok_or_else(|| {
                    Error::Domain(format!("{stat:?} was not evaluated at every trial"))
                })?;
                Ok(Observation {
                    x: s.point.x,
                    fraction,
                    trials: s.counts.trials,
                })
            })
            .collect()
    }
}

/// Crossing of `stat` through `level` along the grid for `m`, see
/// [`estimate_crossing`].
pub fn estimate_threshold(
    result: &SweepResult,
    m: u32,
    stat: Statistic,
    level: f64,
    trend: Trend,
) -> Result<ThresholdEstimate> {
    estimate_crossing(&result.observations(m, stat)?, level, trend)
}

impl SweepConfig {
    /// Expands the grid, `m` major.
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        let mut out = Vec::new();
        for &m in &self.m {
            let values = self.grid.values(m, self.ell)?;
            for (x, parameter) in values {
                let params = ModelParams { m, len: self.ell, parameter, seed: self.seed };
                params.validate()?;
                let p = params.p()?;
                let d_equiv = match parameter {
                    Parameter::Density(d) => d,
                    Parameter::Probability(p) => p_to_density(m, self.ell, p),
                };
                out.push(GridPoint {
                    index: out.len() as u32,
                    m,
                    len: self.ell,
                    parameter,
                    x,
                    p,
                    d_equiv,
                });
            }
        }
        Ok(out)
    }
}

/// Runs every `(point, trial)` pair of `config`.
///
/// With the `parallel` feature trials run on a pool of `config.threads`
/// workers (all cores when unset); the collected rows keep `(point, trial)`
/// order either way.
pub fn sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let points = config.points()?;
    let opts = TrialOptions {
        analyses: config.analyses.clone(),
        epsilon: config.epsilon,
        budgets: config.budgets.clone(),
    };
    let tasks: Vec<(GridPoint, u32)> = points
        .iter()
        .flat_map(|pt| (0..config.trials).map(move |t| (*pt, t)))
        .collect();
    let run = |&(pt, t): &(GridPoint, u32)| {
        let params = ModelParams {
            m: pt.m,
            len: pt.len,
            parameter: pt.parameter,
            seed: config.seed,
        };
        run_trial(config.model, &params, trial_stream(pt.index, t), &opts)
    };
    let records = execute(&tasks, run, config.threads)?;

    let mut summaries: Vec<PointSummary> = points
        .iter()
        .map(|pt| PointSummary {
            point: *pt,
            model: config.model,
            counts: PointCounts::default(),
        })
        .collect();
    for r in &records {
        summaries[r.point as usize].counts.add(r);
    }
    Ok(SweepResult { points: summaries, records })
}

#[cfg(feature = "parallel")]
fn execute<T, F>(tasks: &[T], run: F, threads: Option<usize>) -> Result<Vec<TrialRecord>>
where
    T: Sync,
    F: Fn(&T) -> Result<TrialRecord> + Sync + Send,
{
    use rayon::prelude::*;

    if threads == Some(1) {
        return tasks.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| tasks.par_iter().map(run).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(tasks: &[T], run: F, _threads: Option<usize>) -> Result<Vec<TrialRecord>>
where
    F: Fn(&T) -> Result<TrialRecord>,
{
    tasks.iter().map(run).collect()
}
