//! Monte Carlo harness comparing the estimators under randomly imposed
//! missingness: raw-data generation, masking, per-replicate fitting, and
//! the bias/spread/coverage summaries with Monte Carlo standard errors.
//!
//! Replicates are independent and may run in parallel; every random draw
//! comes from a stream keyed by `(seed, replicate, purpose)`, so results
//! are bit-identical regardless of the worker count, and all estimators
//! within a replicate see exactly the same masked data.

use crate::error::{Error, Result};
use crate::inference::{
    fit, profile_return_level_with_fit, BlockMaximaSet, Estimator, FitOptions, FitResult,
    ProfileOptions,
};
use crate::rng::{open_unit, stream, StreamPurpose};
use crate::special::norm_quantile;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Distributions for the raw (pre-blocking) data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum RawDistribution {
    /// Standard exponential (domain of attraction: Gumbel, xi = 0).
    Exponential,
    /// Standard Gaussian (xi = 0).
    Gaussian,
    /// Student's t with 2 degrees of freedom (xi = 1/2).
    #[serde(rename = "student_t2")]
    StudentT2,
    /// Beta(1, 10) (xi = -1/10).
    #[serde(rename = "beta_1_10")]
    Beta110,
    /// Max-autoregressive process of order 1 with unit Fréchet innovations,
    /// mapped to unit exponential margins. `theta` in (0, 1] is the extremal
    /// index; `theta = 1` reduces to i.i.d. draws.
    Maxar1 { theta: f64 },
}

impl RawDistribution {
    pub fn validate(&self) -> Result<()> {
        if let RawDistribution::Maxar1 { theta } = self {
            if !(*theta > 0.0 && *theta <= 1.0) {
                return Err(Error::Config(format!(
                    "maxar1 theta must be in (0,1], got {theta}"
                )));
            }
        }
        Ok(())
    }
}

/// Draw `count` raw observations by inverse-cdf sampling.
pub fn simulate_raw<R: Rng>(dist: RawDistribution, count: usize, rng: &mut R) -> Vec<f64> {
    match dist {
        RawDistribution::Exponential => (0..count).map(|_| -open_unit(rng).ln()).collect(),
        RawDistribution::Gaussian => (0..count)
            .map(|_| norm_quantile(open_unit(rng)).expect("open interval"))
            .collect(),
        RawDistribution::StudentT2 => (0..count)
            .map(|_| {
                let p = open_unit(rng);
                (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt()
            })
            .collect(),
        RawDistribution::Beta110 => (0..count)
            .map(|_| 1.0 - (1.0 - open_unit(rng)).powf(0.1))
            .collect(),
        RawDistribution::Maxar1 { theta } => {
            let frechet = |rng: &mut R| -1.0 / open_unit(rng).ln();
            let mut x = frechet(rng);
            (0..count)
                .map(|_| {
                    let z = frechet(rng);
                    x = ((1.0 - theta) * x).max(theta * z);
                    // Probability-integral transform to unit exponential
                    // margins: increasing, so upper-tail dependence (and the
                    // extremal index) is preserved.
                    -(-(-1.0 / x).exp_m1()).ln()
                })
                .collect()
        }
    }
}

/// Number of observations removed from a block of size `n` for a drawn
/// missingness proportion `pi`: the nearest integer, capped so at least one
/// observation always survives.
fn removal_count(pi: f64, n: usize) -> usize {
    (((pi * n as f64) + 0.5).floor() as usize).min(n - 1)
}

/// Remove a U(0, `miss_upper`) proportion of a block completely at random;
/// returns the maximum of the survivors and the survivor count.
pub fn impose_missingness<R: Rng>(block: &[f64], miss_upper: f64, rng: &mut R) -> (f64, u32) {
    let n = block.len();
    assert!(n > 0, "block must be non-empty");
    let pi = miss_upper * open_unit(rng);
    let k = removal_count(pi, n);
    let mut values = block.to_vec();
    for i in 0..k {
        let j = rng.random_range(i..n);
        values.swap(i, j);
    }
    let max = values[k..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (max, (n - k) as u32)
}

/// The exact `r`-block return level of the block-maximum distribution of
/// `n` i.i.d. draws: solves `F(z)^n = 1 - 1/r`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrueReturnLevel {
    pub value: f64,
    /// Set for `maxar1`: serial dependence alters the block-maximum law, so
    /// the value assumes i.i.d. margins and is only a reference point.
    pub iid_marginal_assumption: bool,
}

pub fn true_return_level(dist: RawDistribution, n: usize, r: f64) -> Result<TrueReturnLevel> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("return period must be > 1, got {r}")));
    }
    if n == 0 {
        return Err(Error::Domain("block length must be positive".to_string()));
    }
    // q = (1 - 1/r)^(1/n); both q and 1-q kept to full relative precision.
    let a = (-1.0f64 / r).ln_1p() / n as f64;
    let q = a.exp();
    let one_minus_q = -a.exp_m1();
    let value = match dist {
        RawDistribution::Exponential | RawDistribution::Maxar1 { .. } => -one_minus_q.ln(),
        RawDistribution::Gaussian => norm_quantile(q)?,
        RawDistribution::StudentT2 => {
            (1.0 - 2.0 * one_minus_q) / (2.0 * q * one_minus_q).sqrt()
        }
        RawDistribution::Beta110 => 1.0 - one_minus_q.powf(0.1),
    };
    Ok(TrueReturnLevel {
        value,
        iid_marginal_assumption: matches!(dist, RawDistribution::Maxar1 { .. }),
    })
}

fn default_b() -> usize {
    50
}
fn default_n() -> usize {
    90
}
fn default_miss_upper() -> f64 {
    0.2
}
fn default_reps() -> usize {
    1000
}
fn default_estimators() -> Vec<Estimator> {
    vec![
        Estimator::Adjust,
        Estimator::Naive,
        Estimator::Discard,
        Estimator::Weight1,
        Estimator::Weight2,
    ]
}
fn default_rl_period() -> f64 {
    100.0
}
fn default_ci_level() -> f64 {
    0.95
}
fn default_true() -> bool {
    true
}
fn default_discard_threshold() -> f64 {
    0.10
}

/// A study configuration; mirrors the JSON run-spec schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub dist: RawDistribution,
    /// Blocks per replicate.
    #[serde(default = "default_b")]
    pub b: usize,
    /// Block length.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Upper end of the per-block U(0, miss_upper) missingness proportion.
    #[serde(default = "default_miss_upper")]
    pub miss_upper: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Estimators to compare; `full` is always run as the reference.
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Estimator>,
    #[serde(default = "default_rl_period")]
    pub rl_period: f64,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    /// Profile confidence intervals per replicate are the dominant cost;
    /// disable when only point-estimate statistics are needed.
    #[serde(default = "default_true")]
    pub compute_ci: bool,
    #[serde(default = "default_discard_threshold")]
    pub discard_threshold: f64,
}

impl SimulationConfig {
    pub fn new(dist: RawDistribution) -> Self {
        Self {
            dist,
            b: default_b(),
            n: default_n(),
            miss_upper: default_miss_upper(),
            reps: default_reps(),
            seed: 0,
            estimators: default_estimators(),
            rl_period: default_rl_period(),
            ci_level: default_ci_level(),
            compute_ci: true,
            discard_threshold: default_discard_threshold(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        if self.b < 2 {
            return Err(Error::Config("need at least 2 blocks".to_string()));
        }
        if self.n < 1 {
            return Err(Error::Config("block length must be positive".to_string()));
        }
        if !(0.0..1.0).contains(&self.miss_upper) {
            return Err(Error::Config(format!(
                "miss_upper must be in [0,1), got {}",
                self.miss_upper
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("need at least one replicate".to_string()));
        }
        if !(self.rl_period > 1.0) {
            return Err(Error::Config("rl_period must be > 1".to_string()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config("ci_level must be in (0,1)".to_string()));
        }
        if !(0.0..1.0).contains(&self.discard_threshold) {
            return Err(Error::Config("discard_threshold must be in [0,1)".to_string()));
        }
        Ok(())
    }

    /// The estimators actually run: the requested ones plus `full`.
    pub fn run_list(&self) -> Vec<Estimator> {
        let mut list: Vec<Estimator> = Vec::new();
        for e in &self.estimators {
            if !list.contains(e) {
                list.push(*e);
            }
        }
        if !list.contains(&Estimator::Full) {
            list.push(Estimator::Full);
        }
        list
    }
}

/// One estimator's outcome on one replicate. Non-finite fields mark
/// failures and are excluded from summaries.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicateRecord {
    pub rep: usize,
    pub estimator: Estimator,
    pub converged: bool,
    pub n_blocks_used: usize,
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
    pub loglik: f64,
    pub rl_point: f64,
    pub rl_lo: f64,
    pub rl_hi: f64,
    pub rl_upper_unbounded: bool,
    pub covers_true: Option<bool>,
}

/// A mean-type statistic triple for parameter differences.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanStats {
    pub bias: f64,
    pub bias_mcse: f64,
    pub sd: f64,
    pub sd_mcse: f64,
    pub rmse: f64,
    pub rmse_mcse: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamDiffStats {
    pub n_used: usize,
    pub mu: MeanStats,
    pub sigma: MeanStats,
    pub xi: MeanStats,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RlStats {
    pub n_used: usize,
    pub bias: f64,
    pub bias_mcse: f64,
    pub median_bias: f64,
    pub median_bias_mcse: f64,
    pub sd: f64,
    pub sd_mcse: f64,
    pub iqr: f64,
    pub iqr_mcse: f64,
    pub rmse: f64,
    pub rmse_mcse: f64,
    pub mae: f64,
    pub mae_mcse: f64,
    pub n_ci: usize,
    pub coverage: Option<f64>,
    pub coverage_mcse: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorSummary {
    /// Replicates on which the fit failed (non-convergence or too few
    /// blocks after discarding); excluded from all statistics.
    pub failures: usize,
    /// Differences versus the full-data fit on the same replicate
    /// (absent for `full` itself); failures are excluded pairwise.
    pub param_diff_vs_full: Option<ParamDiffStats>,
    /// Return-level estimation error versus the true return level.
    pub return_level: RlStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub config: SimulationConfig,
    pub true_return_level: f64,
    pub true_rl_iid_marginal_assumption: bool,
    pub estimators: BTreeMap<Estimator, EstimatorSummary>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub summary: SimulationSummary,
    pub records: Vec<ReplicateRecord>,
}

/// Run the full study: per replicate, simulate raw data, extract full-data
/// maxima, impose missingness, fit every requested estimator plus `full`,
/// and aggregate the comparison statistics.
pub fn run_study(config: &SimulationConfig) -> Result<StudyResult> {
    config.validate()?;
    let true_rl = true_return_level(config.dist, config.n, config.rl_period)?;
    let run_list = config.run_list();

    let per_rep: Vec<Vec<ReplicateRecord>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| run_replicate(rep, config, &run_list, true_rl.value))
        .collect::<Result<_>>()?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();

    let summary = summarize(config, &run_list, &records, true_rl);
    Ok(StudyResult { summary, records })
}

fn block_max(chunk: &[f64]) -> f64 {
    chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn failure_record(rep: usize, estimator: Estimator, n_blocks_used: usize) -> ReplicateRecord {
    ReplicateRecord {
        rep,
        estimator,
        converged: false,
        n_blocks_used,
        mu: f64::NAN,
        sigma: f64::NAN,
        xi: f64::NAN,
        loglik: f64::NAN,
        rl_point: f64::NAN,
        rl_lo: f64::NAN,
        rl_hi: f64::NAN,
        rl_upper_unbounded: false,
        covers_true: None,
    }
}

fn record_from_fit(
    rep: usize,
    data: &BlockMaximaSet,
    fitted: &FitResult,
    config: &SimulationConfig,
    fit_opts: FitOptions,
    true_rl: f64,
) -> ReplicateRecord {
    let [mu, sigma, xi] = fitted.params.as_array();
    let mut rec = ReplicateRecord {
        rep,
        estimator: fitted.estimator,
        converged: fitted.converged,
        n_blocks_used: fitted.n_blocks_used,
        mu,
        sigma,
        xi,
        loglik: fitted.loglik,
        rl_point: f64::NAN,
        rl_lo: f64::NAN,
        rl_hi: f64::NAN,
        rl_upper_unbounded: false,
        covers_true: None,
    };
    if !fitted.converged {
        return rec;
    }
    rec.rl_point = fitted
        .params
        .return_level(config.rl_period)
        .unwrap_or(f64::NAN);
    if config.compute_ci {
        if let Ok(ci) = profile_return_level_with_fit(
            data,
            fitted,
            config.rl_period,
            config.ci_level,
            fit_opts,
            ProfileOptions::default(),
        ) {
            rec.rl_lo = ci.lo;
            rec.rl_hi = ci.hi;
            rec.rl_upper_unbounded = ci.upper_unbounded;
            rec.covers_true = Some(ci.lo <= true_rl && true_rl <= ci.hi);
        }
    }
    rec
}

fn run_replicate(
    rep: usize,
    config: &SimulationConfig,
    run_list: &[Estimator],
    true_rl: f64,
) -> Result<Vec<ReplicateRecord>> {
    let fit_opts = FitOptions {
        discard_threshold: config.discard_threshold,
    };

    let mut data_rng = stream(config.seed, rep as u64, StreamPurpose::Data);
    let raw = simulate_raw(config.dist, config.n * config.b, &mut data_rng);

    // Full-data maxima are taken before masking, so the `full` reference is
    // untouched by the missingness stream.
    let full_maxima: Vec<f64> = raw.chunks_exact(config.n).map(block_max).collect();
    let full_set = BlockMaximaSet::from_maxima(&full_maxima, config.n as u32)?;

    let mut miss_rng = stream(config.seed, rep as u64, StreamPurpose::Missingness);
    let mut masked_maxima = Vec::with_capacity(config.b);
    let mut n_obs = Vec::with_capacity(config.b);
    for chunk in raw.chunks_exact(config.n) {
        let (m, k) = impose_missingness(chunk, config.miss_upper, &mut miss_rng);
        masked_maxima.push(m);
        n_obs.push(k);
    }
    let masked_set = BlockMaximaSet::from_parts(&masked_maxima, &n_obs, config.n as u32)?;

    let mut out = Vec::with_capacity(run_list.len());
    for &est in run_list {
        let data = if est == Estimator::Full {
            &full_set
        } else {
            &masked_set
        };
        match fit(data, est, fit_opts) {
            Ok(fitted) => out.push(record_from_fit(rep, data, &fitted, config, fit_opts, true_rl)),
            Err(Error::InsufficientData { available, .. }) => {
                out.push(failure_record(rep, est, available));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Statistic tags for [`mcse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    Bias,
    MedianBias,
    Sd,
    Iqr,
    Rmse,
    Mae,
    Coverage,
}

/// Monte Carlo standard error of a summary statistic over replicate values.
///
/// Mean-type statistics use analytic `sd/sqrt(R)` forms (with a delta rule
/// for the rmse), the standard deviation uses `sd/sqrt(2(R-1))`, coverage
/// uses the binomial formula over 0/1 values, and the median and iqr are
/// bootstrapped (B = 1000, fixed seed).
pub fn mcse(kind: StatKind, values: &[f64]) -> Result<f64> {
    let r = values.len();
    if r < 30 {
        return Err(Error::InsufficientData {
            available: r,
            required: 30,
        });
    }
    let rf = r as f64;
    Ok(match kind {
        StatKind::Bias => sd(values) / rf.sqrt(),
        StatKind::Mae => {
            let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            sd(&abs) / rf.sqrt()
        }
        StatKind::Sd => sd(values) / (2.0 * (rf - 1.0)).sqrt(),
        StatKind::Rmse => {
            let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
            let rmse = mean(&sq).sqrt();
            if rmse == 0.0 {
                0.0
            } else {
                sd(&sq) / (2.0 * rmse * rf.sqrt())
            }
        }
        StatKind::Coverage => {
            let p = mean(values);
            (p * (1.0 - p) / rf).sqrt()
        }
        StatKind::MedianBias | StatKind::Iqr => bootstrap_mcse(kind, values),
    })
}

fn bootstrap_mcse(kind: StatKind, values: &[f64]) -> f64 {
    const B: usize = 1000;
    let mut rng = stream(0x6d63_7365, 0, StreamPurpose::Bootstrap);
    let n = values.len();
    let mut stats = Vec::with_capacity(B);
    let mut resample = vec![0.0; n];
    for _ in 0..B {
        for slot in resample.iter_mut() {
            *slot = values[rng.random_range(0..n)];
        }
        resample.sort_by(f64::total_cmp);
        let s = match kind {
            StatKind::MedianBias => quantile_type7(&resample, 0.5),
            StatKind::Iqr => quantile_type7(&resample, 0.75) - quantile_type7(&resample, 0.25),
            _ => unreachable!(),
        };
        stats.push(s);
    }
    sd(&stats)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0);
    var.sqrt()
}

/// Linear-interpolation sample quantile (R type 7) of sorted values.
pub(crate) fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = p * (n as f64 - 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

fn mean_stats(diffs: &[f64]) -> MeanStats {
    let sq: Vec<f64> = diffs.iter().map(|d| d * d).collect();
    MeanStats {
        bias: mean(diffs),
        bias_mcse: mcse(StatKind::Bias, diffs).unwrap_or(f64::NAN),
        sd: sd(diffs),
        sd_mcse: mcse(StatKind::Sd, diffs).unwrap_or(f64::NAN),
        rmse: mean(&sq).sqrt(),
        rmse_mcse: mcse(StatKind::Rmse, diffs).unwrap_or(f64::NAN),
    }
}

fn rl_stats(errors: &[f64], cover_flags: &[f64]) -> RlStats {
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sq: Vec<f64> = errors.iter().map(|d| d * d).collect();
    let abs: Vec<f64> = errors.iter().map(|d| d.abs()).collect();
    let (coverage, coverage_mcse) = if cover_flags.is_empty() {
        (None, None)
    } else {
        (
            Some(mean(cover_flags)),
            Some(mcse(StatKind::Coverage, cover_flags).unwrap_or(f64::NAN)),
        )
    };
    RlStats {
        n_used: errors.len(),
        bias: mean(errors),
        bias_mcse: mcse(StatKind::Bias, errors).unwrap_or(f64::NAN),
        median_bias: quantile_type7(&sorted, 0.5),
        median_bias_mcse: mcse(StatKind::MedianBias, errors).unwrap_or(f64::NAN),
        sd: sd(errors),
        sd_mcse: mcse(StatKind::Sd, errors).unwrap_or(f64::NAN),
        iqr: quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25),
        iqr_mcse: mcse(StatKind::Iqr, errors).unwrap_or(f64::NAN),
        rmse: mean(&sq).sqrt(),
        rmse_mcse: mcse(StatKind::Rmse, errors).unwrap_or(f64::NAN),
        mae: mean(&abs),
        mae_mcse: mcse(StatKind::Mae, errors).unwrap_or(f64::NAN),
        n_ci: cover_flags.len(),
        coverage,
        coverage_mcse,
    }
}

fn summarize(
    config: &SimulationConfig,
    run_list: &[Estimator],
    records: &[ReplicateRecord],
    true_rl: TrueReturnLevel,
) -> SimulationSummary {
    let by_rep_est = |est: Estimator| -> Vec<&ReplicateRecord> {
        records.iter().filter(|r| r.estimator == est).collect()
    };
    let full_rows = by_rep_est(Estimator::Full);

    let mut estimators = BTreeMap::new();
    for &est in run_list {
        let rows = by_rep_est(est);
        let failures = rows.iter().filter(|r| !r.converged).count();

        let param_diff_vs_full = if est == Estimator::Full {
            None
        } else {
            // Pairwise exclusion: both this estimator and the full-data fit
            // must have converged on the replicate.
            let mut mu = Vec::new();
            let mut sigma = Vec::new();
            let mut xi = Vec::new();
            for (r, f) in rows.iter().zip(&full_rows) {
                debug_assert_eq!(r.rep, f.rep);
                if r.converged && f.converged {
                    mu.push(r.mu - f.mu);
                    sigma.push(r.sigma - f.sigma);
                    xi.push(r.xi - f.xi);
                }
            }
            Some(ParamDiffStats {
                n_used: mu.len(),
                mu: mean_stats(&mu),
                sigma: mean_stats(&sigma),
                xi: mean_stats(&xi),
            })
        };

        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r.converged && r.rl_point.is_finite())
            .map(|r| r.rl_point - true_rl.value)
            .collect();
        let cover_flags: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.covers_true.map(|c| if c { 1.0 } else { 0.0 }))
            .collect();

        estimators.insert(
            est,
            EstimatorSummary {
                failures,
                param_diff_vs_full,
                return_level: rl_stats(&errors, &cover_flags),
            },
        );
    }

    SimulationSummary {
        config: config.clone(),
        true_return_level: true_rl.value,
        true_rl_iid_marginal_assumption: true_rl.iid_marginal_assumption,
        estimators,
    }
}

/// Histogram of per-replicate return-level estimates with marker values
/// (sample mean, sample median and the true return level).
#[derive(Debug, Clone, Serialize)]
pub struct RlHistogram {
    pub estimator: Estimator,
    /// (left edge, right edge, probability mass); masses sum to 1.
    pub bins: Vec<(f64, f64, f64)>,
    pub mean: f64,
    pub median: f64,
    pub true_rl: f64,
}

pub fn rl_histogram_data(
    records: &[ReplicateRecord],
    estimator: Estimator,
    n_bins: usize,
    true_rl: f64,
) -> Result<RlHistogram> {
    if n_bins == 0 {
        return Err(Error::Domain("need at least one bin".to_string()));
    }
    let mut values: Vec<f64> = records
        .iter()
        .filter(|r| r.estimator == estimator && r.converged && r.rl_point.is_finite())
        .map(|r| r.rl_point)
        .collect();
    if values.is_empty() {
        return Err(Error::InsufficientData {
            available: 0,
            required: 1,
        });
    }
    values.sort_by(f64::total_cmp);
    let lo = values[0];
    let hi = values[values.len() - 1];
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = span / n_bins as f64;
    let total = values.len() as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in &values {
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            (
                lo + i as f64 * width,
                lo + (i + 1) as f64 * width,
                c as f64 / total,
            )
        })
        .collect();
    Ok(RlHistogram {
        estimator,
        bins,
        mean: mean(&values),
        median: quantile_type7(&values, 0.5),
        true_rl,
    })
}
