//! Maximum-likelihood fitting of the missingness-adjusted GEV model and the
//! comparison estimators, plus profile-likelihood return-level intervals.
//!
//! Six objectives share one optimiser:
//!
//! - `adjust`: each block contributes the density of its own
//!   missingness-adjusted distribution;
//! - `naive` / `full`: the plain pooled GEV log-likelihood;
//! - `discard`: the plain log-likelihood on the blocks whose missing
//!   fraction does not exceed a threshold;
//! - `weight1` / `weight2`: weighted log-likelihoods with per-block weights
//!   `n_obs/n_full` and `F̂(m_i)^(n_full - n_obs)` respectively, where `F̂`
//!   is the empirical distribution function of the block maxima.

use crate::error::{Error, Result};
use crate::gev::{
    gumbel_variate_of_period, return_level_gradient, return_level_slope, GevParams,
    MissingnessFraction,
};
use crate::optim::{numerical_hessian, quadratic_form3, spd_inverse3, NelderMead};
use crate::special::{chi_sq1_quantile, norm_quantile};
use serde::{Deserialize, Serialize};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One block: its observed maximum and observation counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block_id: i64,
    pub maximum: f64,
    pub n_obs: u32,
    pub n_full: u32,
}

impl BlockRecord {
    pub fn missing_fraction(&self) -> f64 {
        1.0 - f64::from(self.n_obs) / f64::from(self.n_full)
    }

    pub(crate) fn fraction(&self) -> MissingnessFraction {
        MissingnessFraction::new(self.n_obs, self.n_full).expect("validated at construction")
    }
}

/// An ordered collection of block maxima with per-block observation counts.
///
/// `n_full` is carried per block so calendar years of 365 and 366 days can
/// coexist; each block is adjusted by its own ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMaximaSet {
    blocks: Vec<BlockRecord>,
}

impl BlockMaximaSet {
    pub fn new(blocks: Vec<BlockRecord>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InsufficientData {
                available: 0,
                required: 1,
            });
        }
        for b in &blocks {
            if b.n_obs < 1 || b.n_obs > b.n_full {
                return Err(Error::Domain(format!(
                    "block {}: require 1 <= n_obs <= n_full, got n_obs={}, n_full={}",
                    b.block_id, b.n_obs, b.n_full
                )));
            }
            if !b.maximum.is_finite() {
                return Err(Error::Domain(format!(
                    "block {}: non-finite maximum",
                    b.block_id
                )));
            }
        }
        Ok(Self { blocks })
    }

    /// Fully observed blocks with ids 1..=b.
    pub fn from_maxima(maxima: &[f64], n_full: u32) -> Result<Self> {
        let counts = vec![n_full; maxima.len()];
        Self::from_parts(maxima, &counts, n_full)
    }

    /// Blocks with a common full size and per-block observation counts.
    pub fn from_parts(maxima: &[f64], n_obs: &[u32], n_full: u32) -> Result<Self> {
        if maxima.len() != n_obs.len() {
            return Err(Error::Domain(
                "maxima and n_obs must have equal length".to_string(),
            ));
        }
        let blocks = maxima
            .iter()
            .zip(n_obs)
            .enumerate()
            .map(|(i, (&m, &k))| BlockRecord {
                block_id: i as i64 + 1,
                maximum: m,
                n_obs: k,
                n_full,
            })
            .collect();
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[BlockRecord] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn maxima(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.maximum).collect()
    }

    /// Overall missing fraction `1 - sum(n_obs)/sum(n_full)`.
    pub fn missing_fraction(&self) -> f64 {
        let obs: u64 = self.blocks.iter().map(|b| u64::from(b.n_obs)).sum();
        let full: u64 = self.blocks.iter().map(|b| u64::from(b.n_full)).sum();
        1.0 - obs as f64 / full as f64
    }
}

/// The estimators compared in the simulation study.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Adjust,
    Naive,
    Discard,
    Weight1,
    Weight2,
    Full,
}

impl Estimator {
    pub const ALL: [Estimator; 6] = [
        Estimator::Adjust,
        Estimator::Naive,
        Estimator::Discard,
        Estimator::Weight1,
        Estimator::Weight2,
        Estimator::Full,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Adjust => "adjust",
            Estimator::Naive => "naive",
            Estimator::Discard => "discard",
            Estimator::Weight1 => "weight1",
            Estimator::Weight2 => "weight2",
            Estimator::Full => "full",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjust" => Ok(Estimator::Adjust),
            "naive" => Ok(Estimator::Naive),
            "discard" => Ok(Estimator::Discard),
            "weight1" => Ok(Estimator::Weight1),
            "weight2" => Ok(Estimator::Weight2),
            "full" => Ok(Estimator::Full),
            other => Err(Error::Config(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Weighting schemes for the weighted log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    Weight1,
    Weight2,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Blocks with a missing fraction strictly above this are dropped by the
    /// `discard` estimator.
    pub discard_threshold: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            discard_threshold: 0.10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: GevParams,
    pub loglik: f64,
    pub se: [f64; 3],
    pub vcov: [[f64; 3]; 3],
    pub converged: bool,
    pub n_blocks_used: usize,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Profile,
    Delta,
}

impl std::fmt::Display for CiMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CiMethod::Profile => "profile",
            CiMethod::Delta => "delta",
        })
    }
}

/// A return-level point estimate with a confidence interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReturnLevelEstimate {
    pub period_r: f64,
    pub point: f64,
    pub lo: f64,
    /// `f64::INFINITY` when the upper profile never reaches the cutoff.
    pub hi: f64,
    pub method: CiMethod,
    /// Set when the profile deviance stayed below the cutoff for the whole
    /// upward search, i.e. the interval is open above.
    pub upper_unbounded: bool,
}

/// Pooled GEV log-likelihood ignoring missingness (the `naive`/`full`
/// objective). `-inf` if any maximum is outside the support.
pub fn loglik(data: &BlockMaximaSet, p: &GevParams) -> f64 {
    data.blocks().iter().map(|b| p.ln_pdf(b.maximum)).sum()
}

/// Missingness-adjusted log-likelihood: each block contributes the density
/// of its own adjusted distribution. `-inf` if any maximum falls outside the
/// support of its block-specific distribution.
pub fn loglik_adjusted(data: &BlockMaximaSet, p: &GevParams) -> f64 {
    data.blocks()
        .iter()
        .map(|b| p.adjusted(b.fraction()).ln_pdf(b.maximum))
        .sum()
}

/// Per-block weights for a weighting scheme, computed once from the data.
pub fn likelihood_weights(data: &BlockMaximaSet, scheme: WeightScheme) -> Vec<f64> {
    match scheme {
        WeightScheme::Weight1 => data
            .blocks()
            .iter()
            .map(|b| f64::from(b.n_obs) / f64::from(b.n_full))
            .collect(),
        WeightScheme::Weight2 => {
            let mut sorted = data.maxima();
            sorted.sort_by(f64::total_cmp);
            let b = sorted.len() as f64;
            data.blocks()
                .iter()
                .map(|blk| {
                    // F̂(m) = #{j : m_j <= m} / b, so the largest maximum has
                    // empirical probability 1 and weight 1. Low-ranked blocks
                    // with many missing values get weights near zero.
                    let count = sorted.partition_point(|&x| x <= blk.maximum);
                    let fhat = count as f64 / b;
                    fhat.powi((blk.n_full - blk.n_obs) as i32)
                })
                .collect()
        }
    }
}

/// Weighted pooled log-likelihood with weights recomputed from the data.
/// Use [`likelihood_weights`] + [`loglik_weighted_with`] to reuse weights
/// across many parameter evaluations.
pub fn loglik_weighted(data: &BlockMaximaSet, p: &GevParams, scheme: WeightScheme) -> f64 {
    let w = likelihood_weights(data, scheme);
    loglik_weighted_with(data, p, &w)
}

/// Weighted pooled log-likelihood with precomputed weights.
pub fn loglik_weighted_with(data: &BlockMaximaSet, p: &GevParams, weights: &[f64]) -> f64 {
    data.blocks()
        .iter()
        .zip(weights)
        .map(|(b, &w)| {
            if w == 0.0 {
                0.0
            } else {
                w * p.ln_pdf(b.maximum)
            }
        })
        .sum()
}

/// The blocks kept by the `discard` estimator: missing fraction at most
/// `threshold` (a block with *more* than the threshold missing is dropped).
pub fn discard_subset(data: &BlockMaximaSet, threshold: f64) -> Vec<BlockRecord> {
    data.blocks()
        .iter()
        .filter(|b| f64::from(b.n_full - b.n_obs) <= threshold * f64::from(b.n_full))
        .copied()
        .collect()
}

/// A fitting problem: the working blocks and the objective for one estimator.
pub(crate) struct FitProblem {
    data: BlockMaximaSet,
    weights: Option<Vec<f64>>,
    adjusted: bool,
    estimator: Estimator,
}

impl FitProblem {
    pub(crate) fn new(
        data: &BlockMaximaSet,
        estimator: Estimator,
        opts: FitOptions,
    ) -> Result<Self> {
        let (working, weights, adjusted) = match estimator {
            Estimator::Adjust => (data.clone(), None, true),
            Estimator::Naive | Estimator::Full => (data.clone(), None, false),
            Estimator::Discard => {
                let kept = discard_subset(data, opts.discard_threshold);
                let available = kept.len();
                if available < 2 {
                    return Err(Error::InsufficientData {
                        available,
                        required: 2,
                    });
                }
                (BlockMaximaSet::new(kept)?, None, false)
            }
            Estimator::Weight1 => (
                data.clone(),
                Some(likelihood_weights(data, WeightScheme::Weight1)),
                false,
            ),
            Estimator::Weight2 => (
                data.clone(),
                Some(likelihood_weights(data, WeightScheme::Weight2)),
                false,
            ),
        };
        if working.len() < 2 {
            return Err(Error::InsufficientData {
                available: working.len(),
                required: 2,
            });
        }
        Ok(Self {
            data: working,
            weights,
            adjusted,
            estimator,
        })
    }

    pub(crate) fn data(&self) -> &BlockMaximaSet {
        &self.data
    }

    pub(crate) fn loglik(&self, p: &GevParams) -> f64 {
        if self.adjusted {
            loglik_adjusted(&self.data, p)
        } else if let Some(w) = &self.weights {
            loglik_weighted_with(&self.data, p, w)
        } else {
            loglik(&self.data, p)
        }
    }

    fn neg_loglik_vec(&self, x: &[f64]) -> f64 {
        match GevParams::new(x[0], x[1], x[2]) {
            Ok(p) => -self.loglik(&p),
            Err(_) => f64::INFINITY,
        }
    }

    /// Gumbel moment start: `sigma0 = sd*sqrt(6)/pi`, `mu0 = mean - gamma*sigma0`.
    fn moment_start(&self) -> (f64, f64) {
        let maxima = self.data.maxima();
        let n = maxima.len() as f64;
        let mean = maxima.iter().sum::<f64>() / n;
        let var = maxima.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        let sigma0 = (sd * 6.0_f64.sqrt() / std::f64::consts::PI).max(1e-8 * (1.0 + mean.abs()));
        let mu0 = mean - EULER_GAMMA * sigma0;
        (mu0, sigma0)
    }
}

/// Maximise the chosen estimator's objective by Nelder–Mead simplex search
/// from the Gumbel moment start. The covariance is the inverse of the
/// numerically differentiated observed information at the optimum; a failed
/// search or a non-invertible Hessian is reported through `converged`, not
/// as an error.
pub fn fit(data: &BlockMaximaSet, estimator: Estimator, opts: FitOptions) -> Result<FitResult> {
    let problem = FitProblem::new(data, estimator, opts)?;
    fit_problem(&problem)
}

fn fit_problem(problem: &FitProblem) -> Result<FitResult> {
    let (mu0, sigma0) = problem.moment_start();
    let mut start = [mu0, sigma0, 0.1];
    if !problem.neg_loglik_vec(&start).is_finite() {
        // The Gumbel surface is finite everywhere; fall back to it.
        start[2] = 0.0;
    }
    let steps = [0.5 * sigma0, 0.5 * sigma0, 0.25];

    let nm = NelderMead::default();
    let min = nm.minimize(|x| problem.neg_loglik_vec(x), &start, &steps);

    if !min.value.is_finite() {
        let params = GevParams::new(start[0], start[1], start[2])?;
        return Ok(FitResult {
            params,
            loglik: f64::NEG_INFINITY,
            se: [f64::NAN; 3],
            vcov: [[f64::NAN; 3]; 3],
            converged: false,
            n_blocks_used: problem.data.len(),
            estimator: problem.estimator,
        });
    }

    let params = GevParams::new(min.x[0], min.x[1], min.x[2])?;
    let hess = numerical_hessian(|x| problem.neg_loglik_vec(x), &min.x, 1e-5);
    let hess3 = [
        [hess[0][0], hess[0][1], hess[0][2]],
        [hess[1][0], hess[1][1], hess[1][2]],
        [hess[2][0], hess[2][1], hess[2][2]],
    ];
    let (vcov, se, invertible) = match spd_inverse3(&hess3) {
        Some(v) => {
            let se = [v[0][0].sqrt(), v[1][1].sqrt(), v[2][2].sqrt()];
            (v, se, true)
        }
        None => ([[f64::NAN; 3]; 3], [f64::NAN; 3], false),
    };

    Ok(FitResult {
        params,
        loglik: -min.value,
        se,
        vcov,
        converged: min.converged && invertible,
        n_blocks_used: problem.data.len(),
        estimator: problem.estimator,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Grid resolution across the initial span.
    pub grid_points: usize,
    /// Half-width of the initial search span in delta-method standard errors.
    pub span_se: f64,
    /// Relative tolerance of the bisection refinement.
    pub rel_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            grid_points: 400,
            span_se: 8.0,
            rel_tol: 1e-6,
        }
    }
}

/// Profile-likelihood confidence interval for the `r`-block return level.
///
/// Fits the estimator, then reparametrises the location in terms of the
/// return level and maximises over (sigma, xi) along a grid, locating the
/// deviance crossings by bisection.
pub fn profile_return_level(
    data: &BlockMaximaSet,
    estimator: Estimator,
    r: f64,
    level: f64,
    opts: FitOptions,
) -> Result<ReturnLevelEstimate> {
    let fitted = fit(data, estimator, opts)?;
    profile_return_level_with_fit(data, &fitted, r, level, opts, ProfileOptions::default())
}

/// As [`profile_return_level`] but reusing an existing fit. `opts` must
/// match the options the fit was produced with.
pub fn profile_return_level_with_fit(
    data: &BlockMaximaSet,
    fitted: &FitResult,
    r: f64,
    level: f64,
    opts: FitOptions,
    prof: ProfileOptions,
) -> Result<ReturnLevelEstimate> {
    if !fitted.converged {
        return Err(Error::NotConverged(format!(
            "cannot profile an unconverged {} fit",
            fitted.estimator
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let y = gumbel_variate_of_period(r)?;
    let point = fitted.params.return_level(r)?;
    let cutoff = chi_sq1_quantile(level)?;
    let problem = FitProblem::new(data, fitted.estimator, opts)?;

    // Span unit from the delta method; fall back to the fitted scale if the
    // covariance is unusable.
    let grad = return_level_gradient(&fitted.params, r)?;
    let var = quadratic_form3(&fitted.vcov, &grad);
    let se_z = if var.is_finite() && var > 0.0 {
        var.sqrt()
    } else {
        0.5 * fitted.params.sigma()
    };

    let nm = NelderMead {
        ftol_rel: 1e-10,
        max_iter: 500,
        restarts: 1,
    };
    // Maximised log-likelihood over (sigma, xi) at fixed return level z.
    let profile_at = |z: f64, warm: &mut [f64; 2]| -> f64 {
        let objective = |sx: &[f64]| -> f64 {
            let (sigma, xi) = (sx[0], sx[1]);
            if sigma <= 0.0 || !sigma.is_finite() || !xi.is_finite() {
                return f64::INFINITY;
            }
            let mu = z - return_level_slope(sigma, xi, y);
            match GevParams::new(mu, sigma, xi) {
                Ok(p) => -problem.loglik(&p),
                Err(_) => f64::INFINITY,
            }
        };
        let steps = [0.05 * warm[0].max(1e-12), 0.02];
        let min = nm.minimize(objective, &warm[..], &steps);
        warm[0] = min.x[0];
        warm[1] = min.x[1];
        -min.value
    };

    let mut warm0 = [fitted.params.sigma(), fitted.params.xi()];
    let ell_at_point = profile_at(point, &mut warm0);
    // The profile at the point estimate equals the maximised log-likelihood;
    // keep whichever is larger so the deviance is non-negative.
    let ell_hat = fitted.loglik.max(ell_at_point);

    let half = (prof.grid_points / 2).max(1);
    let spacing = prof.span_se * se_z / half as f64;

    let deviance = |ell: f64| 2.0 * (ell_hat - ell);

    // Walk outward from the point estimate until the deviance crosses the
    // cutoff, then bisect the bracketing pair.
    let search = |direction: f64| -> (f64, bool) {
        let mut warm = warm0;
        let mut inside = point;
        let mut step_count = 0usize;
        let mut z = point;
        let mut bracket: Option<(f64, f64)> = None; // (inside, outside)
        loop {
            step_count += 1;
            z = if step_count <= half {
                point + direction * spacing * step_count as f64
            } else {
                // Geometric extension beyond the initial span.
                point + (z - point) * 1.5
            };
            let d = deviance(profile_at(z, &mut warm));
            if d >= cutoff {
                bracket = Some((inside, z));
                break;
            }
            inside = z;
            if (z - point).abs() > 1e6 * se_z.max(1e-300) || step_count > half + 60 {
                break;
            }
        }
        match bracket {
            None => (inside, true),
            Some((mut a, mut b)) => {
                let tol = prof.rel_tol * point.abs().max(1.0);
                let mut warm = warm0;
                while (b - a).abs() > tol {
                    let mid = 0.5 * (a + b);
                    let d = deviance(profile_at(mid, &mut warm));
                    if d >= cutoff {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                (0.5 * (a + b), false)
            }
        }
    };

    let (lo, _) = search(-1.0);
    let (hi, upper_unbounded) = search(1.0);

    Ok(ReturnLevelEstimate {
        period_r: r,
        point,
        lo,
        hi: if upper_unbounded { f64::INFINITY } else { hi },
        method: CiMethod::Profile,
        upper_unbounded,
    })
}

/// Delta-method confidence interval for the `r`-block return level.
pub fn delta_return_level(fitted: &FitResult, r: f64, level: f64) -> Result<ReturnLevelEstimate> {
    if !fitted.converged {
        return Err(Error::NotConverged(format!(
            "cannot form a delta interval from an unconverged {} fit",
            fitted.estimator
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must be in (0,1), got {level}"
        )));
    }
    let point = fitted.params.return_level(r)?;
    let grad = return_level_gradient(&fitted.params, r)?;
    let var = quadratic_form3(&fitted.vcov, &grad);
    let se = var.max(0.0).sqrt();
    let zq = norm_quantile(0.5 * (1.0 + level))?;
    Ok(ReturnLevelEstimate {
        period_r: r,
        point,
        lo: point - zq * se,
        hi: point + zq * se,
        method: CiMethod::Delta,
        upper_unbounded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::numerical_gradient;
    use crate::rng::{open_unit, stream, StreamPurpose};

    fn gev(mu: f64, sigma: f64, xi: f64) -> GevParams {
        GevParams::new(mu, sigma, xi).unwrap()
    }

    /// Simulated GEV block maxima via the inverse cdf.
    fn gev_sample(p: &GevParams, b: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, 0, StreamPurpose::Data);
        (0..b)
            .map(|_| p.quantile(open_unit(&mut rng)).unwrap())
            .collect()
    }

    fn toy_set() -> BlockMaximaSet {
        BlockMaximaSet::from_parts(
            &[3.0, 1.0, 4.0, 1.5, 5.0],
            &[8, 10, 9, 10, 7],
            10,
        )
        .unwrap()
    }

    #[test]
    fn block_set_validation() {
        assert!(BlockMaximaSet::from_parts(&[1.0], &[0], 10).is_err());
        assert!(BlockMaximaSet::from_parts(&[1.0], &[11], 10).is_err());
        assert!(BlockMaximaSet::from_parts(&[f64::NAN], &[5], 10).is_err());
        assert!(BlockMaximaSet::new(vec![]).is_err());
        let s = toy_set();
        assert_eq!(s.len(), 5);
        assert!((s.missing_fraction() - (1.0 - 44.0 / 50.0)).abs() < 1e-15);
    }

    #[test]
    fn adjusted_loglik_reduces_to_plain_when_fully_observed() {
        let data = BlockMaximaSet::from_maxima(&[2.0, 3.5, 1.0, 4.2, 2.2], 90).unwrap();
        let p = gev(2.0, 1.0, 0.15);
        let a = loglik_adjusted(&data, &p);
        let plain = loglik(&data, &p);
        assert!((a - plain).abs() < 1e-12);
    }

    #[test]
    fn adjusted_loglik_single_block_gumbel_mode() {
        let data = BlockMaximaSet::from_maxima(&[0.0], 90).unwrap();
        assert!((loglik_adjusted(&data, &gev(0.0, 1.0, 0.0)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn adjusted_loglik_matches_independent_oracle() {
        // Textbook re-implementation with direct powers, no shared code path.
        fn oracle(data: &BlockMaximaSet, mu: f64, sigma: f64, xi: f64) -> f64 {
            data.blocks()
                .iter()
                .map(|blk| {
                    let rho = blk.n_obs as f64 / blk.n_full as f64;
                    let (mu_i, sigma_i) = if xi == 0.0 {
                        (mu + sigma * rho.ln(), sigma)
                    } else {
                        (mu + sigma / xi * (rho.powf(xi) - 1.0), sigma * rho.powf(xi))
                    };
                    let t = (1.0 + xi * (blk.maximum - mu_i) / sigma_i).powf(-1.0 / xi);
                    -sigma_i.ln() + (xi + 1.0) * t.ln() - t
                })
                .sum()
        }
        let data = toy_set();
        let p = gev(2.0, 1.5, 0.1);
        let got = loglik_adjusted(&data, &p);
        let want = oracle(&data, 2.0, 1.5, 0.1);
        assert!((got - want).abs() < 1e-10, "got {got}, oracle {want}");
    }

    #[test]
    fn adjusted_loglik_outside_support_is_minus_inf() {
        // xi = 0.5 lower endpoint for a half-observed block sits above the
        // observed maximum.
        let data = BlockMaximaSet::from_parts(&[-3.0], &[45], 90).unwrap();
        assert_eq!(
            loglik_adjusted(&data, &gev(0.0, 1.0, 0.5)),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn weights_all_one_without_missingness() {
        let data = BlockMaximaSet::from_maxima(&[2.0, 3.0, 4.0], 90).unwrap();
        for scheme in [WeightScheme::Weight1, WeightScheme::Weight2] {
            let w = likelihood_weights(&data, scheme);
            assert!(w.iter().all(|&x| (x - 1.0).abs() < 1e-15));
            let p = gev(2.0, 1.0, 0.1);
            assert!((loglik_weighted(&data, &p, scheme) - loglik(&data, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn weight1_direct_substitution() {
        let data = BlockMaximaSet::from_parts(&[2.0, 3.0], &[5, 10], 10).unwrap();
        let p = gev(1.0, 2.0, 0.1);
        let want = 0.5 * p.ln_pdf(2.0) + 1.0 * p.ln_pdf(3.0);
        assert!((loglik_weighted(&data, &p, WeightScheme::Weight1) - want).abs() < 1e-12);
    }

    #[test]
    fn weight2_hand_enumerated_ranks() {
        // maxima [3, 1, 4, 1.5, 5]: empirical cdf values 3/5, 1/5, 4/5, 2/5, 1;
        // exponents n_full - n_obs = [2, 0, 1, 0, 3].
        let data = toy_set();
        let w = likelihood_weights(&data, WeightScheme::Weight2);
        let want = [0.6f64.powi(2), 1.0, 0.8, 1.0, 1.0];
        for (got, want) in w.iter().zip(want) {
            assert!((got - want).abs() < 1e-15, "weights {w:?}");
        }
        // More missingness means a strictly smaller weight at equal rank.
        let tied = BlockMaximaSet::from_parts(&[2.0, 3.0, 4.0], &[10, 5, 10], 10).unwrap();
        let w = likelihood_weights(&tied, WeightScheme::Weight2);
        assert!(w[1] < 1.0 && w[0] == 1.0 && w[2] == 1.0);
    }

    #[test]
    fn discard_subset_keeps_boundary_blocks() {
        // Exactly 10% missing is kept; strictly more is dropped.
        let data =
            BlockMaximaSet::from_parts(&[1.0, 2.0, 3.0], &[90, 81, 80], 90).unwrap();
        let kept = discard_subset(&data, 0.10);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[1].n_obs, 81);
    }

    #[test]
    fn discard_errors_when_everything_is_too_gappy() {
        let data = BlockMaximaSet::from_parts(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[45, 50, 60, 70, 79],
            90,
        )
        .unwrap();
        match fit(&data, Estimator::Discard, FitOptions::default()) {
            Err(Error::InsufficientData { available, required }) => {
                assert_eq!(available, 0);
                assert_eq!(required, 2);
            }
            other => panic!("expected insufficient-data error, got {other:?}"),
        }
    }

    #[test]
    fn fit_recovers_parameters_on_simulated_data() {
        let truth = gev(0.0, 1.0, 0.2);
        let maxima = gev_sample(&truth, 4000, 11);
        let data = BlockMaximaSet::from_maxima(&maxima, 90).unwrap();
        let res = fit(&data, Estimator::Full, FitOptions::default()).unwrap();
        assert!(res.converged);
        for j in 0..3 {
            let err = (res.params.as_array()[j] - truth.as_array()[j]).abs();
            assert!(
                err < 4.0 * res.se[j],
                "component {j}: err {err}, se {}",
                res.se[j]
            );
        }
        // Covariance is symmetric positive definite with matching SEs.
        for i in 0..3 {
            for j in 0..3 {
                assert!((res.vcov[i][j] - res.vcov[j][i]).abs() < 1e-12);
            }
            assert!((res.se[i] - res.vcov[i][i].sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_optimum_is_first_order_stationary() {
        let truth = gev(3.0, 2.0, -0.1);
        let maxima = gev_sample(&truth, 300, 5);
        let data = BlockMaximaSet::from_maxima(&maxima, 90).unwrap();
        for est in [Estimator::Naive, Estimator::Adjust] {
            let res = fit(&data, est, FitOptions::default()).unwrap();
            assert!(res.converged);
            let problem = FitProblem::new(&data, est, FitOptions::default()).unwrap();
            let g = numerical_gradient(
                |x| problem.neg_loglik_vec(x),
                &res.params.as_array(),
                1e-6,
            );
            let bound = 1e-4 * (1.0 + res.loglik.abs());
            for (j, gj) in g.iter().enumerate() {
                assert!(gj.abs() < bound, "component {j}: |grad| = {}", gj.abs());
            }
        }
    }

    #[test]
    fn adjust_equals_naive_without_missingness() {
        let truth = gev(10.0, 2.0, 0.1);
        let maxima = gev_sample(&truth, 200, 7);
        let data = BlockMaximaSet::from_maxima(&maxima, 365).unwrap();
        let a = fit(&data, Estimator::Adjust, FitOptions::default()).unwrap();
        let n = fit(&data, Estimator::Naive, FitOptions::default()).unwrap();
        for j in 0..3 {
            assert!(
                (a.params.as_array()[j] - n.params.as_array()[j]).abs() < 1e-6,
                "component {j} differs"
            );
        }
        // Weighted estimators coincide as well (all weights are 1).
        for est in [Estimator::Weight1, Estimator::Weight2] {
            let w = fit(&data, est, FitOptions::default()).unwrap();
            for j in 0..3 {
                assert!((w.params.as_array()[j] - n.params.as_array()[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn location_shift_equivariance() {
        let truth = gev(0.0, 1.0, 0.1);
        let mut rng = stream(42, 3, StreamPurpose::Data);
        let maxima: Vec<f64> = (0..150)
            .map(|_| truth.quantile(open_unit(&mut rng)).unwrap())
            .collect();
        let n_obs: Vec<u32> = (0..150).map(|i| 80 + (i % 11) as u32).collect();
        let data = BlockMaximaSet::from_parts(&maxima, &n_obs, 90).unwrap();
        let shift = 37.5;
        let shifted_maxima: Vec<f64> = maxima.iter().map(|m| m + shift).collect();
        let shifted = BlockMaximaSet::from_parts(&shifted_maxima, &n_obs, 90).unwrap();

        for est in Estimator::ALL {
            let a = fit(&data, est, FitOptions::default()).unwrap();
            let b = fit(&shifted, est, FitOptions::default()).unwrap();
            assert!(
                (b.params.mu() - a.params.mu() - shift).abs() < 1e-5,
                "{est}: mu shift {}",
                b.params.mu() - a.params.mu()
            );
            assert!((b.params.sigma() - a.params.sigma()).abs() < 1e-5, "{est}");
            assert!((b.params.xi() - a.params.xi()).abs() < 1e-5, "{est}");
            let ra = a.params.return_level(100.0).unwrap();
            let rb = b.params.return_level(100.0).unwrap();
            assert!((rb - ra - shift).abs() < 1e-4, "{est}: rl shift {}", rb - ra);
        }
    }

    #[test]
    fn profile_interval_brackets_point_with_zero_deviance() {
        let truth = gev(0.0, 1.0, 0.0);
        let maxima = gev_sample(&truth, 250, 9);
        let data = BlockMaximaSet::from_maxima(&maxima, 90).unwrap();
        let fitted = fit(&data, Estimator::Naive, FitOptions::default()).unwrap();
        let est = profile_return_level_with_fit(
            &data,
            &fitted,
            100.0,
            0.95,
            FitOptions::default(),
            ProfileOptions::default(),
        )
        .unwrap();
        assert!(est.lo <= est.point && est.point <= est.hi);
        assert!(!est.upper_unbounded);
        assert!(est.lo < est.hi);

        // Deviance at the point estimate is numerically zero.
        let problem = FitProblem::new(&data, Estimator::Naive, FitOptions::default()).unwrap();
        let y = gumbel_variate_of_period(100.0).unwrap();
        let nm = NelderMead::default();
        let objective = |sx: &[f64]| -> f64 {
            let mu = est.point - return_level_slope(sx[0], sx[1], y);
            match GevParams::new(mu, sx[0], sx[1]) {
                Ok(p) => -problem.loglik(&p),
                Err(_) => f64::INFINITY,
            }
        };
        let min = nm.minimize(
            objective,
            &[fitted.params.sigma(), fitted.params.xi()],
            &[0.05 * fitted.params.sigma(), 0.02],
        );
        let deviance = 2.0 * (fitted.loglik - (-min.value));
        assert!(deviance.abs() < 1e-8, "deviance at point = {deviance}");
    }

    #[test]
    fn delta_interval_is_symmetric_and_ordered() {
        let truth = gev(0.0, 1.0, 0.0);
        let maxima = gev_sample(&truth, 400, 2);
        let data = BlockMaximaSet::from_maxima(&maxima, 90).unwrap();
        let fitted = fit(&data, Estimator::Naive, FitOptions::default()).unwrap();
        let est = delta_return_level(&fitted, 100.0, 0.95).unwrap();
        assert!(est.lo < est.point && est.point < est.hi);
        assert!(((est.hi - est.point) - (est.point - est.lo)).abs() < 1e-9);
        assert_eq!(est.method, CiMethod::Delta);
    }

    #[test]
    fn estimator_tags_round_trip() {
        for est in Estimator::ALL {
            let s = est.to_string();
            assert_eq!(s.parse::<Estimator>().unwrap(), est);
        }
        assert!("bogus".parse::<Estimator>().is_err());
        assert_eq!(serde_json::to_string(&Estimator::Weight2).unwrap(), "\"weight2\"");
    }
}
