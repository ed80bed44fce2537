//! Model-checking data with missingness adjustments: PP, QQ, return-level
//! and density diagnostics, each with pointwise order-statistic bands.
//!
//! Because block maxima under missingness are not identically distributed,
//! the observed maxima are first standardised to equivalent full-block
//! maxima by matching quantiles between each block's fitted distribution
//! and the full-block fit; all classical displays then apply unchanged.
//! With no missingness everything here reduces to the usual GEV
//! diagnostics.

use crate::error::{Error, Result};
use crate::gev::{gumbel_variate_of_period, GevParams};
use crate::inference::{
    profile_return_level_with_fit, BlockMaximaSet, FitOptions, FitResult, ProfileOptions,
};
use crate::special::beta_quantile;

/// Probability clamp for adjusted maxima whose model probability
/// evaluates to exactly 0 or 1 in floating point.
const PROB_CLAMP: f64 = 1e-12;

/// Band probabilities for the pointwise order-statistic intervals.
const BAND_LO: f64 = 0.025;
const BAND_HI: f64 = 0.975;

fn require_converged(fit: &FitResult) -> Result<()> {
    if fit.converged {
        Ok(())
    } else {
        Err(Error::NotConverged(format!(
            "diagnostics require a converged {} fit",
            fit.estimator
        )))
    }
}

/// Model-based cumulative probability of each observed maximum under its
/// block-specific adjusted distribution, in block order.
pub fn model_probabilities(data: &BlockMaximaSet, fit: &FitResult) -> Result<Vec<f64>> {
    require_converged(fit)?;
    Ok(data
        .blocks()
        .iter()
        .map(|b| fit.params.adjusted(b.fraction()).cdf(b.maximum))
        .collect())
}

/// Observed maxima standardised to the full-block scale by quantile
/// matching. Fully observed blocks come back unchanged. `clamped` lists the
/// indices whose model probability had to be clamped away from 0 or 1.
#[derive(Debug, Clone)]
pub struct AdjustedMaxima {
    pub values: Vec<f64>,
    pub clamped: Vec<usize>,
}

pub fn adjusted_block_maxima(data: &BlockMaximaSet, fit: &FitResult) -> Result<AdjustedMaxima> {
    let probs = model_probabilities(data, fit)?;
    let mut clamped = Vec::new();
    let mut values = Vec::with_capacity(probs.len());
    for (i, (&p, block)) in probs.iter().zip(data.blocks()).enumerate() {
        if block.n_obs == block.n_full {
            values.push(block.maximum);
            continue;
        }
        let p = if p < PROB_CLAMP {
            clamped.push(i);
            PROB_CLAMP
        } else if p > 1.0 - PROB_CLAMP {
            clamped.push(i);
            1.0 - PROB_CLAMP
        } else {
            p
        };
        values.push(fit.params.quantile(p)?);
    }
    Ok(AdjustedMaxima { values, clamped })
}

#[derive(Debug, Clone)]
pub struct PpData {
    /// (expected i/(b+1), observed sorted probability).
    pub points: Vec<(f64, f64)>,
    /// Pointwise 2.5%/97.5% quantiles of the i-th uniform order statistic.
    pub bands: Vec<(f64, f64)>,
}

pub fn pp_plot_data(data: &BlockMaximaSet, fit: &FitResult) -> Result<PpData> {
    let mut probs = model_probabilities(data, fit)?;
    probs.sort_by(f64::total_cmp);
    let b = probs.len();
    let mut points = Vec::with_capacity(b);
    let mut bands = Vec::with_capacity(b);
    for (i, &p) in probs.iter().enumerate() {
        let rank = (i + 1) as f64;
        points.push((rank / (b as f64 + 1.0), p));
        // The i-th order statistic of b U(0,1) draws is Beta(i, b+1-i).
        let a = rank;
        let bb = b as f64 + 1.0 - rank;
        bands.push((beta_quantile(BAND_LO, a, bb)?, beta_quantile(BAND_HI, a, bb)?));
    }
    Ok(PpData { points, bands })
}

#[derive(Debug, Clone)]
pub struct QqData {
    /// (model quantile at i/(b+1), i-th smallest adjusted maximum).
    pub points: Vec<(f64, f64)>,
    /// The PP bands pushed through the fitted full-block quantile function.
    pub bands: Vec<(f64, f64)>,
}

pub fn qq_plot_data(data: &BlockMaximaSet, fit: &FitResult) -> Result<QqData> {
    let adj = adjusted_block_maxima(data, fit)?;
    let mut ordered = adj.values;
    ordered.sort_by(f64::total_cmp);
    let b = ordered.len();
    let mut points = Vec::with_capacity(b);
    let mut bands = Vec::with_capacity(b);
    for (i, &m) in ordered.iter().enumerate() {
        let rank = (i + 1) as f64;
        points.push((fit.params.quantile(rank / (b as f64 + 1.0))?, m));
        let a = rank;
        let bb = b as f64 + 1.0 - rank;
        bands.push((
            fit.params.quantile(beta_quantile(BAND_LO, a, bb)?)?,
            fit.params.quantile(beta_quantile(BAND_HI, a, bb)?)?,
        ));
    }
    Ok(QqData { points, bands })
}

/// Plot abscissa for a return period: `-log10(-log(1 - 1/r))`.
pub fn rl_plot_abscissa(r: f64) -> Result<f64> {
    Ok(-gumbel_variate_of_period(r)?.log10())
}

/// Return periods spaced uniformly on the plot abscissa.
pub fn default_return_period_grid(points: usize) -> Vec<f64> {
    let x_min = -0.66; // r just above 1
    let x_max = 3.0; // r = 1000
    (0..points)
        .map(|k| {
            let x = x_min + (x_max - x_min) * k as f64 / (points - 1).max(1) as f64;
            let y = 10f64.powf(-x);
            1.0 / -(-y).exp_m1()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct RlCurvePoint {
    pub r: f64,
    pub x_axis: f64,
    pub z: f64,
    /// Absent when the profile interval failed at this grid point.
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub upper_unbounded: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct RlEmpiricalPoint {
    pub r: f64,
    pub x_axis: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct RlPlotData {
    pub curve: Vec<RlCurvePoint>,
    pub empirical: Vec<RlEmpiricalPoint>,
}

/// Return-level curve over `r_grid` with pointwise profile intervals, plus
/// the adjusted maxima at plotting positions `r_i = 1/(1 - i/(b+1))`.
pub fn return_level_plot_data(
    data: &BlockMaximaSet,
    fit: &FitResult,
    r_grid: &[f64],
    level: f64,
    opts: FitOptions,
) -> Result<RlPlotData> {
    require_converged(fit)?;
    let mut curve = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let z = fit.params.return_level(r)?;
        let x_axis = rl_plot_abscissa(r)?;
        match profile_return_level_with_fit(data, fit, r, level, opts, ProfileOptions::default())
        {
            Ok(ci) => curve.push(RlCurvePoint {
                r,
                x_axis,
                z,
                lo: Some(ci.lo),
                hi: Some(ci.hi),
                upper_unbounded: ci.upper_unbounded,
            }),
            Err(_) => curve.push(RlCurvePoint {
                r,
                x_axis,
                z,
                lo: None,
                hi: None,
                upper_unbounded: false,
            }),
        }
    }

    let adj = adjusted_block_maxima(data, fit)?;
    let mut ordered = adj.values;
    ordered.sort_by(f64::total_cmp);
    let b = ordered.len() as f64;
    let mut empirical = Vec::with_capacity(ordered.len());
    for (i, &m) in ordered.iter().enumerate() {
        let rank = (i + 1) as f64;
        let r = 1.0 / (1.0 - rank / (b + 1.0));
        empirical.push(RlEmpiricalPoint {
            r,
            x_axis: rl_plot_abscissa(r)?,
            value: m,
        });
    }
    Ok(RlPlotData { curve, empirical })
}

#[derive(Debug, Clone)]
pub struct DensityData {
    /// (left edge, right edge, density height); total area is 1.
    pub bins: Vec<(f64, f64, f64)>,
    /// Fitted density sampled on a regular grid spanning the data range
    /// extended by 10% on each side.
    pub curve: Vec<(f64, f64)>,
}

/// Density-normalised histogram of the adjusted maxima with the fitted
/// full-block density superimposed.
pub fn density_plot_data(
    adjusted: &[f64],
    params: &GevParams,
    n_bins: usize,
) -> Result<DensityData> {
    if adjusted.is_empty() {
        return Err(Error::InsufficientData {
            available: 0,
            required: 1,
        });
    }
    if n_bins == 0 {
        return Err(Error::Domain("need at least one histogram bin".to_string()));
    }
    let lo = adjusted.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = adjusted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let total = adjusted.len() as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in adjusted {
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
                c as f64 / (total * width),
            )
        })
        .collect();

    const CURVE_POINTS: usize = 512;
    let pad = 0.1 * (hi - lo);
    let (glo, ghi) = (lo - pad, hi + pad);
    let curve = (0..CURVE_POINTS)
        .map(|k| {
            let z = glo + (ghi - glo) * k as f64 / (CURVE_POINTS - 1) as f64;
            (z, params.pdf(z))
        })
        .collect();
    Ok(DensityData { bins, curve })
}

/// All four diagnostics for one fit.
#[derive(Debug, Clone)]
pub struct DiagnosticsBundle {
    pub pp: PpData,
    pub qq: QqData,
    pub rl: RlPlotData,
    pub density: DensityData,
    pub adjusted_maxima: Vec<f64>,
    /// Indices whose model probability was clamped away from 0/1.
    pub clamped: Vec<usize>,
    pub density_params: GevParams,
}

pub fn diagnostics_bundle(
    data: &BlockMaximaSet,
    fit: &FitResult,
    r_grid: &[f64],
    level: f64,
    n_bins: usize,
    opts: FitOptions,
) -> Result<DiagnosticsBundle> {
    let pp = pp_plot_data(data, fit)?;
    let qq = qq_plot_data(data, fit)?;
    let rl = return_level_plot_data(data, fit, r_grid, level, opts)?;
    let adj = adjusted_block_maxima(data, fit)?;
    let density = density_plot_data(&adj.values, &fit.params, n_bins)?;
    Ok(DiagnosticsBundle {
        pp,
        qq,
        rl,
        density,
        adjusted_maxima: adj.values,
        clamped: adj.clamped,
        density_params: fit.params,
    })
}
