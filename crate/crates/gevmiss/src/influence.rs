//! Influence curves for the GEV maximum-likelihood estimators: the effect
//! of one observation on the fitted parameters and return levels.
//!
//! The influence of an observation `y` is `i⁻¹ s(y)`, where `s` is the
//! score of the log-density at `y` and `i` the per-observation expected
//! information. The information is estimated by a fixed-seed Monte Carlo
//! average of score outer products over antithetic GEV draws, so repeated
//! calls are deterministic; curves are indexed on the standard-normal scale
//! `z = Φ⁻¹(G(y))`.

use crate::error::{Error, Result};
use crate::gev::{return_level_gradient, GevParams};
use crate::optim::{matvec3, spd_inverse3};
use crate::rng::{open_unit, stream, StreamPurpose};
use crate::special::norm_cdf;

/// Finite-difference step scale for scores.
const SCORE_STEP: f64 = 1e-6;

/// Fixed seed of the information-matrix Monte Carlo.
const INFORMATION_SEED: u64 = 0x1a2b_3c4d_5e6f_7081;

#[derive(Debug, Clone, Copy)]
pub struct InfluenceOptions {
    /// Total Monte Carlo draws for the expected information (antithetic
    /// pairs, so must be even).
    pub n_draws: usize,
    pub seed: u64,
}

impl Default for InfluenceOptions {
    fn default() -> Self {
        Self {
            n_draws: 1_000_000,
            seed: INFORMATION_SEED,
        }
    }
}

/// Score of the GEV log-density in (mu, sigma, xi) at an observation `y`,
/// by central finite differences.
pub fn score(params: &GevParams, y: f64) -> [f64; 3] {
    let theta = params.as_array();
    let mut s = [0.0; 3];
    for j in 0..3 {
        let h = SCORE_STEP * (1.0 + theta[j].abs());
        let mut up = theta;
        let mut dn = theta;
        up[j] += h;
        dn[j] -= h;
        let lu = GevParams::new(up[0], up[1], up[2])
            .map(|p| p.ln_pdf(y))
            .unwrap_or(f64::NAN);
        let ld = GevParams::new(dn[0], dn[1], dn[2])
            .map(|p| p.ln_pdf(y))
            .unwrap_or(f64::NAN);
        s[j] = (lu - ld) / (2.0 * h);
    }
    s
}

/// Monte Carlo estimate of the per-observation expected information
/// `E[s sᵀ]` over antithetic GEV draws.
pub fn expected_information(params: &GevParams, opts: InfluenceOptions) -> Result<[[f64; 3]; 3]> {
    let pairs = (opts.n_draws / 2).max(1);
    let mut rng = stream(opts.seed, 0, StreamPurpose::Information);
    let mut acc = [[0.0f64; 3]; 3];
    let mut used = 0usize;
    for _ in 0..pairs {
        let u = open_unit(&mut rng);
        for p in [u, 1.0 - u] {
            let y = params.quantile(p)?;
            let s = score(params, y);
            if s.iter().any(|v| !v.is_finite()) {
                continue;
            }
            for i in 0..3 {
                for j in i..3 {
                    acc[i][j] += s[i] * s[j];
                }
            }
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::SingularInformation);
    }
    let mut info = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            info[i][j] = acc[i][j] / used as f64;
            info[j][i] = info[i][j];
        }
    }
    Ok(info)
}

/// Influence curves for the three GEV parameters over a normal-scale grid.
#[derive(Debug, Clone)]
pub struct InfluenceCurve {
    pub params: GevParams,
    /// Standard-normal-scale abscissae.
    pub grid_z: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Precomputed information for repeated influence evaluations.
pub struct InfluenceAnalysis {
    params: GevParams,
    information: [[f64; 3]; 3],
    information_inv: [[f64; 3]; 3],
}

impl InfluenceAnalysis {
    pub fn new(params: GevParams, opts: InfluenceOptions) -> Result<Self> {
        let information = expected_information(&params, opts)?;
        let information_inv =
            spd_inverse3(&information).ok_or(Error::SingularInformation)?;
        Ok(Self {
            params,
            information,
            information_inv,
        })
    }

    pub fn information(&self) -> &[[f64; 3]; 3] {
        &self.information
    }

    /// Influence of a single observation on (mu, sigma, xi).
    pub fn influence_at(&self, y: f64) -> [f64; 3] {
        matvec3(&self.information_inv, &score(&self.params, y))
    }

    /// Map a normal-scale abscissa to the observation scale.
    pub fn observation_at(&self, z: f64) -> Result<f64> {
        self.params.quantile(norm_cdf(z))
    }

    pub fn params_curve(&self, grid_z: &[f64]) -> Result<InfluenceCurve> {
        let mut mu = Vec::with_capacity(grid_z.len());
        let mut sigma = Vec::with_capacity(grid_z.len());
        let mut xi = Vec::with_capacity(grid_z.len());
        for &z in grid_z {
            let y = self.observation_at(z)?;
            let inf = self.influence_at(y);
            mu.push(inf[0]);
            sigma.push(inf[1]);
            xi.push(inf[2]);
        }
        Ok(InfluenceCurve {
            params: self.params,
            grid_z: grid_z.to_vec(),
            mu,
            sigma,
            xi,
        })
    }

    /// Influence on the `r`-block return level: the return-level gradient
    /// dotted with the parameter influence, per grid point.
    pub fn return_level_curve(&self, r: f64, grid_z: &[f64]) -> Result<Vec<f64>> {
        let grad = return_level_gradient(&self.params, r)?;
        grid_z
            .iter()
            .map(|&z| {
                let y = self.observation_at(z)?;
                let inf = self.influence_at(y);
                Ok(grad[0] * inf[0] + grad[1] * inf[1] + grad[2] * inf[2])
            })
            .collect()
    }
}

/// Influence curves for the GEV parameters with default Monte Carlo
/// settings.
pub fn influence_params(params: &GevParams, grid_z: &[f64]) -> Result<InfluenceCurve> {
    InfluenceAnalysis::new(*params, InfluenceOptions::default())?.params_curve(grid_z)
}

/// Influence curve for the `r`-block return level with default settings.
pub fn influence_return_level(params: &GevParams, r: f64, grid_z: &[f64]) -> Result<Vec<f64>> {
    InfluenceAnalysis::new(*params, InfluenceOptions::default())?.return_level_curve(r, grid_z)
}

/// The default plotting grid: 201 points on [-4, 4].
pub fn default_normal_grid() -> Vec<f64> {
    (0..201).map(|k| -4.0 + 8.0 * k as f64 / 200.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::cholesky3;
    use crate::special::norm_quantile;

    fn gev(mu: f64, sigma: f64, xi: f64) -> GevParams {
        GevParams::new(mu, sigma, xi).unwrap()
    }

    fn quick_opts() -> InfluenceOptions {
        InfluenceOptions {
            n_draws: 200_000,
            ..Default::default()
        }
    }

    #[test]
    fn information_is_symmetric_and_positive_definite() {
        for &xi in &[-0.3, 0.0, 0.2] {
            let info = expected_information(&gev(0.0, 1.0, xi), quick_opts()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (info[i][j] - info[j][i]).abs() <= 1e-8 * info[i][i].abs().max(1.0),
                        "xi={xi}"
                    );
                }
            }
            assert!(cholesky3(&info).is_some(), "xi={xi}: not positive definite");
        }
    }

    #[test]
    fn mean_influence_is_zero_at_the_true_parameter() {
        let params = gev(0.0, 1.0, 0.1);
        let analysis = InfluenceAnalysis::new(params, quick_opts()).unwrap();
        let n = 200_000usize;
        let mut rng = stream(77, 0, StreamPurpose::Data);
        let mut sums = [0.0f64; 3];
        for _ in 0..n {
            let y = params.quantile(open_unit(&mut rng)).unwrap();
            let inf = analysis.influence_at(y);
            for j in 0..3 {
                sums[j] += inf[j];
            }
        }
        // Var of one influence component is the corresponding diagonal of
        // the inverse information.
        let inv = spd_inverse3(analysis.information()).unwrap();
        for j in 0..3 {
            let mean = sums[j] / n as f64;
            let bound = 3.0 * (inv[j][j] / n as f64).sqrt();
            assert!(mean.abs() < bound, "component {j}: mean {mean}, bound {bound}");
        }
    }

    #[test]
    fn influence_scales_with_sigma() {
        let grid = [-3.0, -1.0, 0.5, 2.0, 3.5];
        let unit = influence_curve_with(gev(0.0, 1.0, 0.1), &grid);
        let double = influence_curve_with(gev(0.0, 2.0, 0.1), &grid);
        for k in 0..grid.len() {
            assert!(
                (double.mu[k] - 2.0 * unit.mu[k]).abs() < 1e-5 * (1.0 + unit.mu[k].abs()),
                "mu at z={}",
                grid[k]
            );
            assert!(
                (double.sigma[k] - 2.0 * unit.sigma[k]).abs()
                    < 1e-5 * (1.0 + unit.sigma[k].abs())
            );
            assert!((double.xi[k] - unit.xi[k]).abs() < 1e-5 * (1.0 + unit.xi[k].abs()));
        }
    }

    fn influence_curve_with(p: GevParams, grid: &[f64]) -> InfluenceCurve {
        InfluenceAnalysis::new(p, quick_opts())
            .unwrap()
            .params_curve(grid)
            .unwrap()
    }

    #[test]
    fn normal_scale_map_round_trips() {
        let p = gev(128.0, 19.0, 0.05);
        let analysis = InfluenceAnalysis::new(p, quick_opts()).unwrap();
        for &z in &[-4.0, -2.2, 0.0, 1.7, 4.0] {
            let y = analysis.observation_at(z).unwrap();
            let back = norm_quantile(p.cdf(y)).unwrap();
            assert!((back - z).abs() < 1e-10, "z={z}: back={back}");
        }
    }

    #[test]
    fn return_level_influence_orders_across_periods() {
        let p = gev(0.0, 1.0, 0.05);
        let analysis = InfluenceAnalysis::new(p, quick_opts()).unwrap();
        let grid = [3.0];
        let i25 = analysis.return_level_curve(25.0, &grid).unwrap()[0];
        let i50 = analysis.return_level_curve(50.0, &grid).unwrap()[0];
        let i100 = analysis.return_level_curve(100.0, &grid).unwrap()[0];
        assert!(
            i25 < i50 && i50 < i100,
            "influence at z=3 should grow with the period: {i25}, {i50}, {i100}"
        );
    }

    #[test]
    fn perturbation_matches_refit_delta() {
        use crate::inference::{fit, BlockMaximaSet, Estimator, FitOptions};

        // One-observation change in a b = 2000 Gumbel sample: the refit
        // delta should match (IF(new) - IF(old)) / b.
        let truth = gev(0.0, 1.0, 0.0);
        let mut rng = stream(31, 0, StreamPurpose::Data);
        let mut maxima: Vec<f64> = (0..2000)
            .map(|_| truth.quantile(open_unit(&mut rng)).unwrap())
            .collect();
        let base = fit(
            &BlockMaximaSet::from_maxima(&maxima, 90).unwrap(),
            Estimator::Full,
            FitOptions::default(),
        )
        .unwrap();
        assert!(base.converged);

        let analysis = InfluenceAnalysis::new(base.params, quick_opts()).unwrap();
        let y_old = maxima[0];
        let y_new = analysis.observation_at(2.0).unwrap();
        maxima[0] = y_new;
        let moved = fit(
            &BlockMaximaSet::from_maxima(&maxima, 90).unwrap(),
            Estimator::Full,
            FitOptions::default(),
        )
        .unwrap();

        let inf_old = analysis.influence_at(y_old);
        let inf_new = analysis.influence_at(y_new);
        for j in 0..3 {
            let predicted = (inf_new[j] - inf_old[j]) / 2000.0;
            let actual = moved.params.as_array()[j] - base.params.as_array()[j];
            assert!(
                (actual - predicted).abs() < 0.2 * predicted.abs().max(1e-5),
                "component {j}: predicted {predicted}, actual {actual}"
            );
        }
    }

    #[test]
    fn default_grid_shape() {
        let grid = default_normal_grid();
        assert_eq!(grid.len(), 201);
        assert_eq!(grid[0], -4.0);
        assert_eq!(grid[200], 4.0);
        assert!((grid[100] - 0.0).abs() < 1e-12);
    }
}
