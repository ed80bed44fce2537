//! The generalised extreme value (GEV) distribution family and its
//! missingness-dependent reparametrisation.
//!
//! A block with `n_obs` of `n_full` observations available gets location and
//! scale parameters derived from raising the full-block distribution
//! function to the power `n_obs / n_full`; [`GevParams::adjusted`] produces
//! that reparametrised triple and satisfies
//! `G(z; adjusted) == G(z; original)^(n_obs/n_full)` for all `z`.

use crate::error::{Error, Result};
use serde::Serialize;

/// Shape values with `|xi|` below this threshold are evaluated on the
/// Gumbel branch; above it, expm1/log1p forms keep the general branch
/// stable, so no discontinuity is visible at 1e-7 tolerance.
pub const XI_ZERO_TOL: f64 = 1e-8;

/// Location, scale and shape of a GEV distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevParams {
    mu: f64,
    sigma: f64,
    xi: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidParams(format!(
                "non-finite parameter: mu={mu}, sigma={sigma}, xi={xi}"
            )));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { mu, sigma, xi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mu, self.sigma, self.xi]
    }

    /// Distribution function G(z).
    ///
    /// Returns exactly 0 below the lower endpoint (`xi > 0`) and exactly 1
    /// above the upper endpoint (`xi < 0`).
    pub fn cdf(&self, z: f64) -> f64 {
        let s = (z - self.mu) / self.sigma;
        if self.xi.abs() < XI_ZERO_TOL {
            (-(-s).exp()).exp()
        } else {
            let w = self.xi * s;
            if 1.0 + w <= 0.0 {
                return if self.xi > 0.0 { 0.0 } else { 1.0 };
            }
            // {1 + xi s}^{-1/xi} = exp(-log1p(xi s)/xi)
            let t = (-w.ln_1p() / self.xi).exp();
            (-t).exp()
        }
    }

    /// Log-density; `-inf` at and beyond the support endpoints.
    pub fn ln_pdf(&self, z: f64) -> f64 {
        let s = (z - self.mu) / self.sigma;
        if self.xi.abs() < XI_ZERO_TOL {
            -self.sigma.ln() - s - (-s).exp()
        } else {
            let w = self.xi * s;
            if 1.0 + w <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let ln_t = -w.ln_1p() / self.xi;
            -self.sigma.ln() + (self.xi + 1.0) * ln_t - ln_t.exp()
        }
    }

    /// Density; 0 outside the support.
    pub fn pdf(&self, z: f64) -> f64 {
        self.ln_pdf(z).exp()
    }

    /// Quantile function G⁻¹(p) for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile requires p in (0,1), got {p}")));
        }
        Ok(self.quantile_from_gumbel_variate(-p.ln()))
    }

    /// Quantile expressed through the Gumbel variate `y = -log p`; used
    /// internally so return periods can be mapped without forming `1 - 1/r`.
    pub(crate) fn quantile_from_gumbel_variate(&self, y: f64) -> f64 {
        self.mu + return_level_slope(self.sigma, self.xi, y)
    }

    /// The `r`-block return level: the (1 - 1/r) quantile, `r > 1`.
    pub fn return_level(&self, r: f64) -> Result<f64> {
        Ok(self.quantile_from_gumbel_variate(gumbel_variate_of_period(r)?))
    }

    /// Parameters of the block-specific distribution for a block with the
    /// given fraction of non-missing observations. The shape is unchanged
    /// and a fully observed block returns the parameters untouched.
    pub fn adjusted(&self, frac: MissingnessFraction) -> GevParams {
        if frac.n_obs == frac.n_full {
            return *self;
        }
        let ln_rho = frac.ratio().ln();
        if self.xi.abs() < XI_ZERO_TOL {
            GevParams {
                mu: self.mu + self.sigma * ln_rho,
                sigma: self.sigma,
                xi: self.xi,
            }
        } else {
            // rho^xi - 1, evaluated as expm1(xi log rho)
            let e = (self.xi * ln_rho).exp_m1();
            GevParams {
                mu: self.mu + self.sigma * e / self.xi,
                sigma: self.sigma * (1.0 + e),
                xi: self.xi,
            }
        }
    }

    /// Support of the density as a closed interval (endpoints may be infinite).
    pub fn support(&self) -> (f64, f64) {
        if self.xi.abs() < XI_ZERO_TOL {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.xi > 0.0 {
            (self.mu - self.sigma / self.xi, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.mu - self.sigma / self.xi)
        }
    }
}

/// `y_r = -log(1 - 1/r)` for a return period `r > 1`.
pub(crate) fn gumbel_variate_of_period(r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("return period must be > 1, got {r}")));
    }
    Ok(-(-1.0 / r).ln_1p())
}

/// `z_r - mu` as a function of (sigma, xi) and the Gumbel variate `y`.
pub(crate) fn return_level_slope(sigma: f64, xi: f64, y: f64) -> f64 {
    if xi.abs() < XI_ZERO_TOL {
        -sigma * y.ln()
    } else {
        sigma * (-xi * y.ln()).exp_m1() / xi
    }
}

/// Gradient of the `r`-block return level in (mu, sigma, xi).
pub fn return_level_gradient(p: &GevParams, r: f64) -> Result<[f64; 3]> {
    let y = gumbel_variate_of_period(r)?;
    let ly = y.ln();
    let xi = p.xi();
    let (d_sigma, d_xi_unit) = if xi.abs() < 1e-5 {
        // Series of ((y^-xi - 1)/xi) and its xi-derivative about xi = 0.
        let g = -ly + xi * ly * ly / 2.0 - xi * xi * ly * ly * ly / 6.0;
        let gp = ly * ly / 2.0 - xi * ly * ly * ly / 3.0 + xi * xi * ly * ly * ly * ly / 8.0;
        (g, gp)
    } else {
        let e = (-xi * ly).exp_m1();
        let g = e / xi;
        let gp = -(ly * (1.0 + e) * xi + e) / (xi * xi);
        (g, gp)
    };
    Ok([1.0, d_sigma, p.sigma() * d_xi_unit])
}

/// Number of non-missing observations in a block relative to the block size
/// under no missingness. Stored as integer counts so a fully observed block
/// is detected exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MissingnessFraction {
    n_obs: u32,
    n_full: u32,
}

impl MissingnessFraction {
    pub fn new(n_obs: u32, n_full: u32) -> Result<Self> {
        if n_obs < 1 || n_obs > n_full {
            return Err(Error::Domain(format!(
                "require 1 <= n_obs <= n_full, got n_obs={n_obs}, n_full={n_full}"
            )));
        }
        Ok(Self { n_obs, n_full })
    }

    pub fn n_obs(&self) -> u32 {
        self.n_obs
    }

    pub fn n_full(&self) -> u32 {
        self.n_full
    }

    /// `n_obs / n_full`, in (0, 1].
    pub fn ratio(&self) -> f64 {
        f64::from(self.n_obs) / f64::from(self.n_full)
    }
}
