//! Mean-reverting index model: parameter sets, local volatility, futures
//! pricing, and the per-contract sensitivities used by the tracking
//! strategies.
//!
//! Under the historical measure the index follows
//! `dS = mu (theta - S) dt + g(t, S) dZ`; under the pricing measure the drift
//! becomes `mu~ (theta~ - S)` with the same `g`. Futures are the pricing-measure
//! conditional expectation of the index at maturity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Historical (real-world) mean-reversion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoricalParams {
    /// Mean-reversion speed, 1/year.
    pub mu: f64,
    /// Long-run level, index points.
    pub theta: f64,
    /// Volatility coefficient of the local volatility function.
    pub sigma: f64,
}

impl HistoricalParams {
    pub fn new(mu: f64, theta: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, theta, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("theta", self.theta), ("sigma", self.sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Square-root (CIR) local volatility with this parameter set's sigma.
    pub fn cir_vol(&self) -> LocalVol {
        LocalVol::square_root(self.sigma)
    }

    /// Historical drift `mu (theta - S)`.
    pub fn drift(&self, spot: f64) -> f64 {
        self.mu * (self.theta - spot)
    }
}

/// Pricing-measure mean-reversion parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralParams {
    pub mu_tilde: f64,
    pub theta_tilde: f64,
}

impl RiskNeutralParams {
    pub fn new(mu_tilde: f64, theta_tilde: f64) -> Result<Self> {
        let p = Self {
            mu_tilde,
            theta_tilde,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu_tilde", self.mu_tilde), ("theta_tilde", self.theta_tilde)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn drift(&self, spot: f64) -> f64 {
        self.mu_tilde * (self.theta_tilde - spot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolKind {
    /// `g = sigma` (Ornstein-Uhlenbeck).
    Constant,
    /// `g = sigma * sqrt(S)` (Cox-Ingersoll-Ross).
    SquareRoot,
}

/// Local volatility function `g(t, S)`. Both supported kinds are
/// time-homogeneous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalVol {
    pub kind: VolKind,
    pub sigma: f64,
}

impl LocalVol {
    pub fn constant(sigma: f64) -> Self {
        Self {
            kind: VolKind::Constant,
            sigma,
        }
    }

    pub fn square_root(sigma: f64) -> Self {
        Self {
            kind: VolKind::SquareRoot,
            sigma,
        }
    }

    /// Evaluates `g(t, S)`. Negative spots evaluate as zero under the
    /// square-root kind.
    #[inline]
    pub fn eval(&self, _t: f64, spot: f64) -> f64 {
        match self.kind {
            VolKind::Constant => self.sigma,
            VolKind::SquareRoot => self.sigma * spot.max(0.0).sqrt(),
        }
    }
}

/// Rate and calendar conventions shared by the simulators and strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    /// Continuously compounded annual risk-free rate.
    pub r: f64,
    /// Time step in years.
    pub dt: f64,
    /// Trading days per contract month.
    pub days_per_month: usize,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            r: 0.0,
            dt: 1.0 / 252.0,
            days_per_month: 21,
        }
    }
}

impl MarketConfig {
    pub fn new(r: f64, dt: f64, days_per_month: usize) -> Result<Self> {
        let c = Self {
            r,
            dt,
            days_per_month,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        if self.days_per_month == 0 {
            return Err(Error::Domain("days_per_month must be at least 1".into()));
        }
        if !self.r.is_finite() {
            return Err(Error::Domain("r must be finite".into()));
        }
        Ok(())
    }

    /// One-day money-market growth factor `e^{r dt}`.
    #[inline]
    pub fn growth(&self) -> f64 {
        (self.r * self.dt).exp()
    }

    /// Per-period simple rate annualized by `dt`: `(e^{r dt} - 1) / dt`.
    #[inline]
    pub fn r_bar(&self) -> f64 {
        (self.r * self.dt).exp_m1() / self.dt
    }
}

/// Futures price `(S - theta~) e^{-mu~ ttm} + theta~`.
pub fn futures_price(spot: f64, ttm: f64, rn: &RiskNeutralParams) -> Result<f64> {
    if !(ttm >= 0.0) {
        return Err(Error::Domain(format!("time to maturity must be non-negative, got {ttm}")));
    }
    if !(spot >= 0.0) {
        return Err(Error::Domain(format!("spot must be non-negative, got {spot}")));
    }
    Ok(futures_price_unchecked(spot, ttm, rn))
}

#[inline]
pub(crate) fn futures_price_unchecked(spot: f64, ttm: f64, rn: &RiskNeutralParams) -> f64 {
    (spot - rn.theta_tilde) * (-rn.mu_tilde * ttm).exp() + rn.theta_tilde
}

/// Market price of risk `[mu(theta - S) - mu~(theta~ - S)] / g(t, S)`.
pub fn market_price_of_risk(
    spot: f64,
    hist: &HistoricalParams,
    rn: &RiskNeutralParams,
    g: &LocalVol,
    t: f64,
) -> Result<f64> {
    let vol = g.eval(t, spot);
    if !(vol > 0.0) {
        return Err(Error::Singularity { spot });
    }
    Ok((hist.drift(spot) - rn.drift(spot)) / vol)
}

/// Return sensitivity of a futures contract to the index shock,
/// `g / (theta~ e^{mu~ ttm} + S - theta~)`.
pub fn b_coefficient(spot: f64, ttm: f64, rn: &RiskNeutralParams, g_val: f64) -> Result<f64> {
    let denom = rn.theta_tilde * (rn.mu_tilde * ttm).exp() + spot - rn.theta_tilde;
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::InvalidState(format!(
            "nonpositive B-coefficient denominator {denom} (spot {spot}, ttm {ttm})"
        )));
    }
    Ok(g_val / denom)
}

/// Index level at which the two-contract tracker attains zero expected
/// squared return error: `beta mu~ theta~ / (beta mu~ + r_bar)`.
///
/// Depends on neither the trading day nor the contract maturities.
pub fn critical_spot(beta: f64, cfg: &MarketConfig, rn: &RiskNeutralParams) -> Result<f64> {
    let denom = beta * rn.mu_tilde + cfg.r_bar();
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateParameters(format!(
            "beta * mu_tilde + r_bar = {denom}"
        )));
    }
    Ok(beta * rn.mu_tilde * rn.theta_tilde / denom)
}
