//! Closed-form one-step optimal tracking with two futures contracts.
//!
//! With weight `w` on contract `i1` and `1 - w` on `i2`, the next-day return
//! error against `beta` times the index return is `phi0 + phi1 Z` with `Z`
//! standard normal. Both moments are affine in `w`:
//!
//! ```text
//! phi0 = alpha0 + alpha1 w      phi1 = nu0 + nu1 w
//! E[err^2] = (alpha0 + alpha1 w)^2 + (nu0 + nu1 w)^2
//! ```
//!
//! so the minimizer and the minimum are available in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{b_coefficient, HistoricalParams, LocalVol, MarketConfig, RiskNeutralParams};
use crate::simulation::{ContractCalendar, Decision, Strategy};

/// Pairs whose scaled `nu1` falls below this are rejected as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingConfig {
    /// Target multiple of the index return.
    pub beta: f64,
    /// Tradable rank (1-based) of the contract carrying weight `w`.
    pub i1: usize,
    /// Tradable rank of the companion contract carrying `1 - w`.
    pub i2: usize,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            i1: 1,
            i2: 2,
        }
    }
}

impl TrackingConfig {
    pub fn new(beta: f64, i1: usize, i2: usize) -> Result<Self> {
        if i1 == i2 {
            return Err(Error::DegeneratePair(format!("both contracts have rank {i1}")));
        }
        if i1 == 0 || i2 == 0 {
            return Err(Error::Domain("contract ranks are 1-based".into()));
        }
        if !beta.is_finite() {
            return Err(Error::Domain("beta must be finite".into()));
        }
        Ok(Self { beta, i1, i2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingCoefficients {
    pub alpha0: f64,
    pub alpha1: f64,
    pub nu0: f64,
    pub nu1: f64,
}

impl TrackingCoefficients {
    pub fn new(alpha0: f64, alpha1: f64, nu0: f64, nu1: f64) -> Self {
        Self {
            alpha0,
            alpha1,
            nu0,
            nu1,
        }
    }
}

/// Model state on a decision day for one contract pair.
#[derive(Debug, Clone, Copy)]
pub struct PairState {
    pub spot: f64,
    /// Time in years of the decision day, passed to the local volatility.
    pub t: f64,
    pub ttm1: f64,
    pub ttm2: f64,
}

/// Coefficients of the return-error moments from the raw model state.
pub fn coefficients_for_state(
    state: &PairState,
    beta: f64,
    hist: &HistoricalParams,
    rn: &RiskNeutralParams,
    g: &LocalVol,
    mkt: &MarketConfig,
) -> Result<TrackingCoefficients> {
    let PairState { spot, t, ttm1, ttm2 } = *state;
    if !(spot > 0.0) {
        return Err(Error::Domain(format!("spot must be positive, got {spot}")));
    }
    if !(ttm1 > 0.0 && ttm2 > 0.0) {
        return Err(Error::Domain(format!(
            "both contracts must be unexpired (ttm {ttm1}, {ttm2})"
        )));
    }
    if ttm1 == ttm2 {
        return Err(Error::DegeneratePair(format!("equal times to maturity {ttm1}")));
    }
    let dt = mkt.dt;
    let vol = g.eval(t, spot);
    // lambda * B_i = (drift spread / g) * (g / denom_i); formed without the
    // division by g so that a vanishing volatility leaves a drift-only limit
    let spread = hist.drift(spot) - rn.drift(spot);
    let inv1 = b_coefficient(spot, ttm1, rn, 1.0)?;
    let inv2 = b_coefficient(spot, ttm2, rn, 1.0)?;
    let (b1, b2) = (vol * inv1, vol * inv2);
    let (lb1, lb2) = (spread * inv1, spread * inv2);
    let sqrt_dt = dt.sqrt();
    Ok(TrackingCoefficients {
        alpha0: (mkt.r * dt).exp_m1() + dt * lb2 - beta * hist.mu * dt * (hist.theta / spot - 1.0),
        alpha1: dt * (lb1 - lb2),
        nu0: sqrt_dt * (b2 - beta * vol / spot),
        nu1: sqrt_dt * (b1 - b2),
    })
}

/// Coefficients on calendar day `day` for the pair of tradable ranks in `cfg`,
/// with contracts laid out on `cal`.
#[allow(clippy::too_many_arguments)]
pub fn tracking_coefficients(
    day: usize,
    spot: f64,
    cfg: &TrackingConfig,
    cal: &ContractCalendar,
    hist: &HistoricalParams,
    rn: &RiskNeutralParams,
    g: &LocalVol,
    mkt: &MarketConfig,
) -> Result<TrackingCoefficients> {
    let alive: Vec<usize> = cal.maturity_days.iter().copied().filter(|&m| m > day).collect();
    let ttm = |rank: usize| {
        alive
            .get(rank.wrapping_sub(1))
            .map(|&m| (m - day) as f64 * mkt.dt)
            .ok_or_else(|| Error::DataGap {
                day,
                detail: format!("no unexpired contract at rank {rank}"),
            })
    };
    let state = PairState {
        spot,
        t: day as f64 * mkt.dt,
        ttm1: ttm(cfg.i1)?,
        ttm2: ttm(cfg.i2)?,
    };
    coefficients_for_state(&state, cfg.beta, hist, rn, g, mkt)
}

/// `(alpha0 + alpha1 w)^2 + (nu0 + nu1 w)^2`.
#[inline]
pub fn expected_sq_error(w: f64, c: &TrackingCoefficients) -> f64 {
    let a = c.alpha0 + c.alpha1 * w;
    let n = c.nu0 + c.nu1 * w;
    a * a + n * n
}

/// Minimizing weight on the first contract and the minimal expected squared
/// return error.
pub fn optimal_weight(c: &TrackingCoefficients) -> Result<(f64, f64)> {
    let denom = c.alpha1 * c.alpha1 + c.nu1 * c.nu1;
    if !(denom > 0.0) {
        return Err(Error::DegeneratePair("alpha1 and nu1 both vanish".into()));
    }
    let w = -(c.alpha0 * c.alpha1 + c.nu0 * c.nu1) / denom;
    let cross = c.nu1 * c.alpha0 - c.nu0 * c.alpha1;
    Ok((w, cross * cross / denom))
}

/// Daily-rebalanced optimal tracker, usable with
/// [`run_strategy`](crate::simulation::run_strategy).
#[derive(Debug, Clone)]
pub struct DynamicTracker {
    pub cfg: TrackingConfig,
    pub hist: HistoricalParams,
    pub rn: RiskNeutralParams,
    pub vol: LocalVol,
    pub mkt: MarketConfig,
    ranks: [usize; 2],
    /// Objective value at the chosen weight, per decision day.
    pub objectives: Vec<f64>,
}

impl DynamicTracker {
    pub fn new(
        cfg: TrackingConfig,
        hist: HistoricalParams,
        rn: RiskNeutralParams,
        vol: LocalVol,
        mkt: MarketConfig,
    ) -> Self {
        Self {
            ranks: [cfg.i1, cfg.i2],
            cfg,
            hist,
            rn,
            vol,
            mkt,
            objectives: Vec::new(),
        }
    }
}

impl Strategy for DynamicTracker {
    fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    fn weights(&mut self, d: &Decision<'_>) -> Result<Vec<f64>> {
        let state = PairState {
            spot: d.spot,
            t: d.day as f64 * d.dt,
            ttm1: d.quotes[0].ttm,
            ttm2: d.quotes[1].ttm,
        };
        let c = coefficients_for_state(&state, self.cfg.beta, &self.hist, &self.rn, &self.vol, &self.mkt)?;
        // with no diffusion the weight acts through alpha1 alone
        let (lever, base) = if c.nu0 == 0.0 && c.nu1 == 0.0 { (c.alpha1, c.alpha0) } else { (c.nu1, c.nu0) };
        let scale = base.abs().max(lever.abs()).max(f64::MIN_POSITIVE);
        if lever.abs() / scale < DEGENERACY_TOL {
            return Err(Error::DegeneratePair(format!(
                "near-equal B-coefficients on day {} (nu1 = {:e}, alpha1 = {:e})",
                d.day, c.nu1, c.alpha1
            )));
        }
        let (w, obj) = optimal_weight(&c)?;
        self.objectives.push(obj);
        Ok(vec![w, 1.0 - w])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::critical_spot;

    fn calibrated() -> (HistoricalParams, RiskNeutralParams, LocalVol) {
        let h = HistoricalParams::new(10.86, 18.81, 6.37).unwrap();
        (h, RiskNeutralParams::new(1.39, 26.03).unwrap(), h.cir_vol())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn calibrated_day_zero_coefficients() {
        let (h, rn, g) = calibrated();
        let mkt = MarketConfig::new(0.01, 1.0 / 252.0, 21).unwrap();
        let cal = ContractCalendar::monthly(3, &mkt).unwrap();
        let c = tracking_coefficients(0, 18.81, &TrackingConfig::default(), &cal, &h, &rn, &g, &mkt).unwrap();
        // mpmath, 50 digits
        assert!(rel(c.alpha0, -0.0015162079748142536196) < 1e-11);
        assert!(rel(c.alpha1, -0.00025376590340995877833) < 1e-11);
        assert!(rel(c.nu0, -0.024529393063679174755) < 1e-12);
        assert!(rel(c.nu1, 0.011089586977646441495) < 1e-12);
        let (w, obj) = optimal_weight(&c).unwrap();
        assert!(rel(w, 2.2076455645492047569) < 1e-11);
        assert!(rel(obj, 4.3138323378608162073e-6) < 1e-9);
    }

    #[test]
    fn zero_risk_premium_kills_alpha1() {
        let h = HistoricalParams::new(1.39, 26.03, 6.37).unwrap();
        let rn = RiskNeutralParams::new(1.39, 26.03).unwrap();
        let mkt = MarketConfig::default();
        let cal = ContractCalendar::monthly(3, &mkt).unwrap();
        let c = tracking_coefficients(5, 20.0, &TrackingConfig::default(), &cal, &h, &rn, &h.cir_vol(), &mkt).unwrap();
        assert_eq!(c.alpha1, 0.0);
        assert!(c.nu1 > 0.0);
    }

    #[test]
    fn reversed_pair_flips_nu1() {
        let (h, rn, g) = calibrated();
        let mkt = MarketConfig::default();
        let cal = ContractCalendar::monthly(3, &mkt).unwrap();
        let cfg = TrackingConfig::new(1.0, 2, 1).unwrap();
        let c = tracking_coefficients(3, 18.0, &cfg, &cal, &h, &rn, &g, &mkt).unwrap();
        assert!(c.nu1 < 0.0);
    }

    #[test]
    fn degenerate_pairs() {
        assert!(matches!(TrackingConfig::new(1.0, 2, 2), Err(Error::DegeneratePair(_))));
        let (h, rn, g) = calibrated();
        let st = PairState {
            spot: 20.0,
            t: 0.0,
            ttm1: 0.1,
            ttm2: 0.1,
        };
        assert!(matches!(
            coefficients_for_state(&st, 1.0, &h, &rn, &g, &MarketConfig::default()),
            Err(Error::DegeneratePair(_))
        ));
        assert!(matches!(
            optimal_weight(&TrackingCoefficients::new(1.0, 0.0, 1.0, 0.0)),
            Err(Error::DegeneratePair(_))
        ));
    }

    #[test]
    fn objective_arithmetic() {
        let c = TrackingCoefficients::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(expected_sq_error(-3.7, &c), 2.0);
        let c = TrackingCoefficients::new(0.0, 1.0, 0.0, 1.0);
        assert_eq!(expected_sq_error(0.0, &c), 0.0);
        assert_eq!(expected_sq_error(1.0, &c), 2.0);
        assert_eq!(expected_sq_error(-1.0, &c), 2.0);
        assert_eq!(optimal_weight(&c).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn closed_form_matches_direct_evaluation() {
        let c = TrackingCoefficients::new(0.3, -1.2, 0.7, 2.5);
        let (w, obj) = optimal_weight(&c).unwrap();
        assert!((expected_sq_error(w, &c) - obj).abs() < 1e-14);
        for dw in [-1e-3, 1e-3] {
            assert!(expected_sq_error(w + dw, &c) > obj);
        }
    }

    #[test]
    fn zero_error_at_critical_spot() {
        let (h, rn, g) = calibrated();
        let mkt = MarketConfig::new(0.03, 1.0 / 252.0, 21).unwrap();
        let cal = ContractCalendar::monthly(4, &mkt).unwrap();
        let s = critical_spot(1.0, &mkt, &rn).unwrap();
        let c = tracking_coefficients(7, s, &TrackingConfig::default(), &cal, &h, &rn, &g, &mkt).unwrap();
        let (_, obj) = optimal_weight(&c).unwrap();
        assert!(obj <= 1e-18, "{obj}");
    }
}
