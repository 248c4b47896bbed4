//! Return regressions: OLS with classical standard errors, holding-period
//! studies over rolled futures, and the slope-equals-one test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::simulation::{simple_returns, FuturesPanel};
use crate::static_opt::build_rolled_series;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r2: f64,
    /// `sqrt(RSS / n)`
    pub rmse: f64,
    pub n: usize,
}

impl RegressionResult {
    /// Two-sided p-value of `H0: slope = value` under Student's t with
    /// `n - 2` degrees of freedom.
    pub fn slope_test(&self, value: f64) -> (f64, f64) {
        let diff = self.slope - value;
        if self.slope_se == 0.0 {
            return if diff == 0.0 { (0.0, 1.0) } else { (f64::INFINITY.copysign(diff), 0.0) };
        }
        let t = diff / self.slope_se;
        let dist = StudentsT::new(0.0, 1.0, (self.n - 2) as f64).expect("n >= 3");
        (t, (2.0 * dist.sf(t.abs())).min(1.0))
    }
}

/// `S_{t+h}/S_t - 1` over consecutive disjoint windows starting at day 0.
pub fn holding_period_returns(series: &[f64], h: usize) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::Domain("holding period must be positive".into()));
    }
    if series.len() <= h {
        return Err(Error::LengthMismatch {
            expected: h + 1,
            actual: series.len(),
        });
    }
    series
        .iter()
        .step_by(h)
        .zip(series.iter().skip(h).step_by(h))
        .enumerate()
        .map(|(i, (&a, &b))| {
            if a == 0.0 {
                Err(Error::ZeroPrice { index: i * h })
            } else {
                Ok(b / a - 1.0)
            }
        })
        .collect()
}

/// Least squares of `y` on `x` with an intercept.
pub fn ols_regression(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Domain(format!("regression needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::Domain("regressor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let s2 = rss / (nf - 2.0);
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RegressionResult {
        slope,
        intercept,
        slope_se: (s2 / sxx).sqrt(),
        intercept_se: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        r2,
        rmse: (rss / nf).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterReport {
    pub regression: RegressionResult,
    /// t statistic of `slope = 1`.
    pub t_stat: f64,
    pub p_value: f64,
}

/// Regresses portfolio returns on index returns and tests `slope = 1`.
pub fn scatter_report(portfolio_returns: &[f64], index_returns: &[f64]) -> Result<ScatterReport> {
    let regression = ols_regression(index_returns, portfolio_returns)?;
    let (t_stat, p_value) = regression.slope_test(1.0);
    Ok(ScatterReport {
        regression,
        t_stat,
        p_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCell {
    pub horizon: usize,
    pub rank: usize,
    pub regression: RegressionResult,
}

/// Regresses `h`-day returns of the rank-`k` rolled futures position on
/// `h`-day index returns for every requested pair.
pub fn slope_table(panel: &FuturesPanel, horizons: &[usize], ranks: &[usize]) -> Result<Vec<SlopeCell>> {
    let spot = panel.spots();
    let rolled = ranks
        .iter()
        .map(|&k| build_rolled_series(panel, k, 100.0).map(|s| s.values))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(horizons.len() * ranks.len());
    for &h in horizons {
        let x = holding_period_returns(&spot, h)?;
        for (&k, series) in ranks.iter().zip(&rolled) {
            let y = holding_period_returns(series, h)?;
            out.push(SlopeCell {
                horizon: h,
                rank: k,
                regression: ols_regression(&x, &y)?,
            });
        }
    }
    Ok(out)
}

/// Intercepts of the rank-`rank` slope regression for each horizon.
pub fn intercept_curve(panel: &FuturesPanel, rank: usize, horizons: &[usize]) -> Result<Vec<(usize, f64)>> {
    Ok(slope_table(panel, horizons, &[rank])?
        .into_iter()
        .map(|c| (c.horizon, c.regression.intercept))
        .collect())
}

/// One-day returns of a series, for callers that only have levels.
pub fn daily_returns(series: &[f64]) -> Vec<f64> {
    simple_returns(series)
}
