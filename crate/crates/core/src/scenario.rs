//! Simulated comparison of the dynamic tracker and the linear-roll ETN
//! replica against the index over whole roll cycles.

use serde::{Deserialize, Serialize};

use crate::analytics::{scatter_report, ScatterReport};
use crate::dynamic::{DynamicTracker, TrackingConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{HistoricalParams, LocalVol, MarketConfig, RiskNeutralParams};
use crate::simulation::{
    futures_panel_from_path, run_strategy, simulate_index_path_stream, ContractCalendar, FuturesPanel, IndexPath,
    PortfolioPath, VxxRoll,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudySettings {
    pub hist: HistoricalParams,
    pub rn: RiskNeutralParams,
    /// Local volatility of the simulated index, usually `hist.cir_vol()`.
    pub vol: LocalVol,
    pub mkt: MarketConfig,
    pub tracking: TrackingConfig,
}

impl StudySettings {
    pub fn cir(hist: HistoricalParams, rn: RiskNeutralParams, mkt: MarketConfig, tracking: TrackingConfig) -> Self {
        Self {
            hist,
            rn,
            vol: hist.cir_vol(),
            mkt,
            tracking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRun {
    pub path: IndexPath,
    pub panel: FuturesPanel,
    pub dynamic: PortfolioPath,
    pub vxx: PortfolioPath,
    /// Dynamic-portfolio daily returns regressed on index returns.
    pub dynamic_fit: ScatterReport,
    pub vxx_fit: ScatterReport,
    /// Expected squared return error at the chosen weight, per day.
    pub objectives: Vec<f64>,
}

/// Simulates `cycles` roll cycles from `s0` (stream `stream` of `seed`),
/// prices the curve, and runs both strategies from initial wealth `s0`.
pub fn run_scenario(settings: &StudySettings, s0: f64, cycles: usize, seed: u64, stream: u64) -> Result<ScenarioRun> {
    if cycles == 0 {
        return Err(Error::Domain("need at least one roll cycle".into()));
    }
    let StudySettings {
        hist,
        rn,
        vol: g,
        mkt,
        tracking,
    } = *settings;
    let n_days = cycles * mkt.days_per_month;
    let ranks = tracking.i1.max(tracking.i2).max(2);
    let cal = ContractCalendar::for_horizon(cycles, ranks, &mkt)?;
    let path = simulate_index_path_stream(&hist, &g, s0, n_days, seed, stream, mkt.dt)?;
    let panel = futures_panel_from_path(&path, &cal, &rn)?;
    let mut tracker = DynamicTracker::new(tracking, hist, rn, g, mkt);
    let dynamic = run_strategy(&panel, &mut tracker, s0, &mkt)?;
    let vxx = run_strategy(&panel, &mut VxxRoll, s0, &mkt)?;
    let index_returns = path.returns();
    Ok(ScenarioRun {
        dynamic_fit: scatter_report(&dynamic.returns(), &index_returns)?,
        vxx_fit: scatter_report(&vxx.returns(), &index_returns)?,
        objectives: tracker.objectives,
        path,
        panel,
        dynamic,
        vxx,
    })
}

/// Runs one scenario per seed; seed `k` uses stream `k` of `seed`.
pub fn run_many(
    settings: &StudySettings,
    s0: f64,
    cycles: usize,
    seed: u64,
    n: usize,
    exec: Exec,
) -> Result<Vec<ScenarioRun>> {
    exec.map(n, |k| run_scenario(settings, s0, cycles, seed, k as u64))
        .into_iter()
        .collect()
}
