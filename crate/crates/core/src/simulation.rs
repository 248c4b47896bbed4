//! Discrete-time index paths, model-consistent futures panels, and
//! self-financing strategy wealth paths.
//!
//! Day `j` marks prices at time `j * dt`. A strategy chooses weights with the
//! information on day `j` and holds them over the `j -> j + 1` mark-to-market
//! interval. Only contracts with a strictly positive time to maturity are
//! tradable; a contract on its maturity day is still quoted (at the spot) so
//! positions opened the day before can be marked one last time.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{futures_price_unchecked, HistoricalParams, LocalVol, MarketConfig, RiskNeutralParams};
use crate::rng::stream_rng;

/// Floor applied to simulated spot values (full truncation).
pub const SPOT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPath {
    pub s0: f64,
    pub values: Vec<f64>,
    pub dt: f64,
    pub seed: u64,
    pub stream: u64,
    /// Number of steps whose Euler proposal fell below [`SPOT_FLOOR`].
    pub clamp_count: usize,
}

impl IndexPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Simple daily returns `S_{j+1}/S_j - 1`.
    pub fn returns(&self) -> Vec<f64> {
        simple_returns(&self.values)
    }
}

pub(crate) fn simple_returns(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
}

/// Simulates `n_days` Euler steps of
/// `S_{j+1} = S_j + mu (theta - S_j) dt + g(j dt, S_j) sqrt(dt) Z_{j+1}`
/// using stream 0 of `seed`.
pub fn simulate_index_path(
    hist: &HistoricalParams,
    g: &LocalVol,
    s0: f64,
    n_days: usize,
    seed: u64,
    dt: f64,
) -> Result<IndexPath> {
    simulate_index_path_stream(hist, g, s0, n_days, seed, 0, dt)
}

/// As [`simulate_index_path`] but drawing from an explicit stream, so that
/// path `k` of a multi-path run is the same whichever thread produces it.
pub fn simulate_index_path_stream(
    hist: &HistoricalParams,
    g: &LocalVol,
    s0: f64,
    n_days: usize,
    seed: u64,
    stream: u64,
    dt: f64,
) -> Result<IndexPath> {
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(Error::Domain(format!("initial spot must be positive, got {s0}")));
    }
    if n_days == 0 {
        return Err(Error::Domain("n_days must be at least 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let mut rng = stream_rng(seed, stream);
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(n_days + 1);
    values.push(s0);
    let mut s = s0;
    let mut clamp_count = 0;
    for j in 0..n_days {
        let z: f64 = StandardNormal.sample(&mut rng);
        let mut next = s + hist.drift(s) * dt + g.eval(j as f64 * dt, s) * sqrt_dt * z;
        if next < SPOT_FLOOR {
            next = SPOT_FLOOR;
            clamp_count += 1;
        }
        values.push(next);
        s = next;
    }
    Ok(IndexPath {
        s0,
        values,
        dt,
        seed,
        stream,
        clamp_count,
    })
}

/// Simulates `n_paths` independent paths; path `k` uses stream `k`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_paths(
    hist: &HistoricalParams,
    g: &LocalVol,
    s0: f64,
    n_days: usize,
    seed: u64,
    n_paths: usize,
    dt: f64,
    exec: Exec,
) -> Result<Vec<IndexPath>> {
    exec.map(n_paths, |k| simulate_index_path_stream(hist, g, s0, n_days, seed, k as u64, dt))
        .into_iter()
        .collect()
}

/// Futures maturities on the trading-day grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractCalendar {
    /// Maturity of each contract in trading days from day 0, strictly increasing.
    pub maturity_days: Vec<usize>,
    /// Trading days per roll cycle.
    pub cycle_length: usize,
    pub dt: f64,
}

impl ContractCalendar {
    pub fn new(maturity_days: Vec<usize>, cycle_length: usize, dt: f64) -> Result<Self> {
        if maturity_days.is_empty() {
            return Err(Error::Empty("contract calendar"));
        }
        if maturity_days.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("maturities must be strictly increasing".into()));
        }
        if cycle_length == 0 {
            return Err(Error::Domain("cycle length must be at least 1".into()));
        }
        Ok(Self {
            maturity_days,
            cycle_length,
            dt,
        })
    }

    /// `n_contracts` monthly contracts maturing at `m * days_per_month`, `m = 1..=n`.
    pub fn monthly(n_contracts: usize, cfg: &MarketConfig) -> Result<Self> {
        let days = (1..=n_contracts).map(|m| m * cfg.days_per_month).collect();
        Self::new(days, cfg.days_per_month, cfg.dt)
    }

    /// Enough monthly contracts for `cycles` full roll cycles while keeping
    /// `ranks` tradable contracts alive on every decision day.
    pub fn for_horizon(cycles: usize, ranks: usize, cfg: &MarketConfig) -> Result<Self> {
        Self::monthly(cycles + ranks, cfg)
    }

    /// Maturities in years.
    pub fn maturities(&self) -> Vec<f64> {
        self.maturity_days.iter().map(|&d| d as f64 * self.dt).collect()
    }

    pub fn len(&self) -> usize {
        self.maturity_days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maturity_days.is_empty()
    }

    pub fn last_day(&self) -> usize {
        *self.maturity_days.last().expect("calendar is non-empty")
    }
}

/// One contract's quote on one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    /// Contract identifier (position in the calendar or ingested contract list).
    pub contract: usize,
    /// 1 for the front tradable contract; 0 for a contract on its maturity day.
    pub rank: usize,
    /// Time to maturity in years.
    pub ttm: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub day: usize,
    pub spot: f64,
    /// Sorted by time to maturity.
    pub quotes: Vec<Quote>,
}

impl CurveRow {
    /// Builds a row, sorting quotes and assigning ranks from times to maturity.
    pub fn new(day: usize, spot: f64, mut quotes: Vec<Quote>) -> Self {
        quotes.sort_by(|a, b| a.ttm.total_cmp(&b.ttm));
        let mut rank = 0;
        for q in &mut quotes {
            if q.ttm > 0.0 {
                rank += 1;
                q.rank = rank;
            } else {
                q.rank = 0;
            }
        }
        Self { day, spot, quotes }
    }

    /// The `rank`-th tradable contract (1-based).
    pub fn tradable(&self, rank: usize) -> Option<&Quote> {
        if rank == 0 {
            return None;
        }
        self.quotes.iter().find(|q| q.rank == rank)
    }

    pub fn quote(&self, contract: usize) -> Option<&Quote> {
        self.quotes.iter().find(|q| q.contract == contract)
    }

    pub fn tradable_count(&self) -> usize {
        self.quotes.iter().filter(|q| q.rank > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuturesPanel {
    pub rows: Vec<CurveRow>,
    pub dt: f64,
}

impl FuturesPanel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn spots(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.spot).collect()
    }

    /// Rows `range` re-indexed from day 0.
    pub fn slice(&self, range: std::ops::Range<usize>) -> FuturesPanel {
        let start = range.start;
        FuturesPanel {
            rows: self.rows[range]
                .iter()
                .map(|r| CurveRow {
                    day: r.day - self.rows[start].day,
                    ..r.clone()
                })
                .collect(),
            dt: self.dt,
        }
    }
}

/// Prices every live contract on every path day with the closed-form
/// futures formula. Contracts past maturity are dropped.
pub fn futures_panel_from_path(
    path: &IndexPath,
    cal: &ContractCalendar,
    rn: &RiskNeutralParams,
) -> Result<FuturesPanel> {
    if cal.is_empty() {
        return Err(Error::Empty("contract calendar"));
    }
    let last = path.values.len().saturating_sub(1);
    if last > cal.last_day() {
        return Err(Error::Domain(format!(
            "path runs to day {last}, past the last maturity day {}",
            cal.last_day()
        )));
    }
    let rows = path
        .values
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let quotes = cal
                .maturity_days
                .iter()
                .enumerate()
                .filter(|(_, &m)| m >= j)
                .map(|(c, &m)| {
                    let ttm = (m - j) as f64 * path.dt;
                    Quote {
                        contract: c,
                        rank: 0,
                        ttm,
                        price: futures_price_unchecked(s, ttm, rn),
                    }
                })
                .collect();
            CurveRow::new(j, s, quotes)
        })
        .collect();
    Ok(FuturesPanel { rows, dt: path.dt })
}

/// One-day wealth update of a fully collateralized futures portfolio:
/// `x e^{r dt} + sum_i (w_i x / f_i) (f'_i - f_i)`.
pub fn evolve_wealth(
    x: f64,
    weights: &[f64],
    today: &[f64],
    tomorrow: &[f64],
    cfg: &MarketConfig,
) -> Result<f64> {
    if today.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            actual: today.len(),
        });
    }
    if tomorrow.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: weights.len(),
            actual: tomorrow.len(),
        });
    }
    let mut next = x * cfg.growth();
    for (i, ((&w, &f0), &f1)) in weights.iter().zip(today).zip(tomorrow).enumerate() {
        if f0 == 0.0 {
            return Err(Error::ZeroPrice { index: i });
        }
        next += w * x / f0 * (f1 - f0);
    }
    Ok(next)
}

/// Linear roll: the front-month weight falls from 1 to 0 over the cycle.
pub fn vxx_roll_weights(day_in_cycle: usize, cycle_length: usize) -> Result<(f64, f64)> {
    if cycle_length == 0 || day_in_cycle > cycle_length {
        return Err(Error::OutsideCycle {
            day: day_in_cycle,
            cycle_length,
        });
    }
    let w1 = 1.0 - day_in_cycle as f64 / cycle_length as f64;
    Ok((w1, 1.0 - w1))
}

/// Information available to a strategy on a decision day.
#[derive(Debug, Clone)]
pub struct Decision<'a> {
    pub day: usize,
    pub spot: f64,
    pub dt: f64,
    /// Quotes of the contracts at the strategy's requested ranks, in order.
    pub quotes: &'a [Quote],
}

/// A per-day weight rule. Weights are fractions of wealth in the contracts
/// at [`Strategy::ranks`]; the remainder is implicitly collateral.
pub trait Strategy {
    /// Tradable ranks (1-based) the weight vector refers to.
    fn ranks(&self) -> &[usize];

    fn weights(&mut self, decision: &Decision<'_>) -> Result<Vec<f64>>;
}

/// Linear-roll ETN replica over the two front contracts.
#[derive(Debug, Clone, Default)]
pub struct VxxRoll;

impl VxxRoll {
    /// Position in the current cycle, from the two front times to maturity
    /// expressed in trading days.
    pub fn cycle_position(front_ttm: f64, second_ttm: f64, dt: f64) -> Result<(usize, usize)> {
        let front = (front_ttm / dt).round() as usize;
        let second = (second_ttm / dt).round() as usize;
        if second <= front {
            return Err(Error::InvalidState(format!(
                "second contract ({second} days) does not mature after the front ({front} days)"
            )));
        }
        let cycle = second - front;
        Ok((cycle.saturating_sub(front), cycle))
    }
}

impl Strategy for VxxRoll {
    fn ranks(&self) -> &[usize] {
        &[1, 2]
    }

    fn weights(&mut self, d: &Decision<'_>) -> Result<Vec<f64>> {
        let (day, cycle) = Self::cycle_position(d.quotes[0].ttm, d.quotes[1].ttm, d.dt)?;
        let (w1, w2) = vxx_roll_weights(day, cycle)?;
        Ok(vec![w1, w2])
    }
}

/// Strategy from a closure.
pub struct FnStrategy<F> {
    ranks: Vec<usize>,
    f: F,
}

impl<F> FnStrategy<F>
where
    F: FnMut(&Decision<'_>) -> Result<Vec<f64>>,
{
    pub fn new(ranks: Vec<usize>, f: F) -> Self {
        Self { ranks, f }
    }
}

impl<F> Strategy for FnStrategy<F>
where
    F: FnMut(&Decision<'_>) -> Result<Vec<f64>>,
{
    fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    fn weights(&mut self, decision: &Decision<'_>) -> Result<Vec<f64>> {
        (self.f)(decision)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioPath {
    pub wealth: Vec<f64>,
    /// Weights chosen on day `j`, held over `j -> j + 1`.
    pub weights: Vec<Vec<f64>>,
    /// Contract identifiers the weights refer to, per day.
    pub holdings: Vec<Vec<usize>>,
}

impl PortfolioPath {
    pub fn returns(&self) -> Vec<f64> {
        simple_returns(&self.wealth)
    }

    /// Largest absolute weight over the run.
    pub fn max_abs_weight(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .fold(0.0f64, |m, w| m.max(w.abs()))
    }
}

/// Runs `strategy` over the panel from initial wealth `x0`.
///
/// On each day the strategy's ranks resolve to concrete contracts; wealth is
/// marked with those same contracts on the next day, so a front contract
/// that matures is marked at its final (spot) price and the next decision
/// rolls into the new front.
pub fn run_strategy<S: Strategy + ?Sized>(
    panel: &FuturesPanel,
    strategy: &mut S,
    x0: f64,
    cfg: &MarketConfig,
) -> Result<PortfolioPath> {
    if panel.len() < 2 {
        return Err(Error::Domain("panel must span at least 2 days".into()));
    }
    let n = panel.len();
    let ranks = strategy.ranks().to_vec();
    let mut wealth = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n - 1);
    let mut holdings = Vec::with_capacity(n - 1);
    wealth.push(x0);
    let mut quotes = Vec::with_capacity(ranks.len());
    let mut today = Vec::with_capacity(ranks.len());
    let mut tomorrow = Vec::with_capacity(ranks.len());
    for j in 0..n - 1 {
        let row = &panel.rows[j];
        let next = &panel.rows[j + 1];
        quotes.clear();
        for &rank in &ranks {
            let q = row.tradable(rank).ok_or_else(|| Error::DataGap {
                day: row.day,
                detail: format!("no tradable contract at rank {rank}"),
            })?;
            quotes.push(*q);
        }
        let w = strategy.weights(&Decision {
            day: row.day,
            spot: row.spot,
            dt: panel.dt,
            quotes: &quotes,
        })?;
        if w.len() != ranks.len() {
            return Err(Error::LengthMismatch {
                expected: ranks.len(),
                actual: w.len(),
            });
        }
        today.clear();
        tomorrow.clear();
        for q in &quotes {
            today.push(q.price);
            let q1 = next.quote(q.contract).ok_or_else(|| Error::DataGap {
                day: next.day,
                detail: format!("missing price for held contract {}", q.contract),
            })?;
            tomorrow.push(q1.price);
        }
        let x = evolve_wealth(wealth[j], &w, &today, &tomorrow, cfg)?;
        wealth.push(x);
        weights.push(w);
        holdings.push(quotes.iter().map(|q| q.contract).collect());
    }
    Ok(PortfolioPath {
        wealth,
        weights,
        holdings,
    })
}

/// Recomputes the wealth series from the recorded weights and holdings.
/// For a self-financing run this reproduces `path.wealth` exactly.
pub fn replay_wealth(panel: &FuturesPanel, path: &PortfolioPath, cfg: &MarketConfig) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(path.wealth.len());
    let Some(&x0) = path.wealth.first() else {
        return Err(Error::Empty("portfolio path"));
    };
    out.push(x0);
    for (j, (w, held)) in path.weights.iter().zip(&path.holdings).enumerate() {
        let price = |row: &CurveRow, c: usize| {
            row.quote(c).map(|q| q.price).ok_or_else(|| Error::DataGap {
                day: row.day,
                detail: format!("missing price for contract {c}"),
            })
        };
        let today = held
            .iter()
            .map(|&c| price(&panel.rows[j], c))
            .collect::<Result<Vec<_>>>()?;
        let tomorrow = held
            .iter()
            .map(|&c| price(&panel.rows[j + 1], c))
            .collect::<Result<Vec<_>>>()?;
        out.push(evolve_wealth(out[j], w, &today, &tomorrow, cfg)?);
    }
    Ok(out)
}
