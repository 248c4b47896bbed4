//! Delimited-text ingestion and persistence of spot/futures/rate panels.
//!
//! Every quote file has the header `date,code,field,value`:
//!
//! | file           | field   | value                          |
//! |----------------|---------|--------------------------------|
//! | `spot.csv`     | `close` | index level                    |
//! | `futures.csv`  | `close` | futures price, one code per contract |
//! | `rates.csv`    | `rate`  | overnight rate in percent      |
//! | `etn.csv`      | `close` | optional ETN price             |
//!
//! Rows with any other field (e.g. `settle`) are ignored. `expiries.csv` has
//! the header `code,expiry`. Dates are ISO `YYYY-MM-DD`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{futures_price_unchecked, HistoricalParams, RiskNeutralParams};
use crate::simulation::{simulate_index_path, CurveRow, FuturesPanel, Quote};

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
/// Tradable ranks kept on load; longer-dated contracts are discarded.
pub const MAX_RANK: usize = 7;
/// Share of incomplete days above which loading fails.
pub const MAX_DROP_FRACTION: f64 = 0.05;

pub const SPOT_FILE: &str = "spot.csv";
pub const FUTURES_FILE: &str = "futures.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const ETN_FILE: &str = "etn.csv";
pub const EXPIRIES_FILE: &str = "expiries.csv";

const DATE_FMT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawQuote {
    pub date: String,
    pub code: String,
    pub field: String,
    pub value: f64,
}

/// Inclusive date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::Domain(format!("empty window {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

impl FromStr for DateWindow {
    type Err = Error;

    /// `YYYY-MM-DD..YYYY-MM-DD`
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| Error::Domain(format!("window must look like START..END, got {s:?}")))?;
        Self::new(parse_date(a.trim())?, parse_date(b.trim())?)
    }
}

impl fmt::Display for DateWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start.format(DATE_FMT), self.end.format(DATE_FMT))
    }
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, DATE_FMT).map_err(|e| Error::Domain(format!("bad date {s:?}: {e}")))
}

fn is_weekday(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Weekdays in `(from, to]`; zero when `to <= from`. No holiday calendar.
pub fn trading_days_between(from: NaiveDate, to: NaiveDate) -> usize {
    if to <= from {
        return 0;
    }
    let days = (to - from).num_days();
    let weeks = days / 7;
    let mut count = weeks * 5;
    let mut d = from + chrono::Duration::days(weeks * 7);
    while d < to {
        d = d.succ_opt().expect("date in range");
        if is_weekday(d) {
            count += 1;
        }
    }
    count as usize
}

/// Contract codes sorted by expiry. Quote contract ids index into this list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarSpec {
    pub codes: Vec<String>,
    pub expiries: Vec<NaiveDate>,
}

impl CalendarSpec {
    pub fn new(mut entries: Vec<(String, NaiveDate)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("expiry calendar"));
        }
        entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Domain(format!("contract {} listed twice", w[0].0)));
            }
            if w[0].1 == w[1].1 {
                return Err(Error::Domain(format!("contracts {} and {} share an expiry", w[0].0, w[1].0)));
            }
        }
        let (codes, expiries) = entries.into_iter().unzip();
        Ok(Self { codes, expiries })
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }

    /// Number of contracts not yet expired on `date`.
    pub fn available(&self, date: NaiveDate) -> usize {
        self.expiries.iter().filter(|&&e| e > date).count()
    }

    /// Contract ids live on `date` with their rank: 0 for a contract expiring
    /// that day, then 1, 2, ... by expiry. Ranks past `max_rank` are omitted.
    pub fn ranked(&self, date: NaiveDate, max_rank: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut rank = 0;
        for (c, &e) in self.expiries.iter().enumerate() {
            if e < date {
                continue;
            }
            if e == date {
                out.push((c, 0));
                continue;
            }
            rank += 1;
            if rank > max_rank {
                break;
            }
            out.push((c, rank));
        }
        out
    }
}

/// Date-aligned spot, front futures, overnight rate and (optionally) ETN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    pub dates: Vec<NaiveDate>,
    /// Quote ids refer to `calendar.codes`; ttm is trading days to expiry / 252.
    pub curve: FuturesPanel,
    /// Overnight rate in percent, as loaded.
    pub rates: Vec<f64>,
    /// Money-market account compounded ACT/360 from `rates`, starting at 1.
    pub money_market: Vec<f64>,
    pub etn: Option<Vec<f64>>,
    pub calendar: CalendarSpec,
    pub spot_code: String,
    pub rate_code: String,
    pub etn_code: Option<String>,
}

impl PricePanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn spots(&self) -> Vec<f64> {
        self.curve.spots()
    }

    pub fn window(&self) -> Option<DateWindow> {
        Some(DateWindow {
            start: *self.dates.first()?,
            end: *self.dates.last()?,
        })
    }

    /// Index of the first row dated on or after `boundary`.
    pub fn split_index(&self, boundary: NaiveDate) -> Result<usize> {
        let w = self.window().ok_or(Error::Empty("panel"))?;
        if boundary <= w.start || boundary > w.end {
            return Err(Error::Domain(format!("boundary {boundary} outside window {w}")));
        }
        Ok(self.dates.partition_point(|&d| d < boundary))
    }

    /// Rows `range`, with curve days re-indexed from 0. The money-market
    /// account keeps its original scale.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PricePanel {
        PricePanel {
            dates: self.dates[range.clone()].to_vec(),
            curve: self.curve.slice(range.clone()),
            rates: self.rates[range.clone()].to_vec(),
            money_market: self.money_market[range.clone()].to_vec(),
            etn: self.etn.as_ref().map(|e| e[range].to_vec()),
            calendar: self.calendar.clone(),
            spot_code: self.spot_code.clone(),
            rate_code: self.rate_code.clone(),
            etn_code: self.etn_code.clone(),
        }
    }
}

pub fn money_market_account(dates: &[NaiveDate], rates_pct: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(dates.len());
    if dates.is_empty() {
        return out;
    }
    out.push(1.0);
    for j in 1..dates.len() {
        let days = (dates[j] - dates[j - 1]).num_days() as f64;
        let growth = 1.0 + rates_pct[j - 1] / 100.0 * days / 360.0;
        out.push(out[j - 1] * growth);
    }
    out
}

/// Locations of the input files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelFiles {
    pub spot: PathBuf,
    pub futures: PathBuf,
    pub rates: PathBuf,
    pub expiries: PathBuf,
    pub etn: Option<PathBuf>,
}

impl PanelFiles {
    /// Standard file names inside `dir`; the ETN file is used if present.
    pub fn in_dir(dir: &Path) -> Self {
        let etn = dir.join(ETN_FILE);
        Self {
            spot: dir.join(SPOT_FILE),
            futures: dir.join(FUTURES_FILE),
            rates: dir.join(RATES_FILE),
            expiries: dir.join(EXPIRIES_FILE),
            etn: etn.exists().then_some(etn),
        }
    }

    pub fn all(&self) -> Vec<&Path> {
        let mut v = vec![
            self.spot.as_path(),
            self.futures.as_path(),
            self.rates.as_path(),
            self.expiries.as_path(),
        ];
        if let Some(e) = &self.etn {
            v.push(e);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    /// Keep going even if more than `MAX_DROP_FRACTION` of days are incomplete.
    pub allow_drops: bool,
}

/// Summary of what loading discarded.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub total_days: usize,
    pub dropped: Vec<(NaiveDate, String)>,
}

fn with_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Reads `date,code,field,value` rows, keeping only `field`.
fn read_quotes(path: &Path, field: &str, allow_nonpositive: bool) -> Result<Vec<(NaiveDate, String, f64)>> {
    with_file(path, (|| {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut out = Vec::new();
        let mut rec = csv::StringRecord::new();
        let headers = rdr.headers()?.clone();
        let expected = ["date", "code", "field", "value"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("header must be {}", expected.join(",")),
            });
        }
        while rdr.read_record(&mut rec)? {
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let raw: RawQuote = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if raw.field != field {
                continue;
            }
            let bad = |message: String| Error::Parse { line, message };
            let date = NaiveDate::parse_from_str(&raw.date, DATE_FMT).map_err(|e| bad(format!("bad date {:?}: {e}", raw.date)))?;
            if !is_weekday(date) {
                return Err(bad(format!("{date} is not a trading day")));
            }
            if !raw.value.is_finite() || (!allow_nonpositive && raw.value <= 0.0) {
                return Err(bad(format!("invalid value {}", raw.value)));
            }
            out.push((date, raw.code, raw.value));
        }
        Ok(out)
    })())
}

fn read_expiries(path: &Path) -> Result<CalendarSpec> {
    #[derive(Deserialize)]
    struct Row {
        code: String,
        expiry: String,
    }
    with_file(path, (|| {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let mut entries = Vec::new();
        for rec in rdr.deserialize::<Row>() {
            let row = rec?;
            entries.push((row.code, parse_date(&row.expiry)?));
        }
        CalendarSpec::new(entries)
    })())
}

/// Single-code daily series; duplicate dates or several codes are errors.
fn single_series(rows: Vec<(NaiveDate, String, f64)>, what: &str) -> Result<(String, BTreeMap<NaiveDate, f64>)> {
    let mut code: Option<String> = None;
    let mut map = BTreeMap::new();
    for (d, c, v) in rows {
        match &code {
            None => code = Some(c),
            Some(k) if *k != c => {
                return Err(Error::Domain(format!("{what} file mixes codes {k} and {c}")));
            }
            _ => {}
        }
        if map.insert(d, v).is_some() {
            return Err(Error::Domain(format!("{what} quoted twice on {d}")));
        }
    }
    let code = code.ok_or(Error::Empty("quote file"))?;
    Ok((code, map))
}

/// Loads and aligns a panel. Days missing the spot, the rate or any of the
/// front `MAX_RANK` futures are dropped; if more than `MAX_DROP_FRACTION`
/// of days go, loading fails unless `opts.allow_drops` is set.
///
/// A contract expiring on a kept day keeps rank 0; if it has no quote that
/// day its final price is taken to be the spot close.
pub fn load_panel(files: &PanelFiles, window: Option<DateWindow>, opts: LoadOptions) -> Result<(PricePanel, LoadReport)> {
    let calendar = read_expiries(&files.expiries)?;
    let in_window = |d: &NaiveDate| window.is_none_or(|w| w.contains(*d));
    let (spot_code, spot) = single_series(read_quotes(&files.spot, "close", false)?, "spot")?;
    let (rate_code, rates) = single_series(read_quotes(&files.rates, "rate", true)?, "rate")?;
    let etn = match &files.etn {
        Some(p) => Some(single_series(read_quotes(p, "close", false)?, "etn")?),
        None => None,
    };
    let mut futures: HashMap<(NaiveDate, usize), f64> = HashMap::new();
    for (d, code, v) in read_quotes(&files.futures, "close", false)? {
        if !in_window(&d) {
            continue;
        }
        let c = calendar
            .index_of(&code)
            .ok_or_else(|| with_file(&files.futures, Err::<(), _>(Error::Domain(format!("contract {code} has no expiry")))).unwrap_err())?;
        if futures.insert((d, c), v).is_some() {
            return Err(Error::Domain(format!("contract {code} quoted twice on {d}")));
        }
    }

    let all_dates: Vec<NaiveDate> = spot.keys().copied().filter(in_window).collect();
    if all_dates.is_empty() {
        return Err(Error::Empty("no spot quotes inside the window"));
    }
    let mut report = LoadReport {
        total_days: all_dates.len(),
        dropped: Vec::new(),
    };
    let mut dates = Vec::new();
    let mut rows = Vec::new();
    let mut rate_vals = Vec::new();
    let mut etn_vals = Vec::new();
    for d in all_dates {
        let s = spot[&d];
        let Some(&r) = rates.get(&d) else {
            report.dropped.push((d, "no rate".into()));
            continue;
        };
        let e = match &etn {
            Some((_, m)) => match m.get(&d) {
                Some(&v) => Some(v),
                None => {
                    report.dropped.push((d, "no ETN price".into()));
                    continue;
                }
            },
            None => None,
        };
        let ranked = calendar.ranked(d, MAX_RANK);
        let tradable = ranked.iter().filter(|(_, k)| *k > 0).count();
        if tradable < MAX_RANK {
            report.dropped.push((d, format!("only {tradable} listed contracts")));
            continue;
        }
        let mut quotes = Vec::with_capacity(ranked.len());
        let mut missing = None;
        for &(c, rank) in &ranked {
            let price = match futures.get(&(d, c)) {
                Some(&p) => p,
                None if rank == 0 => s,
                None => {
                    missing = Some(c);
                    break;
                }
            };
            quotes.push(Quote {
                contract: c,
                rank,
                ttm: trading_days_between(d, calendar.expiries[c]) as f64 / TRADING_DAYS_PER_YEAR,
                price,
            });
        }
        if let Some(c) = missing {
            report.dropped.push((d, format!("no quote for {}", calendar.codes[c])));
            continue;
        }
        rows.push(CurveRow::new(dates.len(), s, quotes));
        dates.push(d);
        rate_vals.push(r);
        if let Some(v) = e {
            etn_vals.push(v);
        }
    }
    if !report.dropped.is_empty() {
        log::warn!("dropped {} of {} days with incomplete data", report.dropped.len(), report.total_days);
        for (d, why) in &report.dropped {
            log::debug!("dropped {d}: {why}");
        }
    }
    let frac = report.dropped.len() as f64 / report.total_days as f64;
    if frac > MAX_DROP_FRACTION && !opts.allow_drops {
        return Err(Error::TooManyDropped {
            dropped: report.dropped.len(),
            total: report.total_days,
        });
    }
    if dates.is_empty() {
        return Err(Error::Empty("no complete days"));
    }
    let money_market = money_market_account(&dates, &rate_vals);
    let panel = PricePanel {
        money_market,
        curve: FuturesPanel {
            rows,
            dt: 1.0 / TRADING_DAYS_PER_YEAR,
        },
        dates,
        rates: rate_vals,
        etn: etn.as_ref().map(|_| etn_vals),
        calendar,
        spot_code,
        rate_code,
        etn_code: etn.map(|(c, _)| c),
    };
    Ok((panel, report))
}

fn write_quotes<'a>(path: &Path, rows: impl Iterator<Item = (NaiveDate, &'a str, &'a str, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "code", "field", "value"])?;
    for (d, code, field, v) in rows {
        w.write_record([d.format(DATE_FMT).to_string(), code.to_string(), field.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the panel in the input format. Values use Rust's shortest
/// round-trip formatting, so `load_panel` reads back identical bits.
pub fn write_panel(panel: &PricePanel, dir: &Path) -> Result<PanelFiles> {
    fs::create_dir_all(dir)?;
    let files = PanelFiles {
        spot: dir.join(SPOT_FILE),
        futures: dir.join(FUTURES_FILE),
        rates: dir.join(RATES_FILE),
        expiries: dir.join(EXPIRIES_FILE),
        etn: panel.etn.as_ref().map(|_| dir.join(ETN_FILE)),
    };
    write_quotes(
        &files.spot,
        panel.dates.iter().zip(&panel.curve.rows).map(|(&d, r)| (d, panel.spot_code.as_str(), "close", r.spot)),
    )?;
    write_quotes(
        &files.rates,
        panel.dates.iter().zip(&panel.rates).map(|(&d, &r)| (d, panel.rate_code.as_str(), "rate", r)),
    )?;
    write_quotes(
        &files.futures,
        panel.dates.iter().zip(&panel.curve.rows).flat_map(|(&d, row)| {
            row.quotes
                .iter()
                .map(move |q| (d, panel.calendar.codes[q.contract].as_str(), "close", q.price))
        }),
    )?;
    if let (Some(path), Some(etn)) = (&files.etn, &panel.etn) {
        let code = panel.etn_code.as_deref().unwrap_or("ETN");
        write_quotes(path, panel.dates.iter().zip(etn).map(|(&d, &v)| (d, code, "close", v)))?;
    }
    let mut w = csv::Writer::from_path(&files.expiries)?;
    w.write_record(["code", "expiry"])?;
    for (c, e) in panel.calendar.codes.iter().zip(&panel.calendar.expiries) {
        w.write_record([c.clone(), e.format(DATE_FMT).to_string()])?;
    }
    w.flush()?;
    Ok(files)
}

/// Scales `series` so that `series[anchor] == 100`.
pub fn normalize_to_100(series: &[f64], anchor: usize) -> Result<Vec<f64>> {
    let &a = series.get(anchor).ok_or(Error::LengthMismatch {
        expected: anchor + 1,
        actual: series.len(),
    })?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::ZeroPrice { index: anchor });
    }
    if a == 100.0 {
        return Ok(series.to_vec());
    }
    Ok(series.iter().map(|v| v / a * 100.0).collect())
}

/// Rows dated before `boundary` and the rest.
pub fn split_in_out(panel: &PricePanel, boundary: NaiveDate) -> Result<(PricePanel, PricePanel)> {
    let k = panel.split_index(boundary)?;
    Ok((panel.slice(0..k), panel.slice(k..panel.len())))
}

/// Weekdays from `start` (inclusive) onward.
pub fn trading_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut d = start;
    while !is_weekday(d) {
        d = d.succ_opt().expect("date in range");
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if is_weekday(d) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Settings for a model-generated panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub hist: HistoricalParams,
    pub rn: RiskNeutralParams,
    pub s0: f64,
    pub n_days: usize,
    pub start: NaiveDate,
    /// Trading days between consecutive expiries.
    pub cycle_length: usize,
    /// Overnight rate in percent.
    pub rate_pct: f64,
    pub seed: u64,
}

/// A panel generated from a simulated index path and the closed-form
/// futures curve, with monthly expiries on the trading-day grid.
pub fn synthetic_panel(spec: &SyntheticSpec) -> Result<PricePanel> {
    if spec.n_days < 2 || spec.cycle_length == 0 {
        return Err(Error::Domain("synthetic panel needs at least 2 days and a positive cycle".into()));
    }
    let dt = 1.0 / TRADING_DAYS_PER_YEAR;
    let path = simulate_index_path(&spec.hist, &spec.hist.cir_vol(), spec.s0, spec.n_days, spec.seed, dt)?;
    let n_contracts = spec.n_days / spec.cycle_length + MAX_RANK + 2;
    let all = trading_dates(spec.start, n_contracts * spec.cycle_length + 1);
    let dates = all[..spec.n_days].to_vec();
    let entries = (0..n_contracts)
        .map(|c| (format!("F{:03}", c + 1), all[(c + 1) * spec.cycle_length]))
        .collect();
    let calendar = CalendarSpec::new(entries)?;
    let rows = dates
        .iter()
        .zip(&path.values)
        .enumerate()
        .map(|(j, (&d, &s))| {
            let quotes = calendar
                .ranked(d, MAX_RANK)
                .into_iter()
                .map(|(c, rank)| {
                    let ttm = trading_days_between(d, calendar.expiries[c]) as f64 / TRADING_DAYS_PER_YEAR;
                    Quote {
                        contract: c,
                        rank,
                        ttm,
                        price: futures_price_unchecked(s, ttm, &spec.rn),
                    }
                })
                .collect();
            CurveRow::new(j, s, quotes)
        })
        .collect();
    let rates = vec![spec.rate_pct; dates.len()];
    Ok(PricePanel {
        money_market: money_market_account(&dates, &rates),
        curve: FuturesPanel { rows, dt },
        dates,
        rates,
        etn: None,
        calendar,
        spot_code: "INDEX".into(),
        rate_code: "ON".into(),
        etn_code: None,
    })
}
