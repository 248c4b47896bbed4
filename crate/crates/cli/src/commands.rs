use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Serialize;
use voltrack::analytics::{scatter_report, slope_table, ScatterReport};
use voltrack::calibration::{cir_initial_guess, mle_fit, mom_fit, observations_from_panel, MleOptions, MomOptions};
use voltrack::data::{
    load_panel, parse_date, synthetic_panel, write_panel, LoadOptions, PanelFiles, PricePanel, SyntheticSpec,
    TRADING_DAYS_PER_YEAR,
};
use voltrack::dynamic::{DynamicTracker, TrackingConfig};
use voltrack::model::{LocalVol, MarketConfig};
use voltrack::scenario::{run_scenario, ScenarioRun, StudySettings};
use voltrack::simulation::{run_strategy, VxxRoll};
use voltrack::static_opt::{build_rolled_series, default_subsets, fit_subsets, FitMode, TrackingData};
use voltrack::Exec;

use crate::error::CliError;
use crate::output::{num, opt_num, Outputs, RunManifest, Table};
use crate::params::{ParamsFile, ScenarioConfig};
use crate::{DataArgs, ModeArg};

const DT: f64 = 1.0 / TRADING_DAYS_PER_YEAR;

fn load(args: &DataArgs, manifest: &mut RunManifest) -> Result<PricePanel, CliError> {
    let files = PanelFiles::in_dir(&args.data_dir);
    for p in files.all() {
        if !p.is_file() {
            return Err(CliError::data(format!("missing input file {}", p.display())));
        }
        manifest.input(p)?;
    }
    if let Some(w) = args.window {
        manifest.set("window", w.to_string());
    }
    manifest.set("allow_drops", args.allow_drops);
    let (panel, report) = load_panel(
        &files,
        args.window,
        LoadOptions {
            allow_drops: args.allow_drops,
        },
    )?;
    log::info!(
        "loaded {} days ({} dropped) from {}",
        panel.len(),
        report.dropped.len(),
        args.data_dir.display()
    );
    manifest.set("days_loaded", panel.len() as i64);
    manifest.set("days_dropped", report.dropped.len() as i64);
    Ok(panel)
}

fn read_params(path: &Path, manifest: &mut RunManifest) -> Result<ParamsFile, CliError> {
    let p = ParamsFile::read(path)?;
    manifest.input(path)?;
    Ok(p)
}

fn date_str(panel: &PricePanel, j: usize) -> String {
    panel.dates[j].format("%Y-%m-%d").to_string()
}

#[derive(Serialize)]
struct MleDiagnostics {
    avg_loglik: f64,
    start_mu: f64,
    start_theta: f64,
    start_sigma: f64,
    start_loglik: f64,
    iterations: usize,
    restarts: usize,
    converged: bool,
    at_bound: Vec<String>,
}

#[derive(Serialize)]
struct MomDiagnostics {
    loss: f64,
    grid_mu_tilde: f64,
    grid_theta_tilde: f64,
    iterations: usize,
    converged: bool,
    at_bound: Vec<String>,
}

#[derive(Serialize)]
struct CalibrationFile {
    #[serde(flatten)]
    params: ParamsFile,
    observations: usize,
    mle: MleDiagnostics,
    mom: MomDiagnostics,
}

pub fn calibrate(data: &DataArgs, seed: u64, out_dir: &Path, exec: Exec) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("calibrate", Some(seed));
    let panel = load(data, &mut manifest)?;
    let spots = panel.spots();
    let init = cir_initial_guess(&spots, DT)?;
    let mle = mle_fit(
        &spots,
        DT,
        &init,
        &MleOptions {
            seed,
            exec,
            ..Default::default()
        },
    )?;
    if !mle.converged {
        return Err(CliError::calibration(format!(
            "likelihood fit did not converge after {} iterations; best {:?} with average log-likelihood {}",
            mle.iterations, mle.params, mle.avg_loglik
        )));
    }
    let obs = observations_from_panel(&panel.curve);
    let mom = mom_fit(&obs, &MomOptions { exec, ..Default::default() })?;
    if !mom.converged {
        return Err(CliError::calibration(format!(
            "curve fit did not converge after {} iterations; best {:?} with loss {}",
            mom.iterations, mom.params, mom.loss
        )));
    }
    for name in mle.at_bound.iter().chain(&mom.at_bound) {
        log::warn!("{name} ended at its bound");
    }
    // continuously compounded equivalent of the average overnight rate
    let r = panel.rates.iter().sum::<f64>() / panel.rates.len() as f64 / 100.0;
    let file = CalibrationFile {
        params: ParamsFile {
            mu: mle.params.mu,
            theta: mle.params.theta,
            sigma: mle.params.sigma,
            mu_tilde: mom.params.mu_tilde,
            theta_tilde: mom.params.theta_tilde,
            r,
        },
        observations: spots.len(),
        mle: MleDiagnostics {
            avg_loglik: mle.avg_loglik,
            start_mu: mle.start.mu,
            start_theta: mle.start.theta,
            start_sigma: mle.start.sigma,
            start_loglik: mle.start_loglik,
            iterations: mle.iterations,
            restarts: mle.restarts,
            converged: mle.converged,
            at_bound: mle.at_bound.clone(),
        },
        mom: MomDiagnostics {
            loss: mom.loss,
            grid_mu_tilde: mom.grid_start.mu_tilde,
            grid_theta_tilde: mom.grid_start.theta_tilde,
            iterations: mom.iterations,
            converged: mom.converged,
            at_bound: mom.at_bound.clone(),
        },
    };
    let mut out = Outputs::default();
    out.add(
        "params.toml",
        toml::to_string(&file).map_err(|e| CliError::other(e.to_string()))?.into_bytes(),
    );
    let mut t = Table::new(["date", "loss"]);
    let mut k = 0;
    for (j, row) in panel.curve.rows.iter().enumerate() {
        if row.tradable_count() > 0 {
            t.row([date_str(&panel, j), num(mom.day_losses[k])]);
            k += 1;
        }
    }
    out.add("curve_losses.csv", t.finish());
    out.commit(out_dir, manifest)?;
    Ok(())
}

fn parse_subsets(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split(';')
        .map(|group| {
            let ranks = group
                .split(',')
                .map(|r| {
                    r.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&k| k >= 1)
                        .ok_or_else(|| CliError::data(format!("bad rank {r:?} in subsets")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let unique: BTreeSet<_> = ranks.iter().collect();
            if unique.len() != ranks.len() {
                return Err(CliError::data(format!("repeated rank in subset {group:?}")));
            }
            Ok(ranks)
        })
        .collect()
}

fn subset_label(ranks: &[usize]) -> String {
    ranks.iter().map(|r| format!("{r}-m")).collect::<Vec<_>>().join(" ")
}

pub fn backtest_static(
    data: &DataArgs,
    split: &str,
    subsets: Option<&str>,
    mode: ModeArg,
    out_dir: &Path,
    exec: Exec,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("backtest-static", None);
    let subsets = match subsets {
        Some(s) => parse_subsets(s)?,
        None => default_subsets(),
    };
    let boundary = parse_date(split)?;
    let panel = load(data, &mut manifest)?;
    let window = panel.window().expect("loaded panel is non-empty");
    let split_at = if boundary > window.end {
        log::warn!("split {boundary} is after the last date; no out-of-sample period");
        panel.len()
    } else {
        panel.split_index(boundary)?
    };
    manifest.set("split", split);
    manifest.set("split_index", split_at as i64);
    manifest.set(
        "subsets",
        subsets.iter().map(|s| subset_label(s)).collect::<Vec<_>>().join(";"),
    );

    let ranks: Vec<usize> = subsets.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let rolled = ranks
        .iter()
        .map(|&k| build_rolled_series(&panel.curve, k, 100.0))
        .collect::<Result<Vec<_>, _>>()?;
    let tracking = TrackingData::new(panel.spots(), panel.money_market.clone(), rolled, split_at)?;

    let modes: &[(FitMode, &str)] = match mode {
        ModeArg::Price => &[(FitMode::Price, "price")],
        ModeArg::Return => &[(FitMode::Return, "return")],
        ModeArg::Both => &[(FitMode::Price, "price"), (FitMode::Return, "return")],
    };
    manifest.set("mode", modes.iter().map(|m| m.1).collect::<Vec<_>>().join(","));
    let mut out = Outputs::default();
    let mut failures = 0;
    let mut total = 0;
    for &(fit_mode, name) in modes {
        let mut header = vec!["subset".to_string(), "w_cash".to_string()];
        header.extend(ranks.iter().map(|r| format!("w_{r}m")));
        header.extend(["in_rmse", "out_rmse", "out_rmse_continued", "status"].map(String::from));
        let mut t = Table::new(&header);
        for (subset, res) in subsets.iter().zip(fit_subsets(&tracking, &subsets, fit_mode, exec)) {
            total += 1;
            let mut row = vec![subset_label(subset)];
            match res {
                Ok(w) => {
                    row.push(num(w.w0()));
                    for r in &ranks {
                        row.push(match subset.iter().position(|s| s == r) {
                            Some(i) => num(w.futures_weights()[i]),
                            None => String::new(),
                        });
                    }
                    row.extend([
                        num(w.in_rmse),
                        opt_num(w.out_rmse),
                        opt_num(w.out_rmse_continued),
                        "ok".to_string(),
                    ]);
                }
                Err(e) => {
                    failures += 1;
                    log::warn!("{name} fit for {{{}}} failed: {e}", subset_label(subset));
                    row.extend(std::iter::repeat_n(String::new(), ranks.len() + 4));
                    row.push(e.to_string());
                }
            }
            t.row(&row);
        }
        out.add(&format!("static_{name}.csv"), t.finish());
    }
    if failures == total {
        return Err(CliError::degenerate("every subset fit failed"));
    }
    out.commit(out_dir, manifest)?;
    Ok(())
}

fn scatter_row(label: &str, s: &ScatterReport) -> Vec<String> {
    let r = &s.regression;
    vec![
        label.to_string(),
        num(r.slope),
        num(r.intercept),
        num(r.slope_se),
        num(r.intercept_se),
        num(r.r2),
        num(r.rmse),
        r.n.to_string(),
        num(s.t_stat),
        num(s.p_value),
    ]
}

const SCATTER_HEADER: [&str; 10] = [
    "strategy",
    "slope",
    "intercept",
    "slope_se",
    "intercept_se",
    "r2",
    "rmse",
    "n",
    "t_slope_eq_1",
    "p_value",
];

fn tracking_config(beta: f64, contracts: &[usize]) -> Result<TrackingConfig, CliError> {
    match contracts {
        [a, b] => Ok(TrackingConfig::new(beta, *a, *b)?),
        _ => Err(CliError::data("--contracts takes exactly two ranks")),
    }
}

pub fn backtest_dynamic(
    data: &DataArgs,
    params_path: &Path,
    beta: f64,
    contracts: &[usize],
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("backtest-dynamic", None);
    let params = read_params(params_path, &mut manifest)?;
    let cfg = tracking_config(beta, contracts)?;
    manifest.set("beta", beta);
    manifest.set("contracts", format!("{},{}", cfg.i1, cfg.i2));
    let panel = load(data, &mut manifest)?;
    let hist = params.hist()?;
    let mkt = MarketConfig::new(params.r, DT, 21)?;
    let mut tracker = DynamicTracker::new(cfg, hist, params.rn()?, hist.cir_vol(), mkt);
    let x0 = panel.curve.rows[0].spot;
    let dynamic = run_strategy(&panel.curve, &mut tracker, x0, &mkt)?;
    let vxx = run_strategy(&panel.curve, &mut VxxRoll, x0, &mkt)?;

    let mut out = Outputs::default();
    let mut header = vec!["date", "index", "dynamic", "vxx"];
    if panel.etn.is_some() {
        header.push("etn");
    }
    let mut t = Table::new(&header);
    for j in 0..panel.len() {
        let mut row = vec![
            date_str(&panel, j),
            num(panel.curve.rows[j].spot),
            num(dynamic.wealth[j]),
            num(vxx.wealth[j]),
        ];
        if let Some(e) = &panel.etn {
            row.push(num(e[j]));
        }
        t.row(&row);
    }
    out.add("wealth.csv", t.finish());

    let mut t = Table::new(["date", "dynamic_w1", "dynamic_w2", "vxx_w1", "vxx_w2", "objective"]);
    for j in 0..panel.len() - 1 {
        t.row([
            date_str(&panel, j),
            num(dynamic.weights[j][0]),
            num(dynamic.weights[j][1]),
            num(vxx.weights[j][0]),
            num(vxx.weights[j][1]),
            num(tracker.objectives[j]),
        ]);
    }
    out.add("weights.csv", t.finish());

    let index_ret = voltrack::analytics::daily_returns(&panel.spots());
    let dyn_ret = dynamic.returns();
    let vxx_ret = vxx.returns();
    let mut t = Table::new(SCATTER_HEADER);
    t.row(scatter_row("dynamic", &scatter_report(&dyn_ret, &index_ret)?));
    t.row(scatter_row("vxx", &scatter_report(&vxx_ret, &index_ret)?));
    if let Some(e) = &panel.etn {
        let etn_ret = voltrack::analytics::daily_returns(e);
        t.row(scatter_row("etn", &scatter_report(&etn_ret, &index_ret)?));
    }
    out.add("scatter.csv", t.finish());

    let mut t = Table::new(["date", "index", "dynamic", "vxx"]);
    for j in 0..index_ret.len() {
        t.row([date_str(&panel, j + 1), num(index_ret[j]), num(dyn_ret[j]), num(vxx_ret[j])]);
    }
    out.add("returns.csv", t.finish());
    out.commit(out_dir, manifest)?;
    Ok(())
}

pub struct SimulateOverrides {
    pub seed: Option<u64>,
    pub cycles: Option<usize>,
    pub beta: Option<f64>,
    pub contracts: Option<Vec<usize>>,
    pub s0: Option<Vec<f64>>,
}

fn write_scenario(out: &mut Outputs, k: usize, run: &ScenarioRun) {
    let mut t = Table::new(["day", "index", "dynamic", "vxx"]);
    for (j, s) in run.path.values.iter().enumerate() {
        t.row([j.to_string(), num(*s), num(run.dynamic.wealth[j]), num(run.vxx.wealth[j])]);
    }
    out.add(&format!("scenario_{k}_paths.csv"), t.finish());

    let mut t = Table::new(["day", "dynamic_w1", "dynamic_w2", "vxx_w1", "vxx_w2", "objective"]);
    for j in 0..run.dynamic.weights.len() {
        let (d, v) = (&run.dynamic.weights[j], &run.vxx.weights[j]);
        t.row([j.to_string(), num(d[0]), num(d[1]), num(v[0]), num(v[1]), num(run.objectives[j])]);
    }
    out.add(&format!("scenario_{k}_weights.csv"), t.finish());

    let (ri, rd, rv) = (run.path.returns(), run.dynamic.returns(), run.vxx.returns());
    let mut t = Table::new(["day", "index", "dynamic", "vxx"]);
    for j in 0..ri.len() {
        t.row([(j + 1).to_string(), num(ri[j]), num(rd[j]), num(rv[j])]);
    }
    out.add(&format!("scenario_{k}_returns.csv"), t.finish());
}

pub fn simulate(
    params_path: &Path,
    scenario: Option<&Path>,
    over: SimulateOverrides,
    out_dir: &Path,
    exec: Exec,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("simulate", None);
    let params = read_params(params_path, &mut manifest)?;
    let cfg = match scenario {
        Some(p) => {
            manifest.input(p)?;
            ScenarioConfig::read(p)?
        }
        None => ScenarioConfig::default(),
    };
    let hist = params.hist()?;
    let seed = over.seed.or(cfg.seed).unwrap_or(0);
    let cycles = over.cycles.or(cfg.cycles).unwrap_or(3);
    let beta = over.beta.or(cfg.beta).unwrap_or(1.0);
    let contracts = over
        .contracts
        .or(cfg.contracts.map(|c| c.to_vec()))
        .unwrap_or_else(|| vec![1, 2]);
    let s0 = over
        .s0
        .or(cfg.s0)
        .unwrap_or_else(|| vec![hist.theta, hist.theta / 3.0, 3.0 * hist.theta]);
    let r = cfg.r.unwrap_or(params.r);
    let days_per_month = cfg.days_per_month.unwrap_or(21);
    let sigma = cfg.sigma.unwrap_or(hist.sigma);

    let invalid = |m: String| Err(CliError::data(format!("invalid scenario: {m}")));
    if s0.is_empty() || s0.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return invalid(format!("initial levels must be positive, got {s0:?}"));
    }
    if cycles == 0 {
        return invalid("cycles must be at least 1".into());
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be non-negative, got {sigma}"));
    }
    let tracking = tracking_config(beta, &contracts)?;
    let mkt = MarketConfig::new(r, DT, days_per_month)?;
    let settings = StudySettings {
        vol: LocalVol::square_root(sigma),
        ..StudySettings::cir(hist, params.rn()?, mkt, tracking)
    };
    manifest.seed = Some(seed);
    manifest.set("cycles", cycles as i64);
    manifest.set("beta", beta);
    manifest.set("contracts", format!("{},{}", tracking.i1, tracking.i2));
    manifest.set("s0", s0.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
    manifest.set("r", r);
    manifest.set("days_per_month", days_per_month as i64);
    manifest.set("sigma", sigma);

    let runs = exec
        .map_slice(&s0.iter().enumerate().collect::<Vec<_>>(), |&(k, &s)| {
            run_scenario(&settings, s, cycles, seed, k as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outputs::default();
    let mut header = vec!["scenario", "s0"];
    header.extend(SCATTER_HEADER);
    let mut t = Table::new(&header);
    for (k, run) in runs.iter().enumerate() {
        write_scenario(&mut out, k, run);
        for (label, fit) in [("dynamic", &run.dynamic_fit), ("vxx", &run.vxx_fit)] {
            let mut row = vec![k.to_string(), num(s0[k])];
            row.extend(scatter_row(label, fit));
            t.row(&row);
        }
    }
    out.add("scatter.csv", t.finish());
    out.commit(out_dir, manifest)?;
    Ok(())
}

pub fn regress(
    data: &DataArgs,
    horizons: &[usize],
    ranks: &[usize],
    max_horizon: usize,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("regress", None);
    let panel = load(data, &mut manifest)?;
    let join = |v: &[usize]| v.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",");
    manifest.set("horizons", join(horizons));
    manifest.set("ranks", join(ranks));
    manifest.set("max_horizon", max_horizon as i64);
    manifest.set("windows", "disjoint, anchored at the first day");

    let mut out = Outputs::default();
    let mut t = Table::new([
        "horizon",
        "rank",
        "slope",
        "intercept",
        "slope_se",
        "intercept_se",
        "r2",
        "rmse",
        "n",
    ]);
    for c in slope_table(&panel.curve, horizons, ranks)? {
        let r = c.regression;
        t.row([
            c.horizon.to_string(),
            c.rank.to_string(),
            num(r.slope),
            num(r.intercept),
            num(r.slope_se),
            num(r.intercept_se),
            num(r.r2),
            num(r.rmse),
            r.n.to_string(),
        ]);
    }
    out.add("slopes.csv", t.finish());

    let all: Vec<usize> = (1..=max_horizon).collect();
    let mut t = Table::new(["rank", "horizon", "intercept", "intercept_se", "n"]);
    for c in slope_table(&panel.curve, &all, ranks)? {
        t.row([
            c.rank.to_string(),
            c.horizon.to_string(),
            num(c.regression.intercept),
            num(c.regression.intercept_se),
            c.regression.n.to_string(),
        ]);
    }
    out.add("intercepts.csv", t.finish());
    out.commit(out_dir, manifest)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn synth(
    params_path: &Path,
    days: usize,
    start: &str,
    seed: u64,
    rate: f64,
    cycle_length: usize,
    s0: Option<f64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("synth", Some(seed));
    let params = read_params(params_path, &mut manifest)?;
    let hist = params.hist()?;
    let spec = SyntheticSpec {
        hist,
        rn: params.rn()?,
        s0: s0.unwrap_or(hist.theta),
        n_days: days,
        start: parse_date(start)?,
        cycle_length,
        rate_pct: rate,
        seed,
    };
    manifest.set("days", days as i64);
    manifest.set("start", start);
    manifest.set("rate", rate);
    manifest.set("cycle_length", cycle_length as i64);
    manifest.set("s0", spec.s0);
    let panel = synthetic_panel(&spec)?;

    let staging = out_dir.join(".staging");
    let files = write_panel(&panel, &staging)?;
    let mut out = Outputs::default();
    for p in files.all() {
        let bytes = fs::read(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
        out.add(&p.file_name().expect("file name").to_string_lossy(), bytes);
    }
    fs::remove_dir_all(&staging).map_err(|e| CliError::data(format!("{}: {e}", staging.display())))?;
    out.commit(out_dir, manifest)?;
    Ok(())
}
