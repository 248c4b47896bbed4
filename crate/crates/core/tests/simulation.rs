use voltrack::analytics::{intercept_curve, slope_table};
use voltrack::model::{HistoricalParams, MarketConfig, RiskNeutralParams};
use voltrack::simulation::{futures_panel_from_path, simulate_index_path, simulate_paths, ContractCalendar};
use voltrack::Exec;

const DT: f64 = 1.0 / 252.0;

fn calibrated() -> (HistoricalParams, RiskNeutralParams) {
    (
        HistoricalParams::new(10.86, 18.81, 6.38).unwrap(),
        RiskNeutralParams::new(1.39, 26.03).unwrap(),
    )
}

#[test]
fn terminal_mean_matches_long_run_level() {
    let (h, _) = calibrated();
    let paths = simulate_paths(&h, &h.cir_vol(), h.theta, 5040, 17, 1000, DT, Exec::Parallel).unwrap();
    let last: Vec<f64> = paths.iter().map(|p| *p.values.last().unwrap()).collect();
    let n = last.len() as f64;
    let mean = last.iter().sum::<f64>() / n;
    let var = last.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - h.theta).abs() < 3.0 * se, "mean {mean}, se {se}");
    // stationary variance of the square-root process is theta sigma^2 / (2 mu)
    let stationary = h.theta * h.sigma * h.sigma / (2.0 * h.mu);
    assert!((var / stationary - 1.0).abs() < 0.15, "{var} vs {stationary}");
}

#[test]
fn proportional_curve_gives_unit_slopes() {
    let (h, rn) = calibrated();
    let mkt = MarketConfig::default();
    let path = simulate_index_path(&h, &h.cir_vol(), h.theta, 600, 4, DT).unwrap();
    let cal = ContractCalendar::for_horizon(29, 7, &mkt).unwrap();
    let mut panel = futures_panel_from_path(&path, &cal, &rn).unwrap();
    for row in &mut panel.rows {
        for q in &mut row.quotes {
            q.price = row.spot * (1.0 + 0.01 * q.contract as f64);
        }
    }
    for c in slope_table(&panel, &[1, 5, 20], &[1, 4, 7]).unwrap() {
        let r = c.regression;
        assert!((r.slope - 1.0).abs() < 1e-10, "{c:?}");
        assert!(r.intercept.abs() < 1e-12 && r.r2 > 1.0 - 1e-12);
    }
}

#[test]
fn model_curve_dampens_with_maturity() {
    let (h, rn) = calibrated();
    let mkt = MarketConfig::default();
    let path = simulate_index_path(&h, &h.cir_vol(), h.theta, 1510, 9, DT).unwrap();
    let cal = ContractCalendar::for_horizon(72, 7, &mkt).unwrap();
    let panel = futures_panel_from_path(&path, &cal, &rn).unwrap();
    let ranks: Vec<usize> = (1..=7).collect();
    let cells = slope_table(&panel, &[1], &ranks).unwrap();
    assert!(cells.windows(2).all(|w| w[1].regression.slope < w[0].regression.slope));
    assert!(cells[0].regression.slope < 1.0 && cells[6].regression.slope > 0.0);

    // contango: the long-run level sits below theta~, so rolling loses value
    let curve = intercept_curve(&panel, 1, &[1, 5, 10, 20]).unwrap();
    assert!(curve.iter().all(|&(_, a)| a < 0.0), "{curve:?}");
    assert!(curve.windows(2).all(|w| w[1].1 < w[0].1), "{curve:?}");
}
