//! Risk-neutral `(mu_tilde, theta_tilde)` from observed futures curves.

use serde::{Deserialize, Serialize};

use super::simplex::{nelder_mead, SimplexOptions};
use super::{Bound, EDGE_REL, MU_BOUND, THETA_BOUND};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::RiskNeutralParams;
use crate::simulation::FuturesPanel;

/// One day's spot and `(ttm in years, futures price)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveObservation {
    pub spot: f64,
    pub contracts: Vec<(f64, f64)>,
}

/// Every tradable quote (rank >= 1) of every row.
pub fn observations_from_panel(panel: &FuturesPanel) -> Vec<CurveObservation> {
    panel
        .rows
        .iter()
        .map(|row| CurveObservation {
            spot: row.spot,
            contracts: row.quotes.iter().filter(|q| q.rank > 0).map(|q| (q.ttm, q.price)).collect(),
        })
        .filter(|o| !o.contracts.is_empty())
        .collect()
}

fn check(obs: &[CurveObservation]) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::Empty("curve observations"));
    }
    if let Some(j) = obs.iter().position(|o| o.contracts.is_empty()) {
        return Err(Error::Domain(format!("observation {j} has no contracts")));
    }
    Ok(())
}

/// `1/(2 N_j) sum_i ((s_j - theta~) e^{-mu~ T_i} + theta~ - f_j^i)^2` per day.
pub fn mom_day_losses(rn: &RiskNeutralParams, obs: &[CurveObservation]) -> Result<Vec<f64>> {
    check(obs)?;
    Ok(obs.iter().map(|o| day_loss(rn.mu_tilde, rn.theta_tilde, o)).collect())
}

fn day_loss(mu: f64, theta: f64, o: &CurveObservation) -> f64 {
    let sse: f64 = o
        .contracts
        .iter()
        .map(|&(t, f)| {
            let e = (o.spot - theta) * (-mu * t).exp() + theta - f;
            e * e
        })
        .sum();
    sse / (2.0 * o.contracts.len() as f64)
}

fn loss_unchecked(mu: f64, theta: f64, obs: &[CurveObservation]) -> f64 {
    obs.iter().map(|o| day_loss(mu, theta, o)).sum::<f64>() / obs.len() as f64
}

/// For fixed `mu` the loss is `c0 + c1 theta + c2 theta^2`; returns `[c0, c1, c2]`.
fn theta_quadratic(mu: f64, obs: &[CurveObservation]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for o in obs {
        let w = 1.0 / (2.0 * o.contracts.len() as f64 * obs.len() as f64);
        for &(t, f) in &o.contracts {
            let e = (-mu * t).exp();
            let (a, b) = (o.spot * e - f, 1.0 - e);
            c[0] += w * a * a;
            c[1] += w * 2.0 * a * b;
            c[2] += w * b * b;
        }
    }
    c
}

/// Average of the daily losses, in index points squared.
pub fn mom_loss(rn: &RiskNeutralParams, obs: &[CurveObservation]) -> Result<f64> {
    check(obs)?;
    Ok(loss_unchecked(rn.mu_tilde, rn.theta_tilde, obs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomOptions {
    /// Points per axis of the log-spaced starting grid.
    pub grid: usize,
    pub max_iter: usize,
    pub exec: Exec,
}

impl Default for MomOptions {
    fn default() -> Self {
        Self {
            grid: 40,
            max_iter: 4000,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomReport {
    pub params: RiskNeutralParams,
    pub loss: f64,
    pub day_losses: Vec<f64>,
    /// Best grid point before refinement.
    pub grid_start: RiskNeutralParams,
    pub iterations: usize,
    pub converged: bool,
    pub at_bound: Vec<String>,
}

const BOUNDS: [Bound; 2] = [MU_BOUND, THETA_BOUND];

fn log_grid(b: Bound, n: usize, i: usize) -> f64 {
    let (a, z) = (b.lo.ln(), b.hi.ln());
    (a + (z - a) * i as f64 / (n - 1) as f64).exp()
}

/// Scans a log grid over `MU_BOUND x THETA_BOUND`, then refines the best
/// point with a simplex search in clamped log coordinates (twice, the second
/// run restarting from the first's optimum).
pub fn mom_fit(obs: &[CurveObservation], opts: &MomOptions) -> Result<MomReport> {
    check(obs)?;
    let mut pairs: Vec<(f64, f64)> = obs
        .iter()
        .flat_map(|o| o.contracts.iter().map(move |&(t, _)| (o.spot, t)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pairs.dedup();
    if pairs.len() < 2 {
        return Err(Error::Unidentifiable(
            "a single (spot, maturity) pair cannot pin down two parameters".into(),
        ));
    }
    let n = opts.grid.max(2);
    let scores: Vec<f64> = opts
        .exec
        .map(n, |i| {
            let q = theta_quadratic(log_grid(BOUNDS[0], n, i), obs);
            (0..n)
                .map(|j| {
                    let theta = log_grid(BOUNDS[1], n, j);
                    q[0] + theta * (q[1] + theta * q[2])
                })
                .collect::<Vec<_>>()
        })
        .concat();
    let k = (0..scores.len())
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
        .expect("grid is non-empty");
    let grid_start = RiskNeutralParams {
        mu_tilde: log_grid(BOUNDS[0], n, k / n),
        theta_tilde: log_grid(BOUNDS[1], n, k % n),
    };

    let objective = |z: &[f64]| loss_unchecked(BOUNDS[0].exp_clamped(z[0]), BOUNDS[1].exp_clamped(z[1]), obs);
    let simplex = SimplexOptions {
        max_iter: opts.max_iter,
        xtol: 1e-12,
        ftol: 1e-15,
        initial_step: 0.05,
    };
    let z0 = [grid_start.mu_tilde.ln(), grid_start.theta_tilde.ln()];
    let first = nelder_mead(objective, &z0, &simplex);
    let second = nelder_mead(objective, &first.x, &simplex);
    let best = if second.fx <= first.fx { &second } else { &first };
    let params = RiskNeutralParams {
        mu_tilde: BOUNDS[0].exp_clamped(best.x[0]),
        theta_tilde: BOUNDS[1].exp_clamped(best.x[1]),
    };
    let at_bound = [("mu_tilde", params.mu_tilde), ("theta_tilde", params.theta_tilde)]
        .iter()
        .zip(BOUNDS)
        .filter(|((_, v), b)| b.at_edge(*v, EDGE_REL))
        .map(|((name, _), _)| name.to_string())
        .collect();
    Ok(MomReport {
        params,
        loss: loss_unchecked(params.mu_tilde, params.theta_tilde, obs),
        day_losses: mom_day_losses(&params, obs)?,
        grid_start,
        iterations: first.iterations + second.iterations,
        converged: second.converged,
        at_bound,
    })
}
