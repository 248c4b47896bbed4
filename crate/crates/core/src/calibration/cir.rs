//! CIR transition density and maximum-likelihood fit of `(mu, theta, sigma)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bessel::log_bessel_i_unchecked;
use super::simplex::{nelder_mead, SimplexOptions};
use super::{Bound, EDGE_REL, MU_BOUND, SIGMA_BOUND, THETA_BOUND};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::HistoricalParams;
use crate::rng::stream_rng;

pub const MIN_SERIES_LEN: usize = 100;

/// Per-step constants shared by every transition.
#[derive(Debug, Clone, Copy)]
struct Transition {
    decay: f64,
    var: f64,
    q: f64,
}

impl Transition {
    fn new(p: &HistoricalParams, dt: f64) -> Result<Self> {
        p.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        let decay = (-p.mu * dt).exp();
        let var = p.sigma * p.sigma * -(-p.mu * dt).exp_m1() / (2.0 * p.mu);
        let q = 2.0 * p.mu * p.theta / (p.sigma * p.sigma) - 1.0;
        if !(q > -1.0) || !q.is_finite() || !(var > 0.0) {
            return Err(Error::DegenerateParameters(format!(
                "Bessel order {q} and conditional scale {var} give an improper density"
            )));
        }
        Ok(Self { decay, var, q })
    }

    fn ln_density(&self, s_next: f64, s_prev: f64) -> f64 {
        let u = s_prev * self.decay;
        let x = 2.0 * (s_next * u).sqrt() / self.var;
        -self.var.ln() - (s_next + u) / self.var + 0.5 * self.q * (s_next / u).ln() + log_bessel_i_unchecked(self.q, x)
    }
}

/// Bessel order of the transition density, `2 mu theta / sigma^2 - 1`.
pub fn bessel_order(p: &HistoricalParams) -> f64 {
    2.0 * p.mu * p.theta / (p.sigma * p.sigma) - 1.0
}

/// `ln f(s_next | s_prev)` for a CIR step of length `dt` years.
pub fn cir_log_density(s_next: f64, s_prev: f64, p: &HistoricalParams, dt: f64) -> Result<f64> {
    if !(s_next > 0.0) || !(s_prev > 0.0) {
        return Err(Error::Domain(format!(
            "density needs positive levels, got {s_next} given {s_prev}"
        )));
    }
    Ok(Transition::new(p, dt)?.ln_density(s_next, s_prev))
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.len() < 2 {
        return Err(Error::Empty("series needs at least two observations"));
    }
    if let Some(i) = series.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain(format!("observation {i} is not positive: {}", series[i])));
    }
    Ok(())
}

/// Mean log density over consecutive pairs, in nats per observation.
pub fn avg_log_likelihood(series: &[f64], p: &HistoricalParams, dt: f64) -> Result<f64> {
    check_series(series)?;
    let t = Transition::new(p, dt)?;
    let sum: f64 = series.windows(2).map(|w| t.ln_density(w[1], w[0])).sum();
    Ok(sum / (series.len() - 1) as f64)
}

/// Moment estimate from the Euler discretization: regress
/// `dS / sqrt(S)` on `dt / sqrt(S)` and `dt sqrt(S)` without intercept.
pub fn cir_initial_guess(series: &[f64], dt: f64) -> Result<HistoricalParams> {
    check_series(series)?;
    let n = series.len() - 1;
    let mut x = DMatrix::zeros(n, 2);
    let mut y = DVector::zeros(n);
    for (i, w) in series.windows(2).enumerate() {
        let r = w[0].sqrt();
        x[(i, 0)] = dt / r;
        x[(i, 1)] = dt * r;
        y[i] = (w[1] - w[0]) / r;
    }
    let coef = x
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::DegenerateParameters(e.to_string()))?;
    let resid = &y - &x * &coef;
    let sigma = (resid.norm_squared() / n as f64 / dt).sqrt();
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let (mut mu, mut theta) = (-coef[1], 0.0);
    if mu > 0.0 {
        theta = coef[0] / mu;
    }
    if !(mu > 0.0) || !(theta > 0.0) || !theta.is_finite() {
        mu = 1.0;
        theta = mean;
    }
    HistoricalParams::new(MU_BOUND.clamp(mu), THETA_BOUND.clamp(theta), SIGMA_BOUND.clamp(sigma.max(1e-3)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Simplex iterations per run.
    pub max_iter: usize,
    /// Jittered restarts around the first optimum.
    pub restarts: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            restarts: 3,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleReport {
    pub params: HistoricalParams,
    /// Nats per observation.
    pub avg_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start: HistoricalParams,
    pub start_loglik: f64,
    pub restarts: usize,
    /// Names of parameters that ended at a bound.
    pub at_bound: Vec<String>,
}

const BOUNDS: [Bound; 3] = [MU_BOUND, THETA_BOUND, SIGMA_BOUND];

fn params_of(z: &[f64]) -> HistoricalParams {
    HistoricalParams {
        mu: BOUNDS[0].exp_clamped(z[0]),
        theta: BOUNDS[1].exp_clamped(z[1]),
        sigma: BOUNDS[2].exp_clamped(z[2]),
    }
}

fn log_coords(p: &HistoricalParams) -> Vec<f64> {
    vec![BOUNDS[0].to_log(p.mu), BOUNDS[1].to_log(p.theta), BOUNDS[2].to_log(p.sigma)]
}

/// Maximizes the average log-likelihood with a simplex search over log
/// parameters clamped to `MU_BOUND`, `THETA_BOUND`, `SIGMA_BOUND`.
///
/// One run starts at `init`; `opts.restarts` further runs start from its
/// optimum with each log-coordinate perturbed by `N(0, 0.2^2)` noise drawn
/// from stream `k` of `opts.seed`. The best run wins.
pub fn mle_fit(series: &[f64], dt: f64, init: &HistoricalParams, opts: &MleOptions) -> Result<MleReport> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::Domain(format!(
            "likelihood fit needs at least {MIN_SERIES_LEN} observations, got {}",
            series.len()
        )));
    }
    check_series(series)?;
    let start_loglik = avg_log_likelihood(series, init, dt)?;
    let objective = |z: &[f64]| match avg_log_likelihood(series, &params_of(z), dt) {
        Ok(v) => -v,
        Err(_) => f64::NAN,
    };
    let simplex = SimplexOptions {
        max_iter: opts.max_iter,
        xtol: 1e-9,
        ftol: 1e-13,
        initial_step: 0.1,
    };
    let first = nelder_mead(objective, &log_coords(init), &simplex);
    let starts: Vec<Vec<f64>> = (1..=opts.restarts as u64)
        .map(|k| {
            let mut rng = stream_rng(opts.seed, k);
            first
                .x
                .iter()
                .map(|z| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    z + 0.2 * e
                })
                .collect()
        })
        .collect();
    let runs = opts.exec.map_slice(&starts, |z0| nelder_mead(objective, z0, &simplex));
    let iterations = first.iterations + runs.iter().map(|r| r.iterations).sum::<usize>();
    let best = std::iter::once(&first)
        .chain(&runs)
        .min_by(|a, b| a.fx.total_cmp(&b.fx))
        .expect("at least one run");

    let mut params = params_of(&best.x);
    let mut avg_loglik = -best.fx;
    if !(avg_loglik >= start_loglik) {
        params = *init;
        avg_loglik = start_loglik;
    }
    let at_bound = [("mu", params.mu), ("theta", params.theta), ("sigma", params.sigma)]
        .iter()
        .zip(BOUNDS)
        .filter(|((_, v), b)| b.at_edge(*v, EDGE_REL))
        .map(|((name, _), _)| name.to_string())
        .collect();
    Ok(MleReport {
        params,
        avg_loglik,
        iterations,
        converged: best.converged,
        start: *init,
        start_loglik,
        restarts: opts.restarts,
        at_bound,
    })
}
