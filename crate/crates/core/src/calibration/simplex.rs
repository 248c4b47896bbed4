//! Nelder–Mead minimization on unconstrained coordinates.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iter: usize,
    /// Stop once every vertex lies within `xtol` of the best (max-norm)...
    pub xtol: f64,
    /// ...and the vertex values agree to `ftol` relative, absolute near zero.
    pub ftol: f64,
    /// Offset of the initial vertices along each axis.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            xtol: 1e-10,
            ftol: 1e-14,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite values are treated as `+inf`, so the
/// objective may signal an infeasible point by returning NaN.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i] != 0.0 { opts.initial_step * p[i].abs().max(1.0) } else { opts.initial_step };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];

    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        let fspread = (vals[n] - vals[0]).abs();
        if spread <= opts.xtol && fspread <= opts.ftol * (vals[0].abs() + 1.0) {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let toward = |t: &mut Vec<f64>, coef: f64, worst: &[f64], c: &[f64]| {
            for i in 0..n {
                t[i] = c[i] + coef * (worst[i] - c[i]);
            }
        };

        toward(&mut trial, -1.0, &pts[n], &centroid);
        let fr = eval(&trial);
        if fr < vals[0] {
            let reflected = trial.clone();
            toward(&mut trial, -2.0, &pts[n], &centroid);
            let fe = eval(&trial);
            if fe < fr {
                pts[n] = trial.clone();
                vals[n] = fe;
            } else {
                pts[n] = reflected;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = trial.clone();
            vals[n] = fr;
            continue;
        }
        // contraction, outside if the reflection improved on the worst
        let coef = if fr < vals[n] { -0.5 } else { 0.5 };
        toward(&mut trial, coef, &pts[n], &centroid);
        let fc = eval(&trial);
        if fc < vals[n].min(fr) {
            pts[n] = trial.clone();
            vals[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for k in 1..=n {
            for i in 0..n {
                pts[k][i] = best[i] + 0.5 * (pts[k][i] - best[i]);
            }
            vals[k] = eval(&pts[k]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("simplex has vertices");
    SimplexResult {
        x: pts[best].clone(),
        fx: vals[best],
        iterations,
        converged,
    }
}
