//! Static tracking portfolios: perpetually rolled futures positions combined
//! with a money-market account, weighted by equality-constrained least
//! squares on either normalized prices or daily returns.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::normalize_to_100;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::simulation::{simple_returns, FuturesPanel};

/// Relative column norm below which a reduced column counts as dependent.
const RANK_TOL: f64 = 1e-10;

/// Dollar value of perpetually holding the rank-`k` contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolledSeries {
    pub maturity_rank: usize,
    pub values: Vec<f64>,
}

/// Holds `x0 / f` units of the rank-`rank` contract and, whenever a
/// different contract takes that rank, reinvests the full position value in
/// it. No cash enters or leaves at the rolls.
pub fn build_rolled_series(panel: &FuturesPanel, rank: usize, x0: f64) -> Result<RolledSeries> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!("initial value must be positive, got {x0}")));
    }
    let Some(first) = panel.rows.first() else {
        return Err(Error::Empty("panel"));
    };
    let pick = |row: &crate::simulation::CurveRow| {
        row.tradable(rank).copied().ok_or_else(|| Error::DataGap {
            day: row.day,
            detail: format!("no tradable contract at rank {rank}"),
        })
    };
    let mut held = pick(first)?;
    let mut units = x0 / held.price;
    let mut values = Vec::with_capacity(panel.len());
    values.push(x0);
    for (j, row) in panel.rows.iter().enumerate().skip(1) {
        let mark = row.quote(held.contract).ok_or_else(|| Error::DataGap {
            day: row.day,
            detail: format!("missing price for held contract {}", held.contract),
        })?;
        let value = units * mark.price;
        values.push(value);
        if j + 1 < panel.len() {
            let front = pick(row)?;
            if front.contract != held.contract {
                units = value / front.price;
                held = front;
            }
        }
    }
    Ok(RolledSeries {
        maturity_rank: rank,
        values,
    })
}

/// Columns of a constrained least-squares fit. Column 0 is the money market.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub labels: Vec<String>,
}

impl DesignMatrix {
    pub fn new(columns: Vec<Vec<f64>>, target: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Empty("design matrix columns"));
        }
        if labels.len() != columns.len() {
            return Err(Error::LengthMismatch {
                expected: columns.len(),
                actual: labels.len(),
            });
        }
        if target.is_empty() {
            return Err(Error::Empty("target"));
        }
        for c in &columns {
            if c.len() != target.len() {
                return Err(Error::LengthMismatch {
                    expected: target.len(),
                    actual: c.len(),
                });
            }
        }
        Ok(Self {
            columns,
            target,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    /// `sum_i w_i column_i`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        combine(&self.columns, weights)
    }
}

fn combine(columns: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = columns.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| columns.iter().zip(weights).map(|(c, w)| w * c[i]).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticWeights {
    /// Column labels, money market first.
    pub labels: Vec<String>,
    /// Weights aligned with `labels`; they sum to one.
    pub weights: Vec<f64>,
    /// In-sample RMSE (percent for price and return fits; raw units from
    /// [`solve_constrained_ls`]).
    pub in_rmse: f64,
    /// Out-of-sample RMSE with the out-of-sample window re-normalized to 100.
    pub out_rmse: Option<f64>,
    /// Out-of-sample RMSE continuing the in-sample normalization.
    pub out_rmse_continued: Option<f64>,
}

impl StaticWeights {
    pub fn w0(&self) -> f64 {
        self.weights[0]
    }

    pub fn futures_weights(&self) -> &[f64] {
        &self.weights[1..]
    }
}

/// Minimizes `||C w - d||^2` subject to `sum w = 1`.
///
/// The constraint is eliminated by substituting `w0 = 1 - sum_{i>0} w_i`,
/// which leaves the unconstrained problem
/// `min ||(C_i - C_0) v - (d - C_0)||^2`, solved by Householder QR.
pub fn solve_constrained_ls(dm: &DesignMatrix) -> Result<StaticWeights> {
    let n = dm.rows();
    let k = dm.columns.len() - 1;
    let base = &dm.columns[0];
    let mut weights = vec![1.0];
    if k > 0 {
        let reduced = DMatrix::from_fn(n, k, |i, j| dm.columns[j + 1][i] - base[i]);
        let rhs = DVector::from_fn(n, |i, _| dm.target[i] - base[i]);
        check_rank(&reduced, &dm.labels)?;
        let qr = reduced.qr();
        let qtb = qr.q().transpose() * rhs;
        let v = qr.r().solve_upper_triangular(&qtb).ok_or_else(|| Error::RankDeficient {
            columns: dm.labels.clone(),
        })?;
        let rest: f64 = v.iter().sum();
        weights = std::iter::once(1.0 - rest).chain(v.iter().copied()).collect();
    }
    let fitted = dm.combine(&weights);
    Ok(StaticWeights {
        labels: dm.labels.clone(),
        weights,
        in_rmse: evaluate_rmse(&fitted, &dm.target)?,
        out_rmse: None,
        out_rmse_continued: None,
    })
}

/// Flags reduced columns that are (numerically) spanned by earlier ones.
fn check_rank(reduced: &DMatrix<f64>, labels: &[String]) -> Result<()> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..reduced.ncols() {
        let col = reduced.column(j).into_owned();
        let norm = col.norm();
        let mut resid = col.clone();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&resid);
                resid -= q * p;
            }
        }
        let rn = resid.norm();
        if norm == 0.0 || rn <= RANK_TOL * norm {
            dependent.push(labels[j + 1].clone());
        } else {
            basis.push(resid / rn);
        }
    }
    if dependent.is_empty() {
        Ok(())
    } else {
        let mut columns = vec![labels[0].clone()];
        columns.extend(dependent);
        Err(Error::RankDeficient { columns })
    }
}

/// `sqrt(sum (target - portfolio)^2 / n)`.
pub fn evaluate_rmse(portfolio: &[f64], target: &[f64]) -> Result<f64> {
    if portfolio.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            actual: portfolio.len(),
        });
    }
    if target.is_empty() {
        return Err(Error::Empty("rmse input"));
    }
    let sse: f64 = portfolio.iter().zip(target).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok((sse / target.len() as f64).sqrt())
}

/// Aligned inputs for the static fits: target index, money-market account,
/// and rolled futures series, all over the same days. Days `0..split` are in
/// sample; `split..` out of sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingData {
    pub target: Vec<f64>,
    pub money_market: Vec<f64>,
    pub rolled: Vec<RolledSeries>,
    pub split: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    Price,
    Return,
}

impl TrackingData {
    pub fn new(target: Vec<f64>, money_market: Vec<f64>, rolled: Vec<RolledSeries>, split: usize) -> Result<Self> {
        let n = target.len();
        if money_market.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: money_market.len(),
            });
        }
        for r in &rolled {
            if r.values.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: r.values.len(),
                });
            }
        }
        if split < 2 || split > n {
            return Err(Error::Domain(format!("split {split} outside 2..={n}")));
        }
        Ok(Self {
            target,
            money_market,
            rolled,
            split,
        })
    }

    fn series(&self, rank: usize) -> Result<&RolledSeries> {
        self.rolled
            .iter()
            .find(|r| r.maturity_rank == rank)
            .ok_or_else(|| Error::Domain(format!("no rolled series for rank {rank}")))
    }

    fn columns(&self, ranks: &[usize]) -> Result<(Vec<&[f64]>, Vec<String>)> {
        let mut cols: Vec<&[f64]> = vec![&self.money_market];
        let mut labels = vec!["cash".to_string()];
        for &r in ranks {
            cols.push(&self.series(r)?.values);
            labels.push(format!("{r}-m"));
        }
        Ok((cols, labels))
    }

    pub fn has_out_of_sample(&self) -> bool {
        self.split < self.target.len()
    }
}

fn normalized(window: &[f64]) -> Result<Vec<f64>> {
    normalize_to_100(window, 0)
}

/// Fits weights on in-sample dollar values normalized to 100 on the first
/// day and reports in/out-of-sample price RMSE.
pub fn price_tracking_portfolio(data: &TrackingData, ranks: &[usize]) -> Result<StaticWeights> {
    let (cols, labels) = data.columns(ranks)?;
    let s = data.split;
    let in_cols = cols.iter().map(|c| normalized(&c[..s])).collect::<Result<Vec<_>>>()?;
    let in_target = normalized(&data.target[..s])?;
    let dm = DesignMatrix::new(in_cols, in_target, labels)?;
    let mut out = solve_constrained_ls(&dm)?;
    if data.has_out_of_sample() {
        let renorm = cols.iter().map(|c| normalized(&c[s..])).collect::<Result<Vec<_>>>()?;
        let target = normalized(&data.target[s..])?;
        out.out_rmse = Some(evaluate_rmse(&combine(&renorm, &out.weights), &target)?);

        let cont = cols
            .iter()
            .map(|c| normalized(c).map(|v| v[s..].to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let target = normalized(&data.target)?[s..].to_vec();
        out.out_rmse_continued = Some(evaluate_rmse(&combine(&cont, &out.weights), &target)?);
    }
    Ok(out)
}

/// Fits weights on simple daily returns (money-market return included as a
/// column) and reports return RMSE in percent.
///
/// In-sample returns run over days `0..split`; out-of-sample returns start
/// with the return into the first out-of-sample day.
pub fn return_tracking_portfolio(data: &TrackingData, ranks: &[usize]) -> Result<StaticWeights> {
    let (cols, labels) = data.columns(ranks)?;
    let s = data.split;
    let rets: Vec<Vec<f64>> = cols.iter().map(|c| simple_returns(c)).collect();
    let target = simple_returns(&data.target);
    let in_cols = rets.iter().map(|r| r[..s - 1].to_vec()).collect();
    let dm = DesignMatrix::new(in_cols, target[..s - 1].to_vec(), labels)?;
    let mut out = solve_constrained_ls(&dm)?;
    out.in_rmse *= 100.0;
    if data.has_out_of_sample() {
        let out_cols: Vec<Vec<f64>> = rets.iter().map(|r| r[s - 1..].to_vec()).collect();
        let rmse = 100.0 * evaluate_rmse(&combine(&out_cols, &out.weights), &target[s - 1..])?;
        out.out_rmse = Some(rmse);
        out.out_rmse_continued = Some(rmse);
    }
    Ok(out)
}

/// All non-empty subsets of `ranks`, by size then lexicographically.
pub fn all_subsets(ranks: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=ranks.len() {
        combinations(ranks, size, 0, &mut Vec::new(), &mut out);
    }
    out
}

fn combinations(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        cur.push(items[i]);
        combinations(items, size, i + 1, cur, out);
        cur.pop();
    }
}

/// The fifteen subsets of the 1-, 2-, 6- and 7-month contracts.
pub fn default_subsets() -> Vec<Vec<usize>> {
    all_subsets(&[1, 2, 6, 7])
}

/// Fits every subset independently; failures are reported per subset.
pub fn fit_subsets(
    data: &TrackingData,
    subsets: &[Vec<usize>],
    mode: FitMode,
    exec: Exec,
) -> Vec<Result<StaticWeights>> {
    exec.map_slice(subsets, |ranks| match mode {
        FitMode::Price => price_tracking_portfolio(data, ranks),
        FitMode::Return => return_tracking_portfolio(data, ranks),
    })
}
