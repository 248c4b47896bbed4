//! `ln I_nu(x)` for real order `nu > -1` and `x > 0`, evaluated entirely in
//! the log domain.
//!
//! Three regimes:
//! - ascending power series for `x <= SERIES_MAX_X` (all terms positive);
//! - Debye's uniform asymptotic expansion for `nu >= UNIFORM_MIN_ORDER`;
//! - Hankel's large-argument expansion for small orders once `x >= nu^2`,
//!   falling back to the power series between the two.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SERIES_MAX_X: f64 = 30.0;
const UNIFORM_MIN_ORDER: f64 = 35.0;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub fn log_bessel_i(order: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive and finite, got {x}")));
    }
    if !(order > -1.0) || !order.is_finite() {
        return Err(Error::Domain(format!("Bessel order must exceed -1, got {order}")));
    }
    Ok(log_bessel_i_unchecked(order, x))
}

pub(crate) fn log_bessel_i_unchecked(nu: f64, x: f64) -> f64 {
    if nu >= UNIFORM_MIN_ORDER {
        return uniform(nu, x);
    }
    if x <= SERIES_MAX_X {
        return series(nu, x);
    }
    if x >= nu * nu {
        if let Some(v) = hankel(nu, x) {
            return v;
        }
    }
    series(nu, x)
}

/// `sum_k (x/2)^{2k+nu} / (k! Gamma(k+nu+1))`, accumulated relative to the
/// largest term seen so far.
fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let ln_t0 = nu * half.ln() - ln_gamma(nu + 1.0);
    // terms relative to a running scale to stay in range for large x
    let mut ln_scale = 0.0;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        if term > 1e200 {
            let s = term.ln();
            ln_scale += s;
            sum /= term;
            term = 1.0;
        }
        sum += term;
        if term < 1e-17 * sum && k > half {
            break;
        }
        k += 1.0;
    }
    ln_t0 + ln_scale + sum.ln()
}

/// Debye coefficients `u_k(p)` as polynomials in `p`, lowest power first.
const DEBYE: [&[f64]; 7] = [
    &[1.0],
    &[0.0, 3.0 / 24.0, 0.0, -5.0 / 24.0],
    &[0.0, 0.0, 81.0 / 1152.0, 0.0, -462.0 / 1152.0, 0.0, 385.0 / 1152.0],
    &[
        0.0,
        0.0,
        0.0,
        30375.0 / 414720.0,
        0.0,
        -369603.0 / 414720.0,
        0.0,
        765765.0 / 414720.0,
        0.0,
        -425425.0 / 414720.0,
    ],
    &[
        0.0,
        0.0,
        0.0,
        0.0,
        4465125.0 / 39813120.0,
        0.0,
        -94121676.0 / 39813120.0,
        0.0,
        349922430.0 / 39813120.0,
        0.0,
        -446185740.0 / 39813120.0,
        0.0,
        185910725.0 / 39813120.0,
    ],
    &[
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        1519035525.0 / 6688604160.0,
        0.0,
        -49286948607.0 / 6688604160.0,
        0.0,
        284499769554.0 / 6688604160.0,
        0.0,
        -614135872350.0 / 6688604160.0,
        0.0,
        566098157625.0 / 6688604160.0,
        0.0,
        -188699385875.0 / 6688604160.0,
    ],
    &[
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        2757049477875.0 / 4815794995200.0,
        0.0,
        -127577298354750.0 / 4815794995200.0,
        0.0,
        1050760774457901.0 / 4815794995200.0,
        0.0,
        -3369032068261860.0 / 4815794995200.0,
        0.0,
        5104696716244125.0 / 4815794995200.0,
        0.0,
        -3685299006138750.0 / 4815794995200.0,
        0.0,
        1023694168371875.0 / 4815794995200.0,
    ],
];

fn poly(coeffs: &[f64], p: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * p + c)
}

/// `I_nu(nu z) ~ e^{nu eta} / (sqrt(2 pi nu) (1+z^2)^{1/4}) sum_k u_k(p) / nu^k`.
fn uniform(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let root = z.hypot(1.0);
    let p = 1.0 / root;
    // eta = sqrt(1+z^2) + ln(z / (1 + sqrt(1+z^2)))
    let eta = root + z.ln() - root.ln_1p();
    let mut sum = 0.0;
    let mut nu_pow = 1.0;
    for coeffs in DEBYE {
        sum += poly(coeffs, p) / nu_pow;
        nu_pow *= nu;
    }
    nu * eta - 0.5 * (LN_2PI + nu.ln()) - 0.25 * (z * z).ln_1p() + sum.ln()
}

/// `I_nu(x) ~ e^x / sqrt(2 pi x) sum_k (-1)^k a_k(nu) / x^k`, summed until
/// the terms fall below double precision. Returns `None` if they start
/// growing first.
fn hankel(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() > term.abs() && k > 1.0 {
            return None;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
        if k > 200.0 {
            return None;
        }
    }
    Some(x - 0.5 * (LN_2PI + x.ln()) + sum.ln())
}
