//! Special functions behind the Student-t predictive: log-gamma ratios, the
//! regularized incomplete beta function and the t CDF, density and quantile.

use std::f64::consts::PI;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, RiskError};

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const STIRLING_THRESHOLD: f64 = 50.0;

/// `ln Γ(x + d) - ln Γ(x)` for `x > 0`, `d >= 0`.
///
/// For large `x` the two log-gammas are each ~`x ln x` and their difference
/// is computed from the Stirling series directly instead of by subtraction.
pub fn ln_gamma_ratio(x: f64, d: f64) -> f64 {
    if x < STIRLING_THRESHOLD {
        return ln_gamma(x + d) - ln_gamma(x);
    }
    let y = x + d;
    (x - 0.5) * (d / x).ln_1p() + d * y.ln() - d + stirling_tail(y) - stirling_tail(x)
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, large) = if a < b { (a, b) } else { (b, a) };
    if large >= STIRLING_THRESHOLD {
        ln_gamma(small) - ln_gamma_ratio(large, small)
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// `x` and `y = 1 - x` are both supplied so callers that know the
/// complement exactly (as the t CDF does) keep full relative precision in
/// whichever one is tiny.
pub fn beta_reg(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if y <= 0.0 {
        return Ok(1.0);
    }
    let ln_x = if x > 0.5 { (-y).ln_1p() } else { x.ln() };
    let ln_y = if y > 0.5 { (-x).ln_1p() } else { y.ln() };
    let front = (a * ln_x + b * ln_y - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(a, b, x)? / a)
    } else {
        Ok(1.0 - front * beta_cf(b, a, y)? / b)
    }
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let clamp = |v: f64| if v.abs() < FPMIN { FPMIN } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(RiskError::Numerical(format!(
        "incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )))
}

fn check_df(df: f64) -> Result<()> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(RiskError::DegreesOfFreedom { df, min: 0.0 });
    }
    Ok(())
}

/// CDF of the standard Student-t distribution with `df` degrees of freedom.
pub fn t_cdf(df: f64, t: f64) -> Result<f64> {
    check_df(df)?;
    if t.is_nan() {
        return Err(RiskError::Numerical("t_cdf evaluated at NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    // One-sided tail mass P(T > |t|).
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, x, y)?;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Density of the standard Student-t distribution.
pub fn t_pdf(df: f64, t: f64) -> f64 {
    let ln_norm = ln_gamma_ratio(0.5 * df, 0.5) - 0.5 * (PI * df).ln();
    (ln_norm - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
}

/// The `p`-quantile of the standard Student-t distribution.
///
/// Solves `t_cdf(df, q) = p` by safeguarded Newton iteration inside a bracket
/// built from the normal and Cauchy quantiles, which enclose every t quantile
/// with `df >= 1` (the bracket is widened for `df < 1`).
pub fn t_quantile(df: f64, p: f64) -> Result<f64> {
    check_df(df)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(RiskError::Range(p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p < 0.5 {
        return t_quantile(df, 1.0 - p).map(|q| -q);
    }

    let z = normal_quantile(p);
    let cauchy = (PI * (p - 0.5)).tan();
    let mut lo = z.min(cauchy);
    let mut hi = z.max(cauchy);
    while t_cdf(df, hi)? < p {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(RiskError::Numerical(format!("cannot bracket t quantile df={df} p={p}")));
        }
    }
    if t_cdf(df, lo)? > p {
        lo = 0.0;
    }

    let mut q = if df > 2.0 { z * (df / (df - 2.0)).sqrt() } else { z };
    if !(q > lo && q < hi) {
        q = 0.5 * (lo + hi);
    }
    for _ in 0..500 {
        let f = t_cdf(df, q)? - p;
        if f == 0.0 {
            return Ok(q);
        }
        if f > 0.0 {
            hi = q;
        } else {
            lo = q;
        }
        let step = f / t_pdf(df, q);
        let mut next = q - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        }
        if (next - q).abs() <= 4.0 * f64::EPSILON * q.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        q = next;
    }
    Err(RiskError::Numerical(format!("t quantile did not converge df={df} p={p}")))
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

pub fn normal_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}
