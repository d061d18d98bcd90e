//! Expected delay of a packet that always buys among packets that always
//! sell, and closed-form bounds on it.

use crate::error::AnalysisError;

/// `E[d] = Σ_{s=1}^{q-1} s (s-1) (q-2)! / ((q-s-1)! (q-2)^s)`, with one
/// trading period per round.
pub fn exact_expected_delay(q: u32) -> Result<f64, AnalysisError> {
    if q < 3 {
        return Err(AnalysisError::domain("q", q as f64, "q >= 3"));
    }
    let m = (q - 2) as f64;
    let ln_m = libm::log(m);
    let ln_fact_m = libm::lgamma(m + 1.0);
    // Neumaier summation
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for s in 2..q {
        let sf = s as f64;
        let ln_term = libm::log(sf) + libm::log(sf - 1.0) + ln_fact_m - libm::lgamma((q - s) as f64) - sf * ln_m;
        let term = libm::exp(ln_term);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    Ok(sum + comp)
}

fn check_q(q: u32) -> Result<(), AnalysisError> {
    if q < 3 {
        return Err(AnalysisError::domain("q", q as f64, "q >= 3"));
    }
    Ok(())
}

fn check_positive(name: &'static str, x: f64, requirement: &'static str, min: f64) -> Result<(), AnalysisError> {
    if !(x.is_finite() && x >= min) {
        return Err(AnalysisError::domain(name, x, requirement));
    }
    Ok(())
}

/// `(-1 + 2b + 2 sqrt(2b (q-2))) / (2b)` for a real number of periods.
fn upper(q: u32, b: f64) -> f64 {
    let q = q as f64;
    (-1.0 + 2.0 * b + 2.0 * libm::sqrt(2.0 * b * (q - 2.0))) / (2.0 * b)
}

/// `(-1 + 2b + sqrt(1 - 8b + 4bq)) / (2b)`.
fn lower(q: u32, b: f64) -> Result<f64, AnalysisError> {
    let radicand = 1.0 - 8.0 * b + 4.0 * b * q as f64;
    if radicand < 0.0 {
        return Err(AnalysisError::domain("1 - 8b + 4bq", radicand, ">= 0"));
    }
    Ok((-1.0 + 2.0 * b + libm::sqrt(radicand)) / (2.0 * b))
}

pub fn delay_upper_bound(q: u32, b: u32) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("b", b as f64, "b >= 1", 1.0)?;
    Ok(upper(q, b as f64))
}

/// Upper bound when only one packet in every `c` is willing to sell:
/// `1 - c/2 + sqrt(2c (q-2))`.
pub fn delay_upper_bound_c(q: u32, c: f64) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("c", c, "c >= 1", 1.0)?;
    Ok(upper(q, 1.0 / c))
}

pub fn delay_lower_bound(q: u32, b: u32) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("b", b as f64, "b >= 1", 1.0)?;
    lower(q, b as f64)
}

/// `(2 - c)/2 + sqrt(c^2 - 8c + 4qc)/2`.
pub fn delay_lower_bound_c(q: u32, c: f64) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("c", c, "c >= 1", 1.0)?;
    lower(q, 1.0 / c)
}

/// Heuristic: `b` periods with one seller in `c` act like `b / c` periods.
pub fn heuristic_upper_bound(q: u32, b: u32, c: f64) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("b", b as f64, "b >= 1", 1.0)?;
    check_positive("c", c, "c >= 1", 1.0)?;
    Ok(upper(q, b as f64 / c))
}

pub fn heuristic_lower_bound(q: u32, b: u32, c: f64) -> Result<f64, AnalysisError> {
    check_q(q)?;
    check_positive("b", b as f64, "b >= 1", 1.0)?;
    check_positive("c", c, "c >= 1", 1.0)?;
    lower(q, b as f64 / c)
}

/// Lower bound, exact series (one period per round) and upper bound.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DelayBounds {
    pub lower: f64,
    pub exact: Option<f64>,
    pub upper: f64,
}

impl DelayBounds {
    /// The exact series is only defined for `b = 1, c = 1`; the bounds use
    /// the `b / c` heuristic when both differ from one.
    pub fn compute(q: u32, b: u32, c: f64) -> Result<Self, AnalysisError> {
        let exact = if b == 1 && c == 1.0 {
            Some(exact_expected_delay(q)?)
        } else {
            None
        };
        Ok(DelayBounds {
            lower: heuristic_lower_bound(q, b, c)?,
            exact,
            upper: heuristic_upper_bound(q, b, c)?,
        })
    }
}

/// Mean of the minimum of `k` independent uniforms on `[0, U]`: `U / (k+1)`.
pub fn expected_min_uniform(k: u32, u: f64) -> Result<f64, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::domain("k", 0.0, "k >= 1"));
    }
    if !(u.is_finite() && u > 0.0) {
        return Err(AnalysisError::domain("U", u, "U > 0"));
    }
    Ok(u / (k as f64 + 1.0))
}
