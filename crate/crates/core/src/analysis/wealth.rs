//! Wealth rates (total packet value delivered per round) of a queue shared
//! by `n_e` economy and `n_b` business packets, each flow with window one.

use num_rational::Ratio;

use crate::error::AnalysisError;
use crate::money::{Money, MICROS_PER_UNIT};

pub type Rational = Ratio<i128>;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct WealthScenarioParams {
    pub n_e: u32,
    pub n_b: u32,
    pub v_e: Money,
    pub v_b: Money,
    pub c_e: Money,
    pub c_b: Money,
    /// Largest delay any packet accepts.
    pub d_cap: u32,
}

fn r(m: Money) -> Rational {
    Rational::new(m.micros() as i128, MICROS_PER_UNIT as i128)
}

fn int(x: u32) -> Rational {
    Rational::from_integer(x as i128)
}

impl WealthScenarioParams {
    pub fn q(&self) -> u32 {
        self.n_e + self.n_b
    }
}

/// Everyone waits exactly `q` rounds:
/// `(n_e/q)(V_e − c_e q) + (n_b/q)(V_b − c_b q)`.
pub fn wealth_no_trades(p: &WealthScenarioParams) -> Result<Rational, AnalysisError> {
    let q = p.q();
    if q == 0 {
        return Err(AnalysisError::domain("q", 0.0, "n_e + n_b >= 1"));
    }
    let qr = int(q);
    Ok(int(p.n_e) / qr * (r(p.v_e) - r(p.c_e) * qr) + int(p.n_b) / qr * (r(p.v_b) - r(p.c_b) * qr))
}

/// Wealth rate when business packets see delay `d_b`: they are served at
/// rate `n_b / d_b`, economy packets get the rest and wait
/// `d_e = n_e / r_e`. Fails when the economy share vanishes or `d_e`
/// exceeds the delay cap.
pub fn wealth_for_business_delay(p: &WealthScenarioParams, d_b: Rational) -> Result<Rational, AnalysisError> {
    if d_b <= Rational::from_integer(0) {
        return Err(AnalysisError::domain("d_b", 0.0, "d_b > 0"));
    }
    let r_b = int(p.n_b) / d_b;
    let r_e = Rational::from_integer(1) - r_b;
    if p.n_e == 0 {
        if r_e != Rational::from_integer(0) {
            return Err(AnalysisError::Infeasible("business rate must fill the link"));
        }
        return Ok(r_b * (r(p.v_b) - r(p.c_b) * d_b));
    }
    if r_e <= Rational::from_integer(0) {
        return Err(AnalysisError::Infeasible("economy packets get no bandwidth"));
    }
    let d_e = int(p.n_e) / r_e;
    if d_e > int(p.d_cap) {
        return Err(AnalysisError::Infeasible("economy delay exceeds the cap"));
    }
    Ok(r_e * (r(p.v_e) - r(p.c_e) * d_e) + r_b * (r(p.v_b) - r(p.c_b) * d_b))
}

/// Economy packets absorb delay up to the cap `D`:
/// `(n_e/D)(V_e − c_e D) + ((D − n_e)/D)(V_b − c_b n_b D/(D − n_e))`.
pub fn wealth_ideal(p: &WealthScenarioParams) -> Result<Rational, AnalysisError> {
    if p.d_cap <= p.n_e {
        return Err(AnalysisError::domain("d_cap", p.d_cap as f64, "d_cap > n_e"));
    }
    let d = int(p.d_cap);
    let rest = d - int(p.n_e);
    let d_b = int(p.n_b) * d / rest;
    Ok(int(p.n_e) / d * (r(p.v_e) - r(p.c_e) * d) + rest / d * (r(p.v_b) - r(p.c_b) * d_b))
}

/// [`wealth_ideal`] with the business delay raised to at least `d_b_min`
/// (a packet needs one round at the head plus one in service).
pub fn wealth_ideal_feasible(p: &WealthScenarioParams, d_b_min: u32) -> Result<Rational, AnalysisError> {
    if p.d_cap <= p.n_e {
        return Err(AnalysisError::domain("d_cap", p.d_cap as f64, "d_cap > n_e"));
    }
    let d = int(p.d_cap);
    let ideal = int(p.n_b) * d / (d - int(p.n_e));
    wealth_for_business_delay(p, ideal.max(int(d_b_min)))
}
