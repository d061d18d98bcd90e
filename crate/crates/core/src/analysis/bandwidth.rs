use num_rational::Ratio;

use crate::error::AnalysisError;

/// Per-packet service rate and delay of each class.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BandwidthShare {
    pub economy_rate: Ratio<i64>,
    pub economy_delay: Ratio<i64>,
    pub business_rate: Ratio<i64>,
    pub business_delay: Ratio<i64>,
}

/// Economy packets are served just fast enough to meet `economy_deadline`;
/// business packets share what is left equally. Rates sum to one.
pub fn bandwidth_share_rates(n_economy: u32, economy_deadline: u32, n_business: u32) -> Result<BandwidthShare, AnalysisError> {
    let zero = Ratio::from_integer(0);
    if n_economy + n_business == 0 {
        return Err(AnalysisError::Infeasible("no packets"));
    }
    if n_business == 0 {
        let rate = Ratio::new(1, n_economy as i64);
        return Ok(BandwidthShare {
            economy_rate: rate,
            economy_delay: rate.recip(),
            business_rate: zero,
            business_delay: zero,
        });
    }
    if n_economy == 0 {
        let rate = Ratio::new(1, n_business as i64);
        return Ok(BandwidthShare {
            economy_rate: zero,
            economy_delay: zero,
            business_rate: rate,
            business_delay: rate.recip(),
        });
    }
    if economy_deadline == 0 {
        return Err(AnalysisError::domain("economy deadline", 0.0, "> 0"));
    }
    let economy_rate = Ratio::new(1, economy_deadline as i64);
    let residual = Ratio::from_integer(1) - economy_rate * n_economy as i64;
    if residual <= zero {
        return Err(AnalysisError::Infeasible("economy packets leave no bandwidth"));
    }
    let business_rate = residual / n_business as i64;
    Ok(BandwidthShare {
        economy_rate,
        economy_delay: Ratio::from_integer(economy_deadline as i64),
        business_rate,
        business_delay: business_rate.recip(),
    })
}
