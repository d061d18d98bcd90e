//! Per-run statistics shared by the economy engine and the baseline queue runner.

use alloc::vec::Vec;

use crate::money::Money;
use crate::packet::{FlowId, Rounds};

/// Delay and value totals for one flow. Sums are exact so flows can be pooled.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlowReport {
    pub flow: FlowId,
    pub delivered: u64,
    pub delay_sum: u64,
    pub delay_sq_sum: u128,
    /// Sum of delivered packet values, in micro-units.
    pub value_sum: i128,
    pub max_delay: Rounds,
    /// Deliveries whose delay exceeded the flow's deadline.
    pub late: u64,
}

impl FlowReport {
    pub fn new(flow: FlowId) -> Self {
        FlowReport {
            flow,
            ..FlowReport::default()
        }
    }

    pub fn record(&mut self, delay: Rounds, value: Money, deadline: Rounds) {
        self.delivered += 1;
        self.delay_sum += delay as u64;
        self.delay_sq_sum += (delay as u128) * (delay as u128);
        self.value_sum += value.micros() as i128;
        self.max_delay = self.max_delay.max(delay);
        if delay > deadline {
            self.late += 1;
        }
    }

    pub fn delay_stats(&self) -> DelayStats {
        DelayStats::from_sums(self.delivered, self.delay_sum, self.delay_sq_sum)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DelayStats {
    pub count: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl DelayStats {
    pub fn from_sums(count: u64, sum: u64, sq_sum: u128) -> Self {
        if count == 0 {
            return DelayStats {
                count: 0,
                mean: f64::NAN,
                stddev: f64::NAN,
            };
        }
        let n = count as f64;
        let mean = sum as f64 / n;
        // n * sumsq - sum^2 computed exactly before converting
        let num = (count as u128) * sq_sum - (sum as u128) * (sum as u128);
        let var = num as f64 / (n * n);
        DelayStats {
            count,
            mean,
            stddev: libm::sqrt(var),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimulationReport {
    pub rounds: u64,
    pub measured_rounds: u64,
    pub flows: Vec<FlowReport>,
    /// Total delivered value per measured round.
    pub wealth_rate: f64,
    pub trade_count: u64,
    pub failures: u64,
    pub team_failures: u64,
    pub redistributions: u64,
    pub zero_states: u64,
    /// Delivered value per measured round, when recording was enabled.
    pub wealth_series: Vec<f64>,
}

impl SimulationReport {
    pub fn deliveries(&self) -> u64 {
        self.flows.iter().map(|f| f.delivered).sum()
    }

    /// Delay statistics pooled over the packets of the given flows.
    pub fn pooled(&self, flows: impl IntoIterator<Item = FlowId>) -> DelayStats {
        let mut count = 0;
        let mut sum = 0;
        let mut sq = 0;
        for id in flows {
            if let Some(f) = self.flows.get(id) {
                count += f.delivered;
                sum += f.delay_sum;
                sq += f.delay_sq_sum;
            }
        }
        DelayStats::from_sums(count, sum, sq)
    }

    pub fn delivered_by(&self, flows: impl IntoIterator<Item = FlowId>) -> u64 {
        flows.into_iter().filter_map(|id| self.flows.get(id)).map(|f| f.delivered).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_stats() {
        let mut a = FlowReport::new(0);
        let mut b = FlowReport::new(1);
        for d in [10, 12, 14] {
            a.record(d, Money::from_units(1), 100);
        }
        b.record(200, Money::ZERO, 150);
        let r = SimulationReport {
            flows: alloc::vec![a, b],
            ..Default::default()
        };
        let s = r.pooled([0]);
        assert_eq!(s.count, 3);
        assert_eq!(s.mean, 12.0);
        assert!((s.stddev - libm::sqrt(8.0 / 3.0)).abs() < 1e-12);
        assert_eq!(r.flows[1].late, 1);
        assert_eq!(r.deliveries(), 4);
        assert!(r.pooled([5]).mean.is_nan());
    }
}
