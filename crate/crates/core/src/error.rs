use thiserror::Error;

use crate::packet::{FlowId, Rounds};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("maximum packet value must be positive")]
    NonPositiveValue,
    #[error("cost per round of delay must be non-negative")]
    NegativeCost,
    #[error("deadline {deadline} lies past the zero-value delay {zero_point}")]
    DeadlinePastZeroValue { deadline: Rounds, zero_point: Rounds },
    #[error("packet delay {0} is below one round")]
    DelayBelowOne(i64),
    #[error("one-in-c participation requires c >= 1")]
    ZeroParticipation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PricingError {
    /// The post-trade delay would exceed the packet's deadline.
    #[error("packet is not willing to trade: delay {delay} would exceed deadline {deadline}")]
    NotWilling { delay: i64, deadline: Rounds },
    #[error("current delay must be at least one round")]
    ZeroDelay,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TradeError {
    #[error("trade refers to positions {buyer}/{seller} that do not hold the recorded packets")]
    StalePositions { buyer: u32, seller: u32 },
    #[error("buyer must sit behind the seller")]
    BuyerAhead,
    #[error("account bound violated by trade at price {price}")]
    AccountBound { price: i64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("queue size must be at least 2, got {0}")]
    QueueTooSmall(u32),
    #[error("trading periods per round must be at least 1")]
    NoTradingPeriods,
    #[error("failure probability {0} outside [0, 1]")]
    FailureProbability(f64),
    #[error("no flows configured")]
    NoFlows,
    #[error("flow {0}: window must be at least 1")]
    EmptyWindow(FlowId),
    #[error("flow {0}: rate must be positive and finite")]
    BadRate(FlowId),
    #[error("flow ids must be 0..n in order; found {found} at index {index}")]
    FlowIdOrder { index: usize, found: FlowId },
    #[error("window sizes sum to {sum}, queue size is {queue}")]
    WindowSum { sum: u64, queue: u32 },
    #[error("this scenario requires window-based flows (flow {0} is rate-based)")]
    RateBasedFlow(FlowId),
    #[error("team {team}: {reason}")]
    Team { team: usize, reason: &'static str },
    #[error("fiat configuration: {0}")]
    Fiat(&'static str),
    #[error("run length must be positive")]
    EmptyRun,
    #[error("account bounds must satisfy min <= 0 <= max")]
    AccountBounds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{name} = {value} is outside the domain ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("infeasible: {0}")]
    Infeasible(&'static str),
}

impl AnalysisError {
    pub(crate) fn domain(name: &'static str, value: f64, requirement: &'static str) -> Self {
        AnalysisError::Domain {
            name,
            value,
            requirement,
        }
    }
}
