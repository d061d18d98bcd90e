//! TOML input files: simulation scenarios, experiment specs and scheduling
//! instances.

use std::path::Path;

use packet_economy::schedulers::Job;
use packet_economy::{
    AccountBounds, EconomyConfig, FiatConfig, FlowKind, FlowSpec, Money, PairingMode, RunLength, Team, TradeMode,
    TradingPolicy, ValueFunction,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::HarnessError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, HarnessError> {
    toml::from_str(text).map_err(|e| HarnessError::Parse {
        path: origin.to_string(),
        source: Box::new(e),
    })
}

fn one() -> u32 {
    1
}

#[derive(Copy, Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    #[default]
    Always,
    Never,
    SellOnly,
    BuyOnly,
}

impl From<ModeName> for TradeMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Always => TradeMode::AlwaysTrade,
            ModeName::Never => TradeMode::NeverTrade,
            ModeName::SellOnly => TradeMode::SellOnly,
            ModeName::BuyOnly => TradeMode::BuyOnly,
        }
    }
}

#[derive(Copy, Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PairingName {
    #[default]
    Direct,
    Pipelined,
}

/// `count` identical window-based flows.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowEntry {
    #[serde(default = "one")]
    pub count: u32,
    #[serde(default = "one")]
    pub window: u32,
    pub v_max: f64,
    pub cost: f64,
    pub deadline: Option<u32>,
    #[serde(default)]
    pub mode: ModeName,
    pub one_in: Option<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiatEntry {
    pub total: i64,
    pub deposit_cap: i64,
    /// Defaults to the mean cost of the first team's two flows.
    pub unit_value: Option<f64>,
    /// `[business, economy]` flow ids, counted after `count` expansion.
    pub teams: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub queue_size: u32,
    #[serde(default = "one")]
    pub trading_periods: u32,
    #[serde(default)]
    pub failure_probability: f64,
    pub rounds: Option<u64>,
    pub deliveries: Option<u64>,
    #[serde(default)]
    pub warmup_rounds: u64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub pairing: PairingName,
    pub delay_cap: Option<u32>,
    /// Money units, or fiat units when `[fiat]` is present.
    pub account_min: Option<f64>,
    pub account_max: Option<f64>,
    #[serde(rename = "flow")]
    pub flows: Vec<FlowEntry>,
    pub fiat: Option<FiatEntry>,
}

fn money(x: f64, what: &str) -> Result<Money, HarnessError> {
    if !x.is_finite() {
        return Err(HarnessError::invalid(format!("{what} must be finite")));
    }
    Ok(Money::from_f64(x))
}

pub fn flow_spec(id: usize, e: &FlowEntry) -> Result<FlowSpec, HarnessError> {
    let v_max = money(e.v_max, "v_max")?;
    let cost = money(e.cost, "cost")?;
    let value_fn = match e.deadline {
        Some(d) => ValueFunction::new(v_max, cost, d)?,
        None => ValueFunction::with_default_deadline(v_max, cost)?,
    };
    let policy = match e.one_in {
        Some(c) => TradingPolicy::with_one_in(e.mode.into(), c)?,
        None => TradingPolicy::new(e.mode.into()),
    };
    Ok(FlowSpec {
        id,
        kind: FlowKind::WindowBased { window: e.window },
        value_fn,
        policy,
    })
}

pub fn expand_flows(entries: &[FlowEntry]) -> Result<Vec<FlowSpec>, HarnessError> {
    let mut flows = Vec::new();
    for e in entries {
        if e.count == 0 {
            return Err(HarnessError::invalid("flow count must be at least 1"));
        }
        for _ in 0..e.count {
            flows.push(flow_spec(flows.len(), e)?);
        }
    }
    Ok(flows)
}

impl SimulationFile {
    /// Builds and validates the engine configuration. `seed` overrides the
    /// file's seed.
    pub fn to_config(&self, seed: Option<u64>) -> Result<EconomyConfig, HarnessError> {
        let flows = expand_flows(&self.flows)?;
        let run_length = match (self.rounds, self.deliveries) {
            (Some(r), None) => RunLength::Rounds(r),
            (None, Some(d)) => RunLength::Deliveries(d),
            _ => return Err(HarnessError::invalid("set exactly one of `rounds` and `deliveries`")),
        };
        let mut cfg = EconomyConfig::new(
            self.queue_size,
            flows,
            self.trading_periods,
            run_length,
            seed.or(self.seed).unwrap_or(0),
        );
        cfg.failure_probability = self.failure_probability;
        cfg.warmup_rounds = self.warmup_rounds;
        cfg.pairing = match self.pairing {
            PairingName::Direct => PairingMode::Direct,
            PairingName::Pipelined => PairingMode::Pipelined,
        };
        if let Some(d) = self.delay_cap {
            cfg.delay_cap = d;
        }

        let scale = |x: f64, fiat: bool| -> Result<i64, HarnessError> {
            if fiat {
                if x.fract() != 0.0 || !x.is_finite() {
                    return Err(HarnessError::invalid("fiat account bounds must be whole units"));
                }
                Ok(x as i64)
            } else {
                Ok(money(x, "account bound")?.micros())
            }
        };
        let fiat = self.fiat.is_some();
        let mut bounds = AccountBounds::UNBOUNDED;
        if let Some(m) = self.account_min {
            bounds.min = scale(m, fiat)?;
        }
        if let Some(m) = self.account_max {
            bounds.max = scale(m, fiat)?;
        }
        cfg.account_bounds = bounds;

        if let Some(f) = &self.fiat {
            let teams: Vec<Team> = f
                .teams
                .iter()
                .map(|&[business, economy]| Team { business, economy })
                .collect();
            let unit_value = match f.unit_value {
                Some(u) => money(u, "unit_value")?,
                None => {
                    let t = teams.first().ok_or_else(|| HarnessError::invalid("fiat needs at least one team"))?;
                    let cost = |id: usize| {
                        cfg.flows
                            .get(id)
                            .map(|fl| fl.value_fn.cost_per_round())
                            .ok_or_else(|| HarnessError::invalid(format!("team refers to unknown flow {id}")))
                    };
                    FiatConfig::liquidation_value(cost(t.economy)?, cost(t.business)?)
                }
            };
            cfg.fiat = Some(FiatConfig {
                total: f.total,
                deposit_cap: f.deposit_cap,
                unit_value,
                teams,
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Copy, Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DelayVsQ,
    FairShare,
    WealthExample,
    SchedulingCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DelayVsQ => "delay-vs-q",
            ExperimentKind::FairShare => "fair-share",
            ExperimentKind::WealthExample => "wealth-example",
            ExperimentKind::SchedulingCompare => "scheduling-compare",
        }
    }
}

fn default_q() -> Vec<u32> {
    vec![10, 20, 50, 100, 200, 500, 1000]
}
fn default_c_b() -> Vec<f64> {
    vec![1.0, 2.0, 10.0, 100.0]
}
fn default_b() -> Vec<u32> {
    vec![1, 10, 20]
}
fn default_n_b() -> Vec<u32> {
    vec![1]
}
fn default_max_packets() -> u32 {
    10
}
fn default_economy_deadlines() -> Vec<u32> {
    vec![4, 8]
}
fn default_business_deadline() -> u32 {
    8
}
fn default_sched_b() -> Vec<u32> {
    vec![1, 2, 3]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    #[serde(default = "default_q")]
    pub q: Vec<u32>,
    #[serde(default = "default_c_b")]
    pub c_b: Vec<f64>,
    pub b: Option<Vec<u32>>,
    #[serde(default = "default_n_b")]
    pub n_b: Vec<u32>,
    /// Seeds per cell; 1000 for scheduling comparisons, 1 otherwise.
    pub repetitions: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    /// Deliveries per run as a multiple of `q`; defaults to 100, or 20
    /// with `--fast`.
    pub deliveries_per_q: Option<u64>,
    pub out: Option<String>,
    #[serde(default = "default_max_packets")]
    pub max_packets: u32,
    #[serde(default = "default_economy_deadlines")]
    pub economy_deadlines: Vec<u32>,
    #[serde(default = "default_business_deadline")]
    pub business_deadline: u32,
}

impl ExperimentSpec {
    pub fn trading_periods(&self) -> Vec<u32> {
        match (&self.b, self.experiment) {
            (Some(b), _) => b.clone(),
            (None, ExperimentKind::SchedulingCompare) => default_sched_b(),
            (None, ExperimentKind::WealthExample) => vec![1],
            (None, _) => default_b(),
        }
    }

    pub fn repetitions(&self) -> u32 {
        match (self.repetitions, self.experiment) {
            (Some(r), _) => r,
            (None, ExperimentKind::SchedulingCompare) => 1000,
            (None, _) => 1,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let b = self.trading_periods();
        if b.is_empty() || b.contains(&0) {
            return Err(HarnessError::invalid("`b` must be a non-empty list of positive counts"));
        }
        if self.repetitions() == 0 {
            return Err(HarnessError::invalid("`repetitions` must be at least 1"));
        }
        match self.experiment {
            ExperimentKind::DelayVsQ | ExperimentKind::FairShare => {
                if self.q.is_empty() || self.c_b.is_empty() || self.n_b.is_empty() {
                    return Err(HarnessError::invalid("`q`, `c_b` and `n_b` must be non-empty"));
                }
                if let Some(&c) = self.c_b.iter().find(|c| !(c.is_finite() && **c >= 1.0)) {
                    return Err(HarnessError::invalid(format!("c_b = {c} must be at least 1")));
                }
                for &q in &self.q {
                    for &n_b in &self.n_b {
                        if n_b == 0 || n_b >= q {
                            return Err(HarnessError::invalid(format!("n_b = {n_b} must lie in 1..q for q = {q}")));
                        }
                    }
                }
                if self.deliveries_per_q == Some(0) {
                    return Err(HarnessError::invalid("`deliveries_per_q` must be positive"));
                }
            }
            ExperimentKind::WealthExample => {
                if self.n_b.is_empty() || self.n_b.iter().any(|&n| n == 0 || n >= 100) {
                    return Err(HarnessError::invalid("`n_b` entries must lie in 1..100"));
                }
            }
            ExperimentKind::SchedulingCompare => {
                if self.max_packets == 0 || self.max_packets > 10 {
                    return Err(HarnessError::invalid("`max_packets` must lie in 1..=10"));
                }
                if self.economy_deadlines.is_empty() || self.economy_deadlines.contains(&0) || self.business_deadline == 0 {
                    return Err(HarnessError::invalid("deadlines must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobEntry {
    #[serde(default)]
    pub release: u32,
    pub deadline: u32,
    pub weight: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(rename = "job")]
    pub jobs: Vec<JobEntry>,
}

impl InstanceFile {
    pub fn jobs(&self) -> Result<Vec<Job>, HarnessError> {
        if self.jobs.is_empty() {
            return Err(HarnessError::invalid("instance has no jobs"));
        }
        if self.jobs.len() > 512 {
            return Err(HarnessError::invalid("at most 512 jobs per instance"));
        }
        if self.jobs.iter().any(|j| j.weight < 0) {
            return Err(HarnessError::invalid("job weights must be non-negative"));
        }
        Ok(self
            .jobs
            .iter()
            .enumerate()
            .map(|(id, j)| Job {
                id,
                release: j.release,
                deadline: j.deadline,
                weight: j.weight,
            })
            .collect())
    }
}
