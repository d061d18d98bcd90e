//! Parameter sweeps. Every cell owns an RNG stream derived from the master
//! seed and the cell index, so rows do not depend on thread scheduling.

use packet_economy::analysis::{
    wealth_ideal, wealth_ideal_feasible, wealth_no_trades, DelayBounds, Rational, WealthScenarioParams,
};
use packet_economy::economy::batch_pe_wealth;
use packet_economy::schedulers::{mtw_optimal, run_closed_loop, schedule_in_order, total_wealth, Fifo, Job, Wf2q};
use packet_economy::{
    run_scenario1, DelayStats, EconomyConfig, FlowKind, FlowReport, FlowSpec, Money, RunLength, SimulationReport,
    TradeMode, TradingPolicy, ValueFunction,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::HarnessError;
use crate::output::{Algorithm, ResultRow};

/// `λ = (a_i / Σ a) / (w_i / q)`; zero when nothing was delivered.
pub fn fair_share_ratio(delivered: &[u64], flow: usize, window: u32, q: u32) -> f64 {
    let total: u64 = delivered.iter().sum();
    if total == 0 || window == 0 {
        return 0.0;
    }
    (delivered[flow] as f64 / total as f64) * (q as f64 / window as f64)
}

/// Stream id of repetition `rep` in cell `cell`.
pub fn stream(cell: usize, rep: u32) -> u64 {
    ((cell as u64) << 32) | rep as u64
}

pub fn cell_rng(seed: u64, cell: usize, rep: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream(cell, rep));
    rng
}

fn units(x: f64) -> Money {
    Money::from_f64(x)
}

/// Economy flows of window one that only sell, followed by one business
/// flow of window `n_b` that only buys. `c_e = 1`, `V_e = 4q`,
/// `V_b = 4q c_b`.
pub fn delay_flows(q: u32, c_b: f64, n_b: u32) -> Result<Vec<FlowSpec>, HarnessError> {
    let v_e = 4.0 * q as f64;
    let mut flows = Vec::with_capacity((q - n_b + 1) as usize);
    for id in 0..(q - n_b) as usize {
        flows.push(FlowSpec {
            id,
            kind: FlowKind::WindowBased { window: 1 },
            value_fn: ValueFunction::with_default_deadline(units(v_e), units(1.0))?,
            policy: TradingPolicy::new(TradeMode::SellOnly),
        });
    }
    flows.push(FlowSpec {
        id: flows.len(),
        kind: FlowKind::WindowBased { window: n_b },
        value_fn: ValueFunction::with_default_deadline(units(v_e * c_b), units(c_b))?,
        policy: TradingPolicy::new(TradeMode::BuyOnly),
    });
    Ok(flows)
}

/// Per-flow reports summed over repetitions.
fn merge(reports: &[SimulationReport]) -> Vec<FlowReport> {
    let mut out = reports[0].flows.clone();
    for r in &reports[1..] {
        for (acc, f) in out.iter_mut().zip(&r.flows) {
            acc.delivered += f.delivered;
            acc.delay_sum += f.delay_sum;
            acc.delay_sq_sum += f.delay_sq_sum;
            acc.value_sum += f.value_sum;
            acc.max_delay = acc.max_delay.max(f.max_delay);
            acc.late += f.late;
        }
    }
    out
}

fn pooled(flows: &[FlowReport], ids: impl IntoIterator<Item = usize>) -> DelayStats {
    let (mut n, mut s, mut sq) = (0u64, 0u64, 0u128);
    for i in ids {
        n += flows[i].delivered;
        s += flows[i].delay_sum;
        sq += flows[i].delay_sq_sum;
    }
    DelayStats::from_sums(n, s, sq)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Copy, Clone, Debug, PartialEq)]
enum Runner {
    Pe(u32),
    Fifo,
    Wf2q,
}

#[derive(Copy, Clone, Debug)]
struct DelayCell {
    q: u32,
    c_b: f64,
    n_b: u32,
    runner: Runner,
}

#[derive(Clone, Debug)]
pub struct DelayOutcome {
    pub algorithm: Algorithm,
    pub q: u32,
    pub c_b: f64,
    pub b: Option<u32>,
    pub n_b: u32,
    pub business: DelayStats,
    pub economy: DelayStats,
    pub fair_share: (f64, f64),
    pub seeds: u32,
}

fn run_delay_cell(cell: DelayCell, index: usize, spec: &ExperimentSpec, fast: bool) -> Result<DelayOutcome, HarnessError> {
    let DelayCell { q, c_b, n_b, runner } = cell;
    let flows = delay_flows(q, c_b, n_b)?;
    let per_q = spec.deliveries_per_q.unwrap_or(if fast { 20 } else { 100 });
    let run = RunLength::Deliveries(per_q * q as u64);
    let warmup = 2 * q as u64;
    let business = flows.len() - 1;
    let reps = spec.repetitions();
    let mut reports = Vec::with_capacity(reps as usize);
    for rep in 0..reps {
        let report = match runner {
            Runner::Pe(b) => {
                let mut cfg = EconomyConfig::new(q, flows.clone(), b, run, spec.seed);
                cfg.stream = stream(index, rep);
                cfg.warmup_rounds = warmup;
                run_scenario1(cfg)?
            }
            Runner::Fifo => run_closed_loop(&mut Fifo::new(), &flows, run, warmup, &mut cell_rng(spec.seed, index, rep))?,
            Runner::Wf2q => {
                // GPS weight of a flow: window times cost per round
                let weights: Vec<f64> = flows
                    .iter()
                    .map(|f| {
                        let w = match f.kind {
                            FlowKind::WindowBased { window } => window as f64,
                            FlowKind::RateBased { .. } => 1.0,
                        };
                        w * f.value_fn.cost_per_round().to_f64()
                    })
                    .collect();
                let mut wf = Wf2q::new(&weights)?;
                run_closed_loop(&mut wf, &flows, run, warmup, &mut cell_rng(spec.seed, index, rep))?
            }
        };
        reports.push(report);
    }
    let lambdas: Vec<f64> = reports
        .iter()
        .map(|r| {
            let delivered: Vec<u64> = r.flows.iter().map(|f| f.delivered).collect();
            fair_share_ratio(&delivered, business, n_b, q)
        })
        .collect();
    let merged = merge(&reports);
    let (algorithm, b) = match runner {
        Runner::Pe(b) => (Algorithm::Pe, Some(b)),
        Runner::Fifo => (Algorithm::Fifo, None),
        Runner::Wf2q => (Algorithm::Wf2q, None),
    };
    Ok(DelayOutcome {
        algorithm,
        q,
        c_b,
        b,
        n_b,
        business: pooled(&merged, [business]),
        economy: pooled(&merged, 0..business),
        fair_share: mean_sd(&lambdas),
        seeds: reps,
    })
}

/// PE, FIFO and WF²Q over the `q × c_b × n_b` grid; PE once per `b`.
pub fn delay_outcomes(spec: &ExperimentSpec, fast: bool) -> Result<Vec<DelayOutcome>, HarnessError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &q in &spec.q {
        for &c_b in &spec.c_b {
            for &n_b in &spec.n_b {
                for b in spec.trading_periods() {
                    cells.push(DelayCell { q, c_b, n_b, runner: Runner::Pe(b) });
                }
                cells.push(DelayCell { q, c_b, n_b, runner: Runner::Fifo });
                cells.push(DelayCell { q, c_b, n_b, runner: Runner::Wf2q });
            }
        }
    }
    cells
        .into_par_iter()
        .enumerate()
        .map(|(i, c)| run_delay_cell(c, i, spec, fast))
        .collect()
}

pub fn run_experiment_delay(spec: &ExperimentSpec, fast: bool) -> Result<Vec<ResultRow>, HarnessError> {
    let name = ExperimentKind::DelayVsQ.name();
    let mut rows = Vec::new();
    for o in delay_outcomes(spec, fast)? {
        let at = |r: ResultRow| r.cell(o.q, Some(o.c_b), o.b, Some(o.n_b));
        rows.push(at(ResultRow::new(name, o.algorithm, "business_delay", o.business.mean)).spread(o.business.stddev, o.seeds));
        rows.push(at(ResultRow::new(name, o.algorithm, "economy_delay", o.economy.mean)).spread(o.economy.stddev, o.seeds));
    }
    for &q in spec.q.iter().filter(|&&q| q >= 3) {
        for b in spec.trading_periods() {
            let bounds = DelayBounds::compute(q, b, 1.0)?;
            let at = |r: ResultRow| r.cell(q, None, Some(b), Some(1));
            rows.push(at(ResultRow::new(name, Algorithm::Analytic, "delay_lower_bound", bounds.lower)));
            if let Some(e) = bounds.exact {
                rows.push(at(ResultRow::new(name, Algorithm::Analytic, "delay_expected", e)));
            }
            rows.push(at(ResultRow::new(name, Algorithm::Analytic, "delay_upper_bound", bounds.upper)));
        }
    }
    Ok(rows)
}

pub fn run_experiment_fairshare(spec: &ExperimentSpec, fast: bool) -> Result<Vec<ResultRow>, HarnessError> {
    let name = ExperimentKind::FairShare.name();
    Ok(delay_outcomes(spec, fast)?
        .into_iter()
        .map(|o| {
            ResultRow::new(name, o.algorithm, "fair_share", o.fair_share.0)
                .cell(o.q, Some(o.c_b), o.b, Some(o.n_b))
                .spread(o.fair_share.1, o.seeds)
        })
        .collect())
}

/// The worked example: `q = 100`, `V_e = 500`, `c_e = 1`, `V_b = 1000`,
/// `c_b = 4`, economy delay cap 400.
pub fn wealth_params(n_b: u32) -> WealthScenarioParams {
    WealthScenarioParams {
        n_e: 100 - n_b,
        n_b,
        v_e: Money::from_units(500),
        v_b: Money::from_units(1000),
        c_e: Money::from_units(1),
        c_b: Money::from_units(4),
        d_cap: 400,
    }
}

/// Engine configuration for the worked example with `n_b` business packets.
pub fn wealth_config(n_b: u32, b: u32, run_length: RunLength, seed: u64) -> Result<EconomyConfig, HarnessError> {
    let p = wealth_params(n_b);
    let mut flows = Vec::new();
    for id in 0..p.n_e as usize {
        flows.push(FlowSpec {
            id,
            kind: FlowKind::WindowBased { window: 1 },
            value_fn: ValueFunction::new(p.v_e, p.c_e, p.d_cap)?,
            policy: TradingPolicy::new(TradeMode::SellOnly),
        });
    }
    for _ in 0..n_b {
        flows.push(FlowSpec {
            id: flows.len(),
            kind: FlowKind::WindowBased { window: 1 },
            value_fn: ValueFunction::with_default_deadline(p.v_b, p.c_b)?,
            policy: TradingPolicy::new(TradeMode::BuyOnly),
        });
    }
    let mut cfg = EconomyConfig::new(p.q(), flows, b, run_length, seed);
    cfg.delay_cap = p.d_cap;
    Ok(cfg)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Saturated trading: enough periods per round that every profitable swap
/// happens.
pub const SATURATED_PERIODS: u32 = 1000;

pub fn run_wealth_example(spec: &ExperimentSpec, fast: bool) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let name = ExperimentKind::WealthExample.name();
    let (pe_len, sat_len, warmup) = if fast { (20_000, 8_000, 2_000) } else { (100_000, 20_000, 10_000) };
    let mut sims = Vec::new();
    for &n_b in &spec.n_b {
        for b in spec.trading_periods() {
            sims.push((n_b, b, pe_len));
        }
        sims.push((n_b, SATURATED_PERIODS, sat_len));
    }
    let reps = spec.repetitions();
    let results: Vec<(u32, u32, f64, f64)> = sims
        .par_iter()
        .enumerate()
        .map(|(cell, &(n_b, b, len))| {
            let mut rates = Vec::new();
            for rep in 0..reps {
                let mut cfg = wealth_config(n_b, b, RunLength::Deliveries(len), spec.seed)?;
                cfg.stream = stream(cell, rep);
                cfg.warmup_rounds = warmup;
                rates.push(run_scenario1(cfg)?.wealth_rate);
            }
            let (m, sd) = mean_sd(&rates);
            Ok((n_b, b, m, sd))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut rows = Vec::new();
    for &n_b in &spec.n_b {
        let p = wealth_params(n_b);
        let at = |r: ResultRow| r.cell(100, Some(4.0), None, Some(n_b));
        rows.push(at(ResultRow::new(name, Algorithm::None, "wealth_no_trades", to_f64(wealth_no_trades(&p)?))));
        rows.push(at(ResultRow::new(name, Algorithm::Opt, "wealth_ideal", to_f64(wealth_ideal(&p)?))));
        rows.push(at(ResultRow::new(name, Algorithm::Opt, "wealth_ideal_feasible", to_f64(wealth_ideal_feasible(&p, 2)?))));
        for &(nb, b, m, sd) in results.iter().filter(|r| r.0 == n_b) {
            let metric = if b == SATURATED_PERIODS { "wealth_saturated" } else { "wealth_pe" };
            rows.push(ResultRow::new(name, Algorithm::Pe, metric, m).cell(100, Some(4.0), Some(b), Some(nb)).spread(sd, reps));
        }
    }
    Ok(rows)
}

/// `x` economy jobs followed by `y` business jobs, all queued at time zero.
pub fn composition(x: u32, y: u32, economy_deadline: u32, business_deadline: u32) -> Vec<Job> {
    (0..x + y)
        .map(|i| {
            let business = i >= x;
            Job {
                id: i as usize,
                release: 0,
                deadline: if business { business_deadline } else { economy_deadline },
                weight: if business { 4 } else { 1 },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchedulingCell {
    pub x: u32,
    pub y: u32,
    pub economy_deadline: u32,
    pub none: i64,
    pub optimal: i64,
    /// `(b, mean, stddev, min, max)` of the PE utility over seeds.
    pub pe: Vec<(u32, f64, f64, i64, i64)>,
}

pub fn scheduling_cells(spec: &ExperimentSpec) -> Result<Vec<SchedulingCell>, HarnessError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &d_e in &spec.economy_deadlines {
        for n in 1..=spec.max_packets {
            for y in 0..=n {
                cells.push((n - y, y, d_e));
            }
        }
    }
    let reps = spec.repetitions();
    let periods = spec.trading_periods();
    cells
        .into_par_iter()
        .enumerate()
        .map(|(index, (x, y, d_e))| {
            let jobs = composition(x, y, d_e, spec.business_deadline);
            let order: Vec<usize> = (0..jobs.len()).collect();
            let none = total_wealth(&jobs, &schedule_in_order(&jobs, &order));
            let optimal = total_wealth(&jobs, &mtw_optimal(&jobs));
            let mut pe = Vec::new();
            for (k, &b) in periods.iter().enumerate() {
                let mut rng = cell_rng(spec.seed, index * periods.len() + k, 0);
                let mut xs = Vec::with_capacity(reps as usize);
                for _ in 0..reps {
                    xs.push(batch_pe_wealth(&jobs, b, &mut rng)?);
                }
                let f: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
                let (m, sd) = mean_sd(&f);
                pe.push((b, m, sd, *xs.iter().min().unwrap(), *xs.iter().max().unwrap()));
            }
            Ok(SchedulingCell {
                x,
                y,
                economy_deadline: d_e,
                none,
                optimal,
                pe,
            })
        })
        .collect()
}

pub fn run_experiment_scheduling(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    let name = ExperimentKind::SchedulingCompare.name();
    let mut rows = Vec::new();
    for c in scheduling_cells(spec)? {
        let tag = format!("E{}B{}.de{}", c.x, c.y, c.economy_deadline);
        let n = c.x + c.y;
        let at = |r: ResultRow| r.cell(n, Some(4.0), None, Some(c.y));
        rows.push(at(ResultRow::new(name, Algorithm::None, format!("utility.{tag}"), c.none as f64)));
        rows.push(at(ResultRow::new(name, Algorithm::Opt, format!("utility.{tag}"), c.optimal as f64)));
        for &(b, m, sd, _, _) in &c.pe {
            let span = (c.optimal - c.none) as f64;
            let norm = if span > 0.0 { (m - c.none as f64) / span } else { 1.0 };
            let at = |r: ResultRow| r.cell(n, Some(4.0), Some(b), Some(c.y));
            rows.push(at(ResultRow::new(name, Algorithm::Pe, format!("utility.{tag}"), m)).spread(sd, spec.repetitions()));
            rows.push(at(ResultRow::new(name, Algorithm::Pe, format!("normalized.{tag}"), norm)).spread(sd / span.max(1.0), spec.repetitions()));
        }
    }
    Ok(rows)
}

pub fn run_experiment(spec: &ExperimentSpec, fast: bool) -> Result<Vec<ResultRow>, HarnessError> {
    match spec.experiment {
        ExperimentKind::DelayVsQ => run_experiment_delay(spec, fast),
        ExperimentKind::FairShare => run_experiment_fairshare(spec, fast),
        ExperimentKind::WealthExample => run_wealth_example(spec, fast),
        ExperimentKind::SchedulingCompare => run_experiment_scheduling(spec),
    }
}
