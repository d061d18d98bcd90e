use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use packet_economy::analysis::DelayBounds;
use packet_economy::schedulers::{mtw_greedy, mtw_optimal, schedule_in_order, total_wealth, wf2q_schedule, Arrival, Job, Schedule};
use packet_economy::{run_scenario1, run_scenario2, FlowKind, SimulationReport};

use crate::config::{load, ExperimentSpec, InstanceFile, SimulationFile};
use crate::error::HarnessError;
use crate::experiments::run_experiment;
use crate::output::{emit, Algorithm, Format, ResultRow};

#[derive(Debug, Parser)]
#[command(name = "pecon", version, about = "Router-queue economy simulator and experiment runner")]
pub struct Cli {
    /// Overrides the seed in the input file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write rows here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Shorter runs (20q deliveries per cell instead of 100q).
    #[arg(long, global = true)]
    pub fast: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario from a TOML file.
    Simulate { config: PathBuf },
    /// Run a parameter sweep from a TOML spec.
    Experiment { spec: PathBuf },
    /// Analytic delay bounds for a buyer that always trades.
    Bounds {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 1)]
        b: u32,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Schedule a batch of unit jobs.
    Schedule {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Fifo,
    Wf2q,
    Greedy,
    Opt,
}

pub fn run(cli: &Cli) -> Result<(), HarnessError> {
    let format = cli.format.unwrap_or(Format::Csv);
    match &cli.command {
        Command::Simulate { config } => {
            let file: SimulationFile = load(config)?;
            let rows = simulate(&file, cli.seed)?;
            emit(&rows, format, cli.out.as_deref())
        }
        Command::Experiment { spec } => {
            let mut spec: ExperimentSpec = load(spec)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            spec.validate()?;
            let rows = run_experiment(&spec, cli.fast)?;
            let out = cli.out.clone().or_else(|| spec.out.as_ref().map(PathBuf::from));
            emit(&rows, format, out.as_deref())
        }
        Command::Bounds { q, b, c } => {
            let bounds = DelayBounds::compute(*q, *b, *c)?;
            if cli.format.is_none() && cli.out.is_none() {
                println!("{}", bounds_line(&bounds));
                return Ok(());
            }
            let mut rows = vec![ResultRow::new("bounds", Algorithm::Analytic, "delay_lower_bound", bounds.lower)];
            if let Some(e) = bounds.exact {
                rows.push(ResultRow::new("bounds", Algorithm::Analytic, "delay_expected", e));
            }
            rows.push(ResultRow::new("bounds", Algorithm::Analytic, "delay_upper_bound", bounds.upper));
            let rows: Vec<ResultRow> = rows.into_iter().map(|r| r.cell(*q, None, Some(*b), None)).collect();
            emit(&rows, format, cli.out.as_deref())
        }
        Command::Schedule { instance, algo } => {
            let file: InstanceFile = load(instance)?;
            let jobs = file.jobs()?;
            let rows = schedule(&jobs, *algo)?;
            emit(&rows, format, cli.out.as_deref())
        }
    }
}

/// Two decimals with trailing zeros dropped.
fn short(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn bounds_line(b: &DelayBounds) -> String {
    match b.exact {
        Some(e) => format!("lower={} exact={} upper={}", short(b.lower), short(e), short(b.upper)),
        None => format!("lower={} upper={}", short(b.lower), short(b.upper)),
    }
}

pub fn simulate(file: &SimulationFile, seed: Option<u64>) -> Result<Vec<ResultRow>, HarnessError> {
    let cfg = file.to_config(seed)?;
    let q = cfg.queue_size;
    let b = cfg.trading_periods;
    let windows: Vec<u32> = cfg
        .flows
        .iter()
        .map(|f| match f.kind {
            FlowKind::WindowBased { window } => window,
            FlowKind::RateBased { .. } => 0,
        })
        .collect();
    let report = if cfg.fiat.is_some() {
        run_scenario2(cfg)?
    } else {
        run_scenario1(cfg)?
    };
    Ok(report_rows(&report, q, b, &windows))
}

fn report_rows(r: &SimulationReport, q: u32, b: u32, windows: &[u32]) -> Vec<ResultRow> {
    let row = |metric: String, value: f64| ResultRow::new("simulate", Algorithm::Pe, metric, value).cell(q, None, Some(b), None);
    let delivered: Vec<u64> = r.flows.iter().map(|f| f.delivered).collect();
    let mut rows = Vec::new();
    for (i, f) in r.flows.iter().enumerate() {
        let s = f.delay_stats();
        rows.push(row(format!("flow{i}.delivered"), f.delivered as f64));
        rows.push(row(format!("flow{i}.mean_delay"), s.mean).spread(s.stddev, 1));
        rows.push(row(format!("flow{i}.max_delay"), f.max_delay as f64));
        rows.push(row(format!("flow{i}.late"), f.late as f64));
        rows.push(row(
            format!("flow{i}.fair_share"),
            crate::experiments::fair_share_ratio(&delivered, i, windows[i], q),
        ));
    }
    rows.push(row("deliveries".into(), r.deliveries() as f64));
    rows.push(row("rounds".into(), r.rounds as f64));
    rows.push(row("measured_rounds".into(), r.measured_rounds as f64));
    rows.push(row("wealth_rate".into(), r.wealth_rate));
    rows.push(row("trades".into(), r.trade_count as f64));
    rows.push(row("failures".into(), r.failures as f64));
    rows.push(row("team_failures".into(), r.team_failures as f64));
    rows.push(row("redistributions".into(), r.redistributions as f64));
    rows.push(row("zero_states".into(), r.zero_states as f64));
    rows
}

pub fn schedule(jobs: &[Job], algo: Algo) -> Result<Vec<ResultRow>, HarnessError> {
    let (algorithm, s) = match algo {
        Algo::Fifo => {
            let mut order: Vec<usize> = (0..jobs.len()).collect();
            order.sort_by_key(|&i| (jobs[i].release, i));
            (Algorithm::Fifo, schedule_in_order(jobs, &order))
        }
        Algo::Wf2q => {
            if jobs.iter().any(|j| j.weight <= 0) {
                return Err(HarnessError::invalid("wf2q needs positive job weights"));
            }
            let weights: Vec<f64> = jobs.iter().map(|j| j.weight as f64).collect();
            let arrivals: Vec<Arrival> = jobs.iter().map(|j| Arrival { round: j.release, flow: j.id }).collect();
            let mut completion = vec![0; jobs.len()];
            for (round, served) in wf2q_schedule(&weights, &arrivals).into_iter().enumerate() {
                if let Some(i) = served {
                    completion[i] = round as u32 + 1;
                }
            }
            (Algorithm::Wf2q, Schedule { completion })
        }
        Algo::Greedy => (Algorithm::Greedy, mtw_greedy(jobs)),
        Algo::Opt => (Algorithm::Opt, mtw_optimal(jobs)),
    };
    let mut rows: Vec<ResultRow> = s
        .completion
        .iter()
        .enumerate()
        .map(|(i, &c)| ResultRow::new("schedule", algorithm, format!("job{i}.completion"), c as f64))
        .collect();
    rows.push(ResultRow::new("schedule", algorithm, "total_wealth", total_wealth(jobs, &s) as f64));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_numbers() {
        assert_eq!(short(14.5), "14.5");
        assert_eq!(short(10.4149), "10.41");
        assert_eq!(short(3.0), "3");
    }

    #[test]
    fn schedule_algorithms_agree_on_a_trivial_instance() {
        let jobs = [Job { id: 0, release: 0, deadline: 5, weight: 2 }];
        for algo in [Algo::Fifo, Algo::Wf2q, Algo::Greedy, Algo::Opt] {
            let rows = schedule(&jobs, algo).unwrap();
            assert_eq!(rows[0].value, 1.0);
            assert_eq!(rows[1].value, 8.0);
        }
    }

    #[test]
    fn wf2q_rejects_zero_weights() {
        let jobs = [Job { id: 0, release: 0, deadline: 5, weight: 0 }];
        assert_eq!(schedule(&jobs, Algo::Wf2q).unwrap_err().exit_code(), 2);
    }
}
