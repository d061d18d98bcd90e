use alloc::vec::Vec;

use rand::Rng;

use super::Discipline;
use crate::economy::RunLength;
use crate::error::ConfigError;
use crate::packet::{FlowKind, FlowSpec};
use crate::pairing::shuffle;
use crate::report::{FlowReport, SimulationReport};

/// Saturated window-based flows through a baseline discipline: every
/// delivered packet is replaced by its flow at once. The queue starts full
/// in random order, aged so that FIFO service gives every packet a delay of
/// exactly the queue length.
pub fn run_closed_loop<D: Discipline, R: Rng + ?Sized>(
    discipline: &mut D,
    flows: &[FlowSpec],
    run_length: RunLength,
    warmup_rounds: u64,
    rng: &mut R,
) -> Result<SimulationReport, ConfigError> {
    if flows.is_empty() {
        return Err(ConfigError::NoFlows);
    }
    let mut owner = Vec::new();
    for (i, f) in flows.iter().enumerate() {
        match f.kind {
            FlowKind::WindowBased { window: 0 } => return Err(ConfigError::EmptyWindow(i)),
            FlowKind::WindowBased { window } => owner.extend(core::iter::repeat_n(i, window as usize)),
            FlowKind::RateBased { .. } => return Err(ConfigError::RateBasedFlow(i)),
        }
    }
    match run_length {
        RunLength::Rounds(0) | RunLength::Deliveries(0) => return Err(ConfigError::EmptyRun),
        _ => {}
    }

    let q = owner.len() as i64;
    let mut order: Vec<usize> = (0..owner.len()).collect();
    shuffle(rng, &mut order);
    let mut arrival = alloc::vec![0i64; owner.len()];
    for (pos, &carrier) in order.iter().enumerate() {
        arrival[carrier] = pos as i64 + 1 - q;
        discipline.enqueue(owner[carrier], carrier as u64);
    }

    let mut report: Vec<FlowReport> = (0..flows.len()).map(FlowReport::new).collect();
    let mut value_sum = 0i128;
    let mut measured = 0u64;
    let mut delivered = 0u64;
    let mut round = 0u64;
    loop {
        let done = match run_length {
            RunLength::Rounds(n) => round >= n,
            RunLength::Deliveries(n) => delivered >= n,
        };
        if done {
            break;
        }
        round += 1;
        let (flow, tag) = discipline.dequeue().expect("closed loop never drains");
        let carrier = tag as usize;
        let delay = (round as i64 - arrival[carrier]) as u32;
        if round > warmup_rounds {
            measured += 1;
            let vf = &flows[flow].value_fn;
            let value = vf.value(delay);
            report[flow].record(delay, value, vf.deadline());
            value_sum += value.micros() as i128;
            delivered += 1;
        }
        arrival[carrier] = round as i64;
        discipline.enqueue(flow, tag);
    }
    Ok(SimulationReport {
        rounds: round,
        measured_rounds: measured,
        flows: report,
        wealth_rate: if measured == 0 {
            0.0
        } else {
            value_sum as f64 / crate::money::MICROS_PER_UNIT as f64 / measured as f64
        },
        ..SimulationReport::default()
    })
}
