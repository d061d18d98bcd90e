//! Position trading inside a fixed batch of unit jobs.
//!
//! The jobs wait at positions `1..=n` behind a packet from outside the batch.
//! Each round all waiting jobs run the trading periods, then the front job
//! is served. A job is priced as a rate-based packet whose value
//! `w * max(d - c, 0)` falls by `w` per round of completion time `c`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::ModelError;
use crate::money::Money;
use crate::packet::{AccountBounds, FlowKind, Rounds, TradeMode, ValueFunction};
use crate::pairing::PairingSource;
use crate::pricing::{negotiate, PacketView};
use crate::schedulers::{schedule_in_order, total_wealth, Job};

fn view(vf: ValueFunction, elapsed: u32, position: usize) -> PacketView {
    PacketView {
        value_fn: vf,
        kind: FlowKind::RateBased { rate: 1.0 },
        account_units: 0,
        unit_value: Money::from_micros(1),
        delay: elapsed,
        position: position as Rounds,
        mode: TradeMode::AlwaysTrade,
        seller_eligible: true,
        bounds: AccountBounds::UNBOUNDED,
        delay_cap: Rounds::MAX,
    }
}

/// Service order (indices into `jobs`, which is the initial queue order)
/// after `periods` random trading periods per round. Releases are ignored:
/// every job is queued from the start.
pub fn batch_pe_order<R: Rng + ?Sized>(jobs: &[Job], periods: u32, rng: &mut R) -> Result<Vec<usize>, ModelError> {
    let vfs = jobs
        .iter()
        .map(|j| {
            let w = Money::from_units(j.weight);
            let v_max = Money::from_units(j.weight * j.deadline as i64).max(Money::from_micros(1));
            ValueFunction::new(v_max, w, j.deadline)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut queue: Vec<usize> = (0..jobs.len()).collect();
    let mut order = Vec::with_capacity(jobs.len());
    let mut source = PairingSource::Direct;
    let mut scratch = Vec::new();
    let mut pairs = Vec::new();
    let mut elapsed = 0u32;
    while !queue.is_empty() {
        for _ in 0..periods {
            source.draw_pairs(rng, queue.len(), &mut scratch, &mut pairs);
            for &(a, b) in &pairs {
                let (front, back) = if a < b { (a, b) } else { (b, a) };
                let seller = view(vfs[queue[front]], elapsed, front + 1);
                let buyer = view(vfs[queue[back]], elapsed, back + 1);
                if negotiate(&buyer, &seller).is_some() {
                    queue.swap(front, back);
                }
            }
        }
        order.push(queue.remove(0));
        elapsed += 1;
    }
    Ok(order)
}

/// Total wealth of [`batch_pe_order`].
pub fn batch_pe_wealth<R: Rng + ?Sized>(jobs: &[Job], periods: u32, rng: &mut R) -> Result<i64, ModelError> {
    let order = batch_pe_order(jobs, periods, rng)?;
    Ok(total_wealth(jobs, &schedule_in_order(jobs, &order)))
}
