//! Periodic schedules of window-one flows.
//!
//! A cyclic schedule of length `L` serves one flow per slot and repeats. A
//! flow served at slots `t_1 < t_2 < ...` sends its next packet as soon as
//! the previous one is delivered, so each delivery waits the cyclic gap to
//! the flow's previous slot. The wealth rate is the delivered value per
//! slot. With a common maximum value every feasible schedule yields the same
//! rate, since the gaps of each flow add up to `L`.

use alloc::vec::Vec;

use super::wealth::Rational;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CyclicFlow {
    pub v_max: i64,
    pub cost: i64,
    pub deadline: u32,
}

/// Wealth rate of `schedule`, or `None` if a flow is missing or some gap
/// exceeds its deadline or its zero-value delay.
fn cyclic_wealth(flows: &[CyclicFlow], schedule: &[usize]) -> Option<Rational> {
    let l = schedule.len();
    let mut total: i128 = 0;
    for (f, flow) in flows.iter().enumerate() {
        let slots: Vec<usize> = (0..l).filter(|&t| schedule[t] == f).collect();
        if slots.is_empty() {
            return None;
        }
        for (k, &t) in slots.iter().enumerate() {
            let prev = if k == 0 { slots[slots.len() - 1] as i64 - l as i64 } else { slots[k - 1] as i64 };
            let gap = t as i64 - prev;
            let value = flow.v_max - flow.cost * gap;
            if gap > flow.deadline as i64 || value < 0 {
                return None;
            }
            total += value as i128;
        }
    }
    Some(Rational::new(total, l as i128))
}

/// Every feasible cyclic schedule of length up to `max_len`, with its
/// wealth rate.
pub fn feasible_cyclic_wealths(flows: &[CyclicFlow], max_len: usize) -> Vec<(Vec<usize>, Rational)> {
    let n = flows.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut uses = alloc::vec![0usize; n];
    for l in n..=max_len {
        let mut seq = Vec::with_capacity(l);
        extend(flows, l, &mut seq, &mut uses, n, &mut out);
    }
    out
}

/// Depth-first over sequences, skipping prefixes that leave too few slots
/// for the flows not yet served.
fn extend(
    flows: &[CyclicFlow],
    l: usize,
    seq: &mut Vec<usize>,
    uses: &mut [usize],
    missing: usize,
    out: &mut Vec<(Vec<usize>, Rational)>,
) {
    if seq.len() == l {
        if let Some(w) = cyclic_wealth(flows, seq) {
            out.push((seq.clone(), w));
        }
        return;
    }
    for f in 0..flows.len() {
        let left = missing - (uses[f] == 0) as usize;
        if left > l - seq.len() - 1 {
            continue;
        }
        uses[f] += 1;
        seq.push(f);
        extend(flows, l, seq, uses, left, out);
        seq.pop();
        uses[f] -= 1;
    }
}

/// True iff all feasible schedules up to `max_len` earn the same rate.
pub fn equal_vmax_schedule_invariance(flows: &[CyclicFlow], max_len: usize) -> bool {
    invariance_witness(flows, max_len).is_none()
}

/// Two feasible schedules with different wealth rates, if any exist.
pub fn invariance_witness(flows: &[CyclicFlow], max_len: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let all = feasible_cyclic_wealths(flows, max_len);
    let (first, w0) = all.first()?;
    all.iter().find(|(_, w)| w != w0).map(|(s, _)| (first.clone(), s.clone()))
}
