//! Reference schedulers: FIFO, WF²Q, and greedy/optimal solutions of the
//! max-total-wealth problem on unit jobs.

mod closed_loop;
mod hungarian;
mod mtw;
mod wf2q;

pub use closed_loop::run_closed_loop;
pub use hungarian::max_weight_assignment;
pub use mtw::{mtw_greedy, mtw_optimal};
pub use wf2q::Wf2q;

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::packet::FlowId;

/// A unit-length job. It can complete no earlier than `release + 1` and
/// earns `weight` per slot of slack before `deadline`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub id: usize,
    pub release: u32,
    pub deadline: u32,
    pub weight: i64,
}

/// Completion slot per job, indexed like the job slice it was built for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub completion: Vec<u32>,
}

impl Schedule {
    /// Job indices in service order.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.completion.len()).collect();
        idx.sort_by_key(|&i| self.completion[i]);
        idx
    }

    /// Distinct slots, releases respected, and no idle slot while a
    /// released job waits.
    pub fn is_valid(&self, jobs: &[Job]) -> bool {
        if self.completion.len() != jobs.len() {
            return false;
        }
        let order = self.order();
        for w in order.windows(2) {
            if self.completion[w[0]] == self.completion[w[1]] {
                return false;
            }
        }
        if jobs.iter().zip(&self.completion).any(|(j, &c)| c < j.release + 1) {
            return false;
        }
        // an idle slot t is only allowed if every job finishing later was
        // released at or after t
        let mut prev = 0;
        for &i in &order {
            let c = self.completion[i];
            for idle in prev + 1..c {
                let waiting = order
                    .iter()
                    .any(|&k| self.completion[k] >= c && jobs[k].release < idle);
                if waiting {
                    return false;
                }
            }
            prev = c;
        }
        true
    }
}

/// `W = Σ w_i · max(d_i − c_i, 0)`.
pub fn total_wealth(jobs: &[Job], schedule: &Schedule) -> i64 {
    jobs.iter()
        .zip(&schedule.completion)
        .map(|(j, &c)| j.weight * (j.deadline as i64 - c as i64).max(0))
        .sum()
}

/// Schedule that serves jobs in the given order as early as releases allow.
pub fn schedule_in_order(jobs: &[Job], order: &[usize]) -> Schedule {
    let mut completion = alloc::vec![0; jobs.len()];
    let mut t = 0;
    for &i in order {
        t = t.max(jobs[i].release) + 1;
        completion[i] = t;
    }
    Schedule { completion }
}

/// A queueing discipline serving one packet per round.
pub trait Discipline {
    fn enqueue(&mut self, flow: FlowId, tag: u64);
    fn dequeue(&mut self) -> Option<(FlowId, u64)>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct Fifo {
    queue: VecDeque<(FlowId, u64)>,
}

impl Fifo {
    pub fn new() -> Self {
        Fifo::default()
    }
}

impl Discipline for Fifo {
    fn enqueue(&mut self, flow: FlowId, tag: u64) {
        self.queue.push_back((flow, tag));
    }

    fn dequeue(&mut self) -> Option<(FlowId, u64)> {
        self.queue.pop_front()
    }

    fn len(&self) -> usize {
        self.queue.len()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Arrival {
    pub round: u32,
    pub flow: FlowId,
}

/// Feeds arrivals (in index order within a round) to `discipline` and
/// returns, per round starting at round 0, the index of the arrival served.
/// Packets arriving in a round can be served in that round.
pub fn serve_arrivals<D: Discipline>(discipline: &mut D, arrivals: &[Arrival]) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..arrivals.len()).collect();
    order.sort_by_key(|&i| (arrivals[i].round, i));
    let mut next = 0;
    let mut served = 0;
    let mut out = Vec::new();
    let mut round = 0;
    while served < arrivals.len() {
        while next < order.len() && arrivals[order[next]].round <= round {
            let i = order[next];
            discipline.enqueue(arrivals[i].flow, i as u64);
            next += 1;
        }
        let s = discipline.dequeue().map(|(_, tag)| tag as usize);
        served += s.is_some() as usize;
        out.push(s);
        round += 1;
    }
    out
}

pub fn fifo_schedule(arrivals: &[Arrival]) -> Vec<Option<usize>> {
    serve_arrivals(&mut Fifo::new(), arrivals)
}

/// Panics if a weight is not positive and finite.
pub fn wf2q_schedule(weights: &[f64], arrivals: &[Arrival]) -> Vec<Option<usize>> {
    let mut w = Wf2q::new(weights).expect("positive finite weights");
    serve_arrivals(&mut w, arrivals)
}

#[cfg(test)]
mod tests;
