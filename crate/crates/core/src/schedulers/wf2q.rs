//! Worst-case fair weighted fair queueing against a GPS reference.
//!
//! Every arrival is stamped with a virtual start `S = max(V, F_prev)` and
//! finish `F = S + 1/w`. Each round serves, among packets already started in
//! the fluid system (`S <= V`), the one with the smallest finish tag; the
//! virtual clock then advances through one unit of real time, at rate
//! `1 / Σ w` over the flows still backlogged in the fluid system.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::Discipline;
use crate::error::ConfigError;
use crate::packet::FlowId;

const EPS: f64 = 1e-9;

#[derive(Copy, Clone, Debug)]
struct Stamped {
    start: f64,
    finish: f64,
    seq: u64,
    tag: u64,
}

#[derive(Clone, Debug)]
pub struct Wf2q {
    weights: Vec<f64>,
    queues: Vec<VecDeque<Stamped>>,
    last_finish: Vec<f64>,
    virtual_time: f64,
    seq: u64,
    len: usize,
}

impl Wf2q {
    pub fn new(weights: &[f64]) -> Result<Self, ConfigError> {
        if weights.is_empty() {
            return Err(ConfigError::NoFlows);
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(ConfigError::BadRate(i));
        }
        Ok(Wf2q {
            weights: weights.to_vec(),
            queues: alloc::vec![VecDeque::new(); weights.len()],
            last_finish: alloc::vec![0.0; weights.len()],
            virtual_time: 0.0,
            seq: 0,
            len: 0,
        })
    }

    pub fn virtual_time(&self) -> f64 {
        self.virtual_time
    }

    /// Moves the fluid reference forward by `dt` units of real time.
    fn advance(&mut self, mut dt: f64) {
        while dt > 0.0 {
            let v = self.virtual_time;
            let mut sum = 0.0;
            let mut next = f64::INFINITY;
            for (w, &f) in self.weights.iter().zip(&self.last_finish) {
                if f > v + EPS {
                    sum += w;
                    next = next.min(f);
                }
            }
            if sum == 0.0 {
                return;
            }
            let needed = (next - v) * sum;
            if needed >= dt {
                self.virtual_time += dt / sum;
                return;
            }
            self.virtual_time = next;
            dt -= needed;
        }
    }
}

impl Discipline for Wf2q {
    fn enqueue(&mut self, flow: FlowId, tag: u64) {
        let start = self.virtual_time.max(self.last_finish[flow]);
        let finish = start + 1.0 / self.weights[flow];
        self.last_finish[flow] = finish;
        self.queues[flow].push_back(Stamped {
            start,
            finish,
            seq: self.seq,
            tag,
        });
        self.seq += 1;
        self.len += 1;
    }

    fn dequeue(&mut self) -> Option<(FlowId, u64)> {
        let v = self.virtual_time;
        let heads = self.queues.iter().enumerate().filter_map(|(f, q)| q.front().map(|h| (f, *h)));
        let key = |&(f, h): &(usize, Stamped)| (h.finish, f, h.seq);
        let eligible = heads.clone().filter(|(_, h)| h.start <= v + EPS).min_by(|a, b| cmp_key(key(a), key(b)));
        let chosen = eligible.or_else(|| heads.min_by(|a, b| cmp_key((a.1.start, a.0, a.1.seq), (b.1.start, b.0, b.1.seq))));
        let (flow, _) = chosen?;
        let packet = self.queues[flow].pop_front().expect("head exists");
        self.len -= 1;
        self.advance(1.0);
        Some((flow, packet.tag))
    }

    fn len(&self) -> usize {
        self.len
    }
}

/// Tags within `EPS` count as equal so ties fall through to the flow id.
fn cmp_key(a: (f64, usize, u64), b: (f64, usize, u64)) -> core::cmp::Ordering {
    let first = if (a.0 - b.0).abs() <= EPS {
        core::cmp::Ordering::Equal
    } else {
        a.0.total_cmp(&b.0)
    };
    first.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}
