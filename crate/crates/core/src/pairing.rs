//! Random permutations and the trading pairs derived from them.
//!
//! [`fisher_yates`] is the single-pass shuffle. [`PipelineState`] runs `q`
//! staggered shuffle instances so that, once warm, one finished permutation
//! falls out of the pipeline every period. Here each period advances every
//! lane by one loop iteration sequentially.

use alloc::vec::Vec;

use rand::Rng;

/// Shuffles `items` in place with exactly `len - 1` random draws.
pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    let n = items.len();
    if n < 2 {
        return;
    }
    // the last iteration (i == n - 1) is a no-op and draws nothing
    for i in 0..n - 1 {
        let j = rng.random_range(i..n);
        items.swap(i, j);
    }
}

/// A uniformly random permutation of `0..n`.
pub fn fisher_yates<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    shuffle(rng, &mut perm);
    perm
}

#[derive(Clone, Debug)]
struct Lane {
    perm: Vec<usize>,
    step: usize,
    started: bool,
}

/// `q` Fisher–Yates instances; lane `k` starts after waiting `k` periods and
/// then restarts its shuffle on the same array as soon as it finishes.
#[derive(Clone, Debug)]
pub struct PipelineState {
    q: usize,
    lanes: Vec<Lane>,
    t: u64,
}

impl PipelineState {
    /// Panics if `q == 0`.
    pub fn new(q: usize) -> Self {
        assert!(q > 0, "pipeline needs at least one lane");
        let lanes = (0..q)
            .map(|_| Lane {
                perm: (0..q).collect(),
                step: 0,
                started: false,
            })
            .collect();
        PipelineState { q, lanes, t: 0 }
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn periods(&self) -> u64 {
        self.t
    }

    /// Number of leading periods that emit nothing.
    pub fn warm_up(&self) -> u64 {
        self.q as u64 - 1
    }

    /// Advances every active lane by one shuffle step and returns the
    /// permutation of the lane that completed this period, if any.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Vec<usize>> {
        let q = self.q;
        let mut done = None;
        for (k, lane) in self.lanes.iter_mut().enumerate() {
            if !lane.started {
                if (k as u64) > self.t {
                    continue;
                }
                lane.started = true;
            }
            let i = lane.step;
            if i < q - 1 {
                let j = rng.random_range(i..q);
                lane.perm.swap(i, j);
                lane.step += 1;
            } else {
                lane.step = 0;
                debug_assert!(done.is_none(), "two lanes finished in one period");
                done = Some(k);
            }
        }
        self.t += 1;
        done.map(|k| self.lanes[k].perm.clone())
    }
}

pub fn pipeline_step<R: Rng + ?Sized>(state: &mut PipelineState, rng: &mut R) -> Option<Vec<usize>> {
    state.step(rng)
}

/// `partner[i] == Some(j)` iff `i` and `j` are paired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub partner: Vec<Option<usize>>,
}

impl Pairing {
    /// Pairs `perm[2i]` with `perm[2i + 1]`; with odd length the last entry
    /// stays unpaired.
    pub fn from_permutation(perm: &[usize]) -> Self {
        let mut partner = alloc::vec![None; perm.len()];
        for pair in perm.chunks_exact(2) {
            partner[pair[0]] = Some(pair[1]);
            partner[pair[1]] = Some(pair[0]);
        }
        Pairing { partner }
    }

    /// Each pair once, as `(perm[2i], perm[2i + 1])` in pairing order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.filter(|&j| i < j).map(|j| (i, j)))
    }

    pub fn is_involution(&self) -> bool {
        let mut unpaired = 0;
        for (i, p) in self.partner.iter().enumerate() {
            match p {
                Some(j) => {
                    if *j == i || self.partner.get(*j) != Some(&Some(i)) {
                        return false;
                    }
                }
                None => unpaired += 1,
            }
        }
        unpaired <= 1 && unpaired == self.partner.len() % 2
    }
}

pub fn pairing_from_permutation(perm: &[usize]) -> Pairing {
    Pairing::from_permutation(perm)
}

/// Where a trading period's permutation comes from.
#[derive(Clone, Debug)]
pub enum PairingSource {
    /// A fresh Fisher–Yates shuffle per period.
    Direct,
    /// Pipelined shuffles of a fixed size. Requests for fewer elements keep
    /// the relative order of the indices below the requested size, which is
    /// again uniform.
    Pipelined(PipelineState),
}

impl PairingSource {
    pub fn pipelined(size: usize) -> Self {
        PairingSource::Pipelined(PipelineState::new(size.max(1)))
    }

    /// Fills `out` with the pairs for `n` participants, in pairing order.
    pub fn draw_pairs<R: Rng + ?Sized>(&mut self, rng: &mut R, n: usize, scratch: &mut Vec<usize>, out: &mut Vec<(usize, usize)>) {
        out.clear();
        scratch.clear();
        match self {
            PairingSource::Direct => {
                scratch.extend(0..n);
                shuffle(rng, scratch);
            }
            PairingSource::Pipelined(state) => {
                if n > state.size() {
                    *state = PipelineState::new(n);
                }
                let perm = loop {
                    if let Some(p) = state.step(rng) {
                        break p;
                    }
                };
                scratch.extend(perm.into_iter().filter(|&x| x < n));
            }
        }
        out.extend(scratch.chunks_exact(2).map(|c| (c[0], c[1])));
    }
}
