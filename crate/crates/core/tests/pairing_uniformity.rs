use std::collections::HashMap;

use packet_economy::pairing::{fisher_yates, pairing_from_permutation, PairingSource, PipelineState};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Replays a fixed list of raw words, panicking when it runs dry.
struct Scripted {
    words: Vec<u32>,
    next: usize,
}

impl Scripted {
    fn new(words: Vec<u32>) -> Self {
        Scripted { words, next: 0 }
    }
}

impl RngCore for Scripted {
    fn next_u32(&mut self) -> u32 {
        let w = self.words[self.next];
        self.next += 1;
        w
    }
    fn next_u64(&mut self) -> u64 {
        (self.next_u32() as u64) << 32
    }
    fn fill_bytes(&mut self, _: &mut [u8]) {
        unreachable!()
    }
}

/// A raw word that makes `random_range(lo..hi)` return `want` in one draw.
fn word_for(lo: usize, hi: usize, want: usize) -> u32 {
    let s = (hi - lo) as u64;
    let k = (want - lo) as u64;
    let base = (k << 32).div_ceil(s);
    for x in base..base + 64 {
        let mut rng = Scripted::new(vec![x as u32]);
        if rng.random_range(lo..hi) == want && rng.next == 1 {
            return x as u32;
        }
    }
    panic!("no single-draw word for {want} in {lo}..{hi}");
}

/// Every sequence of range draws, i.e. the product of `i..n` for `i < n - 1`.
fn draw_sequences(n: usize) -> Vec<Vec<usize>> {
    let mut seqs = vec![vec![]];
    for i in 0..n.saturating_sub(1) {
        seqs = seqs
            .into_iter()
            .flat_map(|s| {
                (i..n).map(move |j| {
                    let mut t = s.clone();
                    t.push(j);
                    t
                })
            })
            .collect();
    }
    seqs
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn fisher_yates_is_a_bijection_from_draws_to_permutations() {
    for n in 1..=4 {
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        let seqs = draw_sequences(n);
        assert_eq!(seqs.len(), factorial(n));
        for seq in &seqs {
            let words = seq.iter().enumerate().map(|(i, &j)| word_for(i, n, j)).collect();
            let mut rng = Scripted::new(words);
            let p = fisher_yates(&mut rng, n);
            assert_eq!(rng.next, seq.len());
            *seen.entry(p).or_default() += 1;
        }
        assert_eq!(seen.len(), factorial(n), "n={n}");
        assert!(seen.values().all(|&c| c == 1));
    }
}

fn chi_square_stat(counts: &HashMap<Vec<usize>, u64>, cells: usize, total: u64) -> f64 {
    let expect = total as f64 / cells as f64;
    let observed: f64 = counts.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // cells never hit contribute `expect` each
    observed + (cells - counts.len()) as f64 * expect
}

fn critical(cells: usize) -> f64 {
    ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(1.0 - 0.001)
}

#[test]
fn fisher_yates_chi_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let total = 200_000;
    let mut counts = HashMap::new();
    for _ in 0..total {
        *counts.entry(fisher_yates(&mut rng, n)).or_insert(0u64) += 1;
    }
    let cells = factorial(n);
    assert!(chi_square_stat(&counts, cells, total) < critical(cells));
}

fn pipeline_counts(q: usize, periods: u64, seed: u64) -> (HashMap<Vec<usize>, u64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PipelineState::new(q);
    let mut counts = HashMap::new();
    let mut emitted = 0;
    for t in 0..periods {
        match state.step(&mut rng) {
            Some(p) => {
                assert!(t >= state.warm_up());
                *counts.entry(p).or_insert(0u64) += 1;
                emitted += 1;
            }
            None => assert!(t < state.warm_up(), "gap at period {t}"),
        }
    }
    (counts, emitted)
}

#[test]
fn pipeline_chi_square_q3() {
    let periods = 60_000;
    let (counts, emitted) = pipeline_counts(3, periods, 5);
    assert_eq!(emitted, periods - 2);
    assert!(chi_square_stat(&counts, 6, emitted) < critical(6));
}

#[test]
fn pipeline_chi_square_q8() {
    // 40320 cells; enough periods for every expected count to exceed 5
    let periods = 400_000;
    let (counts, emitted) = pipeline_counts(8, periods, 6);
    assert_eq!(emitted, periods - 7);
    let cells = factorial(8);
    assert!(chi_square_stat(&counts, cells, emitted) < critical(cells));
}

#[test]
fn pipeline_q8_positions_chi_square() {
    let periods = 60_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = PipelineState::new(8);
    let mut at = [[0u64; 8]; 8];
    let mut emitted = 0u64;
    for _ in 0..periods {
        if let Some(p) = state.step(&mut rng) {
            emitted += 1;
            for (pos, &x) in p.iter().enumerate() {
                at[pos][x] += 1;
            }
        }
    }
    let expect = emitted as f64 / 8.0;
    for row in at {
        let stat: f64 = row.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        assert!(stat < critical(8));
    }
}

#[test]
fn direct_pairs_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 7;
    let mut src = PairingSource::Direct;
    let mut scratch = Vec::new();
    let mut out = Vec::new();
    let mut counts = HashMap::new();
    let periods = 60_000;
    for _ in 0..periods {
        src.draw_pairs(&mut rng, n, &mut scratch, &mut out);
        assert_eq!(out.len(), 3);
        for &(a, b) in &out {
            *counts.entry(vec![a.min(b), a.max(b)]).or_insert(0u64) += 1;
        }
    }
    let cells = n * (n - 1) / 2;
    assert_eq!(counts.len(), cells);
    assert!(chi_square_stat(&counts, cells, periods * 3) < critical(cells));
}

#[test]
fn pairing_is_an_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 0..12 {
        let p = pairing_from_permutation(&fisher_yates(&mut rng, n));
        assert!(p.is_involution());
        assert_eq!(p.partner.iter().filter(|x| x.is_none()).count(), n % 2);
    }
}
