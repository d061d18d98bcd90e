use super::*;
use crate::economy::RunLength;
use crate::money::Money;
use crate::packet::{FlowKind, FlowSpec, TradeMode, TradingPolicy, ValueFunction};
use alloc::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn job(id: usize, release: u32, deadline: u32, weight: i64) -> Job {
    Job {
        id,
        release,
        deadline,
        weight,
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..left.len() {
            let x = left.remove(k);
            prefix.push(x);
            go(prefix, left, out);
            prefix.pop();
            left.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

fn brute_force_max(jobs: &[Job]) -> i64 {
    permutations(jobs.len())
        .iter()
        .map(|p| total_wealth(jobs, &schedule_in_order(jobs, p)))
        .max()
        .unwrap()
}

#[test]
fn wealth_examples() {
    let j = [job(0, 0, 8, 4)];
    assert_eq!(total_wealth(&j, &Schedule { completion: vec![1] }), 28);
    let j = [job(0, 0, 3, 4)];
    assert_eq!(total_wealth(&j, &Schedule { completion: vec![3] }), 0);
    let j = [job(0, 0, 9, 0), job(1, 0, 9, 0)];
    assert_eq!(total_wealth(&j, &Schedule { completion: vec![1, 2] }), 0);
}

#[test]
fn greedy_serves_heaviest_first() {
    let jobs = [job(0, 0, 100, 1), job(1, 0, 100, 4), job(2, 0, 100, 1)];
    let s = mtw_greedy(&jobs);
    assert_eq!(s.order(), vec![1, 0, 2]);
    assert_eq!(total_wealth(&jobs, &s), brute_force_max(&jobs));
    assert!(s.is_valid(&jobs));

    let equal = [job(0, 0, 100, 2), job(1, 0, 100, 2), job(2, 0, 100, 2)];
    let w: Vec<i64> = permutations(3)
        .iter()
        .map(|p| total_wealth(&equal, &schedule_in_order(&equal, p)))
        .collect();
    assert!(w.iter().all(|&x| x == w[0]));

    let single = [job(0, 0, 5, 3)];
    assert_eq!(mtw_greedy(&single).completion, vec![1]);
    assert_eq!(mtw_optimal(&single).completion, vec![1]);
}

#[test]
fn optimal_beats_greedy_on_frozen_instance() {
    // the heavy job is worthless at any slot; greedy still serves it first
    let jobs = [job(0, 0, 1, 5), job(1, 0, 3, 1)];
    assert_eq!(total_wealth(&jobs, &mtw_greedy(&jobs)), 1);
    assert_eq!(total_wealth(&jobs, &mtw_optimal(&jobs)), 2);
}

#[test]
fn greedy_idles_until_release() {
    let jobs = [job(0, 3, 10, 1), job(1, 5, 10, 2)];
    let s = mtw_greedy(&jobs);
    assert_eq!(s.completion, vec![4, 6]);
    assert!(s.is_valid(&jobs));
    assert!(!Schedule { completion: vec![5, 6] }.is_valid(&jobs));
    assert!(!Schedule { completion: vec![3, 6] }.is_valid(&jobs));
}

fn instance(max_n: usize, with_deadlines: bool) -> impl Strategy<Value = Vec<Job>> {
    prop::collection::vec((0u32..4, 1u32..7, 0i64..10), 1..=max_n).prop_map(move |raw| {
        raw.into_iter()
            .enumerate()
            .map(|(id, (r, d, w))| job(id, r, if with_deadlines { r + d } else { 1000 }, w))
            .collect()
    })
}

proptest! {
    #[test]
    fn optimal_matches_brute_force(jobs in instance(6, true)) {
        let s = mtw_optimal(&jobs);
        prop_assert!(s.is_valid(&jobs));
        prop_assert_eq!(total_wealth(&jobs, &s), brute_force_max(&jobs));
        prop_assert!(total_wealth(&jobs, &mtw_greedy(&jobs)) <= total_wealth(&jobs, &s));
    }

    #[test]
    fn greedy_is_optimal_without_deadlines(jobs in instance(6, false)) {
        prop_assert_eq!(total_wealth(&jobs, &mtw_greedy(&jobs)), total_wealth(&jobs, &mtw_optimal(&jobs)));
    }
}

fn saturated(weights: &[f64], rounds: usize) -> Vec<usize> {
    let mut w = Wf2q::new(weights).unwrap();
    // a deep backlog so no flow ever empties
    for _ in 0..8 {
        for f in 0..weights.len() {
            w.enqueue(f, f as u64);
        }
    }
    (0..rounds)
        .map(|_| {
            let (f, tag) = w.dequeue().unwrap();
            w.enqueue(f, tag);
            f
        })
        .collect()
}

#[test]
fn wf2q_equal_weights_alternate() {
    let served = saturated(&[1.0, 1.0], 20);
    assert!(served.windows(2).all(|p| p[0] != p[1]));
}

#[test]
fn wf2q_three_to_one() {
    let served = saturated(&[3.0, 1.0], 40_000);
    let a = served.iter().filter(|&&f| f == 0).count() as i64;
    let b = served.len() as i64 - a;
    assert!((a - 3 * b).abs() <= 4, "{a} vs {b}");
}

#[test]
fn wf2q_tracks_fluid_share_within_one_packet() {
    let weights = [5.0, 2.0, 1.0, 1.0];
    let total: f64 = weights.iter().sum();
    let served = saturated(&weights, 5_000);
    let mut counts = [0f64; 4];
    for (t, &f) in served.iter().enumerate() {
        counts[f] += 1.0;
        for i in 0..4 {
            let fluid = (t + 1) as f64 * weights[i] / total;
            assert!((counts[i] - fluid).abs() <= 1.0 + 1e-9, "flow {i} at {t}");
        }
    }
}

#[test]
fn single_flow_wf2q_is_fifo() {
    let arrivals: Vec<Arrival> = [0, 0, 1, 4, 4, 4].iter().map(|&r| Arrival { round: r, flow: 0 }).collect();
    assert_eq!(wf2q_schedule(&[2.0], &arrivals), fifo_schedule(&arrivals));
}

#[test]
fn fifo_examples() {
    let arrivals: Vec<Arrival> = (0..5).map(|i| Arrival { round: 0, flow: i % 2 }).collect();
    let served = fifo_schedule(&arrivals);
    assert_eq!(served, (0..5).map(Some).collect::<Vec<_>>());
    // simultaneous arrivals see delays 1..q
    let delays: Vec<usize> = served.iter().enumerate().map(|(t, _)| t + 1).collect();
    assert_eq!(delays, vec![1, 2, 3, 4, 5]);

    let arrivals = [Arrival { round: 2, flow: 0 }];
    assert_eq!(fifo_schedule(&arrivals), vec![None, None, Some(0)]);
}

#[test]
fn equal_weights_serve_the_same_multiset() {
    let arrivals: Vec<Arrival> = (0..30).map(|i| Arrival { round: i / 3, flow: (i * 7 % 4) as usize }).collect();
    let mut a: Vec<_> = fifo_schedule(&arrivals).into_iter().flatten().collect();
    let mut b: Vec<_> = wf2q_schedule(&[1.0; 4], &arrivals).into_iter().flatten().collect();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
}

fn window_flow(id: usize, window: u32, v: i64, c: i64) -> FlowSpec {
    FlowSpec {
        id,
        kind: FlowKind::WindowBased { window },
        value_fn: ValueFunction::with_default_deadline(Money::from_units(v), Money::from_units(c)).unwrap(),
        policy: TradingPolicy::new(TradeMode::NeverTrade),
    }
}

#[test]
fn closed_loop_fifo_delay_is_queue_length() {
    let mut flows: Vec<FlowSpec> = (0..9).map(|i| window_flow(i, 1, 400, 1)).collect();
    flows.push(window_flow(9, 3, 1600, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = run_closed_loop(&mut Fifo::new(), &flows, RunLength::Deliveries(4_800), 0, &mut rng).unwrap();
    assert_eq!(r.deliveries(), 4_800);
    for f in &r.flows {
        assert_eq!(f.max_delay, 12);
        assert_eq!(f.delay_sum, 12 * f.delivered);
    }
    assert_eq!(r.flows[9].delivered, 1_200);
}

#[test]
fn closed_loop_wf2q_favours_heavy_flow() {
    let flows = [window_flow(0, 1, 400, 1), window_flow(1, 1, 400, 1), window_flow(2, 1, 1600, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut w = Wf2q::new(&[1.0, 1.0, 4.0]).unwrap();
    let r = run_closed_loop(&mut w, &flows, RunLength::Rounds(3_000), 0, &mut rng).unwrap();
    assert!(r.flows[2].delivered >= r.flows[0].delivered);
    assert_eq!(r.deliveries(), 3_000);
}
