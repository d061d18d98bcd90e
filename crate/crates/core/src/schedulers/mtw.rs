use alloc::vec::Vec;

use super::{max_weight_assignment, Job, Schedule};

/// Work-preserving list schedule: each slot serves the released job with
/// the smallest key, idling only when nothing has been released.
fn list_schedule<K: Ord>(jobs: &[Job], key: impl Fn(usize) -> K) -> Schedule {
    let n = jobs.len();
    let mut completion = alloc::vec![0; n];
    let mut done = alloc::vec![false; n];
    let mut t = 0u32;
    for _ in 0..n {
        let pick = |t: u32| (0..n).filter(|&i| !done[i] && jobs[i].release <= t).min_by_key(|&i| key(i));
        let i = match pick(t) {
            Some(i) => i,
            None => {
                t = (0..n).filter(|&i| !done[i]).map(|i| jobs[i].release).min().unwrap_or(t);
                pick(t).expect("a job is released at the earliest pending release")
            }
        };
        t += 1;
        completion[i] = t;
        done[i] = true;
    }
    Schedule { completion }
}

/// Serves, in every slot, the released job with the largest weight (lowest
/// id on ties).
pub fn mtw_greedy(jobs: &[Job]) -> Schedule {
    list_schedule(jobs, |i| (core::cmp::Reverse(jobs[i].weight), jobs[i].id))
}

/// Optimal schedule: a maximum-weight assignment of jobs to slots, then
/// list-scheduled by assigned slot, which never finishes a job later than
/// its slot and leaves no avoidable idle time.
pub fn mtw_optimal(jobs: &[Job]) -> Schedule {
    let n = jobs.len();
    if n == 0 {
        return Schedule { completion: Vec::new() };
    }
    let horizon = jobs.iter().map(|j| j.release).max().unwrap_or(0) + n as u32;
    let profit: Vec<Vec<Option<i64>>> = jobs
        .iter()
        .map(|j| {
            (1..=horizon)
                .map(|slot| (slot > j.release).then(|| j.weight * (j.deadline as i64 - slot as i64).max(0)))
                .collect()
        })
        .collect();
    let slots = max_weight_assignment(&profit).expect("horizon leaves room for every job");
    let schedule = list_schedule(jobs, |i| (slots[i], i));
    debug_assert!((0..n).all(|i| schedule.completion[i] as usize <= slots[i] + 1));
    schedule
}
