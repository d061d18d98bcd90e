//! Maximum-weight assignment by the Hungarian method with potentials.

use alloc::vec::Vec;

const FORBIDDEN: i64 = 1 << 50;
const INF: i64 = i64::MAX / 4;

/// Assigns every row to a distinct column maximising total profit.
/// `profit[i][j] == None` forbids the cell. Requires `rows <= columns`;
/// returns `None` when no assignment avoids the forbidden cells.
/// Profits must stay well below 2^50 in magnitude.
pub fn max_weight_assignment(profit: &[Vec<Option<i64>>]) -> Option<Vec<usize>> {
    let n = profit.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let m = profit[0].len();
    assert!(profit.iter().all(|r| r.len() == m), "ragged profit matrix");
    if n > m {
        return None;
    }
    let cost = |i: usize, j: usize| profit[i - 1][j - 1].map_or(FORBIDDEN, |p| -p);

    let mut u = alloc::vec![0i64; n + 1];
    let mut v = alloc::vec![0i64; m + 1];
    let mut p = alloc::vec![0usize; m + 1];
    let mut way = alloc::vec![0usize; m + 1];
    let mut minv = alloc::vec![INF; m + 1];
    let mut used = alloc::vec![false; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.fill(INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col = alloc::vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            col[p[j] - 1] = j - 1;
        }
    }
    if col.iter().enumerate().any(|(i, &j)| profit[i][j].is_none()) {
        return None;
    }
    Some(col)
}
