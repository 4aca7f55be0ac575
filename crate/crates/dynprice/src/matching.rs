//! Assignment and bipartite matching primitives on integer weights.

use std::collections::VecDeque;

/// Minimum-cost perfect assignment of a square matrix.
///
/// Returns `col[r]`, the column assigned to row `r`. Ties resolve the same
/// way on every run.
pub fn hungarian_min(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    const INF: i64 = i64::MAX / 4;
    // 1-indexed potentials; p[j] is the row matched to column j.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
            for j in 0..=n {
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
    let mut col = vec![0usize; n];
    for j in 1..=n {
        col[p[j] - 1] = j - 1;
    }
    col
}

/// Maximum-weight perfect assignment; returns `(total, col)`.
pub fn hungarian_max(weight: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let cost: Vec<Vec<i64>> = weight.iter().map(|r| r.iter().map(|w| -w).collect()).collect();
    let col = hungarian_min(&cost);
    let total = col.iter().enumerate().map(|(r, &c)| weight[r][c]).sum();
    (total, col)
}

/// Maximum bipartite matching by augmenting paths.
///
/// `adj[l]` lists right vertices. Returns `(match_left, match_right)`.
pub fn kuhn(adj: &[Vec<usize>], right: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut ml = vec![None; adj.len()];
    let mut mr = vec![None; right];
    for l in 0..adj.len() {
        let mut seen = vec![false; right];
        augment(l, adj, &mut seen, &mut ml, &mut mr);
    }
    (ml, mr)
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    seen: &mut [bool],
    ml: &mut [Option<usize>],
    mr: &mut [Option<usize>],
) -> bool {
    for &r in &adj[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if mr[r].is_none() || augment(mr[r].unwrap(), adj, seen, ml, mr) {
            ml[l] = Some(r);
            mr[r] = Some(l);
            return true;
        }
    }
    false
}

/// Left and right vertices reachable from `start` by alternating paths.
pub fn alternating_closure(
    start: usize,
    adj: &[Vec<usize>],
    mr: &[Option<usize>],
) -> (Vec<bool>, Vec<bool>) {
    let mut zl = vec![false; adj.len()];
    let mut zr = vec![false; mr.len()];
    let mut queue = VecDeque::from([start]);
    zl[start] = true;
    while let Some(l) = queue.pop_front() {
        for &r in &adj[l] {
            if zr[r] {
                continue;
            }
            zr[r] = true;
            if let Some(l2) = mr[r] {
                if !zl[l2] {
                    zl[l2] = true;
                    queue.push_back(l2);
                }
            }
        }
    }
    (zl, zr)
}
