//! Minimum-cost assignment between two equally sized sets.

/// Size up to which assignments are found by exhaustive enumeration, which
/// also allows an exact secondary tie-break.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Permutation `perm` minimizing `Σ_i cost[i][perm[i]]`; among assignments
/// whose cost is within `tie_tol` of the optimum, the one maximizing
/// `Σ_i reward[i][perm[i]]` wins.
///
/// Uses enumeration for `n ≤ EXHAUSTIVE_LIMIT` and the Hungarian algorithm
/// (primary cost only) above that.
pub fn assign(cost: &[Vec<f64>], reward: &[Vec<f64>], tie_tol: f64) -> Vec<usize> {
    let n = cost.len();
    if n <= EXHAUSTIVE_LIMIT {
        exhaustive(cost, reward, tie_tol)
    } else {
        hungarian(cost)
    }
}

fn exhaustive(cost: &[Vec<f64>], reward: &[Vec<f64>], tie_tol: f64) -> Vec<usize> {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize], m: &[Vec<f64>]| p.iter().enumerate().map(|(i, &j)| m[i][j]).sum::<f64>();
    let mut best = perm.clone();
    let mut best_cost = total(&perm, cost);
    let mut best_reward = total(&perm, reward);

    // Heap's algorithm, iterative form
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let c = total(&perm, cost);
            if c < best_cost - tie_tol {
                best_cost = c;
                best_reward = total(&perm, reward);
                best.clone_from(&perm);
            } else if c <= best_cost + tie_tol {
                let r = total(&perm, reward);
                if r > best_reward {
                    best_cost = best_cost.min(c);
                    best_reward = r;
                    best.clone_from(&perm);
                }
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    best
}

/// Kuhn-Munkres with potentials, O(n³).
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a sentinel
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0usize;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let cur = cost[r0 - 1][col - 1] - u[r0] - v[col];
                if cur < minv[col] {
                    minv[col] = cur;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for col in 1..=n {
        perm[owner[col] - 1] = col - 1;
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for col in 0..cost.len() {
                if !used[col] {
                    used[col] = true;
                    best = best.min(cost[row][col] + rec(cost, row + 1, used));
                    used[col] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    fn value(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
        perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
    }

    #[test]
    fn identity_for_diagonal_minimum() {
        let cost = vec![vec![0.0, 1.0, 4.0], vec![1.0, 0.0, 1.0], vec![4.0, 1.0, 0.0]];
        let zero = vec![vec![0.0; 3]; 3];
        assert_eq!(assign(&cost, &zero, 0.0), vec![0, 1, 2]);
        assert_eq!(hungarian(&cost), vec![0, 1, 2]);
    }

    #[test]
    fn tie_broken_by_reward() {
        let cost = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let reward = vec![vec![0.1, 0.9], vec![0.8, 0.2]];
        assert_eq!(assign(&cost, &reward, 1e-12), vec![1, 0]);
    }

    #[test]
    fn large_sizes_use_hungarian() {
        let n = 10;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (((i + 3) % n) as f64 - j as f64).powi(2)).collect())
            .collect();
        let zero = vec![vec![0.0; n]; n];
        let perm = assign(&cost, &zero, 0.0);
        assert_eq!(value(&cost, &perm), 0.0);
    }

    proptest! {
        #[test]
        fn hungarian_and_enumeration_are_optimal(
            n in 1usize..7,
            seed in prop::collection::vec(0.0f64..10.0, 36),
        ) {
            let cost: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| seed[i * 6 + j]).collect()).collect();
            let zero = vec![vec![0.0; n]; n];
            let oracle = brute_force_min(&cost);
            let h = hungarian(&cost);
            let e = assign(&cost, &zero, 0.0);
            let mut seen = h.clone();
            seen.sort();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
            prop_assert!((value(&cost, &h) - oracle).abs() < 1e-9);
            prop_assert!((value(&cost, &e) - oracle).abs() < 1e-9);
        }
    }
}
