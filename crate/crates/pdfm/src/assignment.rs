//! Exact solver for the square linear assignment problem.
//!
//! Shortest-augmenting-path formulation with dual potentials, `O(n^3)`.
//! All comparisons are strict, so ties are resolved by scanning order
//! (lowest index wins) and the result is deterministic for a fixed cost
//! matrix. On a constant matrix the solver returns the identity assignment.

/// Minimizes `sum_i cost[i][assign[i]]` over permutations. `cost` must be
/// square with finite entries. Returns the column assigned to each row.
pub(crate) fn solve(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(cost.iter().all(|row| row.len() == n));

    // 1-based arrays; index 0 is the virtual root of each augmenting path.
    let mut u = vec![0.0_f64; n + 1]; // row potentials
    let mut v = vec![0.0_f64; n + 1]; // column potentials
    let mut matched_row = vec![0_usize; n + 1]; // matched_row[j] = row on column j (0 = free)
    let mut way = vec![0_usize; n + 1]; // predecessor column on the alternating path

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0_usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];

        // Grow the alternating tree until a free column is reached.
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0_usize;
            for j in 1..=n {
                if !used[j] {
                    let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if reduced < min_slack[j] {
                        min_slack[j] = reduced;
                        way[j] = j0;
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }

        // Flip the matching along the path back to the root.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![usize::MAX; n];
    for j in 1..=n {
        if matched_row[j] != 0 {
            assign[matched_row[j] - 1] = j - 1;
        }
    }
    debug_assert!(assign.iter().all(|&j| j != usize::MAX));
    assign
}

/// Total cost of an assignment under a cost matrix.
#[cfg(test)]
fn total(cost: &[Vec<f64>], assign: &[usize]) -> f64 {
    assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive minimum over all permutations, for cross-checking.
    fn brute_min(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
            if row == cost.len() {
                if acc < *best {
                    *best = acc;
                }
                return;
            }
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost[row][j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.len()], 0.0, &mut best);
        best
    }

    #[test]
    fn solves_known_instance() {
        let cost = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let assign = solve(&cost);
        assert_eq!(total(&cost, &assign), 5.0); // 1 + 2 + 2
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        // Small deterministic LCG so the test needs no rng dependency here.
        let mut state = 0x2545F4914F6CDD1D_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64
        };
        for n in 1..=6 {
            for _ in 0..40 {
                let cost: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next() * 10.0).collect()).collect();
                let assign = solve(&cost);
                let got = total(&cost, &assign);
                let want = brute_min(&cost);
                assert!(
                    (got - want).abs() < 1e-9,
                    "n={n}: solver {got} vs brute force {want}"
                );
            }
        }
    }

    #[test]
    fn constant_matrix_yields_identity() {
        // Every permutation is optimal; scanning order must pick the identity
        // so that downstream self-alignments are reproducible.
        for n in 1..=5 {
            let cost = vec![vec![2.5; n]; n];
            let assign = solve(&cost);
            let identity: Vec<usize> = (0..n).collect();
            assert_eq!(assign, identity);
        }
    }

    #[test]
    fn zero_diagonal_preferred_under_ties() {
        // Identity is optimal and unique here; off-diagonal entries tie.
        let cost = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        assert_eq!(solve(&cost), vec![0, 1, 2]);
    }

    #[test]
    fn empty_instance() {
        assert!(solve(&[]).is_empty());
    }
}
