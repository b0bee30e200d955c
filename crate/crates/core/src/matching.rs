//! Maximum-weight bipartite matching via shortest augmenting paths with
//! potentials (Hungarian method on the negated, zero-padded square matrix).

/// Returns, for each helper row, the matched user column (None = idle).
/// Weights are non-negative, row-major [helper][user]; absent edges are 0.
/// Zero-weight assignments are reported as idle.
pub fn max_weight_bipartite_matching(
    weights: &[f64],
    helpers: usize,
    users: usize,
) -> Vec<Option<usize>> {
    if helpers == 0 || users == 0 {
        return vec![None; helpers];
    }
    let n = helpers.max(users);
    // Minimize cost = -weight on an n x n matrix padded with zeros; the
    // padding makes the perfect matching exist and costs nothing.
    let cost = |i: usize, j: usize| -> f64 {
        if i < helpers && j < users {
            -weights[i * users + j]
        } else {
            0.0
        }
    };

    // Standard O(n^3) assignment with 1-based sentinel column 0.
    let mut u_pot = vec![0.0; n + 1];
    let mut v_pot = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column -> row (1-based)

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_v = vec![f64::INFINITY; n + 1];
        let mut way = vec![0usize; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u_pot[i0] - v_pot[j];
                    if cur < min_v[j] {
                        min_v[j] = cur;
                        way[j] = j0;
                    }
                    if min_v[j] < delta {
                        delta = min_v[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u_pot[matched_row[j]] += delta;
                    v_pot[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; helpers];
    for j in 1..=n {
        let i = matched_row[j];
        if i >= 1 && i - 1 < helpers && j - 1 < users {
            let w = weights[(i - 1) * users + (j - 1)];
            if w > 0.0 {
                assignment[i - 1] = Some(j - 1);
            }
        }
    }
    assignment
}

/// Total weight of an assignment.
pub fn matching_weight(weights: &[f64], users: usize, assignment: &[Option<usize>]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(h, a)| a.map(|u| weights[h * users + u]))
        .sum()
}
