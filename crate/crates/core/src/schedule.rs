//! Per-slot transmission scheduling (macro-diversity and unique-association
//! variants) and the queue update.

use crate::matching::max_weight_bipartite_matching;

/// The service decision for one slot: per-helper served user and the bits
/// granted on that edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleDecision {
    /// assignment[h] = Some(u) when helper h serves user u at its peak rate.
    pub assignment: Vec<Option<usize>>,
    /// Bits offered this slot per served edge, aligned with `assignment`.
    pub service_bits: Vec<f64>,
}

/// Each helper independently serves argmax Q*C at the full peak rate.
/// Ties break to the smallest user id; all-zero weights idle the helper.
pub fn schedule_macro_diversity(
    per_helper: &[Vec<(usize, f64, f64)>],
    symbols_per_slot: f64,
) -> ScheduleDecision {
    let mut assignment = Vec::with_capacity(per_helper.len());
    let mut service_bits = Vec::with_capacity(per_helper.len());
    for cands in per_helper {
        let mut best: Option<(usize, f64, f64)> = None;
        for &(u, q, c) in cands {
            let w = q * c;
            if w <= 0.0 {
                continue;
            }
            match best {
                None => best = Some((u, w, c)),
                Some((bu, bw, _)) => {
                    if w > bw || (w == bw && u < bu) {
                        best = Some((u, w, c));
                    }
                }
            }
        }
        match best {
            Some((u, _, c)) => {
                assignment.push(Some(u));
                service_bits.push(symbols_per_slot * c);
            }
            None => {
                assignment.push(None);
                service_bits.push(0.0);
            }
        }
    }
    ScheduleDecision {
        assignment,
        service_bits,
    }
}

/// Centralized unique-association scheduling: maximum-weight bipartite
/// matching on weights Q*C restricted to the edge set; matched pairs get the
/// full peak rate.
pub fn schedule_unique_association(
    queues: &[f64],
    rates: &[f64],
    edge_mask: &[bool],
    helpers: usize,
    users: usize,
    symbols_per_slot: f64,
) -> ScheduleDecision {
    let weights: Vec<f64> = (0..helpers * users)
        .map(|i| if edge_mask[i] { queues[i] * rates[i] } else { 0.0 })
        .collect();
    let assignment = max_weight_bipartite_matching(&weights, helpers, users);
    let service_bits = assignment
        .iter()
        .enumerate()
        .map(|(h, a)| match a {
            Some(u) => symbols_per_slot * rates[h * users + u],
            None => 0.0,
        })
        .collect();
    ScheduleDecision {
        assignment,
        service_bits,
    }
}

/// One edge's queue step: drain up to `service_bits`, then add arrivals.
/// Returns (new_backlog, delivered_bits).
pub fn queue_update(backlog: f64, service_bits: f64, arrival_bits: f64) -> (f64, f64) {
    debug_assert!(backlog >= 0.0 && service_bits >= 0.0 && arrival_bits >= 0.0);
    let delivered = backlog.min(service_bits);
    ((backlog - delivered) + arrival_bits, delivered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn macro_diversity_argmax() {
        // Weights (3*2, 5*1) = (6, 5): serve user 0 at C = 2.
        let d = schedule_macro_diversity(&[vec![(0, 3.0, 2.0), (1, 5.0, 1.0)]], 1.0);
        assert_eq!(d.assignment, vec![Some(0)]);
        assert_eq!(d.service_bits, vec![2.0]);
    }

    #[test]
    fn macro_diversity_idles_on_zero_queues() {
        let d = schedule_macro_diversity(
            &[vec![(0, 0.0, 2.0)], vec![(0, 0.0, 1.0), (1, 0.0, 3.0)]],
            1.0,
        );
        assert_eq!(d.assignment, vec![None, None]);
    }

    #[test]
    fn macro_diversity_two_helpers_same_user() {
        let d = schedule_macro_diversity(
            &[vec![(0, 5.0, 1.0)], vec![(0, 5.0, 2.0)]],
            1.0,
        );
        assert_eq!(d.assignment, vec![Some(0), Some(0)]);
    }

    #[test]
    fn macro_diversity_matches_lp_vertices() {
        // Brute force over the simplex vertices of the per-helper LP.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let n = rng.gen_range(1..6);
            let cands: Vec<(usize, f64, f64)> = (0..n)
                .map(|u| (u, rng.gen_range(0.0..100.0), rng.gen_range(0.01..5.0)))
                .collect();
            let d = schedule_macro_diversity(&[cands.clone()], 1.0);
            let best_vertex = cands
                .iter()
                .map(|&(_, q, c)| q * c)
                .fold(0.0f64, f64::max);
            let achieved = match d.assignment[0] {
                Some(u) => {
                    let &(_, q, c) = cands.iter().find(|&&(x, _, _)| x == u).unwrap();
                    q * c
                }
                None => 0.0,
            };
            assert!((achieved - best_vertex).abs() < 1e-9);
        }
    }

    #[test]
    fn unique_association_user_side_constraint() {
        // 2 helpers, 1 user: only the larger Q*C helper serves.
        let d = schedule_unique_association(
            &[10.0, 20.0],
            &[1.0, 1.0],
            &[true, true],
            2,
            1,
            1.0,
        );
        assert_eq!(d.assignment, vec![None, Some(0)]);
    }

    #[test]
    fn unique_association_block_diagonal() {
        let queues = [5.0, 0.0, 0.0, 7.0];
        let rates = [1.0, 1.0, 1.0, 1.0];
        let d = schedule_unique_association(&queues, &rates, &[true; 4], 2, 2, 1.0);
        assert_eq!(d.assignment, vec![Some(0), Some(1)]);
    }

    #[test]
    fn unique_association_spreads_under_congestion() {
        // All four users backlogged at helper 0 but with positive
        // cross-edges: matching serves four distinct users, max-SINR style
        // association would serve one.
        let helpers = 4;
        let users = 4;
        let mut queues = vec![0.0; 16];
        let mut rates = vec![0.0; 16];
        for u in 0..users {
            for h in 0..helpers {
                queues[h * users + u] = 1e6;
                rates[h * users + u] = if h == 0 { 2.0 } else { 1.0 };
            }
        }
        let d = schedule_unique_association(&queues, &rates, &[true; 16], helpers, users, 1.0);
        let served: Vec<usize> = d.assignment.iter().flatten().cloned().collect();
        assert_eq!(served.len(), 4);
        let mut sorted = served.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
    }

    #[test]
    fn queue_update_cases() {
        assert_eq!(queue_update(10.0, 4.0, 3.0), (9.0, 4.0));
        assert_eq!(queue_update(2.0, 5.0, 0.0), (0.0, 2.0));
        assert_eq!(queue_update(0.0, 5.0, 7.0), (7.0, 0.0));
    }

    #[test]
    fn queue_conservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let q = rng.gen_range(0.0..1e6);
            let s = rng.gen_range(0.0..1e6);
            let a = rng.gen_range(0.0..1e6);
            let (q2, delivered) = queue_update(q, s, a);
            assert!(q2 >= 0.0);
            assert!((q2 - q - (a - delivered)).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_weights_keeps_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let helpers = 3;
            let users = 4;
            let queues: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..1e6)).collect();
            let rates: Vec<f64> = (0..12).map(|_| rng.gen_range(0.01..5.0)).collect();
            let scaled: Vec<f64> = queues.iter().map(|q| q * 13.7).collect();
            let mask = vec![true; 12];
            let a = schedule_unique_association(&queues, &rates, &mask, helpers, users, 1.0);
            let b = schedule_unique_association(&scaled, &rates, &mask, helpers, users, 1.0);
            assert_eq!(a.assignment, b.assignment);

            let per_helper: Vec<Vec<(usize, f64, f64)>> = (0..helpers)
                .map(|h| {
                    (0..users)
                        .map(|u| (u, queues[h * users + u], rates[h * users + u]))
                        .collect()
                })
                .collect();
            let per_helper_scaled: Vec<Vec<(usize, f64, f64)>> = (0..helpers)
                .map(|h| {
                    (0..users)
                        .map(|u| (u, scaled[h * users + u], rates[h * users + u]))
                        .collect()
                })
                .collect();
            let ma = schedule_macro_diversity(&per_helper, 1.0);
            let mb = schedule_macro_diversity(&per_helper_scaled, 1.0);
            assert_eq!(ma.assignment, mb.assignment);
        }
    }
}
