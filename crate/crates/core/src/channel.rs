//! WINNER II A1 pathloss, LOS probability, closed-form peak rates, and the
//! per-slot SINR/rate table with edge-set construction.

use crate::error::ModelError;
use crate::expint::exp_integral_e1;

/// WINNER II A1 scenario constants: (A, B, C, sigma_db).
const LOS_PARAMS: (f64, f64, f64, f64) = (18.7, 46.8, 20.0, 3.0);
const NLOS_PARAMS: (f64, f64, f64, f64) = (36.8, 43.8, 20.0, 4.0);

/// The model is specified for d >= 3 m; shorter links reuse PL(3).
const MIN_MODEL_DISTANCE_M: f64 = 3.0;

pub fn shadowing_sigma_db(los: bool) -> f64 {
    if los {
        LOS_PARAMS.3
    } else {
        NLOS_PARAMS.3
    }
}

/// Pathloss in dB at distance `d` meters, carrier `f0` GHz, with a fixed
/// shadowing draw `shadow_db` added in.
pub fn pathloss_db(d: f64, los: bool, f0: f64, shadow_db: f64) -> Result<f64, ModelError> {
    if !(d > 0.0) {
        return Err(ModelError::Domain(format!(
            "pathloss requires d > 0, got {d}"
        )));
    }
    let (a, b, c, _) = if los { LOS_PARAMS } else { NLOS_PARAMS };
    let d_eff = d.max(MIN_MODEL_DISTANCE_M);
    Ok(a * d_eff.log10() + b + c * (f0 / 5.0).log10() + shadow_db)
}

/// Probability that a link of length `d` meters is in line of sight.
pub fn los_probability(d: f64) -> Result<f64, ModelError> {
    if !(d > 0.0) {
        return Err(ModelError::Domain(format!(
            "los_probability requires d > 0, got {d}"
        )));
    }
    if d <= 2.5 {
        return Ok(1.0);
    }
    let inner = 1.24 - 0.6 * d.log10();
    let p = 1.0 - 0.9 * (1.0 - inner.powi(3)).cbrt();
    Ok(p.clamp(0.0, 1.0))
}

/// Linear slow-fading gain from a pathloss in dB.
pub fn gain_from_pathloss_db(pl_db: f64) -> f64 {
    10f64.powf(-pl_db / 10.0)
}

/// Peak achievable rate in bits per channel symbol for a linear SINR `gamma`:
/// C = e^{1/gamma} * E1(1/gamma), with C -> 0 as gamma -> 0.
pub fn peak_rate(gamma: f64) -> Result<f64, ModelError> {
    if gamma < 0.0 {
        return Err(ModelError::Domain(format!(
            "peak_rate requires gamma >= 0, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let x = 1.0 / gamma;
    if x > 700.0 {
        // e^x overflows; use e^x E1(x) ~ 1/x asymptotics (first two terms).
        return Ok((1.0 - 1.0 / x) / x);
    }
    Ok(x.exp() * exp_integral_e1(x)?)
}

/// One realization of the slow link state between a helper and a user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub los: bool,
    pub shadow_db: f64,
    pub gain: f64,
}

impl LinkRealization {
    pub fn new(d: f64, los: bool, shadow_db: f64, f0: f64) -> Result<Self, ModelError> {
        let pl = pathloss_db(d, los, f0, shadow_db)?;
        Ok(Self {
            los,
            shadow_db,
            gain: gain_from_pathloss_db(pl),
        })
    }
}

/// Per-slot SINR and peak-rate matrices plus the serviceable edge set.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub helpers: usize,
    pub users: usize,
    /// Linear SINR, row-major [helper][user].
    pub gamma: Vec<f64>,
    /// Peak rate in bits per channel symbol, row-major [helper][user].
    pub peak_rate: Vec<f64>,
    /// Edges (h, u) with n * C_hu above the threshold.
    pub edges: Vec<(usize, usize)>,
    edge_mask: Vec<bool>,
}

impl RateTable {
    pub fn gamma_at(&self, h: usize, u: usize) -> f64 {
        self.gamma[h * self.users + u]
    }

    pub fn rate_at(&self, h: usize, u: usize) -> f64 {
        self.peak_rate[h * self.users + u]
    }

    pub fn has_edge(&self, h: usize, u: usize) -> bool {
        self.edge_mask[h * self.users + u]
    }

    /// Helpers in the neighborhood of user `u`, ascending id.
    pub fn neighbors_of_user(&self, u: usize) -> Vec<usize> {
        (0..self.helpers).filter(|&h| self.has_edge(h, u)).collect()
    }
}

/// Builds the rate table for one slot from the current link gains.
///
/// `gains` is row-major [helper][user]. Noise power is normalized to 1, and
/// the interference sum runs over all other helpers.
pub fn compute_rate_table(
    gains: &[f64],
    helpers: usize,
    users: usize,
    powers: &[f64],
    symbols_per_slot: f64,
    edge_threshold_bits: f64,
) -> Result<RateTable, ModelError> {
    assert_eq!(gains.len(), helpers * users);
    assert_eq!(powers.len(), helpers);
    let mut gamma = vec![0.0; helpers * users];
    let mut rates = vec![0.0; helpers * users];
    let mut edge_mask = vec![false; helpers * users];
    let mut edges = Vec::new();

    for u in 0..users {
        let rx: Vec<f64> = (0..helpers).map(|h| powers[h] * gains[h * users + u]).collect();
        let total: f64 = rx.iter().sum();
        for h in 0..helpers {
            let interference = total - rx[h];
            let g = rx[h] / (1.0 + interference);
            let c = peak_rate(g)?;
            gamma[h * users + u] = g;
            rates[h * users + u] = c;
            if symbols_per_slot * c > edge_threshold_bits {
                edge_mask[h * users + u] = true;
                edges.push((h, u));
            }
        }
    }

    Ok(RateTable {
        helpers,
        users,
        gamma,
        peak_rate: rates,
        edges,
        edge_mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pathloss_los_10m() {
        // 18.7 * log10(10) + 46.8
        let pl = pathloss_db(10.0, true, 5.0, 0.0).unwrap();
        assert!((pl - 65.5).abs() < 1e-12);
    }

    #[test]
    fn pathloss_clamps_below_3m() {
        let pl1 = pathloss_db(1.0, false, 5.0, 0.0).unwrap();
        let pl3 = pathloss_db(3.0, false, 5.0, 0.0).unwrap();
        assert_eq!(pl1, pl3);
        assert!((pl1 - (36.8 * 3f64.log10() + 43.8)).abs() < 1e-9);
    }

    #[test]
    fn pathloss_with_shadowing() {
        let pl = pathloss_db(3.0, true, 5.0, 2.0).unwrap();
        assert!((pl - (18.7 * 3f64.log10() + 46.8 + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn pathloss_rejects_non_positive_distance() {
        assert!(pathloss_db(0.0, true, 5.0, 0.0).is_err());
    }

    #[test]
    fn pathloss_non_decreasing_beyond_3m() {
        for los in [true, false] {
            let mut prev = f64::NEG_INFINITY;
            let mut d = 3.0;
            while d <= 100.0 {
                let pl = pathloss_db(d, los, 5.0, 0.0).unwrap();
                assert!(pl.is_finite() && pl >= prev);
                prev = pl;
                d += 0.5;
            }
        }
    }

    #[test]
    fn los_probability_branches() {
        assert_eq!(los_probability(2.0).unwrap(), 1.0);
        assert_eq!(los_probability(2.5).unwrap(), 1.0);
        let p10 = los_probability(10.0).unwrap();
        let expected = 1.0 - 0.9 * (1.0 - (1.24 - 0.6 * 10f64.log10()).powi(3)).cbrt();
        assert!((p10 - expected).abs() < 1e-12);
        assert!(p10 > 0.0 && p10 < 1.0);
    }

    #[test]
    fn peak_rate_limits() {
        assert_eq!(peak_rate(0.0).unwrap(), 0.0);
        let c1 = peak_rate(1.0).unwrap();
        assert!((c1 - std::f64::consts::E * exp_integral_e1(1.0).unwrap()).abs() < 1e-12);
        assert!((c1 - 0.596347).abs() < 1e-6);
        let c100 = peak_rate(100.0).unwrap();
        assert!(c100 > 0.0 && c100 < (1.0 + 100.0f64).ln());
    }

    #[test]
    fn peak_rate_strictly_increasing() {
        let mut prev = 0.0;
        for i in 1..200 {
            let g = 10f64.powf(-3.0 + 6.0 * (i as f64) / 200.0);
            let c = peak_rate(g).unwrap();
            assert!(c > prev, "not increasing at gamma={g}");
            assert!(c <= (1.0 + g).ln() + 1e-12);
            prev = c;
        }
    }

    #[test]
    fn rate_table_single_link() {
        let table = compute_rate_table(&[1.0], 1, 1, &[1e8], 8.4e6, 1e6).unwrap();
        assert_eq!(table.gamma_at(0, 0), 1e8);
        assert!((table.rate_at(0, 0) - peak_rate(1e8).unwrap()).abs() < 1e-12);
        assert!(table.has_edge(0, 0));
    }

    #[test]
    fn rate_table_symmetric_interference() {
        // Two helpers, equal power and gain: gamma = Pg / (1 + Pg) < 1.
        let table = compute_rate_table(&[1e-8, 1e-8], 2, 1, &[1e8, 1e8], 8.4e6, 1e6).unwrap();
        let expected = 1.0 / (1.0 + 1.0);
        assert!((table.gamma_at(0, 0) - expected).abs() < 1e-12);
        assert!((table.gamma_at(1, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn rate_table_threshold_excludes_weak_links() {
        // Pick a gain so that n*C lands just under 1 Mb for every helper.
        let mut gains = vec![1e-9, 1e-9];
        let table =
            compute_rate_table(&gains, 2, 1, &[1e8, 1e8], 8.4e6, 1e6).unwrap();
        for h in 0..2 {
            assert!(8.4e6 * table.rate_at(h, 0) < 1e6);
        }
        assert!(table.edges.is_empty());
        assert!(table.neighbors_of_user(0).is_empty());
        // Strengthen one link and the edge appears.
        gains[0] = 1e-6;
        let table = compute_rate_table(&gains, 2, 1, &[1e8, 1e8], 8.4e6, 1e6).unwrap();
        assert_eq!(table.neighbors_of_user(0), vec![0]);
    }

    #[test]
    fn rate_table_helper_permutation_equivariance() {
        let gains = vec![3e-7, 5e-8, 1e-6, 2e-7, 4e-8, 9e-7];
        let t = compute_rate_table(&gains, 3, 2, &[1e8; 3], 8.4e6, 1e6).unwrap();
        // Swap helper rows 0 and 2.
        let swapped = vec![4e-8, 9e-7, 1e-6, 2e-7, 3e-7, 5e-8];
        let s = compute_rate_table(&swapped, 3, 2, &[1e8; 3], 8.4e6, 1e6).unwrap();
        for u in 0..2 {
            assert!((t.rate_at(0, u) - s.rate_at(2, u)).abs() < 1e-12);
            assert!((t.rate_at(2, u) - s.rate_at(0, u)).abs() < 1e-12);
            assert!((t.rate_at(1, u) - s.rate_at(1, u)).abs() < 1e-12);
        }
    }
}
