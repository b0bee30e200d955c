//! Per-user congestion control: helper selection, quality selection, the
//! auxiliary variable gamma and the virtual quality queue.

use crate::video::{Mode, QualityBounds};

/// Alpha-fair utility phi(x); alpha = 1 is log(x), alpha = 0 is linear.
pub fn utility(x: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        x.ln()
    } else if alpha == 0.0 {
        x
    } else {
        x.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

#[derive(Debug, Clone)]
pub struct UserControlState {
    pub theta: f64,
    pub v_param: f64,
    pub alpha: f64,
    pub bounds: QualityBounds,
}

impl UserControlState {
    pub fn new(v_param: f64, alpha: f64, bounds: QualityBounds) -> Self {
        assert!(v_param > 0.0);
        assert!(alpha >= 0.0);
        Self {
            theta: 0.0,
            v_param,
            alpha,
            bounds,
        }
    }
}

/// The complete congestion-control decision for one user and slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlAction {
    pub helper: usize,
    pub mode: usize,
    pub request_bits: f64,
    pub gamma: f64,
    pub requested_quality: f64,
}

/// Shortest-queue helper among the candidates; ties to the smallest id.
/// Returns None when the candidate set is empty (unserviceable this slot).
pub fn select_helper(candidates: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(h, q) in candidates {
        match best {
            None => best = Some((h, q)),
            Some((bh, bq)) => {
                if q < bq || (q == bq && h < bh) {
                    best = Some((h, q));
                }
            }
        }
    }
    best.map(|(h, _)| h)
}

/// Quality mode minimizing q_star * size - theta * quality; ties to the
/// smallest mode index. Sizes already carry the per-chunk pixel count.
pub fn select_quality(q_star: f64, theta: f64, modes: &[Mode]) -> usize {
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (m, mode) in modes.iter().enumerate() {
        let score = q_star * mode.size_bits - theta * mode.quality;
        if score < best_score {
            best_score = score;
            best = m;
        }
    }
    best
}

/// Closed-form maximizer of V*phi(gamma) - theta*gamma over the quality
/// bounds.
pub fn gamma_update(theta: f64, v_param: f64, alpha: f64, bounds: QualityBounds) -> f64 {
    if theta <= 0.0 {
        return bounds.d_max;
    }
    if alpha == 0.0 {
        return if theta <= v_param {
            bounds.d_max
        } else {
            bounds.d_min
        };
    }
    // Stationarity: V * gamma^{-alpha} = theta.
    let unconstrained = (v_param / theta).powf(1.0 / alpha);
    unconstrained.clamp(bounds.d_min, bounds.d_max)
}

/// Virtual queue step: theta' = max(theta + gamma - delivered_quality, 0).
pub fn virtual_queue_update(theta: f64, gamma: f64, quality: f64) -> f64 {
    (theta + gamma - quality).max(0.0)
}

/// Runs the full per-user control step: helper, quality, request, gamma and
/// theta. `candidates` pairs helper ids with their queue backlog toward this
/// user. Returns None (state untouched) when no helper is reachable; the
/// request is deferred and the chunk index must not advance.
pub fn congestion_control_step(
    state: &mut UserControlState,
    candidates: &[(usize, f64)],
    modes: &[Mode],
) -> Option<ControlAction> {
    let helper = select_helper(candidates)?;
    let q_star = candidates
        .iter()
        .find(|&&(h, _)| h == helper)
        .map(|&(_, q)| q)
        .unwrap();
    let mode = select_quality(q_star, state.theta, modes);
    let gamma = gamma_update(state.theta, state.v_param, state.alpha, state.bounds);
    let quality = modes[mode].quality;
    state.theta = virtual_queue_update(state.theta, gamma, quality);
    Some(ControlAction {
        helper,
        mode,
        request_bits: modes[mode].size_bits,
        gamma,
        requested_quality: quality,
    })
}
