//! Slot-by-slot orchestration: sessions, mobility, congestion control,
//! transmission scheduling, queue drainage and playback.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::compute_rate_table;
use crate::config::{PolicyVariant, SimConfig, VideoSource};
use crate::error::ModelError;
use crate::playback::{PlaybackMode, PlaybackState, SessionMetrics};
use crate::policy::{self, congestion_control_step, UserControlState};
use crate::schedule::{
    queue_update, schedule_macro_diversity, schedule_unique_association, ScheduleDecision,
};
use crate::topology::{LinkStateTracker, Topology, UserTrack};
use crate::video::{synth_profile, SynthSegment, VideoProfile};

/// Bits below this are treated as a fully drained chunk.
const DRAIN_EPS: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SessionRow {
    pub user: usize,
    pub metrics: SessionMetrics,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub sessions: Vec<SessionRow>,
    pub timeseries: Vec<(u64, f64)>,
    /// (chunk index, serving helper) for the mobile user, if any.
    pub helper_trace: Vec<(u64, usize)>,
    pub mean_total_backlog: f64,
    /// Sum over users of phi(mean requested quality).
    pub utility: f64,
    pub per_user_mean_quality: Vec<f64>,
}

struct ActiveSession {
    start_offset: usize,
    next_k: u64,
    session_len: u64,
    playback: PlaybackState,
    control: UserControlState,
    done_requesting: bool,
}

enum UserPhase {
    Idle,
    Active(ActiveSession),
    /// Requests finished and queues drained; playback still running locally.
    Draining(ActiveSession),
}

struct EdgeQueue {
    backlog: f64,
    fifo: VecDeque<(u64, f64)>, // (chunk request index, remaining bits)
}

impl EdgeQueue {
    fn new() -> Self {
        Self {
            backlog: 0.0,
            fifo: VecDeque::new(),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(stream.wrapping_mul(0xA5A5_5A5A))))
}

pub struct Simulation {
    config: SimConfig,
    topology: Topology,
    profile: VideoProfile,
    mobile_user: Option<usize>,
}

impl Simulation {
    /// Resolves topology (user placement) and the video profile from the
    /// config; all randomness flows from named seed streams.
    pub fn build(config: SimConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut placement_rng = stream_rng(config.seed, 1);
        let spec = &config.topology;
        let mut tracks: Vec<UserTrack> = Vec::new();
        for &p in &spec.explicit_user_positions {
            tracks.push(UserTrack::Static(p));
        }
        for _ in 0..spec.static_users {
            let p = match spec.cluster_center {
                Some((cx, cy)) => {
                    let r = spec.cluster_radius_m * placement_rng.gen::<f64>().sqrt();
                    let phi = placement_rng.gen::<f64>() * std::f64::consts::TAU;
                    (
                        (cx + r * phi.cos()).clamp(0.0, spec.area.0),
                        (cy + r * phi.sin()).clamp(0.0, spec.area.1),
                    )
                }
                None => (
                    placement_rng.gen::<f64>() * spec.area.0,
                    placement_rng.gen::<f64>() * spec.area.1,
                ),
            };
            tracks.push(UserTrack::Static(p));
        }
        let mobile_user = if spec.mobile_waypoints.is_empty() {
            None
        } else {
            tracks.push(UserTrack::Mobile {
                waypoints: spec.mobile_waypoints.clone(),
                speed_mps: spec.mobile_speed_mps,
            });
            Some(tracks.len() - 1)
        };
        let topology = Topology {
            helper_positions: spec.helpers.clone(),
            user_tracks: tracks,
            area: spec.area,
            slot_seconds: config.slot_seconds,
        };
        topology.validate()?;

        let mut profile_rng = stream_rng(config.seed, 2);
        let profile = match &config.video {
            VideoSource::File(path) => crate::video::load_profile(path)?,
            VideoSource::Synth {
                segments,
                size_range_bits,
                ssim_range,
            } => {
                let segs: Vec<SynthSegment> = segments
                    .iter()
                    .map(|&(chunks, mode_count)| SynthSegment {
                        chunks,
                        mode_count,
                        size_range_bits: *size_range_bits,
                        quality_range: *ssim_range,
                    })
                    .collect();
                synth_profile(&segs, &mut profile_rng)?
            }
        };

        Ok(Self {
            config,
            topology,
            profile,
            mobile_user,
        })
    }

    pub fn run(&self) -> Result<MetricsReport, ModelError> {
        let cfg = &self.config;
        let helpers = self.topology.helpers();
        let users = self.topology.users();
        let bounds = self.profile.quality_bounds();
        let profile_len = self.profile.len();

        let mut channel_rng = stream_rng(cfg.seed, 3);
        let mut sessions_rng = stream_rng(cfg.seed, 4);
        let mut tracker =
            LinkStateTracker::new(helpers, users, cfg.carrier_ghz, cfg.link_redraw_distance_m);
        let powers = vec![cfg.power; helpers];

        let mut phases: Vec<UserPhase> = (0..users).map(|_| UserPhase::Idle).collect();
        let mut queues: Vec<EdgeQueue> = (0..helpers * users).map(|_| EdgeQueue::new()).collect();

        let mut finished_sessions: Vec<SessionRow> = Vec::new();
        let mut timeseries: Vec<(u64, f64)> = Vec::with_capacity(cfg.horizon as usize);
        let mut helper_trace: Vec<(u64, usize)> = Vec::new();
        let mut quality_sum = vec![0.0f64; users];
        let mut quality_count = vec![0u64; users];
        let mut backlog_acc = 0.0f64;

        let start_session = |u: usize, t: u64, seed: u64| -> ActiveSession {
            let start_offset = (splitmix64(seed ^ (u as u64) << 20 ^ t) % profile_len as u64) as usize;
            ActiveSession {
                start_offset,
                next_k: 1,
                session_len: cfg.session_chunks,
                playback: PlaybackState::new(cfg.session_chunks, t, cfg.rho, cfg.xi, cfg.delta),
                control: UserControlState::new(cfg.v_param, cfg.alpha, bounds),
                done_requesting: false,
            }
        };

        for t in 0..cfg.horizon {
            // 1. Mobility and link state.
            let positions: Vec<(f64, f64)> = (0..users)
                .map(|u| self.topology.user_position(u, t))
                .collect();
            let gains = tracker.update(&self.topology.helper_positions, &positions, &mut channel_rng)?;
            let table = compute_rate_table(
                &gains,
                helpers,
                users,
                &powers,
                cfg.symbols_per_slot,
                cfg.edge_threshold_bits,
            )?;

            // 2. Session arrivals. One draw per user per slot regardless of
            // phase keeps the stream aligned across policy variants.
            for u in 0..users {
                let draw: f64 = sessions_rng.gen();
                let start = match &phases[u] {
                    UserPhase::Idle => {
                        if cfg.start_all_at_zero {
                            t == 0
                        } else {
                            draw < cfg.idle_restart_prob
                        }
                    }
                    _ => false,
                };
                if start {
                    phases[u] = UserPhase::Active(start_session(u, t, cfg.seed));
                }
            }

            // 3. Congestion control (reads the pre-arrival queue snapshot).
            let mut arrivals: Vec<(usize, usize, u64, f64)> = Vec::new(); // (h, u, k, bits)
            for u in 0..users {
                let UserPhase::Active(sess) = &mut phases[u] else {
                    continue;
                };
                if sess.done_requesting {
                    continue;
                }
                let k = sess.next_k;
                let modes = self.profile.chunk_at(k, sess.start_offset);
                let action = match cfg.variant {
                    PolicyVariant::MaxSinr => {
                        // Client association by best peak rate; quality rule
                        // unchanged.
                        let mut best: Option<(usize, f64)> = None;
                        for h in 0..helpers {
                            if !table.has_edge(h, u) {
                                continue;
                            }
                            let c = table.rate_at(h, u);
                            match best {
                                None => best = Some((h, c)),
                                Some((_, bc)) if c > bc => best = Some((h, c)),
                                _ => {}
                            }
                        }
                        best.and_then(|(h, _)| {
                            let q = queues[h * users + u].backlog;
                            congestion_control_step(&mut sess.control, &[(h, q)], modes)
                        })
                    }
                    _ => {
                        let candidates: Vec<(usize, f64)> = (0..helpers)
                            .filter(|&h| table.has_edge(h, u))
                            .map(|h| (h, queues[h * users + u].backlog))
                            .collect();
                        congestion_control_step(&mut sess.control, &candidates, modes)
                    }
                };
                if let Some(action) = action {
                    sess.playback
                        .on_chunk_requested(k, t, action.requested_quality);
                    arrivals.push((action.helper, u, k, action.request_bits));
                    quality_sum[u] += action.requested_quality;
                    quality_count[u] += 1;
                    if Some(u) == self.mobile_user {
                        helper_trace.push((k, action.helper));
                    }
                    sess.next_k += 1;
                    if sess.next_k > sess.session_len {
                        sess.done_requesting = true;
                    }
                }
                // Deferred requests retry the same chunk next slot.
            }

            // 4. Transmission scheduling on the pre-arrival snapshot.
            let decision = self.schedule_slot(&table, &queues, helpers, users);

            // 5. Serve queues, detect chunk completions, then add arrivals.
            for (h, assigned) in decision.assignment.iter().enumerate() {
                let Some(u) = assigned else { continue };
                let eq = &mut queues[h * users + u];
                let (new_backlog, delivered) =
                    queue_update(eq.backlog, decision.service_bits[h], 0.0);
                eq.backlog = new_backlog;
                let mut remaining = delivered;
                while remaining > 0.0 {
                    let Some(front) = eq.fifo.front_mut() else { break };
                    if front.1 <= remaining + DRAIN_EPS {
                        remaining -= front.1;
                        remaining = remaining.max(0.0);
                        let (k, _) = eq.fifo.pop_front().unwrap();
                        if let UserPhase::Active(sess) | UserPhase::Draining(sess) =
                            &mut phases[*u]
                        {
                            sess.playback.on_chunk_delivered(k, t);
                        }
                    } else {
                        front.1 -= remaining;
                        remaining = 0.0;
                    }
                }
            }
            for (h, u, k, bits) in arrivals {
                let eq = &mut queues[h * users + u];
                eq.backlog += bits;
                eq.fifo.push_back((k, bits));
            }

            // 6. Playback advance and phase transitions.
            for u in 0..users {
                let mut to_draining = false;
                let done = match &mut phases[u] {
                    UserPhase::Active(sess) => {
                        sess.playback.advance_slot(t);
                        to_draining = sess.done_requesting
                            && (0..helpers).all(|h| queues[h * users + u].backlog == 0.0);
                        false
                    }
                    UserPhase::Draining(sess) => {
                        sess.playback.advance_slot(t);
                        sess.playback.mode == PlaybackMode::Done
                    }
                    UserPhase::Idle => false,
                };
                if to_draining {
                    if let UserPhase::Active(sess) =
                        std::mem::replace(&mut phases[u], UserPhase::Idle)
                    {
                        phases[u] = UserPhase::Draining(sess);
                    }
                }
                if done {
                    if let UserPhase::Draining(sess) =
                        std::mem::replace(&mut phases[u], UserPhase::Idle)
                    {
                        finished_sessions.push(SessionRow {
                            user: u,
                            metrics: sess.playback.metrics(),
                        });
                    }
                }
            }

            // 7. Backlog sample: real queues plus virtual queues.
            let total_q: f64 = queues.iter().map(|q| q.backlog).sum();
            let total_theta: f64 = phases
                .iter()
                .map(|p| match p {
                    UserPhase::Active(s) | UserPhase::Draining(s) => s.control.theta,
                    UserPhase::Idle => 0.0,
                })
                .sum();
            let total = total_q + total_theta;
            backlog_acc += total;
            timeseries.push((t, total));
        }

        // Sessions still open at the horizon are reported as-is.
        for (u, phase) in phases.into_iter().enumerate() {
            if let UserPhase::Active(sess) | UserPhase::Draining(sess) = phase {
                finished_sessions.push(SessionRow {
                    user: u,
                    metrics: sess.playback.metrics(),
                });
            }
        }
        finished_sessions.sort_by_key(|r| r.user);

        let per_user_mean_quality: Vec<f64> = (0..users)
            .map(|u| {
                if quality_count[u] == 0 {
                    0.0
                } else {
                    quality_sum[u] / quality_count[u] as f64
                }
            })
            .collect();
        let utility = per_user_mean_quality
            .iter()
            .filter(|&&q| q > 0.0)
            .map(|&q| policy::utility(q, cfg.alpha))
            .sum();

        Ok(MetricsReport {
            sessions: finished_sessions,
            timeseries,
            helper_trace,
            mean_total_backlog: backlog_acc / cfg.horizon as f64,
            utility,
            per_user_mean_quality,
        })
    }

    fn schedule_slot(
        &self,
        table: &crate::channel::RateTable,
        queues: &[EdgeQueue],
        helpers: usize,
        users: usize,
    ) -> ScheduleDecision {
        match self.config.variant {
            PolicyVariant::DppUnique => {
                let q: Vec<f64> = queues.iter().map(|e| e.backlog).collect();
                // Backlogged edges stay schedulable even if the edge dropped
                // below the threshold, so departing queues always drain.
                let mask: Vec<bool> = (0..helpers * users)
                    .map(|i| {
                        let h = i / users;
                        let u = i % users;
                        table.has_edge(h, u) || queues[i].backlog > 0.0
                    })
                    .collect();
                schedule_unique_association(
                    &q,
                    &table.peak_rate,
                    &mask,
                    helpers,
                    users,
                    self.config.symbols_per_slot,
                )
            }
            PolicyVariant::DppMacro | PolicyVariant::MaxSinr => {
                let per_helper: Vec<Vec<(usize, f64, f64)>> = (0..helpers)
                    .map(|h| {
                        (0..users)
                            .filter(|&u| queues[h * users + u].backlog > 0.0)
                            .map(|u| (u, queues[h * users + u].backlog, table.rate_at(h, u)))
                            .collect()
                    })
                    .collect();
                schedule_macro_diversity(&per_helper, self.config.symbols_per_slot)
            }
        }
    }
}

/// Runs the config once per V value with a common seed; reports
/// (V, time-averaged total backlog, utility).
pub fn sweep_v(config: &SimConfig, v_list: &[f64]) -> Result<Vec<(f64, f64, f64)>, ModelError> {
    let mut out = Vec::new();
    for &v in v_list {
        let mut cfg = config.clone();
        cfg.v_param = v;
        let sim = Simulation::build(cfg)?;
        let report = sim.run()?;
        out.push((v, report.mean_total_backlog, report.utility));
    }
    Ok(out)
}
