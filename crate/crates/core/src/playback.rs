//! Per-user playback machinery: arrival bookkeeping, the playable frontier,
//! chunk skipping with threshold rho, sliding-window delay estimation, and
//! the adaptive pre-buffering/re-buffering start rule.

use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaybackMode {
    Prebuffering,
    Playing,
    Rebuffering,
    Done,
}

/// What happened to a chunk by the end of the session.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ChunkRecord {
    request_slot: Option<u64>,
    arrival_slot: Option<u64>,
    playable_slot: Option<u64>,
    quality: f64,
    skipped: bool,
}

impl ChunkRecord {
    fn empty() -> Self {
        Self {
            request_slot: None,
            arrival_slot: None,
            playable_slot: None,
            quality: 0.0,
            skipped: false,
        }
    }
}

/// Sliding-window maximum of per-chunk delays W_k = A_k - t_k, keyed by the
/// arrival slot.
#[derive(Debug, Clone, Default)]
pub struct DelayEstimator {
    /// (arrival_slot, delay) in arrival order.
    records: Vec<(u64, u64)>,
    pub delta: u64,
}

impl DelayEstimator {
    pub fn new(delta: u64) -> Self {
        assert!(delta >= 1);
        Self {
            records: Vec::new(),
            delta,
        }
    }

    pub fn record(&mut self, arrival_slot: u64, delay: u64) {
        self.records.push((arrival_slot, delay));
    }

    /// E_t = max{W_k : t - delta + 1 <= A_k <= t}; 0 on an empty window.
    pub fn window_max(&self, t: u64) -> u64 {
        let lo = (t + 1).saturating_sub(self.delta);
        self.records
            .iter()
            .rev()
            .take_while(|(a, _)| *a >= lo)
            .filter(|(a, _)| *a <= t)
            .map(|(_, w)| *w)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SlotEvents {
    pub newly_playable: u64,
    pub skipped_chunk: Option<u64>,
    pub stalled: bool,
    pub started_playback: bool,
    pub consumed_chunk: bool,
}

/// Per-session playback state. Chunks are 1-based request indices.
#[derive(Debug, Clone)]
pub struct PlaybackState {
    chunks: Vec<ChunkRecord>,
    /// Arrived chunks beyond the frontier.
    pending: BTreeSet<u64>,
    pub frontier: u64,
    pub buffer_level: u64,
    pub mode: PlaybackMode,
    pub consumed: u64,
    pub skipped: Vec<u64>,
    pub estimator: DelayEstimator,
    /// Start of the current (re)buffering playback phase; consumption runs
    /// for t > t_start.
    pub t_start: u64,
    pub initial_prebuf_slots: Option<u64>,
    pub session_start_slot: u64,
    pub stall_count: u64,
    pub rebuffering_slots: u64,
    pub playing_slots: u64,
    pub rho: f64,
    pub xi: f64,
    duplicate_deliveries: u64,
    last_slot: Option<u64>,
    total_chunks: u64,
}

impl PlaybackState {
    pub fn new(total_chunks: u64, session_start_slot: u64, rho: f64, xi: f64, delta: u64) -> Self {
        Self {
            chunks: vec![ChunkRecord::empty(); total_chunks as usize],
            pending: BTreeSet::new(),
            frontier: 0,
            buffer_level: 0,
            mode: PlaybackMode::Prebuffering,
            consumed: 0,
            skipped: Vec::new(),
            estimator: DelayEstimator::new(delta),
            t_start: 0,
            initial_prebuf_slots: None,
            session_start_slot,
            stall_count: 0,
            rebuffering_slots: 0,
            playing_slots: 0,
            rho,
            xi,
            duplicate_deliveries: 0,
            last_slot: None,
            total_chunks,
        }
    }

    pub fn total_chunks(&self) -> u64 {
        self.total_chunks
    }

    fn rec(&self, k: u64) -> &ChunkRecord {
        &self.chunks[(k - 1) as usize]
    }

    fn rec_mut(&mut self, k: u64) -> &mut ChunkRecord {
        &mut self.chunks[(k - 1) as usize]
    }

    pub fn on_chunk_requested(&mut self, k: u64, t: u64, quality: f64) {
        let r = self.rec_mut(k);
        r.request_slot = Some(t);
        r.quality = quality;
    }

    /// Records arrival A_k = t and feeds the delay estimator.
    pub fn on_chunk_delivered(&mut self, k: u64, t: u64) {
        if self.rec(k).arrival_slot.is_some() {
            self.duplicate_deliveries += 1;
            return;
        }
        let t_req = self.rec(k).request_slot.unwrap_or(t);
        self.rec_mut(k).arrival_slot = Some(t);
        self.estimator.record(t, t.saturating_sub(t_req));
        if k > self.frontier {
            self.pending.insert(k);
        }
    }

    /// Time P_k at which chunk k became playable (all j <= k arrived or
    /// skipped-over), if it has.
    pub fn playable_time(&self, k: u64) -> Option<u64> {
        self.rec(k).playable_slot
    }

    fn mark_playable_run(&mut self, from: u64, to: u64, t: u64) {
        for k in from..=to {
            self.pending.remove(&k);
            if !self.rec(k).skipped {
                self.rec_mut(k).playable_slot = Some(t);
            }
        }
    }

    /// Frontier/skip update for slot t; returns the buffer increment.
    fn frontier_step(&mut self, t: u64, events: &mut SlotEvents) -> u64 {
        let k_star = self.frontier;
        let Some(&k_minus) = self.pending.iter().next() else {
            return 0;
        };
        if k_minus == k_star + 1 {
            // Contiguous run becomes playable.
            let mut run_end = k_star + 1;
            while self.pending.contains(&(run_end + 1)) {
                run_end += 1;
            }
            self.mark_playable_run(k_star + 1, run_end, t);
            self.frontier = run_end;
            return run_end - k_star;
        }
        // Gap: wait unless more than rho out-of-order chunks are buffered.
        if (self.pending.len() as f64) <= self.rho {
            return 0;
        }
        // Skip exactly one chunk (k*+1) this slot.
        self.rec_mut(k_star + 1).skipped = true;
        self.skipped.push(k_star + 1);
        events.skipped_chunk = Some(k_star + 1);
        if k_minus == k_star + 2 {
            // Frontier jumps over the skipped chunk to the end of the run.
            let mut run_end = k_star + 2;
            while self.pending.contains(&(run_end + 1)) {
                run_end += 1;
            }
            self.mark_playable_run(k_star + 1, run_end, t);
            self.frontier = run_end;
            run_end - k_star - 1
        } else {
            // Still missing k*+2: frontier passes the skipped chunk only.
            self.frontier = k_star + 1;
            0
        }
    }

    /// Advances one slot: frontier/skip logic, consumption, stall detection
    /// and the buffering start test.
    pub fn advance_slot(&mut self, t: u64) -> SlotEvents {
        if let Some(prev) = self.last_slot {
            assert!(t > prev, "slots must strictly increase");
        }
        self.last_slot = Some(t);
        let mut events = SlotEvents::default();
        if self.mode == PlaybackMode::Done {
            return events;
        }

        let lambda = self.frontier_step(t, &mut events);
        events.newly_playable = lambda;

        // Consumption uses the pre-arrival buffer level.
        if self.mode == PlaybackMode::Playing && t > self.t_start {
            if self.buffer_level > 0 {
                self.buffer_level -= 1;
                self.consumed += 1;
                events.consumed_chunk = true;
                self.playing_slots += 1;
                if self.consumed + self.skipped.len() as u64 == self.total_chunks {
                    self.mode = PlaybackMode::Done;
                }
            } else {
                // Buffer underrun: stall and re-enter buffering.
                self.stall_count += 1;
                events.stalled = true;
                self.mode = PlaybackMode::Rebuffering;
            }
        }

        self.buffer_level += lambda;

        match self.mode {
            PlaybackMode::Prebuffering | PlaybackMode::Rebuffering => {
                if self.start_rule(t) {
                    if self.mode == PlaybackMode::Prebuffering {
                        self.initial_prebuf_slots = Some(t - self.session_start_slot);
                    }
                    self.mode = PlaybackMode::Playing;
                    self.t_start = t;
                    events.started_playback = true;
                } else if self.mode == PlaybackMode::Rebuffering {
                    self.rebuffering_slots += 1;
                }
            }
            _ => {}
        }
        events
    }

    /// Start when the buffer crosses xi * E_t, with a floor of one playable
    /// chunk so an empty window cannot start an empty buffer.
    pub fn start_rule(&self, t: u64) -> bool {
        if self.buffer_level == 0 {
            return false;
        }
        let e_t = self.estimator.window_max(t) as f64;
        self.buffer_level as f64 >= self.xi * e_t
    }

    /// Buffer underrun per chunk: not playable by its deadline t_k + T_u
    /// (initial pre-buffering time); skipped chunks count as underruns.
    pub fn underrun_rate(&self) -> f64 {
        let t_u = match self.initial_prebuf_slots {
            Some(v) => v,
            None => return 0.0,
        };
        let requested: Vec<&ChunkRecord> = self
            .chunks
            .iter()
            .filter(|c| c.request_slot.is_some())
            .collect();
        if requested.is_empty() {
            return 0.0;
        }
        let underruns = requested
            .iter()
            .filter(|c| {
                if c.skipped {
                    return true;
                }
                let deadline = c.request_slot.unwrap() + t_u;
                match c.playable_slot {
                    Some(p) => p > deadline,
                    None => true,
                }
            })
            .count();
        underruns as f64 / requested.len() as f64
    }

    pub fn metrics(&self) -> SessionMetrics {
        let requested = self
            .chunks
            .iter()
            .filter(|c| c.request_slot.is_some())
            .count() as u64;
        let delivered: Vec<&ChunkRecord> = self
            .chunks
            .iter()
            .filter(|c| c.arrival_slot.is_some() && !c.skipped)
            .collect();
        let mean_ssim = if delivered.is_empty() {
            0.0
        } else {
            delivered.iter().map(|c| c.quality).sum::<f64>() / delivered.len() as f64
        };
        let skipped_pct = if requested == 0 {
            0.0
        } else {
            100.0 * self.skipped.len() as f64 / requested as f64
        };
        let playback_span = self.playing_slots + self.rebuffering_slots;
        let rebuf_frac = if playback_span == 0 {
            0.0
        } else {
            self.rebuffering_slots as f64 / playback_span as f64
        };
        let prebuf = self.initial_prebuf_slots.unwrap_or(0);
        let buffering_frac = {
            let total = prebuf + playback_span;
            if total == 0 {
                1.0
            } else {
                (prebuf + self.rebuffering_slots) as f64 / total as f64
            }
        };
        SessionMetrics {
            requested_chunks: requested,
            skipped_pct,
            mean_ssim,
            prebuf_slots: prebuf,
            rebuf_frac,
            buffering_frac,
            stall_count: self.stall_count,
            underrun_rate: self.underrun_rate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionMetrics {
    pub requested_chunks: u64,
    pub skipped_pct: f64,
    pub mean_ssim: f64,
    pub prebuf_slots: u64,
    pub rebuf_frac: f64,
    /// Fraction of session slots spent buffering, pre-buffering included.
    pub buffering_frac: f64,
    pub stall_count: u64,
    pub underrun_rate: f64,
}
