//! Network geometry: helper placement, user tracks, mobility, and the
//! slow link-state (LOS + shadowing) kept per link with distance-triggered
//! redraws.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::{
    gain_from_pathloss_db, los_probability, pathloss_db, shadowing_sigma_db, LinkRealization,
};
use crate::error::ModelError;

pub type Point = (f64, f64);

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// A user is either fixed in place or walks a piecewise-linear track at
/// constant speed (meters per slot derives from speed in m/s and the slot
/// duration).
#[derive(Debug, Clone)]
pub enum UserTrack {
    Static(Point),
    Mobile { waypoints: Vec<Point>, speed_mps: f64 },
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub helper_positions: Vec<Point>,
    pub user_tracks: Vec<UserTrack>,
    pub area: (f64, f64),
    pub slot_seconds: f64,
}

impl Topology {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.helper_positions.is_empty() {
            return Err(ModelError::Config("helper count must be >= 1".into()));
        }
        let inside = |p: Point| {
            p.0 >= 0.0 && p.1 >= 0.0 && p.0 <= self.area.0 && p.1 <= self.area.1
        };
        for &p in &self.helper_positions {
            if !inside(p) {
                return Err(ModelError::Config(format!(
                    "helper position {p:?} outside area {:?}",
                    self.area
                )));
            }
        }
        for track in &self.user_tracks {
            match track {
                UserTrack::Static(p) => {
                    if !inside(*p) {
                        return Err(ModelError::Config(format!(
                            "user position {p:?} outside area"
                        )));
                    }
                }
                UserTrack::Mobile { waypoints, speed_mps } => {
                    if *speed_mps < 0.0 {
                        return Err(ModelError::Config("waypoint speed must be >= 0".into()));
                    }
                    if waypoints.is_empty() {
                        return Err(ModelError::Config("mobile track needs waypoints".into()));
                    }
                    for p in waypoints {
                        if !inside(*p) {
                            return Err(ModelError::Config(format!(
                                "waypoint {p:?} outside area"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn helpers(&self) -> usize {
        self.helper_positions.len()
    }

    pub fn users(&self) -> usize {
        self.user_tracks.len()
    }

    /// Position of user `u` at slot `t`.
    pub fn user_position(&self, u: usize, t: u64) -> Point {
        match &self.user_tracks[u] {
            UserTrack::Static(p) => *p,
            UserTrack::Mobile { waypoints, speed_mps } => {
                let mut remaining = *speed_mps * self.slot_seconds * t as f64;
                if waypoints.len() == 1 || *speed_mps == 0.0 {
                    return waypoints[0];
                }
                for w in waypoints.windows(2) {
                    let seg = dist(w[0], w[1]);
                    if remaining <= seg {
                        if seg == 0.0 {
                            return w[0];
                        }
                        let f = remaining / seg;
                        return (
                            w[0].0 + f * (w[1].0 - w[0].0),
                            w[0].1 + f * (w[1].1 - w[0].1),
                        );
                    }
                    remaining -= seg;
                }
                *waypoints.last().unwrap()
            }
        }
    }

    /// Builds a rows x cols grid of square cells of the given side with one
    /// helper at each cell center.
    pub fn grid_helpers(rows: usize, cols: usize, cell_side: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(rows * cols);
        // Numbered left to right, bottom to top.
        for r in 0..rows {
            for c in 0..cols {
                out.push((
                    (c as f64 + 0.5) * cell_side,
                    (r as f64 + 0.5) * cell_side,
                ));
            }
        }
        out
    }
}

/// Slow-fading state per link. LOS and shadowing are redrawn only after the
/// user has moved at least `redraw_distance_m` since the previous draw for
/// that link; static users keep their draw for the whole run.
pub struct LinkStateTracker {
    helpers: usize,
    users: usize,
    f0_ghz: f64,
    redraw_distance_m: f64,
    draw_position: Vec<Option<Point>>,
    state: Vec<LinkRealization>,
}

impl LinkStateTracker {
    pub fn new(helpers: usize, users: usize, f0_ghz: f64, redraw_distance_m: f64) -> Self {
        Self {
            helpers,
            users,
            f0_ghz,
            redraw_distance_m,
            draw_position: vec![None; helpers * users],
            state: vec![
                LinkRealization {
                    los: true,
                    shadow_db: 0.0,
                    gain: 0.0,
                };
                helpers * users
            ],
        }
    }

    /// Refreshes every link for the given user positions; returns the gain
    /// matrix row-major [helper][user].
    pub fn update<R: Rng>(
        &mut self,
        helper_positions: &[Point],
        user_positions: &[Point],
        rng: &mut R,
    ) -> Result<Vec<f64>, ModelError> {
        assert_eq!(helper_positions.len(), self.helpers);
        assert_eq!(user_positions.len(), self.users);
        let mut gains = vec![0.0; self.helpers * self.users];
        for h in 0..self.helpers {
            for u in 0..self.users {
                let idx = h * self.users + u;
                let pos = user_positions[u];
                let redraw = match self.draw_position[idx] {
                    None => true,
                    Some(prev) => dist(prev, pos) >= self.redraw_distance_m,
                };
                let d = dist(helper_positions[h], pos).max(1e-3);
                if redraw {
                    let p_los = los_probability(d)?;
                    let los = rng.gen::<f64>() < p_los;
                    let sigma = shadowing_sigma_db(los);
                    let shadow = Normal::new(0.0, sigma).unwrap().sample(rng);
                    self.state[idx] = LinkRealization::new(d, los, shadow, self.f0_ghz)?;
                    self.draw_position[idx] = Some(pos);
                } else {
                    // Distance still tracks the actual position; only the
                    // LOS/shadowing draw is frozen.
                    let lr = self.state[idx];
                    let pl = pathloss_db(d, lr.los, self.f0_ghz, lr.shadow_db)?;
                    self.state[idx].gain = gain_from_pathloss_db(pl);
                }
                gains[idx] = self.state[idx].gain;
            }
        }
        Ok(gains)
    }
}
