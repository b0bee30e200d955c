//! Simulation library for adaptive video delivery over a dense deployment of
//! small-cell helpers: channel and rate models, the drift-based request
//! policy, transmission scheduling, client playback, and the slot engine.

pub mod channel;
pub mod config;
pub mod error;
pub mod expint;
pub mod matching;
pub mod playback;
pub mod policy;
pub mod report;
pub mod schedule;
pub mod sim;
pub mod topology;
pub mod video;

pub use channel::{compute_rate_table, peak_rate, RateTable};
pub use config::{load_config, parse_config, PolicyVariant, SimConfig};
pub use error::ModelError;
pub use expint::exp_integral_e1;
pub use matching::max_weight_bipartite_matching;
pub use playback::{PlaybackState, SessionMetrics};
pub use policy::{congestion_control_step, ControlAction, UserControlState};
pub use schedule::{queue_update, schedule_macro_diversity, schedule_unique_association};
pub use sim::{sweep_v, MetricsReport, SessionRow, Simulation};
pub use topology::{LinkStateTracker, Topology, UserTrack};
pub use video::{load_profile, synth_profile, VideoProfile};
