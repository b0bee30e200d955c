//! Sectioned key = value configuration files. Unknown sections or keys are
//! rejected so typos fail loudly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyVariant {
    DppMacro,
    DppUnique,
    MaxSinr,
}

impl PolicyVariant {
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        match s {
            "dpp-macro" => Ok(Self::DppMacro),
            "dpp-unique" => Ok(Self::DppUnique),
            "max-sinr" => Ok(Self::MaxSinr),
            other => Err(ModelError::Config(format!(
                "unknown policy variant '{other}' (expected dpp-macro, dpp-unique or max-sinr)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DppMacro => "dpp-macro",
            Self::DppUnique => "dpp-unique",
            Self::MaxSinr => "max-sinr",
        }
    }
}

#[derive(Debug, Clone)]
pub enum VideoSource {
    File(PathBuf),
    Synth {
        /// (chunks, mode_count) pattern regions.
        segments: Vec<(usize, usize)>,
        size_range_bits: (f64, f64),
        ssim_range: (f64, f64),
    },
}

#[derive(Debug, Clone)]
pub struct TopologySpec {
    /// Either an explicit list or a grid.
    pub helpers: Vec<(f64, f64)>,
    pub area: (f64, f64),
    pub static_users: usize,
    pub explicit_user_positions: Vec<(f64, f64)>,
    pub cluster_center: Option<(f64, f64)>,
    pub cluster_radius_m: f64,
    pub mobile_waypoints: Vec<(f64, f64)>,
    pub mobile_speed_mps: f64,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub topology: TopologySpec,
    pub video: VideoSource,
    pub variant: PolicyVariant,
    pub v_param: f64,
    pub alpha: f64,
    pub rho: f64,
    pub xi: f64,
    pub delta: u64,
    pub session_chunks: u64,
    pub idle_restart_prob: f64,
    pub start_all_at_zero: bool,
    pub horizon: u64,
    pub edge_threshold_bits: f64,
    pub symbols_per_slot: f64,
    pub power: f64,
    pub carrier_ghz: f64,
    pub slot_seconds: f64,
    pub link_redraw_distance_m: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.v_param > 0.0) {
            return Err(ModelError::Config("v must be > 0".into()));
        }
        if !(self.rho > 0.0) {
            return Err(ModelError::Config("rho must be > 0 (or inf)".into()));
        }
        if !(self.xi > 0.0) {
            return Err(ModelError::Config("xi must be > 0".into()));
        }
        if self.delta < 1 {
            return Err(ModelError::Config("delta must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.idle_restart_prob) {
            return Err(ModelError::Config("idle_restart_prob must be in [0,1]".into()));
        }
        if self.alpha < 0.0 {
            return Err(ModelError::Config("alpha must be >= 0".into()));
        }
        if self.topology.helpers.is_empty() {
            return Err(ModelError::Config("need at least one helper".into()));
        }
        if self.session_chunks == 0 || self.horizon == 0 {
            return Err(ModelError::Config("horizon and session_chunks must be >= 1".into()));
        }
        Ok(())
    }
}

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str) -> Result<Sections, ModelError> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            out.entry(name.trim().to_string()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ModelError::Parse(format!(
                "line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        let section = current.as_ref().ok_or_else(|| {
            ModelError::Parse(format!("line {}: key outside any section", lineno + 1))
        })?;
        out.get_mut(section)
            .unwrap()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

struct SectionReader<'a> {
    name: &'a str,
    map: BTreeMap<String, String>,
    seen: Vec<String>,
}

impl<'a> SectionReader<'a> {
    fn get(&mut self, key: &str) -> Option<String> {
        if self.map.contains_key(key) {
            self.seen.push(key.to_string());
        }
        self.map.get(key).cloned()
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ModelError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) if v == "inf" => Ok(f64::INFINITY),
            Some(v) => v.parse::<f64>().map_err(|_| {
                ModelError::Parse(format!("[{}] {key}: bad number '{v}'", self.name))
            }),
        }
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, ModelError> {
        Ok(self.f64(key, default as f64)? as u64)
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ModelError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(ModelError::Parse(format!(
                    "[{}] {key}: bad bool '{other}'",
                    self.name
                ))),
            },
        }
    }

    fn finish(self) -> Result<(), ModelError> {
        for key in self.map.keys() {
            if !self.seen.contains(key) {
                return Err(ModelError::Config(format!(
                    "unknown key '{key}' in section [{}]",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

fn parse_points(s: &str, what: &str) -> Result<Vec<(f64, f64)>, ModelError> {
    let mut out = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let nums: Vec<&str> = part.split(',').map(str::trim).collect();
        if nums.len() != 2 {
            return Err(ModelError::Parse(format!("{what}: expected 'x,y' in '{part}'")));
        }
        let x = nums[0]
            .parse()
            .map_err(|_| ModelError::Parse(format!("{what}: bad x '{}'", nums[0])))?;
        let y = nums[1]
            .parse()
            .map_err(|_| ModelError::Parse(format!("{what}: bad y '{}'", nums[1])))?;
        out.push((x, y));
    }
    Ok(out)
}

fn parse_segments(s: &str) -> Result<Vec<(usize, usize)>, ModelError> {
    // "200x8,400x4,200x8": chunks x mode_count regions.
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let (chunks, modes) = part
            .split_once('x')
            .ok_or_else(|| ModelError::Parse(format!("segments: expected 'NxM' in '{part}'")))?;
        out.push((
            chunks
                .trim()
                .parse()
                .map_err(|_| ModelError::Parse(format!("segments: bad count '{chunks}'")))?,
            modes
                .trim()
                .parse()
                .map_err(|_| ModelError::Parse(format!("segments: bad modes '{modes}'")))?,
        ));
    }
    if out.is_empty() {
        return Err(ModelError::Parse("segments: empty".into()));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<SimConfig, ModelError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<SimConfig, ModelError> {
    let mut sections = parse_sections(text)?;
    for name in sections.keys() {
        if !["topology", "video", "policy", "sessions", "run"].contains(&name.as_str()) {
            return Err(ModelError::Config(format!("unknown section [{name}]")));
        }
    }
    let mut take = |name: &str| SectionReader {
        name: "",
        map: sections.remove(name).unwrap_or_default(),
        seen: Vec::new(),
    };

    let mut topo = take("topology");
    topo.name = "topology";
    let helpers = if let Some(list) = topo.get("helpers") {
        parse_points(&list, "helpers")?
    } else {
        let rows = topo.u64("grid_rows", 0)? as usize;
        let cols = topo.u64("grid_cols", 0)? as usize;
        let side = topo.f64("cell_side_m", 5.0)?;
        if rows == 0 || cols == 0 {
            return Err(ModelError::Config(
                "topology needs either helpers or grid_rows/grid_cols".into(),
            ));
        }
        crate::topology::Topology::grid_helpers(rows, cols, side)
    };
    let area = match topo.get("area") {
        Some(s) => {
            let pts = parse_points(&s, "area")?;
            pts.first()
                .copied()
                .ok_or_else(|| ModelError::Parse("area: expected 'w,h'".into()))?
        }
        None => {
            let max_x = helpers.iter().map(|p| p.0).fold(0.0, f64::max);
            let max_y = helpers.iter().map(|p| p.1).fold(0.0, f64::max);
            // Grid helpers sit at cell centers; pad by half a cell.
            (max_x + helpers[0].0, max_y + helpers[0].1)
        }
    };
    let static_users = topo.u64("static_users", 0)? as usize;
    let explicit_user_positions = match topo.get("user_positions") {
        Some(s) => parse_points(&s, "user_positions")?,
        None => Vec::new(),
    };
    let cluster_center = match topo.get("cluster_center") {
        Some(s) => Some(
            parse_points(&s, "cluster_center")?
                .first()
                .copied()
                .ok_or_else(|| ModelError::Parse("cluster_center: expected 'x,y'".into()))?,
        ),
        None => None,
    };
    let cluster_radius_m = topo.f64("cluster_radius_m", 2.0)?;
    let mobile_waypoints = match topo.get("mobile_waypoints") {
        Some(s) => parse_points(&s, "mobile_waypoints")?,
        None => Vec::new(),
    };
    let mobile_speed_mps = topo.f64("mobile_speed_mps", 0.0)?;
    topo.finish()?;

    let mut video = take("video");
    video.name = "video";
    let source = video.get("source").unwrap_or_else(|| "synth".to_string());
    let video_source = match source.as_str() {
        "file" => {
            let p = video
                .get("path")
                .ok_or_else(|| ModelError::Config("[video] path required for source = file".into()))?;
            VideoSource::File(base_dir.join(p))
        }
        "synth" => {
            let segments = match video.get("segments") {
                Some(s) => parse_segments(&s)?,
                None => vec![(200, 8), (400, 4), (200, 8)],
            };
            VideoSource::Synth {
                segments,
                size_range_bits: (
                    video.f64("size_min_bits", 2e5)?,
                    video.f64("size_max_bits", 3e6)?,
                ),
                ssim_range: (video.f64("ssim_min", 0.60)?, video.f64("ssim_max", 0.98)?),
            }
        }
        other => {
            return Err(ModelError::Config(format!(
                "[video] source must be synth or file, got '{other}'"
            )))
        }
    };
    video.finish()?;

    let mut policy = take("policy");
    policy.name = "policy";
    let variant = PolicyVariant::parse(
        &policy.get("variant").unwrap_or_else(|| "dpp-macro".to_string()),
    )?;
    let v_param = policy.f64("v", 1e13)?;
    let alpha = policy.f64("alpha", 1.0)?;
    let rho = policy.f64("rho", 50.0)?;
    let xi = policy.f64("xi", 25.0)?;
    let delta = policy.u64("delta", 10)?;
    policy.finish()?;

    let mut sessions = take("sessions");
    sessions.name = "sessions";
    let session_chunks = sessions.u64("session_chunks", 1000)?;
    let idle_restart_prob = sessions.f64("idle_restart_prob", 0.005)?;
    let start_all_at_zero = sessions.bool("start_all_at_zero", false)?;
    sessions.finish()?;

    let mut run = take("run");
    run.name = "run";
    let config = SimConfig {
        topology: TopologySpec {
            helpers,
            area,
            static_users,
            explicit_user_positions,
            cluster_center,
            cluster_radius_m,
            mobile_waypoints,
            mobile_speed_mps,
        },
        video: video_source,
        variant,
        v_param,
        alpha,
        rho,
        xi,
        delta,
        session_chunks,
        idle_restart_prob,
        start_all_at_zero,
        horizon: run.u64("horizon", 3000)?,
        edge_threshold_bits: run.f64("edge_threshold_bits", 1e6)?,
        symbols_per_slot: run.f64("symbols_per_slot", 8.4e6)?,
        power: run.f64("power", 1e8)?,
        carrier_ghz: run.f64("carrier_ghz", 5.0)?,
        slot_seconds: run.f64("slot_seconds", 0.5)?,
        link_redraw_distance_m: run.f64("link_redraw_distance_m", 1.0)?,
        seed: run.u64("seed", 1)?,
    };
    run.finish()?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
[topology]
grid_rows = 2
grid_cols = 2
cell_side_m = 5.0
static_users = 8

[video]
source = synth
segments = 10x4

[policy]
variant = dpp-unique
v = 1e13
rho = inf

[sessions]
session_chunks = 100

[run]
horizon = 500
seed = 7
";

    #[test]
    fn parses_sample() {
        let c = parse_config(SAMPLE, Path::new(".")).unwrap();
        assert_eq!(c.topology.helpers.len(), 4);
        assert_eq!(c.topology.area, (10.0, 10.0));
        assert_eq!(c.variant, PolicyVariant::DppUnique);
        assert!(c.rho.is_infinite());
        assert_eq!(c.horizon, 500);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_unknown_key() {
        let bad = SAMPLE.replace("seed = 7", "sede = 7");
        let err = parse_config(&bad, Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("sede"), "{err}");
    }

    #[test]
    fn rejects_unknown_section() {
        let bad = format!("{SAMPLE}\n[wat]\nx = 1\n");
        assert!(parse_config(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        let bad = SAMPLE.replace("v = 1e13", "v = -2");
        assert!(parse_config(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn explicit_helpers_and_cluster() {
        let text = "
[topology]
helpers = 2.5,2.5; 7.5,2.5; 2.5,7.5; 7.5,7.5
area = 10,10
static_users = 20
cluster_center = 2.5,2.5
cluster_radius_m = 1.5

[run]
horizon = 100
";
        let c = parse_config(text, Path::new(".")).unwrap();
        assert_eq!(c.topology.helpers.len(), 4);
        assert_eq!(c.topology.cluster_center, Some((2.5, 2.5)));
    }
}
