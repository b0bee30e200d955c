//! Per-chunk, per-quality-mode VBR rate/quality profiles.

use std::io::BufRead;
use std::path::Path;

use rand::Rng;

use crate::error::ModelError;

/// One encoding option for a chunk: payload size in bits and SSIM quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub size_bits: f64,
    pub quality: f64,
}

/// A video file as a list of chunks, each with a ladder of quality modes
/// sorted by increasing size.
#[derive(Debug, Clone)]
pub struct VideoProfile {
    pub chunks: Vec<Vec<Mode>>,
    pub gop_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityBounds {
    pub d_min: f64,
    pub d_max: f64,
}

impl VideoProfile {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.chunks.is_empty() {
            return Err(ModelError::Parse("no chunks".into()));
        }
        for (i, modes) in self.chunks.iter().enumerate() {
            if modes.is_empty() {
                return Err(ModelError::Parse(format!("chunk {i} has no modes")));
            }
            for (m, mode) in modes.iter().enumerate() {
                if !(0.0..=1.0).contains(&mode.quality) {
                    return Err(ModelError::Parse(format!(
                        "chunk {i} mode {m}: quality {} outside [0,1]",
                        mode.quality
                    )));
                }
                if mode.size_bits <= 0.0 {
                    return Err(ModelError::Parse(format!(
                        "chunk {i} mode {m}: non-positive size"
                    )));
                }
                if m > 0 {
                    if mode.size_bits <= modes[m - 1].size_bits {
                        return Err(ModelError::Parse(format!(
                            "chunk {i} mode {m}: size not strictly increasing"
                        )));
                    }
                    if mode.quality < modes[m - 1].quality {
                        return Err(ModelError::Parse(format!(
                            "chunk {i} mode {m}: quality decreasing"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Modes of the chunk served for 1-based request index `k`, cycling
    /// through the sequence from `start_offset`.
    pub fn chunk_at(&self, k: u64, start_offset: usize) -> &[Mode] {
        let idx = (start_offset as u64 + k - 1) % self.len() as u64;
        &self.chunks[idx as usize]
    }

    pub fn quality_bounds(&self) -> QualityBounds {
        let mut d_min = f64::INFINITY;
        let mut d_max = f64::NEG_INFINITY;
        for modes in &self.chunks {
            d_min = d_min.min(modes.first().unwrap().quality);
            d_max = d_max.max(modes.last().unwrap().quality);
        }
        QualityBounds { d_min, d_max }
    }
}

/// Parses a `chunk,mode,bits,ssim` delimiter-separated file (0-based chunk
/// and mode indices, rows sorted by (chunk, mode)).
pub fn load_profile(path: &Path) -> Result<VideoProfile, ModelError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            if line != "chunk,mode,bits,ssim" {
                return Err(ModelError::Parse(format!(
                    "expected header 'chunk,mode,bits,ssim', got '{line}'"
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(ModelError::Parse(format!("row {lineno}: expected 4 fields")));
        }
        let parse = |s: &str, what: &str| -> Result<f64, ModelError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| ModelError::Parse(format!("row {lineno}: bad {what} '{s}'")))
        };
        let chunk = parse(fields[0], "chunk")? as usize;
        let mode = parse(fields[1], "mode")? as usize;
        let bits = parse(fields[2], "bits")?;
        let ssim = parse(fields[3], "ssim")?;
        if !(0.0..=1.0).contains(&ssim) {
            return Err(ModelError::Parse(format!(
                "row {lineno}: quality {ssim} outside [0,1]"
            )));
        }
        rows.push((chunk, mode, bits, ssim));
    }
    if rows.is_empty() {
        return Err(ModelError::Parse("no chunks".into()));
    }
    let n_chunks = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let mut chunks: Vec<Vec<Mode>> = vec![Vec::new(); n_chunks];
    for (chunk, mode, bits, ssim) in rows {
        if chunks[chunk].len() != mode {
            return Err(ModelError::Parse(format!(
                "chunk {chunk}: modes out of order or missing (saw mode {mode}, expected {})",
                chunks[chunk].len()
            )));
        }
        chunks[chunk].push(Mode {
            size_bits: bits,
            quality: ssim,
        });
    }
    let profile = VideoProfile {
        chunks,
        gop_seconds: 0.5,
    };
    profile.validate()?;
    Ok(profile)
}

/// One homogeneous region of a synthetic profile.
#[derive(Debug, Clone, Copy)]
pub struct SynthSegment {
    pub chunks: usize,
    pub mode_count: usize,
    pub size_range_bits: (f64, f64),
    pub quality_range: (f64, f64),
}

/// Draws a synthetic VBR profile: per chunk, a monotone (size, quality)
/// ladder jittered inside the segment ranges. Deterministic under the rng.
pub fn synth_profile<R: Rng>(
    segments: &[SynthSegment],
    rng: &mut R,
) -> Result<VideoProfile, ModelError> {
    if segments.is_empty() {
        return Err(ModelError::Config("empty segment list".into()));
    }
    let mut chunks = Vec::new();
    for seg in segments {
        if seg.mode_count == 0 || seg.chunks == 0 {
            return Err(ModelError::Config("segment needs chunks and modes".into()));
        }
        let (s_lo, s_hi) = seg.size_range_bits;
        let (q_lo, q_hi) = seg.quality_range;
        if !(s_hi > s_lo && s_lo > 0.0) || !(q_hi >= q_lo && q_lo >= 0.0 && q_hi <= 1.0) {
            return Err(ModelError::Config("invalid segment ranges".into()));
        }
        for _ in 0..seg.chunks {
            let n = seg.mode_count;
            let mut modes = Vec::with_capacity(n);
            for m in 0..n {
                // Anchor each mode on an even grid over the range, jitter by
                // up to +/- 30% of a grid step so ladders stay monotone.
                let f = if n == 1 { 1.0 } else { m as f64 / (n - 1) as f64 };
                let step_s = if n == 1 { 0.0 } else { (s_hi - s_lo) / (n - 1) as f64 };
                let step_q = if n == 1 { 0.0 } else { (q_hi - q_lo) / (n - 1) as f64 };
                let js: f64 = rng.gen_range(-0.3..0.3);
                let jq: f64 = rng.gen_range(-0.3..0.3);
                let size = (s_lo + f * (s_hi - s_lo) + js * step_s).max(s_lo * 0.5);
                let quality = (q_lo + f * (q_hi - q_lo) + jq * step_q).clamp(0.0, 1.0);
                modes.push(Mode {
                    size_bits: size,
                    quality,
                });
            }
            // Enforce the ladder invariants after jitter.
            for m in 1..n {
                if modes[m].size_bits <= modes[m - 1].size_bits {
                    modes[m].size_bits = modes[m - 1].size_bits * 1.01 + 1.0;
                }
                if modes[m].quality < modes[m - 1].quality {
                    modes[m].quality = modes[m - 1].quality;
                }
            }
            chunks.push(modes);
        }
    }
    let profile = VideoProfile {
        chunks,
        gop_seconds: 0.5,
    };
    profile.validate()?;
    Ok(profile)
}

/// The 800-chunk mode-count pattern used by the reference sequence:
/// 200 chunks at 8 modes, 400 at 4, 200 at 8.
pub fn reference_segments(size_range_bits: (f64, f64), quality_range: (f64, f64)) -> Vec<SynthSegment> {
    vec![
        SynthSegment {
            chunks: 200,
            mode_count: 8,
            size_range_bits,
            quality_range,
        },
        SynthSegment {
            chunks: 400,
            mode_count: 4,
            size_range_bits,
            quality_range,
        },
        SynthSegment {
            chunks: 200,
            mode_count: 8,
            size_range_bits,
            quality_range,
        },
    ]
}
