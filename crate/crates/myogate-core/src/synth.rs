//! Seeded synthetic-session generator: baseline channel noise, Poisson-burst
//! ADL activity, ramp class contractions, and embedded snap transients, all
//! fully determined by the spec. Stands in for recorded human sessions when
//! exercising the pipeline at desk scale.
//!
//! The snap schedule is resolved (onset jitter included) before generation,
//! so annotations are independent of the noise seed: changing `seed` changes
//! every carrier sample but not a single annotated instant.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::session::{Annotation, Annotations, Session, SessionHeader, SNAP_LABEL};
use crate::signal::EmgFrame;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    BadSpec(String),
    #[error("schedule out of range: {0}")]
    ScheduleOutOfRange(String),
    #[error("snap at {snap} overlaps class segment [{start}, {end}] {label}")]
    OverlappingSegments {
        snap: f64,
        start: f64,
        end: f64,
        label: String,
    },
}

/// Amplitudes mirror the reference device's byte-valued stream.
pub const AMPLITUDE_MIN: f64 = -128.0;
pub const AMPLITUDE_MAX: f64 = 127.0;

/// Span around a snap onset reserved for the gesture: ADL bursts arriving
/// here are dropped, mirroring participants pausing the activity to snap.
const SNAP_GUARD_BEFORE: f64 = 0.35;
const SNAP_GUARD_AFTER: f64 = 1.05;

/// Burst statistics for one named activity regime.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    pub name: String,
    /// Per-channel Gaussian baseline amplitude.
    pub baseline_rms: f64,
    /// Poisson arrival rate of activity bursts.
    pub burst_rate_hz: f64,
    /// Peak Gaussian amplitude inside a burst.
    pub burst_amplitude: f64,
    pub burst_duration_range: (f64, f64),
}

impl NoiseProfile {
    pub fn by_name(name: &str) -> Option<Self> {
        let p = match name {
            "quiet" => Self {
                name: name.into(),
                baseline_rms: 2.5,
                burst_rate_hz: 0.0,
                burst_amplitude: 0.0,
                burst_duration_range: (0.0, 0.0),
            },
            "walking-low" => Self {
                name: name.into(),
                baseline_rms: 2.5,
                burst_rate_hz: 0.15,
                burst_amplitude: 8.0,
                burst_duration_range: (0.2, 0.6),
            },
            "typing-bursty" => Self {
                name: name.into(),
                baseline_rms: 2.5,
                burst_rate_hz: 3.0,
                burst_amplitude: 45.0,
                burst_duration_range: (0.15, 0.5),
            },
            "driving-sustained" => Self {
                name: name.into(),
                baseline_rms: 2.5,
                burst_rate_hz: 0.4,
                burst_amplitude: 12.0,
                burst_duration_range: (0.5, 1.5),
            },
            _ => return None,
        };
        Some(p)
    }

    pub fn profile_names() -> [&'static str; 4] {
        ["quiet", "walking-low", "typing-bursty", "driving-sustained"]
    }
}

/// Shape of the embedded snap transient: a short multichannel burst with a
/// characteristic cross-channel signature plus an optional trailing
/// micro-burst, lightly varied per instance to exercise DTW warping.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapParams {
    /// Per-channel peak amplitudes (the snap's signature).
    pub amplitudes: Vec<f64>,
    pub duration_secs: f64,
    pub micro_burst: bool,
    pub micro_burst_delay: f64,
    pub micro_burst_scale: f64,
    /// Per-instance amplitude variation, as a fraction.
    pub scale_jitter: f64,
    /// Per-instance duration variation, as a fraction.
    pub duration_jitter: f64,
}

impl SnapParams {
    pub fn standard(channels: usize) -> Self {
        const BASE: [f64; 8] = [10.0, 15.0, 8.0, 70.0, 10.0, 12.0, 10.0, 55.0];
        let amplitudes = (0..channels).map(|c| BASE[c % BASE.len()]).collect();
        Self {
            amplitudes,
            duration_secs: 0.2,
            micro_burst: true,
            micro_burst_delay: 0.25,
            micro_burst_scale: 0.35,
            scale_jitter: 0.08,
            duration_jitter: 0.08,
        }
    }
}

/// A labeled contraction interval to synthesize and annotate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSegment {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

/// Full recipe for one synthetic session. The seed determines every sample;
/// the schedules determine every annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub duration_secs: f64,
    pub channels: usize,
    pub sample_rate_hz: f64,
    pub noise: NoiseProfile,
    pub snap: SnapParams,
    /// Resolved snap onsets (any onset jitter already applied).
    pub snap_schedule: Vec<f64>,
    pub class_schedule: Vec<ClassSegment>,
    /// Peak Gaussian amplitude of class contractions at full ramp.
    pub class_amplitude: f64,
    /// Drop ADL bursts that would land on a snap.
    pub suppress_bursts_near_snaps: bool,
}

impl SynthSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.duration_secs <= 0.0 || self.channels == 0 || self.sample_rate_hz <= 0.0 {
            return Err(SynthError::BadSpec(
                "duration, channels and sample rate must be positive".into(),
            ));
        }
        if self.snap.amplitudes.len() != self.channels {
            return Err(SynthError::BadSpec(format!(
                "snap signature has {} channels, spec has {}",
                self.snap.amplitudes.len(),
                self.channels
            )));
        }
        for &t in &self.snap_schedule {
            if t < 0.5 || t + 1.0 > self.duration_secs {
                return Err(SynthError::ScheduleOutOfRange(format!(
                    "snap at {t} needs [t-0.5, t+1.0] inside [0, {}]",
                    self.duration_secs
                )));
            }
        }
        let mut sorted = self.class_schedule.clone();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
        for seg in &sorted {
            if seg.start < 0.0 || seg.end > self.duration_secs || seg.end <= seg.start {
                return Err(SynthError::ScheduleOutOfRange(format!(
                    "class segment [{}, {}] {}",
                    seg.start, seg.end, seg.label
                )));
            }
        }
        for pair in sorted.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(SynthError::BadSpec(format!(
                    "class segments overlap at {}",
                    pair[1].start
                )));
            }
        }
        for &t in &self.snap_schedule {
            for seg in &sorted {
                if t + 1.0 > seg.start && t - SNAP_GUARD_BEFORE < seg.end {
                    return Err(SynthError::OverlappingSegments {
                        snap: t,
                        start: seg.start,
                        end: seg.end,
                        label: seg.label.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Applies uniform onset jitter to a nominal snap schedule. Runs on its own
/// seed so the resolved (annotated) instants stay fixed while the session
/// noise seed varies.
pub fn resolve_snap_schedule(nominal: &[f64], jitter_secs: f64, schedule_seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(schedule_seed);
    nominal
        .iter()
        .map(|&t| t + rng.random_range(-jitter_secs..=jitter_secs))
        .collect()
}

pub fn evenly_spaced_snaps(count: usize, start: f64, spacing: f64) -> Vec<f64> {
    (0..count).map(|k| start + k as f64 * spacing).collect()
}

/// Fixed per-class channel activation patterns for the stock gesture set;
/// other labels fall back to a rotated generic pattern.
fn class_pattern(label: &str, channels: usize) -> Vec<f64> {
    const PATTERNS: [(&str, [f64; 8]); 4] = [
        ("WristFlexion", [1.0, 0.8, 0.5, 0.15, 0.1, 0.1, 0.2, 0.6]),
        ("WristExtension", [0.1, 0.15, 0.5, 0.9, 1.0, 0.7, 0.3, 0.1]),
        ("HandOpen", [0.3, 0.6, 1.0, 0.6, 0.3, 0.9, 0.5, 0.2]),
        ("HandClose", [0.7, 0.2, 0.15, 0.4, 0.6, 0.3, 1.0, 0.8]),
    ];
    const GENERIC: [f64; 8] = [1.0, 0.7, 0.4, 0.2, 0.1, 0.1, 0.2, 0.5];
    let base = PATTERNS
        .iter()
        .find(|(name, _)| *name == label)
        .map(|(_, p)| *p)
        .unwrap_or_else(|| {
            let shift = (label.len() * 2) % 8;
            let mut rotated = [0.0; 8];
            for (i, slot) in rotated.iter_mut().enumerate() {
                *slot = GENERIC[(i + shift) % 8];
            }
            rotated
        });
    (0..channels).map(|c| base[c % 8]).collect()
}

fn hann(phase: f64) -> f64 {
    if !(0.0..=1.0).contains(&phase) {
        0.0
    } else {
        0.5 * (1.0 - (2.0 * std::f64::consts::PI * phase).cos())
    }
}

/// Generates the session and its annotations. Deterministic for a given
/// spec; the annotated snap instants coincide with the embedded transients
/// to within one sample.
pub fn synthesize(spec: &SynthSpec) -> Result<(Session, Annotations), SynthError> {
    spec.validate()?;
    let rate = spec.sample_rate_hz;
    let n = (spec.duration_secs * rate).round() as usize;
    let c = spec.channels;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // baseline noise, sample-major then channel
    let mut data = vec![0.0f64; n * c];
    for v in data.iter_mut() {
        *v = spec.noise.baseline_rms * rng.sample::<f64, _>(StandardNormal);
    }

    // ADL bursts as a Poisson process. Burst channel weights blend the
    // gesture patterns with random jitter: incidental activity overlaps the
    // trained gestures in feature space, which is exactly what defeats
    // confidence-based rejection.
    if spec.noise.burst_rate_hz > 0.0 {
        let guard_zones: Vec<(f64, f64)> = spec
            .snap_schedule
            .iter()
            .map(|&t| (t - SNAP_GUARD_BEFORE, t + SNAP_GUARD_AFTER))
            .collect();
        let gesture_patterns: Vec<Vec<f64>> = crate::lda::DEFAULT_CLASS_LABELS
            [..crate::lda::DEFAULT_CLASS_LABELS.len() - 1]
            .iter()
            .map(|label| class_pattern(label, c))
            .collect();
        let mut t = 0.0f64;
        loop {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            t += -u.ln() / spec.noise.burst_rate_hz;
            if t >= spec.duration_secs {
                break;
            }
            let (dmin, dmax) = spec.noise.burst_duration_range;
            let dur = rng.random_range(dmin..=dmax);
            let scale: f64 = rng.random_range(0.5..=1.0);
            let base = &gesture_patterns[rng.random_range(0..gesture_patterns.len())];
            let weights: Vec<f64> = base
                .iter()
                .map(|w| (w + rng.random_range(-0.15..=0.15)).max(0.0))
                .collect();
            let suppressed = spec.suppress_bursts_near_snaps
                && guard_zones.iter().any(|&(a, b)| t < b && t + dur > a);
            if suppressed {
                continue;
            }
            let start = (t * rate).round() as usize;
            let count = (dur * rate).round() as usize;
            for i in start..(start + count).min(n) {
                let phase = (i - start) as f64 / count.max(1) as f64;
                let env = hann(phase) * spec.noise.burst_amplitude * scale;
                for (ch, w) in weights.iter().enumerate() {
                    data[i * c + ch] += env * w * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
    }

    // class contractions: linear ramp from rest
    for seg in &spec.class_schedule {
        if seg.label == crate::lda::REST_LABEL {
            continue; // rest segments annotate baseline, nothing to add
        }
        let pattern = class_pattern(&seg.label, c);
        let start = (seg.start * rate).round() as usize;
        let end = ((seg.end * rate).round() as usize).min(n);
        let span = (end - start).max(1) as f64;
        for i in start..end {
            let ramp = (i - start) as f64 / span;
            for (ch, w) in pattern.iter().enumerate() {
                data[i * c + ch] +=
                    spec.class_amplitude * ramp * w * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    // snap transients
    for &onset in &spec.snap_schedule {
        let scale = 1.0 + rng.random_range(-spec.snap.scale_jitter..=spec.snap.scale_jitter);
        let dur = spec.snap.duration_secs
            * (1.0 + rng.random_range(-spec.snap.duration_jitter..=spec.snap.duration_jitter));
        let mut bursts = vec![(onset, dur, scale)];
        if spec.snap.micro_burst {
            bursts.push((
                onset + spec.snap.micro_burst_delay,
                dur * 0.4,
                scale * spec.snap.micro_burst_scale,
            ));
        }
        for (b_start, b_dur, b_scale) in bursts {
            let start = (b_start * rate).round() as usize;
            let count = (b_dur * rate).round() as usize;
            for i in start..(start + count).min(n) {
                let phase = (i - start) as f64 / count.max(1) as f64;
                let env = hann(phase) * b_scale;
                for (ch, amp) in spec.snap.amplitudes.iter().enumerate() {
                    data[i * c + ch] += env * amp * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
    }

    // quantize to the byte-like device range
    let frames: Vec<EmgFrame> = (0..n)
        .map(|i| {
            let samples: Vec<f64> = (0..c)
                .map(|ch| data[i * c + ch].round().clamp(AMPLITUDE_MIN, AMPLITUDE_MAX))
                .collect();
            EmgFrame::new(i as f64 / rate, samples)
        })
        .collect();

    let session = Session {
        header: SessionHeader {
            channels: c,
            sample_rate_hz: rate,
            units: "raw".into(),
        },
        frames,
    };

    let mut entries = Vec::new();
    for seg in &spec.class_schedule {
        entries.push(Annotation {
            start: seg.start,
            end: seg.end,
            label: seg.label.clone(),
        });
    }
    for &t in &spec.snap_schedule {
        entries.push(Annotation {
            start: t,
            end: t,
            label: SNAP_LABEL.to_string(),
        });
    }
    if spec.noise.burst_rate_hz > 0.0 {
        entries.push(Annotation {
            start: 0.0,
            end: spec.duration_secs,
            label: format!("adl:{}", spec.noise.name),
        });
    }
    entries.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.label.cmp(&b.label)));

    Ok((session, Annotations { entries }))
}

/// A screen-guided training session: five ramp repetitions of three seconds
/// for each of the stock classes (rest included), then the snap calibration
/// captures.
pub fn training_session_spec(
    seed: u64,
    schedule_seed: u64,
    channels: usize,
    sample_rate_hz: f64,
    snap_count: usize,
) -> SynthSpec {
    let mut class_schedule = Vec::new();
    let mut t = 1.0;
    for label in crate::lda::DEFAULT_CLASS_LABELS {
        for _ in 0..5 {
            class_schedule.push(ClassSegment {
                start: t,
                end: t + 3.0,
                label: label.into(),
            });
            t += 4.0;
        }
    }
    let snap_start = t + 2.0;
    let nominal = evenly_spaced_snaps(snap_count, snap_start, 3.0);
    let snap_schedule = resolve_snap_schedule(&nominal, 0.05, schedule_seed);
    let duration = snap_start + snap_count as f64 * 3.0 + 1.0;
    SynthSpec {
        seed,
        duration_secs: duration,
        channels,
        sample_rate_hz,
        noise: NoiseProfile::by_name("quiet").unwrap(),
        snap: SnapParams::standard(channels),
        snap_schedule,
        class_schedule,
        class_amplitude: 45.0,
        suppress_bursts_near_snaps: true,
    }
}

/// An ADL session under the named profile, optionally with scheduled snaps.
pub fn adl_session_spec(
    seed: u64,
    schedule_seed: u64,
    channels: usize,
    sample_rate_hz: f64,
    duration_secs: f64,
    profile: &NoiseProfile,
    snap_count: usize,
) -> SynthSpec {
    let snap_schedule = if snap_count == 0 {
        Vec::new()
    } else {
        let spacing = (duration_secs - 14.0) / snap_count as f64;
        let nominal = evenly_spaced_snaps(snap_count, 7.0, spacing);
        resolve_snap_schedule(&nominal, 0.05, schedule_seed)
    };
    SynthSpec {
        seed,
        duration_secs,
        channels,
        sample_rate_hz,
        noise: profile.clone(),
        snap: SnapParams::standard(channels),
        snap_schedule,
        class_schedule: Vec::new(),
        class_amplitude: 45.0,
        suppress_bursts_near_snaps: true,
    }
}
