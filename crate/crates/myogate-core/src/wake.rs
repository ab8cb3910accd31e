//! Template-based wake-gesture detection: multivariate DTW distance,
//! mean-plus-s-sigma threshold computation over pairwise template distances,
//! average-distance scoring of sliding candidates, and the majority vote that
//! turns per-candidate decisions into detections.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WakeError {
    #[error("template channel count mismatch: {a} vs {b}")]
    ChannelMismatch { a: usize, b: usize },
    #[error("template must have at least one frame")]
    EmptyTemplate,
    #[error("template values must be finite and non-negative")]
    InvalidTemplateValue,
    #[error("need at least {needed} templates, got {got}")]
    TooFewTemplates { needed: usize, got: usize },
    #[error("invalid vote parameters: quorum {quorum} not in 1..={length}")]
    InvalidVote { length: usize, quorum: usize },
    #[error("threshold must be non-negative, got {0}")]
    InvalidThreshold(f64),
}

/// Default template length: 1 s of signal windowed at 150 ms / 50 ms.
pub const DEFAULT_TEMPLATE_FRAMES: usize = 18;
/// Default number of calibration templates.
pub const DEFAULT_TEMPLATE_COUNT: usize = 20;
pub const DEFAULT_VOTE_LENGTH: usize = 5;
pub const DEFAULT_VOTE_QUORUM: usize = 3;

/// A fixed sequence of per-channel RMS frames representing about one second
/// of signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    frames: Vec<Vec<f64>>,
    source_id: String,
}

impl Template {
    pub fn new(frames: Vec<Vec<f64>>, source_id: impl Into<String>) -> Result<Self, WakeError> {
        if frames.is_empty() || frames[0].is_empty() {
            return Err(WakeError::EmptyTemplate);
        }
        let channels = frames[0].len();
        for f in &frames {
            if f.len() != channels {
                return Err(WakeError::ChannelMismatch {
                    a: channels,
                    b: f.len(),
                });
            }
            if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(WakeError::InvalidTemplateValue);
            }
        }
        Ok(Self {
            frames,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.frames[0].len()
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

fn frame_cost(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Classic DTW alignment cost between two multivariate sequences.
///
/// Symmetric three-way step pattern (insert, delete, match) with no slope
/// constraint and no band; per-cell cost is the Euclidean distance between
/// frame vectors; the raw accumulated cost is returned un-normalized.
pub fn dtw_distance(a: &Template, b: &Template) -> Result<f64, WakeError> {
    if a.channels() != b.channels() {
        return Err(WakeError::ChannelMismatch {
            a: a.channels(),
            b: b.channels(),
        });
    }
    let (ta, tb) = (a.len(), b.len());
    // rolling two-row DP over the tb-wide axis
    let mut prev = vec![0.0f64; tb];
    let mut curr = vec![0.0f64; tb];
    for j in 0..tb {
        let c = frame_cost(&a.frames[0], &b.frames[j]);
        prev[j] = if j == 0 { c } else { c + prev[j - 1] };
    }
    for i in 1..ta {
        for j in 0..tb {
            let c = frame_cost(&a.frames[i], &b.frames[j]);
            curr[j] = if j == 0 {
                c + prev[0]
            } else {
                c + prev[j].min(curr[j - 1]).min(prev[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[tb - 1])
}

/// DTW distances over every unique unordered template pair, enumerated in
/// lexicographic index order: (0,1), (0,2), …, (1,2), …
pub fn pairwise_distances(templates: &[Template]) -> Result<Vec<f64>, WakeError> {
    if templates.len() < 2 {
        return Err(WakeError::TooFewTemplates {
            needed: 2,
            got: templates.len(),
        });
    }
    let m = templates.len();
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            out.push(dtw_distance(&templates[i], &templates[j])?);
        }
    }
    Ok(out)
}

/// Detection threshold: `mean(D) + s · stddev(D)` with population (divide by
/// N) standard deviation.
pub fn compute_threshold(distances: &[f64], s: f64) -> f64 {
    assert!(distances.len() >= 2, "need at least 2 distances");
    assert!(s.is_finite());
    let n = distances.len() as f64;
    let mean = distances.iter().sum::<f64>() / n;
    let var = distances
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / n;
    mean + s * var.sqrt()
}

/// Stored training templates plus the calibrated scalar threshold and the
/// vote configuration. Immutable after construction.
#[derive(Debug, Clone)]
pub struct WakeModel {
    templates: Vec<Template>,
    threshold: f64,
    s: f64,
    vote_length: usize,
    vote_quorum: usize,
}

impl WakeModel {
    pub fn new(
        templates: Vec<Template>,
        threshold: f64,
        s: f64,
        vote_length: usize,
        vote_quorum: usize,
    ) -> Result<Self, WakeError> {
        if templates.len() < 2 {
            return Err(WakeError::TooFewTemplates {
                needed: 2,
                got: templates.len(),
            });
        }
        let channels = templates[0].channels();
        for t in &templates {
            if t.channels() != channels {
                return Err(WakeError::ChannelMismatch {
                    a: channels,
                    b: t.channels(),
                });
            }
        }
        if threshold.is_nan() || threshold < 0.0 {
            return Err(WakeError::InvalidThreshold(threshold));
        }
        if vote_quorum == 0 || vote_quorum > vote_length {
            return Err(WakeError::InvalidVote {
                length: vote_length,
                quorum: vote_quorum,
            });
        }
        Ok(Self {
            templates,
            threshold,
            s,
            vote_length,
            vote_quorum,
        })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn channels(&self) -> usize {
        self.templates[0].channels()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn vote_length(&self) -> usize {
        self.vote_length
    }

    pub fn vote_quorum(&self) -> usize {
        self.vote_quorum
    }

    /// Average DTW distance from a candidate to every stored template;
    /// lower means more snap-like.
    pub fn score(&self, candidate: &Template) -> Result<f64, WakeError> {
        let mut sum = 0.0;
        for t in &self.templates {
            sum += dtw_distance(candidate, t)?;
        }
        Ok(sum / self.templates.len() as f64)
    }

    /// Whether a score counts as a wake decision (strictly below threshold).
    pub fn is_below_threshold(&self, score: f64) -> bool {
        score < self.threshold
    }
}

/// Sliding majority vote over the most recent per-candidate decisions.
/// Emits a detection once at least `quorum` of the buffered decisions are
/// true, then clears the buffer so the same evidence cannot re-fire.
#[derive(Debug, Clone)]
pub struct VoteState {
    buffer: VecDeque<bool>,
    length: usize,
    quorum: usize,
}

impl VoteState {
    pub fn new(length: usize, quorum: usize) -> Result<Self, WakeError> {
        if quorum == 0 || quorum > length {
            return Err(WakeError::InvalidVote { length, quorum });
        }
        Ok(Self {
            buffer: VecDeque::with_capacity(length),
            length,
            quorum,
        })
    }

    pub fn step(&mut self, is_below_threshold: bool) -> bool {
        if self.buffer.len() == self.length {
            self.buffer.pop_front();
        }
        self.buffer.push_back(is_below_threshold);
        let positives = self.buffer.iter().filter(|&&b| b).count();
        if positives >= self.quorum {
            self.buffer.clear();
            true
        } else {
            false
        }
    }

    pub fn reset(&mut self) {
        self.buffer.clear();
    }
}
