//! Frame representation, buffering, and sliding-window extraction shared by
//! the classifier and wake-detector paths.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("non-monotone timestamp: {next} does not advance past {prev}")]
    NonMonotoneTimestamp { prev: f64, next: f64 },
    #[error("channel count mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("invalid window spec: {0}")]
    InvalidWindowSpec(String),
}

/// One timestamped sample vector across all channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgFrame {
    /// Seconds; strictly increasing within a stream.
    pub timestamp: f64,
    /// Raw per-channel amplitudes in device units.
    pub samples: Vec<f64>,
}

impl EmgFrame {
    pub fn new(timestamp: f64, samples: Vec<f64>) -> Self {
        Self { timestamp, samples }
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }
}

/// Window length and increment, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub length_samples: usize,
    pub increment_samples: usize,
}

impl WindowSpec {
    pub fn new(length_samples: usize, increment_samples: usize) -> Result<Self, SignalError> {
        if length_samples == 0 || increment_samples == 0 {
            return Err(SignalError::InvalidWindowSpec(
                "length and increment must be >= 1".into(),
            ));
        }
        if increment_samples > length_samples {
            return Err(SignalError::InvalidWindowSpec(format!(
                "increment {increment_samples} exceeds length {length_samples}"
            )));
        }
        Ok(Self {
            length_samples,
            increment_samples,
        })
    }

    /// Converts millisecond-denominated specs at a given sample rate,
    /// rounding to the nearest sample.
    pub fn from_millis(
        length_ms: f64,
        increment_ms: f64,
        sample_rate_hz: f64,
    ) -> Result<Self, SignalError> {
        let to_samples = |ms: f64| (ms * sample_rate_hz / 1000.0).round() as usize;
        Self::new(to_samples(length_ms), to_samples(increment_ms))
    }

    /// Number of complete windows over a sequence of `total` samples.
    pub fn window_count(&self, total: usize) -> usize {
        if total < self.length_samples {
            0
        } else {
            (total - self.length_samples) / self.increment_samples + 1
        }
    }
}

/// A length × C matrix of samples cut from the stream, stamped with the
/// timestamp of its final sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    channels: usize,
    end_time: f64,
    /// Time-major: sample i, channel c at `data[i * channels + c]`.
    data: Vec<f64>,
}

impl Window {
    pub fn from_frames(frames: &[EmgFrame]) -> Self {
        assert!(!frames.is_empty(), "window requires at least one frame");
        let channels = frames[0].channels();
        let mut data = Vec::with_capacity(frames.len() * channels);
        for f in frames {
            assert_eq!(f.channels(), channels, "ragged frames in window");
            data.extend_from_slice(&f.samples);
        }
        Self {
            channels,
            end_time: frames[frames.len() - 1].timestamp,
            data,
        }
    }

    /// Number of samples (rows).
    pub fn len(&self) -> usize {
        self.data.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Timestamp of the final sample.
    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    /// Samples of one channel in time order.
    pub fn channel(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        assert!(c < self.channels);
        self.data.iter().skip(c).step_by(self.channels).copied()
    }

    /// One sample row.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }
}

/// Cuts a frame sequence into `floor((L - length) / increment) + 1` windows;
/// window k starts at sample `k * increment`. No padding: a sequence shorter
/// than one window yields nothing.
pub fn windowize(frames: &[EmgFrame], spec: &WindowSpec) -> Vec<Window> {
    let count = spec.window_count(frames.len());
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let start = k * spec.increment_samples;
        out.push(Window::from_frames(
            &frames[start..start + spec.length_samples],
        ));
    }
    out
}

/// Hook for conditioning frames ahead of the buffer. The reference device
/// delivers pre-filtered signal, so the stock pipeline installs none.
pub trait FrameFilter: Send {
    fn apply(&mut self, frame: &mut EmgFrame);
}

/// Outcome of a successful push into a [`SignalBuffer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Appended,
    /// The gap to the previous frame exceeded two sample periods; the buffer
    /// was reset before appending. Derived state should reset too.
    AppendedAfterGapReset,
}

/// Bounded FIFO of frames. Eviction is oldest-first; ordering is preserved.
///
/// Missing frames are never interpolated: a gap larger than two sample
/// periods clears the buffer so a discontinuous signal is not stitched into
/// one window.
#[derive(Debug, Clone)]
pub struct SignalBuffer {
    frames: VecDeque<EmgFrame>,
    channels: usize,
    capacity: usize,
    max_gap: f64,
    last_timestamp: Option<f64>,
    pushed_since_reset: u64,
    gap_resets: u64,
}

impl SignalBuffer {
    pub fn new(channels: usize, capacity: usize, sample_rate_hz: f64) -> Self {
        assert!(channels >= 1 && capacity >= 1);
        assert!(sample_rate_hz > 0.0);
        Self {
            frames: VecDeque::with_capacity(capacity),
            channels,
            capacity,
            max_gap: 2.0 / sample_rate_hz,
            last_timestamp: None,
            pushed_since_reset: 0,
            gap_resets: 0,
        }
    }

    pub fn push_frame(&mut self, frame: EmgFrame) -> Result<PushOutcome, SignalError> {
        if frame.channels() != self.channels {
            return Err(SignalError::ChannelMismatch {
                expected: self.channels,
                got: frame.channels(),
            });
        }
        let mut outcome = PushOutcome::Appended;
        if let Some(prev) = self.last_timestamp {
            if frame.timestamp <= prev {
                return Err(SignalError::NonMonotoneTimestamp {
                    prev,
                    next: frame.timestamp,
                });
            }
            if frame.timestamp - prev > self.max_gap {
                log::warn!(
                    "stream gap of {:.4}s at t={:.4}s exceeds {:.4}s; resetting buffer",
                    frame.timestamp - prev,
                    frame.timestamp,
                    self.max_gap
                );
                self.frames.clear();
                self.pushed_since_reset = 0;
                self.gap_resets += 1;
                outcome = PushOutcome::AppendedAfterGapReset;
            }
        }
        self.last_timestamp = Some(frame.timestamp);
        if self.frames.len() == self.capacity {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        self.pushed_since_reset += 1;
        Ok(outcome)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Frames accepted since the last gap reset (or since creation).
    pub fn pushed_since_reset(&self) -> u64 {
        self.pushed_since_reset
    }

    pub fn gap_resets(&self) -> u64 {
        self.gap_resets
    }

    /// Snapshot of the most recent `length` frames as a window, if present.
    pub fn last_window(&self, length: usize) -> Option<Window> {
        if self.frames.len() < length {
            return None;
        }
        let start = self.frames.len() - length;
        let frames: Vec<EmgFrame> = self.frames.iter().skip(start).cloned().collect();
        Some(Window::from_frames(&frames))
    }

    pub fn frames(&self) -> impl Iterator<Item = &EmgFrame> {
        self.frames.iter()
    }
}
