//! The on-demand control state machine: classifier and wake detector run
//! concurrently over one frame stream; classifier output is silenced in
//! Sleep mode, forwarded as (class, speed) commands in Input mode, and the
//! mode toggles on wake detections. Also hosts ROC-corner threshold
//! calibration for the wake model.

use thiserror::Error;

use crate::features::{hudgins_td, rms};
use crate::lda::{LdaModel, SpeedCalibration};
use crate::signal::{windowize, EmgFrame, PushOutcome, SignalBuffer, SignalError, WindowSpec};
use crate::wake::{Template, VoteState, WakeModel};

#[derive(Debug, Error)]
pub enum GateError {
    #[error("engine configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("calibration set invalid: {0}")]
    BadCalibrationSet(String),
    #[error("s grid must be non-empty and sorted ascending")]
    BadGrid,
    #[error(
        "no grid point separates positives from negatives (best: s={}, threshold={:.6}, tpr={:.3}, fpr={:.3})",
        best.s, best.threshold, best.tpr, best.fpr
    )]
    NoSeparatingThreshold {
        best: CalibrationPoint,
        roc: Vec<CalibrationPoint>,
    },
    #[error(transparent)]
    Wake(#[from] crate::wake::WakeError),
}

/// System mode: classifier output is suppressed in Sleep, forwarded in Input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sleep,
    Input,
}

/// Timestamped output event of the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateEvent {
    pub time: f64,
    pub kind: GateEventKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateEventKind {
    ToggledToInput { score: f64 },
    ToggledToSleep { score: f64 },
    Command { class: String, speed: f64 },
    Suppressed { class: String },
}

impl GateEventKind {
    pub fn is_toggle(&self) -> bool {
        matches!(
            self,
            GateEventKind::ToggledToInput { .. } | GateEventKind::ToggledToSleep { .. }
        )
    }
}

pub const DEFAULT_REFRACTORY_SECS: f64 = 1.0;

/// Mode plus the bookkeeping needed for the refractory rule. Starts in Sleep;
/// toggles strictly alternate.
#[derive(Debug, Clone)]
pub struct GateState {
    mode: Mode,
    last_toggle_time: f64,
    refractory_secs: f64,
}

impl GateState {
    pub fn new(refractory_secs: f64) -> Self {
        Self {
            mode: Mode::Sleep,
            last_toggle_time: f64::NEG_INFINITY,
            refractory_secs,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn last_toggle_time(&self) -> f64 {
        self.last_toggle_time
    }

    /// One decision instant. A wake detection (outside the refractory window)
    /// toggles the mode and consumes the step: no command is emitted at the
    /// same instant. Otherwise a classifier output becomes a Command in Input
    /// mode (NoMovement as a Command with speed 0) or Suppressed in Sleep.
    pub fn step(
        &mut self,
        time: f64,
        wake_detection: Option<f64>,
        classifier_output: Option<(&str, f64)>,
    ) -> Vec<GateEvent> {
        let mut events = Vec::new();
        if let Some(score) = wake_detection {
            if time - self.last_toggle_time >= self.refractory_secs {
                self.mode = match self.mode {
                    Mode::Sleep => Mode::Input,
                    Mode::Input => Mode::Sleep,
                };
                self.last_toggle_time = time;
                let kind = match self.mode {
                    Mode::Input => GateEventKind::ToggledToInput { score },
                    Mode::Sleep => GateEventKind::ToggledToSleep { score },
                };
                events.push(GateEvent { time, kind });
                return events;
            }
        }
        if let Some((class, speed)) = classifier_output {
            let kind = match self.mode {
                Mode::Input => GateEventKind::Command {
                    class: class.to_string(),
                    speed,
                },
                Mode::Sleep => GateEventKind::Suppressed {
                    class: class.to_string(),
                },
            };
            events.push(GateEvent { time, kind });
        }
        events
    }
}

/// Stream-level configuration shared by both decision paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub channels: usize,
    pub sample_rate_hz: f64,
    /// Classifier windowing (default 200 ms / 100 ms).
    pub classifier_window: WindowSpec,
    /// Wake-path RMS windowing (default 150 ms / 50 ms).
    pub wake_window: WindowSpec,
    /// RMS frames per candidate template (default 18 = 1 s at 150/50 ms).
    pub template_frames: usize,
    /// Deadband for zero crossings and slope sign changes.
    pub eps: f64,
    pub refractory_secs: f64,
}

impl EngineConfig {
    /// The stock configuration at a given channel count and sample rate.
    pub fn standard(channels: usize, sample_rate_hz: f64) -> Self {
        let classifier_window =
            WindowSpec::from_millis(200.0, 100.0, sample_rate_hz).expect("stock classifier window");
        let wake_window =
            WindowSpec::from_millis(150.0, 50.0, sample_rate_hz).expect("stock wake window");
        let template_samples = sample_rate_hz.round() as usize; // one second
        Self {
            channels,
            sample_rate_hz,
            classifier_window,
            wake_window,
            template_frames: wake_window.window_count(template_samples),
            eps: 0.0,
            refractory_secs: DEFAULT_REFRACTORY_SECS,
        }
    }

    /// Raw samples needed before the first candidate template is complete.
    pub fn template_samples(&self) -> usize {
        self.wake_window.length_samples
            + (self.template_frames - 1) * self.wake_window.increment_samples
    }
}

/// One wake-path scoring step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WakeScore {
    pub time: f64,
    pub score: f64,
    pub below: bool,
}

/// Incremental pipeline over one frame stream. Feed frames in order with
/// [`GateEngine::push_frame`]; events come back already ordered, toggles
/// ahead of same-instant commands.
pub struct GateEngine {
    cfg: EngineConfig,
    lda: LdaModel,
    speed: SpeedCalibration,
    wake: WakeModel,
    state: GateState,
    buffer: SignalBuffer,
    rms_history: Vec<Vec<f64>>,
    vote: VoteState,
    filter: Option<Box<dyn crate::signal::FrameFilter>>,
    wake_trace: Vec<WakeScore>,
    classifier_times: Vec<f64>,
    frames_rejected: u64,
}

impl GateEngine {
    pub fn new(
        cfg: EngineConfig,
        lda: LdaModel,
        speed: SpeedCalibration,
        wake: WakeModel,
    ) -> Result<Self, GateError> {
        if lda.dim() != 4 * cfg.channels {
            return Err(GateError::ConfigMismatch(format!(
                "classifier expects {} features but {} channels yield {}",
                lda.dim(),
                cfg.channels,
                4 * cfg.channels
            )));
        }
        if wake.channels() != cfg.channels {
            return Err(GateError::ConfigMismatch(format!(
                "wake templates have {} channels, stream has {}",
                wake.channels(),
                cfg.channels
            )));
        }
        if speed.active_mav().len() != lda.n_classes() {
            return Err(GateError::ConfigMismatch(format!(
                "speed calibration covers {} classes, model has {}",
                speed.active_mav().len(),
                lda.n_classes()
            )));
        }
        if cfg.template_frames == 0 {
            return Err(GateError::ConfigMismatch(
                "template_frames must be >= 1".into(),
            ));
        }
        let capacity = cfg
            .classifier_window
            .length_samples
            .max(cfg.wake_window.length_samples);
        let vote = VoteState::new(wake.vote_length(), wake.vote_quorum())
            .map_err(|e| GateError::ConfigMismatch(e.to_string()))?;
        Ok(Self {
            state: GateState::new(cfg.refractory_secs),
            buffer: SignalBuffer::new(cfg.channels, capacity, cfg.sample_rate_hz),
            rms_history: Vec::new(),
            vote,
            filter: None,
            wake_trace: Vec::new(),
            classifier_times: Vec::new(),
            frames_rejected: 0,
            cfg,
            lda,
            speed,
            wake,
        })
    }

    /// Installs a pre-buffer frame filter (default is pass-through).
    pub fn set_filter(&mut self, filter: Box<dyn crate::signal::FrameFilter>) {
        self.filter = Some(filter);
    }

    pub fn mode(&self) -> Mode {
        self.state.mode()
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    /// Every wake-path score so far (one per candidate template, 20/s at the
    /// stock configuration).
    pub fn wake_trace(&self) -> &[WakeScore] {
        &self.wake_trace
    }

    /// Timestamps of every classifier decision so far.
    pub fn classifier_times(&self) -> &[f64] {
        &self.classifier_times
    }

    pub fn frames_rejected(&self) -> u64 {
        self.frames_rejected
    }

    /// Feeds one frame; returns the events it produced (possibly none).
    pub fn push_frame(&mut self, mut frame: EmgFrame) -> Result<Vec<GateEvent>, GateError> {
        if let Some(filter) = self.filter.as_mut() {
            filter.apply(&mut frame);
        }
        let time = frame.timestamp;
        if self.buffer.push_frame(frame)? == PushOutcome::AppendedAfterGapReset {
            self.rms_history.clear();
            self.vote.reset();
        }
        let n = self.buffer.pushed_since_reset() as usize;

        // wake path first so a toggle lands ahead of a same-instant command
        let mut wake_detection = None;
        let ww = self.cfg.wake_window;
        if n >= ww.length_samples && (n - ww.length_samples).is_multiple_of(ww.increment_samples)
        {
            let w = self
                .buffer
                .last_window(ww.length_samples)
                .expect("wake window present");
            self.rms_history.push(rms(&w));
            if self.rms_history.len() > self.cfg.template_frames {
                self.rms_history.remove(0);
            }
            if self.rms_history.len() == self.cfg.template_frames {
                let candidate = Template::new(self.rms_history.clone(), "live")
                    .expect("RMS frames are finite and non-negative");
                let score = self.wake.score(&candidate).expect("channels validated");
                let below = self.wake.is_below_threshold(score);
                self.wake_trace.push(WakeScore { time, score, below });
                if self.vote.step(below) {
                    wake_detection = Some(score);
                }
            }
        }

        let mut classifier_output = None;
        let cw = self.cfg.classifier_window;
        if n >= cw.length_samples && (n - cw.length_samples).is_multiple_of(cw.increment_samples)
        {
            let w = self
                .buffer
                .last_window(cw.length_samples)
                .expect("window present");
            let x = hudgins_td(&w, self.cfg.eps);
            let k = self.lda.predict(&x).expect("dimension validated");
            let speed = self.speed.speed(k, &w);
            self.classifier_times.push(time);
            classifier_output = Some((k, speed));
        }

        if wake_detection.is_none() && classifier_output.is_none() {
            return Ok(Vec::new());
        }
        let labels = self.lda.labels();
        let cls = classifier_output.map(|(k, v)| (labels[k].as_str(), v));
        Ok(self.state.step(time, wake_detection, cls))
    }

    /// Replays a whole frame sequence; frames that violate stream order or
    /// channel count are skipped with a warning and counted.
    pub fn run<I>(&mut self, frames: I) -> Vec<GateEvent>
    where
        I: IntoIterator<Item = EmgFrame>,
    {
        let mut events = Vec::new();
        for frame in frames {
            match self.push_frame(frame) {
                Ok(mut ev) => events.append(&mut ev),
                Err(e) => {
                    self.frames_rejected += 1;
                    log::warn!("frame rejected: {e}");
                }
            }
        }
        events
    }
}

// ---------------------------------------------------------------------------
// Threshold calibration
// ---------------------------------------------------------------------------

/// Positive wake recordings plus a stretch of wake-free mock-ADL signal.
#[derive(Debug, Clone)]
pub struct CalibrationSet {
    pub positive_templates: Vec<Template>,
    pub negative_stream: Vec<EmgFrame>,
}

/// One grid point of the calibration sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint {
    pub s: f64,
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// A selected operating point plus the full sweep for reporting.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub s: f64,
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub roc: Vec<CalibrationPoint>,
}

/// Cuts a raw stream into sliding candidate templates exactly as the runtime
/// does: RMS frames under `wake_window`, then every run of `template_frames`
/// consecutive frames (one new candidate per RMS frame).
pub fn candidate_templates(
    frames: &[EmgFrame],
    wake_window: &WindowSpec,
    template_frames: usize,
) -> Vec<Template> {
    let rms_frames: Vec<Vec<f64>> = windowize(frames, wake_window).iter().map(rms).collect();
    if rms_frames.len() < template_frames {
        return Vec::new();
    }
    rms_frames
        .windows(template_frames)
        .map(|chunk| Template::new(chunk.to_vec(), "candidate").expect("RMS frames valid"))
        .collect()
}

/// Leave-one-out score of each template against the rest, derived from the
/// pairwise distance vector.
pub fn leave_one_out_scores(templates: &[Template]) -> Result<Vec<f64>, CalibrationError> {
    let m = templates.len();
    if m < 2 {
        return Err(CalibrationError::BadCalibrationSet(format!(
            "need at least 2 positive templates, got {m}"
        )));
    }
    let pair = crate::wake::pairwise_distances(templates)?;
    let mut sums = vec![0.0; m];
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            sums[i] += pair[k];
            sums[j] += pair[k];
            k += 1;
        }
    }
    Ok(sums.into_iter().map(|s| s / (m - 1) as f64).collect())
}

/// Sweeps the s grid: each point's threshold is mean + s·σ of the pairwise
/// vector; TPR counts positive scores strictly below it, FPR negative scores
/// strictly below it.
pub fn calibration_points(
    pairwise: &[f64],
    positive_scores: &[f64],
    negative_scores: &[f64],
    s_grid: &[f64],
) -> Vec<CalibrationPoint> {
    s_grid
        .iter()
        .map(|&s| {
            let threshold = crate::wake::compute_threshold(pairwise, s);
            let tpr = positive_scores.iter().filter(|&&v| v < threshold).count() as f64
                / positive_scores.len() as f64;
            let fpr = negative_scores.iter().filter(|&&v| v < threshold).count() as f64
                / negative_scores.len() as f64;
            CalibrationPoint {
                s,
                threshold,
                tpr,
                fpr,
            }
        })
        .collect()
}

/// Picks the point nearest the top-left ROC corner among those with no false
/// positives (and a usable TPR). Grid runs tied on (TPR, FPR) resolve to the
/// middle of the run, leaving threshold margin on both sides: below, against
/// unseen negatives; above, against runtime snaps scoring past the
/// leave-one-out estimates.
pub fn select_operating_point(
    points: &[CalibrationPoint],
) -> Result<CalibrationPoint, CalibrationError> {
    let corner_dist = |p: &CalibrationPoint| (p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr)).sqrt();
    let candidates: Vec<&CalibrationPoint> = points
        .iter()
        .filter(|p| p.fpr == 0.0 && p.tpr > 0.0)
        .collect();
    if candidates.is_empty() {
        let fallback = points
            .iter()
            .copied()
            .min_by(|a, b| corner_dist(a).total_cmp(&corner_dist(b)))
            .expect("points non-empty");
        return Err(CalibrationError::NoSeparatingThreshold {
            best: fallback,
            roc: points.to_vec(),
        });
    }
    let best_tpr = candidates
        .iter()
        .map(|p| p.tpr)
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<&CalibrationPoint> = candidates
        .into_iter()
        .filter(|p| p.tpr == best_tpr)
        .collect();
    Ok(*tied[tied.len() / 2])
}

/// Full calibration: leave-one-out TPR over the positive templates, FPR over
/// sliding candidates from the negative stream, swept across the s grid.
pub fn calibrate_threshold(
    cal: &CalibrationSet,
    s_grid: &[f64],
    wake_window: &WindowSpec,
    template_frames: usize,
) -> Result<Calibration, CalibrationError> {
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(CalibrationError::BadGrid);
    }
    let positives = leave_one_out_scores(&cal.positive_templates)?;
    let pairwise = crate::wake::pairwise_distances(&cal.positive_templates)?;

    let candidates = candidate_templates(&cal.negative_stream, wake_window, template_frames);
    if candidates.is_empty() {
        return Err(CalibrationError::BadCalibrationSet(
            "negative stream too short for a single candidate template".into(),
        ));
    }
    let model_score = |c: &Template| -> Result<f64, CalibrationError> {
        let mut sum = 0.0;
        for t in &cal.positive_templates {
            sum += crate::wake::dtw_distance(c, t)?;
        }
        Ok(sum / cal.positive_templates.len() as f64)
    };
    let negatives: Vec<f64> = candidates
        .iter()
        .map(model_score)
        .collect::<Result<_, _>>()?;

    let points = calibration_points(&pairwise, &positives, &negatives, s_grid);
    let chosen = select_operating_point(&points)?;
    Ok(Calibration {
        s: chosen.s,
        threshold: chosen.threshold,
        tpr: chosen.tpr,
        fpr: chosen.fpr,
        roc: points,
    })
}

/// The default calibration grid: s from 0 to 5 in steps of 0.1.
pub fn default_s_grid() -> Vec<f64> {
    (0..=50).map(|i| i as f64 * 0.1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sleep_plus_wake_toggles_without_command() {
        let mut st = GateState::new(1.0);
        let ev = st.step(3.0, Some(42.0), Some(("HandOpen", 0.5)));
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, GateEventKind::ToggledToInput { score: 42.0 });
        assert_eq!(st.mode(), Mode::Input);
    }

    #[test]
    fn sleep_suppresses_predictions() {
        let mut st = GateState::new(1.0);
        let ev = st.step(0.5, None, Some(("HandOpen", 0.9)));
        assert_eq!(
            ev,
            vec![GateEvent {
                time: 0.5,
                kind: GateEventKind::Suppressed {
                    class: "HandOpen".into()
                },
            }]
        );
    }

    #[test]
    fn input_passes_commands_through() {
        let mut st = GateState::new(1.0);
        st.step(0.0, Some(10.0), None);
        let ev = st.step(1.5, None, Some(("WristExtension", 0.7)));
        assert_eq!(
            ev,
            vec![GateEvent {
                time: 1.5,
                kind: GateEventKind::Command {
                    class: "WristExtension".into(),
                    speed: 0.7
                },
            }]
        );
    }

    #[test]
    fn refractory_blocks_double_toggle() {
        let mut st = GateState::new(1.0);
        assert!(st.step(2.0, Some(5.0), None)[0].kind.is_toggle());
        // 0.4 s later: detection ignored, classifier output still flows
        let ev = st.step(2.4, Some(5.0), Some(("HandClose", 0.3)));
        assert_eq!(ev.len(), 1);
        assert!(matches!(ev[0].kind, GateEventKind::Command { .. }));
        assert_eq!(st.mode(), Mode::Input);
        // past the refractory window the toggle lands
        let ev = st.step(3.0, Some(5.0), None);
        assert_eq!(ev[0].kind, GateEventKind::ToggledToSleep { score: 5.0 });
    }

    #[test]
    fn toggles_alternate_starting_from_sleep() {
        let mut st = GateState::new(0.0);
        let mut kinds = Vec::new();
        for i in 0..6 {
            let ev = st.step(i as f64 * 2.0, Some(1.0), None);
            kinds.push(ev[0].kind.clone());
        }
        for (i, k) in kinds.iter().enumerate() {
            if i % 2 == 0 {
                assert!(matches!(k, GateEventKind::ToggledToInput { .. }));
            } else {
                assert!(matches!(k, GateEventKind::ToggledToSleep { .. }));
            }
        }
    }

    #[test]
    fn nomovement_commands_carry_zero_speed() {
        let mut st = GateState::new(1.0);
        st.step(0.0, Some(1.0), None);
        let ev = st.step(1.5, None, Some(("NoMovement", 0.0)));
        assert_eq!(
            ev[0].kind,
            GateEventKind::Command {
                class: "NoMovement".into(),
                speed: 0.0
            }
        );
    }

    #[test]
    fn stock_config_matches_stream_windowing() {
        let cfg = EngineConfig::standard(8, 200.0);
        assert_eq!(cfg.classifier_window, WindowSpec::new(40, 20).unwrap());
        assert_eq!(cfg.wake_window, WindowSpec::new(30, 10).unwrap());
        assert_eq!(cfg.template_frames, 18);
        assert_eq!(cfg.template_samples(), 200);
    }

    fn grid() -> Vec<f64> {
        default_s_grid()
    }

    #[test]
    fn sweep_selects_full_separation() {
        // positives {1,2,3}, negatives all >= 10: any threshold in (3,10)
        // gives TPR 1 / FPR 0
        let pairwise = [1.0, 2.0, 3.0];
        let positives = [1.0, 2.0, 3.0];
        let negatives = [10.0, 11.0, 12.0];
        let points = calibration_points(&pairwise, &positives, &negatives, &grid());

        // exhaustive oracle over the same grid
        for p in &points {
            let t = crate::wake::compute_threshold(&pairwise, p.s);
            let tpr = positives.iter().filter(|&&v| v < t).count() as f64 / 3.0;
            let fpr = negatives.iter().filter(|&&v| v < t).count() as f64 / 3.0;
            assert_eq!(p.threshold, t);
            assert_eq!(p.tpr, tpr);
            assert_eq!(p.fpr, fpr);
        }

        let chosen = select_operating_point(&points).unwrap();
        assert_eq!(chosen.tpr, 1.0);
        assert_eq!(chosen.fpr, 0.0);
        assert!(chosen.threshold > 3.0 && chosen.threshold < 10.0);
    }

    #[test]
    fn inseparable_scores_fail_calibration() {
        // negatives interleaved below all positives: FPR 0 only at TPR 0
        let pairwise = [1.0, 2.0, 3.0];
        let positives = [5.0, 6.0, 7.0];
        let negatives = [0.5, 1.0, 4.0];
        let points = calibration_points(&pairwise, &positives, &negatives, &grid());
        let err = select_operating_point(&points).unwrap_err();
        assert!(matches!(
            err,
            CalibrationError::NoSeparatingThreshold { .. }
        ));
    }

    #[test]
    fn single_zero_fp_point_is_selected() {
        let points = [CalibrationPoint {
            s: 1.0,
            threshold: 4.0,
            tpr: 0.8,
            fpr: 0.0,
        }];
        let chosen = select_operating_point(&points).unwrap();
        assert_eq!(chosen.tpr, 0.8);
        let dist = (0.0f64.powi(2) + 0.2f64.powi(2)).sqrt();
        assert!(((1.0 - chosen.tpr) - dist).abs() < 1e-12);
    }

    #[test]
    fn loo_scores_match_direct_computation() {
        let ts: Vec<Template> = (0..4)
            .map(|i| Template::new(vec![vec![i as f64 * 2.0]], format!("t{i}")).unwrap())
            .collect();
        let loo = leave_one_out_scores(&ts).unwrap();
        for (i, &score) in loo.iter().enumerate() {
            let mut sum = 0.0;
            for (j, t) in ts.iter().enumerate() {
                if i != j {
                    sum += crate::wake::dtw_distance(&ts[i], t).unwrap();
                }
            }
            assert!((score - sum / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn candidate_extraction_counts() {
        let frames: Vec<EmgFrame> = (0..200)
            .map(|i| EmgFrame::new(i as f64 / 200.0, vec![1.0, 2.0]))
            .collect();
        let ww = WindowSpec::new(30, 10).unwrap();
        // 200 samples -> 18 RMS frames -> exactly one 18-frame candidate
        assert_eq!(candidate_templates(&frames, &ww, 18).len(), 1);
        let frames: Vec<EmgFrame> = (0..210)
            .map(|i| EmgFrame::new(i as f64 / 200.0, vec![1.0, 2.0]))
            .collect();
        assert_eq!(candidate_templates(&frames, &ww, 18).len(), 2);
    }
}
