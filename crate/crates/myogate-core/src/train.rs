//! Builds the classifier and wake model from an annotated session: Hudgins
//! features over labeled class intervals feed the LDA and speed calibration;
//! one-second captures around annotated snaps become wake templates.

use thiserror::Error;

use crate::features::{hudgins_td, mean_mav};
use crate::gate::EngineConfig;
use crate::lda::{self, LdaError, LdaModel, PriorMode, SpeedCalibration};
use crate::session::{Annotations, Session};
use crate::signal::{windowize, EmgFrame};
use crate::wake::{
    Template, WakeError, DEFAULT_TEMPLATE_COUNT, DEFAULT_VOTE_LENGTH, DEFAULT_VOTE_QUORUM,
};

pub const DEFAULT_SNAP_LEAD_SECS: f64 = 0.2;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("session does not match training config: {0}")]
    SessionMismatch(String),
    #[error("no annotated intervals for class {0}")]
    MissingClass(String),
    #[error("class {label} yields {windows} windows; at least 2 required")]
    TooFewWindows { label: String, windows: usize },
    #[error("snap at {time}s: capture window extends past the recording")]
    SnapCaptureOutOfRange { time: f64 },
    #[error("rest label {0} is not among the class labels")]
    BadRestLabel(String),
    #[error(transparent)]
    Lda(#[from] LdaError),
    #[error(transparent)]
    Wake(#[from] WakeError),
}

#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub engine: EngineConfig,
    pub class_labels: Vec<String>,
    pub rest_label: String,
    pub lambda: f64,
    pub priors: PriorMode,
    pub vote_length: usize,
    pub vote_quorum: usize,
    /// Template capture starts this long before the annotated snap instant.
    pub snap_lead_secs: f64,
    /// Warn when the session yields a different template count.
    pub expected_templates: usize,
}

impl TrainingConfig {
    pub fn standard(channels: usize, sample_rate_hz: f64) -> Self {
        Self {
            engine: EngineConfig::standard(channels, sample_rate_hz),
            class_labels: lda::DEFAULT_CLASS_LABELS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            rest_label: lda::REST_LABEL.to_string(),
            lambda: lda::DEFAULT_LAMBDA,
            priors: PriorMode::Empirical,
            vote_length: DEFAULT_VOTE_LENGTH,
            vote_quorum: DEFAULT_VOTE_QUORUM,
            snap_lead_secs: DEFAULT_SNAP_LEAD_SECS,
            expected_templates: DEFAULT_TEMPLATE_COUNT,
        }
    }
}

#[derive(Debug)]
pub struct TrainedModels {
    pub lda: LdaModel,
    pub speed: SpeedCalibration,
    pub templates: Vec<Template>,
    pub warnings: Vec<String>,
}

fn frames_between(frames: &[EmgFrame], start: f64, end: f64) -> &[EmgFrame] {
    let lo = frames.partition_point(|f| f.timestamp < start);
    let hi = frames.partition_point(|f| f.timestamp < end);
    &frames[lo..hi]
}

pub fn train_from_session(
    session: &Session,
    annotations: &Annotations,
    cfg: &TrainingConfig,
) -> Result<TrainedModels, TrainError> {
    if session.header.channels != cfg.engine.channels {
        return Err(TrainError::SessionMismatch(format!(
            "session has {} channels, config expects {}",
            session.header.channels, cfg.engine.channels
        )));
    }
    if (session.header.sample_rate_hz - cfg.engine.sample_rate_hz).abs() > 1e-9 {
        return Err(TrainError::SessionMismatch(format!(
            "session rate {} Hz, config expects {} Hz",
            session.header.sample_rate_hz, cfg.engine.sample_rate_hz
        )));
    }
    let rest_index = cfg
        .class_labels
        .iter()
        .position(|l| *l == cfg.rest_label)
        .ok_or_else(|| TrainError::BadRestLabel(cfg.rest_label.clone()))?;

    // classifier features from labeled intervals; all windows of every
    // repetition are used, ramp onset included
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut effort_sums = vec![0.0f64; cfg.class_labels.len()];
    let mut effort_counts = vec![0usize; cfg.class_labels.len()];
    for (idx, label) in cfg.class_labels.iter().enumerate() {
        let mut windows = 0usize;
        for interval in annotations.entries.iter().filter(|a| a.label == *label) {
            let slice = frames_between(&session.frames, interval.start, interval.end);
            for w in windowize(slice, &cfg.engine.classifier_window) {
                features.push(hudgins_td(&w, cfg.engine.eps));
                labels.push(idx);
                effort_sums[idx] += mean_mav(&w);
                effort_counts[idx] += 1;
                windows += 1;
            }
        }
        if windows == 0 {
            return Err(TrainError::MissingClass(label.clone()));
        }
        if windows < 2 {
            return Err(TrainError::TooFewWindows {
                label: label.clone(),
                windows,
            });
        }
    }

    let label_refs: Vec<&str> = cfg.class_labels.iter().map(|s| s.as_str()).collect();
    let lda = lda::fit(&features, &labels, &label_refs, cfg.lambda, cfg.priors)?;

    let rest_mav = effort_sums[rest_index] / effort_counts[rest_index] as f64;
    let active_mav: Vec<f64> = effort_sums
        .iter()
        .zip(&effort_counts)
        .map(|(sum, &count)| sum / count.max(1) as f64)
        .collect();
    let speed = SpeedCalibration::new(rest_mav, active_mav, rest_index)?;

    // wake templates: a one-second capture around each annotated snap
    let template_samples = cfg.engine.template_samples();
    let mut templates = Vec::new();
    for t in annotations.snap_times() {
        let start = t - cfg.snap_lead_secs;
        let lo = session.frames.partition_point(|f| f.timestamp < start);
        if lo + template_samples > session.frames.len() {
            return Err(TrainError::SnapCaptureOutOfRange { time: t });
        }
        let capture = &session.frames[lo..lo + template_samples];
        let rms_frames: Vec<Vec<f64>> = windowize(capture, &cfg.engine.wake_window)
            .iter()
            .map(crate::features::rms)
            .collect();
        debug_assert_eq!(rms_frames.len(), cfg.engine.template_frames);
        templates.push(Template::new(rms_frames, format!("snap@{t:.3}"))?);
    }

    let mut warnings = Vec::new();
    if templates.len() != cfg.expected_templates {
        let msg = format!(
            "expected {} snap templates, session yields {}",
            cfg.expected_templates,
            templates.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    if templates.len() < 2 {
        return Err(TrainError::Wake(WakeError::TooFewTemplates {
            needed: 2,
            got: templates.len(),
        }));
    }

    Ok(TrainedModels {
        lda,
        speed,
        templates,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, training_session_spec};
    use crate::wake::pairwise_distances;

    fn trained() -> TrainedModels {
        let spec = training_session_spec(21, 5, 8, 200.0, 20);
        let (session, ann) = synthesize(&spec).unwrap();
        let cfg = TrainingConfig::standard(8, 200.0);
        train_from_session(&session, &ann, &cfg).unwrap()
    }

    #[test]
    fn stock_training_session_yields_full_model() {
        let models = trained();
        assert_eq!(models.lda.labels().len(), 5);
        assert_eq!(models.lda.dim(), 32);
        assert_eq!(models.templates.len(), 20);
        assert_eq!(pairwise_distances(&models.templates).unwrap().len(), 190);
        assert!(models.warnings.is_empty());
    }

    #[test]
    fn training_windows_classify_their_own_classes() {
        let models = trained();
        // re-derive features and check accuracy on the training data; the
        // ramp onset of each repetition legitimately looks like rest, so the
        // strict check only covers the steady half of each interval
        let spec = training_session_spec(21, 5, 8, 200.0, 20);
        let (session, ann) = synthesize(&spec).unwrap();
        let cfg = TrainingConfig::standard(8, 200.0);
        let mut correct = 0usize;
        let mut total = 0usize;
        let mut steady_correct = 0usize;
        let mut steady_total = 0usize;
        for (idx, label) in cfg.class_labels.iter().enumerate() {
            for interval in ann.entries.iter().filter(|a| a.label == *label) {
                let slice = frames_between(&session.frames, interval.start, interval.end);
                let midpoint = (interval.start + interval.end) / 2.0;
                for w in windowize(slice, &cfg.engine.classifier_window) {
                    let x = hudgins_td(&w, cfg.engine.eps);
                    let hit = models.lda.predict(&x).unwrap() == idx;
                    correct += hit as usize;
                    total += 1;
                    if w.end_time() >= midpoint {
                        steady_correct += hit as usize;
                        steady_total += 1;
                    }
                }
            }
        }
        let accuracy = correct as f64 / total as f64;
        let steady = steady_correct as f64 / steady_total as f64;
        assert!(accuracy > 0.8, "overall training accuracy {accuracy:.3}");
        assert!(steady > 0.95, "steady-state training accuracy {steady:.3}");
    }

    #[test]
    fn missing_class_is_named_in_the_error() {
        let spec = training_session_spec(21, 5, 8, 200.0, 20);
        let (session, mut ann) = synthesize(&spec).unwrap();
        ann.entries.retain(|a| a.label != "HandClose");
        let cfg = TrainingConfig::standard(8, 200.0);
        match train_from_session(&session, &ann, &cfg) {
            Err(TrainError::MissingClass(label)) => assert_eq!(label, "HandClose"),
            other => panic!("expected MissingClass, got {other:?}"),
        }
    }

    #[test]
    fn unexpected_template_count_warns() {
        let spec = training_session_spec(21, 5, 8, 200.0, 12);
        let (session, ann) = synthesize(&spec).unwrap();
        let cfg = TrainingConfig::standard(8, 200.0);
        let models = train_from_session(&session, &ann, &cfg).unwrap();
        assert_eq!(models.templates.len(), 12);
        assert_eq!(models.warnings.len(), 1);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let spec = training_session_spec(21, 5, 4, 200.0, 20);
        let (session, ann) = synthesize(&spec).unwrap();
        let cfg = TrainingConfig::standard(8, 200.0);
        assert!(matches!(
            train_from_session(&session, &ann, &cfg),
            Err(TrainError::SessionMismatch(_))
        ));
    }
}
