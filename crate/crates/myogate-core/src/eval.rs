//! Evaluation machinery: event-level confusion accounting against annotated
//! wake times, ROC sweeps and trapezoidal AUC, the confidence-rejection
//! baseline, and class-activation distributions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::gate::{GateEvent, GateEventKind};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("ground truth invalid: {0}")]
    BadGroundTruth(String),
    #[error("scores must contain at least one positive and one negative")]
    SingleClassScores,
    #[error("ROC points must be sorted by FPR and span [0, 1]")]
    BadRocPoints,
    #[error("accounting error: tp + fp + fn = {counted} exceeds total decisions {total}")]
    InconsistentAccounting { counted: u64, total: u64 },
    #[error("empty input: {0}")]
    EmptyInput(String),
}

/// Annotated intentional wake instants, with the matching tolerance used to
/// pair them against toggle events.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    wake_times: Vec<f64>,
    tolerance: f64,
}

pub const DEFAULT_MATCH_TOLERANCE_SECS: f64 = 1.0;

impl GroundTruth {
    /// Times must be sorted and non-overlapping within the tolerance
    /// (consecutive instants more than two tolerances apart).
    pub fn new(wake_times: Vec<f64>, tolerance: f64) -> Result<Self, EvalError> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(EvalError::BadGroundTruth(
                "tolerance must be positive".into(),
            ));
        }
        for pair in wake_times.windows(2) {
            if pair[1] <= pair[0] {
                return Err(EvalError::BadGroundTruth(
                    "wake times must be sorted".into(),
                ));
            }
            if pair[1] - pair[0] <= 2.0 * tolerance {
                return Err(EvalError::BadGroundTruth(format!(
                    "wake times {} and {} overlap within tolerance {}",
                    pair[0], pair[1], tolerance
                )));
            }
        }
        Ok(Self {
            wake_times,
            tolerance,
        })
    }

    pub fn wake_times(&self) -> &[f64] {
        &self.wake_times
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub true_negatives: u64,
}

/// Timestamps of all toggle events in a log.
pub fn toggle_times(events: &[GateEvent]) -> Vec<f64> {
    events
        .iter()
        .filter(|e| e.kind.is_toggle())
        .map(|e| e.time)
        .collect()
}

/// Event-level confusion: toggles are matched greedily (nearest pair first,
/// each side used once) against truth times, inclusive of the tolerance
/// boundary. Unmatched toggles are false positives, unmatched truths false
/// negatives, and true negatives are the remaining decisions.
pub fn confusion(
    events: &[GateEvent],
    truth: &GroundTruth,
    total_decisions: u64,
) -> Result<ConfusionCounts, EvalError> {
    let toggles = toggle_times(events);

    // all candidate pairs within tolerance, nearest first; ties resolve by
    // toggle then truth index so the matching is deterministic
    let mut pairs = Vec::new();
    for (i, &tt) in toggles.iter().enumerate() {
        for (j, &gt) in truth.wake_times().iter().enumerate() {
            let d = (tt - gt).abs();
            if d <= truth.tolerance() {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut toggle_used = vec![false; toggles.len()];
    let mut truth_used = vec![false; truth.wake_times().len()];
    let mut tp = 0u64;
    for (_, i, j) in pairs {
        if !toggle_used[i] && !truth_used[j] {
            toggle_used[i] = true;
            truth_used[j] = true;
            tp += 1;
        }
    }
    let fp = toggles.len() as u64 - tp;
    let fn_count = truth.wake_times().len() as u64 - tp;
    let counted = tp + fp + fn_count;
    if counted > total_decisions {
        return Err(EvalError::InconsistentAccounting {
            counted,
            total: total_decisions,
        });
    }
    Ok(ConfusionCounts {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_count,
        true_negatives: total_decisions - counted,
    })
}

/// Which side of the threshold counts as a positive prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorePolarity {
    /// Wake-detector convention: lower score means more positive.
    LowerIsPositive,
    /// Confidence convention: higher score means accepted.
    HigherIsPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// Sweeps every distinct score as a threshold and returns the operating
/// points sorted by FPR, always including (0,0) and (1,1).
pub fn roc(scores: &[(f64, bool)], polarity: ScorePolarity) -> Result<Vec<RocPoint>, EvalError> {
    let positives = scores.iter().filter(|(_, p)| *p).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClassScores);
    }

    let mut thresholds: Vec<f64> = scores.iter().map(|(v, _)| *v).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    for &t in &thresholds {
        let predicted_positive = |v: f64| match polarity {
            ScorePolarity::LowerIsPositive => v <= t,
            ScorePolarity::HigherIsPositive => v >= t,
        };
        let tp = scores
            .iter()
            .filter(|(v, p)| *p && predicted_positive(*v))
            .count();
        let fp = scores
            .iter()
            .filter(|(v, p)| !*p && predicted_positive(*v))
            .count();
        points.push(RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0 });
    points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    points.dedup_by(|a, b| a == b);
    Ok(points)
}

/// Trapezoidal integral of an ROC curve sorted by FPR over [0, 1].
pub fn auc(points: &[RocPoint]) -> Result<f64, EvalError> {
    if points.len() < 2
        || points.first().unwrap().fpr != 0.0
        || points.last().unwrap().fpr != 1.0
        || points.windows(2).any(|w| w[1].fpr < w[0].fpr)
    {
        return Err(EvalError::BadRocPoints);
    }
    let mut area = 0.0;
    for w in points.windows(2) {
        area += (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0;
    }
    Ok(area)
}

/// Confidence-rejection pseudo-ROC: at each threshold, TPR is the fraction of
/// training windows accepted and correct, FPR the fraction of ADL windows
/// accepted as an active (non-rest) class. Acceptance is `posterior >= c`.
/// Endpoints (0,0) and (1,1) are appended so the curve integrates over [0,1].
pub fn rejection_baseline(
    training: &[(f64, bool)],
    adl: &[(f64, bool)],
    thresholds: &[f64],
) -> Result<Vec<RocPoint>, EvalError> {
    if training.is_empty() {
        return Err(EvalError::EmptyInput("training posteriors".into()));
    }
    if adl.is_empty() {
        return Err(EvalError::EmptyInput("ADL posteriors".into()));
    }
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    for &c in thresholds {
        let tpr = training
            .iter()
            .filter(|(p, correct)| *p >= c && *correct)
            .count() as f64
            / training.len() as f64;
        let fpr =
            adl.iter().filter(|(p, active)| *p >= c && *active).count() as f64 / adl.len() as f64;
        points.push(RocPoint { fpr, tpr });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0 });
    points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
    points.dedup_by(|a, b| a == b);
    Ok(points)
}

/// Per-class fraction over a prediction stream; fractions sum to 1.
pub fn class_activation_distribution<'a, I>(classes: I) -> BTreeMap<String, f64>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for c in classes {
        *counts.entry(c.to_string()).or_default() += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(k, v)| (k, v as f64 / total.max(1) as f64))
        .collect()
}

/// Class names from every Command and Suppressed event in a log.
pub fn predicted_classes(events: &[GateEvent]) -> impl Iterator<Item = &str> {
    events.iter().filter_map(|e| match &e.kind {
        GateEventKind::Command { class, .. } => Some(class.as_str()),
        GateEventKind::Suppressed { class } => Some(class.as_str()),
        _ => None,
    })
}

/// The structured text report written by the eval workflow; line-oriented and
/// deterministic so tests can diff it.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub tolerance: f64,
    pub wake_vote_steps: u64,
    pub candidate_templates: u64,
    pub confusion: ConfusionCounts,
    pub class_distribution: BTreeMap<String, f64>,
    pub wake_roc: Option<Vec<RocPoint>>,
    pub wake_auc: Option<f64>,
}

impl MetricsReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let c = &self.confusion;
        out.push_str("# myogate eval report v1\n");
        let _ = writeln!(out, "tolerance_secs {:.6}", self.tolerance);
        let _ = writeln!(out, "decisions_per_vote_step {}", self.wake_vote_steps);
        let _ = writeln!(
            out,
            "decisions_per_candidate_template {}",
            self.candidate_templates
        );
        let _ = writeln!(
            out,
            "confusion tp {} fp {} fn {} tn {}",
            c.true_positives, c.false_positives, c.false_negatives, c.true_negatives
        );
        let denom = (c.true_positives + c.false_negatives).max(1) as f64;
        let _ = writeln!(out, "wake_tpr {:.6}", c.true_positives as f64 / denom);
        if self.wake_vote_steps > 0 {
            let _ = writeln!(
                out,
                "fp_rate_per_vote_step {:.6}",
                c.false_positives as f64 / self.wake_vote_steps as f64
            );
        }
        if self.candidate_templates > 0 {
            let _ = writeln!(
                out,
                "fp_rate_per_candidate_template {:.6}",
                c.false_positives as f64 / self.candidate_templates as f64
            );
        }
        out.push_str("class_distribution:\n");
        for (class, frac) in &self.class_distribution {
            let _ = writeln!(out, "  {class} {frac:.6}");
        }
        if let Some(roc_points) = &self.wake_roc {
            out.push_str("wake_roc fpr tpr:\n");
            for p in roc_points {
                let _ = writeln!(out, "  {:.6} {:.6}", p.fpr, p.tpr);
            }
        }
        if let Some(a) = self.wake_auc {
            let _ = writeln!(out, "wake_auc {a:.6}");
        }
        out
    }
}
