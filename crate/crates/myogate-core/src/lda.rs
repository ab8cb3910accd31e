//! The continuous five-class gesture classifier: linear discriminant analysis
//! with a pooled, shrinkage-regularized covariance, plus the per-prediction
//! proportional speed derived from channel-mean MAV.

use thiserror::Error;

use crate::features::mean_mav;
use crate::signal::Window;

/// Default class set, in model index order.
pub const DEFAULT_CLASS_LABELS: [&str; 5] = [
    "WristFlexion",
    "WristExtension",
    "HandOpen",
    "HandClose",
    "NoMovement",
];

/// Label of the rest class; predictions of it always carry speed 0.
pub const REST_LABEL: &str = "NoMovement";

/// Default shrinkage weight for the pooled covariance.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum LdaError {
    #[error("class {label} has {count} samples; at least 2 required")]
    ClassTooSmall { label: String, count: usize },
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label index {index} out of range for {classes} classes")]
    LabelOutOfRange { index: usize, classes: usize },
    #[error("training set is empty or has mismatched rows: {0}")]
    BadTrainingSet(String),
    #[error("speed calibration invalid: {0}")]
    BadSpeedCalibration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PriorMode {
    /// Class frequencies observed in the training set.
    #[default]
    Empirical,
    Uniform,
}

// -- small dense linear algebra, enough for d x d SPD work --
// (index loops match the math; iterator chains obscure the triangular access)

#[allow(clippy::needless_range_loop)]
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of an SPD matrix from its Cholesky factor, by solving L Lᵀ X = I.
#[allow(clippy::needless_range_loop)]
fn spd_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        // forward solve L y = e_col
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                sum -= l[i][k] * y[k];
            }
            y[i] = sum / l[i][i];
        }
        // back solve Lᵀ x = y
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k][i] * inv[k][col];
            }
            inv[i][col] = sum / l[i][i];
        }
    }
    // enforce exact symmetry
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = v;
            inv[j][i] = v;
        }
    }
    inv
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A fitted LDA: per-class means, inverse pooled covariance, and log priors.
/// Immutable after fit; safe to share for concurrent prediction.
#[derive(Debug, Clone)]
pub struct LdaModel {
    labels: Vec<String>,
    means: Vec<Vec<f64>>,
    cov_inv: Vec<Vec<f64>>,
    log_priors: Vec<f64>,
    lambda: f64,
    // derived: discriminant weights w_k = cov_inv * mu_k and intercepts
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
}

impl LdaModel {
    /// Rebuilds a model from stored parts (e.g. a model file).
    pub fn from_parts(
        labels: Vec<String>,
        means: Vec<Vec<f64>>,
        cov_inv: Vec<Vec<f64>>,
        log_priors: Vec<f64>,
        lambda: f64,
    ) -> Result<Self, LdaError> {
        if labels.len() < 2 || labels.len() != means.len() || labels.len() != log_priors.len() {
            return Err(LdaError::BadTrainingSet("inconsistent class counts".into()));
        }
        let d = cov_inv.len();
        if means.iter().any(|m| m.len() != d) || cov_inv.iter().any(|r| r.len() != d) {
            return Err(LdaError::BadTrainingSet("inconsistent dimensions".into()));
        }
        let weights: Vec<Vec<f64>> = means.iter().map(|mu| matvec(&cov_inv, mu)).collect();
        let intercepts: Vec<f64> = means
            .iter()
            .zip(&weights)
            .zip(&log_priors)
            .map(|((mu, w), lp)| -0.5 * dot(mu, w) + lp)
            .collect();
        Ok(Self {
            labels,
            means,
            cov_inv,
            log_priors,
            lambda,
            weights,
            intercepts,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.cov_inv.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn cov_inverse(&self) -> &[Vec<f64>] {
        &self.cov_inv
    }

    pub fn log_priors(&self) -> &[f64] {
        &self.log_priors
    }

    /// Shrinkage weight actually used (may exceed the requested one if the
    /// covariance was singular and fit had to escalate).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// All K discriminant scores `x·Σ⁻¹μ_k − ½μ_kᵀΣ⁻¹μ_k + log π_k`.
    pub fn discriminants(&self, x: &[f64]) -> Result<Vec<f64>, LdaError> {
        if x.len() != self.dim() {
            return Err(LdaError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| dot(x, w) + b)
            .collect())
    }

    /// Argmax class index, ties broken toward the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, LdaError> {
        let scores = self.discriminants(x)?;
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        Ok(best)
    }

    /// Softmax of the discriminants; sums to 1.
    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>, LdaError> {
        let scores = self.discriminants(x)?;
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        Ok(exps.into_iter().map(|e| e / total).collect())
    }
}

/// Fits an LDA from row-major features and class indices into `labels`.
///
/// The pooled within-class covariance is shrunk as `(1−λ)·S + λ·diag(S)`
/// before inversion. If the result is still not positive definite, λ is
/// escalated through a fixed ladder (with a warning); identically-zero
/// variance falls back to a small absolute ridge as a last resort.
#[allow(clippy::needless_range_loop)]
pub fn fit(
    features: &[Vec<f64>],
    class_indices: &[usize],
    labels: &[&str],
    lambda: f64,
    priors: PriorMode,
) -> Result<LdaModel, LdaError> {
    let n = features.len();
    let k = labels.len();
    if n == 0 || class_indices.len() != n {
        return Err(LdaError::BadTrainingSet(format!(
            "{} feature rows vs {} labels",
            n,
            class_indices.len()
        )));
    }
    if k < 2 {
        return Err(LdaError::BadTrainingSet("need at least 2 classes".into()));
    }
    let d = features[0].len();
    if d == 0 || features.iter().any(|row| row.len() != d) {
        return Err(LdaError::BadTrainingSet(
            "ragged or empty feature rows".into(),
        ));
    }
    for &y in class_indices {
        if y >= k {
            return Err(LdaError::LabelOutOfRange {
                index: y,
                classes: k,
            });
        }
    }

    let mut counts = vec![0usize; k];
    for &y in class_indices {
        counts[y] += 1;
    }
    for (idx, &c) in counts.iter().enumerate() {
        if c < 2 {
            return Err(LdaError::ClassTooSmall {
                label: labels[idx].to_string(),
                count: c,
            });
        }
    }

    // class means
    let mut means = vec![vec![0.0; d]; k];
    for (row, &y) in features.iter().zip(class_indices) {
        for (m, &v) in means[y].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (mean, &c) in means.iter_mut().zip(&counts) {
        for m in mean.iter_mut() {
            *m /= c as f64;
        }
    }

    // pooled within-class covariance, normalized by N - K
    let mut cov = vec![vec![0.0; d]; d];
    for (row, &y) in features.iter().zip(class_indices) {
        let mu = &means[y];
        for i in 0..d {
            let di = row[i] - mu[i];
            for j in 0..=i {
                cov[i][j] += di * (row[j] - mu[j]);
            }
        }
    }
    let denom = (n - k) as f64;
    for i in 0..d {
        for j in 0..=i {
            let v = if denom > 0.0 { cov[i][j] / denom } else { 0.0 };
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }

    let log_priors: Vec<f64> = match priors {
        PriorMode::Empirical => counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect(),
        PriorMode::Uniform => vec![(1.0 / k as f64).ln(); k],
    };

    // shrink, invert; escalate lambda if singular
    let ladder = [lambda, 1e-6, 1e-4, 1e-2, 1e-1, 0.5, 0.99];
    let mut chosen_lambda = lambda;
    let mut inverse = None;
    for &lam in ladder.iter().filter(|&&lam| lam >= lambda) {
        let shrunk = shrink(&cov, lam);
        if let Some(l) = cholesky(&shrunk) {
            if lam > lambda {
                log::warn!("covariance singular at lambda={lambda}; escalated to {lam}");
            }
            chosen_lambda = lam;
            inverse = Some(spd_inverse(&l));
            break;
        }
    }
    let cov_inv = match inverse {
        Some(inv) => inv,
        None => {
            // diag(S) itself is degenerate (zero-variance features); ridge it
            let scale = cov
                .iter()
                .enumerate()
                .map(|(i, r)| r[i])
                .fold(0.0f64, f64::max);
            let ridge = if scale > 0.0 { scale * 1e-9 } else { 1e-9 };
            log::warn!("covariance degenerate even at lambda=0.99; applying ridge {ridge:e}");
            let mut ridged = cov.clone();
            for i in 0..d {
                ridged[i][i] += ridge;
            }
            chosen_lambda = 0.99;
            let l = cholesky(&ridged)
                .ok_or_else(|| LdaError::BadTrainingSet("covariance not repairable".into()))?;
            spd_inverse(&l)
        }
    };

    LdaModel::from_parts(
        labels.iter().map(|s| s.to_string()).collect(),
        means,
        cov_inv,
        log_priors,
        chosen_lambda,
    )
}

fn shrink(cov: &[Vec<f64>], lambda: f64) -> Vec<Vec<f64>> {
    let d = cov.len();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let diag = if i == j { cov[i][i] } else { 0.0 };
            out[i][j] = (1.0 - lambda) * cov[i][j] + lambda * diag;
        }
    }
    out
}

/// Channel-mean MAV statistics from training data, mapping contraction
/// intensity to a command speed in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedCalibration {
    rest_mav: f64,
    active_mav: Vec<f64>,
    rest_index: usize,
}

impl SpeedCalibration {
    pub fn new(rest_mav: f64, active_mav: Vec<f64>, rest_index: usize) -> Result<Self, LdaError> {
        if rest_index >= active_mav.len() {
            return Err(LdaError::BadSpeedCalibration(format!(
                "rest index {rest_index} out of range"
            )));
        }
        for (k, &a) in active_mav.iter().enumerate() {
            if k != rest_index && a <= rest_mav {
                return Err(LdaError::BadSpeedCalibration(format!(
                    "class {k}: active MAV {a} not above rest MAV {rest_mav}"
                )));
            }
        }
        Ok(Self {
            rest_mav,
            active_mav,
            rest_index,
        })
    }

    pub fn rest_mav(&self) -> f64 {
        self.rest_mav
    }

    pub fn active_mav(&self) -> &[f64] {
        &self.active_mav
    }

    pub fn rest_index(&self) -> usize {
        self.rest_index
    }

    /// Speed for a window already attributed to `class_index`:
    /// `clamp((meanMAV − rest) / (active[k] − rest), 0, 1)`; rest is always 0.
    pub fn speed(&self, class_index: usize, window: &Window) -> f64 {
        if class_index == self.rest_index {
            return 0.0;
        }
        let m = mean_mav(window);
        let denom = self.active_mav[class_index] - self.rest_mav;
        ((m - self.rest_mav) / denom).clamp(0.0, 1.0)
    }
}
