//! Versioned model persistence. One JSON file holds the classifier (labels,
//! means, inverse covariance, priors, shrinkage), its speed calibration, and
//! the wake model (templates verbatim, vote settings, calibrated threshold),
//! together with the windowing and deadband they were fitted under — so
//! inference can refuse mismatched preprocessing.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::EngineConfig;
use crate::lda::{LdaModel, SpeedCalibration};
use crate::signal::WindowSpec;
use crate::train::TrainedModels;
use crate::wake::{Template, WakeModel};

pub const MODEL_SCHEMA: &str = "myogate.model.v1";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file malformed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema mismatch: expected {MODEL_SCHEMA}, got {0}")]
    Schema(String),
    #[error("model not calibrated: run calibrate to set the wake threshold")]
    NotCalibrated,
    #[error("model file inconsistent: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpecData {
    pub length_samples: usize,
    pub increment_samples: usize,
}

impl From<WindowSpec> for WindowSpecData {
    fn from(w: WindowSpec) -> Self {
        Self {
            length_samples: w.length_samples,
            increment_samples: w.increment_samples,
        }
    }
}

impl WindowSpecData {
    fn to_spec(self) -> Result<WindowSpec, ModelError> {
        WindowSpec::new(self.length_samples, self.increment_samples)
            .map_err(|e| ModelError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeedData {
    pub rest_mav: f64,
    pub active_mav: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierData {
    pub labels: Vec<String>,
    pub means: Vec<Vec<f64>>,
    pub cov_inverse: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
    pub lambda: f64,
    pub window: WindowSpecData,
    pub eps: f64,
    pub rest_label: String,
    pub speed: SpeedData,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateData {
    pub source_id: String,
    pub frames: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WakeData {
    pub window: WindowSpecData,
    pub template_frames: usize,
    pub templates: Vec<TemplateData>,
    pub vote_length: usize,
    pub vote_quorum: usize,
    /// Calibrated std-dev multiplier; absent until calibrate runs.
    pub s: Option<f64>,
    /// Calibrated distance threshold; absent until calibrate runs.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub channels: usize,
    pub sample_rate_hz: f64,
    pub classifier: ClassifierData,
    pub wake: WakeData,
}

impl ModelFile {
    /// Packs freshly trained models (threshold not yet calibrated).
    pub fn assemble(
        cfg: &EngineConfig,
        trained: &TrainedModels,
        rest_label: &str,
        vote_length: usize,
        vote_quorum: usize,
    ) -> Self {
        Self {
            schema: MODEL_SCHEMA.to_string(),
            channels: cfg.channels,
            sample_rate_hz: cfg.sample_rate_hz,
            classifier: ClassifierData {
                labels: trained.lda.labels().to_vec(),
                means: trained.lda.means().to_vec(),
                cov_inverse: trained.lda.cov_inverse().to_vec(),
                log_priors: trained.lda.log_priors().to_vec(),
                lambda: trained.lda.lambda(),
                window: cfg.classifier_window.into(),
                eps: cfg.eps,
                rest_label: rest_label.to_string(),
                speed: SpeedData {
                    rest_mav: trained.speed.rest_mav(),
                    active_mav: trained.speed.active_mav().to_vec(),
                },
            },
            wake: WakeData {
                window: cfg.wake_window.into(),
                template_frames: cfg.template_frames,
                templates: trained
                    .templates
                    .iter()
                    .map(|t| TemplateData {
                        source_id: t.source_id().to_string(),
                        frames: t.frames().to_vec(),
                    })
                    .collect(),
                vote_length,
                vote_quorum,
                s: None,
                threshold: None,
            },
        }
    }

    pub fn lda_model(&self) -> Result<LdaModel, ModelError> {
        LdaModel::from_parts(
            self.classifier.labels.clone(),
            self.classifier.means.clone(),
            self.classifier.cov_inverse.clone(),
            self.classifier.log_priors.clone(),
            self.classifier.lambda,
        )
        .map_err(|e| ModelError::Invalid(e.to_string()))
    }

    pub fn rest_index(&self) -> Result<usize, ModelError> {
        self.classifier
            .labels
            .iter()
            .position(|l| *l == self.classifier.rest_label)
            .ok_or_else(|| {
                ModelError::Invalid(format!(
                    "rest label {} missing from labels",
                    self.classifier.rest_label
                ))
            })
    }

    pub fn speed_calibration(&self) -> Result<SpeedCalibration, ModelError> {
        SpeedCalibration::new(
            self.classifier.speed.rest_mav,
            self.classifier.speed.active_mav.clone(),
            self.rest_index()?,
        )
        .map_err(|e| ModelError::Invalid(e.to_string()))
    }

    pub fn templates(&self) -> Result<Vec<Template>, ModelError> {
        self.wake
            .templates
            .iter()
            .map(|t| {
                Template::new(t.frames.clone(), t.source_id.clone())
                    .map_err(|e| ModelError::Invalid(e.to_string()))
            })
            .collect()
    }

    /// The runtime wake model; requires a calibrated threshold.
    pub fn wake_model(&self) -> Result<WakeModel, ModelError> {
        let threshold = self.wake.threshold.ok_or(ModelError::NotCalibrated)?;
        WakeModel::new(
            self.templates()?,
            threshold,
            self.wake.s.unwrap_or(0.0),
            self.wake.vote_length,
            self.wake.vote_quorum,
        )
        .map_err(|e| ModelError::Invalid(e.to_string()))
    }

    /// Engine configuration embedded at fit time.
    pub fn engine_config(&self, refractory_secs: f64) -> Result<EngineConfig, ModelError> {
        Ok(EngineConfig {
            channels: self.channels,
            sample_rate_hz: self.sample_rate_hz,
            classifier_window: self.classifier.window.to_spec()?,
            wake_window: self.wake.window.to_spec()?,
            template_frames: self.wake.template_frames,
            eps: self.classifier.eps,
            refractory_secs,
        })
    }
}

pub fn load_model(path: &Path) -> Result<ModelFile, ModelError> {
    let text = fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let model: ModelFile = serde_json::from_str(&text)?;
    if model.schema != MODEL_SCHEMA {
        return Err(ModelError::Schema(model.schema));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(model)?;
    fs::write(path, text).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
