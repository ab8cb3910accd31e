//! Python bindings: DTW and threshold math, the Hudgins/RMS features, the
//! LDA classifier, majority voting, the synthetic generator, and a
//! whole-pipeline runner over in-memory frames.
//!
//! Windows and templates cross the boundary as row-major `list[list[float]]`
//! (time × channels); frames as `(timestamp, [amplitudes])` tuples.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use myogate_core::features;
use myogate_core::gate::{calibrate_threshold, default_s_grid, CalibrationSet, GateEngine};
use myogate_core::lda;
use myogate_core::model::ModelFile;
use myogate_core::session::{render_event_log, EventLog, LogSummary};
use myogate_core::signal::{EmgFrame, Window};
use myogate_core::synth;
use myogate_core::train::{train_from_session, TrainingConfig};
use myogate_core::wake;

/// Frames as (timestamp, [amplitudes]) tuples.
type PyFrames = Vec<(f64, Vec<f64>)>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_window(rows: Vec<Vec<f64>>) -> PyResult<Window> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(PyValueError::new_err("window must be non-empty"));
    }
    let channels = rows[0].len();
    let frames: Vec<EmgFrame> = rows
        .into_iter()
        .enumerate()
        .map(|(i, samples)| {
            if samples.len() != channels {
                Err(PyValueError::new_err("ragged window rows"))
            } else {
                Ok(EmgFrame::new(i as f64, samples))
            }
        })
        .collect::<PyResult<_>>()?;
    Ok(Window::from_frames(&frames))
}

fn to_template(frames: Vec<Vec<f64>>, tag: &str) -> PyResult<wake::Template> {
    wake::Template::new(frames, tag).map_err(value_err)
}

/// DTW alignment cost between two multivariate RMS-frame sequences.
#[pyfunction]
fn dtw_distance(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    wake::dtw_distance(&to_template(a, "a")?, &to_template(b, "b")?).map_err(value_err)
}

/// DTW distances over all unique template pairs, in lexicographic pair order.
#[pyfunction]
fn pairwise_distances(templates: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<f64>> {
    let templates: Vec<wake::Template> = templates
        .into_iter()
        .enumerate()
        .map(|(i, t)| to_template(t, &format!("t{i}")))
        .collect::<PyResult<_>>()?;
    wake::pairwise_distances(&templates).map_err(value_err)
}

/// Detection threshold: mean(distances) + s * population stddev(distances).
#[pyfunction]
fn compute_threshold(distances: Vec<f64>, s: f64) -> PyResult<f64> {
    if distances.len() < 2 {
        return Err(PyValueError::new_err("need at least 2 distances"));
    }
    Ok(wake::compute_threshold(&distances, s))
}

#[pyfunction]
fn mav(window: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(features::mav(&to_window(window)?))
}

#[pyfunction]
fn rms(window: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(features::rms(&to_window(window)?))
}

#[pyfunction]
#[pyo3(signature = (window, eps = 0.0))]
fn zero_crossings(window: Vec<Vec<f64>>, eps: f64) -> PyResult<Vec<usize>> {
    Ok(features::zero_crossings(&to_window(window)?, eps))
}

#[pyfunction]
#[pyo3(signature = (window, eps = 0.0))]
fn slope_sign_changes(window: Vec<Vec<f64>>, eps: f64) -> PyResult<Vec<usize>> {
    let w = to_window(window)?;
    if w.len() < 3 {
        return Err(PyValueError::new_err("need at least 3 samples"));
    }
    Ok(features::slope_sign_changes(&w, eps))
}

#[pyfunction]
fn waveform_length(window: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let w = to_window(window)?;
    if w.len() < 2 {
        return Err(PyValueError::new_err("need at least 2 samples"));
    }
    Ok(features::waveform_length(&w))
}

/// Hudgins time-domain vector `[MAV | ZC | SSC | WL]`, channel-major blocks.
#[pyfunction]
#[pyo3(signature = (window, eps = 0.0))]
fn hudgins_td(window: Vec<Vec<f64>>, eps: f64) -> PyResult<Vec<f64>> {
    let w = to_window(window)?;
    if w.len() < 3 {
        return Err(PyValueError::new_err("need at least 3 samples"));
    }
    Ok(features::hudgins_td(&w, eps))
}

/// Shared-covariance linear discriminant classifier.
#[pyclass(name = "LdaModel")]
struct PyLdaModel {
    inner: lda::LdaModel,
}

#[pymethods]
impl PyLdaModel {
    /// Fits from row-major features and integer class indices.
    #[staticmethod]
    #[pyo3(signature = (features, labels, class_labels, lambda = 1e-3, uniform_priors = false))]
    fn fit(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_labels: Vec<String>,
        lambda: f64,
        uniform_priors: bool,
    ) -> PyResult<Self> {
        let refs: Vec<&str> = class_labels.iter().map(|s| s.as_str()).collect();
        let priors = if uniform_priors {
            lda::PriorMode::Uniform
        } else {
            lda::PriorMode::Empirical
        };
        let inner = lda::fit(&features, &labels, &refs, lambda, priors).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<usize> {
        self.inner.predict(&x).map_err(value_err)
    }

    fn discriminants(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.discriminants(&x).map_err(value_err)
    }

    fn posterior(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.posterior(&x).map_err(value_err)
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda()
    }
}

/// Stored wake templates plus a calibrated threshold; scores candidates by
/// average DTW distance.
#[pyclass(name = "WakeModel")]
struct PyWakeModel {
    inner: wake::WakeModel,
}

#[pymethods]
impl PyWakeModel {
    #[new]
    #[pyo3(signature = (templates, threshold, s = 0.0, vote_length = 5, vote_quorum = 3))]
    fn new(
        templates: Vec<Vec<Vec<f64>>>,
        threshold: f64,
        s: f64,
        vote_length: usize,
        vote_quorum: usize,
    ) -> PyResult<Self> {
        let templates: Vec<wake::Template> = templates
            .into_iter()
            .enumerate()
            .map(|(i, t)| to_template(t, &format!("t{i}")))
            .collect::<PyResult<_>>()?;
        let inner = wake::WakeModel::new(templates, threshold, s, vote_length, vote_quorum)
            .map_err(value_err)?;
        Ok(Self { inner })
    }

    fn score(&self, candidate: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner
            .score(&to_template(candidate, "candidate")?)
            .map_err(value_err)
    }

    fn is_below_threshold(&self, score: f64) -> bool {
        self.inner.is_below_threshold(score)
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold()
    }
}

/// Sliding majority vote over per-candidate decisions; fires once per quorum
/// and clears itself.
#[pyclass(name = "MajorityVote")]
struct PyMajorityVote {
    inner: wake::VoteState,
}

#[pymethods]
impl PyMajorityVote {
    #[new]
    #[pyo3(signature = (length = 5, quorum = 3))]
    fn new(length: usize, quorum: usize) -> PyResult<Self> {
        Ok(Self {
            inner: wake::VoteState::new(length, quorum).map_err(value_err)?,
        })
    }

    fn step(&mut self, is_below_threshold: bool) -> bool {
        self.inner.step(is_below_threshold)
    }

    fn reset(&mut self) {
        self.inner.reset()
    }
}

/// Synthesizes an ADL stream; returns (frames, snap_times) where frames are
/// (timestamp, [amplitudes]) tuples.
#[pyfunction]
#[pyo3(signature = (seed, duration_secs, profile = "typing-bursty", channels = 8, sample_rate_hz = 200.0, snaps = 0, schedule_seed = 7))]
#[allow(clippy::too_many_arguments)]
fn synthesize_adl(
    seed: u64,
    duration_secs: f64,
    profile: &str,
    channels: usize,
    sample_rate_hz: f64,
    snaps: usize,
    schedule_seed: u64,
) -> PyResult<(PyFrames, Vec<f64>)> {
    let profile = synth::NoiseProfile::by_name(profile)
        .ok_or_else(|| PyValueError::new_err(format!("unknown profile `{profile}`")))?;
    let spec = synth::adl_session_spec(
        seed,
        schedule_seed,
        channels,
        sample_rate_hz,
        duration_secs,
        &profile,
        snaps,
    );
    let (session, ann) = synth::synthesize(&spec).map_err(value_err)?;
    let frames = session
        .frames
        .into_iter()
        .map(|f| (f.timestamp, f.samples))
        .collect();
    Ok((frames, ann.snap_times()))
}

/// Trains and calibrates a complete model on synthetic sessions; returns the
/// model file as a JSON string. A quickstart for driving `run_session`.
#[pyfunction]
#[pyo3(signature = (seed = 1, schedule_seed = 7, channels = 8, sample_rate_hz = 200.0))]
fn train_demo_model(
    seed: u64,
    schedule_seed: u64,
    channels: usize,
    sample_rate_hz: f64,
) -> PyResult<String> {
    let cfg = TrainingConfig::standard(channels, sample_rate_hz);
    let spec = synth::training_session_spec(seed, schedule_seed, channels, sample_rate_hz, 20);
    let (session, ann) = synth::synthesize(&spec).map_err(value_err)?;
    let trained = train_from_session(&session, &ann, &cfg).map_err(value_err)?;

    let profile = synth::NoiseProfile::by_name("typing-bursty").expect("stock profile");
    let adl_spec = synth::adl_session_spec(
        seed.wrapping_add(1),
        schedule_seed,
        channels,
        sample_rate_hz,
        62.0,
        &profile,
        0,
    );
    let (adl, _) = synth::synthesize(&adl_spec).map_err(value_err)?;
    let calibration = calibrate_threshold(
        &CalibrationSet {
            positive_templates: trained.templates.clone(),
            negative_stream: adl.frames,
        },
        &default_s_grid(),
        &cfg.engine.wake_window,
        cfg.engine.template_frames,
    )
    .map_err(value_err)?;

    let mut model = ModelFile::assemble(
        &cfg.engine,
        &trained,
        &cfg.rest_label,
        cfg.vote_length,
        cfg.vote_quorum,
    );
    model.wake.s = Some(calibration.s);
    model.wake.threshold = Some(calibration.threshold);
    serde_json::to_string(&model).map_err(value_err)
}

/// Runs the full gating pipeline over in-memory frames with a model produced
/// by `train_demo_model` or the CLI; returns the event log as JSON lines.
#[pyfunction]
#[pyo3(signature = (model_json, frames, refractory_secs = 1.0))]
fn run_session(
    model_json: &str,
    frames: PyFrames,
    refractory_secs: f64,
) -> PyResult<String> {
    let model: ModelFile = serde_json::from_str(model_json).map_err(value_err)?;
    let lda = model.lda_model().map_err(value_err)?;
    let speed = model.speed_calibration().map_err(value_err)?;
    let wake_model = model.wake_model().map_err(value_err)?;
    let cfg = model.engine_config(refractory_secs).map_err(value_err)?;
    let mut engine = GateEngine::new(cfg, lda, speed, wake_model).map_err(value_err)?;

    let last_time = frames.last().map_or(0.0, |(t, _)| *t);
    let events = engine.run(
        frames
            .into_iter()
            .map(|(t, samples)| EmgFrame::new(t, samples)),
    );
    let log = EventLog {
        events,
        summary: Some(LogSummary {
            time: last_time,
            classifier_decisions: engine.classifier_times().len() as u64,
            wake_vote_steps: engine.wake_trace().len() as u64,
            candidate_templates: engine.wake_trace().len() as u64,
        }),
    };
    Ok(render_event_log(&log))
}

#[pymodule]
fn myogate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(dtw_distance, m)?)?;
    m.add_function(wrap_pyfunction!(pairwise_distances, m)?)?;
    m.add_function(wrap_pyfunction!(compute_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(mav, m)?)?;
    m.add_function(wrap_pyfunction!(rms, m)?)?;
    m.add_function(wrap_pyfunction!(zero_crossings, m)?)?;
    m.add_function(wrap_pyfunction!(slope_sign_changes, m)?)?;
    m.add_function(wrap_pyfunction!(waveform_length, m)?)?;
    m.add_function(wrap_pyfunction!(hudgins_td, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_adl, m)?)?;
    m.add_function(wrap_pyfunction!(train_demo_model, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_class::<PyLdaModel>()?;
    m.add_class::<PyWakeModel>()?;
    m.add_class::<PyMajorityVote>()?;
    Ok(())
}
