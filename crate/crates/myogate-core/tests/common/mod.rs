//! Shared fixtures for integration tests.

use myogate_core::gate::{
    calibrate_threshold, default_s_grid, CalibrationSet, EngineConfig, GateEngine,
};
use myogate_core::lda::{self, PriorMode, SpeedCalibration};
use myogate_core::session::Session;
use myogate_core::synth::{adl_session_spec, synthesize, training_session_spec, NoiseProfile};
use myogate_core::train::{train_from_session, TrainedModels, TrainingConfig};
use myogate_core::wake::{Template, WakeModel};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Structurally valid models of arbitrary quality, for timing/plumbing tests.
pub fn fabricated_engine(channels: usize, threshold: f64) -> GateEngine {
    let cfg = EngineConfig::standard(channels, 200.0);
    let d = 4 * channels;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for k in 0..2 {
        for _ in 0..8 {
            features.push(
                (0..d)
                    .map(|_| k as f64 * 5.0 + rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect::<Vec<f64>>(),
            );
            labels.push(k);
        }
    }
    let model = lda::fit(
        &features,
        &labels,
        &["Active", "NoMovement"],
        1e-3,
        PriorMode::Empirical,
    )
    .unwrap();
    let speed = SpeedCalibration::new(0.5, vec![5.0, 0.5], 1).unwrap();
    let templates: Vec<Template> = (0..3)
        .map(|i| {
            let frames: Vec<Vec<f64>> = (0..cfg.template_frames)
                .map(|_| {
                    (0..channels)
                        .map(|_| rng.random_range(0.0..4.0) + i as f64)
                        .collect()
                })
                .collect();
            Template::new(frames, format!("fab{i}")).unwrap()
        })
        .collect();
    let wake = WakeModel::new(templates, threshold, 0.0, 5, 3).unwrap();
    GateEngine::new(cfg, model, speed, wake).unwrap()
}

pub struct Fixture {
    pub cfg: TrainingConfig,
    pub trained: TrainedModels,
    pub threshold: f64,
    pub s: f64,
}

/// Full train + calibrate pass over synthetic sessions.
pub fn trained_and_calibrated(seed: u64) -> Fixture {
    let cfg = TrainingConfig::standard(8, 200.0);
    let spec = training_session_spec(seed, 5, 8, 200.0, 20);
    let (session, ann) = synthesize(&spec).unwrap();
    let trained = train_from_session(&session, &ann, &cfg).unwrap();

    let profile = NoiseProfile::by_name("typing-bursty").unwrap();
    let adl_spec = adl_session_spec(seed.wrapping_add(1), 6, 8, 200.0, 62.0, &profile, 0);
    let (adl, _) = synthesize(&adl_spec).unwrap();
    let cal_set = CalibrationSet {
        positive_templates: trained.templates.clone(),
        negative_stream: adl.frames,
    };
    let calibration = calibrate_threshold(
        &cal_set,
        &default_s_grid(),
        &cfg.engine.wake_window,
        cfg.engine.template_frames,
    )
    .expect("synthetic snaps must separate from ADL noise");
    Fixture {
        cfg,
        trained,
        threshold: calibration.threshold,
        s: calibration.s,
    }
}

pub fn engine_from(fixture: &Fixture) -> GateEngine {
    let wake = WakeModel::new(
        fixture.trained.templates.clone(),
        fixture.threshold,
        fixture.s,
        fixture.cfg.vote_length,
        fixture.cfg.vote_quorum,
    )
    .unwrap();
    GateEngine::new(
        fixture.cfg.engine.clone(),
        fixture.trained.lda.clone(),
        fixture.trained.speed.clone(),
        wake,
    )
    .unwrap()
}

pub fn quiet_session(duration_secs: f64, channels: usize, seed: u64) -> Session {
    let spec = adl_session_spec(
        seed,
        6,
        channels,
        200.0,
        duration_secs,
        &NoiseProfile::by_name("quiet").unwrap(),
        0,
    );
    synthesize(&spec).unwrap().0
}
