//! Whole-pipeline behavior over synthetic streams: decision cadence, gating
//! quality, silence in sleep mode, gap handling, and replay determinism.

mod common;

use common::{engine_from, fabricated_engine, quiet_session, trained_and_calibrated};
use myogate_core::eval::{confusion, GroundTruth};
use myogate_core::gate::{GateEventKind, Mode};
use myogate_core::signal::{EmgFrame, FrameFilter};
use myogate_core::synth::{adl_session_spec, synthesize, NoiseProfile};

#[test]
fn decision_cadence_matches_stream_clock() {
    let mut engine = fabricated_engine(2, 1.0);
    let session = quiet_session(10.0, 2, 31);
    engine.run(session.frames.clone());

    // 10 s at 200 Hz: floor((2000 - 40) / 20) + 1 classifier decisions
    assert_eq!(engine.classifier_times().len(), 99);
    // wake candidates: first at sample 200, then every 10 samples
    assert_eq!(engine.wake_trace().len(), 181);

    // exactly 10 classifier decisions and 20 wake scores per full second
    for second in 1..10 {
        let lo = second as f64;
        let hi = lo + 1.0;
        let decisions = engine
            .classifier_times()
            .iter()
            .filter(|&&t| t >= lo && t < hi)
            .count();
        assert_eq!(decisions, 10, "classifier decisions in [{lo}, {hi})");
        let scores = engine
            .wake_trace()
            .iter()
            .filter(|w| w.time >= lo && w.time < hi)
            .count();
        assert_eq!(scores, 20, "wake scores in [{lo}, {hi})");
    }
}

#[test]
fn short_stream_yields_empty_log() {
    let mut engine = fabricated_engine(2, 1.0);
    let frames: Vec<EmgFrame> = (0..39)
        .map(|i| EmgFrame::new(i as f64 / 200.0, vec![0.0, 0.0]))
        .collect();
    let events = engine.run(frames);
    assert!(events.is_empty());
}

#[test]
fn end_to_end_gating_on_synthetic_sessions() {
    let fixture = trained_and_calibrated(41);

    // 2-minute bursty stream with 6 embedded snaps
    let profile = NoiseProfile::by_name("typing-bursty").unwrap();
    let spec = adl_session_spec(77, 8, 8, 200.0, 120.0, &profile, 6);
    let (session, ann) = synthesize(&spec).unwrap();

    let mut engine = engine_from(&fixture);
    let events = engine.run(session.frames.clone());

    let truth = GroundTruth::new(ann.snap_times(), 1.0).unwrap();
    let counts = confusion(&events, &truth, engine.wake_trace().len() as u64).unwrap();
    assert_eq!(
        counts.false_positives, 0,
        "no inadvertent toggles: {counts:?}"
    );
    assert!(counts.true_positives >= 5, "snaps detected: {counts:?}");

    // silence guarantee: walking the log, commands only ever appear in input
    // mode, suppressed only in sleep, and toggles alternate from sleep
    let mut mode = Mode::Sleep;
    for e in &events {
        match &e.kind {
            GateEventKind::ToggledToInput { .. } => {
                assert_eq!(mode, Mode::Sleep, "toggle to input while not sleeping");
                mode = Mode::Input;
            }
            GateEventKind::ToggledToSleep { .. } => {
                assert_eq!(mode, Mode::Input, "toggle to sleep while not in input");
                mode = Mode::Sleep;
            }
            GateEventKind::Command { .. } => assert_eq!(mode, Mode::Input, "command at {}", e.time),
            GateEventKind::Suppressed { .. } => assert_eq!(mode, Mode::Sleep),
        }
    }

    // refractory: no two toggles closer than the configured period
    let toggles: Vec<f64> = events
        .iter()
        .filter(|e| e.kind.is_toggle())
        .map(|e| e.time)
        .collect();
    for pair in toggles.windows(2) {
        assert!(pair[1] - pair[0] >= fixture.cfg.engine.refractory_secs);
    }

    // replay determinism
    let mut engine2 = engine_from(&fixture);
    let events2 = engine2.run(session.frames.clone());
    assert_eq!(events, events2);
}

#[test]
fn suppressed_predictions_flow_while_sleeping() {
    let fixture = trained_and_calibrated(43);
    let profile = NoiseProfile::by_name("typing-bursty").unwrap();
    let spec = adl_session_spec(78, 8, 8, 200.0, 30.0, &profile, 0);
    let (session, _) = synthesize(&spec).unwrap();

    let mut engine = engine_from(&fixture);
    let events = engine.run(session.frames);
    assert!(!events.is_empty());
    assert!(events
        .iter()
        .all(|e| matches!(e.kind, GateEventKind::Suppressed { .. })));
}

#[test]
fn stream_gap_resets_decision_phases() {
    let mut engine = fabricated_engine(2, 1.0);
    let mut frames: Vec<EmgFrame> = (0..400)
        .map(|i| EmgFrame::new(i as f64 / 200.0, vec![0.0, 0.0]))
        .collect();
    // 0.5 s hole, then another second of signal
    frames.extend((0..200).map(|i| EmgFrame::new(2.5 + i as f64 / 200.0, vec![0.0, 0.0])));
    engine.run(frames);

    // before the gap: decisions at samples 40..400 step 20
    let before = engine
        .classifier_times()
        .iter()
        .filter(|&&t| t < 2.0)
        .count();
    assert_eq!(before, 19);
    // after the reset the warm-up starts over: 40 samples into the new run
    let after: Vec<f64> = engine
        .classifier_times()
        .iter()
        .copied()
        .filter(|&t| t >= 2.5)
        .collect();
    assert_eq!(after.len(), 9);
    assert!((after[0] - (2.5 + 39.0 / 200.0)).abs() < 1e-9);
    // no wake candidate can span the hole
    assert!(engine
        .wake_trace()
        .iter()
        .all(|w| w.time < 2.0 || w.time >= 2.5 + 199.0 / 200.0));
}

#[test]
fn frame_errors_are_skipped_and_counted() {
    let mut engine = fabricated_engine(2, 1.0);
    let frames = vec![
        EmgFrame::new(0.000, vec![0.0, 0.0]),
        EmgFrame::new(0.005, vec![0.0, 0.0]),
        EmgFrame::new(0.005, vec![1.0, 1.0]), // duplicate timestamp
        EmgFrame::new(0.010, vec![1.0]),      // wrong channel count
        EmgFrame::new(0.010, vec![2.0, 2.0]),
    ];
    engine.run(frames);
    assert_eq!(engine.frames_rejected(), 2);
}

#[test]
fn zeroing_filter_silences_the_wake_path() {
    struct Zero;
    impl FrameFilter for Zero {
        fn apply(&mut self, frame: &mut EmgFrame) {
            for v in frame.samples.iter_mut() {
                *v = 0.0;
            }
        }
    }

    let fixture = trained_and_calibrated(47);
    let profile = NoiseProfile::by_name("typing-bursty").unwrap();
    let spec = adl_session_spec(79, 8, 8, 200.0, 40.0, &profile, 2);
    let (session, _) = synthesize(&spec).unwrap();

    let mut gated = engine_from(&fixture);
    gated.set_filter(Box::new(Zero));
    let events = gated.run(session.frames);
    // all-zero signal scores far from the snap templates: no toggles
    assert!(events.iter().all(|e| !e.kind.is_toggle()));
}
