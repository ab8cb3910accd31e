//! myogate-core — on-demand myoelectric control.
//!
//! A continuously running gesture classifier (Hudgins time-domain features
//! into an LDA) whose outputs are gated by a DTW-based wake-gesture detector.
//! The crate covers the full desk-scale loop: signal buffering and windowing,
//! feature extraction, classifier and wake-model training, threshold
//! calibration, the gating state machine, evaluation metrics, session file
//! formats, TCP ingest, and a seeded synthetic-session generator used as the
//! test oracle.

pub mod eval;
pub mod features;
pub mod gate;
pub mod ingest;
pub mod lda;
pub mod model;
pub mod session;
pub mod signal;
pub mod synth;
pub mod train;
pub mod wake;

pub use gate::{GateEvent, GateEventKind, Mode};
pub use signal::{EmgFrame, SignalBuffer, Window, WindowSpec};
