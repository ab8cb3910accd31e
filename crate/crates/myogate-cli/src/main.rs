//! `myogate` — train, calibrate, run and evaluate the on-demand myoelectric
//! control pipeline, plus the seeded synthetic-session generator.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 calibration failure.
//! `RUST_LOG` controls log verbosity.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};

use myogate_core::eval::{
    auc, class_activation_distribution, confusion, predicted_classes, roc, GroundTruth,
    MetricsReport, ScorePolarity,
};
use myogate_core::gate::{
    calibrate_threshold, CalibrationError, CalibrationSet, GateEngine, GateEvent,
};
use myogate_core::ingest::{ingest_tcp, IngestConfig};
use myogate_core::lda::PriorMode;
use myogate_core::model::{load_model, save_model, ModelError, ModelFile};
use myogate_core::session::{
    read_annotations, read_session, write_annotations, write_event_log, write_session, EventLog,
    LogSummary, Session,
};
use myogate_core::signal::WindowSpec;
use myogate_core::synth::{adl_session_spec, synthesize, training_session_spec, NoiseProfile};
use myogate_core::train::{train_from_session, TrainingConfig};

#[derive(Parser)]
#[command(
    name = "myogate",
    version,
    about = "On-demand myoelectric control: a continuous gesture classifier gated by a DTW wake-gesture detector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic sessions with annotated ground truth
    Synth(SynthArgs),
    /// Fit the classifier and wake templates from an annotated session
    Train(TrainArgs),
    /// Sweep the threshold grid against a mock-ADL stream and store the pick
    Calibrate(CalibrateArgs),
    /// Run the gating pipeline over a session file or a live TCP stream
    Run(RunArgs),
    /// Score an event log against annotated ground truth
    Eval(EvalArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[command(subcommand)]
    kind: SynthKind,
}

#[derive(Subcommand)]
enum SynthKind {
    /// A screen-guided training session: class ramps plus snap captures
    Training {
        /// Session file to write
        #[arg(long)]
        out: PathBuf,
        /// Annotation file to write
        #[arg(long)]
        annotations: PathBuf,
        /// Noise seed (drives every sample)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Schedule seed (drives snap onset jitter only)
        #[arg(long, default_value_t = 7)]
        schedule_seed: u64,
        #[arg(long, default_value_t = 8)]
        channels: usize,
        #[arg(long, default_value_t = 200.0)]
        rate: f64,
        /// Snap repetitions to capture
        #[arg(long, default_value_t = 20)]
        snaps: usize,
    },
    /// An activities-of-daily-living stream, optionally with scheduled snaps
    Adl {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        /// Noise profile: quiet, walking-low, typing-bursty, driving-sustained
        #[arg(long, default_value = "typing-bursty")]
        profile: String,
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        /// Snaps to embed (0 for a pure ADL stream)
        #[arg(long, default_value_t = 0)]
        snaps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 7)]
        schedule_seed: u64,
        #[arg(long, default_value_t = 8)]
        channels: usize,
        #[arg(long, default_value_t = 200.0)]
        rate: f64,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    session: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// Model file to write
    #[arg(long)]
    out: PathBuf,
    /// Classifier window length (milliseconds)
    #[arg(long, default_value_t = 200.0)]
    window_ms: f64,
    /// Classifier window increment (milliseconds)
    #[arg(long, default_value_t = 100.0)]
    increment_ms: f64,
    /// Wake-path RMS window length (milliseconds)
    #[arg(long, default_value_t = 150.0)]
    wake_window_ms: f64,
    /// Wake-path RMS window increment (milliseconds)
    #[arg(long, default_value_t = 50.0)]
    wake_increment_ms: f64,
    /// Wake template duration (seconds)
    #[arg(long, default_value_t = 1.0)]
    template_secs: f64,
    /// Deadband for zero crossings and slope sign changes
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Covariance shrinkage weight
    #[arg(long, default_value_t = 1e-3)]
    lambda: f64,
    /// Use uniform priors instead of empirical class frequencies
    #[arg(long, default_value_t = false)]
    uniform_priors: bool,
    /// Majority-vote window (decisions)
    #[arg(long, default_value_t = 5)]
    vote_length: usize,
    /// Votes required within the window
    #[arg(long, default_value_t = 3)]
    vote_quorum: usize,
    /// Label of the rest class
    #[arg(long, default_value = "NoMovement")]
    rest_label: String,
    /// Template capture starts this long before the annotated snap (seconds)
    #[arg(long, default_value_t = 0.2)]
    snap_lead: f64,
    /// Warn when the session yields a different template count
    #[arg(long, default_value_t = 20)]
    expected_templates: usize,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Trained model file (updated in place of --out)
    #[arg(long)]
    model: PathBuf,
    /// Mock-ADL session with no intentional wake gestures
    #[arg(long)]
    adl: PathBuf,
    /// Calibrated model file to write
    #[arg(long)]
    out: PathBuf,
    /// ROC table (CSV: s,threshold,tpr,fpr) to write
    #[arg(long)]
    roc_out: Option<PathBuf>,
    /// Grid start for the std-dev multiplier s
    #[arg(long, default_value_t = 0.0)]
    s_min: f64,
    /// Grid end
    #[arg(long, default_value_t = 5.0)]
    s_max: f64,
    /// Grid step
    #[arg(long, default_value_t = 0.1)]
    s_step: f64,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
struct RunArgs {
    /// Calibrated model file
    #[arg(long)]
    model: PathBuf,
    /// Session file to replay
    #[arg(long, group = "source")]
    session: Option<PathBuf>,
    /// Listen address for live ingest (e.g. 127.0.0.1:7700)
    #[arg(long, group = "source")]
    tcp: Option<String>,
    /// Event log to write
    #[arg(long)]
    out: PathBuf,
    /// Per-candidate wake scores (CSV: time,score,below) to write
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Seconds after a toggle during which wake detections are ignored
    #[arg(long, default_value_t = 1.0)]
    refractory: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Event log produced by run
    #[arg(long)]
    log: PathBuf,
    /// Annotations holding the ground-truth snap instants
    #[arg(long)]
    annotations: PathBuf,
    /// Metrics report to write
    #[arg(long)]
    out: PathBuf,
    /// Matching tolerance between toggles and snaps (seconds)
    #[arg(long, default_value_t = 1.0)]
    tolerance: f64,
    /// Wake-score CSV from run; adds an ROC table and AUC to the report
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Override the decision total when the log carries no summary record
    #[arg(long)]
    total_decisions: Option<u64>,
}

enum CliError {
    Usage(String),
    Data(String),
    Calibration(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Calibration(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Calibration(m) => m,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ClapErrorKind::DisplayHelp
                || e.kind() == ClapErrorKind::DisplayVersion =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let (spec, out, annotations) = match args.kind {
        SynthKind::Training {
            out,
            annotations,
            seed,
            schedule_seed,
            channels,
            rate,
            snaps,
        } => (
            training_session_spec(seed, schedule_seed, channels, rate, snaps),
            out,
            annotations,
        ),
        SynthKind::Adl {
            out,
            annotations,
            profile,
            duration,
            snaps,
            seed,
            schedule_seed,
            channels,
            rate,
        } => {
            let profile = NoiseProfile::by_name(&profile).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown profile `{profile}` (expected one of {:?})",
                    NoiseProfile::profile_names()
                ))
            })?;
            (
                adl_session_spec(
                    seed,
                    schedule_seed,
                    channels,
                    rate,
                    duration,
                    &profile,
                    snaps,
                ),
                out,
                annotations,
            )
        }
    };
    let (session, ann) = synthesize(&spec).map_err(data_err)?;
    write_session(&out, &session).map_err(data_err)?;
    write_annotations(&annotations, &ann).map_err(data_err)?;
    println!(
        "wrote {} ({} frames) and {} ({} annotations)",
        out.display(),
        session.frames.len(),
        annotations.display(),
        ann.entries.len()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let session = read_session(&args.session).map_err(data_err)?;
    let annotations = read_annotations(&args.annotations).map_err(data_err)?;
    let rate = session.header.sample_rate_hz;

    let classifier_window =
        WindowSpec::from_millis(args.window_ms, args.increment_ms, rate).map_err(data_err)?;
    let wake_window = WindowSpec::from_millis(args.wake_window_ms, args.wake_increment_ms, rate)
        .map_err(data_err)?;
    let template_samples = (args.template_secs * rate).round() as usize;
    let template_frames = wake_window.window_count(template_samples);
    if template_frames == 0 {
        return Err(CliError::Usage(
            "template duration shorter than one wake window".into(),
        ));
    }

    let mut cfg = TrainingConfig::standard(session.header.channels, rate);
    cfg.engine.classifier_window = classifier_window;
    cfg.engine.wake_window = wake_window;
    cfg.engine.template_frames = template_frames;
    cfg.engine.eps = args.eps;
    cfg.lambda = args.lambda;
    cfg.priors = if args.uniform_priors {
        PriorMode::Uniform
    } else {
        PriorMode::Empirical
    };
    cfg.vote_length = args.vote_length;
    cfg.vote_quorum = args.vote_quorum;
    cfg.rest_label = args.rest_label.clone();
    cfg.snap_lead_secs = args.snap_lead;
    cfg.expected_templates = args.expected_templates;

    let trained = train_from_session(&session, &annotations, &cfg).map_err(data_err)?;
    for w in &trained.warnings {
        eprintln!("warning: {w}");
    }
    let model = ModelFile::assemble(
        &cfg.engine,
        &trained,
        &cfg.rest_label,
        cfg.vote_length,
        cfg.vote_quorum,
    );
    save_model(&args.out, &model).map_err(data_err)?;
    println!(
        "trained {} classes ({} features) and {} wake templates -> {}",
        model.classifier.labels.len(),
        trained.lda.dim(),
        model.wake.templates.len(),
        args.out.display()
    );
    Ok(())
}

fn build_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if step <= 0.0 || max < min {
        return Err(CliError::Usage(format!(
            "bad s grid: min {min}, max {max}, step {step}"
        )));
    }
    let n = ((max - min) / step).round() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

fn check_stream_matches_model(session: &Session, model: &ModelFile) -> Result<(), CliError> {
    if session.header.channels != model.channels {
        return Err(CliError::Data(format!(
            "session has {} channels but the model was fitted on {}",
            session.header.channels, model.channels
        )));
    }
    if (session.header.sample_rate_hz - model.sample_rate_hz).abs() > 1e-9 {
        return Err(CliError::Data(format!(
            "session rate {} Hz but the model was fitted at {} Hz",
            session.header.sample_rate_hz, model.sample_rate_hz
        )));
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut model = load_model(&args.model).map_err(data_err)?;
    let adl = read_session(&args.adl).map_err(data_err)?;
    check_stream_matches_model(&adl, &model)?;

    let grid = build_grid(args.s_min, args.s_max, args.s_step)?;
    let cal_set = CalibrationSet {
        positive_templates: model.templates().map_err(data_err)?,
        negative_stream: adl.frames,
    };
    let wake_window = model.engine_config(1.0).map_err(data_err)?.wake_window;

    let write_roc = |points: &[myogate_core::gate::CalibrationPoint]| -> Result<(), CliError> {
        if let Some(path) = &args.roc_out {
            let mut text = String::from("s,threshold,tpr,fpr\n");
            for p in points {
                text.push_str(&format!("{},{},{},{}\n", p.s, p.threshold, p.tpr, p.fpr));
            }
            std::fs::write(path, text).map_err(data_err)?;
        }
        Ok(())
    };

    match calibrate_threshold(&cal_set, &grid, &wake_window, model.wake.template_frames) {
        Ok(cal) => {
            write_roc(&cal.roc)?;
            model.wake.s = Some(cal.s);
            model.wake.threshold = Some(cal.threshold);
            save_model(&args.out, &model).map_err(data_err)?;
            println!(
                "calibrated: s={} threshold={:.6} tpr={:.3} fpr={:.3} -> {}",
                cal.s,
                cal.threshold,
                cal.tpr,
                cal.fpr,
                args.out.display()
            );
            Ok(())
        }
        Err(CalibrationError::NoSeparatingThreshold { best, roc }) => {
            write_roc(&roc)?;
            Err(CliError::Calibration(format!(
                "no threshold rejects all mock-ADL data; best achievable: s={} threshold={:.6} tpr={:.3} fpr={:.3} (extend the grid below {})",
                best.s, best.threshold, best.tpr, best.fpr, args.s_min
            )))
        }
        Err(e) => Err(data_err(e)),
    }
}

fn build_engine(model: &ModelFile, refractory: f64) -> Result<GateEngine, CliError> {
    let lda = model.lda_model().map_err(data_err)?;
    let speed = model.speed_calibration().map_err(data_err)?;
    let wake = match model.wake_model() {
        Ok(w) => w,
        Err(ModelError::NotCalibrated) => {
            return Err(CliError::Data(
                "model has no calibrated threshold; run `myogate calibrate` first".into(),
            ))
        }
        Err(e) => return Err(data_err(e)),
    };
    let cfg = model.engine_config(refractory).map_err(data_err)?;
    GateEngine::new(cfg, lda, speed, wake).map_err(data_err)
}

fn write_outputs(
    args: &RunArgs,
    engine: &GateEngine,
    events: Vec<GateEvent>,
    last_time: f64,
) -> Result<(), CliError> {
    let log = EventLog {
        events,
        summary: Some(LogSummary {
            time: last_time,
            classifier_decisions: engine.classifier_times().len() as u64,
            wake_vote_steps: engine.wake_trace().len() as u64,
            candidate_templates: engine.wake_trace().len() as u64,
        }),
    };
    write_event_log(&args.out, &log).map_err(data_err)?;
    if let Some(path) = &args.scores_out {
        let mut text = String::from("time,score,below\n");
        for w in engine.wake_trace() {
            text.push_str(&format!("{},{},{}\n", w.time, w.score, w.below as u8));
        }
        std::fs::write(path, text).map_err(data_err)?;
    }
    println!(
        "wrote {} ({} events, {} classifier decisions, {} wake scores)",
        args.out.display(),
        log.events.len(),
        engine.classifier_times().len(),
        engine.wake_trace().len()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let model = load_model(&args.model).map_err(data_err)?;
    let mut engine = build_engine(&model, args.refractory)?;

    if let Some(session_path) = &args.session {
        let session = read_session(session_path).map_err(data_err)?;
        check_stream_matches_model(&session, &model)?;
        let last_time = session.frames.last().map_or(0.0, |f| f.timestamp);
        let events = engine.run(session.frames);
        if engine.frames_rejected() > 0 {
            eprintln!("warning: {} frames rejected", engine.frames_rejected());
        }
        write_outputs(&args, &engine, events, last_time)
    } else {
        let addr = args.tcp.as_deref().expect("clap group guarantees a source");
        let ingest = ingest_tcp(
            addr,
            IngestConfig::standard(model.channels, model.sample_rate_hz),
        )
        .map_err(data_err)?;
        eprintln!("listening on {}", ingest.local_addr());
        let mut events = Vec::new();
        let mut last_time = 0.0;
        while let Some(frame) = ingest.next_frame() {
            last_time = frame.timestamp;
            match engine.push_frame(frame) {
                Ok(mut ev) => events.append(&mut ev),
                Err(e) => log::warn!("frame rejected: {e}"),
            }
        }
        let stats = ingest.stats();
        if stats.malformed_lines > 0 || stats.dropped_frames > 0 || stats.stall_warnings > 0 {
            eprintln!(
                "warning: ingest saw {} malformed lines, {} dropped frames, {} stalls",
                stats.malformed_lines, stats.dropped_frames, stats.stall_warnings
            );
        }
        write_outputs(&args, &engine, events, last_time)
    }
}

fn read_scores(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(data_err)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 && line.starts_with("time,") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let time: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| CliError::Data(format!("scores line {}: bad time", idx + 1)))?;
        let score: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| CliError::Data(format!("scores line {}: bad score", idx + 1)))?;
        out.push((time, score));
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let log = myogate_core::session::read_event_log(&args.log).map_err(data_err)?;
    let annotations = read_annotations(&args.annotations).map_err(data_err)?;
    let truth = GroundTruth::new(annotations.snap_times(), args.tolerance).map_err(data_err)?;

    let (vote_steps, candidates) = match (&log.summary, args.total_decisions) {
        (_, Some(total)) => (total, total),
        (Some(s), None) => (s.wake_vote_steps, s.candidate_templates),
        (None, None) => {
            return Err(CliError::Data(
                "log has no summary record; pass --total-decisions".into(),
            ))
        }
    };

    let counts = confusion(&log.events, &truth, vote_steps).map_err(data_err)?;
    let distribution = class_activation_distribution(predicted_classes(&log.events));

    let (wake_roc, wake_auc) = match &args.scores {
        Some(path) => {
            let scores = read_scores(path)?;
            let labeled: Vec<(f64, bool)> = scores
                .iter()
                .map(|&(t, s)| {
                    let positive = truth
                        .wake_times()
                        .iter()
                        .any(|&w| (t - w).abs() <= args.tolerance);
                    (s, positive)
                })
                .collect();
            let points = roc(&labeled, ScorePolarity::LowerIsPositive).map_err(data_err)?;
            let area = auc(&points).map_err(data_err)?;
            (Some(points), Some(area))
        }
        None => (None, None),
    };

    let report = MetricsReport {
        tolerance: args.tolerance,
        wake_vote_steps: vote_steps,
        candidate_templates: candidates,
        confusion: counts,
        class_distribution: distribution,
        wake_roc,
        wake_auc,
    };
    std::fs::write(&args.out, report.render()).map_err(data_err)?;
    println!(
        "confusion tp {} fp {} fn {} tn {} -> {}",
        counts.true_positives,
        counts.false_positives,
        counts.false_negatives,
        counts.true_negatives,
        args.out.display()
    );
    Ok(())
}
