//! On-disk formats: EMG session files (commented header + CSV rows),
//! annotation files (labeled intervals), and the newline-delimited JSON
//! event log emitted by the gate engine.
//!
//! Session file layout:
//!
//! ```text
//! # emg-session v1
//! # channels=8
//! # sample_rate_hz=200
//! # units=raw
//! 0,1,-2,0,3,1,0,-1,2
//! 0.005,...
//! ```
//!
//! Rows are `timestamp,c1,...,cC`. Floats are written in shortest
//! round-trip form, so canonical files survive read → write byte-identically.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::{GateEvent, GateEventKind};
use crate::signal::EmgFrame;

pub const SESSION_MAGIC: &str = "# emg-session v1";
pub const ANNOTATION_MAGIC: &str = "# emg-annotations v1";
pub const EVENT_LOG_SCHEMA: &str = "myogate.events.v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad header: {0}")]
    Header(String),
    #[error("schema mismatch: expected {expected}, got {got}")]
    Schema { expected: String, got: String },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Session files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SessionHeader {
    pub channels: usize,
    pub sample_rate_hz: f64,
    pub units: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub header: SessionHeader,
    pub frames: Vec<EmgFrame>,
}

pub fn parse_session(text: &str) -> Result<Session, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| FormatError::Header("empty file".into()))?;
    if first.trim() != SESSION_MAGIC {
        return Err(FormatError::Header(format!(
            "expected `{SESSION_MAGIC}`, got `{first}`"
        )));
    }

    let mut channels = None;
    let mut sample_rate_hz = None;
    let mut units = String::from("raw");
    let mut frames = Vec::new();
    let mut last_t: Option<f64> = None;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once('=') {
                match key.trim() {
                    "channels" => {
                        channels =
                            Some(
                                value
                                    .trim()
                                    .parse::<usize>()
                                    .map_err(|e| FormatError::Parse {
                                        line: line_no,
                                        msg: format!("channels: {e}"),
                                    })?,
                            )
                    }
                    "sample_rate_hz" => {
                        sample_rate_hz =
                            Some(
                                value
                                    .trim()
                                    .parse::<f64>()
                                    .map_err(|e| FormatError::Parse {
                                        line: line_no,
                                        msg: format!("sample_rate_hz: {e}"),
                                    })?,
                            )
                    }
                    "units" => units = value.trim().to_string(),
                    _ => {} // unknown header keys are ignored
                }
            }
            continue;
        }

        let c = channels.ok_or_else(|| FormatError::Header("missing `# channels=`".into()))?;
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .unwrap()
            .trim()
            .parse()
            .map_err(|e| FormatError::Parse {
                line: line_no,
                msg: format!("timestamp: {e}"),
            })?;
        if let Some(prev) = last_t {
            if t <= prev {
                return Err(FormatError::Parse {
                    line: line_no,
                    msg: format!("timestamp {t} does not advance past {prev}"),
                });
            }
        }
        let samples: Vec<f64> = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| FormatError::Parse {
                    line: line_no,
                    msg: format!("amplitude: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if samples.len() != c {
            return Err(FormatError::Parse {
                line: line_no,
                msg: format!("expected {c} amplitudes, got {}", samples.len()),
            });
        }
        last_t = Some(t);
        frames.push(EmgFrame::new(t, samples));
    }

    let header = SessionHeader {
        channels: channels.ok_or_else(|| FormatError::Header("missing `# channels=`".into()))?,
        sample_rate_hz: sample_rate_hz
            .ok_or_else(|| FormatError::Header("missing `# sample_rate_hz=`".into()))?,
        units,
    };
    Ok(Session { header, frames })
}

pub fn render_session(session: &Session) -> String {
    let mut out = String::new();
    out.push_str(SESSION_MAGIC);
    out.push('\n');
    out.push_str(&format!("# channels={}\n", session.header.channels));
    out.push_str(&format!(
        "# sample_rate_hz={}\n",
        session.header.sample_rate_hz
    ));
    out.push_str(&format!("# units={}\n", session.header.units));
    for f in &session.frames {
        out.push_str(&format!("{}", f.timestamp));
        for v in &f.samples {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn read_session(path: &Path) -> Result<Session, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_session(&text)
}

pub fn write_session(path: &Path, session: &Session) -> Result<(), FormatError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(render_session(session).as_bytes())
        .map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Annotation files
// ---------------------------------------------------------------------------

/// A labeled interval; snap annotations are instants (start == end).
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Annotations {
    pub entries: Vec<Annotation>,
}

pub const SNAP_LABEL: &str = "snap";

impl Annotations {
    /// Instants of every `snap` annotation, in time order.
    pub fn snap_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = self
            .entries
            .iter()
            .filter(|a| a.label == SNAP_LABEL)
            .map(|a| a.start)
            .collect();
        times.sort_by(f64::total_cmp);
        times
    }

    /// Intervals whose label matches one of the given class names.
    pub fn class_intervals<'a>(
        &'a self,
        labels: &'a [String],
    ) -> impl Iterator<Item = &'a Annotation> {
        self.entries
            .iter()
            .filter(move |a| labels.contains(&a.label))
    }
}

pub fn parse_annotations(text: &str) -> Result<Annotations, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| FormatError::Header("empty file".into()))?;
    if first.trim() != ANNOTATION_MAGIC {
        return Err(FormatError::Header(format!(
            "expected `{ANNOTATION_MAGIC}`, got `{first}`"
        )));
    }
    let mut entries = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.splitn(3, ',').collect();
        if parts.len() != 3 {
            return Err(FormatError::Parse {
                line: line_no,
                msg: "expected `start,end,label`".into(),
            });
        }
        let start: f64 = parts[0].trim().parse().map_err(|e| FormatError::Parse {
            line: line_no,
            msg: format!("start: {e}"),
        })?;
        let end: f64 = parts[1].trim().parse().map_err(|e| FormatError::Parse {
            line: line_no,
            msg: format!("end: {e}"),
        })?;
        if end < start {
            return Err(FormatError::Parse {
                line: line_no,
                msg: format!("interval end {end} before start {start}"),
            });
        }
        let label = parts[2].trim();
        if label.is_empty() {
            return Err(FormatError::Parse {
                line: line_no,
                msg: "empty label".into(),
            });
        }
        entries.push(Annotation {
            start,
            end,
            label: label.to_string(),
        });
    }
    Ok(Annotations { entries })
}

pub fn render_annotations(ann: &Annotations) -> String {
    let mut out = String::new();
    out.push_str(ANNOTATION_MAGIC);
    out.push('\n');
    for a in &ann.entries {
        out.push_str(&format!("{},{},{}\n", a.start, a.end, a.label));
    }
    out
}

pub fn read_annotations(path: &Path) -> Result<Annotations, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_annotations(&text)
}

pub fn write_annotations(path: &Path, ann: &Annotations) -> Result<(), FormatError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(render_annotations(ann).as_bytes())
        .map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Event logs (newline-delimited JSON, schema-versioned)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub time: f64,
    pub classifier_decisions: u64,
    pub wake_vote_steps: u64,
    pub candidate_templates: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub events: Vec<GateEvent>,
    pub summary: Option<LogSummary>,
}

#[derive(Serialize, Deserialize)]
struct SchemaLine {
    schema: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LogRecord {
    ToggledToInput {
        time: f64,
        score: f64,
    },
    ToggledToSleep {
        time: f64,
        score: f64,
    },
    Command {
        time: f64,
        class: String,
        speed: f64,
    },
    Suppressed {
        time: f64,
        class: String,
    },
    Summary {
        time: f64,
        classifier_decisions: u64,
        wake_vote_steps: u64,
        candidate_templates: u64,
    },
}

impl From<&GateEvent> for LogRecord {
    fn from(e: &GateEvent) -> Self {
        match &e.kind {
            GateEventKind::ToggledToInput { score } => LogRecord::ToggledToInput {
                time: e.time,
                score: *score,
            },
            GateEventKind::ToggledToSleep { score } => LogRecord::ToggledToSleep {
                time: e.time,
                score: *score,
            },
            GateEventKind::Command { class, speed } => LogRecord::Command {
                time: e.time,
                class: class.clone(),
                speed: *speed,
            },
            GateEventKind::Suppressed { class } => LogRecord::Suppressed {
                time: e.time,
                class: class.clone(),
            },
        }
    }
}

pub fn render_event_log(log: &EventLog) -> String {
    let mut out = String::new();
    let header = SchemaLine {
        schema: EVENT_LOG_SCHEMA.to_string(),
    };
    out.push_str(&serde_json::to_string(&header).expect("schema serializes"));
    out.push('\n');
    for e in &log.events {
        let record = LogRecord::from(e);
        out.push_str(&serde_json::to_string(&record).expect("event serializes"));
        out.push('\n');
    }
    if let Some(s) = &log.summary {
        let record = LogRecord::Summary {
            time: s.time,
            classifier_decisions: s.classifier_decisions,
            wake_vote_steps: s.wake_vote_steps,
            candidate_templates: s.candidate_templates,
        };
        out.push_str(&serde_json::to_string(&record).expect("summary serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_event_log(text: &str) -> Result<EventLog, FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| FormatError::Header("empty log".into()))?;
    let header: SchemaLine = serde_json::from_str(first).map_err(|e| FormatError::Parse {
        line: 1,
        msg: format!("schema line: {e}"),
    })?;
    if header.schema != EVENT_LOG_SCHEMA {
        return Err(FormatError::Schema {
            expected: EVENT_LOG_SCHEMA.to_string(),
            got: header.schema,
        });
    }
    let mut log = EventLog::default();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: LogRecord = serde_json::from_str(raw).map_err(|e| FormatError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        match record {
            LogRecord::ToggledToInput { time, score } => log.events.push(GateEvent {
                time,
                kind: GateEventKind::ToggledToInput { score },
            }),
            LogRecord::ToggledToSleep { time, score } => log.events.push(GateEvent {
                time,
                kind: GateEventKind::ToggledToSleep { score },
            }),
            LogRecord::Command { time, class, speed } => log.events.push(GateEvent {
                time,
                kind: GateEventKind::Command { class, speed },
            }),
            LogRecord::Suppressed { time, class } => log.events.push(GateEvent {
                time,
                kind: GateEventKind::Suppressed { class },
            }),
            LogRecord::Summary {
                time,
                classifier_decisions,
                wake_vote_steps,
                candidate_templates,
            } => {
                log.summary = Some(LogSummary {
                    time,
                    classifier_decisions,
                    wake_vote_steps,
                    candidate_templates,
                })
            }
        }
    }
    Ok(log)
}

pub fn read_event_log(path: &Path) -> Result<EventLog, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_event_log(&text)
}

pub fn write_event_log(path: &Path, log: &EventLog) -> Result<(), FormatError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(render_event_log(log).as_bytes())
        .map_err(|e| io_err(path, e))
}
