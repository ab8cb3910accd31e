//! Live TCP ingest: one producer connection streaming newline-delimited
//! frames (`t,c1,...,cC`), delivered in arrival order through a bounded
//! queue. Beyond the bound the oldest frames are dropped (and counted) so a
//! slow consumer sees fresh data; malformed lines are dropped with a counted
//! warning; a sustained slow producer raises a stall warning.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crate::signal::EmgFrame;

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub channels: usize,
    pub sample_rate_hz: f64,
    /// Queue bound in frames; 2 s worth at the stream rate by default.
    pub queue_capacity: usize,
    /// Window for the sustained-rate stall check.
    pub stall_window: Duration,
}

impl IngestConfig {
    pub fn standard(channels: usize, sample_rate_hz: f64) -> Self {
        Self {
            channels,
            sample_rate_hz,
            queue_capacity: (2.0 * sample_rate_hz).ceil() as usize,
            stall_window: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub frames_delivered: u64,
    pub malformed_lines: u64,
    pub dropped_frames: u64,
    pub stall_warnings: u64,
}

#[derive(Default)]
struct Counters {
    delivered: AtomicU64,
    malformed: AtomicU64,
    dropped: AtomicU64,
    stalls: AtomicU64,
}

struct QueueInner {
    frames: VecDeque<EmgFrame>,
    closed: bool,
}

struct SharedQueue {
    inner: Mutex<QueueInner>,
    cond: Condvar,
    capacity: usize,
    counters: Counters,
}

impl SharedQueue {
    fn push(&self, frame: EmgFrame) {
        let mut inner = self.inner.lock().unwrap();
        if inner.frames.len() == self.capacity {
            inner.frames.pop_front();
            self.counters.dropped.fetch_add(1, Ordering::Relaxed);
        }
        inner.frames.push_back(frame);
        drop(inner);
        self.cond.notify_one();
    }

    fn close(&self) {
        self.inner.lock().unwrap().closed = true;
        self.cond.notify_all();
    }

    fn pop(&self) -> Option<EmgFrame> {
        let mut inner = self.inner.lock().unwrap();
        loop {
            if let Some(f) = inner.frames.pop_front() {
                self.counters.delivered.fetch_add(1, Ordering::Relaxed);
                return Some(f);
            }
            if inner.closed {
                return None;
            }
            inner = self.cond.wait(inner).unwrap();
        }
    }

    fn finished(&self) -> bool {
        self.inner.lock().unwrap().closed
    }
}

/// Handle to a live ingest: pull frames with [`TcpIngest::next_frame`].
pub struct TcpIngest {
    local_addr: SocketAddr,
    queue: Arc<SharedQueue>,
    _reader: JoinHandle<()>,
}

impl TcpIngest {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Blocks for the next frame; `None` once the producer disconnected and
    /// the queue is drained (the stream-end event).
    pub fn next_frame(&self) -> Option<EmgFrame> {
        self.queue.pop()
    }

    /// True once the producer has disconnected (frames may still be queued).
    pub fn producer_done(&self) -> bool {
        self.queue.finished()
    }

    pub fn stats(&self) -> IngestStats {
        let c = &self.queue.counters;
        IngestStats {
            frames_delivered: c.delivered.load(Ordering::Relaxed),
            malformed_lines: c.malformed.load(Ordering::Relaxed),
            dropped_frames: c.dropped.load(Ordering::Relaxed),
            stall_warnings: c.stalls.load(Ordering::Relaxed),
        }
    }
}

fn parse_line(line: &str, channels: usize) -> Option<EmgFrame> {
    let mut fields = line.trim().split(',');
    let t: f64 = fields.next()?.trim().parse().ok()?;
    let samples: Vec<f64> = fields
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .ok()?;
    if samples.len() != channels || !t.is_finite() {
        return None;
    }
    Some(EmgFrame::new(t, samples))
}

fn reader_loop(stream: TcpStream, cfg: &IngestConfig, queue: &SharedQueue) {
    stream
        .set_read_timeout(Some(Duration::from_millis(100)))
        .expect("socket supports read timeouts");
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    let min_frames_per_window = 0.5 * cfg.sample_rate_hz * cfg.stall_window.as_secs_f64();
    let mut window_start = Instant::now();
    let mut frames_in_window = 0u64;
    let mut stalled = false;

    loop {
        // partial lines survive timeouts: read_line keeps appending
        match reader.read_line(&mut line) {
            Ok(0) => break, // producer disconnected
            Ok(_) => {
                if line.ends_with('\n') {
                    match parse_line(&line, cfg.channels) {
                        Some(frame) => {
                            queue.push(frame);
                            frames_in_window += 1;
                        }
                        None => {
                            queue.counters.malformed.fetch_add(1, Ordering::Relaxed);
                            log::warn!("malformed frame line dropped: {:?}", line.trim_end());
                        }
                    }
                    line.clear();
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock || e.kind() == ErrorKind::TimedOut => {}
            Err(e) => {
                log::warn!("ingest read error: {e}");
                break;
            }
        }
        if window_start.elapsed() >= cfg.stall_window {
            if (frames_in_window as f64) < min_frames_per_window {
                if !stalled {
                    queue.counters.stalls.fetch_add(1, Ordering::Relaxed);
                    log::warn!(
                        "ingest stalled: {frames_in_window} frames in the last {:?} (expected >= {min_frames_per_window})",
                        cfg.stall_window
                    );
                    stalled = true;
                }
            } else {
                stalled = false;
            }
            window_start = Instant::now();
            frames_in_window = 0;
        }
    }
    queue.close();
}

/// Binds the listen address and accepts exactly one producer connection.
pub fn ingest_tcp(bind: &str, cfg: IngestConfig) -> std::io::Result<TcpIngest> {
    let listener = TcpListener::bind(bind)?;
    let local_addr = listener.local_addr()?;
    let queue = Arc::new(SharedQueue {
        inner: Mutex::new(QueueInner {
            frames: VecDeque::new(),
            closed: false,
        }),
        cond: Condvar::new(),
        capacity: cfg.queue_capacity.max(1),
        counters: Counters::default(),
    });
    let reader_queue = Arc::clone(&queue);
    let reader = std::thread::spawn(move || {
        match listener.accept() {
            Ok((stream, peer)) => {
                log::info!("producer connected from {peer}");
                drop(listener); // single-producer protocol
                reader_loop(stream, &cfg, &reader_queue);
            }
            Err(e) => {
                log::warn!("accept failed: {e}");
                reader_queue.close();
            }
        }
    });
    Ok(TcpIngest {
        local_addr,
        queue,
        _reader: reader,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn connect(addr: SocketAddr) -> TcpStream {
        TcpStream::connect(addr).expect("connect to ingest")
    }

    #[test]
    fn well_formed_lines_deliver_in_order() {
        let ingest = ingest_tcp("127.0.0.1:0", IngestConfig::standard(2, 200.0)).unwrap();
        let mut producer = connect(ingest.local_addr());
        producer
            .write_all(b"0.0,1,2\n0.005,3,4\n0.01,5,6\n")
            .unwrap();
        drop(producer);
        let frames: Vec<EmgFrame> = std::iter::from_fn(|| ingest.next_frame()).collect();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[0].samples, vec![1.0, 2.0]);
        assert_eq!(frames[2].timestamp, 0.01);
        assert_eq!(ingest.stats().malformed_lines, 0);
    }

    #[test]
    fn garbage_lines_are_skipped_and_counted() {
        let ingest = ingest_tcp("127.0.0.1:0", IngestConfig::standard(2, 200.0)).unwrap();
        let mut producer = connect(ingest.local_addr());
        producer.write_all(b"0.0,1,2\ngarbage\n0.01,5,6\n").unwrap();
        drop(producer);
        let frames: Vec<EmgFrame> = std::iter::from_fn(|| ingest.next_frame()).collect();
        assert_eq!(frames.len(), 2);
        assert_eq!(ingest.stats().malformed_lines, 1);
    }

    #[test]
    fn wrong_channel_count_is_malformed() {
        let ingest = ingest_tcp("127.0.0.1:0", IngestConfig::standard(3, 200.0)).unwrap();
        let mut producer = connect(ingest.local_addr());
        producer.write_all(b"0.0,1,2\n0.005,1,2,3\n").unwrap();
        drop(producer);
        let frames: Vec<EmgFrame> = std::iter::from_fn(|| ingest.next_frame()).collect();
        assert_eq!(frames.len(), 1);
        assert_eq!(ingest.stats().malformed_lines, 1);
    }

    #[test]
    fn overflow_drops_oldest_frames() {
        let cfg = IngestConfig {
            channels: 1,
            sample_rate_hz: 200.0,
            queue_capacity: 5,
            stall_window: Duration::from_secs(30),
        };
        let ingest = ingest_tcp("127.0.0.1:0", cfg).unwrap();
        let mut producer = connect(ingest.local_addr());
        for i in 0..20 {
            producer
                .write_all(format!("{},{}\n", i as f64 * 0.005, i).as_bytes())
                .unwrap();
        }
        drop(producer);
        while !ingest.producer_done() {
            std::thread::sleep(Duration::from_millis(5));
        }
        let frames: Vec<EmgFrame> = std::iter::from_fn(|| ingest.next_frame()).collect();
        assert_eq!(frames.len(), 5);
        assert_eq!(frames[0].samples, vec![15.0]); // oldest dropped
        assert_eq!(ingest.stats().dropped_frames, 15);
    }

    #[test]
    fn sustained_slow_producer_raises_stall_warning() {
        let cfg = IngestConfig {
            channels: 1,
            sample_rate_hz: 40.0, // expects >= 20 frames per window
            queue_capacity: 1000,
            stall_window: Duration::from_millis(300),
        };
        let ingest = ingest_tcp("127.0.0.1:0", cfg).unwrap();
        let mut producer = connect(ingest.local_addr());
        for i in 0..8 {
            producer
                .write_all(format!("{},0\n", i as f64 * 0.1).as_bytes())
                .unwrap();
            producer.flush().unwrap();
            std::thread::sleep(Duration::from_millis(100)); // ~10 fps, well under rate
        }
        drop(producer);
        while !ingest.producer_done() {
            std::thread::sleep(Duration::from_millis(5));
        }
        assert!(ingest.stats().stall_warnings >= 1);
    }
}
