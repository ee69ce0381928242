//! Bounded window queue and the annotation worker that drains it.

use std::collections::VecDeque;
use std::sync::mpsc::Sender;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sg4d_core::{DescriptionRecord, Interval, Window};
use sg4d_frameselect::SelectionResult;

use crate::annotate::Annotator;
use crate::batch::build_batches;

/// What a full queue does with a new window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    /// Evict the oldest queued window (live operation).
    DropOldest,
    /// Block the producer until there is room (offline replay).
    Block,
}

struct QueueState<T> {
    items: VecDeque<T>,
    closed: bool,
    dropped: u64,
}

pub struct WindowQueue<T> {
    state: Mutex<QueueState<T>>,
    has_items: Condvar,
    has_space: Condvar,
    capacity: usize,
    policy: OverflowPolicy,
}

impl<T> WindowQueue<T> {
    pub const DEFAULT_CAPACITY: usize = 4;

    pub fn new(capacity: usize, policy: OverflowPolicy) -> Self {
        Self {
            state: Mutex::new(QueueState { items: VecDeque::with_capacity(capacity), closed: false, dropped: 0 }),
            has_items: Condvar::new(),
            has_space: Condvar::new(),
            capacity: capacity.max(1),
            policy,
        }
    }

    /// Enqueues `item`. Under [`OverflowPolicy::DropOldest`] a full queue
    /// evicts and returns its oldest entry.
    pub fn push(&self, item: T) -> Option<T> {
        let mut st = self.state.lock().unwrap();
        let mut evicted = None;
        while st.items.len() >= self.capacity {
            match self.policy {
                OverflowPolicy::DropOldest => {
                    evicted = st.items.pop_front();
                    st.dropped += 1;
                    log::warn!(
                        "annotation queue full ({} windows); dropping oldest window, annotation is lagging",
                        self.capacity
                    );
                }
                OverflowPolicy::Block => st = self.has_space.wait(st).unwrap(),
            }
        }
        st.items.push_back(item);
        self.has_items.notify_one();
        evicted
    }

    /// Blocks for the next item; `None` once closed and drained.
    pub fn pop(&self) -> Option<T> {
        let mut st = self.state.lock().unwrap();
        loop {
            if let Some(item) = st.items.pop_front() {
                self.has_space.notify_one();
                return Some(item);
            }
            if st.closed {
                return None;
            }
            st = self.has_items.wait(st).unwrap();
        }
    }

    pub fn close(&self) {
        self.state.lock().unwrap().closed = true;
        self.has_items.notify_all();
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped(&self) -> u64 {
        self.state.lock().unwrap().dropped
    }
}

/// One window's selection, queued for annotation.
#[derive(Debug, Clone)]
pub struct Job {
    pub window: Window,
    pub selection: SelectionResult,
    pub enqueued: Instant,
}

impl Job {
    pub fn new(window: Window, selection: SelectionResult) -> Self {
        Self { window, selection, enqueued: Instant::now() }
    }
}

#[derive(Debug, Clone)]
pub enum AnnotationOutput {
    Annotated {
        window_id: u64,
        /// `(track_id, frame_id, record)` in request order.
        records: Vec<(u64, u64, DescriptionRecord)>,
        batch_sizes: Vec<usize>,
        /// Backend time for the whole window.
        service: Duration,
        /// Enqueue to last record.
        latency: Duration,
    },
    Failed {
        window_id: u64,
        error: String,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorkerStats {
    pub windows: u64,
    pub items: u64,
    pub calls: u64,
    pub failures: u64,
    /// Backend service time divided by items, one entry per batch.
    pub service_per_fragment_s: Vec<f64>,
    pub window_latency_s: Vec<f64>,
}

/// Starts the annotation worker. It processes windows FIFO until the queue is
/// closed and drained, sending one [`AnnotationOutput`] per window. Timeouts
/// are retried once.
pub fn spawn_worker(
    queue: Arc<WindowQueue<Job>>,
    mut annotator: Annotator,
    max_batch: usize,
    out: Sender<AnnotationOutput>,
) -> JoinHandle<WorkerStats> {
    std::thread::spawn(move || {
        let mut stats = WorkerStats::default();
        while let Some(job) = queue.pop() {
            let window_id = job.window.window_id;
            let interval = Interval::new(job.window.start, job.window.end);
            let batches = build_batches(&job.selection, &job.window, max_batch);
            let mut records = Vec::new();
            let mut failure = None;
            let started = Instant::now();
            for batch in &batches {
                let t0 = Instant::now();
                let mut result = annotator.annotate(batch, interval);
                if matches!(&result, Err(e) if e.is_retryable()) {
                    log::warn!("window {window_id}: describer timed out, retrying batch {}", batch.batch_id);
                    result = annotator.annotate(batch, interval);
                }
                match result {
                    Ok(recs) => {
                        let dt = t0.elapsed().as_secs_f64();
                        stats.service_per_fragment_s.push(dt / batch.items.len().max(1) as f64);
                        for (item, rec) in batch.items.iter().zip(recs) {
                            records.push((item.track_id, item.frame_id, rec));
                        }
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            stats.calls = annotator.calls();
            let msg = match failure {
                Some(error) => {
                    stats.failures += 1;
                    log::error!("window {window_id}: annotation failed: {error}");
                    AnnotationOutput::Failed { window_id, error }
                }
                None => {
                    stats.windows += 1;
                    stats.items += records.len() as u64;
                    let latency = job.enqueued.elapsed();
                    stats.window_latency_s.push(latency.as_secs_f64());
                    AnnotationOutput::Annotated {
                        window_id,
                        records,
                        batch_sizes: batches.iter().map(|b| b.items.len()).collect(),
                        service: started.elapsed(),
                        latency,
                    }
                }
            };
            if out.send(msg).is_err() {
                break;
            }
        }
        stats
    })
}
