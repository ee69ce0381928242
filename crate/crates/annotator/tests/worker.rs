use std::collections::BTreeMap;
use std::io::BufReader;
use std::net::TcpListener;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sg4d_annotator::protocol::{DescribeReply, EmbedReply};
use sg4d_annotator::{
    build_batches, spawn_worker, AnnotateError, AnnotationOutput, Annotator, DescriberBackend, DescriberConfig,
    serve_backend, Endpoint, Job, LineDescriber, MockDescriber, OverflowPolicy, WindowQueue,
};
use sg4d_core::{FragmentTrack, FrameMeta, Pose, RleMask, SegmentObservation, Timestamp, TrackObservation, Window};
use sg4d_frameselect::SelectionResult;

/// One-frame window with `k` fragments, all assigned to that frame.
fn job(window_id: u64, k: usize) -> (Window, SelectionResult) {
    let t = Timestamp(window_id as f64);
    let meta = FrameMeta { frame_id: window_id, timestamp: t, pose: Pose::from_yaw([0.0; 3], 0.0), width: 8, height: 8 };
    let tracks: Vec<FragmentTrack> = (0..k as u64)
        .map(|j| FragmentTrack {
            track_id: window_id * 1000 + j,
            observations: vec![TrackObservation {
                frame_id: window_id,
                timestamp: t,
                observation: SegmentObservation {
                    track_id: window_id * 1000 + j,
                    mask: RleMask::from_spans(8, 8, &[(j as usize % 64, 1)]).unwrap(),
                    area_px: 1,
                    centroid_px: [0.5, 0.5],
                    centroid_3d: [0.0; 3],
                    extent_3d: [0.1; 3],
                    label_gt: Some(format!("thing {j}")),
                    small: true,
                },
            }],
        })
        .collect();
    let assignment: BTreeMap<u64, u64> = tracks.iter().map(|t| (t.track_id, window_id)).collect();
    let selection = SelectionResult {
        k_star: 1,
        epsilon: 0,
        budget: 1,
        selected_frames: vec![window_id],
        assignment,
        objective: 0.0,
        nodes: 0,
        optimal: true,
    };
    (Window { window_id, frames: vec![meta], tracks, start: t, end: t }, selection)
}

fn mock_annotator(service: Duration) -> Annotator {
    Annotator::new(Box::new(MockDescriber::new(0, 16, 16).with_service_time(service)), 16, 16)
}

#[test]
fn one_window_five_records() {
    let queue = Arc::new(WindowQueue::new(4, OverflowPolicy::DropOldest));
    let (tx, rx) = mpsc::channel();
    let handle = spawn_worker(Arc::clone(&queue), mock_annotator(Duration::ZERO), 64, tx);
    let (w, s) = job(0, 5);
    queue.push(Job::new(w, s));
    queue.close();
    let stats = handle.join().unwrap();
    let outputs: Vec<AnnotationOutput> = rx.iter().collect();
    assert_eq!(outputs.len(), 1);
    match &outputs[0] {
        AnnotationOutput::Annotated { records, batch_sizes, .. } => {
            assert_eq!(records.len(), 5);
            assert_eq!(batch_sizes, &vec![5]);
            let ids: Vec<u64> = records.iter().map(|r| r.0).collect();
            assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(queue.is_empty());
    assert_eq!((stats.windows, stats.items, stats.calls), (1, 5, 1));
}

#[test]
fn overflow_drops_oldest_when_backend_lags() {
    let queue = Arc::new(WindowQueue::new(4, OverflowPolicy::DropOldest));
    let (tx, rx) = mpsc::channel();
    // 50 ms per item, 5 items per window: far slower than the producer
    let handle = spawn_worker(Arc::clone(&queue), mock_annotator(Duration::from_millis(50)), 64, tx);
    let mut dropped = Vec::new();
    for id in 0..12 {
        let (w, s) = job(id, 5);
        if let Some(old) = queue.push(Job::new(w, s)) {
            dropped.push(old.window.window_id);
        }
    }
    assert!(!dropped.is_empty());
    assert!(queue.len() <= 4);
    queue.close();
    handle.join().unwrap();
    let done: Vec<u64> = rx
        .iter()
        .map(|o| match o {
            AnnotationOutput::Annotated { window_id, .. } => window_id,
            AnnotationOutput::Failed { window_id, .. } => panic!("window {window_id} failed"),
        })
        .collect();
    assert_eq!(done.len() + dropped.len(), 12);
    assert!(done.windows(2).all(|p| p[0] < p[1]), "FIFO order: {done:?}");
    assert_eq!(queue.dropped() as usize, dropped.len());
}

/// 0.18 s per fragment against 5 fragments per second, run 10x faster:
/// 18 ms per fragment, one 5-fragment window every 100 ms (90% load).
#[test]
fn sustained_load_below_capacity_never_drops() {
    let queue = Arc::new(WindowQueue::new(4, OverflowPolicy::DropOldest));
    let (tx, rx) = mpsc::channel();
    let handle = spawn_worker(Arc::clone(&queue), mock_annotator(Duration::from_millis(18)), 64, tx);
    let start = Instant::now();
    let windows = 20u64;
    for id in 0..windows {
        let due = start + Duration::from_millis(100 * id);
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            std::thread::sleep(wait);
        }
        let (w, s) = job(id, 5);
        assert!(queue.push(Job::new(w, s)).is_none(), "window {id} caused a drop");
    }
    queue.close();
    let stats = handle.join().unwrap();
    assert_eq!(queue.dropped(), 0);
    assert_eq!(rx.iter().count() as u64, windows);
    let mean = stats.service_per_fragment_s.iter().sum::<f64>() / stats.service_per_fragment_s.len() as f64;
    assert!(mean >= 0.018 && mean < 0.03, "mean service {mean}");
}

#[test]
fn batch_of_48_is_one_call() {
    let (w, s) = job(1, 48);
    let batches = build_batches(&s, &w, 128);
    assert_eq!(batches.len(), 1);
    let mut a = mock_annotator(Duration::ZERO);
    let interval = sg4d_core::Interval::new(w.start, w.end);
    assert_eq!(a.annotate(&batches[0], interval).unwrap().len(), 48);
    assert_eq!(a.calls(), 1);
}

#[test]
fn call_counts_with_and_without_batching() {
    let (w, s) = job(2, 256);
    for (max_batch, calls) in [(64usize, 4u64), (1, 256)] {
        let mut a = mock_annotator(Duration::ZERO);
        let interval = sg4d_core::Interval::new(w.start, w.end);
        let mut n = 0;
        for b in build_batches(&s, &w, max_batch) {
            n += a.annotate(&b, interval).unwrap().len();
        }
        assert_eq!(n, 256);
        assert_eq!(a.calls(), calls);
    }
}

/// Answers describe and embed requests with the mock over one TCP connection.
fn serve_mock_once(listener: TcpListener) {
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let writer = stream.try_clone().unwrap();
        let mut mock = MockDescriber::new(0, 16, 16);
        serve_backend(&mut mock, BufReader::new(stream), writer).unwrap();
    });
}

#[test]
fn served_backend_reports_bad_lines_and_keeps_going() {
    let mut mock = MockDescriber::new(0, 4, 4);
    let input = "not json\n\n{\"embed_text\":\"mug\"}\n";
    let mut out = Vec::new();
    serve_backend(&mut mock, input.as_bytes(), &mut out).unwrap();
    let lines: Vec<&str> = std::str::from_utf8(&out).unwrap().lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("{\"error\":"), "{}", lines[0]);
    let reply: EmbedReply = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(reply, mock.embed_text("mug").unwrap());
}

#[test]
fn tcp_backend_matches_in_process_mock() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    serve_mock_once(listener);
    let cfg = DescriberConfig { endpoint: Endpoint::Tcp(addr.to_string()), d1: 16, d2: 16, ..Default::default() };
    let mut remote = Annotator::new(cfg.connect().unwrap(), 16, 16);
    let mut local = mock_annotator(Duration::ZERO);
    let (w, s) = job(3, 6);
    let interval = sg4d_core::Interval::new(w.start, w.end);
    for b in build_batches(&s, &w, 4) {
        assert_eq!(remote.annotate(&b, interval).unwrap(), local.annotate(&b, interval).unwrap());
    }
    assert_eq!(remote.embed_text("chair").unwrap(), local.embed_text("chair").unwrap());
}

#[test]
fn subprocess_garbage_is_protocol_error() {
    let backend = LineDescriber::spawn("while read line; do echo not-json; done", Duration::from_secs(5)).unwrap();
    let mut a = Annotator::new(Box::new(backend), 16, 16);
    let (w, s) = job(4, 2);
    let b = &build_batches(&s, &w, 8)[0];
    let err = a.annotate(b, sg4d_core::Interval::new(w.start, w.end)).unwrap_err();
    assert!(matches!(err, AnnotateError::Protocol(_)), "{err}");
    assert!(!err.is_retryable());
}

#[test]
fn subprocess_silence_times_out() {
    let backend = LineDescriber::spawn("sleep 5", Duration::from_millis(200)).unwrap();
    let mut a = Annotator::new(Box::new(backend), 16, 16);
    let (w, s) = job(5, 1);
    let b = &build_batches(&s, &w, 8)[0];
    let t0 = Instant::now();
    let err = a.annotate(b, sg4d_core::Interval::new(w.start, w.end)).unwrap_err();
    assert!(matches!(err, AnnotateError::Timeout(_)));
    assert!(err.is_retryable());
    assert!(t0.elapsed() < Duration::from_secs(2));
}

#[test]
fn subprocess_that_exits_is_reported() {
    let backend = LineDescriber::spawn("true", Duration::from_secs(2)).unwrap();
    let mut a = Annotator::new(Box::new(backend), 16, 16);
    let (w, s) = job(6, 1);
    let b = &build_batches(&s, &w, 8)[0];
    assert!(a.annotate(b, sg4d_core::Interval::new(w.start, w.end)).is_err());
}

#[test]
fn reply_wire_format_is_stable() {
    let reply = DescribeReply { batch_id: 3, results: vec![] };
    assert_eq!(serde_json::to_string(&reply).unwrap(), r#"{"batch_id":3,"results":[]}"#);
    let e: EmbedReply = serde_json::from_str(r#"{"emb_img":[1.0],"emb_txt":[2.0]}"#).unwrap();
    assert_eq!(e.emb_txt, vec![2.0]);
}

mod alignment {
    use super::*;
    use proptest::prelude::*;
    use sg4d_annotator::protocol::DescribeRequest;

    /// Mock whose results are permuted by `perm` before returning.
    struct Permuting {
        inner: MockDescriber,
        perm: Vec<usize>,
    }

    impl DescriberBackend for Permuting {
        fn describe(&mut self, r: &DescribeRequest) -> Result<DescribeReply, AnnotateError> {
            let mut reply = self.inner.describe(r)?;
            let original = reply.results.clone();
            for (k, &p) in self.perm.iter().enumerate() {
                reply.results[k] = original[p].clone();
            }
            Ok(reply)
        }
        fn embed_text(&mut self, t: &str) -> Result<EmbedReply, AnnotateError> {
            self.inner.embed_text(t)
        }
    }

    proptest! {
        #[test]
        fn only_identity_order_is_accepted(perm in (1usize..12).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())) {
            let n = perm.len();
            let identity = perm.iter().enumerate().all(|(k, &p)| k == p);
            let (w, s) = job(9, n);
            let b = &build_batches(&s, &w, 64)[0];
            let mut a = Annotator::new(Box::new(Permuting { inner: MockDescriber::new(0, 8, 8), perm }), 8, 8);
            let result = a.annotate(b, sg4d_core::Interval::new(w.start, w.end));
            if identity {
                let recs = result.unwrap();
                for (item, rec) in b.items.iter().zip(&recs) {
                    prop_assert!(rec.text.contains(item.label_gt.as_deref().unwrap()));
                }
            } else {
                prop_assert!(matches!(result, Err(AnnotateError::Protocol(_))));
            }
        }
    }
}
