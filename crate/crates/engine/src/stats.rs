//! Run statistics: JSON, per-window CSV and a plain-text table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub window_id: u64,
    pub frames: usize,
    pub fragments: usize,
    pub k_star: usize,
    pub selected_frames: usize,
    /// Fragments assigned to a selected frame.
    pub assigned: usize,
    pub batch_sizes: Vec<usize>,
    /// Description records the annotator emitted for this window.
    pub records: usize,
    /// Evicted from the annotation queue before it was described.
    pub dropped: bool,
    pub select_s: f64,
    /// Enqueue to last record.
    pub annotate_latency_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt(), max: values.iter().copied().fold(f64::MIN, f64::max), count: values.len() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_s: f64,
    pub frames_per_s: f64,
    pub fragments_annotated_per_s: f64,
    pub select_s: Summary,
    pub annotate_latency_s: Summary,
    /// Backend time per fragment, one sample per batch.
    pub service_per_fragment_s: Summary,
    pub places_s: f64,
    pub finalize_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub frames: usize,
    pub windows: Vec<WindowStats>,
    pub fragments_annotated: usize,
    pub backend_calls: u64,
    pub dropped_windows: u64,
    pub ground_records: usize,
    pub object_merges: usize,
    pub place_merges: usize,
    pub objects: usize,
    pub places: usize,
    pub regions: usize,
    pub timing: Timing,
}

impl RunStats {
    /// The same stats with every wall-clock measurement zeroed.
    pub fn without_timing(&self) -> Self {
        let mut s = self.clone();
        s.timing = Timing::default();
        for w in &mut s.windows {
            w.select_s = 0.0;
            w.annotate_latency_s = w.annotate_latency_s.map(|_| 0.0);
        }
        s
    }

    /// Checks that assigned items, batched items and emitted records agree.
    pub fn check_consistency(&self) -> Result<(), String> {
        let live = self.windows.iter().filter(|w| !w.dropped);
        let assigned: usize = live.clone().map(|w| w.assigned).sum();
        let batched: usize = live.clone().map(|w| w.batch_sizes.iter().sum::<usize>()).sum();
        let records: usize = live.map(|w| w.records).sum();
        if assigned == batched && batched == records && records == self.fragments_annotated {
            Ok(())
        } else {
            Err(format!(
                "assigned {assigned}, batched {batched}, records {records}, annotated {}",
                self.fragments_annotated
            ))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize") + "\n"
    }

    pub fn windows_csv(&self) -> String {
        let mut out = String::from(
            "window_id,frames,fragments,k_star,selected_frames,assigned,batches,records,dropped,select_s,annotate_latency_s\n",
        );
        for w in &self.windows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.6},{}",
                w.window_id,
                w.frames,
                w.fragments,
                w.k_star,
                w.selected_frames,
                w.assigned,
                w.batch_sizes.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" "),
                w.records,
                w.dropped,
                w.select_s,
                w.annotate_latency_s.map(|v| format!("{v:.6}")).unwrap_or_default(),
            );
        }
        out
    }

    pub fn table(&self) -> String {
        let t = &self.timing;
        let k: Vec<f64> = self.windows.iter().map(|w| w.k_star as f64).collect();
        let batches: Vec<f64> =
            self.windows.iter().flat_map(|w| w.batch_sizes.iter().map(|&b| b as f64)).collect();
        let ks = Summary::of(&k);
        let bs = Summary::of(&batches);
        let rows: Vec<(&str, String)> = vec![
            ("frames", self.frames.to_string()),
            ("windows", format!("{} ({} dropped)", self.windows.len(), self.dropped_windows)),
            ("K* per window", format!("{:.2} ± {:.2} (max {})", ks.mean, ks.std, ks.max)),
            ("batch size", format!("{:.1} ± {:.1} over {} batches", bs.mean, bs.std, bs.count)),
            ("fragments annotated", self.fragments_annotated.to_string()),
            ("ground annotations", self.ground_records.to_string()),
            ("backend calls", self.backend_calls.to_string()),
            ("merges (objects / places)", format!("{} / {}", self.object_merges, self.place_merges)),
            ("graph (objects / places / regions)", format!("{} / {} / {}", self.objects, self.places, self.regions)),
            ("wall time", format!("{:.3} s", t.wall_s)),
            ("frame rate", format!("{:.1} frames/s", t.frames_per_s)),
            ("annotation rate", format!("{:.1} fragments/s", t.fragments_annotated_per_s)),
            ("selection latency", format!("{:.4} ± {:.4} s (max {:.4})", t.select_s.mean, t.select_s.std, t.select_s.max)),
            (
                "annotation latency",
                format!("{:.4} ± {:.4} s (max {:.4})", t.annotate_latency_s.mean, t.annotate_latency_s.std, t.annotate_latency_s.max),
            ),
            ("service per fragment", format!("{:.6} s", t.service_per_fragment_s.mean)),
            ("places extraction", format!("{:.3} s", t.places_s)),
            ("finalize", format!("{:.3} s", t.finalize_s)),
        ];
        render_rows(&rows)
    }
}

pub(crate) fn render_rows(rows: &[(&str, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<w$}  {v}");
    }
    out
}
