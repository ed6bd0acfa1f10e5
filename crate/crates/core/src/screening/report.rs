use serde::Serialize;

use super::literature::LiteratureComparison;
use super::metrics::round4;
use super::{Aggregate, Metrics};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetMetrics {
    pub target_id: String,
    #[serde(flatten)]
    pub metrics: Metrics,
    /// Compounds dropped because their descriptors failed.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedTarget {
    pub target_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    /// Free-form model description, e.g. `mlp [24, 64, 32, 1] tanh`.
    pub model: String,
    /// The fully resolved configuration the run used.
    pub run_config: serde_json::Value,
    pub targets: Vec<TargetMetrics>,
    pub failed_targets: Vec<FailedTarget>,
    pub aggregate: Option<Aggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literature: Option<LiteratureComparison>,
}

impl ScreeningReport {
    pub fn new(model: String, run_config: serde_json::Value, targets: Vec<TargetMetrics>, failed_targets: Vec<FailedTarget>) -> Self {
        let aggregate = Aggregate::from_metrics(targets.iter().map(|t| &t.metrics)).ok();
        Self { model, run_config, targets, failed_targets, aggregate, literature: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Flat view: `target,auc,ef1,ef5,ef10`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["target", "auc", "ef1", "ef5", "ef10"]).expect("in-memory write");
        for t in &self.targets {
            let m = &t.metrics;
            let cells = [m.auc, m.ef1, m.ef5, m.ef10].map(|v| format!("{:.4}", v));
            w.write_record([t.target_id.as_str(), &cells[0], &cells[1], &cells[2], &cells[3]]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Software vs hardware AUC for one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AucDelta {
    pub target_id: String,
    #[serde(serialize_with = "round4")]
    pub sw_auc: f64,
    #[serde(serialize_with = "round4")]
    pub hw_auc: f64,
    /// `hw_auc - sw_auc`.
    #[serde(serialize_with = "round4")]
    pub delta: f64,
}

/// Per-target deltas for targets present in both, sorted by software AUC
/// (best first, ties by id).
pub fn auc_deltas(sw: &[TargetMetrics], hw: &[TargetMetrics]) -> Vec<AucDelta> {
    let mut out: Vec<AucDelta> = sw
        .iter()
        .filter_map(|s| {
            let h = hw.iter().find(|h| h.target_id == s.target_id)?;
            Some(AucDelta {
                target_id: s.target_id.clone(),
                sw_auc: s.metrics.auc,
                hw_auc: h.metrics.auc,
                delta: h.metrics.auc - s.metrics.auc,
            })
        })
        .collect();
    out.sort_by(|a, b| b.sw_auc.total_cmp(&a.sw_auc).then_with(|| a.target_id.cmp(&b.target_id)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub software: ScreeningReport,
    pub hardware: ScreeningReport,
    pub deltas: Vec<AucDelta>,
    /// Targets where the hardware model ranks better.
    pub hardware_better: usize,
    #[serde(serialize_with = "round4")]
    pub mean_auc_drop: f64,
}

impl CompareReport {
    pub fn new(software: ScreeningReport, hardware: ScreeningReport) -> Self {
        let deltas = auc_deltas(&software.targets, &hardware.targets);
        let hardware_better = deltas.iter().filter(|d| d.delta > 0.0).count();
        let mean_auc_drop = if deltas.is_empty() {
            0.0
        } else {
            -deltas.iter().map(|d| d.delta).sum::<f64>() / deltas.len() as f64
        };
        Self { software, hardware, deltas, hardware_better, mean_auc_drop }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// `target,sw_auc,hw_auc,delta` in software-AUC order.
    pub fn deltas_csv(&self) -> String {
        let mut out = String::from("target,sw_auc,hw_auc,delta\n");
        for d in &self.deltas {
            out.push_str(&format!("{},{:.4},{:.4},{:.4}\n", d.target_id, d.sw_auc, d.hw_auc, d.delta));
        }
        out
    }
}
