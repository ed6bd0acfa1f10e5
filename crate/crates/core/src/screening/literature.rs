//! Published reference numbers, echoed next to measured results. None of
//! these are reproduced by this crate; speed and energy figures are FPGA
//! and CPU platform measurements.

use serde::Serialize;

use super::{Aggregate, ThresholdRow};

/// Pairs in the generic training set built from the full DUD-E corpus.
pub const DUDE_TRAIN_INSTANCES: usize = 162_530;
/// Pairs in the corresponding test set.
pub const DUDE_TEST_INSTANCES: usize = 1_300_804;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceleratorRow {
    pub model: &'static str,
    pub auc: f64,
    pub inferences_per_second: f64,
    pub watts: f64,
    pub inferences_per_joule: f64,
    pub parallelization: u32,
}

const fn acc(model: &'static str, auc: f64, ips: f64, watts: f64, ipj: f64, par: u32) -> AcceleratorRow {
    AcceleratorRow { model, auc, inferences_per_second: ips, watts, inferences_per_joule: ipj, parallelization: par }
}

/// Software and hardware model families.
pub const ACCELERATORS: [AcceleratorRow; 10] = [
    acc("Sw 12", 0.67, 43573.0, 95.0, 459.0, 1),
    acc("Sw 24", 0.75, 42034.0, 95.0, 442.0, 1),
    acc("Sw 48", 0.78, 37397.0, 95.0, 394.0, 1),
    acc("Sw 64", 0.83, 31616.0, 95.0, 333.0, 1),
    acc("Sw 256", 0.74, 27785.0, 95.0, 292.0, 1),
    acc("Hw 12", 0.58, 436364.0, 21.0, 20779.0, 72),
    acc("Hw 24", 0.62, 163636.0, 21.0, 7792.0, 27),
    acc("Hw 48", 0.76, 72727.0, 21.0, 3463.0, 12),
    acc("Hw 64", 0.69, 42424.0, 21.0, 2020.0, 7),
    acc("Hw 256", 0.70, 18182.0, 21.0, 866.0, 3),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodRow {
    pub method: &'static str,
    pub auc: f64,
    pub ef1: Option<f64>,
    pub ef5: Option<f64>,
    pub ef10: Option<f64>,
    pub inferences_per_second: Option<f64>,
    pub inferences_per_joule: Option<f64>,
}

/// Comparison against other ligand-based methods.
pub const METHODS: [MethodRow; 6] = [
    MethodRow { method: "Sw 64", auc: 0.83, ef1: Some(20.71), ef5: Some(9.08), ef10: Some(5.63), inferences_per_second: Some(31616.0), inferences_per_joule: Some(333.0) },
    MethodRow { method: "Hw 48", auc: 0.76, ef1: Some(15.07), ef5: Some(6.69), ef10: Some(4.42), inferences_per_second: Some(72727.0), inferences_per_joule: Some(3463.0) },
    MethodRow { method: "eSim-pscreen", auc: 0.76, ef1: None, ef5: None, ef10: None, inferences_per_second: Some(12.3), inferences_per_joule: None },
    MethodRow { method: "eSim-pfast", auc: 0.74, ef1: None, ef5: None, ef10: None, inferences_per_second: Some(61.2), inferences_per_joule: None },
    MethodRow { method: "eSim-pfastf", auc: 0.71, ef1: None, ef5: None, ef10: None, inferences_per_second: Some(274.9), inferences_per_joule: None },
    MethodRow { method: "mRAISE", auc: 0.74, ef1: Some(23.45), ef5: Some(7.78), ef10: Some(4.69), inferences_per_second: None, inferences_per_joule: None },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReference {
    pub method: &'static str,
    pub row: ThresholdRow,
}

/// Percentage of targets per AUC bucket. The last row is printed as a
/// second "eSim-pfast" in the source table; by position it is pfastf.
pub const THRESHOLDS: [ThresholdReference; 5] = [
    ThresholdReference { method: "Sw 64", row: ThresholdRow([0, 96, 85, 61, 29, 15]) },
    ThresholdReference { method: "Hw 48", row: ThresholdRow([1, 86, 63, 38, 16, 8]) },
    ThresholdReference { method: "eSim-pscreen", row: ThresholdRow([5, 81, 69, 43, 17, 8]) },
    ThresholdReference { method: "eSim-pfast", row: ThresholdRow([9, 82, 62, 34, 14, 5]) },
    ThresholdReference { method: "eSim-pfastf", row: ThresholdRow([5, 79, 53, 26, 6, 3]) },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerTargetReference {
    pub model: &'static str,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub ef1_mean: f64,
    pub ef1_std: f64,
}

/// Per-target training on the 38-target DUD subset.
pub const PER_TARGET: [PerTargetReference; 2] = [
    PerTargetReference { model: "Sw 64", auc_mean: 0.94, auc_std: 0.048, ef1_mean: 30.14, ef1_std: 6.95 },
    PerTargetReference { model: "NN-500", auc_mean: 0.95, auc_std: 0.33, ef1_mean: 37.3, ef1_std: 14.7 },
];

/// Measured aggregate laid out next to the published tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiteratureComparison {
    pub label: String,
    pub measured: Aggregate,
    pub accelerators: Vec<AcceleratorRow>,
    pub methods: Vec<MethodRow>,
    pub thresholds: Vec<ThresholdReference>,
    pub per_target: Vec<PerTargetReference>,
    pub note: String,
}

impl LiteratureComparison {
    pub fn new(label: &str, measured: Aggregate) -> Self {
        Self {
            label: label.to_string(),
            measured,
            accelerators: ACCELERATORS.to_vec(),
            methods: METHODS.to_vec(),
            thresholds: THRESHOLDS.to_vec(),
            per_target: PER_TARGET.to_vec(),
            note: "Literature values are echoed for side-by-side reading only. They come from the full DUD-E \
                   corpus; speed and energy columns are platform measurements and are not reproduced."
                .into(),
        }
    }
}
