use serde::{Deserialize, Serialize, Serializer};

use super::ScreenError;

/// Percentages at which enrichment is reported.
pub const EF_PERCENTS: [f64; 3] = [1.0, 5.0, 10.0];

pub(crate) fn round4<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64((v * 1e4).round() / 1e4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub compound_id: String,
    pub score: f64,
    pub active: bool,
}

/// Entries in descending score order; ties broken by compound id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    target_id: String,
    entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn new(target_id: &str, mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.compound_id.cmp(&b.compound_id)));
        Self { target_id: target_id.to_string(), entries }
    }

    pub fn target_id(&self) -> &str {
        &self.target_id
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.entries.iter().filter(|e| e.active).count()
    }
}

/// Mann-Whitney estimate of P(score(active) > score(decoy)), ties counting
/// one half.
pub fn auc(list: &RankedList) -> Result<f64, ScreenError> {
    let p = list.positives();
    let n = list.len() - p;
    if p == 0 || n == 0 {
        return Err(ScreenError::SingleClass);
    }
    // Entries are sorted descending; walk tie groups and credit each active
    // with the decoys strictly below it plus half of those tied with it.
    let e = list.entries();
    let mut decoys_below = n as f64;
    let mut wins = 0.0;
    let mut i = 0;
    while i < e.len() {
        let mut j = i;
        while j < e.len() && e[j].score == e[i].score {
            j += 1;
        }
        let group = &e[i..j];
        let act = group.iter().filter(|x| x.active).count() as f64;
        let dec = group.len() as f64 - act;
        decoys_below -= dec;
        wins += act * (decoys_below + 0.5 * dec);
        i = j;
    }
    Ok(wins / (p as f64 * n as f64))
}

/// `TP * 100 / (x * P)` where TP counts actives in the top
/// `ceil(x% * n)` entries.
pub fn enrichment_factor(list: &RankedList, x_percent: f64) -> Result<f64, ScreenError> {
    if !(x_percent > 0.0 && x_percent <= 100.0) {
        return Err(ScreenError::InvalidPercent(x_percent));
    }
    let p = list.positives();
    if p == 0 {
        return Err(ScreenError::SingleClass);
    }
    // The epsilon keeps 10% of 30 at 3 rather than 4 after rounding noise.
    let window = ((x_percent * list.len() as f64 / 100.0) - 1e-9).ceil().max(0.0) as usize;
    let window = window.min(list.len());
    if window == 0 {
        return Err(ScreenError::EmptyWindow);
    }
    let tp = list.entries()[..window].iter().filter(|e| e.active).count();
    Ok(tp as f64 * 100.0 / (x_percent * p as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(serialize_with = "round4")]
    pub auc: f64,
    #[serde(serialize_with = "round4")]
    pub ef1: f64,
    #[serde(serialize_with = "round4")]
    pub ef5: f64,
    #[serde(serialize_with = "round4")]
    pub ef10: f64,
    pub n_actives: usize,
    pub n_total: usize,
}

pub fn metrics(list: &RankedList) -> Result<Metrics, ScreenError> {
    let [ef1, ef5, ef10] = EF_PERCENTS.map(|x| enrichment_factor(list, x));
    Ok(Metrics { auc: auc(list)?, ef1: ef1?, ef5: ef5?, ef10: ef10?, n_actives: list.positives(), n_total: list.len() })
}

pub const THRESHOLD_LABELS: [&str; 6] = ["<0.5", ">=0.6", ">=0.7", ">=0.8", ">=0.9", ">=0.95"];

/// Rounded percentage of targets per AUC bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdRow(pub [u32; 6]);

pub fn threshold_table(aucs: &[f64]) -> Result<ThresholdRow, ScreenError> {
    if aucs.is_empty() {
        return Err(ScreenError::NoTargets);
    }
    let pct = |pred: &dyn Fn(f64) -> bool| {
        let k = aucs.iter().filter(|&&a| pred(a)).count();
        (k as f64 * 100.0 / aucs.len() as f64).round() as u32
    };
    Ok(ThresholdRow([
        pct(&|a| a < 0.5),
        pct(&|a| a >= 0.6),
        pct(&|a| a >= 0.7),
        pct(&|a| a >= 0.8),
        pct(&|a| a >= 0.9),
        pct(&|a| a >= 0.95),
    ]))
}

/// Unweighted mean and sample standard deviation across targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_targets: usize,
    #[serde(serialize_with = "round4")]
    pub mean_auc: f64,
    #[serde(serialize_with = "round4")]
    pub std_auc: f64,
    #[serde(serialize_with = "round4")]
    pub mean_ef1: f64,
    #[serde(serialize_with = "round4")]
    pub std_ef1: f64,
    #[serde(serialize_with = "round4")]
    pub mean_ef5: f64,
    #[serde(serialize_with = "round4")]
    pub mean_ef10: f64,
    pub thresholds: ThresholdRow,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl Aggregate {
    pub fn from_metrics<'a, I: IntoIterator<Item = &'a Metrics>>(items: I) -> Result<Self, ScreenError> {
        let items: Vec<&Metrics> = items.into_iter().collect();
        let col = |f: fn(&Metrics) -> f64| items.iter().map(|m| f(m)).collect::<Vec<_>>();
        let aucs = col(|m| m.auc);
        let thresholds = threshold_table(&aucs)?;
        let (mean_auc, std_auc) = mean_std(&aucs);
        let (mean_ef1, std_ef1) = mean_std(&col(|m| m.ef1));
        Ok(Self {
            n_targets: items.len(),
            mean_auc,
            std_auc,
            mean_ef1,
            std_ef1,
            mean_ef5: mean_std(&col(|m| m.ef5)).0,
            mean_ef10: mean_std(&col(|m| m.ef10)).0,
            thresholds,
        })
    }

    /// `AUC mean ± std` and `EF1% mean ± std` as printed in per-target tables.
    pub fn per_target_row(&self) -> (String, String) {
        (
            format!("{:.2} ± {:.3}", self.mean_auc, self.std_auc),
            format!("{:.2} ± {:.2}", self.mean_ef1, self.std_ef1),
        )
    }
}
