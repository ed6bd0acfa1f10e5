use serde::{Deserialize, Serialize};

use super::{MpeError, MpeVector, DESCRIPTOR_LEN};
use crate::PAIR_FEATURES;

/// Raw network input: ligand descriptor followed by candidate descriptor.
pub fn pair_features(ligand: &MpeVector, candidate: &MpeVector) -> [f64; PAIR_FEATURES] {
    let mut out = [0.0; PAIR_FEATURES];
    out[..DESCRIPTOR_LEN].copy_from_slice(&ligand.to_array());
    out[DESCRIPTOR_LEN..].copy_from_slice(&candidate.to_array());
    out
}

/// Per-feature min-max map onto `[-1, 1]`. The default value is unfitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit<'a, I>(rows: I) -> Result<Self, MpeError>
    where
        I: IntoIterator<Item = &'a [f64; PAIR_FEATURES]>,
    {
        let mut mins = vec![f64::INFINITY; PAIR_FEATURES];
        let mut maxs = vec![f64::NEG_INFINITY; PAIR_FEATURES];
        let mut seen = false;
        for row in rows {
            seen = true;
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(MpeError::Scaler(format!("non-finite value in feature {k}")));
                }
                mins[k] = mins[k].min(v);
                maxs[k] = maxs[k].max(v);
            }
        }
        if !seen {
            return Err(MpeError::Scaler("cannot fit on an empty set".into()));
        }
        Ok(Self { mins, maxs })
    }

    pub fn is_fitted(&self) -> bool {
        !self.mins.is_empty()
    }

    pub fn validate(&self) -> Result<(), MpeError> {
        if !self.is_fitted() {
            return Err(MpeError::UnfittedScaler);
        }
        if self.mins.len() != PAIR_FEATURES || self.maxs.len() != PAIR_FEATURES {
            return Err(MpeError::Scaler(format!("expected {PAIR_FEATURES} mins and maxs")));
        }
        for (k, (lo, hi)) in self.mins.iter().zip(&self.maxs).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
                return Err(MpeError::Scaler(format!("feature {k}: min {lo} max {hi}")));
            }
        }
        Ok(())
    }

    /// Maps each feature to `[-1, 1]`, clipping out-of-range values. A
    /// feature that was constant during fitting maps to 0.
    pub fn transform(&self, raw: &[f64; PAIR_FEATURES]) -> Result<[f64; PAIR_FEATURES], MpeError> {
        self.validate()?;
        let mut out = [0.0; PAIR_FEATURES];
        for (k, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.mins[k], self.maxs[k]);
            *o = if hi > lo { (2.0 * (raw[k] - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0) } else { 0.0 };
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scaler serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MpeError> {
        let s: Self = serde_json::from_str(text).map_err(|e| MpeError::Scaler(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }
}

pub fn scale_features(
    scaler: &FeatureScaler,
    ligand: &MpeVector,
    candidate: &MpeVector,
) -> Result<[f64; PAIR_FEATURES], MpeError> {
    scaler.transform(&pair_features(ligand, candidate))
}
