use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ScreenError;
use crate::mpe::{
    mpe_vector, pair_features, parse_molecules, read_descriptor_cache, FeatureScaler, Molecule, MoleculeFormat,
    MpeError, MpeVector,
};
use crate::nn::LabeledPair;
use crate::rng::substream;

/// A target with raw molecules.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    pub target_id: String,
    pub crystal_ligand: Molecule,
    pub actives: Vec<Molecule>,
    pub decoys: Vec<Molecule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compound {
    pub id: String,
    pub descriptor: MpeVector,
}

/// A target reduced to descriptors, ready for pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTarget {
    pub target_id: String,
    pub ligand: MpeVector,
    pub actives: Vec<Compound>,
    pub decoys: Vec<Compound>,
    /// Compounds dropped because their descriptor could not be computed.
    pub skipped: Vec<String>,
}

impl DescriptorTarget {
    pub fn validate(&self) -> Result<(), ScreenError> {
        let bad = |reason: String| ScreenError::InvalidTarget { target: self.target_id.clone(), reason };
        let actives: HashSet<&str> = self.actives.iter().map(|c| c.id.as_str()).collect();
        if actives.len() != self.actives.len() {
            return Err(bad("duplicate active ids".into()));
        }
        let mut decoys = HashSet::new();
        for d in &self.decoys {
            if actives.contains(d.id.as_str()) {
                return Err(bad(format!("compound {:?} is both active and decoy", d.id)));
            }
            if !decoys.insert(d.id.as_str()) {
                return Err(bad(format!("duplicate decoy id {:?}", d.id)));
            }
        }
        Ok(())
    }

    /// Raw (unscaled) ligand-candidate pairs for every compound.
    pub fn pairs(&self) -> Vec<LabeledPair> {
        let pair = |c: &Compound, active| LabeledPair {
            features: pair_features(&self.ligand, &c.descriptor),
            active,
            target_id: self.target_id.clone(),
            compound_id: c.id.clone(),
        };
        self.actives.iter().map(|c| pair(c, true)).chain(self.decoys.iter().map(|c| pair(c, false))).collect()
    }
}

fn describe_all(target: &str, mols: &[Molecule], k: f64, skipped: &mut Vec<String>) -> Vec<Compound> {
    let mut out = Vec::with_capacity(mols.len());
    for m in mols {
        match mpe_vector(m, k) {
            Ok(descriptor) => out.push(Compound { id: m.id.clone(), descriptor }),
            Err(e) => {
                log::warn!("target {target}: skipping {}: {e}", m.id);
                skipped.push(m.id.clone());
            }
        }
    }
    out
}

/// Computes descriptors; compounds that fail are skipped and listed, a
/// failing crystal ligand is an error.
pub fn describe_target(t: &TargetSet, k: f64) -> Result<DescriptorTarget, ScreenError> {
    let ligand = mpe_vector(&t.crystal_ligand, k)?;
    let mut skipped = Vec::new();
    let actives = describe_all(&t.target_id, &t.actives, k, &mut skipped);
    let decoys = describe_all(&t.target_id, &t.decoys, k, &mut skipped);
    let d = DescriptorTarget { target_id: t.target_id.clone(), ligand, actives, decoys, skipped };
    d.validate()?;
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub active_fraction: f64,
    pub decoy_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { active_fraction: 0.5, decoy_fraction: 0.1, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), ScreenError> {
        for (name, value) in [("active_fraction", self.active_fraction), ("decoy_fraction", self.decoy_fraction)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ScreenError::InvalidFraction { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Split {
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
}

/// Sorted indices of `k` out of `n`, drawn without replacement.
fn sample_indices(rng: &mut rand_chacha::ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Per target, a seeded sample of actives and decoys goes to training and
/// everything else to test. Features are raw; see [`prepare`].
pub fn build_split(targets: &[DescriptorTarget], spec: &SplitSpec) -> Result<Split, ScreenError> {
    spec.validate()?;
    if targets.is_empty() {
        return Err(ScreenError::NoTargets);
    }
    let mut split = Split::default();
    for t in targets {
        t.validate()?;
        let mut rng = substream(spec.seed, &format!("split/{}", t.target_id));
        let classes = [("actives", &t.actives, spec.active_fraction, true), ("decoys", &t.decoys, spec.decoy_fraction, false)];
        let mut test_count = 0;
        for (class, compounds, fraction, _) in classes {
            let take = (fraction * compounds.len() as f64).round() as usize;
            if take == 0 {
                return Err(ScreenError::EmptyClass { target: t.target_id.clone(), class });
            }
            test_count += compounds.len() - take.min(compounds.len());
        }
        if test_count == 0 {
            return Err(ScreenError::EmptyTestSet { target: t.target_id.clone() });
        }
        let pairs = t.pairs();
        let (active_pairs, decoy_pairs) = pairs.split_at(t.actives.len());
        for (_, compounds, fraction, active) in classes {
            let group = if active { active_pairs } else { decoy_pairs };
            let take = (fraction * compounds.len() as f64).round() as usize;
            let chosen = sample_indices(&mut rng, compounds.len(), take.min(compounds.len()));
            let mut next = chosen.iter().peekable();
            for (i, p) in group.iter().enumerate() {
                if next.peek() == Some(&&i) {
                    next.next();
                    split.train.push(p.clone());
                } else {
                    split.test.push(p.clone());
                }
            }
        }
    }
    Ok(split)
}

/// A split with a scaler fitted on the training side and applied to both.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scaler: FeatureScaler,
    pub train: Vec<LabeledPair>,
    pub test: Vec<LabeledPair>,
}

pub fn prepare(targets: &[DescriptorTarget], spec: &SplitSpec) -> Result<Prepared, ScreenError> {
    let Split { mut train, mut test } = build_split(targets, spec)?;
    let scaler = FeatureScaler::fit(train.iter().map(|p| &p.features))?;
    for p in train.iter_mut().chain(test.iter_mut()) {
        p.features = scaler.transform(&p.features)?;
    }
    Ok(Prepared { scaler, train, test })
}

/// One target of a manifest. Paths are relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub target_id: String,
    pub crystal_ligand: PathBuf,
    pub actives: PathBuf,
    pub decoys: PathBuf,
}

impl ManifestEntry {
    fn resolve(&self, base: &Path) -> Self {
        let r = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        Self {
            target_id: self.target_id.clone(),
            crystal_ligand: r(&self.crystal_ligand),
            actives: r(&self.actives),
            decoys: r(&self.decoys),
        }
    }

    /// Loads all three files and reduces them to descriptors.
    pub fn load(&self, k: f64) -> Result<DescriptorTarget, ScreenError> {
        let target = self.target_id.clone();
        let ligand = load_compounds(&self.crystal_ligand, k)?;
        let ligand = match ligand.as_slice() {
            [(_, Ok(v)), ..] => *v,
            [(id, Err(e)), ..] => {
                return Err(ScreenError::InvalidTarget { target, reason: format!("crystal ligand {id}: {e}") })
            }
            [] => return Err(ScreenError::InvalidTarget { target, reason: "crystal ligand file is empty".into() }),
        };
        let mut skipped = Vec::new();
        let mut keep = |rows: Vec<(String, Result<MpeVector, MpeError>)>| {
            rows.into_iter()
                .filter_map(|(id, r)| match r {
                    Ok(descriptor) => Some(Compound { id, descriptor }),
                    Err(e) => {
                        log::warn!("target {target}: skipping {id}: {e}");
                        skipped.push(id);
                        None
                    }
                })
                .collect::<Vec<_>>()
        };
        let actives = keep(load_compounds(&self.actives, k)?);
        let decoys = keep(load_compounds(&self.decoys, k)?);
        let d = DescriptorTarget { target_id: self.target_id.clone(), ligand, actives, decoys, skipped };
        d.validate()?;
        Ok(d)
    }
}

/// Reads a manifest: a JSON array of entries, paths resolved against the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ScreenError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| MpeError::Io { path: name.clone(), reason: e.to_string() })?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| ScreenError::Manifest { path: name.clone(), reason: e.to_string() })?;
    if entries.is_empty() {
        return Err(ScreenError::Manifest { path: name, reason: "no targets".into() });
    }
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(entries.iter().map(|e| e.resolve(base)).collect())
}

const CACHE_HEADER: &str = "molecule_id,p1,";

/// Descriptors from a mol2 file, a csv-atoms file or a descriptor cache
/// (recognized by its header). Per-molecule failures are returned in place.
pub fn load_compounds(path: &Path, k: f64) -> Result<Vec<(String, Result<MpeVector, MpeError>)>, MpeError> {
    let name = path.display().to_string();
    let io = |e: std::io::Error| MpeError::Io { path: name.clone(), reason: e.to_string() };
    let format = MoleculeFormat::from_path(path)
        .ok_or_else(|| MpeError::Format { path: name.clone(), reason: "unknown extension (expected .mol2 or .csv)".into() })?;
    if format == MoleculeFormat::CsvAtoms {
        let text = std::fs::read_to_string(path).map_err(io)?;
        if text.starts_with(CACHE_HEADER) {
            let rows = read_descriptor_cache(text.as_bytes()).map_err(|e| match e {
                MpeError::Parse { line, reason, .. } => MpeError::Parse { path: name.clone(), line, reason },
                MpeError::Format { reason, .. } => MpeError::Format { path: name.clone(), reason },
                other => other,
            })?;
            return Ok(rows.into_iter().map(|r| (r.molecule_id, Ok(r.vector))).collect());
        }
    }
    let mols = parse_molecules(path, format)?;
    Ok(mols.iter().map(|m| (m.id.clone(), mpe_vector(m, k))).collect())
}
