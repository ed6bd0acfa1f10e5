//! Seeded synthetic screening benchmark in descriptor space.
//!
//! Each pseudo-target draws a crystal-ligand descriptor uniformly from a
//! fixed box. Actives are Gaussian perturbations of that descriptor; decoys
//! are uniform over the whole box. Every vector is re-sorted afterwards so
//! it obeys the descriptor ordering rules.

use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::mpe::{write_descriptor_cache, DescriptorRow, MpeVector, SLOTS};
use crate::rng::substream;
use crate::screening::{Compound, DescriptorTarget, ManifestEntry};

/// Upper bound of positive pair energies in the box.
pub const POSITIVE_MAX: f64 = 120.0;
/// Lower bound of negative pair energies in the box.
pub const NEGATIVE_MIN: f64 = -180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub targets: usize,
    pub actives_per_target: usize,
    pub decoys_per_target: usize,
    /// Standard deviation of active perturbations as a fraction of the box.
    pub spread: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { targets: 10, actives_per_target: 40, decoys_per_target: 400, spread: 0.2, seed: 2024 }
    }
}

fn sorted(mut positives: [f64; SLOTS], mut negatives: [f64; SLOTS]) -> MpeVector {
    positives.sort_by(|a, b| b.total_cmp(a));
    negatives.sort_by(f64::total_cmp);
    MpeVector { positives, negatives }
}

fn uniform(rng: &mut ChaCha8Rng) -> MpeVector {
    sorted(
        std::array::from_fn(|_| rng.random_range(0.0..POSITIVE_MAX)),
        std::array::from_fn(|_| rng.random_range(NEGATIVE_MIN..0.0)),
    )
}

fn perturbed(rng: &mut ChaCha8Rng, center: &MpeVector, spread: f64) -> MpeVector {
    let pos = Normal::new(0.0, spread * POSITIVE_MAX).expect("finite spread");
    let neg = Normal::new(0.0, spread * -NEGATIVE_MIN).expect("finite spread");
    sorted(
        center.positives.map(|v| (v + pos.sample(rng)).clamp(0.0, POSITIVE_MAX)),
        center.negatives.map(|v| (v + neg.sample(rng)).clamp(NEGATIVE_MIN, 0.0)),
    )
}

pub fn generate(cfg: &SynthConfig) -> Vec<DescriptorTarget> {
    (0..cfg.targets)
        .map(|t| {
            let target_id = format!("synth{t:02}");
            let mut rng = substream(cfg.seed, &format!("synth/{target_id}"));
            let ligand = uniform(&mut rng);
            let actives = (0..cfg.actives_per_target)
                .map(|i| Compound { id: format!("{target_id}_a{i:04}"), descriptor: perturbed(&mut rng, &ligand, cfg.spread) })
                .collect();
            let decoys = (0..cfg.decoys_per_target)
                .map(|i| Compound { id: format!("{target_id}_d{i:05}"), descriptor: uniform(&mut rng) })
                .collect();
            DescriptorTarget { target_id, ligand, actives, decoys, skipped: Vec::new() }
        })
        .collect()
}

fn write_cache(path: &Path, rows: &[DescriptorRow]) -> io::Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_descriptor_cache(file, rows).map_err(|e| io::Error::other(e.to_string()))
}

/// Writes descriptor caches for every target plus `manifest.json` into
/// `dir`; returns the manifest path.
pub fn write_benchmark(cfg: &SynthConfig, dir: &Path) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for t in generate(cfg) {
        let rows = |cs: &[Compound]| cs.iter().map(|c| DescriptorRow { molecule_id: c.id.clone(), vector: c.descriptor }).collect::<Vec<_>>();
        let names = ["ligand", "actives", "decoys"].map(|k| PathBuf::from(format!("{}_{k}.csv", t.target_id)));
        write_cache(&dir.join(&names[0]), &[DescriptorRow { molecule_id: format!("{}_ligand", t.target_id), vector: t.ligand }])?;
        write_cache(&dir.join(&names[1]), &rows(&t.actives))?;
        write_cache(&dir.join(&names[2]), &rows(&t.decoys))?;
        let [crystal_ligand, actives, decoys] = names;
        manifest.push(ManifestEntry { target_id: t.target_id.clone(), crystal_ligand, actives, decoys });
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(path)
}
