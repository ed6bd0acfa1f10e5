//! Molecular pairing-energy descriptors.
//!
//! Every atom pair of a molecule gets a Coulomb-like energy
//! `K * q_i * q_j / r_ij`; a molecule is summarized by its six most positive
//! and six most negative pair energies.

mod cache;
mod parse;
mod scaler;

pub use cache::{format_g9, read_descriptor_cache, write_descriptor_cache, emit_scatter, DescriptorRow};
pub use parse::{parse_molecules, parse_molecules_str, MoleculeFormat};
pub use scaler::{pair_features, scale_features, FeatureScaler};

use thiserror::Error;

/// Coulomb constant in kcal·Å/(mol·e²).
pub const DEFAULT_K: f64 = 332.0637;
/// Values kept per sign class.
pub const SLOTS: usize = 6;
/// Length of one molecule's descriptor.
pub const DESCRIPTOR_LEN: usize = 2 * SLOTS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpeError {
    #[error("atoms share a position; pairing energy is undefined")]
    ZeroDistance,
    #[error("molecule {molecule:?}: atoms {i} and {j} share a position")]
    CoincidentAtoms { molecule: String, i: usize, j: usize },
    #[error("molecule {0:?} has no atoms")]
    EmptyMolecule(String),
    #[error("non-finite {field} in molecule {molecule:?}")]
    NonFinite { molecule: String, field: &'static str },
    #[error("{path}: line {line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("feature scaler has not been fitted")]
    UnfittedScaler,
    #[error("feature scaler: {0}")]
    Scaler(String),
    #[error("descriptor vector violates ordering: {0}")]
    InvalidVector(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    /// Partial charge in elementary charges.
    pub partial_charge: f64,
    /// Cartesian position in Å.
    pub position: [f64; 3],
    pub element: String,
}

impl Atom {
    pub fn new(element: &str, position: [f64; 3], partial_charge: f64) -> Self {
        Self { partial_charge, position, element: element.to_string() }
    }

    pub fn distance(&self, other: &Atom) -> f64 {
        let d: f64 = self.position.iter().zip(&other.position).map(|(a, b)| (a - b) * (a - b)).sum();
        d.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub id: String,
    pub atoms: Vec<Atom>,
}

impl Molecule {
    pub fn new(id: &str, atoms: Vec<Atom>) -> Self {
        Self { id: id.to_string(), atoms }
    }

    /// Checks finiteness and that no two atoms coincide.
    pub fn validate(&self) -> Result<(), MpeError> {
        if self.atoms.is_empty() {
            return Err(MpeError::EmptyMolecule(self.id.clone()));
        }
        for a in &self.atoms {
            if !a.partial_charge.is_finite() {
                return Err(MpeError::NonFinite { molecule: self.id.clone(), field: "charge" });
            }
            if a.position.iter().any(|c| !c.is_finite()) {
                return Err(MpeError::NonFinite { molecule: self.id.clone(), field: "coordinate" });
            }
        }
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                if self.atoms[i].position == self.atoms[j].position {
                    return Err(MpeError::CoincidentAtoms { molecule: self.id.clone(), i, j });
                }
            }
        }
        Ok(())
    }
}

/// `K * q_a * q_b / |r_a - r_b|`.
pub fn pairing_energy(a: &Atom, b: &Atom, k: f64) -> Result<f64, MpeError> {
    let r = a.distance(b);
    if r == 0.0 {
        return Err(MpeError::ZeroDistance);
    }
    Ok(k * a.partial_charge * b.partial_charge / r)
}

/// Six highest positive energies (descending) and six lowest negative ones
/// (ascending). Unused slots are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MpeVector {
    pub positives: [f64; SLOTS],
    pub negatives: [f64; SLOTS],
}

impl MpeVector {
    /// Positives then negatives; the network input order.
    pub fn to_array(&self) -> [f64; DESCRIPTOR_LEN] {
        let mut out = [0.0; DESCRIPTOR_LEN];
        out[..SLOTS].copy_from_slice(&self.positives);
        out[SLOTS..].copy_from_slice(&self.negatives);
        out
    }

    pub fn from_array(values: &[f64]) -> Result<Self, MpeError> {
        if values.len() != DESCRIPTOR_LEN {
            return Err(MpeError::InvalidVector(format!("expected {DESCRIPTOR_LEN} values, got {}", values.len())));
        }
        let mut v = Self::default();
        v.positives.copy_from_slice(&values[..SLOTS]);
        v.negatives.copy_from_slice(&values[SLOTS..]);
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<(), MpeError> {
        let p = &self.positives;
        let n = &self.negatives;
        if p.iter().chain(n).any(|v| !v.is_finite()) {
            return Err(MpeError::InvalidVector("non-finite entry".into()));
        }
        if p[SLOTS - 1] < 0.0 || p.windows(2).any(|w| w[0] < w[1]) {
            return Err(MpeError::InvalidVector(format!("positives {p:?} not descending and non-negative")));
        }
        if n[SLOTS - 1] > 0.0 || n.windows(2).any(|w| w[0] > w[1]) {
            return Err(MpeError::InvalidVector(format!("negatives {n:?} not ascending and non-positive")));
        }
        Ok(())
    }

    pub fn most_positive(&self) -> f64 {
        self.positives[0]
    }

    pub fn most_negative(&self) -> f64 {
        self.negatives[0]
    }
}

/// All pair energies as `(energy, i, j)` with `i < j`.
pub fn pair_energies(m: &Molecule, k: f64) -> Result<Vec<(f64, usize, usize)>, MpeError> {
    let n = m.atoms.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let e = pairing_energy(&m.atoms[i], &m.atoms[j], k)
                .map_err(|_| MpeError::CoincidentAtoms { molecule: m.id.clone(), i, j })?;
            out.push((e, i, j));
        }
    }
    Ok(out)
}

pub fn mpe_vector(m: &Molecule, k: f64) -> Result<MpeVector, MpeError> {
    m.validate()?;
    let energies = pair_energies(m, k)?;
    let mut pos: Vec<_> = energies.iter().filter(|e| e.0 > 0.0).copied().collect();
    let mut neg: Vec<_> = energies.iter().filter(|e| e.0 < 0.0).copied().collect();
    pos.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    neg.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut v = MpeVector::default();
    for (slot, e) in v.positives.iter_mut().zip(&pos) {
        *slot = e.0;
    }
    for (slot, e) in v.negatives.iter_mut().zip(&neg) {
        *slot = e.0;
    }
    Ok(v)
}
