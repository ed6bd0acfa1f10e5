use std::path::Path;

use super::{Atom, Molecule, MpeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoleculeFormat {
    /// Tripos mol2 restricted to MOLECULE and ATOM blocks.
    Mol2Subset,
    /// `molecule_id,element,x,y,z,charge` rows with a header.
    CsvAtoms,
}

impl MoleculeFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mol2" => Some(Self::Mol2Subset),
            "csv" => Some(Self::CsvAtoms),
            _ => None,
        }
    }
}

impl std::str::FromStr for MoleculeFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mol2-subset" | "mol2" => Ok(Self::Mol2Subset),
            "csv-atoms" | "csv" => Ok(Self::CsvAtoms),
            other => Err(format!("unknown molecule format {other:?} (expected mol2-subset or csv-atoms)")),
        }
    }
}

impl std::fmt::Display for MoleculeFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mol2Subset => "mol2-subset",
            Self::CsvAtoms => "csv-atoms",
        })
    }
}

pub fn parse_molecules(path: &Path, format: MoleculeFormat) -> Result<Vec<Molecule>, MpeError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| MpeError::Io { path: name.clone(), reason: e.to_string() })?;
    parse_molecules_str(&text, format, &name)
}

/// Parses `text`; `origin` names the source in error messages.
pub fn parse_molecules_str(text: &str, format: MoleculeFormat, origin: &str) -> Result<Vec<Molecule>, MpeError> {
    match format {
        MoleculeFormat::Mol2Subset => parse_mol2(text, origin),
        MoleculeFormat::CsvAtoms => parse_csv(text, origin),
    }
}

fn number(field: &str, what: &str, origin: &str, line: usize) -> Result<f64, MpeError> {
    let v: f64 = field.parse().map_err(|_| MpeError::Parse {
        path: origin.to_string(),
        line,
        reason: format!("{what} {field:?} is not a number"),
    })?;
    if !v.is_finite() {
        return Err(MpeError::Parse { path: origin.to_string(), line, reason: format!("{what} {field:?} is not finite") });
    }
    Ok(v)
}

#[derive(PartialEq)]
enum Section {
    None,
    Header,
    Atoms,
    Other,
}

fn parse_mol2(text: &str, origin: &str) -> Result<Vec<Molecule>, MpeError> {
    let mut out: Vec<Molecule> = Vec::new();
    let mut started_at = Vec::new();
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(tag) = line.strip_prefix("@<TRIPOS>") {
            section = match tag.trim() {
                "MOLECULE" => {
                    out.push(Molecule::new("", Vec::new()));
                    started_at.push(line_no);
                    Section::Header
                }
                "ATOM" if out.is_empty() => {
                    return Err(MpeError::Parse {
                        path: origin.to_string(),
                        line: line_no,
                        reason: "ATOM block before any MOLECULE block".into(),
                    })
                }
                "ATOM" => Section::Atoms,
                _ => Section::Other,
            };
            continue;
        }
        match section {
            Section::Header => {
                out.last_mut().unwrap().id = line.to_string();
                section = Section::Other;
            }
            Section::Atoms => {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 9 {
                    return Err(MpeError::Parse {
                        path: origin.to_string(),
                        line: line_no,
                        reason: format!("ATOM record has {} fields; the charge is the 9th", f.len()),
                    });
                }
                let x = number(f[2], "x", origin, line_no)?;
                let y = number(f[3], "y", origin, line_no)?;
                let z = number(f[4], "z", origin, line_no)?;
                let q = number(f[8], "charge", origin, line_no)?;
                let element = f[5].split('.').next().unwrap_or(f[5]);
                out.last_mut().unwrap().atoms.push(Atom::new(element, [x, y, z], q));
            }
            Section::None => {
                return Err(MpeError::Parse {
                    path: origin.to_string(),
                    line: line_no,
                    reason: "content before the first @<TRIPOS>MOLECULE".into(),
                })
            }
            Section::Other => {}
        }
    }
    for (m, line) in out.iter().zip(started_at) {
        if m.id.is_empty() {
            return Err(MpeError::Parse { path: origin.to_string(), line, reason: "molecule has no name line".into() });
        }
        if m.atoms.is_empty() {
            return Err(MpeError::Parse { path: origin.to_string(), line, reason: format!("molecule {:?} has no atoms", m.id) });
        }
    }
    Ok(out)
}

const CSV_COLUMNS: [&str; 6] = ["molecule_id", "element", "x", "y", "z", "charge"];

fn parse_csv(text: &str, origin: &str) -> Result<Vec<Molecule>, MpeError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| MpeError::Format { path: origin.to_string(), reason: e.to_string() })?
        .clone();
    let mut cols = [0usize; 6];
    for (slot, name) in cols.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| MpeError::Format {
            path: origin.to_string(),
            reason: format!("missing column {name:?} (expected {})", CSV_COLUMNS.join(",")),
        })?;
    }
    let mut out: Vec<Molecule> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            MpeError::Parse { path: origin.to_string(), line, reason: e.to_string() }
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(cols[i]).unwrap_or("");
        let id = field(0);
        if id.is_empty() {
            return Err(MpeError::Parse { path: origin.to_string(), line, reason: "empty molecule_id".into() });
        }
        let atom = Atom::new(
            field(1),
            [number(field(2), "x", origin, line)?, number(field(3), "y", origin, line)?, number(field(4), "z", origin, line)?],
            number(field(5), "charge", origin, line)?,
        );
        let slot = *index.entry(id.to_string()).or_insert_with(|| {
            out.push(Molecule::new(id, Vec::new()));
            out.len() - 1
        });
        out[slot].atoms.push(atom);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MOL2: &str = "\
@<TRIPOS>MOLECULE
lig1
 3 2 0 0 0
SMALL
MMFF94_CHARGES

@<TRIPOS>ATOM
      1 C1          0.0000    0.0000    0.0000 C.3     1  LIG1       -0.1200
      2 O1          1.4000    0.0000    0.0000 O.3     1  LIG1       -0.6800
      3 H1         -0.5000    0.9000    0.0000 H       1  LIG1        0.4000
@<TRIPOS>BOND
     1     1     2    1
@<TRIPOS>MOLECULE
lig2
 1 0 0 0 0
@<TRIPOS>ATOM
      1 N1          2.0000    1.0000   -1.0000 N.am    1  LIG2        0.3000
";

    #[test]
    fn two_block_mol2() {
        let mols = parse_molecules_str(MOL2, MoleculeFormat::Mol2Subset, "t.mol2").unwrap();
        assert_eq!(mols.len(), 2);
        assert_eq!(mols[0].id, "lig1");
        assert_eq!(mols[0].atoms.len(), 3);
        assert_eq!(mols[0].atoms[1].element, "O");
        assert_eq!(mols[0].atoms[1].partial_charge, -0.68);
        assert_eq!(mols[1].atoms[0].position, [2.0, 1.0, -1.0]);
    }

    #[test]
    fn empty_inputs_give_empty_lists() {
        assert!(parse_molecules_str("", MoleculeFormat::Mol2Subset, "e").unwrap().is_empty());
        assert!(parse_molecules_str("", MoleculeFormat::CsvAtoms, "e").unwrap().is_empty());
    }

    #[test]
    fn mol2_missing_charge_names_line() {
        let text = MOL2.replace("H       1  LIG1        0.4000", "H");
        let err = parse_molecules_str(&text, MoleculeFormat::Mol2Subset, "t.mol2").unwrap_err();
        assert!(matches!(err, MpeError::Parse { line: 10, .. }), "{err}");
    }

    #[test]
    fn csv_atoms_group_by_id() {
        let text = "molecule_id,element,x,y,z,charge\na,C,0,0,0,0.1\nb,N,1,0,0,-0.2\na,O,1,1,1,-0.1\n";
        let mols = parse_molecules_str(text, MoleculeFormat::CsvAtoms, "t.csv").unwrap();
        assert_eq!(mols.len(), 2);
        assert_eq!(mols[0].atoms.len(), 2);
        assert_eq!(mols[1].id, "b");
    }

    #[test]
    fn csv_rejects_nan_and_missing_column() {
        let text = "molecule_id,element,x,y,z,charge\na,C,0,0,0,0.1\na,C,1,0,0,NaN\n";
        let err = parse_molecules_str(text, MoleculeFormat::CsvAtoms, "t.csv").unwrap_err();
        assert!(matches!(err, MpeError::Parse { line: 3, .. }), "{err}");
        let err = parse_molecules_str("molecule_id,element,x,y,z\na,C,0,0,0\n", MoleculeFormat::CsvAtoms, "t.csv").unwrap_err();
        assert!(matches!(err, MpeError::Format { .. }));
        assert!(err.to_string().contains("charge"));
    }

    #[test]
    fn format_names() {
        assert_eq!("mol2-subset".parse::<MoleculeFormat>().unwrap(), MoleculeFormat::Mol2Subset);
        assert_eq!("csv-atoms".parse::<MoleculeFormat>().unwrap().to_string(), "csv-atoms");
        assert!("sdf".parse::<MoleculeFormat>().is_err());
        assert_eq!(MoleculeFormat::from_path(Path::new("a/b.MOL2")), Some(MoleculeFormat::Mol2Subset));
    }
}
