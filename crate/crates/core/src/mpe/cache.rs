use std::io::{Read, Write};

use super::{mpe_vector, Molecule, MpeError, MpeVector, DESCRIPTOR_LEN, SLOTS};

/// One cached descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRow {
    pub molecule_id: String,
    pub vector: MpeVector,
}

/// Nine significant digits, shortest form: C's `%.9g`.
pub fn format_g9(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn header() -> Vec<String> {
    let mut h = vec!["molecule_id".to_string()];
    h.extend((1..=SLOTS).map(|i| format!("p{i}")));
    h.extend((1..=SLOTS).map(|i| format!("n{i}")));
    h
}

fn csv_error(e: csv::Error) -> MpeError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    MpeError::Parse { path: "descriptor cache".into(), line, reason: e.to_string() }
}

pub fn write_descriptor_cache<W: Write>(out: W, rows: &[DescriptorRow]) -> Result<(), MpeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header()).map_err(csv_error)?;
    for row in rows {
        let mut rec = vec![row.molecule_id.clone()];
        rec.extend(row.vector.to_array().iter().map(|&v| format_g9(v)));
        w.write_record(rec).map_err(csv_error)?;
    }
    w.flush().map_err(|e| MpeError::Io { path: "descriptor cache".into(), reason: e.to_string() })
}

pub fn read_descriptor_cache<R: Read>(input: R) -> Result<Vec<DescriptorRow>, MpeError> {
    let mut r = csv::Reader::from_reader(input);
    let found: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if found != header() {
        return Err(MpeError::Format { path: "descriptor cache".into(), reason: format!("unexpected header {found:?}") });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |reason: String| MpeError::Parse { path: "descriptor cache".into(), line, reason };
        let mut values = [0.0; DESCRIPTOR_LEN];
        for (slot, field) in values.iter_mut().zip(rec.iter().skip(1)) {
            *slot = field.parse().map_err(|_| bad(format!("{field:?} is not a number")))?;
        }
        let vector = MpeVector::from_array(&values).map_err(|e| bad(e.to_string()))?;
        rows.push(DescriptorRow { molecule_id: rec[0].to_string(), vector });
    }
    Ok(rows)
}

/// CSV of `(id, most_positive, most_negative)` per molecule.
pub fn emit_scatter(molecules: &[Molecule], k: f64) -> Result<String, MpeError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "most_positive", "most_negative"]).map_err(csv_error)?;
    for m in molecules {
        let v = mpe_vector(m, k)?;
        w.write_record([m.id.as_str(), &format_g9(v.most_positive()), &format_g9(v.most_negative())])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| MpeError::Io { path: "scatter".into(), reason: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
