use super::stream::{BitStream, GateKind};
use super::ScError;

/// Below this denominator magnitude the correlation metric is reported as
/// undefined.
pub const UNDEFINED_EPS: f64 = 1e-9;

/// Stochastic-computing correlation
/// `C = Cov(a(t), b(t)) / (1 - |x - y| - x*y)` with `x`, `y` the bipolar
/// means, clamped to `[-1, 1]`.
///
/// The denominator is the covariance the pair would have if both streams
/// came from one shared random sequence, so `C = 1` means maximal
/// correlation and `C = 0` independence. It vanishes when either stream is
/// constant at an extreme, which is reported as
/// [`ScError::CorrelationUndefined`].
pub fn sc_correlation(a: &BitStream, b: &BitStream) -> Result<f64, ScError> {
    if a.len() != b.len() {
        return Err(ScError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let n = a.len() as f64;
    let x = a.decode();
    let y = b.decode();
    // mean of a(t)*b(t) in bipolar coding: agreements minus disagreements.
    let disagreements = a.len() - super::stream::xnor_ones(a, b);
    let mean_ab = (n - 2.0 * disagreements as f64) / n;
    let cov = mean_ab - x * y;
    let denom = 1.0 - (x - y).abs() - x * y;
    if denom.abs() < UNDEFINED_EPS {
        return Err(ScError::CorrelationUndefined { x, y });
    }
    Ok((cov / denom).clamp(-1.0, 1.0))
}

/// Closed-form bipolar gate output for inputs `x`, `y` at correlation `c`.
pub fn expected_gate_output(kind: GateKind, x: f64, y: f64, c: f64) -> Result<f64, ScError> {
    for (name, v) in [("x", x), ("y", y), ("c", c)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(ScError::OutOfRange { name, value: v });
        }
    }
    Ok(match kind {
        GateKind::And => (x * y + x + y - 1.0) * (1.0 - c) * 0.5 + c * x.min(y),
        GateKind::Or => (x + y + 1.0 - x * y) * (1.0 - c) * 0.5 + c * x.max(y),
        GateKind::Xnor => x * y * (1.0 - c) + c * (1.0 - (x - y).abs()),
    })
}
