use scvs_core::mpe::MpeError;
use scvs_core::nn::NnError;
use scvs_core::sc::ScError;
use scvs_core::screening::ScreenError;

pub const OK: u8 = 0;
pub const VALIDATION: u8 = 1;
pub const IO: u8 = 2;
pub const NUMERIC: u8 = 3;

/// A configuration or argument problem raised by the CLI itself.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

/// A numeric failure raised by the CLI itself.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Numeric(pub String);

fn mpe_code(e: &MpeError) -> u8 {
    match e {
        MpeError::Io { .. } => IO,
        MpeError::ZeroDistance | MpeError::CoincidentAtoms { .. } | MpeError::NonFinite { .. } => NUMERIC,
        _ => VALIDATION,
    }
}

fn nn_code(e: &NnError) -> u8 {
    match e {
        NnError::NonFinite { .. } | NnError::NanLoss { .. } => NUMERIC,
        _ => VALIDATION,
    }
}

fn sc_code(e: &ScError) -> u8 {
    match e {
        ScError::CorrelationUndefined { .. } => NUMERIC,
        _ => VALIDATION,
    }
}

/// Process exit code for an error: the first cause in the chain that has a
/// known class decides.
pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<std::io::Error>() {
            return IO;
        }
        if cause.is::<Numeric>() {
            return NUMERIC;
        }
        if cause.is::<Invalid>() {
            return VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<MpeError>() {
            return mpe_code(e);
        }
        if let Some(e) = cause.downcast_ref::<NnError>() {
            return nn_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ScError>() {
            return sc_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ScreenError>() {
            return match e {
                ScreenError::Mpe(e) => mpe_code(e),
                ScreenError::Nn(e) => nn_code(e),
                ScreenError::Sc(e) => sc_code(e),
                _ => VALIDATION,
            };
        }
    }
    VALIDATION
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn classes() {
        let io: anyhow::Error = std::io::Error::new(std::io::ErrorKind::NotFound, "x").into();
        assert_eq!(code(&io.context("reading")), IO);
        let nested = ScreenError::Mpe(MpeError::Io { path: "p".into(), reason: "r".into() });
        assert_eq!(code(&anyhow::Error::from(nested)), IO);
        let nan: anyhow::Error = NnError::NanLoss { epoch: 0, batch: 0 }.into();
        assert_eq!(code(&nan), NUMERIC);
        let r: anyhow::Result<()> = Err(Invalid("bad".into())).context("outer");
        assert_eq!(code(&r.unwrap_err()), VALIDATION);
        assert_eq!(code(&anyhow::anyhow!("plain")), VALIDATION);
    }
}
