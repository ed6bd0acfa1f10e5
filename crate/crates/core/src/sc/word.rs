use std::fmt;

use super::ScError;

/// Default word width of the hardware model.
pub const DEFAULT_WIDTH: u32 = 12;
pub const MIN_WIDTH: u32 = 2;
pub const MAX_WIDTH: u32 = 24;

pub(crate) fn check_width(width: u32) -> Result<(), ScError> {
    if (MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(ScError::InvalidWidth(width))
    }
}

/// A `width`-bit two's-complement word read as the bipolar fraction
/// `value / 2^(width-1)`, i.e. one sign bit and `width-1` fraction bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FixedWord {
    value: i32,
    width: u32,
}

impl FixedWord {
    pub fn new(value: i32, width: u32) -> Result<Self, ScError> {
        check_width(width)?;
        let half = 1i64 << (width - 1);
        if i64::from(value) < -half || i64::from(value) >= half {
            return Err(ScError::WordOutOfRange { value: value.into(), width });
        }
        Ok(Self { value, width })
    }

    pub fn min(width: u32) -> Result<Self, ScError> {
        check_width(width)?;
        Ok(Self { value: -(1 << (width - 1)), width })
    }

    pub fn max(width: u32) -> Result<Self, ScError> {
        check_width(width)?;
        Ok(Self { value: (1 << (width - 1)) - 1, width })
    }

    /// Nearest word to `v`, saturating at the ends of the range.
    pub fn encode(v: f64, width: u32) -> Result<Self, ScError> {
        check_width(width)?;
        if !v.is_finite() {
            return Err(ScError::OutOfRange { name: "value", value: v });
        }
        let half = f64::from(1u32 << (width - 1));
        let raw = (v * half).round().clamp(-half, half - 1.0);
        Ok(Self { value: raw as i32, width })
    }

    /// Clamp an integer into the word range. Returns the word and whether
    /// saturation happened.
    pub fn saturating(value: i64, width: u32) -> Result<(Self, bool), ScError> {
        check_width(width)?;
        let half = 1i64 << (width - 1);
        let clamped = value.clamp(-half, half - 1);
        Ok((Self { value: clamped as i32, width }, clamped != value))
    }

    /// Reinterpret the low `width` bits of `bits` as two's complement.
    pub fn from_raw_bits(bits: u32, width: u32) -> Result<Self, ScError> {
        check_width(width)?;
        let mask = (1u32 << width) - 1;
        let bits = bits & mask;
        let value = if bits >> (width - 1) == 1 {
            bits as i32 - (1i32 << width)
        } else {
            bits as i32
        };
        Ok(Self { value, width })
    }

    /// Parse the `s.fff` notation used in timing diagrams, e.g. `1.110`.
    pub fn parse_binary(text: &str) -> Result<Self, ScError> {
        let digits: String = text.chars().filter(|c| *c != '.').collect();
        let width = digits.len() as u32;
        check_width(width)?;
        let mut bits = 0u32;
        for c in digits.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(ScError::BadStreamChar(other)),
                };
        }
        Self::from_raw_bits(bits, width)
    }

    pub fn value(self) -> i32 {
        self.value
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn decode(self) -> f64 {
        f64::from(self.value) / f64::from(1u32 << (self.width - 1))
    }

    pub fn raw_bits(self) -> u32 {
        (self.value as u32) & ((1u32 << self.width) - 1)
    }
}

/// Renders as `s.fff`, the sign bit followed by the fraction bits.
impl fmt::Display for FixedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = self.raw_bits();
        write!(f, "{}.", bits >> (self.width - 1))?;
        for i in (0..self.width - 1).rev() {
            write!(f, "{}", (bits >> i) & 1)?;
        }
        Ok(())
    }
}
