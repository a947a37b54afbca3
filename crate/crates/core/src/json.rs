//! JSON number formatting shared by checkpoints and run configuration files.
//!
//! Reals are written as decimal scientific notation with 17 significant
//! digits, which is enough to reproduce every `f64` bit pattern on load.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// An `f64` that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!(
                "cannot serialize non-finite value {}",
                self.0
            )));
        }
        let raw = RawValue::from_string(format_real(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Real)
    }
}

pub fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

pub fn unwrap_reals(xs: &[Real]) -> Vec<f64> {
    xs.iter().map(|r| r.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_real(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn bit_exact_through_json() {
        let xs = [0.1, 1.0 / 3.0, -7.25e-300, 1.7976931348623157e308, 5e-324];
        let text = serde_json::to_string(&reals(&xs)).unwrap();
        let back: Vec<Real> = serde_json::from_str(&text).unwrap();
        for (a, b) in xs.iter().zip(unwrap_reals(&back)) {
            assert_eq!(a.to_bits(), b.to_bits(), "{text}");
        }
    }

    #[test]
    fn rejects_nan() {
        assert!(serde_json::to_string(&Real(f64::NAN)).is_err());
    }
}
