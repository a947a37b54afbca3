use std::fmt;

use crate::error::{DybmError, Result};

/// Values of all units at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeSlice {
    bits: Vec<bool>,
}

impl TimeSlice {
    pub fn zeros(n_units: usize) -> Self {
        TimeSlice {
            bits: vec![false; n_units],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        TimeSlice { bits }
    }

    /// Builds a slice from integer values, rejecting anything other than 0 or 1.
    pub fn from_values<I>(values: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<i64>,
    {
        let bits = values
            .into_iter()
            .enumerate()
            .map(|(unit, v)| match v.into() {
                0 => Ok(false),
                1 => Ok(true),
                value => Err(DybmError::SliceValue { unit, value }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeSlice { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, unit: usize) -> bool {
        self.bits[unit]
    }

    /// The unit's value as 0.0 or 1.0.
    pub fn value(&self, unit: usize) -> f64 {
        if self.bits[unit] {
            1.0
        } else {
            0.0
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.bits.len() == expected {
            Ok(())
        } else {
            Err(DybmError::SliceLength {
                expected,
                got: self.bits.len(),
            })
        }
    }
}

impl fmt::Display for TimeSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Builds a series from rows of 0/1 integers.
pub fn series_from_rows<R, I>(rows: R) -> Result<Vec<TimeSlice>>
where
    R: IntoIterator<Item = I>,
    I: IntoIterator,
    I::Item: Into<i64>,
{
    rows.into_iter().map(TimeSlice::from_values).collect()
}
