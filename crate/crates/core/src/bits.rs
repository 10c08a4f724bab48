//! Fixed-length bit strings, MSB first.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// A bit string `a_0 a_1 ... a_{l-1}` where `a_0` is the most significant bit.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len > 64 || (len < 64 && value >> len != 0) {
            return Err(Error::InvalidBits(format!("{value} does not fit in {len} bits")));
        }
        Ok(Self {
            bits: (0..len).map(|j| (value >> (len - 1 - j)) & 1 == 1).collect(),
        })
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..len).map(|_| rng.gen()).collect(),
        }
    }

    /// Every bit string of length `len`, in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration width too large");
        (0..1u64 << len).map(move |v| Self::from_u64(v, len).expect("in range"))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit `j`, counting from the most significant position.
    pub fn bit(&self, j: usize) -> bool {
        self.bits[j]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.bits.len() > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Packs the bits MSB first into `ceil(len / 8)` bytes, zero padded.
    pub fn packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (j, &b) in self.bits.iter().enumerate() {
            if b {
                out[j / 8] |= 0x80 >> (j % 8);
            }
        }
        out
    }

    pub fn from_packed(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Decode(format!(
                "{len} bits need {} bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let bits: Vec<bool> = (0..len).map(|j| bytes[j / 8] & (0x80 >> (j % 8)) != 0).collect();
        let out = Self { bits };
        if out.packed() != bytes {
            return Err(Error::Decode("nonzero padding bits".into()));
        }
        Ok(out)
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidBits(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first() {
        let a: BitString = "100".parse().unwrap();
        assert!(a.bit(0));
        assert!(!a.bit(2));
        assert_eq!(a.to_u64(), Some(4));
        assert_eq!(BitString::from_u64(4, 3).unwrap(), a);
        assert!(BitString::from_u64(8, 3).is_err());
        assert!("10x".parse::<BitString>().is_err());
        assert_eq!(BitString::all(2).map(|b| b.to_string()).collect::<Vec<_>>(), ["00", "01", "10", "11"]);
    }

    proptest! {
        #[test]
        fn packing_round_trips(bits in prop::collection::vec(any::<bool>(), 0..40)) {
            let b = BitString::new(bits);
            prop_assert_eq!(BitString::from_packed(&b.packed(), b.len()).unwrap(), b.clone());
            prop_assert_eq!(b.to_string().parse::<BitString>().unwrap(), b);
        }
    }
}
