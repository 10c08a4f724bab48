//! Finite abelian groups used as the secret space of the CDS scheme.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::sampling::{bytes_below, uniform_below};

/// An element, stored as its index in `[0, |G|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub u64);

/// `{0,1}^m` under XOR, or `Z_q` under addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AbelianGroup {
    Xor { bits: u32 },
    Zq { modulus: u64 },
}

impl AbelianGroup {
    pub fn xor(bits: u32) -> Result<Self> {
        if !(1..=63).contains(&bits) {
            return Err(Error::InvalidGroup(format!("xor width {bits} outside 1..=63")));
        }
        Ok(Self::Xor { bits })
    }

    pub fn zq(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidGroup(format!("modulus {modulus} below 2")));
        }
        Ok(Self::Zq { modulus })
    }

    pub fn order(&self) -> u64 {
        match *self {
            Self::Xor { bits } => 1 << bits,
            Self::Zq { modulus } => modulus,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(0)
    }

    pub fn contains(&self, x: GroupElement) -> bool {
        x.0 < self.order()
    }

    pub fn element(&self, value: u64) -> Result<GroupElement> {
        let x = GroupElement(value);
        if !self.contains(x) {
            return Err(Error::InvalidGroup(format!("{value} is not an element of {self}")));
        }
        Ok(x)
    }

    pub fn op(&self, a: GroupElement, b: GroupElement) -> GroupElement {
        match *self {
            Self::Xor { .. } => GroupElement(a.0 ^ b.0),
            Self::Zq { modulus } => GroupElement(((a.0 as u128 + b.0 as u128) % modulus as u128) as u64),
        }
    }

    pub fn inv(&self, a: GroupElement) -> GroupElement {
        match *self {
            Self::Xor { .. } => a,
            Self::Zq { modulus } => GroupElement((modulus - a.0) % modulus),
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> GroupElement {
        GroupElement(uniform_below(rng, self.order()))
    }

    /// Uniform on `G \ excluded`, by rejection.
    pub fn sample_excluding<R: RngCore + ?Sized>(
        &self,
        excluded: &[GroupElement],
        rng: &mut R,
    ) -> Result<GroupElement> {
        let mut distinct: Vec<_> = excluded.iter().filter(|x| self.contains(**x)).collect();
        distinct.sort();
        distinct.dedup();
        if distinct.len() as u64 >= self.order() {
            return Err(Error::GroupTooSmall(self.order()));
        }
        loop {
            let x = self.sample(rng);
            if !excluded.contains(&x) {
                return Ok(x);
            }
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> {
        (0..self.order()).map(GroupElement)
    }

    pub fn byte_len(&self) -> usize {
        bytes_below(self.order())
    }

    pub fn encode_into(&self, x: GroupElement, out: &mut Vec<u8>) {
        let w = self.byte_len();
        out.extend_from_slice(&x.0.to_be_bytes()[8 - w..]);
    }

    pub fn encode(&self, x: GroupElement) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        self.encode_into(x, &mut out);
        out
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<GroupElement> {
        let w = self.byte_len();
        if bytes.len() != w {
            return Err(Error::Decode(format!("group element needs {w} bytes, got {}", bytes.len())));
        }
        let mut buf = [0u8; 8];
        buf[8 - w..].copy_from_slice(bytes);
        self.element(u64::from_be_bytes(buf))
            .map_err(|e| Error::Decode(e.to_string()))
    }

    /// Kind byte followed by the width or modulus as little-endian `u64`.
    pub fn descriptor_bytes(&self) -> Vec<u8> {
        let (kind, param) = match *self {
            Self::Xor { bits } => (0u8, bits as u64),
            Self::Zq { modulus } => (1u8, modulus),
        };
        let mut out = vec![kind];
        out.extend_from_slice(&param.to_le_bytes());
        out
    }

    pub fn from_descriptor_bytes(kind: u8, param: u64) -> Result<Self> {
        match kind {
            0 => Self::xor(u32::try_from(param).map_err(|_| Error::InvalidGroup("xor width".into()))?),
            1 => Self::zq(param),
            k => Err(Error::Decode(format!("unknown group kind {k}"))),
        }
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Xor { bits } => write!(f, "xor:{bits}"),
            Self::Zq { modulus } => write!(f, "zq:{modulus}"),
        }
    }
}

/// Parses `xor:<bits>` or `zq:<modulus>`.
impl FromStr for AbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidGroup(format!("expected kind:param, got {s:?}")))?;
        let param: u64 = param
            .parse()
            .map_err(|_| Error::InvalidGroup(format!("bad group parameter in {s:?}")))?;
        match kind {
            "xor" => Self::xor(u32::try_from(param).map_err(|_| Error::InvalidGroup(s.into()))?),
            "zq" => Self::zq(param),
            _ => Err(Error::InvalidGroup(format!("unknown group kind {kind:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn group_laws_exhaustive() {
        for g in [
            AbelianGroup::xor(1).unwrap(),
            AbelianGroup::xor(3).unwrap(),
            AbelianGroup::zq(2).unwrap(),
            AbelianGroup::zq(6).unwrap(),
            AbelianGroup::zq(11).unwrap(),
        ] {
            let els: Vec<_> = g.elements().collect();
            for &a in &els {
                assert_eq!(g.op(a, g.inv(a)), g.identity());
                assert_eq!(g.op(a, g.identity()), a);
                for &b in &els {
                    assert_eq!(g.op(a, b), g.op(b, a));
                    for &c in &els {
                        assert_eq!(g.op(g.op(a, b), c), g.op(a, g.op(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_law_on_256_elements() {
        for g in [AbelianGroup::xor(8).unwrap(), AbelianGroup::zq(256).unwrap()] {
            for a in g.elements() {
                assert_eq!(g.op(a, g.inv(a)), g.identity());
                assert_eq!(g.decode(&g.encode(a)).unwrap(), a);
            }
        }
    }

    #[test]
    fn descriptors() {
        let g: AbelianGroup = "xor:8".parse().unwrap();
        assert_eq!(g, AbelianGroup::Xor { bits: 8 });
        assert_eq!(g.to_string(), "xor:8");
        assert_eq!("zq:11".parse::<AbelianGroup>().unwrap().order(), 11);
        assert!("xor:0".parse::<AbelianGroup>().is_err());
        assert!("zq:1".parse::<AbelianGroup>().is_err());
        assert!("ring:5".parse::<AbelianGroup>().is_err());
    }

    #[test]
    fn excluding_sampler() {
        let g = AbelianGroup::zq(3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = g.sample_excluding(&[GroupElement(0), GroupElement(2)], &mut rng).unwrap();
            assert_eq!(x, GroupElement(1));
        }
        let all: Vec<_> = g.elements().collect();
        assert_eq!(g.sample_excluding(&all, &mut rng), Err(Error::GroupTooSmall(3)));
    }
}
