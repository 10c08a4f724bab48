//! Multi-evaluation distributed point functions for `P({0,1}^l, F_q)`.
//!
//! Both schemes use `2l` slots: slot `2j + b` belongs to bit value `b` at
//! position `j`, with bit `0` the most significant. A party's evaluation at
//! `x` sums the slots `2j + x_j`.
//!
//! Gen is split into coin sampling and a deterministic `gen_with_coins`, so
//! exhaustive tests can enumerate the randomness directly.

pub mod nn;
pub mod tn;

pub use nn::{DpfNnCoins, DpfNnKey, DpfNnParams};
pub use tn::{DpfTnCoins, DpfTnKey, DpfTnParams};

use crate::bits::BitString;
use crate::encoding::{Decoder, Encoded, Encoder};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, PrimeField};
use crate::khprf::{KeyHomomorphicPrf, KhKey, KhOutput, KhPrfParams};
use crate::sampling::bytes_below;

/// Slot index `2j + x_j` for every bit position.
pub(crate) fn selected_slots(x: &BitString) -> impl Iterator<Item = usize> + '_ {
    (0..x.len()).map(|j| 2 * j + x.bit(j) as usize)
}

/// Dimension of the vectors `v_j` and `theta`: `2l + lambda`.
pub fn vector_dim(ell: usize, lambda: usize) -> usize {
    2 * ell + lambda
}

pub(crate) fn check_shape(ell: usize, lambda: usize, n: usize, prf: &KhPrfParams) -> Result<()> {
    if ell == 0 || lambda == 0 || n < 2 {
        return Err(Error::ParamViolation(format!(
            "need l >= 1, lambda >= 1, n >= 2 (got l = {ell}, lambda = {lambda}, n = {n})"
        )));
    }
    if ell > u16::MAX as usize || lambda > u16::MAX as usize || n > u16::MAX as usize {
        return Err(Error::ParamViolation("parameters must fit in 16 bits".into()));
    }
    if prf.out_dim != vector_dim(ell, lambda) + 1 {
        return Err(Error::ParamViolation(format!(
            "PRF output dimension {} must equal 2l + lambda + 1 = {}",
            prf.out_dim,
            vector_dim(ell, lambda) + 1
        )));
    }
    if prf.key_dim < 2 * ell * n + 1 {
        return Err(Error::ParamViolation(format!(
            "PRF key dimension {} below 2ln + 1 = {}",
            prf.key_dim,
            2 * ell * n + 1
        )));
    }
    Ok(())
}

/// Fills the `alpha_j` slots: free values everywhere except slot
/// `2(l-1) + a_{l-1}`, which is forced so the slots selected by `a` sum to `alpha`.
pub(crate) fn place_alphas(
    a: &BitString,
    alpha: FieldElement,
    free: &[FieldElement],
) -> Result<Vec<FieldElement>> {
    let ell = a.len();
    if free.len() != 2 * ell - 1 {
        return Err(Error::LengthMismatch {
            expected: 2 * ell - 1,
            got: free.len(),
        });
    }
    let forced = 2 * (ell - 1) + a.bit(ell - 1) as usize;
    let mut free = free.iter();
    let mut slots: Vec<FieldElement> = (0..2 * ell)
        .map(|s| if s == forced { alpha.field().zero() } else { *free.next().expect("counted") })
        .collect();
    let others = selected_slots(a)
        .filter(|&s| s != forced)
        .fold(alpha.field().zero(), |acc, s| acc + slots[s]);
    slots[forced] = alpha - others;
    Ok(slots)
}

/// An evaluation share `(i, s_{i,0}, s_{i,1}, r, theta, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfEvalShare {
    pub index: u16,
    pub s0: FieldVector,
    pub s1: FieldElement,
    pub r: Vec<u8>,
    pub theta: FieldVector,
    pub k_sum: KhKey,
}

/// Which scheme produced an evaluation share; fixes its file magic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShareFormat {
    /// `DPS1`: index is framing.
    NOfN,
    /// `DPTS`: index is payload, sized for `n` parties.
    Threshold { n: u16 },
}

impl DpfEvalShare {
    pub fn encode(&self, format: ShareFormat) -> Encoded {
        let field = self.s1.field();
        let mut e = Encoder::new();
        match format {
            ShareFormat::NOfN => {
                e.framing("magic", b"DPS1".to_vec())
                    .framing("q", field.modulus().to_le_bytes().to_vec())
                    .framing("index", self.index.to_le_bytes().to_vec());
            }
            ShareFormat::Threshold { n } => {
                e.framing("magic", b"DPTS".to_vec())
                    .framing("q", field.modulus().to_le_bytes().to_vec())
                    .framing("n", n.to_le_bytes().to_vec())
                    .payload("index", index_bytes(self.index, n));
            }
        }
        e.vector("s0", &self.s0)
            .element("s1", self.s1)
            .framing("r.len", (self.r.len() as u32).to_le_bytes().to_vec())
            .payload("r", self.r.clone())
            .vector("theta", &self.theta)
            .vector("k_sum", &self.k_sum.vec);
        e.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<(Self, ShareFormat)> {
        let mut d = Decoder::new(bytes);
        let magic = d.take(4)?;
        let (field, index, format) = match magic {
            b"DPS1" => {
                let field = PrimeField::new(d.u64()?)?;
                (field, d.u16()?, ShareFormat::NOfN)
            }
            b"DPTS" => {
                let field = PrimeField::new(d.u64()?)?;
                let n = d.u16()?;
                let index = read_index(&mut d, n)?;
                (field, index, ShareFormat::Threshold { n })
            }
            other => {
                return Err(Error::Decode(format!(
                    "not an evaluation share: magic {:?}",
                    String::from_utf8_lossy(other)
                )))
            }
        };
        let s0 = d.vector(field)?;
        let s1 = d.element(field)?;
        let r_len = d.u32()? as usize;
        let r = d.take(r_len)?.to_vec();
        let theta = d.vector(field)?;
        let k_sum = KhKey { vec: d.vector(field)? };
        d.finish()?;
        Ok((
            Self {
                index,
                s0,
                s1,
                r,
                theta,
                k_sum,
            },
            format,
        ))
    }
}

/// Party index as a payload of `ceil(log2(n + 1) / 8)` big-endian bytes.
pub(crate) fn index_bytes(index: u16, n: u16) -> Vec<u8> {
    let w = bytes_below(n as u64 + 1);
    index.to_be_bytes()[2 - w..].to_vec()
}

pub(crate) fn read_index(d: &mut Decoder<'_>, n: u16) -> Result<u16> {
    let w = bytes_below(n as u64 + 1);
    let mut buf = [0u8; 2];
    buf[2 - w..].copy_from_slice(d.take(w)?);
    Ok(u16::from_be_bytes(buf))
}

/// Checks a share set for equal `(r, theta, k)`, distinct indices in `1..=n`
/// and consistent dimensions.
pub(crate) fn check_share_set(
    shares: &[DpfEvalShare],
    n: usize,
    prf: &KhPrfParams,
) -> Result<()> {
    let first = shares
        .first()
        .ok_or_else(|| Error::ShareSetInvalid("no shares".into()))?;
    let mut seen = vec![false; n + 1];
    for s in shares {
        let i = s.index as usize;
        if i == 0 || i > n {
            return Err(Error::ShareSetInvalid(format!("party index {i} outside 1..={n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::ShareSetInvalid(format!("duplicate party index {i}")));
        }
        if s.r != first.r || s.theta != first.theta || s.k_sum != first.k_sum {
            return Err(Error::ShareSetInvalid(
                "shares disagree on (r, theta, k)".into(),
            ));
        }
        if s.s1.field() != prf.field
            || s.s0.field() != prf.field
            || s.s0.dim() != prf.part1_dim()
            || s.theta.dim() != prf.part1_dim()
            || s.k_sum.vec.dim() != prf.key_dim
        {
            return Err(Error::ShareSetInvalid("share dimensions do not match parameters".into()));
        }
    }
    Ok(())
}

/// Result of the reconstruction check, before collapsing rejection to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecOutcome {
    /// The sum check passed; the value is `S_1 - F_2(k, r)`.
    Accepted(FieldElement),
    /// The sum check failed; reconstruction outputs zero.
    Rejected,
}

impl RecOutcome {
    pub fn value(&self, field: PrimeField) -> FieldElement {
        match self {
            Self::Accepted(v) => *v,
            Self::Rejected => field.zero(),
        }
    }
}

/// Compares the reconstructed `(S_0, S_1)` against `theta + F_1(k, r)`.
pub(crate) fn finish_rec(
    prf: &dyn KeyHomomorphicPrf,
    s0: &FieldVector,
    s1: FieldElement,
    reference: &DpfEvalShare,
) -> Result<RecOutcome> {
    let KhOutput { part1, part2 } = prf.eval(&reference.k_sum, &reference.r)?;
    if *s0 == reference.theta.checked_add(&part1)? {
        Ok(RecOutcome::Accepted(s1.checked_sub(part2)?))
    } else {
        Ok(RecOutcome::Rejected)
    }
}

/// Number of field elements in an n-out-of-n key: `4l^2 + 2 lambda l + 4l + lambda`
/// vector/scalar coordinates plus `2l + 1` keys of dimension `d`.
pub fn nn_key_elements(ell: usize, lambda: usize, d: usize) -> usize {
    4 * ell * ell + 2 * lambda * ell + 4 * ell + lambda + (2 * ell + 1) * d
}

/// Field elements in an evaluation share: `4l + 2 lambda + 1` plus one key.
pub fn share_elements(ell: usize, lambda: usize, d: usize) -> usize {
    4 * ell + 2 * lambda + 1 + d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_placement() {
        let f = PrimeField::new(11).unwrap();
        let a: BitString = "10".parse().unwrap();
        let free = [f.element(1), f.element(2), f.element(3)];
        // forced slot is 2 + a_1 = 2; selected slots are 1 and 2
        let slots = place_alphas(&a, f.element(7), &free).unwrap();
        assert_eq!(slots, vec![f.element(1), f.element(2), f.element(5), f.element(3)]);
        let sum = selected_slots(&a).fold(f.zero(), |acc, s| acc + slots[s]);
        assert_eq!(sum, f.element(7));
    }

    #[test]
    fn index_width() {
        assert_eq!(index_bytes(3, 5), vec![3]);
        assert_eq!(index_bytes(300, 300), vec![1, 44]);
    }
}
