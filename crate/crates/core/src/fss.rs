//! k-out-of-k function secret sharing built from any function-private CDS.
//!
//! KeyGen samples a uniform secret and deals the CDS shares as keys. Each
//! party's evaluation share is its CDS message; reconstruction runs Carol and
//! outputs 1 iff Carol accepts.

use rand::RngCore;

use crate::bits::BitString;
use crate::encoding::{Codec, Decoder, Encoded, Encoder};
use crate::error::{Error, Result};
use crate::fpcds::{self, CarolOutput, FpcdsMessage, FpcdsShare, Role};
use crate::group::{AbelianGroup, GroupElement};

/// A CDS scheme with deterministic party algorithms.
pub trait FunctionPrivateCds {
    type Condition;
    type Secret;
    type Share;
    type Input;
    type Message;

    fn parties(&self) -> usize;

    fn sample_secret<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Secret;

    fn gen<R: RngCore + ?Sized>(
        &self,
        h: &Self::Condition,
        s: Self::Secret,
        rng: &mut R,
    ) -> Result<Vec<Self::Share>>;

    /// `P_j(c_j, w_j)` for `j` in `1..=parties()`.
    fn party(&self, j: usize, input: &Self::Input, share: &Self::Share) -> Result<Self::Message>;

    /// `None` when Carol rejects.
    fn carol(&self, messages: &[Self::Message]) -> Result<Option<Self::Secret>>;
}

/// The two-party point-condition CDS over a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointCds {
    pub group: AbelianGroup,
    /// `k'` dealt to both parties for refresh.
    pub refresh_key: [u8; 32],
}

/// `h_{(a,b)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointCondition {
    pub a: BitString,
    pub b: BitString,
}

impl PointCondition {
    pub fn eval(&self, c1: &BitString, c2: &BitString) -> bool {
        *c1 == self.a && *c2 == self.b
    }
}

impl FunctionPrivateCds for PointCds {
    type Condition = PointCondition;
    type Secret = GroupElement;
    type Share = FpcdsShare;
    type Input = BitString;
    type Message = FpcdsMessage;

    fn parties(&self) -> usize {
        2
    }

    fn sample_secret<R: RngCore + ?Sized>(&self, rng: &mut R) -> GroupElement {
        self.group.sample(rng)
    }

    fn gen<R: RngCore + ?Sized>(&self, h: &PointCondition, s: GroupElement, rng: &mut R) -> Result<Vec<FpcdsShare>> {
        let (w1, w2) = fpcds::gen(&self.group, &h.a, &h.b, s, self.refresh_key, rng)?;
        Ok(vec![w1, w2])
    }

    fn party(&self, j: usize, input: &BitString, share: &FpcdsShare) -> Result<FpcdsMessage> {
        match Role::from_index(j)? {
            Role::P1 => fpcds::party1(input, share),
            Role::P2 => fpcds::party2(input, share),
        }
    }

    fn carol(&self, messages: &[FpcdsMessage]) -> Result<Option<GroupElement>> {
        let [m1, m2] = messages else {
            return Err(Error::ShareSetInvalid(format!("expected 2 messages, got {}", messages.len())));
        };
        Ok(match fpcds::carol(m1, m2)? {
            CarolOutput::Secret(s) => Some(s),
            CarolOutput::Reject => None,
        })
    }
}

/// Party `j`'s key `k_j = w_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FssKey<S> {
    pub index: u16,
    pub inner: S,
}

pub fn keygen<C: FunctionPrivateCds, R: RngCore + ?Sized>(
    cds: &C,
    h: &C::Condition,
    rng: &mut R,
) -> Result<Vec<FssKey<C::Share>>> {
    let s = cds.sample_secret(rng);
    Ok(cds
        .gen(h, s, rng)?
        .into_iter()
        .enumerate()
        .map(|(j, inner)| FssKey {
            index: (j + 1) as u16,
            inner,
        })
        .collect())
}

pub fn eval_share<C: FunctionPrivateCds>(cds: &C, key: &FssKey<C::Share>, c_j: &C::Input) -> Result<C::Message> {
    cds.party(key.index as usize, c_j, &key.inner)
}

/// 1 iff Carol accepts. Errors only on malformed message sets; mismatched runs
/// yield some bit.
pub fn rec<C: FunctionPrivateCds>(cds: &C, messages: &[C::Message]) -> Result<u8> {
    Ok(cds.carol(messages)?.is_some() as u8)
}

impl Codec for FssKey<FpcdsShare> {
    const FORMAT: &'static str = "FSSW";

    fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("magic", b"FSSW".to_vec())
            .framing("index", self.index.to_le_bytes().to_vec());
        let inner = self.inner.encode();
        for seg in inner.segments() {
            e.segment(format!("w.{}", seg.name), seg.kind, seg.bytes.clone());
        }
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"FSSW")?;
        let index = d.u16()?;
        let inner = FpcdsShare::decode(&bytes[6..])?;
        if Role::from_index(index as usize)? != inner.role {
            return Err(Error::Decode(format!("wrapper index {index} disagrees with share role")));
        }
        Ok(Self { index, inner })
    }
}
