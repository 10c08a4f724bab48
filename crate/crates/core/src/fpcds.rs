//! Function-private conditional disclosure of secrets for the point
//! conditions `h_{(a,b)}(alpha, beta) = [alpha = a and beta = b]`.
//!
//! The secret lives in a finite abelian group. Carol combines the two message
//! payloads as `m1[1] - m2[1]`, which is the XOR of the payloads on `xor:m`.

use rand::RngCore;

use crate::bits::BitString;
use crate::encoding::{Codec, Decoder, Encoded, Encoder, SegmentKind};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};
use crate::primitives::{std_prf, std_prf_group, std_prp};

const SEPARATOR: u8 = 0x7C;

/// Which of the two CDS parties a share belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    P1,
    P2,
}

impl Role {
    pub fn index(self) -> u8 {
        match self {
            Self::P1 => 1,
            Self::P2 => 2,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::P1),
            2 => Ok(Self::P2),
            _ => Err(Error::InvalidPartyIndex(i)),
        }
    }
}

/// `w_j = (point, s, t, r_j, u, v_j)` plus the refresh state `(c, k')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpcdsShare {
    pub group: AbelianGroup,
    pub role: Role,
    pub point: BitString,
    pub s: GroupElement,
    pub t: GroupElement,
    pub r: GroupElement,
    pub u: GroupElement,
    pub v: GroupElement,
    pub counter: u64,
    pub refresh_key: [u8; 32],
}

/// `(tag, payload)` as sent to Carol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpcdsMessage {
    pub group: AbelianGroup,
    pub tag: GroupElement,
    pub payload: GroupElement,
}

impl FpcdsMessage {
    /// Wire form: `tag || payload`, each canonically encoded.
    pub fn wire(&self) -> Vec<u8> {
        let mut out = self.group.encode(self.tag);
        self.group.encode_into(self.payload, &mut out);
        out
    }

    pub fn from_wire(group: AbelianGroup, bytes: &[u8]) -> Result<Self> {
        let w = group.byte_len();
        if bytes.len() != 2 * w {
            return Err(Error::Decode(format!("message needs {} bytes, got {}", 2 * w, bytes.len())));
        }
        Ok(Self {
            group,
            tag: group.decode(&bytes[..w])?,
            payload: group.decode(&bytes[w..])?,
        })
    }
}

/// Carol's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CarolOutput {
    Secret(GroupElement),
    Reject,
}

/// The six group elements Gen samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FpcdsCoins {
    pub t: GroupElement,
    pub r1: GroupElement,
    pub r2: GroupElement,
    pub u: GroupElement,
    pub v1: GroupElement,
    pub v2: GroupElement,
}

impl FpcdsCoins {
    pub const DIGITS: usize = 6;

    /// `t, r1, r2` uniform; `u, v1, v2` uniform among distinct triples.
    pub fn sample<R: RngCore + ?Sized>(group: &AbelianGroup, rng: &mut R) -> Result<Self> {
        check_group(group)?;
        let u = group.sample(rng);
        let v1 = group.sample_excluding(&[u], rng)?;
        let v2 = group.sample_excluding(&[u, v1], rng)?;
        Ok(Self {
            t: group.sample(rng),
            r1: group.sample(rng),
            r2: group.sample(rng),
            u,
            v1,
            v2,
        })
    }

    /// Coins from digits `(t, r1, r2, u, v1, v2)`, or `None` if `u, v1, v2`
    /// are not distinct or a digit is out of range.
    pub fn from_digits(group: &AbelianGroup, d: &[u64]) -> Option<Self> {
        if d.len() != Self::DIGITS || d.iter().any(|&x| x >= group.order()) {
            return None;
        }
        let c = Self {
            t: GroupElement(d[0]),
            r1: GroupElement(d[1]),
            r2: GroupElement(d[2]),
            u: GroupElement(d[3]),
            v1: GroupElement(d[4]),
            v2: GroupElement(d[5]),
        };
        c.distinct().then_some(c)
    }

    fn distinct(&self) -> bool {
        self.u != self.v1 && self.u != self.v2 && self.v1 != self.v2
    }

    /// Every valid coin tuple for `group`.
    pub fn enumerate(group: AbelianGroup) -> impl Iterator<Item = Self> {
        let q = group.order();
        let total = q.pow(Self::DIGITS as u32);
        (0..total).filter_map(move |mut idx| {
            let mut d = [0u64; Self::DIGITS];
            for x in d.iter_mut().rev() {
                *x = idx % q;
                idx /= q;
            }
            Self::from_digits(&group, &d)
        })
    }
}

fn check_group(group: &AbelianGroup) -> Result<()> {
    if group.order() < 3 {
        return Err(Error::GroupTooSmall(group.order()));
    }
    Ok(())
}

pub fn gen<R: RngCore + ?Sized>(
    group: &AbelianGroup,
    a: &BitString,
    b: &BitString,
    s: GroupElement,
    refresh_key: [u8; 32],
    rng: &mut R,
) -> Result<(FpcdsShare, FpcdsShare)> {
    let coins = FpcdsCoins::sample(group, rng)?;
    gen_with_coins(group, a, b, s, refresh_key, &coins)
}

pub fn gen_with_coins(
    group: &AbelianGroup,
    a: &BitString,
    b: &BitString,
    s: GroupElement,
    refresh_key: [u8; 32],
    coins: &FpcdsCoins,
) -> Result<(FpcdsShare, FpcdsShare)> {
    check_group(group)?;
    b.check_len(a.len())?;
    for x in [s, coins.t, coins.r1, coins.r2, coins.u, coins.v1, coins.v2] {
        group.element(x.0)?;
    }
    if !coins.distinct() {
        return Err(Error::ParamViolation("u, v1, v2 must be distinct".into()));
    }
    let share = |role, point: &BitString, r, v| FpcdsShare {
        group: *group,
        role,
        point: point.clone(),
        s,
        t: coins.t,
        r,
        u: coins.u,
        v,
        counter: 0,
        refresh_key,
    };
    Ok((
        share(Role::P1, a, coins.r1, coins.v1),
        share(Role::P2, b, coins.r2, coins.v2),
    ))
}

/// `(u, s + t)` if `alpha = a`, else `(v1, r1)`.
pub fn party1(alpha: &BitString, w1: &FpcdsShare) -> Result<FpcdsMessage> {
    expect_role(w1, Role::P1)?;
    send(alpha, w1)
}

/// `(u, t)` if `beta = b`, else `(v2, r2)`.
pub fn party2(beta: &BitString, w2: &FpcdsShare) -> Result<FpcdsMessage> {
    expect_role(w2, Role::P2)?;
    send(beta, w2)
}

fn expect_role(w: &FpcdsShare, role: Role) -> Result<()> {
    if w.role != role {
        return Err(Error::InvalidPartyIndex(w.role.index() as usize));
    }
    Ok(())
}

/// Runs the party algorithm matching the share's role.
pub fn send(input: &BitString, w: &FpcdsShare) -> Result<FpcdsMessage> {
    input.check_len(w.point.len())?;
    let (tag, payload) = if *input == w.point {
        match w.role {
            Role::P1 => (w.u, w.group.op(w.s, w.t)),
            Role::P2 => (w.u, w.t),
        }
    } else {
        (w.v, w.r)
    };
    Ok(FpcdsMessage {
        group: w.group,
        tag,
        payload,
    })
}

pub fn carol(m1: &FpcdsMessage, m2: &FpcdsMessage) -> Result<CarolOutput> {
    if m1.group != m2.group {
        return Err(Error::InvalidGroup(format!(
            "messages over different groups {} and {}",
            m1.group, m2.group
        )));
    }
    if m1.tag != m2.tag {
        return Ok(CarolOutput::Reject);
    }
    Ok(CarolOutput::Secret(m1.group.op(m1.payload, m1.group.inv(m2.payload))))
}

fn derive_key(k: &[u8; 32], fields: &[&[u8]]) -> Vec<u8> {
    let mut input = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            input.push(SEPARATOR);
        }
        input.extend_from_slice(f);
    }
    std_prf(k, &input, 32)
}

impl FpcdsShare {
    /// Replaces `r, t, v, u` by `F(k1i, r), F(k2, t), P(k3, v), P(k3, u)` with
    /// keys derived from `k'` and the counter, then advances the counter.
    pub fn refresh(&self) -> Self {
        let c = self.counter.to_be_bytes();
        let i = [self.role.index()];
        let k1 = derive_key(&self.refresh_key, &[&c, &[1], &i]);
        let k2 = derive_key(&self.refresh_key, &[&c, &[2]]);
        let k3 = derive_key(&self.refresh_key, &[&c, &[3]]);
        let g = &self.group;
        Self {
            r: std_prf_group(&k1, self.r, g),
            t: std_prf_group(&k2, self.t, g),
            v: std_prp(&k3, self.v, g),
            u: std_prp(&k3, self.u, g),
            counter: self.counter + 1,
            ..self.clone()
        }
    }
}

impl Codec for FpcdsShare {
    const FORMAT: &'static str = "FPC1";

    fn encode(&self) -> Encoded {
        let g = &self.group;
        let mut e = Encoder::new();
        e.framing("magic", b"FPC1".to_vec())
            .framing("group", g.descriptor_bytes())
            .framing("role", vec![self.role.index()])
            .framing("point.len", (self.point.len() as u16).to_le_bytes().to_vec())
            .bits("point", &self.point, SegmentKind::Payload);
        for (name, x) in [("s", self.s), ("t", self.t), ("r", self.r), ("u", self.u), ("v", self.v)] {
            e.payload(name, g.encode(x));
        }
        e.framing("counter", self.counter.to_le_bytes().to_vec())
            .framing("refresh_key", self.refresh_key.to_vec());
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"FPC1")?;
        let kind = d.u8()?;
        let group = AbelianGroup::from_descriptor_bytes(kind, d.u64()?)?;
        let role = Role::from_index(d.u8()? as usize)?;
        let len = d.u16()? as usize;
        let point = d.bits(len)?;
        let w = group.byte_len();
        let mut el = || -> Result<GroupElement> { group.decode(d.take(w)?) };
        let (s, t, r, u, v) = (el()?, el()?, el()?, el()?, el()?);
        let counter = d.u64()?;
        let refresh_key = d.array32()?;
        d.finish()?;
        Ok(Self {
            group,
            role,
            point,
            s,
            t,
            r,
            u,
            v,
            counter,
            refresh_key,
        })
    }
}

impl Codec for FpcdsMessage {
    const FORMAT: &'static str = "FPM1";

    fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("magic", b"FPM1".to_vec())
            .framing("group", self.group.descriptor_bytes())
            .payload("tag", self.group.encode(self.tag))
            .payload("payload", self.group.encode(self.payload));
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"FPM1")?;
        let kind = d.u8()?;
        let group = AbelianGroup::from_descriptor_bytes(kind, d.u64()?)?;
        let msg = Self::from_wire(group, d.take(2 * group.byte_len())?)?;
        d.finish()?;
        Ok(msg)
    }
}
