//! Standard keyed primitives: an HMAC-SHA256 PRF and a small-domain Feistel PRP.

use hmac::{Hmac, Mac};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::Sha256;

use crate::group::{AbelianGroup, GroupElement};
use crate::sampling::bits_below;

type HmacSha256 = Hmac<Sha256>;

const FEISTEL_ROUNDS: u8 = 4;

fn hmac(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
    for p in parts {
        mac.update(p);
    }
    mac.finalize().into_bytes().into()
}

/// HMAC-SHA256 in counter mode, producing `out_len` bytes.
pub fn std_prf(key: &[u8], input: &[u8], out_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(out_len.next_multiple_of(32));
    let mut counter = 0u32;
    while out.len() < out_len {
        out.extend_from_slice(&hmac(key, &[&counter.to_be_bytes(), input]));
        counter += 1;
    }
    out.truncate(out_len);
    out
}

/// PRF into a group: the PRF output seeds a rejection sampler, so the result is uniform on `G`.
pub fn std_prf_group(key: &[u8], x: GroupElement, group: &AbelianGroup) -> GroupElement {
    let seed = hmac(key, &[b"F", &group.encode(x)]);
    group.sample(&mut ChaCha20Rng::from_seed(seed))
}

struct Feistel<'a> {
    key: &'a [u8],
    half: u32,
}

impl Feistel<'_> {
    fn mask(&self) -> u64 {
        (1u64 << self.half) - 1
    }

    fn round(&self, round: u8, right: u64) -> u64 {
        let d = hmac(self.key, &[b"P", &[round], &right.to_be_bytes()]);
        u64::from_be_bytes(d[..8].try_into().expect("8 bytes")) & self.mask()
    }

    fn forward(&self, x: u64) -> u64 {
        let (mut l, mut r) = (x >> self.half, x & self.mask());
        for i in 0..FEISTEL_ROUNDS {
            (l, r) = (r, l ^ self.round(i, r));
        }
        (l << self.half) | r
    }

    fn backward(&self, y: u64) -> u64 {
        let (mut l, mut r) = (y >> self.half, y & self.mask());
        for i in (0..FEISTEL_ROUNDS).rev() {
            (l, r) = (r ^ self.round(i, l), l);
        }
        (l << self.half) | r
    }
}

fn feistel_for<'a>(key: &'a [u8], group: &AbelianGroup) -> Option<Feistel<'a>> {
    let order = group.order();
    if order <= 1 {
        return None;
    }
    Some(Feistel {
        key,
        half: bits_below(order).div_ceil(2),
    })
}

/// A keyed permutation of `G`: a balanced Feistel network on the smallest even
/// bit width covering `|G|`, cycle-walked until the result is in range.
pub fn std_prp(key: &[u8], x: GroupElement, group: &AbelianGroup) -> GroupElement {
    let Some(f) = feistel_for(key, group) else {
        return x;
    };
    let mut y = f.forward(x.0);
    while y >= group.order() {
        y = f.forward(y);
    }
    GroupElement(y)
}

pub fn std_prp_inv(key: &[u8], y: GroupElement, group: &AbelianGroup) -> GroupElement {
    let Some(f) = feistel_for(key, group) else {
        return y;
    };
    let mut x = f.backward(y.0);
    while x >= group.order() {
        x = f.backward(x);
    }
    GroupElement(x)
}
