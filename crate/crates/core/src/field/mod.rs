//! Prime-field arithmetic, vectors, polynomials and interpolation.
//!
//! Arithmetic is plain modular arithmetic on `u64` with `u128` products and is
//! not constant time. Inversion uses the extended Euclidean algorithm.

mod linalg;
mod poly;
mod vector;

pub use linalg::{rank, EchelonBasis};
pub use poly::{interpolate, lagrange_coeffs_at, Polynomial};
pub use vector::FieldVector;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::sampling::{bits_below, bytes_below, uniform_below};

/// Parameters of the prime field `F_q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    modulus: u64,
}

impl PrimeField {
    /// Largest modulus accepted; keeps `a + b` inside `u64` for reduced operands.
    pub const MAX_MODULUS: u64 = 1 << 62;

    pub fn new(q: u64) -> Result<Self> {
        if !(2..=Self::MAX_MODULUS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { modulus: q })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Bit length of `q - 1`, i.e. `ceil(log2 q)`.
    pub fn bit_len(&self) -> u32 {
        bits_below(self.modulus)
    }

    /// Width of the canonical big-endian encoding of an element.
    pub fn byte_len(&self) -> usize {
        bytes_below(self.modulus)
    }

    /// `log2 |F|`, the information content of one element.
    pub fn log2_order(&self) -> f64 {
        (self.modulus as f64).log2()
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, field: *self }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1, field: *self }
    }

    /// The element `value mod q`.
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.modulus,
            field: *self,
        }
    }

    pub fn from_i64(&self, value: i64) -> FieldElement {
        let q = self.modulus as i128;
        let v = (value as i128).rem_euclid(q);
        FieldElement {
            value: v as u64,
            field: *self,
        }
    }

    /// The injection `{0, ..., n} -> F` used for party evaluation points.
    ///
    /// This is the natural embedding, injective only while `i < q`; schemes
    /// call [`PrimeField::check_parties`] before relying on it.
    pub fn embed(&self, i: usize) -> FieldElement {
        self.element(i as u64)
    }

    /// Ensures `q >= n + 1` so that `0, 1, ..., n` embed injectively.
    pub fn check_parties(&self, n: usize) -> Result<()> {
        if (n as u128) + 1 > self.modulus as u128 {
            return Err(Error::FieldTooSmall {
                q: self.modulus,
                n,
            });
        }
        Ok(())
    }

    /// Uniform element by rejection sampling.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: uniform_below(rng, self.modulus),
            field: *self,
        }
    }

    /// Iterates over every element of the field in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.modulus).map(move |v| FieldElement {
            value: v,
            field: *self,
        })
    }

    /// Appends the canonical fixed-width big-endian encoding of `x`.
    pub fn encode_into(&self, x: FieldElement, out: &mut Vec<u8>) {
        debug_assert_eq!(x.field, *self);
        let width = self.byte_len();
        out.extend_from_slice(&x.value.to_be_bytes()[8 - width..]);
    }

    pub fn encode(&self, x: FieldElement) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        self.encode_into(x, &mut out);
        out
    }

    pub fn decode(&self, bytes: &[u8]) -> Result<FieldElement> {
        let width = self.byte_len();
        if bytes.len() != width {
            return Err(Error::Decode(format!(
                "field element needs {width} bytes, got {}",
                bytes.len()
            )));
        }
        let mut buf = [0u8; 8];
        buf[8 - width..].copy_from_slice(bytes);
        let value = u64::from_be_bytes(buf);
        if value >= self.modulus {
            return Err(Error::Decode(format!(
                "value {value} is not reduced mod {}",
                self.modulus
            )));
        }
        Ok(FieldElement { value, field: *self })
    }
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.modulus)
    }
}

/// An element of a prime field. Always reduced: `0 <= value < q`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MismatchedField(
                self.field.modulus,
                other.field.modulus,
            ));
        }
        Ok(())
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let q = self.field.modulus;
        let s = self.value + rhs.value;
        Ok(Self {
            value: if s >= q { s - q } else { s },
            field: self.field,
        })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let q = self.field.modulus;
        let value = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            q - (rhs.value - self.value)
        };
        Ok(Self {
            value,
            field: self.field,
        })
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        self.same_field(&rhs)?;
        let q = self.field.modulus as u128;
        Ok(Self {
            value: ((self.value as u128 * rhs.value as u128) % q) as u64,
            field: self.field,
        })
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        self.checked_mul(rhs.inv()?)
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::DivisionByZero);
        }
        let q = self.field.modulus as i128;
        let (mut r0, mut r1) = (q, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1, "q is prime");
        Ok(Self {
            value: t0.rem_euclid(q) as u64,
            field: self.field,
        })
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = self.field.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on mismatched fields; the `checked_*` methods report it.
impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        self.field.zero() - self
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn rejects_non_primes() {
        for q in [0, 1, 4, 9, 15, 561, 1 << 31] {
            assert_eq!(PrimeField::new(q), Err(Error::InvalidModulus(q)));
        }
        for q in [2, 3, 5, 7, 11, 13, (1 << 31) - 1, (1 << 61) - 1] {
            assert!(PrimeField::new(q).is_ok(), "{q}");
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        let naive = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), naive(n), "{n}");
        }
    }

    #[test]
    fn addition_examples() {
        let f7 = f(7);
        assert_eq!(f7.element(3) + f7.element(4), f7.zero());
        let a = f7.element(5);
        assert_eq!(a + f7.zero(), a);
        // 5 + 9 = 14 = 11 + 3
        let f11 = f(11);
        assert_eq!((f11.element(5) + f11.element(9)).value(), (5 + 9) % 11);
        assert_eq!((f11.element(5) + f11.element(9)).value(), 3);
    }

    #[test]
    fn mismatched_fields_error() {
        let a = f(7).element(3);
        let b = f(11).element(3);
        assert_eq!(a.checked_add(b), Err(Error::MismatchedField(7, 11)));
        assert_eq!(a.checked_mul(b), Err(Error::MismatchedField(7, 11)));
        assert_eq!(a.checked_sub(b), Err(Error::MismatchedField(7, 11)));
    }

    #[test]
    fn inverse_examples() {
        let f7 = f(7);
        assert_eq!(f7.one().inv().unwrap(), f7.one());
        // exhaustive search oracle for 3x = 1 mod 7
        let found = (0..7).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(f7.element(3).inv().unwrap().value(), found);
        assert_eq!(found, 5);
        assert_eq!(f7.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn fermat() {
        for q in [2u64, 5, 13, (1 << 31) - 1] {
            let field = f(q);
            let mut rng = ChaCha20Rng::seed_from_u64(q);
            for _ in 0..20 {
                let x = field.sample(&mut rng);
                if !x.is_zero() {
                    assert_eq!(x.pow(q - 1), field.one());
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for q in [2u64, 3, 5, 7, 11, 13] {
            let field = f(q);
            let els: Vec<_> = field.elements().collect();
            for &a in &els {
                assert_eq!(a + (-a), field.zero());
                if !a.is_zero() {
                    assert_eq!(a * a.inv().unwrap(), field.one());
                }
                for &b in &els {
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    for &c in &els {
                        assert_eq!((a + b) + c, a + (b + c));
                        assert_eq!((a * b) * c, a * (b * c));
                        assert_eq!(a * (b + c), a * b + a * c);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn field_axioms_random(a in 0u64.., b in 0u64.., c in 0u64..) {
            let field = f((1 << 61) - 1);
            let (a, b, c) = (field.element(a), field.element(b), field.element(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + (-a), field.zero());
            prop_assert_eq!(a - b + b, a);
            if !a.is_zero() {
                prop_assert_eq!(a * a.inv().unwrap(), field.one());
            }
        }
    }

    #[test]
    fn sampling_q2_is_balanced() {
        let field = f(2);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let ones: usize = (0..20_000).filter(|_| field.sample(&mut rng).value() == 1).count();
        // 5 sigma band around 10_000
        assert!((ones as i64 - 10_000).abs() < 360, "{ones}");
    }

    #[test]
    fn sampling_q5_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let field = f(5);
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut counts = [0u64; 5];
        for _ in 0..n {
            counts[field.sample(&mut rng).value() as usize] += 1;
        }
        let expected = n as f64 / 5.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let p = 1.0 - ChiSquared::new(4.0).unwrap().cdf(stat);
        assert!(p > 0.001, "p = {p}, counts {counts:?}");
    }

    #[test]
    fn seeded_sampling_replays() {
        let field = f((1 << 31) - 1);
        let draw = |seed| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..16).map(|_| field.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn canonical_encoding() {
        let field = f((1 << 31) - 1);
        assert_eq!(field.byte_len(), 4);
        let x = field.element(0x1234_5678);
        assert_eq!(field.encode(x), vec![0x12, 0x34, 0x56, 0x78]);
        assert_eq!(field.decode(&[0x12, 0x34, 0x56, 0x78]).unwrap(), x);
        assert!(field.decode(&[0x7f, 0xff, 0xff, 0xff]).is_err());
        assert!(field.decode(&[0, 0, 1]).is_err());
        assert_eq!(f(2).byte_len(), 1);
        assert_eq!(f(257).byte_len(), 2);
    }

    #[test]
    fn party_embedding_bound() {
        let f5 = f(5);
        assert!(f5.check_parties(4).is_ok());
        assert_eq!(f5.check_parties(5), Err(Error::FieldTooSmall { q: 5, n: 5 }));
    }
}
