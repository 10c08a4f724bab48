//! Shamir secret sharing over a prime field.
//!
//! Party `i` holds the evaluation of the sharing polynomial at the field point
//! `i`; the secret sits at `0`. Reconstruction interpolates from the `t`
//! lowest-indexed shares and checks any further shares against the result.

use rand::RngCore;

use crate::encoding::{Decoder, Encoder, Encoded};
use crate::error::{Error, Result};
use crate::field::{lagrange_coeffs_at, FieldElement, FieldVector, PrimeField};

/// One party's share: the evaluation at point `index` of the sharing polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShamirShare<T> {
    pub index: u16,
    pub value: T,
}

/// Validates `1 <= t <= n` and `q >= n + 1`.
pub fn check_threshold(field: PrimeField, t: usize, n: usize) -> Result<()> {
    if t == 0 || t > n || n > u16::MAX as usize {
        return Err(Error::ThresholdOutOfRange { t, n });
    }
    field.check_parties(n)
}

/// Shares `secret` with a fresh uniformly random polynomial of degree at most `t - 1`.
pub fn share<R: RngCore + ?Sized>(
    field: PrimeField,
    secret: FieldElement,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ShamirShare<FieldElement>>> {
    check_threshold(field, t, n)?;
    let coeffs: Vec<_> = (1..t).map(|_| field.sample(rng)).collect();
    share_with_coeffs(field, secret, t, n, &coeffs)
}

/// Shares `secret` using the given higher coefficients `a_1, ..., a_{t-1}`.
pub fn share_with_coeffs(
    field: PrimeField,
    secret: FieldElement,
    t: usize,
    n: usize,
    coeffs: &[FieldElement],
) -> Result<Vec<ShamirShare<FieldElement>>> {
    let secret_v = FieldVector::new(field, vec![secret])?;
    let coeff_v = coeffs
        .iter()
        .map(|&c| FieldVector::new(field, vec![c]))
        .collect::<Result<Vec<_>>>()?;
    Ok(share_vector_with_coeffs(&secret_v, t, n, &coeff_v)?
        .into_iter()
        .map(|s| ShamirShare {
            index: s.index,
            value: s.value.get(0),
        })
        .collect())
}

/// Coordinate-wise sharing with an independent polynomial per coordinate.
pub fn share_vector<R: RngCore + ?Sized>(
    secret: &FieldVector,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ShamirShare<FieldVector>>> {
    check_threshold(secret.field(), t, n)?;
    let coeffs: Vec<_> = (1..t)
        .map(|_| FieldVector::random(secret.field(), secret.dim(), rng))
        .collect();
    share_vector_with_coeffs(secret, t, n, &coeffs)
}

/// `coeffs[m]` holds the coefficient of `X^{m+1}` for every coordinate.
pub fn share_vector_with_coeffs(
    secret: &FieldVector,
    t: usize,
    n: usize,
    coeffs: &[FieldVector],
) -> Result<Vec<ShamirShare<FieldVector>>> {
    let field = secret.field();
    check_threshold(field, t, n)?;
    if coeffs.len() != t - 1 {
        return Err(Error::LengthMismatch {
            expected: t - 1,
            got: coeffs.len(),
        });
    }
    (1..=n)
        .map(|i| {
            let x = field.embed(i);
            // Horner over vector coefficients: secret + x (c_1 + x (c_2 + ...))
            let mut acc = FieldVector::zero(field, secret.dim());
            for c in coeffs.iter().rev() {
                acc = acc.checked_add(c)?.scale(x)?;
            }
            Ok(ShamirShare {
                index: i as u16,
                value: acc.checked_add(secret)?,
            })
        })
        .collect()
}

/// Sorts shares by index and rejects zero or repeated indices.
fn ordered<T>(shares: &[ShamirShare<T>], t: usize) -> Result<Vec<&ShamirShare<T>>> {
    if t == 0 {
        return Err(Error::ThresholdOutOfRange { t, n: shares.len() });
    }
    if shares.len() < t {
        return Err(Error::NotEnoughShares {
            needed: t,
            got: shares.len(),
        });
    }
    let mut sorted: Vec<_> = shares.iter().collect();
    sorted.sort_by_key(|s| s.index);
    for (k, s) in sorted.iter().enumerate() {
        if s.index == 0 || (k > 0 && sorted[k - 1].index == s.index) {
            return Err(Error::InvalidShareIndex(s.index));
        }
    }
    Ok(sorted)
}

/// Reconstructs a shared vector. Extra shares beyond the `t` lowest indices
/// must agree with the interpolated polynomials.
pub fn reconstruct_vector(shares: &[ShamirShare<FieldVector>], t: usize) -> Result<FieldVector> {
    let sorted = ordered(shares, t)?;
    let field = sorted[0].value.field();
    let dim = sorted[0].value.dim();
    let (basis, extras) = sorted.split_at(t);
    let points: Vec<_> = basis.iter().map(|s| field.embed(s.index as usize)).collect();
    let combine = |target: FieldElement| -> Result<FieldVector> {
        let coeffs = lagrange_coeffs_at(&points, target)?;
        let mut acc = FieldVector::zero(field, dim);
        for (s, c) in basis.iter().zip(coeffs) {
            acc.add_assign(&s.value.scale(c)?)?;
        }
        Ok(acc)
    };
    for extra in extras {
        if combine(field.embed(extra.index as usize))? != extra.value {
            return Err(Error::InconsistentShares);
        }
    }
    combine(field.zero())
}

pub fn reconstruct(shares: &[ShamirShare<FieldElement>], t: usize) -> Result<FieldElement> {
    let Some(first) = shares.first() else {
        return Err(Error::NotEnoughShares { needed: t, got: 0 });
    };
    let field = first.value.field();
    let vectors = shares
        .iter()
        .map(|s| {
            Ok(ShamirShare {
                index: s.index,
                value: FieldVector::new(field, vec![s.value])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reconstruct_vector(&vectors, t)?.get(0))
}

impl ShamirShare<FieldElement> {
    pub fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("index", self.index.to_le_bytes().to_vec())
            .element("value", self.value);
        e.finish()
    }

    pub fn decode(field: PrimeField, bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        let index = d.u16()?;
        let value = d.element(field)?;
        d.finish()?;
        Ok(Self { index, value })
    }
}

impl ShamirShare<FieldVector> {
    pub fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("index", self.index.to_le_bytes().to_vec())
            .vector("value", &self.value);
        e.finish()
    }

    pub fn decode(field: PrimeField, bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        let index = d.u16()?;
        let value = d.vector(field)?;
        d.finish()?;
        Ok(Self { index, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Polynomial;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    /// All subsets of `0..n` of size `k`.
    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    fn pick<T: Clone>(shares: &[ShamirShare<T>], idx: &[usize]) -> Vec<ShamirShare<T>> {
        idx.iter().map(|&i| shares[i].clone()).collect()
    }

    #[test]
    fn threshold_one_copies_secret() {
        let field = f(11);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let shares = share(field, field.element(7), 1, 4, &mut rng).unwrap();
        assert!(shares.iter().all(|s| s.value == field.element(7)));
    }

    #[test]
    fn parameter_errors() {
        let field = f(5);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = field.one();
        assert_eq!(share(field, s, 0, 3, &mut rng), Err(Error::ThresholdOutOfRange { t: 0, n: 3 }));
        assert_eq!(share(field, s, 4, 3, &mut rng), Err(Error::ThresholdOutOfRange { t: 4, n: 3 }));
        assert_eq!(share(field, s, 2, 5, &mut rng), Err(Error::FieldTooSmall { q: 5, n: 5 }));
    }

    #[test]
    fn reconstruct_examples() {
        let field = f(11);
        let shares = [
            ShamirShare { index: 1, value: field.element(5) },
            ShamirShare { index: 2, value: field.element(7) },
        ];
        assert_eq!(reconstruct(&shares, 2).unwrap(), field.element(3));

        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let zero = share(field, field.zero(), 3, 5, &mut rng).unwrap();
        assert_eq!(reconstruct(&zero[1..4], 3).unwrap(), field.zero());

        let mut tampered = zero[..4].to_vec();
        tampered[3].value += field.one();
        assert_eq!(reconstruct(&tampered, 3), Err(Error::InconsistentShares));
        assert_eq!(
            reconstruct(&zero[..2], 3),
            Err(Error::NotEnoughShares { needed: 3, got: 2 })
        );
        let dup = [zero[0].clone(), zero[0].clone()];
        assert_eq!(reconstruct(&dup, 2), Err(Error::InvalidShareIndex(1)));
    }

    #[test]
    fn shares_lie_on_the_polynomial() {
        let field = f(13);
        let coeffs = [field.element(4), field.element(9)];
        let shares = share_with_coeffs(field, field.element(6), 3, 5, &coeffs).unwrap();
        let p = Polynomial::from_values(field, &[6, 4, 9]);
        for s in &shares {
            assert_eq!(s.value, p.eval(field.embed(s.index as usize)).unwrap());
        }
    }

    #[test]
    fn every_t_subset_reconstructs_exhaustive_q5() {
        let field = f(5);
        for n in 1..=4usize {
            for t in 1..=n {
                for secret in field.elements() {
                    for code in 0..5u64.pow(t as u32 - 1) {
                        let coeffs: Vec<_> = (0..t - 1)
                            .map(|m| field.element(code / 5u64.pow(m as u32)))
                            .collect();
                        let shares = share_with_coeffs(field, secret, t, n, &coeffs).unwrap();
                        for subset in subsets(n, t) {
                            assert_eq!(reconstruct(&pick(&shares, &subset), t).unwrap(), secret);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn every_t_subset_reconstructs_random() {
        let field = f((1 << 31) - 1);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for (t, n) in [(2, 3), (3, 5), (5, 5), (4, 7)] {
            for _ in 0..100 {
                let secret = field.sample(&mut rng);
                let shares = share(field, secret, t, n, &mut rng).unwrap();
                for subset in subsets(n, t) {
                    assert_eq!(reconstruct(&pick(&shares, &subset), t).unwrap(), secret);
                }
                assert_eq!(reconstruct(&shares, t).unwrap(), secret);
            }
        }
    }

    #[test]
    fn single_share_is_uniform_for_every_secret() {
        // q = 5, t = 2, n = 3: for each secret, the 5 slopes give each share value once.
        let field = f(5);
        for secret in field.elements() {
            let mut counts = vec![HashMap::new(); 3];
            for slope in field.elements() {
                let shares = share_with_coeffs(field, secret, 2, 3, &[slope]).unwrap();
                for (i, s) in shares.iter().enumerate() {
                    *counts[i].entry(s.value.value()).or_insert(0) += 1;
                }
            }
            for c in counts {
                assert_eq!(c.len(), 5);
                assert!(c.values().all(|&k| k == 1));
            }
        }
    }

    #[test]
    fn vector_coordinates_are_independent() {
        // Each pair of slopes yields a distinct share pair, so the joint law is the product law.
        let field = f(5);
        let secret = FieldVector::from_values(field, &[2, 4]);
        let mut seen = HashMap::new();
        for s0 in 0..5 {
            for s1 in 0..5 {
                let coeffs = [FieldVector::from_values(field, &[s0, s1])];
                let shares = share_vector_with_coeffs(&secret, 2, 3, &coeffs).unwrap();
                *seen.entry(shares[0].value.clone()).or_insert(0) += 1;
            }
        }
        assert_eq!(seen.len(), 25);
    }

    #[test]
    fn vector_round_trip_and_empty() {
        let field = f((1 << 31) - 1);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let secret = FieldVector::random(field, 6, &mut rng);
        let shares = share_vector(&secret, 3, 5, &mut rng).unwrap();
        assert_eq!(reconstruct_vector(&shares[2..], 3).unwrap(), secret);
        let empty = share_vector(&FieldVector::zero(field, 0), 2, 3, &mut rng).unwrap();
        assert_eq!(empty.len(), 3);
        assert!(empty.iter().all(|s| s.value.dim() == 0));
    }

    #[test]
    fn share_encoding() {
        let field = f(257);
        let s = ShamirShare { index: 3, value: field.element(256) };
        let bytes = s.encode().to_bytes();
        assert_eq!(bytes, vec![3, 0, 1, 0]);
        assert_eq!(ShamirShare::<FieldElement>::decode(field, &bytes).unwrap(), s);
    }
}
