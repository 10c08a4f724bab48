//! t-out-of-k function secret sharing for polynomials of degree at most `n`.
//!
//! Every coefficient `a_j` is Shamir-shared at threshold `t`. Party `i` holds
//! `K_i = (q_n(i), ..., q_0(i))` and evaluates `K_i . (x^n, ..., x, 1)`, which
//! is a share of `p(x)` on the degree `t - 1` polynomial `Q(y) = sum_j q_j(y) x^j`.
//!
//! Keys are `(n + 1) log2 q` bits, which is optimal for `n <= q - 1`: the map
//! from polynomials to functions `F_q -> F_q` is then injective, so there are
//! `q^{n+1}` candidate functions and a key smaller than that cannot keep all of
//! them possible to a coalition of `t - 1` parties.

use rand::RngCore;

use crate::encoding::{Codec, Decoder, Encoded, Encoder};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, Polynomial, PrimeField};
use crate::shamir::{check_threshold, reconstruct, share_vector_with_coeffs, ShamirShare};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyFssParams {
    pub field: PrimeField,
    /// Degree bound `n`.
    pub degree: usize,
    pub t: usize,
    pub k: usize,
}

impl PolyFssParams {
    pub fn new(field: PrimeField, degree: usize, t: usize, k: usize) -> Result<Self> {
        check_threshold(field, t, k)?;
        if degree >= u32::MAX as usize {
            return Err(Error::ParamViolation("degree bound must fit in 32 bits".into()));
        }
        Ok(Self { field, degree, t, k })
    }

    /// `(n + 1) log2 q`.
    pub fn key_size_bits(&self) -> f64 {
        (self.degree + 1) as f64 * self.field.log2_order()
    }

    fn write(&self, e: &mut Encoder) {
        e.framing("q", self.field.modulus().to_le_bytes().to_vec())
            .framing("n", (self.degree as u32).to_le_bytes().to_vec())
            .framing("t", (self.t as u16).to_le_bytes().to_vec())
            .framing("k", (self.k as u16).to_le_bytes().to_vec());
    }

    fn read(d: &mut Decoder<'_>) -> Result<Self> {
        let field = PrimeField::new(d.u64()?)?;
        let degree = d.u32()? as usize;
        let t = d.u16()? as usize;
        let k = d.u16()? as usize;
        Self::new(field, degree, t, k)
    }
}

/// `K_i`, coordinates ordered from degree `n` down to degree 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFssKey {
    pub params: PolyFssParams,
    pub index: u16,
    pub coords: FieldVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyEvalShare {
    pub index: u16,
    pub value: FieldElement,
}

/// `p`'s coefficients padded to `n + 1` entries, highest degree first.
fn coefficient_vector(p: &Polynomial, params: &PolyFssParams) -> Result<FieldVector> {
    if p.field() != params.field {
        return Err(Error::MismatchedField(params.field.modulus(), p.field().modulus()));
    }
    if let Some(deg) = p.degree().filter(|&d| d > params.degree) {
        return Err(Error::DegreeTooHigh {
            degree: deg,
            bound: params.degree,
        });
    }
    let mut coords = vec![params.field.zero(); params.degree + 1];
    for (j, &c) in p.coeffs().iter().enumerate().take(params.degree + 1) {
        coords[params.degree - j] = c;
    }
    FieldVector::new(params.field, coords)
}

pub fn gen<R: RngCore + ?Sized>(p: &Polynomial, params: &PolyFssParams, rng: &mut R) -> Result<Vec<PolyFssKey>> {
    let coeffs: Vec<FieldVector> = (1..params.t)
        .map(|_| FieldVector::random(params.field, params.degree + 1, rng))
        .collect();
    gen_with_coeffs(p, params, &coeffs)
}

/// Deterministic Gen: `coeffs[m]` holds the `y^{m+1}` coefficients of
/// `(q_n, ..., q_0)`.
pub fn gen_with_coeffs(p: &Polynomial, params: &PolyFssParams, coeffs: &[FieldVector]) -> Result<Vec<PolyFssKey>> {
    let secret = coefficient_vector(p, params)?;
    Ok(share_vector_with_coeffs(&secret, params.t, params.k, coeffs)?
        .into_iter()
        .map(|s| PolyFssKey {
            params: *params,
            index: s.index,
            coords: s.value,
        })
        .collect())
}

/// `(x^n, ..., x, 1)`.
pub fn monomials(x: FieldElement, degree: usize) -> Result<FieldVector> {
    let mut v: Vec<FieldElement> = std::iter::successors(Some(x.field().one()), |&m| Some(m * x))
        .take(degree + 1)
        .collect();
    v.reverse();
    FieldVector::new(x.field(), v)
}

impl PolyFssKey {
    pub fn eval(&self, x: FieldElement) -> Result<PolyEvalShare> {
        if x.field() != self.params.field {
            return Err(Error::MismatchedField(self.params.field.modulus(), x.field().modulus()));
        }
        Ok(PolyEvalShare {
            index: self.index,
            value: self.coords.dot(&monomials(x, self.params.degree)?)?,
        })
    }
}

/// `Q(0)` from the `t` lowest-indexed shares; extra shares must lie on `Q`.
pub fn rec(shares: &[PolyEvalShare], params: &PolyFssParams) -> Result<FieldElement> {
    if let Some(s) = shares.iter().find(|s| s.index as usize > params.k) {
        return Err(Error::InvalidShareIndex(s.index));
    }
    let shares: Vec<ShamirShare<FieldElement>> = shares
        .iter()
        .map(|s| ShamirShare {
            index: s.index,
            value: s.value,
        })
        .collect();
    reconstruct(&shares, params.t)
}

impl Codec for PolyFssKey {
    const FORMAT: &'static str = "PFS1";

    fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("magic", b"PFS1".to_vec());
        self.params.write(&mut e);
        e.framing("index", self.index.to_le_bytes().to_vec());
        for (j, &c) in self.coords.iter().enumerate() {
            e.element(format!("coord[{}]", self.params.degree - j), c);
        }
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"PFS1")?;
        let params = PolyFssParams::read(&mut d)?;
        let index = d.u16()?;
        if index == 0 || index as usize > params.k {
            return Err(Error::InvalidShareIndex(index));
        }
        let coords = (0..=params.degree)
            .map(|_| d.element(params.field))
            .collect::<Result<Vec<_>>>()?;
        let coords = FieldVector::new(params.field, coords)?;
        d.finish()?;
        Ok(Self { params, index, coords })
    }
}

impl Codec for PolyEvalShare {
    const FORMAT: &'static str = "PFE1";

    fn encode(&self) -> Encoded {
        let f = self.value.field();
        let mut e = Encoder::new();
        e.framing("magic", b"PFE1".to_vec())
            .framing("q", f.modulus().to_le_bytes().to_vec())
            .framing("index", self.index.to_le_bytes().to_vec())
            .element("value", self.value);
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"PFE1")?;
        let field = PrimeField::new(d.u64()?)?;
        let index = d.u16()?;
        let value = d.element(field)?;
        d.finish()?;
        Ok(Self { index, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn subsets(k: usize, t: usize) -> Vec<Vec<usize>> {
        (0u32..1 << k)
            .filter(|m| m.count_ones() as usize == t)
            .map(|m| (0..k).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    #[test]
    fn worked_example() {
        let f = PrimeField::new(11).unwrap();
        let params = PolyFssParams::new(f, 2, 2, 3).unwrap();
        let p = Polynomial::from_values(f, &[1, 3, 2]);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let keys = gen(&p, &params, &mut rng).unwrap();
        let shares: Vec<_> = keys.iter().map(|k| k.eval(f.element(2)).unwrap()).collect();
        for sub in subsets(3, 2) {
            let chosen: Vec<_> = sub.iter().map(|&i| shares[i]).collect();
            assert_eq!(rec(&chosen, &params).unwrap(), f.element(4));
        }
        assert_eq!(rec(&shares, &params).unwrap(), f.element(4));
        assert!(matches!(rec(&shares[..1], &params), Err(Error::NotEnoughShares { .. })));
    }

    #[test]
    fn threshold_one_keys_are_the_polynomial() {
        let f = PrimeField::new(13).unwrap();
        let params = PolyFssParams::new(f, 3, 1, 4).unwrap();
        let p = Polynomial::from_values(f, &[5, 0, 7]);
        let keys = gen(&p, &params, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        let expect = FieldVector::from_values(f, &[0, 7, 0, 5]);
        assert!(keys.iter().all(|k| k.coords == expect));
    }

    #[test]
    fn special_points() {
        let f = PrimeField::new(101).unwrap();
        let params = PolyFssParams::new(f, 4, 3, 5).unwrap();
        let p = Polynomial::from_values(f, &[9, 8, 7, 6, 5]);
        let keys = gen(&p, &params, &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        for k in &keys {
            assert_eq!(k.eval(f.zero()).unwrap().value, k.coords.get(4));
            let sum = k.coords.iter().fold(f.zero(), |a, &c| a + c);
            assert_eq!(k.eval(f.one()).unwrap().value, sum);
        }
        let constant = gen(&Polynomial::from_values(f, &[42]), &params, &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        for j in 0..5 {
            let sh: Vec<_> = constant[1..4]
                .iter()
                .map(|k| ShamirShare { index: k.index, value: k.coords.get(j) })
                .collect();
            assert_eq!(reconstruct(&sh, 3).unwrap(), f.element(if j == 4 { 42 } else { 0 }));
        }
    }

    #[test]
    fn degree_and_field_checks() {
        let f = PrimeField::new(11).unwrap();
        let params = PolyFssParams::new(f, 1, 2, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        assert_eq!(
            gen(&Polynomial::from_values(f, &[1, 2, 3]), &params, &mut rng),
            Err(Error::DegreeTooHigh { degree: 2, bound: 1 })
        );
        assert!(gen(&Polynomial::from_values(f, &[1, 2, 0]), &params, &mut rng).is_ok());
        assert!(PolyFssParams::new(f, 1, 3, 2).is_err());
        assert!(PolyFssParams::new(f, 1, 2, 11).is_err());
        let keys = gen(&Polynomial::from_values(f, &[1]), &params, &mut rng).unwrap();
        let g = PrimeField::new(13).unwrap();
        assert!(keys[0].eval(g.one()).is_err());
    }

    #[test]
    fn eval_is_linear_in_the_key() {
        let f = PrimeField::new((1 << 31) - 1).unwrap();
        let params = PolyFssParams::new(f, 6, 2, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let k1 = gen(&Polynomial::new(f, (0..7).map(|_| f.sample(&mut rng)).collect()).unwrap(), &params, &mut rng).unwrap();
        let k2 = gen(&Polynomial::new(f, (0..7).map(|_| f.sample(&mut rng)).collect()).unwrap(), &params, &mut rng).unwrap();
        let x = f.sample(&mut rng);
        let sum = PolyFssKey { coords: k1[0].coords.checked_add(&k2[0].coords).unwrap(), ..k1[0].clone() };
        assert_eq!(
            sum.eval(x).unwrap().value,
            k1[0].eval(x).unwrap().value + k2[0].eval(x).unwrap().value
        );
    }

    #[test]
    fn posterior_is_uniform_exhaustive() {
        // q = 5, n = 1, t = 2, k = 3: one key is consistent with every polynomial equally often
        let f = PrimeField::new(5).unwrap();
        let params = PolyFssParams::new(f, 1, 2, 3).unwrap();
        for party in 0..3 {
            let mut counts = std::collections::HashMap::<(Vec<u64>, Vec<u64>), u32>::new();
            for a0 in 0..5 {
                for a1 in 0..5 {
                    let p = Polynomial::from_values(f, &[a0, a1]);
                    for c0 in 0..5 {
                        for c1 in 0..5 {
                            let coeffs = [FieldVector::from_values(f, &[c1, c0])];
                            let key = &gen_with_coeffs(&p, &params, &coeffs).unwrap()[party];
                            let kv = key.coords.iter().map(|c| c.value()).collect();
                            *counts.entry((kv, vec![a0, a1])).or_insert(0) += 1;
                        }
                    }
                }
            }
            // 25 key values x 25 polynomials, each pair hit exactly once
            assert_eq!(counts.len(), 625);
            assert!(counts.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn sizes() {
        let f = PrimeField::new((1 << 31) - 1).unwrap();
        let params = PolyFssParams::new(f, 10, 2, 3).unwrap();
        assert!((params.key_size_bits() - 340.99).abs() < 0.01);
        let keys = gen(&Polynomial::from_values(f, &[1]), &params, &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
        assert_eq!(keys[0].encode().payload_bytes() * 8, 352);
        let p0 = PolyFssParams::new(f, 0, 1, 1).unwrap();
        assert_eq!(p0.key_size_bits(), f.log2_order());
    }

    #[test]
    fn codecs_round_trip() {
        let f = PrimeField::new(11).unwrap();
        let params = PolyFssParams::new(f, 2, 2, 3).unwrap();
        let keys = gen(&Polynomial::from_values(f, &[1, 3, 2]), &params, &mut ChaCha20Rng::seed_from_u64(8)).unwrap();
        for k in &keys {
            assert_eq!(&PolyFssKey::decode(&k.to_bytes()).unwrap(), k);
            assert_eq!(&PolyFssKey::from_json_hex(&k.to_json_hex()).unwrap(), k);
            let s = k.eval(f.element(2)).unwrap();
            assert_eq!(PolyEvalShare::decode(&s.to_bytes()).unwrap(), s);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn every_subset_reconstructs(seed in any::<u64>(), degree in 0usize..=10, k in 1usize..=6, t_off in 0usize..6, big in any::<bool>()) {
            let t = 1 + t_off % k;
            let f = PrimeField::new(if big { (1 << 31) - 1 } else { 11 }).unwrap();
            let params = PolyFssParams::new(f, degree, t, k).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = Polynomial::new(f, (0..=degree).map(|_| f.sample(&mut rng)).collect()).unwrap();
            let x = f.sample(&mut rng);
            let keys = gen(&p, &params, &mut rng).unwrap();
            let shares: Vec<_> = keys.iter().map(|key| key.eval(x).unwrap()).collect();
            for sub in subsets(k, t) {
                let chosen: Vec<_> = sub.iter().map(|&i| shares[i]).collect();
                prop_assert_eq!(rec(&chosen, &params).unwrap(), p.eval(x).unwrap());
            }
        }
    }
}
