//! Key-homomorphic pseudorandom functions with split output.
//!
//! A key-homomorphic PRF here maps a key `k` in `F_q^d` and an input `r` to a
//! pair `(F_1(k, r), F_2(k, r))` in `F_q^{m-1} x F_q` and satisfies
//! `F(k1 + k2, r) = F(k1, r) + F(k2, r)` and `F(c k, r) = c F(k, r)`.
//!
//! [`LinearKhPrf`] realizes the laws with a public pseudorandom matrix `M_r`
//! per input. Anyone holding a few outputs can solve for the key, so it is
//! **not** a secure PRF. It is the correctness oracle behind the
//! [`KeyHomomorphicPrf`] trait; a secure instantiation can be plugged in
//! through the same interface.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{EchelonBasis, FieldElement, FieldVector, PrimeField};
use crate::sampling::uniform_below;

const MATRIX_DOMAIN: &[u8] = b"fsskit/linear-khprf/matrix/v1";

/// Public parameters of a key-homomorphic PRF instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KhPrfParams {
    pub field: PrimeField,
    /// Key dimension `d`.
    pub key_dim: usize,
    /// Output dimension `m`; the first `m - 1` coordinates form `F_1`.
    pub out_dim: usize,
    pub master_seed: [u8; 32],
}

impl KhPrfParams {
    pub fn new(field: PrimeField, key_dim: usize, out_dim: usize, master_seed: [u8; 32]) -> Result<Self> {
        if key_dim == 0 || out_dim < 2 {
            return Err(Error::ParamViolation(format!(
                "key dimension {key_dim} and output dimension {out_dim} must be at least 1 and 2"
            )));
        }
        Ok(Self {
            field,
            key_dim,
            out_dim,
            master_seed,
        })
    }

    /// Default key dimension for a DPF with `2 l n` independent keys: `2 l n + lambda`.
    ///
    /// Every nonzero key has additive order `q`, so the margin condition
    /// `q^{2ln} / q^d < 1 - 1/lambda` is met by `d >= 2 l n + lambda` whenever
    /// `q >= 2`. The dimension still grows with `n`.
    pub fn default_key_dim(ell: usize, lambda: usize, n: usize) -> usize {
        2 * ell * n + lambda
    }

    /// Parameters sized for a point-function DPF over `{0,1}^ell` with `n` parties.
    ///
    /// `key_dim` overrides the default and must be at least `2 l n + 1`.
    pub fn for_dpf(
        field: PrimeField,
        ell: usize,
        lambda: usize,
        n: usize,
        key_dim: Option<usize>,
        master_seed: [u8; 32],
    ) -> Result<Self> {
        let needed = 2 * ell * n + 1;
        let d = key_dim.unwrap_or_else(|| Self::default_key_dim(ell, lambda, n));
        if d < needed {
            return Err(Error::ParamViolation(format!(
                "key dimension {d} cannot hold {} independent keys",
                needed - 1
            )));
        }
        Self::new(field, d, 2 * ell + lambda + 1, master_seed)
    }

    pub fn part1_dim(&self) -> usize {
        self.out_dim - 1
    }

    pub fn zero_key(&self) -> KhKey {
        KhKey {
            vec: FieldVector::zero(self.field, self.key_dim),
        }
    }

    pub fn random_key<R: RngCore + ?Sized>(&self, rng: &mut R) -> KhKey {
        KhKey {
            vec: FieldVector::random(self.field, self.key_dim, rng),
        }
    }

    pub fn key(&self, vec: FieldVector) -> Result<KhKey> {
        self.check_key_vec(&vec)?;
        Ok(KhKey { vec })
    }

    fn check_key_vec(&self, vec: &FieldVector) -> Result<()> {
        if vec.field() != self.field {
            return Err(Error::MismatchedField(self.field.modulus(), vec.field().modulus()));
        }
        if vec.dim() != self.key_dim {
            return Err(Error::DimensionMismatch {
                expected: self.key_dim,
                got: vec.dim(),
            });
        }
        Ok(())
    }
}

/// A PRF key, an element of `F_q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KhKey {
    pub vec: FieldVector,
}

impl KhKey {
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            vec: self.vec.checked_add(&other.vec)?,
        })
    }

    pub fn scale(&self, c: FieldElement) -> Result<Self> {
        Ok(Self {
            vec: self.vec.scale(c)?,
        })
    }
}

/// `(F_1, F_2)`: a vector of dimension `m - 1` and a single element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KhOutput {
    pub part1: FieldVector,
    pub part2: FieldElement,
}

impl KhOutput {
    pub fn zero(params: &KhPrfParams) -> Self {
        Self {
            part1: FieldVector::zero(params.field, params.part1_dim()),
            part2: params.field.zero(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            part1: self.part1.checked_add(&other.part1)?,
            part2: self.part2.checked_add(other.part2)?,
        })
    }

    pub fn scale(&self, c: FieldElement) -> Result<Self> {
        Ok(Self {
            part1: self.part1.scale(c)?,
            part2: self.part2.checked_mul(c)?,
        })
    }
}

/// A PRF family whose key space is the `F_q`-vector space `F_q^d`.
pub trait KeyHomomorphicPrf: Send + Sync {
    fn params(&self) -> &KhPrfParams;

    fn eval(&self, key: &KhKey, r: &[u8]) -> Result<KhOutput>;

    /// Evaluates several keys on one input.
    fn eval_many(&self, keys: &[&KhKey], r: &[u8]) -> Result<Vec<KhOutput>> {
        keys.iter().map(|k| self.eval(k, r)).collect()
    }

    /// Whether the instantiation is believed to be a secure PRF.
    fn is_secure(&self) -> bool;
}

/// Exactly key-homomorphic reference PRF `F(k, r) = M_r k`. Insecure.
#[derive(Clone, Debug)]
pub struct LinearKhPrf {
    params: KhPrfParams,
}

impl LinearKhPrf {
    pub fn new(params: KhPrfParams) -> Self {
        Self { params }
    }

    /// The `m x d` matrix for input `r`, stored as `d` columns of length `m`.
    ///
    /// Entries are rejection-sampled from ChaCha20 seeded with
    /// `SHA-256(domain || master_seed || len(r) || r)`, filled column by column.
    pub fn matrix_columns(&self, r: &[u8]) -> Vec<Vec<FieldElement>> {
        let p = &self.params;
        let seed: [u8; 32] = Sha256::new()
            .chain_update(MATRIX_DOMAIN)
            .chain_update(p.master_seed)
            .chain_update((r.len() as u64).to_le_bytes())
            .chain_update(r)
            .finalize()
            .into();
        let mut rng = ChaCha20Rng::from_seed(seed);
        let q = p.field.modulus();
        (0..p.key_dim)
            .map(|_| {
                (0..p.out_dim)
                    .map(|_| p.field.element(uniform_below(&mut rng, q)))
                    .collect()
            })
            .collect()
    }

    fn apply(&self, columns: &[Vec<FieldElement>], key: &KhKey) -> Result<KhOutput> {
        let p = &self.params;
        p.check_key_vec(&key.vec)?;
        let mut out = vec![p.field.zero(); p.out_dim];
        for (col, &k) in columns.iter().zip(key.vec.coords()) {
            if k.is_zero() {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(col) {
                *o += m * k;
            }
        }
        let part2 = out.pop().expect("out_dim >= 2");
        Ok(KhOutput {
            part1: FieldVector::new(p.field, out)?,
            part2,
        })
    }
}

impl KeyHomomorphicPrf for LinearKhPrf {
    fn params(&self) -> &KhPrfParams {
        &self.params
    }

    fn eval(&self, key: &KhKey, r: &[u8]) -> Result<KhOutput> {
        self.params.check_key_vec(&key.vec)?;
        self.apply(&self.matrix_columns(r), key)
    }

    fn eval_many(&self, keys: &[&KhKey], r: &[u8]) -> Result<Vec<KhOutput>> {
        let columns = self.matrix_columns(r);
        keys.iter().map(|k| self.apply(&columns, k)).collect()
    }

    fn is_secure(&self) -> bool {
        false
    }
}

/// `count` uniformly random keys conditioned on linear independence.
///
/// Each key is resampled while it lies in the span of the previous ones; since
/// every prefix leaves the same number of admissible choices, the result is
/// uniform over independent tuples.
pub fn sample_independent_keys<R: RngCore + ?Sized>(
    params: &KhPrfParams,
    count: usize,
    rng: &mut R,
) -> Result<Vec<KhKey>> {
    if count > params.key_dim {
        return Err(Error::TooManyKeys {
            requested: count,
            dim: params.key_dim,
        });
    }
    let mut basis = EchelonBasis::new(params.field, params.key_dim);
    let mut keys = Vec::with_capacity(count);
    while keys.len() < count {
        let k = params.random_key(rng);
        if basis.insert(&k.vec)? {
            keys.push(k);
        }
    }
    Ok(keys)
}

/// Validates that caller-supplied key vectors are independent.
pub fn independent_keys_from_vectors(params: &KhPrfParams, vectors: Vec<FieldVector>) -> Result<Vec<KhKey>> {
    if vectors.len() > params.key_dim {
        return Err(Error::TooManyKeys {
            requested: vectors.len(),
            dim: params.key_dim,
        });
    }
    let mut basis = EchelonBasis::new(params.field, params.key_dim);
    vectors
        .into_iter()
        .map(|v| {
            params.check_key_vec(&v)?;
            if !basis.insert(&v)? {
                return Err(Error::DependentKeys);
            }
            Ok(KhKey { vec: v })
        })
        .collect()
}
