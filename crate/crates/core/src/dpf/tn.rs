//! t-out-of-n multi-evaluation DPF.
//!
//! The slot vectors `v_j`, slot values `alpha_j` and every PRF key `k_{i,j}`
//! are Shamir-shared at threshold `t`. Party `l` evaluates with its shares
//! `k_{i,j,l}` of all `2ln` keys; because the PRF is linear in the key, the
//! evaluation shares lie on degree `t - 1` polynomials whose value at zero
//! is the n-out-of-n evaluation sum.

use rand::RngCore;

use super::{
    check_share_set, check_shape, finish_rec, index_bytes, nn_key_elements, place_alphas,
    read_index, selected_slots, share_elements, vector_dim, DpfEvalShare, RecOutcome,
};
use crate::bits::BitString;
use crate::encoding::{Codec, Decoder, Encoded, Encoder};
use crate::error::{Error, Result};
use crate::field::{lagrange_coeffs_at, FieldElement, FieldVector, PrimeField};
use crate::khprf::{
    independent_keys_from_vectors, sample_independent_keys, KeyHomomorphicPrf, KhKey,
    KhPrfParams, LinearKhPrf,
};
use crate::shamir::{check_threshold, share_vector_with_coeffs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfTnParams {
    pub ell: usize,
    pub lambda: usize,
    pub n: usize,
    pub t: usize,
    pub prf: KhPrfParams,
}

impl DpfTnParams {
    /// `key_dim` defaults to `2ln + lambda`.
    pub fn new(
        field: PrimeField,
        ell: usize,
        lambda: usize,
        n: usize,
        t: usize,
        key_dim: Option<usize>,
        master_seed: [u8; 32],
    ) -> Result<Self> {
        let prf = KhPrfParams::for_dpf(field, ell, lambda, n, key_dim, master_seed)?;
        Self::with_prf(ell, lambda, n, t, prf)
    }

    pub fn with_prf(ell: usize, lambda: usize, n: usize, t: usize, prf: KhPrfParams) -> Result<Self> {
        check_shape(ell, lambda, n, &prf)?;
        if t < 2 {
            return Err(Error::ThresholdOutOfRange { t, n });
        }
        check_threshold(prf.field, t, n)?;
        Ok(Self { ell, lambda, n, t, prf })
    }

    pub fn field(&self) -> PrimeField {
        self.prf.field
    }

    pub fn vector_dim(&self) -> usize {
        vector_dim(self.ell, self.lambda)
    }

    pub fn slots(&self) -> usize {
        2 * self.ell
    }

    pub fn linear_prf(&self) -> LinearKhPrf {
        LinearKhPrf::new(self.prf.clone())
    }

    /// `log n + (4l^2 + 2 lambda l + 4l + lambda) log q + (2ln + 2l + 1) d log q`.
    pub fn key_size_bits(&self) -> f64 {
        (self.n as f64).log2() + self.key_elements() as f64 * self.field().log2_order()
    }

    /// Field elements in a key, including the `2ln` table entries.
    pub fn key_elements(&self) -> usize {
        nn_key_elements(self.ell, self.lambda, self.prf.key_dim) + 2 * self.ell * self.n * self.prf.key_dim
    }

    /// `log n + (4l + 2 lambda + 1) log q + d log q + |r|`.
    pub fn share_size_bits(&self, r_bits: usize) -> f64 {
        (self.n as f64).log2()
            + share_elements(self.ell, self.lambda, self.prf.key_dim) as f64 * self.field().log2_order()
            + r_bits as f64
    }

    fn write(&self, e: &mut Encoder) {
        e.framing("ell", (self.ell as u16).to_le_bytes().to_vec())
            .framing("lambda", (self.lambda as u16).to_le_bytes().to_vec())
            .framing("n", (self.n as u16).to_le_bytes().to_vec())
            .framing("t", (self.t as u16).to_le_bytes().to_vec())
            .framing("q", self.field().modulus().to_le_bytes().to_vec())
            .framing("d", (self.prf.key_dim as u32).to_le_bytes().to_vec())
            .framing("master_seed", self.prf.master_seed.to_vec());
    }

    fn read(d: &mut Decoder<'_>) -> Result<Self> {
        let ell = d.u16()? as usize;
        let lambda = d.u16()? as usize;
        let n = d.u16()? as usize;
        let t = d.u16()? as usize;
        let field = PrimeField::new(d.u64()?)?;
        let key_dim = d.u32()? as usize;
        let seed = d.array32()?;
        Self::new(field, ell, lambda, n, t, Some(key_dim), seed)
    }
}

/// The randomness consumed by Gen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfTnCoins {
    pub v: Vec<FieldVector>,
    /// Shamir coefficients of `v_j`, indexed `[j][m]` for `X^{m+1}`.
    pub v_coeffs: Vec<Vec<FieldVector>>,
    pub free_alphas: Vec<FieldElement>,
    /// Shamir coefficients of `alpha_j`, indexed `[j][m]`.
    pub alpha_coeffs: Vec<Vec<FieldElement>>,
    /// Key vectors `k_{i,j}`, indexed `[i][j]`; must be linearly independent.
    pub keys: Vec<Vec<FieldVector>>,
    /// Coefficients of the key polynomials `p_{i,j}`, indexed `[i][j][m]`.
    pub key_coeffs: Vec<Vec<Vec<FieldVector>>>,
}

impl DpfTnCoins {
    pub fn sample<R: RngCore + ?Sized>(params: &DpfTnParams, rng: &mut R) -> Result<Self> {
        let f = params.field();
        let (slots, dim, n, t, d) = (params.slots(), params.vector_dim(), params.n, params.t, params.prf.key_dim);
        let v = (0..slots).map(|_| FieldVector::random(f, dim, rng)).collect();
        let v_coeffs = (0..slots)
            .map(|_| (1..t).map(|_| FieldVector::random(f, dim, rng)).collect())
            .collect();
        let free_alphas = (0..slots - 1).map(|_| f.sample(rng)).collect();
        let alpha_coeffs = (0..slots).map(|_| (1..t).map(|_| f.sample(rng)).collect()).collect();
        let flat = sample_independent_keys(&params.prf, n * slots, rng)?;
        let keys = flat
            .chunks(slots)
            .map(|c| c.iter().map(|k| k.vec.clone()).collect())
            .collect();
        let key_coeffs = (0..n)
            .map(|_| {
                (0..slots)
                    .map(|_| (1..t).map(|_| FieldVector::random(f, d, rng)).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            v,
            v_coeffs,
            free_alphas,
            alpha_coeffs,
            keys,
            key_coeffs,
        })
    }
}

/// Party `l`'s key `(l, v_{l,*}, theta, alpha_{l,*}, k_{l,*}, k^{(l)}, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfTnKey {
    pub params: DpfTnParams,
    pub index: u16,
    pub v: Vec<FieldVector>,
    pub theta: FieldVector,
    pub alpha: Vec<FieldElement>,
    /// The party's own original keys `k_{l,0}, ..., k_{l,2l-1}`.
    pub keys: Vec<KhKey>,
    /// `k^{(l)}`: the share at point `l` of every key `k_{i',j'}`, in `(i', j')` order.
    pub table: Vec<KhKey>,
    pub k_sum: KhKey,
}

impl DpfTnKey {
    /// Table entry `k_{i',j',l}` for `i'` in `1..=n`.
    pub fn table_entry(&self, i: usize, j: usize) -> &KhKey {
        &self.table[(i - 1) * self.params.slots() + j]
    }

    pub fn eval(&self, x: &BitString, r: &[u8]) -> Result<DpfEvalShare> {
        self.eval_with(&self.params.linear_prf(), x, r)
    }

    /// `s_{l,0} = sum_j (v_{l,2j+x_j} + sum_i F_1(k_{i,2j+x_j,l}, r))`, likewise `s_{l,1}`.
    pub fn eval_with(&self, prf: &dyn KeyHomomorphicPrf, x: &BitString, r: &[u8]) -> Result<DpfEvalShare> {
        x.check_len(self.params.ell)?;
        let f = self.params.field();
        let slots: Vec<usize> = selected_slots(x).collect();
        let entries: Vec<&KhKey> = slots
            .iter()
            .flat_map(|&s| (1..=self.params.n).map(move |i| self.table_entry(i, s)))
            .collect();
        let outs = prf.eval_many(&entries, r)?;
        let mut s0 = FieldVector::zero(f, self.params.vector_dim());
        let mut s1 = f.zero();
        for &s in &slots {
            s0.add_assign(&self.v[s])?;
            s1 += self.alpha[s];
        }
        for out in &outs {
            s0.add_assign(&out.part1)?;
            s1 += out.part2;
        }
        Ok(DpfEvalShare {
            index: self.index,
            s0,
            s1,
            r: r.to_vec(),
            theta: self.theta.clone(),
            k_sum: self.k_sum.clone(),
        })
    }
}

pub fn gen<R: RngCore + ?Sized>(
    params: &DpfTnParams,
    a: &BitString,
    alpha: FieldElement,
    rng: &mut R,
) -> Result<Vec<DpfTnKey>> {
    a.check_len(params.ell)?;
    let coins = DpfTnCoins::sample(params, rng)?;
    gen_with_coins(params, a, alpha, &coins)
}

fn check_len<T>(what: &str, items: &[T], expected: usize) -> Result<()> {
    if items.len() != expected {
        return Err(Error::ParamViolation(format!(
            "{what}: expected {expected} entries, got {}",
            items.len()
        )));
    }
    Ok(())
}

pub fn gen_with_coins(
    params: &DpfTnParams,
    a: &BitString,
    alpha: FieldElement,
    coins: &DpfTnCoins,
) -> Result<Vec<DpfTnKey>> {
    a.check_len(params.ell)?;
    let f = params.field();
    if alpha.field() != f {
        return Err(Error::MismatchedField(f.modulus(), alpha.field().modulus()));
    }
    let (slots, dim, n, t) = (params.slots(), params.vector_dim(), params.n, params.t);
    check_len("v", &coins.v, slots)?;
    check_len("v_coeffs", &coins.v_coeffs, slots)?;
    check_len("alpha_coeffs", &coins.alpha_coeffs, slots)?;
    check_len("keys", &coins.keys, n)?;
    check_len("key_coeffs", &coins.key_coeffs, n)?;

    // v_{l,j}: Shamir shares of v_j; shares_v[j][l-1]
    let shares_v = (0..slots)
        .map(|j| {
            if coins.v[j].dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: coins.v[j].dim(),
                });
            }
            share_vector_with_coeffs(&coins.v[j], t, n, &coins.v_coeffs[j])
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = FieldVector::sum(f, dim, selected_slots(a).map(|s| &coins.v[s]))?;

    let alphas = place_alphas(a, alpha, &coins.free_alphas)?;
    let shares_alpha = (0..slots)
        .map(|j| {
            let coeffs = coins.alpha_coeffs[j]
                .iter()
                .map(|&c| FieldVector::new(f, vec![c]))
                .collect::<Result<Vec<_>>>()?;
            share_vector_with_coeffs(&FieldVector::new(f, vec![alphas[j]])?, t, n, &coeffs)
        })
        .collect::<Result<Vec<_>>>()?;

    for i in 0..n {
        check_len("keys[i]", &coins.keys[i], slots)?;
        check_len("key_coeffs[i]", &coins.key_coeffs[i], slots)?;
    }
    let flat = independent_keys_from_vectors(&params.prf, coins.keys.iter().flatten().cloned().collect())?;
    let keys: Vec<Vec<KhKey>> = flat.chunks(slots).map(|c| c.to_vec()).collect();

    // key_shares[i][j][l-1] = p_{i,j}(l)
    let key_shares = (0..n)
        .map(|i| {
            (0..slots)
                .map(|j| share_vector_with_coeffs(&keys[i][j].vec, t, n, &coins.key_coeffs[i][j]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut k_sum = params.prf.zero_key();
    for row in &keys {
        for s in selected_slots(a) {
            k_sum = k_sum.checked_add(&row[s])?;
        }
    }

    Ok((0..n)
        .map(|l| DpfTnKey {
            params: params.clone(),
            index: (l + 1) as u16,
            v: (0..slots).map(|j| shares_v[j][l].value.clone()).collect(),
            theta: theta.clone(),
            alpha: (0..slots).map(|j| shares_alpha[j][l].value.get(0)).collect(),
            keys: keys[l].clone(),
            table: key_shares
                .iter()
                .flat_map(|row| row.iter().map(|sh| KhKey { vec: sh[l].value.clone() }))
                .collect(),
            k_sum: k_sum.clone(),
        })
        .collect())
}

/// Options for threshold reconstruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecOptions {
    /// Check shares beyond the `t` lowest indices against the interpolated polynomials.
    pub verify_extras: bool,
}

pub fn rec(params: &DpfTnParams, shares: &[DpfEvalShare]) -> Result<FieldElement> {
    Ok(rec_outcome(&params.linear_prf(), params, shares, RecOptions::default())?.value(params.field()))
}

/// Interpolates `S_0` and `S_1` at zero from the `t` lowest-indexed shares and
/// checks `S_0(0) = theta + F_1(k, r)`.
pub fn rec_outcome(
    prf: &dyn KeyHomomorphicPrf,
    params: &DpfTnParams,
    shares: &[DpfEvalShare],
    options: RecOptions,
) -> Result<RecOutcome> {
    if shares.len() < params.t {
        return Err(Error::NotEnoughShares {
            needed: params.t,
            got: shares.len(),
        });
    }
    check_share_set(shares, params.n, &params.prf)?;
    let f = params.field();
    let mut sorted: Vec<&DpfEvalShare> = shares.iter().collect();
    sorted.sort_by_key(|s| s.index);
    let (basis, extras) = sorted.split_at(params.t);
    let points: Vec<FieldElement> = basis.iter().map(|s| f.embed(s.index as usize)).collect();

    let at = |target: FieldElement| -> Result<(FieldVector, FieldElement)> {
        let c = lagrange_coeffs_at(&points, target)?;
        let mut s0 = FieldVector::zero(f, params.vector_dim());
        let mut s1 = f.zero();
        for (share, &cj) in basis.iter().zip(&c) {
            s0.add_assign(&share.s0.scale(cj)?)?;
            s1 += share.s1 * cj;
        }
        Ok((s0, s1))
    };

    if options.verify_extras {
        for extra in extras {
            let (s0, s1) = at(f.embed(extra.index as usize))?;
            if s0 != extra.s0 || s1 != extra.s1 {
                return Err(Error::InconsistentShares);
            }
        }
    }
    let (s0, s1) = at(f.zero())?;
    finish_rec(prf, &s0, s1, basis[0])
}

impl Codec for DpfTnKey {
    const FORMAT: &'static str = "DPFT";

    fn encode(&self) -> Encoded {
        let p = &self.params;
        let mut e = Encoder::new();
        e.framing("magic", b"DPFT".to_vec());
        p.write(&mut e);
        e.payload("index", index_bytes(self.index, p.n as u16));
        for (j, v) in self.v.iter().enumerate() {
            e.vector(format!("v[{j}]"), v);
        }
        e.vector("theta", &self.theta);
        for (j, &x) in self.alpha.iter().enumerate() {
            e.element(format!("alpha[{j}]"), x);
        }
        for (j, k) in self.keys.iter().enumerate() {
            e.vector(format!("key[{j}]"), &k.vec);
        }
        e.vector("k_sum", &self.k_sum.vec);
        for (idx, k) in self.table.iter().enumerate() {
            let (i, j) = (idx / p.slots() + 1, idx % p.slots());
            e.vector(format!("table[{i}][{j}]"), &k.vec);
        }
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"DPFT")?;
        let params = DpfTnParams::read(&mut d)?;
        let index = read_index(&mut d, params.n as u16)?;
        if index == 0 || index as usize > params.n {
            return Err(Error::InvalidPartyIndex(index as usize));
        }
        let f = params.field();
        let (slots, dim, kd) = (params.slots(), params.vector_dim(), params.prf.key_dim);
        let v = (0..slots).map(|_| d.vector_of(f, dim)).collect::<Result<_>>()?;
        let theta = d.vector_of(f, dim)?;
        let alpha = (0..slots).map(|_| d.element(f)).collect::<Result<_>>()?;
        let mut key = || -> Result<KhKey> { Ok(KhKey { vec: d.vector_of(f, kd)? }) };
        let keys = (0..slots).map(|_| key()).collect::<Result<_>>()?;
        let k_sum = key()?;
        let table = (0..slots * params.n).map(|_| key()).collect::<Result<_>>()?;
        d.finish()?;
        Ok(Self {
            params,
            index,
            v,
            theta,
            alpha,
            keys,
            table,
            k_sum,
        })
    }
}
