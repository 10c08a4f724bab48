//! n-out-of-n multi-evaluation DPF.
//!
//! Every party holds additive shares of the slot vectors `v_j` and slot
//! values `alpha_j`, its own `2l` PRF keys, and the public check values
//! `theta = sum_j v_{2j+a_j}` and `k = sum_i sum_j k_{i,2j+a_j}`.
//! Reconstruction accepts exactly when the evaluation point selects the same
//! slots as `a`, up to a collision probability of `q^{-lambda}`.

use rand::RngCore;

use super::{
    check_share_set, check_shape, finish_rec, nn_key_elements, place_alphas,
    selected_slots, share_elements, vector_dim, DpfEvalShare, RecOutcome,
};
use crate::bits::BitString;
use crate::encoding::{Codec, Decoder, Encoded, Encoder};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, PrimeField};
use crate::khprf::{
    independent_keys_from_vectors, sample_independent_keys, KeyHomomorphicPrf, KhKey,
    KhPrfParams, LinearKhPrf,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfNnParams {
    pub ell: usize,
    pub lambda: usize,
    pub n: usize,
    pub prf: KhPrfParams,
}

impl DpfNnParams {
    /// `key_dim` defaults to `2ln + lambda`.
    pub fn new(
        field: PrimeField,
        ell: usize,
        lambda: usize,
        n: usize,
        key_dim: Option<usize>,
        master_seed: [u8; 32],
    ) -> Result<Self> {
        let prf = KhPrfParams::for_dpf(field, ell, lambda, n, key_dim, master_seed)?;
        Self::with_prf(ell, lambda, n, prf)
    }

    pub fn with_prf(ell: usize, lambda: usize, n: usize, prf: KhPrfParams) -> Result<Self> {
        check_shape(ell, lambda, n, &prf)?;
        Ok(Self { ell, lambda, n, prf })
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

    /// The bundled reference PRF for these parameters.
    pub fn linear_prf(&self) -> LinearKhPrf {
        LinearKhPrf::new(self.prf.clone())
    }

    /// `(4l^2 + 2 lambda l + 4l + lambda) log q + (2l + 1) d log q`.
    ///
    /// The expression does not involve `n`, but the default key dimension
    /// `d = 2ln + lambda` does, so key size grows with the party count.
    pub fn key_size_bits(&self) -> f64 {
        nn_key_elements(self.ell, self.lambda, self.prf.key_dim) as f64 * self.field().log2_order()
    }

    /// `(4l + 2 lambda + 1) log q + d log q + |r|`.
    pub fn share_size_bits(&self, r_bits: usize) -> f64 {
        share_elements(self.ell, self.lambda, self.prf.key_dim) as f64 * self.field().log2_order()
            + r_bits as f64
    }

    fn check_point(&self, x: &BitString) -> Result<()> {
        x.check_len(self.ell)
    }

    fn write(&self, e: &mut Encoder) {
        e.framing("ell", (self.ell as u16).to_le_bytes().to_vec())
            .framing("lambda", (self.lambda as u16).to_le_bytes().to_vec())
            .framing("n", (self.n as u16).to_le_bytes().to_vec())
            .framing("q", self.field().modulus().to_le_bytes().to_vec())
            .framing("d", (self.prf.key_dim as u32).to_le_bytes().to_vec())
            .framing("master_seed", self.prf.master_seed.to_vec());
    }

    fn read(d: &mut Decoder<'_>) -> Result<Self> {
        let ell = d.u16()? as usize;
        let lambda = d.u16()? as usize;
        let n = d.u16()? as usize;
        let field = PrimeField::new(d.u64()?)?;
        let key_dim = d.u32()? as usize;
        let seed = d.array32()?;
        Self::new(field, ell, lambda, n, Some(key_dim), seed)
    }
}

/// The randomness consumed by Gen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfNnCoins {
    /// `v_0, ..., v_{2l-1}`.
    pub v: Vec<FieldVector>,
    /// Additive shares of parties `1..n-1`, indexed `[i][j]`; party `n` gets the remainder.
    pub v_shares: Vec<Vec<FieldVector>>,
    /// The `2l - 1` slot values not forced by the sum constraint, in slot order.
    pub free_alphas: Vec<FieldElement>,
    /// Additive shares of `alpha_j` for parties `1..n-1`, indexed `[i][j]`.
    pub alpha_shares: Vec<Vec<FieldElement>>,
    /// PRF key vectors `k_{i,j}`, indexed `[i][j]`; must be linearly independent.
    pub keys: Vec<Vec<FieldVector>>,
}

impl DpfNnCoins {
    pub fn sample<R: RngCore + ?Sized>(params: &DpfNnParams, rng: &mut R) -> Result<Self> {
        let f = params.field();
        let (slots, dim, n) = (params.slots(), params.vector_dim(), params.n);
        let v = (0..slots).map(|_| FieldVector::random(f, dim, rng)).collect();
        let v_shares = (1..n)
            .map(|_| (0..slots).map(|_| FieldVector::random(f, dim, rng)).collect())
            .collect();
        let free_alphas = (0..slots - 1).map(|_| f.sample(rng)).collect();
        let alpha_shares = (1..n).map(|_| (0..slots).map(|_| f.sample(rng)).collect()).collect();
        let flat = sample_independent_keys(&params.prf, n * slots, rng)?;
        let keys = flat
            .chunks(slots)
            .map(|c| c.iter().map(|k| k.vec.clone()).collect())
            .collect();
        Ok(Self {
            v,
            v_shares,
            free_alphas,
            alpha_shares,
            keys,
        })
    }
}

/// Party `i`'s key `f_i = (v_{i,*}, theta, alpha_{i,*}, k_{i,*}, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpfNnKey {
    pub params: DpfNnParams,
    pub index: u16,
    pub v: Vec<FieldVector>,
    pub theta: FieldVector,
    pub alpha: Vec<FieldElement>,
    pub keys: Vec<KhKey>,
    pub k_sum: KhKey,
}

pub fn gen<R: RngCore + ?Sized>(
    params: &DpfNnParams,
    a: &BitString,
    alpha: FieldElement,
    rng: &mut R,
) -> Result<Vec<DpfNnKey>> {
    params.check_point(a)?;
    let coins = DpfNnCoins::sample(params, rng)?;
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

/// Deterministic Gen from explicit coins.
pub fn gen_with_coins(
    params: &DpfNnParams,
    a: &BitString,
    alpha: FieldElement,
    coins: &DpfNnCoins,
) -> Result<Vec<DpfNnKey>> {
    params.check_point(a)?;
    let f = params.field();
    if alpha.field() != f {
        return Err(Error::MismatchedField(f.modulus(), alpha.field().modulus()));
    }
    let (slots, dim, n) = (params.slots(), params.vector_dim(), params.n);
    check_len("v", &coins.v, slots)?;
    check_len("v_shares", &coins.v_shares, n - 1)?;
    check_len("alpha_shares", &coins.alpha_shares, n - 1)?;
    check_len("keys", &coins.keys, n)?;
    for i in 0..n - 1 {
        check_len("v_shares[i]", &coins.v_shares[i], slots)?;
        check_len("alpha_shares[i]", &coins.alpha_shares[i], slots)?;
    }
    for v in coins.v.iter().chain(coins.v_shares.iter().flatten()) {
        if v.dim() != dim || v.field() != f {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
    }

    // v_{n,j} = v_j - sum_{i<n} v_{i,j}
    let mut v_shares = coins.v_shares.clone();
    let last_v = (0..slots)
        .map(|j| {
            v_shares
                .iter()
                .try_fold(coins.v[j].clone(), |acc, row| acc.checked_sub(&row[j]))
        })
        .collect::<Result<Vec<_>>>()?;
    v_shares.push(last_v);

    let theta = FieldVector::sum(f, dim, selected_slots(a).map(|s| &coins.v[s]))?;

    let alphas = place_alphas(a, alpha, &coins.free_alphas)?;
    let mut alpha_shares = coins.alpha_shares.clone();
    let last_alpha = (0..slots)
        .map(|j| alpha_shares.iter().fold(alphas[j], |acc, row| acc - row[j]))
        .collect();
    alpha_shares.push(last_alpha);

    for row in &coins.keys {
        check_len("keys[i]", row, slots)?;
    }
    let flat = independent_keys_from_vectors(&params.prf, coins.keys.iter().flatten().cloned().collect())?;
    let keys: Vec<Vec<KhKey>> = flat.chunks(slots).map(|c| c.to_vec()).collect();

    let mut k_sum = params.prf.zero_key();
    for row in &keys {
        for s in selected_slots(a) {
            k_sum = k_sum.checked_add(&row[s])?;
        }
    }

    Ok((0..n)
        .map(|i| DpfNnKey {
            params: params.clone(),
            index: (i + 1) as u16,
            v: v_shares[i].clone(),
            theta: theta.clone(),
            alpha: alpha_shares[i].clone(),
            keys: keys[i].clone(),
            k_sum: k_sum.clone(),
        })
        .collect())
}

impl DpfNnKey {
    /// Evaluates with the bundled reference PRF.
    pub fn eval(&self, x: &BitString, r: &[u8]) -> Result<DpfEvalShare> {
        self.eval_with(&self.params.linear_prf(), x, r)
    }

    /// `s_{i,0} = sum_j v_{i,2j+x_j} + F_1(k_{i,2j+x_j}, r)` and likewise `s_{i,1}` with `F_2`.
    pub fn eval_with(&self, prf: &dyn KeyHomomorphicPrf, x: &BitString, r: &[u8]) -> Result<DpfEvalShare> {
        self.params.check_point(x)?;
        let f = self.params.field();
        let slots: Vec<usize> = selected_slots(x).collect();
        let keys: Vec<&KhKey> = slots.iter().map(|&s| &self.keys[s]).collect();
        let outs = prf.eval_many(&keys, r)?;
        let mut s0 = FieldVector::zero(f, self.params.vector_dim());
        let mut s1 = f.zero();
        for (&s, out) in slots.iter().zip(&outs) {
            s0.add_assign(&self.v[s])?;
            s0.add_assign(&out.part1)?;
            s1 = s1 + self.alpha[s] + out.part2;
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

/// Reconstruction with the bundled reference PRF.
pub fn rec(params: &DpfNnParams, shares: &[DpfEvalShare]) -> Result<FieldElement> {
    Ok(rec_outcome(&params.linear_prf(), params, shares)?.value(params.field()))
}

/// Sums all `n` shares and checks `sum s_{i,0} = theta + F_1(k, r)`.
pub fn rec_outcome(
    prf: &dyn KeyHomomorphicPrf,
    params: &DpfNnParams,
    shares: &[DpfEvalShare],
) -> Result<RecOutcome> {
    if shares.len() != params.n {
        return Err(Error::ShareSetInvalid(format!(
            "expected {} shares, got {}",
            params.n,
            shares.len()
        )));
    }
    check_share_set(shares, params.n, &params.prf)?;
    let f = params.field();
    let s0 = FieldVector::sum(f, params.vector_dim(), shares.iter().map(|s| &s.s0))?;
    let s1 = shares.iter().fold(f.zero(), |acc, s| acc + s.s1);
    finish_rec(prf, &s0, s1, &shares[0])
}

impl Codec for DpfNnKey {
    const FORMAT: &'static str = "DPF1";

    fn encode(&self) -> Encoded {
        let mut e = Encoder::new();
        e.framing("magic", b"DPF1".to_vec());
        self.params.write(&mut e);
        e.framing("index", self.index.to_le_bytes().to_vec());
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
        e.finish()
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        d.expect_magic(b"DPF1")?;
        let params = DpfNnParams::read(&mut d)?;
        let index = d.u16()?;
        if index == 0 || index as usize > params.n {
            return Err(Error::InvalidPartyIndex(index as usize));
        }
        let f = params.field();
        let (slots, dim, kd) = (params.slots(), params.vector_dim(), params.prf.key_dim);
        let v = (0..slots).map(|_| d.vector_of(f, dim)).collect::<Result<_>>()?;
        let theta = d.vector_of(f, dim)?;
        let alpha = (0..slots).map(|_| d.element(f)).collect::<Result<_>>()?;
        let keys = (0..slots)
            .map(|_| Ok(KhKey { vec: d.vector_of(f, kd)? }))
            .collect::<Result<_>>()?;
        let k_sum = KhKey { vec: d.vector_of(f, kd)? };
        d.finish()?;
        Ok(Self {
            params,
            index,
            v,
            theta,
            alpha,
            keys,
            k_sum,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpf::ShareFormat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params(q: u64, ell: usize, lambda: usize, n: usize) -> DpfNnParams {
        DpfNnParams::new(PrimeField::new(q).unwrap(), ell, lambda, n, None, [3u8; 32]).unwrap()
    }

    fn eval_all(keys: &[DpfNnKey], x: &BitString, r: &[u8]) -> Vec<DpfEvalShare> {
        keys.iter().map(|k| k.eval(x, r).unwrap()).collect()
    }

    #[test]
    fn construction_identities() {
        let p = params(13, 3, 2, 3);
        let f = p.field();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a: BitString = "101".parse().unwrap();
        let alpha = f.element(9);
        let coins = DpfNnCoins::sample(&p, &mut rng).unwrap();
        let keys = gen_with_coins(&p, &a, alpha, &coins).unwrap();
        for j in 0..p.slots() {
            let sum = FieldVector::sum(f, p.vector_dim(), keys.iter().map(|k| &k.v[j])).unwrap();
            assert_eq!(sum, coins.v[j]);
        }
        let theta = FieldVector::sum(f, p.vector_dim(), selected_slots(&a).map(|s| &coins.v[s])).unwrap();
        assert!(keys.iter().all(|k| k.theta == theta && k.k_sum == keys[0].k_sum));
        let alpha_total = keys
            .iter()
            .flat_map(|k| selected_slots(&a).map(move |s| k.alpha[s]))
            .fold(f.zero(), |acc, x| acc + x);
        assert_eq!(alpha_total, alpha);
        let mut k = p.prf.zero_key();
        for key in &keys {
            for s in selected_slots(&a) {
                k = k.checked_add(&key.keys[s]).unwrap();
            }
        }
        assert_eq!(k, keys[0].k_sum);
    }

    #[test]
    fn correct_at_a_and_zero_elsewhere() {
        let p = params((1 << 31) - 1, 2, 2, 3);
        let f = p.field();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..20 {
            let a = BitString::random(2, &mut rng);
            let alpha = f.sample(&mut rng);
            let keys = gen(&p, &a, alpha, &mut rng).unwrap();
            for x in BitString::all(2) {
                let r: [u8; 16] = rand::Rng::gen(&mut rng);
                let out = rec(&p, &eval_all(&keys, &x, &r)).unwrap();
                assert_eq!(out, if x == a { alpha } else { f.zero() });
            }
        }
    }

    #[test]
    fn zero_payload() {
        let p = params(5, 1, 1, 2);
        let f = p.field();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a: BitString = "1".parse().unwrap();
        let keys = gen(&p, &a, f.zero(), &mut rng).unwrap();
        let shares = eval_all(&keys, &a, b"r");
        assert_eq!(rec_outcome(&p.linear_prf(), &p, &shares).unwrap(), RecOutcome::Accepted(f.zero()));
    }

    #[test]
    fn eval_matches_summed_key() {
        let p = params(101, 3, 2, 2);
        let f = p.field();
        let prf = p.linear_prf();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let keys = gen(&p, &"011".parse().unwrap(), f.element(5), &mut rng).unwrap();
        let x: BitString = "110".parse().unwrap();
        for key in &keys {
            let share = key.eval(&x, b"input").unwrap();
            assert_eq!(share, key.eval(&x, b"input").unwrap());
            let mut ksum = p.prf.zero_key();
            let mut vsum = FieldVector::zero(f, p.vector_dim());
            for s in selected_slots(&x) {
                ksum = ksum.checked_add(&key.keys[s]).unwrap();
                vsum.add_assign(&key.v[s]).unwrap();
            }
            let out = prf.eval(&ksum, b"input").unwrap();
            assert_eq!(share.s0, vsum.checked_add(&out.part1).unwrap());
        }
    }

    #[test]
    fn single_bit_selects_one_slot() {
        let p = params(7, 1, 1, 2);
        let f = p.field();
        let prf = p.linear_prf();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let keys = gen(&p, &"0".parse().unwrap(), f.element(3), &mut rng).unwrap();
        let x: BitString = "1".parse().unwrap();
        let share = keys[0].eval(&x, b"r").unwrap();
        let out = prf.eval(&keys[0].keys[1], b"r").unwrap();
        assert_eq!(share.s0, keys[0].v[1].checked_add(&out.part1).unwrap());
        assert_eq!(share.s1, keys[0].alpha[1] + out.part2);
    }

    #[test]
    fn sum_identity_matches_slot_sums() {
        // u_j = v_j + F_1(k_j, r) with k_j = sum_i k_{i,j}: the check passes iff
        // sum_j u_{2j+x_j} = sum_j u_{2j+a_j}.
        let p = params(5, 2, 2, 2);
        let f = p.field();
        let prf = p.linear_prf();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for _ in 0..200 {
            let a = BitString::random(2, &mut rng);
            let coins = DpfNnCoins::sample(&p, &mut rng).unwrap();
            let keys = gen_with_coins(&p, &a, f.element(2), &coins).unwrap();
            let r: [u8; 16] = rand::Rng::gen(&mut rng);
            let u: Vec<FieldVector> = (0..p.slots())
                .map(|j| {
                    let kj = keys.iter().fold(p.prf.zero_key(), |acc, k| acc.checked_add(&k.keys[j]).unwrap());
                    coins.v[j].checked_add(&prf.eval(&kj, &r).unwrap().part1).unwrap()
                })
                .collect();
            let target = FieldVector::sum(f, p.vector_dim(), selected_slots(&a).map(|s| &u[s])).unwrap();
            for x in BitString::all(2) {
                let got = FieldVector::sum(f, p.vector_dim(), selected_slots(&x).map(|s| &u[s])).unwrap();
                let accepted = matches!(
                    rec_outcome(&prf, &p, &eval_all(&keys, &x, &r)).unwrap(),
                    RecOutcome::Accepted(_)
                );
                assert_eq!(accepted, got == target);
            }
        }
    }

    #[test]
    fn rec_rejects_malformed_sets() {
        let p = params(11, 1, 1, 3);
        let f = p.field();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let a: BitString = "1".parse().unwrap();
        let keys = gen(&p, &a, f.one(), &mut rng).unwrap();
        let shares = eval_all(&keys, &a, b"r");
        assert!(matches!(rec(&p, &shares[..2]), Err(Error::ShareSetInvalid(_))));
        let mut dup = shares.clone();
        dup[2] = dup[1].clone();
        assert!(matches!(rec(&p, &dup), Err(Error::ShareSetInvalid(_))));
        let mut mixed = shares.clone();
        mixed[2] = keys[2].eval(&a, b"other").unwrap();
        assert!(matches!(rec(&p, &mixed), Err(Error::ShareSetInvalid(_))));
        assert_eq!(
            keys[0].eval(&"10".parse().unwrap(), b"r"),
            Err(Error::LengthMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn dependent_coin_keys_rejected() {
        let p = params(5, 1, 1, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let mut coins = DpfNnCoins::sample(&p, &mut rng).unwrap();
        coins.keys[1][1] = coins.keys[0][0].clone();
        assert_eq!(
            gen_with_coins(&p, &"0".parse().unwrap(), p.field().one(), &coins),
            Err(Error::DependentKeys)
        );
    }

    #[test]
    fn size_formula_and_audit() {
        let p = params(2, 1, 1, 2);
        assert_eq!(p.prf.key_dim, 5);
        assert_eq!(p.key_size_bits(), 26.0);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let keys = gen(&p, &"1".parse().unwrap(), p.field().one(), &mut rng).unwrap();
        let enc = keys[0].encode();
        assert_eq!(enc.payload_bytes() * 8, 26 * 8);
        let share = keys[0].eval(&"1".parse().unwrap(), &[0u8; 16]).unwrap();
        assert_eq!(share.encode(ShareFormat::NOfN).payload_bytes(), share_elements(1, 1, 5) + 16);
    }

    #[test]
    fn key_codec_round_trip() {
        let p = params((1 << 31) - 1, 2, 2, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let keys = gen(&p, &"01".parse().unwrap(), p.field().element(77), &mut rng).unwrap();
        for k in &keys {
            assert_eq!(&DpfNnKey::decode(&k.to_bytes()).unwrap(), k);
            assert_eq!(&DpfNnKey::from_json_hex(&k.to_json_hex()).unwrap(), k);
        }
        let share = keys[1].eval(&"11".parse().unwrap(), b"xyz").unwrap();
        let bytes = share.encode(ShareFormat::NOfN).to_bytes();
        assert_eq!(DpfEvalShare::decode(&bytes).unwrap(), (share, ShareFormat::NOfN));
        assert!(DpfNnKey::decode(&bytes).is_err());
    }
}
