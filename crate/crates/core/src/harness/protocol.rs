//! Scheme configurations and protocol runs over the in-memory network.
//!
//! A run deals keys, feeds inputs from the environment, lets each party act on
//! what it received, and finishes with Carol or the reconstructor. Randomness
//! comes either from a seeded generator or from an explicit digit vector, which
//! is how exact experiments enumerate the dealer's coins.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::transcript::{Actor, Label, Transcript};
use super::transport::Network;
use crate::bits::BitString;
use crate::dpf::{self, DpfEvalShare, DpfNnCoins, DpfNnKey, DpfNnParams, DpfTnCoins, DpfTnKey, DpfTnParams, ShareFormat};
use crate::encoding::Codec;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldVector, Polynomial, PrimeField};
use crate::fpcds::{self, CarolOutput, FpcdsCoins, FpcdsMessage, FpcdsShare};
use crate::fss::{self, FssKey, PointCds, PointCondition};
use crate::group::{AbelianGroup, GroupElement};
use crate::khprf::independent_keys_from_vectors;
use crate::poly_fss::{self, PolyEvalShare, PolyFssKey, PolyFssParams};
use crate::shamir::{self, ShamirShare};

fn default_r_len() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShamirConfig {
    pub q: u64,
    pub t: usize,
    pub n: usize,
    pub secret: u64,
    /// Parties that send their share to the reconstructor; all by default.
    #[serde(default)]
    pub responders: Option<Vec<u16>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPoint {
    pub x: String,
    /// Hex PRF input; sampled when absent.
    #[serde(default)]
    pub r: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpfConfig {
    pub q: u64,
    pub ell: usize,
    pub lambda: usize,
    pub n: usize,
    /// Threshold; required for `dpf_tn`, rejected for `dpf_nn`.
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub key_dim: Option<usize>,
    /// Hex PRF master seed; all zeros when absent.
    #[serde(default)]
    pub master_seed: Option<String>,
    pub a: String,
    pub alpha: u64,
    #[serde(default)]
    pub evals: Vec<EvalPoint>,
    #[serde(default)]
    pub responders: Option<Vec<u16>>,
    #[serde(default = "default_r_len")]
    pub r_len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdsInput {
    pub alpha: String,
    pub beta: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpcdsConfig {
    pub group: String,
    pub a: String,
    pub b: String,
    pub s: u64,
    pub runs: Vec<CdsInput>,
    /// Refresh both shares after every run.
    #[serde(default)]
    pub refresh: bool,
    /// Hex refresh key; drawn by the dealer when absent.
    #[serde(default)]
    pub refresh_key: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FssConfig {
    pub group: String,
    pub a: String,
    pub b: String,
    pub inputs: Vec<CdsInput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyConfig {
    pub q: u64,
    /// Ascending: `coeffs[j]` multiplies `x^j`.
    pub coeffs: Vec<u64>,
    /// Degree bound; `coeffs.len() - 1` when absent.
    #[serde(default)]
    pub degree: Option<usize>,
    pub t: usize,
    pub k: usize,
    pub x_hat: Vec<u64>,
    #[serde(default)]
    pub responders: Option<Vec<u16>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SchemeConfig {
    Shamir(ShamirConfig),
    DpfNn(DpfConfig),
    DpfTn(DpfConfig),
    Fpcds(FpcdsConfig),
    Fss(FssConfig),
    Poly(PolyConfig),
}

/// Per-hypothesis overrides; a field must apply to the configured scheme.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    #[serde(default)]
    pub secret: Option<u64>,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub alpha: Option<u64>,
    #[serde(default)]
    pub s: Option<u64>,
    #[serde(default)]
    pub evals: Option<Vec<EvalPoint>>,
    #[serde(default)]
    pub runs: Option<Vec<CdsInput>>,
    #[serde(default)]
    pub inputs: Option<Vec<CdsInput>>,
    #[serde(default)]
    pub coeffs: Option<Vec<u64>>,
    #[serde(default)]
    pub x_hat: Option<Vec<u64>>,
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>, used: &mut Vec<&'static str>, name: &'static str) {
    if let Some(v) = value {
        *slot = v.clone();
        used.push(name);
    }
}

impl SchemeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Shamir(_) => "shamir",
            Self::DpfNn(_) => "dpf_nn",
            Self::DpfTn(_) => "dpf_tn",
            Self::Fpcds(_) => "fpcds",
            Self::Fss(_) => "fss",
            Self::Poly(_) => "poly",
        }
    }

    pub fn apply(&self, h: &Hypothesis) -> Result<Self> {
        let mut out = self.clone();
        let mut used = Vec::new();
        match &mut out {
            Self::Shamir(c) => set(&mut c.secret, &h.secret, &mut used, "secret"),
            Self::DpfNn(c) | Self::DpfTn(c) => {
                set(&mut c.a, &h.a, &mut used, "a");
                set(&mut c.alpha, &h.alpha, &mut used, "alpha");
                set(&mut c.evals, &h.evals, &mut used, "evals");
            }
            Self::Fpcds(c) => {
                set(&mut c.a, &h.a, &mut used, "a");
                set(&mut c.b, &h.b, &mut used, "b");
                set(&mut c.s, &h.s, &mut used, "s");
                set(&mut c.runs, &h.runs, &mut used, "runs");
            }
            Self::Fss(c) => {
                set(&mut c.a, &h.a, &mut used, "a");
                set(&mut c.b, &h.b, &mut used, "b");
                set(&mut c.inputs, &h.inputs, &mut used, "inputs");
            }
            Self::Poly(c) => {
                set(&mut c.coeffs, &h.coeffs, &mut used, "coeffs");
                set(&mut c.x_hat, &h.x_hat, &mut used, "x_hat");
            }
        }
        let given = serde_json::to_value(h).map_err(|e| Error::InvalidExperiment(e.to_string()))?;
        let given: Vec<String> = given
            .as_object()
            .into_iter()
            .flatten()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, _)| k.clone())
            .collect();
        if let Some(bad) = given.iter().find(|k| !used.contains(&k.as_str())) {
            return Err(Error::InvalidExperiment(format!(
                "hypothesis field {bad:?} does not apply to scheme {}",
                self.name()
            )));
        }
        Ok(out)
    }
}

/// A group of dealer coins that can be enumerated on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoinBlock {
    pub name: &'static str,
    /// Each digit ranges over `0..radix`.
    pub radices: Vec<u64>,
}

impl CoinBlock {
    fn uniform(name: &'static str, radix: u64, count: usize) -> Self {
        Self {
            name,
            radices: vec![radix; count],
        }
    }

    /// Number of digit vectors, or `None` on overflow.
    pub fn states(&self) -> Option<u64> {
        self.radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r))
    }
}

/// Where the dealer's randomness comes from.
pub enum Coins<'a> {
    Rng(&'a mut dyn RngCore),
    /// Digits for one block; every other block takes its reference value.
    Digits { block: usize, digits: &'a [u64] },
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidExperiment(msg.into())
}

fn parse_bits(s: &str) -> Result<BitString> {
    s.parse().map_err(|e: Error| invalid(format!("bit string {s:?}: {e}")))
}

fn parse_hex32(s: &Option<String>) -> Result<Option<[u8; 32]>> {
    s.as_ref()
        .map(|h| {
            hex::decode(h)
                .ok()
                .and_then(|b| <[u8; 32]>::try_from(b).ok())
                .ok_or_else(|| invalid(format!("expected 32 hex bytes, got {h:?}")))
        })
        .transpose()
}

fn responders(list: &Option<Vec<u16>>, n: usize) -> Result<Vec<u16>> {
    match list {
        None => Ok((1..=n as u16).collect()),
        Some(l) => {
            if let Some(&bad) = l.iter().find(|&&i| i == 0 || i as usize > n) {
                return Err(invalid(format!("responder {bad} outside 1..={n}")));
            }
            Ok(l.clone())
        }
    }
}

/// Digits read in order, checked against their radix.
struct DigitReader<'a> {
    digits: &'a [u64],
    pos: usize,
}

impl DigitReader<'_> {
    fn next(&mut self) -> u64 {
        let d = self.digits[self.pos];
        self.pos += 1;
        d
    }

    fn element(&mut self, f: PrimeField) -> FieldElement {
        f.element(self.next())
    }

    fn vector(&mut self, f: PrimeField, dim: usize) -> FieldVector {
        FieldVector::new(f, (0..dim).map(|_| self.element(f)).collect()).expect("same field")
    }
}

fn check_digits(blocks: &[CoinBlock], block: usize, digits: &[u64]) -> Result<()> {
    let b = blocks
        .get(block)
        .ok_or_else(|| invalid(format!("coin block {block} out of range")))?;
    if digits.len() != b.radices.len() || digits.iter().zip(&b.radices).any(|(d, r)| d >= r) {
        return Err(invalid(format!("digits do not fit coin block {:?}", b.name)));
    }
    Ok(())
}

/// The enumerable coin blocks of a configuration.
pub fn coin_blocks(config: &SchemeConfig) -> Result<Vec<CoinBlock>> {
    Ok(match config {
        SchemeConfig::Shamir(c) => vec![CoinBlock::uniform("coeffs", c.q, c.t.saturating_sub(1))],
        SchemeConfig::Poly(c) => {
            let degree = poly_degree(c);
            vec![CoinBlock::uniform("coeffs", c.q, c.t.saturating_sub(1) * (degree + 1))]
        }
        SchemeConfig::Fpcds(c) => {
            let g: AbelianGroup = c.group.parse()?;
            vec![CoinBlock::uniform("gen", g.order(), FpcdsCoins::DIGITS)]
        }
        SchemeConfig::Fss(c) => {
            let g: AbelianGroup = c.group.parse()?;
            vec![CoinBlock::uniform("gen", g.order(), FpcdsCoins::DIGITS + 1)]
        }
        SchemeConfig::DpfNn(c) => {
            let p = nn_params(c)?;
            let (slots, dim, n, d) = (p.slots(), p.vector_dim(), p.n, p.prf.key_dim);
            vec![
                CoinBlock::uniform("vectors", c.q, slots * dim * n),
                CoinBlock::uniform("alphas", c.q, slots - 1 + (n - 1) * slots),
                CoinBlock::uniform("keys", c.q, n * slots * d),
            ]
        }
        SchemeConfig::DpfTn(c) => {
            let p = tn_params(c)?;
            let (slots, dim, n, t, d) = (p.slots(), p.vector_dim(), p.n, p.t, p.prf.key_dim);
            vec![
                CoinBlock::uniform("vectors", c.q, slots * dim * t),
                CoinBlock::uniform("alphas", c.q, slots - 1 + slots * (t - 1)),
                CoinBlock::uniform("keys", c.q, n * slots * d * t),
            ]
        }
    })
}

/// Key segments of a `dpf_nn` key that depend only on the given coin block.
const NN_BLOCK_SEGMENTS: [&[&str]; 3] = [&["v[", "theta"], &["alpha["], &["key[", "k_sum"]];

/// The part of a `dpf_nn` key determined by one coin block. The blocks are
/// independent and each key segment depends on a single block, so two key
/// distributions agree iff all block projections agree.
pub fn project_dpf_nn_key(key: &[u8], block: usize) -> Result<Vec<u8>> {
    let prefixes = NN_BLOCK_SEGMENTS
        .get(block)
        .ok_or_else(|| invalid(format!("coin block {block} out of range")))?;
    Ok(DpfNnKey::decode(key)?
        .encode()
        .segments()
        .iter()
        .filter(|s| prefixes.iter().any(|p| s.name.starts_with(p)))
        .flat_map(|s| s.bytes.iter().copied())
        .collect())
}

/// Runs the protocol with all randomness drawn from `ChaCha20(seed)`.
pub fn run_protocol(config: &SchemeConfig, seed: [u8; 32]) -> Result<Transcript> {
    let mut rng = ChaCha20Rng::from_seed(seed);
    Ok(run_with_coins(config, Coins::Rng(&mut rng))?.expect("sampled coins are valid"))
}

/// Runs the protocol; `Ok(None)` when a digit vector is not a valid coin choice.
pub fn run_with_coins(config: &SchemeConfig, mut coins: Coins<'_>) -> Result<Option<Transcript>> {
    if let Coins::Digits { block, digits } = &coins {
        check_digits(&coin_blocks(config)?, *block, digits)?;
    }
    let net = Network::new();
    let dealt = match config {
        SchemeConfig::Shamir(c) => run_shamir(&net, c, &mut coins)?,
        SchemeConfig::DpfNn(c) => run_dpf_nn(&net, c, &mut coins)?,
        SchemeConfig::DpfTn(c) => run_dpf_tn(&net, c, &mut coins)?,
        SchemeConfig::Fpcds(c) => run_fpcds(&net, c, &mut coins)?,
        SchemeConfig::Fss(c) => run_fss(&net, c, &mut coins)?,
        SchemeConfig::Poly(c) => run_poly(&net, c, &mut coins)?,
    };
    Ok(dealt.then(|| net.into_transcript()))
}

fn record_error(net: &Network, round: u32, sender: Actor, e: &Error) {
    net.record(round, sender, Actor::Environment, Label::Error, e.to_string().into_bytes());
}

/// Unwraps a scheme result, logging the error as the final event on failure.
macro_rules! or_record {
    ($net:expr, $round:expr, $sender:expr, $res:expr) => {
        match $res {
            Ok(v) => v,
            Err(e) => {
                record_error($net, $round, $sender, &e);
                return Ok(true);
            }
        }
    };
}

fn deal(net: &Network, keys: impl IntoIterator<Item = (u16, Vec<u8>)>) {
    for (i, bytes) in keys {
        net.send(0, Actor::Dealer, Actor::Party(i), Label::Key, bytes);
    }
}

/// Each party takes its key off the network.
fn collect_keys(net: &Network, n: usize) -> Vec<Vec<u8>> {
    (1..=n as u16)
        .map(|i| net.recv(Actor::Party(i)).expect("key dealt").payload)
        .collect()
}

fn run_shamir(net: &Network, c: &ShamirConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let f = PrimeField::new(c.q)?;
    let who = responders(&c.responders, c.n)?;
    let secret = f.element(c.secret);
    let shares = or_record!(net, 0, Actor::Dealer, match coins {
        Coins::Rng(rng) => shamir::share(f, secret, c.t, c.n, *rng),
        Coins::Digits { digits, .. } => {
            let mut d = DigitReader { digits, pos: 0 };
            let coeffs: Vec<_> = (1..c.t).map(|_| d.element(f)).collect();
            shamir::share_with_coeffs(f, secret, c.t, c.n, &coeffs)
        }
    });
    deal(net, shares.iter().map(|s| (s.index, s.encode().to_bytes())));
    let held = collect_keys(net, c.n);
    for &i in &who {
        net.send(1, Actor::Party(i), Actor::Reconstructor, Label::Share, held[i as usize - 1].clone());
    }
    let received = net.drain(Actor::Reconstructor);
    let shares = or_record!(
        net,
        1,
        Actor::Reconstructor,
        received
            .iter()
            .map(|e| ShamirShare::<FieldElement>::decode(f, &e.payload))
            .collect::<Result<Vec<_>>>()
    );
    let value = or_record!(net, 1, Actor::Reconstructor, shamir::reconstruct(&shares, c.t));
    net.record(1, Actor::Reconstructor, Actor::Environment, Label::Output, f.encode(value));
    Ok(true)
}

fn master_seed(c: &DpfConfig) -> Result<[u8; 32]> {
    Ok(parse_hex32(&c.master_seed)?.unwrap_or([0; 32]))
}

fn nn_params(c: &DpfConfig) -> Result<DpfNnParams> {
    if c.t.is_some() {
        return Err(invalid("dpf_nn takes no threshold t"));
    }
    DpfNnParams::new(PrimeField::new(c.q)?, c.ell, c.lambda, c.n, c.key_dim, master_seed(c)?)
}

fn tn_params(c: &DpfConfig) -> Result<DpfTnParams> {
    let t = c.t.ok_or_else(|| invalid("dpf_tn needs a threshold t"))?;
    DpfTnParams::new(PrimeField::new(c.q)?, c.ell, c.lambda, c.n, t, c.key_dim, master_seed(c)?)
}

/// `len(x) u16 LE || packed x || r`.
fn encode_eval_input(x: &BitString, r: &[u8]) -> Vec<u8> {
    let mut out = (x.len() as u16).to_le_bytes().to_vec();
    out.extend(x.packed());
    out.extend_from_slice(r);
    out
}

fn decode_eval_input(bytes: &[u8]) -> Result<(BitString, Vec<u8>)> {
    let len = u16::from_le_bytes(
        bytes
            .get(..2)
            .ok_or_else(|| Error::Decode("short input".into()))?
            .try_into()
            .expect("2 bytes"),
    ) as usize;
    let packed = len.div_ceil(8);
    let x = BitString::from_packed(
        bytes
            .get(2..2 + packed)
            .ok_or_else(|| Error::Decode("short input".into()))?,
        len,
    )?;
    Ok((x, bytes[2 + packed..].to_vec()))
}

/// Parsed evaluation points with their PRF inputs. Exact runs use `r_h = h`
/// big-endian when no `r` is given, so enumeration stays over dealer coins only.
fn eval_points(c: &DpfConfig, coins: &mut Coins<'_>) -> Result<Vec<(BitString, Vec<u8>)>> {
    c.evals
        .iter()
        .enumerate()
        .map(|(h, e)| {
            let x = parse_bits(&e.x)?;
            let r = match (&e.r, &mut *coins) {
                (Some(r), _) => hex::decode(r).map_err(|_| invalid(format!("bad hex r {r:?}")))?,
                (None, Coins::Rng(rng)) => {
                    let mut r = vec![0u8; c.r_len];
                    rng.fill_bytes(&mut r);
                    r
                }
                (None, Coins::Digits { .. }) => {
                    let be = (h as u64 + 1).to_be_bytes();
                    let mut r = vec![0u8; c.r_len.max(1)];
                    let k = r.len().min(8);
                    let len = r.len();
                    r[len - k..].copy_from_slice(&be[8 - k..]);
                    r
                }
            };
            Ok((x, r))
        })
        .collect()
}

fn digits_to_nn_coins(p: &DpfNnParams, block: usize, digits: &[u64]) -> Option<DpfNnCoins> {
    let f = p.field();
    let (slots, dim, n, d) = (p.slots(), p.vector_dim(), p.n, p.prf.key_dim);
    let mut rd = DigitReader { digits, pos: 0 };
    let mut coins = DpfNnCoins {
        v: vec![FieldVector::zero(f, dim); slots],
        v_shares: vec![vec![FieldVector::zero(f, dim); slots]; n - 1],
        free_alphas: vec![f.zero(); slots - 1],
        alpha_shares: vec![vec![f.zero(); slots]; n - 1],
        keys: (0..n)
            .map(|i| (0..slots).map(|j| FieldVector::unit(f, d, i * slots + j)).collect())
            .collect(),
    };
    match block {
        0 => {
            coins.v = (0..slots).map(|_| rd.vector(f, dim)).collect();
            coins.v_shares = (1..n).map(|_| (0..slots).map(|_| rd.vector(f, dim)).collect()).collect();
        }
        1 => {
            coins.free_alphas = (1..slots).map(|_| rd.element(f)).collect();
            coins.alpha_shares = (1..n).map(|_| (0..slots).map(|_| rd.element(f)).collect()).collect();
        }
        _ => {
            coins.keys = (0..n).map(|_| (0..slots).map(|_| rd.vector(f, d)).collect()).collect();
            independent_keys_from_vectors(&p.prf, coins.keys.iter().flatten().cloned().collect()).ok()?;
        }
    }
    Some(coins)
}

fn digits_to_tn_coins(p: &DpfTnParams, block: usize, digits: &[u64]) -> Option<DpfTnCoins> {
    let f = p.field();
    let (slots, dim, n, t, d) = (p.slots(), p.vector_dim(), p.n, p.t, p.prf.key_dim);
    let mut rd = DigitReader { digits, pos: 0 };
    let mut coins = DpfTnCoins {
        v: vec![FieldVector::zero(f, dim); slots],
        v_coeffs: vec![vec![FieldVector::zero(f, dim); t - 1]; slots],
        free_alphas: vec![f.zero(); slots - 1],
        alpha_coeffs: vec![vec![f.zero(); t - 1]; slots],
        keys: (0..n)
            .map(|i| (0..slots).map(|j| FieldVector::unit(f, d, i * slots + j)).collect())
            .collect(),
        key_coeffs: vec![vec![vec![FieldVector::zero(f, d); t - 1]; slots]; n],
    };
    match block {
        0 => {
            coins.v = (0..slots).map(|_| rd.vector(f, dim)).collect();
            coins.v_coeffs = (0..slots).map(|_| (1..t).map(|_| rd.vector(f, dim)).collect()).collect();
        }
        1 => {
            coins.free_alphas = (1..slots).map(|_| rd.element(f)).collect();
            coins.alpha_coeffs = (0..slots).map(|_| (1..t).map(|_| rd.element(f)).collect()).collect();
        }
        _ => {
            coins.keys = (0..n).map(|_| (0..slots).map(|_| rd.vector(f, d)).collect()).collect();
            coins.key_coeffs = (0..n)
                .map(|_| (0..slots).map(|_| (1..t).map(|_| rd.vector(f, d)).collect()).collect())
                .collect();
            independent_keys_from_vectors(&p.prf, coins.keys.iter().flatten().cloned().collect()).ok()?;
        }
    }
    Some(coins)
}

/// Parties evaluate at every point; the reconstructor runs `rec` per round.
fn dpf_rounds<K>(
    net: &Network,
    points: &[(BitString, Vec<u8>)],
    who: &[u16],
    keys: &[K],
    format: ShareFormat,
    eval: impl Fn(&K, &BitString, &[u8]) -> Result<DpfEvalShare>,
    rec: impl Fn(&[DpfEvalShare]) -> Result<FieldElement>,
) -> Result<bool> {
    for (h, (x, r)) in points.iter().enumerate() {
        let round = h as u32 + 1;
        for i in 1..=keys.len() as u16 {
            net.send(round, Actor::Environment, Actor::Party(i), Label::Input, encode_eval_input(x, r));
        }
        for i in 1..=keys.len() as u16 {
            let input = net.recv(Actor::Party(i)).expect("input sent");
            if !who.contains(&i) {
                continue;
            }
            let (x, r) = or_record!(net, round, Actor::Party(i), decode_eval_input(&input.payload));
            let share = or_record!(net, round, Actor::Party(i), eval(&keys[i as usize - 1], &x, &r));
            net.send(round, Actor::Party(i), Actor::Reconstructor, Label::Share, share.encode(format).to_bytes());
        }
        let received = net.drain(Actor::Reconstructor);
        let shares = or_record!(
            net,
            round,
            Actor::Reconstructor,
            received
                .iter()
                .map(|e| DpfEvalShare::decode(&e.payload).map(|(s, _)| s))
                .collect::<Result<Vec<_>>>()
        );
        let value = or_record!(net, round, Actor::Reconstructor, rec(&shares));
        net.record(round, Actor::Reconstructor, Actor::Environment, Label::Output, value.field().encode(value));
    }
    Ok(true)
}

fn run_dpf_nn(net: &Network, c: &DpfConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let p = nn_params(c)?;
    let a = parse_bits(&c.a)?;
    let alpha = p.field().element(c.alpha);
    let who = responders(&c.responders, c.n)?;
    let keys = match coins {
        Coins::Rng(rng) => or_record!(net, 0, Actor::Dealer, dpf::nn::gen(&p, &a, alpha, *rng)),
        Coins::Digits { block, digits } => {
            let Some(coins) = digits_to_nn_coins(&p, *block, digits) else {
                return Ok(false);
            };
            or_record!(net, 0, Actor::Dealer, dpf::nn::gen_with_coins(&p, &a, alpha, &coins))
        }
    };
    let points = eval_points(c, coins)?;
    deal(net, keys.iter().map(|k| (k.index, k.to_bytes())));
    let held = or_record!(
        net,
        0,
        Actor::Dealer,
        collect_keys(net, c.n).iter().map(|b| DpfNnKey::decode(b)).collect::<Result<Vec<_>>>()
    );
    let prf = p.linear_prf();
    dpf_rounds(
        net,
        &points,
        &who,
        &held,
        ShareFormat::NOfN,
        |k, x, r| k.eval_with(&prf, x, r),
        |s| Ok(dpf::nn::rec_outcome(&prf, &p, s)?.value(p.field())),
    )
}

fn run_dpf_tn(net: &Network, c: &DpfConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let p = tn_params(c)?;
    let a = parse_bits(&c.a)?;
    let alpha = p.field().element(c.alpha);
    let who = responders(&c.responders, c.n)?;
    let keys = match coins {
        Coins::Rng(rng) => or_record!(net, 0, Actor::Dealer, dpf::tn::gen(&p, &a, alpha, *rng)),
        Coins::Digits { block, digits } => {
            let Some(coins) = digits_to_tn_coins(&p, *block, digits) else {
                return Ok(false);
            };
            or_record!(net, 0, Actor::Dealer, dpf::tn::gen_with_coins(&p, &a, alpha, &coins))
        }
    };
    let points = eval_points(c, coins)?;
    deal(net, keys.iter().map(|k| (k.index, k.to_bytes())));
    let held = or_record!(
        net,
        0,
        Actor::Dealer,
        collect_keys(net, c.n).iter().map(|b| DpfTnKey::decode(b)).collect::<Result<Vec<_>>>()
    );
    let prf = p.linear_prf();
    dpf_rounds(
        net,
        &points,
        &who,
        &held,
        ShareFormat::Threshold { n: c.n as u16 },
        |k, x, r| k.eval_with(&prf, x, r),
        |s| Ok(dpf::tn::rec_outcome(&prf, &p, s, Default::default())?.value(p.field())),
    )
}

fn cds_common(group: &str, a: &str, b: &str) -> Result<(AbelianGroup, BitString, BitString)> {
    Ok((group.parse()?, parse_bits(a)?, parse_bits(b)?))
}

fn cds_inputs(runs: &[CdsInput]) -> Result<Vec<(BitString, BitString)>> {
    runs.iter()
        .map(|r| Ok((parse_bits(&r.alpha)?, parse_bits(&r.beta)?)))
        .collect()
}

/// Carol's output: `1 || s` on acceptance, `0` on rejection.
fn carol_output(g: &AbelianGroup, out: CarolOutput) -> Vec<u8> {
    match out {
        CarolOutput::Secret(s) => {
            let mut v = vec![1];
            g.encode_into(s, &mut v);
            v
        }
        CarolOutput::Reject => vec![0],
    }
}

fn run_fpcds(net: &Network, c: &FpcdsConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let (g, a, b) = cds_common(&c.group, &c.a, &c.b)?;
    let s = g.element(c.s)?;
    let runs = cds_inputs(&c.runs)?;
    let fixed_key = parse_hex32(&c.refresh_key)?;
    let (w1, w2) = match coins {
        Coins::Rng(rng) => {
            let key = fixed_key.unwrap_or_else(|| {
                let mut k = [0u8; 32];
                rng.fill_bytes(&mut k);
                k
            });
            or_record!(net, 0, Actor::Dealer, fpcds::gen(&g, &a, &b, s, key, *rng))
        }
        Coins::Digits { digits, .. } => {
            let Some(coins) = FpcdsCoins::from_digits(&g, digits) else {
                return Ok(false);
            };
            or_record!(net, 0, Actor::Dealer, fpcds::gen_with_coins(&g, &a, &b, s, fixed_key.unwrap_or([0; 32]), &coins))
        }
    };
    deal(net, [(1, w1.to_bytes()), (2, w2.to_bytes())]);
    let mut held = or_record!(
        net,
        0,
        Actor::Dealer,
        collect_keys(net, 2).iter().map(|b| FpcdsShare::decode(b)).collect::<Result<Vec<_>>>()
    );
    for (h, (alpha, beta)) in runs.iter().enumerate() {
        let round = h as u32 + 1;
        net.send(round, Actor::Environment, Actor::Party(1), Label::Input, alpha.packed());
        net.send(round, Actor::Environment, Actor::Party(2), Label::Input, beta.packed());
        for (i, input) in [(1u16, alpha), (2, beta)] {
            net.recv(Actor::Party(i)).expect("input sent");
            let w = &held[i as usize - 1];
            let m = or_record!(net, round, Actor::Party(i), fpcds::send(input, w));
            net.send(round, Actor::Party(i), Actor::Carol, Label::Message, m.wire());
        }
        let msgs = net.drain(Actor::Carol);
        let m1 = or_record!(net, round, Actor::Carol, FpcdsMessage::from_wire(g, &msgs[0].payload));
        let m2 = or_record!(net, round, Actor::Carol, FpcdsMessage::from_wire(g, &msgs[1].payload));
        let out = or_record!(net, round, Actor::Carol, fpcds::carol(&m1, &m2));
        net.record(round, Actor::Carol, Actor::Environment, Label::Output, carol_output(&g, out));
        if c.refresh {
            held = held.iter().map(FpcdsShare::refresh).collect();
        }
    }
    Ok(true)
}

fn run_fss(net: &Network, c: &FssConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let (g, a, b) = cds_common(&c.group, &c.a, &c.b)?;
    let inputs = cds_inputs(&c.inputs)?;
    let cds = PointCds {
        group: g,
        refresh_key: [0; 32],
    };
    let keys = match coins {
        Coins::Rng(rng) => {
            let h = PointCondition { a, b };
            or_record!(net, 0, Actor::Dealer, fss::keygen(&cds, &h, *rng))
        }
        Coins::Digits { digits, .. } => {
            let Some(coins) = FpcdsCoins::from_digits(&g, &digits[1..]) else {
                return Ok(false);
            };
            let s = GroupElement(digits[0]);
            let (w1, w2) = or_record!(net, 0, Actor::Dealer, fpcds::gen_with_coins(&g, &a, &b, s, [0; 32], &coins));
            vec![FssKey { index: 1, inner: w1 }, FssKey { index: 2, inner: w2 }]
        }
    };
    deal(net, keys.iter().map(|k| (k.index, k.to_bytes())));
    let held = or_record!(
        net,
        0,
        Actor::Dealer,
        collect_keys(net, 2).iter().map(|b| FssKey::decode(b)).collect::<Result<Vec<_>>>()
    );
    for (h, (c1, c2)) in inputs.iter().enumerate() {
        let round = h as u32 + 1;
        net.send(round, Actor::Environment, Actor::Party(1), Label::Input, c1.packed());
        net.send(round, Actor::Environment, Actor::Party(2), Label::Input, c2.packed());
        for (i, input) in [(1u16, c1), (2, c2)] {
            net.recv(Actor::Party(i)).expect("input sent");
            let m = or_record!(net, round, Actor::Party(i), fss::eval_share(&cds, &held[i as usize - 1], input));
            net.send(round, Actor::Party(i), Actor::Reconstructor, Label::Share, m.wire());
        }
        let msgs = net.drain(Actor::Reconstructor);
        let msgs = or_record!(
            net,
            round,
            Actor::Reconstructor,
            msgs.iter().map(|e| FpcdsMessage::from_wire(g, &e.payload)).collect::<Result<Vec<_>>>()
        );
        let bit = or_record!(net, round, Actor::Reconstructor, fss::rec(&cds, &msgs));
        net.record(round, Actor::Reconstructor, Actor::Environment, Label::Output, vec![bit]);
    }
    Ok(true)
}

fn poly_degree(c: &PolyConfig) -> usize {
    c.degree.unwrap_or(c.coeffs.len().saturating_sub(1))
}

fn run_poly(net: &Network, c: &PolyConfig, coins: &mut Coins<'_>) -> Result<bool> {
    let f = PrimeField::new(c.q)?;
    let params = PolyFssParams::new(f, poly_degree(c), c.t, c.k)?;
    let who = responders(&c.responders, c.k)?;
    let p = Polynomial::from_values(f, &c.coeffs);
    let keys = or_record!(net, 0, Actor::Dealer, match coins {
        Coins::Rng(rng) => poly_fss::gen(&p, &params, *rng),
        Coins::Digits { digits, .. } => {
            let mut d = DigitReader { digits, pos: 0 };
            let coeffs: Vec<_> = (1..c.t).map(|_| d.vector(f, params.degree + 1)).collect();
            poly_fss::gen_with_coeffs(&p, &params, &coeffs)
        }
    });
    deal(net, keys.iter().map(|k| (k.index, k.to_bytes())));
    let held = or_record!(
        net,
        0,
        Actor::Dealer,
        collect_keys(net, c.k).iter().map(|b| PolyFssKey::decode(b)).collect::<Result<Vec<_>>>()
    );
    for (h, &x) in c.x_hat.iter().enumerate() {
        let round = h as u32 + 1;
        let x = f.element(x);
        for i in 1..=c.k as u16 {
            net.send(round, Actor::Environment, Actor::Party(i), Label::Input, f.encode(x));
        }
        for i in 1..=c.k as u16 {
            let input = net.recv(Actor::Party(i)).expect("input sent");
            if !who.contains(&i) {
                continue;
            }
            let x = or_record!(net, round, Actor::Party(i), f.decode(&input.payload));
            let share = or_record!(net, round, Actor::Party(i), held[i as usize - 1].eval(x));
            net.send(round, Actor::Party(i), Actor::Reconstructor, Label::Share, share.to_bytes());
        }
        let received = net.drain(Actor::Reconstructor);
        let shares = or_record!(
            net,
            round,
            Actor::Reconstructor,
            received.iter().map(|e| PolyEvalShare::decode(&e.payload)).collect::<Result<Vec<_>>>()
        );
        let value = or_record!(net, round, Actor::Reconstructor, poly_fss::rec(&shares, &params));
        net.record(round, Actor::Reconstructor, Actor::Environment, Label::Output, f.encode(value));
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fpcds_config(runs: &[(&str, &str)]) -> SchemeConfig {
        SchemeConfig::Fpcds(FpcdsConfig {
            group: "xor:8".into(),
            a: "01".into(),
            b: "10".into(),
            s: 201,
            runs: runs
                .iter()
                .map(|(x, y)| CdsInput { alpha: x.to_string(), beta: y.to_string() })
                .collect(),
            refresh: false,
            refresh_key: None,
        })
    }

    #[test]
    fn fpcds_run_ends_with_the_secret() {
        let t = run_protocol(&fpcds_config(&[("01", "10")]), [1; 32]).unwrap();
        let last = t.last().unwrap();
        assert_eq!((last.sender, last.label), (Actor::Carol, Label::Output));
        assert_eq!(last.payload, vec![1, 201]);
        let msgs: Vec<_> = t.events().iter().filter(|e| e.receiver == Actor::Carol).collect();
        assert_eq!(msgs.len(), 2);
        assert!(msgs.iter().all(|e| e.label == Label::Message && e.payload.len() == 2));
    }

    #[test]
    fn runs_are_reproducible() {
        let c = fpcds_config(&[("01", "10"), ("11", "10")]);
        assert_eq!(run_protocol(&c, [2; 32]).unwrap().to_bytes(), run_protocol(&c, [2; 32]).unwrap().to_bytes());
        assert_ne!(run_protocol(&c, [2; 32]).unwrap(), run_protocol(&c, [3; 32]).unwrap());
    }

    fn dpf_tn(responders: Option<Vec<u16>>) -> SchemeConfig {
        SchemeConfig::DpfTn(DpfConfig {
            q: 101,
            ell: 2,
            lambda: 1,
            n: 4,
            t: Some(3),
            key_dim: None,
            master_seed: None,
            a: "10".into(),
            alpha: 55,
            evals: vec![EvalPoint { x: "10".into(), r: None }, EvalPoint { x: "11".into(), r: Some("00ff".into()) }],
            responders,
            r_len: 16,
        })
    }

    #[test]
    fn dpf_tn_outputs_and_short_quorum() {
        let t = run_protocol(&dpf_tn(Some(vec![1, 3, 4])), [4; 32]).unwrap();
        let outs: Vec<_> = t.events().iter().filter(|e| e.label == Label::Output).map(|e| e.payload.clone()).collect();
        assert_eq!(outs, vec![vec![55], vec![0]]);
        let t = run_protocol(&dpf_tn(Some(vec![2, 4])), [4; 32]).unwrap();
        let last = t.last().unwrap();
        assert_eq!((last.sender, last.label), (Actor::Reconstructor, Label::Error));
        assert!(String::from_utf8_lossy(&last.payload).contains("not enough"));
    }

    #[test]
    fn dpf_nn_poly_shamir_fss_runs() {
        let nn = SchemeConfig::DpfNn(DpfConfig {
            q: (1 << 31) - 1,
            ell: 3,
            lambda: 2,
            n: 3,
            t: None,
            key_dim: None,
            master_seed: Some("11".repeat(32)),
            a: "101".into(),
            alpha: 123456,
            evals: vec![EvalPoint { x: "101".into(), r: None }],
            responders: None,
            r_len: 16,
        });
        let t = run_protocol(&nn, [5; 32]).unwrap();
        assert_eq!(t.last().unwrap().payload, 123456u32.to_be_bytes());

        let poly = SchemeConfig::Poly(PolyConfig {
            q: 11,
            coeffs: vec![1, 3, 2],
            degree: None,
            t: 2,
            k: 3,
            x_hat: vec![2, 0],
            responders: Some(vec![2, 3]),
        });
        let outs: Vec<_> = run_protocol(&poly, [6; 32])
            .unwrap()
            .events()
            .iter()
            .filter(|e| e.label == Label::Output)
            .map(|e| e.payload.clone())
            .collect();
        assert_eq!(outs, vec![vec![4], vec![1]]);

        let sh = SchemeConfig::Shamir(ShamirConfig { q: 5, t: 2, n: 3, secret: 4, responders: None });
        assert_eq!(run_protocol(&sh, [7; 32]).unwrap().last().unwrap().payload, vec![4]);

        let fss = SchemeConfig::Fss(FssConfig {
            group: "zq:11".into(),
            a: "1".into(),
            b: "0".into(),
            inputs: vec![CdsInput { alpha: "1".into(), beta: "0".into() }, CdsInput { alpha: "1".into(), beta: "1".into() }],
        });
        let outs: Vec<_> = run_protocol(&fss, [8; 32])
            .unwrap()
            .events()
            .iter()
            .filter(|e| e.label == Label::Output)
            .map(|e| e.payload.clone())
            .collect();
        assert_eq!(outs, vec![vec![1], vec![0]]);
    }

    #[test]
    fn dealer_errors_are_recorded() {
        let c = SchemeConfig::Fpcds(FpcdsConfig { group: "xor:1".into(), ..match fpcds_config(&[]) {
            SchemeConfig::Fpcds(c) => c,
            _ => unreachable!(),
        } });
        let c = match c {
            SchemeConfig::Fpcds(mut c) => {
                c.s = 1;
                SchemeConfig::Fpcds(c)
            }
            _ => unreachable!(),
        };
        let t = run_protocol(&c, [0; 32]).unwrap();
        assert_eq!(t.events().len(), 1);
        assert_eq!(t.errors().count(), 1);
    }

    #[test]
    fn digit_runs_and_coin_blocks() {
        let c = fpcds_config(&[("00", "00")]);
        assert_eq!(coin_blocks(&c).unwrap()[0].states(), Some(256u64.pow(6)));
        assert!(run_with_coins(&c, Coins::Digits { block: 0, digits: &[1, 2, 3, 4, 4, 5] }).unwrap().is_none());
        let t = run_with_coins(&c, Coins::Digits { block: 0, digits: &[1, 2, 3, 4, 5, 6] }).unwrap().unwrap();
        assert_eq!(t.last().unwrap().payload, vec![0]);
        assert!(run_with_coins(&c, Coins::Digits { block: 0, digits: &[1, 2, 3] }).is_err());
        assert!(run_with_coins(&c, Coins::Digits { block: 1, digits: &[] }).is_err());
    }

    #[test]
    fn hypotheses_override_matching_fields_only() {
        let c = fpcds_config(&[]);
        let h = Hypothesis { s: Some(3), ..Default::default() };
        match c.apply(&h).unwrap() {
            SchemeConfig::Fpcds(f) => assert_eq!(f.s, 3),
            _ => unreachable!(),
        }
        let bad = Hypothesis { secret: Some(3), ..Default::default() };
        assert!(matches!(c.apply(&bad), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{"scheme":"shamir","q":5,"t":2,"n":3,"secret":1}"#;
        let c: SchemeConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c, SchemeConfig::Shamir(ShamirConfig { q: 5, t: 2, n: 3, secret: 1, responders: None }));
        assert!(serde_json::from_str::<SchemeConfig>(r#"{"scheme":"shamir","q":5,"t":2,"n":3,"secret":1,"x":0}"#).is_err());
    }
}
