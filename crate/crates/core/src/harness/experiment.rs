//! Distinguishing experiments between two hypotheses over one scheme.
//!
//! Three distinguisher classes are available: exact comparison of view
//! multisets over all dealer coins, a chi-square test over hashed view bins,
//! and the best single threshold on a scalar statistic of the view.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::protocol::{
    coin_blocks, project_dpf_nn_key, run_protocol, run_with_coins, Coins, Hypothesis, SchemeConfig,
};
use super::transcript::{Actor, Label, Transcript};
use super::stats::{chi_square_homogeneity, empirical_tv, exact_tv, ks_p_value, ks_statistic};
use super::view::{extract_view, view_records, ViewItem};
use crate::error::{Error, Result};
use crate::group::AbelianGroup;

/// Default cap on enumerated states per hypothesis and coin block.
pub const DEFAULT_EXACT_BOUND: u64 = 1 << 24;

/// Environment variable overriding [`DEFAULT_EXACT_BOUND`].
pub const EXACT_BOUND_VAR: &str = "FSSKIT_EXACT_BOUND";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Statistic {
    /// 1 if two records of the view start with the same group-element tag.
    RepeatedTag,
    /// The first (up to) 8 bytes of the first record, big-endian.
    ViewU64Prefix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Exact,
    ChiSquare { bins: u64 },
    Threshold { statistic: Statistic },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    Indistinguishable {
        max_advantage: f64,
        #[serde(default)]
        min_p_value: Option<f64>,
    },
    Distinguishable {
        min_advantage: f64,
    },
}

fn default_trials() -> u64 {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub config: SchemeConfig,
    #[serde(default)]
    pub h0: Hypothesis,
    #[serde(default)]
    pub h1: Hypothesis,
    pub view: Vec<ViewItem>,
    pub mode: Mode,
    /// Samples per hypothesis in the sampling modes.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Hex master seed; all zeros when absent.
    #[serde(default)]
    pub seed: Option<String>,
    /// Overrides the exact-mode state bound.
    #[serde(default)]
    pub state_bound: Option<u64>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub name: String,
    pub states: u64,
    pub advantage: f64,
    /// Exact TV as `num/den`.
    pub tv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub scheme: String,
    pub mode: String,
    /// Samples per hypothesis, or enumerated states per hypothesis.
    pub trials: u64,
    pub advantage: f64,
    #[serde(default)]
    pub statistic: Option<f64>,
    #[serde(default)]
    pub p_value: Option<f64>,
    #[serde(default)]
    pub blocks: Vec<BlockReport>,
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub passed: Option<bool>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment  {}", self.name)?;
        writeln!(f, "scheme      {}", self.scheme)?;
        writeln!(f, "mode        {}", self.mode)?;
        writeln!(f, "trials      {}", self.trials)?;
        writeln!(f, "advantage   {:.6}", self.advantage)?;
        writeln!(f, "statistic   {}", fmt_opt(self.statistic))?;
        writeln!(f, "p-value     {}", fmt_opt(self.p_value))?;
        if !self.blocks.is_empty() {
            writeln!(f, "{:<10} {:>12} {:>12}  tv", "block", "states", "advantage")?;
            for b in &self.blocks {
                writeln!(f, "{:<10} {:>12} {:>12.6}  {}", b.name, b.states, b.advantage, b.tv)?;
            }
        }
        let verdict = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "-",
        };
        writeln!(f, "verdict     {verdict}")
    }
}

impl Expectation {
    pub fn check(&self, advantage: f64, p_value: Option<f64>) -> bool {
        match *self {
            Self::Indistinguishable { max_advantage, min_p_value } => {
                advantage <= max_advantage && min_p_value.is_none_or(|m| p_value.is_none_or(|p| p >= m))
            }
            Self::Distinguishable { min_advantage } => advantage >= min_advantage,
        }
    }
}

fn state_bound(spec: &ExperimentSpec) -> u64 {
    spec.state_bound
        .or_else(|| std::env::var(EXACT_BOUND_VAR).ok()?.parse().ok())
        .unwrap_or(DEFAULT_EXACT_BOUND)
}

fn parse_seed(spec: &ExperimentSpec) -> Result<[u8; 32]> {
    match &spec.seed {
        None => Ok([0; 32]),
        Some(h) => hex::decode(h)
            .ok()
            .and_then(|b| <[u8; 32]>::try_from(b).ok())
            .ok_or_else(|| Error::InvalidExperiment(format!("seed must be 32 hex bytes, got {h:?}"))),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.view.is_empty() {
        return Err(Error::InvalidExperiment("empty view selector".into()));
    }
    let configs = [spec.config.apply(&spec.h0)?, spec.config.apply(&spec.h1)?];
    let mut report = match &spec.mode {
        Mode::Exact => exact(spec, &configs)?,
        Mode::ChiSquare { bins } => chi_square(spec, &configs, *bins)?,
        Mode::Threshold { statistic } => threshold(spec, &configs, statistic)?,
    };
    report.expect = spec.expect.clone();
    report.passed = spec.expect.as_ref().map(|e| e.check(report.advantage, report.p_value));
    Ok(report)
}

fn base_report(spec: &ExperimentSpec, mode: &str, trials: u64, advantage: f64) -> ExperimentReport {
    ExperimentReport {
        name: spec.name.clone(),
        scheme: spec.config.name().into(),
        mode: mode.into(),
        trials,
        advantage,
        statistic: None,
        p_value: None,
        blocks: Vec::new(),
        expect: None,
        passed: None,
    }
}

fn digits_of(mut index: u64, radices: &[u64]) -> Vec<u64> {
    radices
        .iter()
        .map(|&r| {
            let d = index % r;
            index /= r;
            d
        })
        .collect()
}

/// Each selected key reduced to the segments that depend on `block`.
fn projected_key_view(t: &Transcript, view: &[ViewItem], block: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in view {
        let ViewItem::Key { party } = item else {
            unreachable!("checked by exact()")
        };
        let key = t
            .events()
            .iter()
            .find(|e| e.label == Label::Key && e.receiver == Actor::Party(*party))
            .ok_or_else(|| Error::SelectorOutOfRange(format!("{item:?} matches no event")))?;
        let projected = project_dpf_nn_key(&key.payload, block)?;
        out.extend_from_slice(&(projected.len() as u32).to_le_bytes());
        out.extend(projected);
    }
    Ok(out)
}

/// Multiset of views over every valid digit vector of one coin block.
fn view_multiset(
    config: &SchemeConfig,
    block: usize,
    radices: &[u64],
    states: u64,
    view: &[ViewItem],
) -> Result<HashMap<Vec<u8>, u64>> {
    let project = matches!(config, SchemeConfig::DpfNn(_));
    (0..states)
        .into_par_iter()
        .try_fold(HashMap::new, |mut acc, index| {
            let digits = digits_of(index, radices);
            if let Some(t) = run_with_coins(config, Coins::Digits { block, digits: &digits })? {
                let v = if project {
                    projected_key_view(&t, view, block)?
                } else {
                    extract_view(&t, view)?
                };
                *acc.entry(v).or_insert(0u64) += 1;
            }
            Ok(acc)
        })
        .try_reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })
}

/// Enumerates every coin block. Single-block schemes give the exact TV
/// distance. For `dpf_nn` the view must consist of keys, each block is
/// enumerated with the others held fixed and the view projected onto the key
/// segments that block determines; the reported advantage is the largest
/// block TV, which is zero iff the full key distributions agree and otherwise
/// a lower bound on their TV distance.
fn exact(spec: &ExperimentSpec, configs: &[SchemeConfig; 2]) -> Result<ExperimentReport> {
    match spec.config {
        SchemeConfig::DpfTn(_) => {
            return Err(Error::InvalidExperiment(
                "exact mode is not available for dpf_tn; use chi_square".into(),
            ))
        }
        SchemeConfig::DpfNn(_) if !spec.view.iter().all(|v| matches!(v, ViewItem::Key { .. })) => {
            return Err(Error::InvalidExperiment(
                "exact mode for dpf_nn supports key views only".into(),
            ))
        }
        _ => {}
    }
    let bound = state_bound(spec);
    let blocks = coin_blocks(&configs[0])?;
    if blocks != coin_blocks(&configs[1])? {
        return Err(Error::InvalidExperiment("hypotheses have different coin spaces".into()));
    }
    let mut reports = Vec::new();
    let mut total = 0u64;
    for (i, b) in blocks.iter().enumerate() {
        let states = b.states().filter(|&s| s <= bound).ok_or_else(|| Error::InfeasibleEnumeration {
            states: b.radices.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128)),
            bound: bound as u128,
        })?;
        total += states;
        let m0 = view_multiset(&configs[0], i, &b.radices, states, &spec.view)?;
        let m1 = view_multiset(&configs[1], i, &b.radices, states, &spec.view)?;
        let (num, den) = exact_tv(&m0, &m1);
        reports.push(BlockReport {
            name: b.name.into(),
            states,
            advantage: num as f64 / den as f64,
            tv: format!("{num}/{den}"),
        });
    }
    let advantage = reports.iter().map(|b| b.advantage).fold(0.0, f64::max);
    let mut report = base_report(spec, "exact", total, advantage);
    report.blocks = reports;
    Ok(report)
}

/// Per-trial seed `SHA-256(name || seed || hypothesis || trial)`.
fn trial_seed(name: &str, seed: &[u8; 32], hyp: u8, trial: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update(seed);
    h.update([hyp]);
    h.update(trial.to_le_bytes());
    h.finalize().into()
}

fn sample_views<T: Send>(
    spec: &ExperimentSpec,
    configs: &[SchemeConfig; 2],
    f: impl Fn(&[u8]) -> Result<T> + Sync,
) -> Result<[Vec<T>; 2]> {
    if spec.trials == 0 {
        return Err(Error::InvalidExperiment("trials must be at least 1".into()));
    }
    let seed = parse_seed(spec)?;
    let run = |hyp: u8| -> Result<Vec<T>> {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let t = run_protocol(&configs[hyp as usize], trial_seed(&spec.name, &seed, hyp, trial))?;
                f(&extract_view(&t, &spec.view)?)
            })
            .collect()
    };
    Ok([run(0)?, run(1)?])
}

fn chi_square(spec: &ExperimentSpec, configs: &[SchemeConfig; 2], bins: u64) -> Result<ExperimentReport> {
    if !(2..=1 << 20).contains(&bins) {
        return Err(Error::InvalidExperiment(format!("bins must be in 2..=2^20, got {bins}")));
    }
    let [b0, b1] = sample_views(spec, configs, |view| {
        let digest = Sha256::digest(view);
        Ok(u64::from_be_bytes(digest[..8].try_into().expect("8 bytes")) % bins)
    })?;
    let count = |xs: &[u64]| {
        let mut c = vec![0u64; bins as usize];
        for &x in xs {
            c[x as usize] += 1;
        }
        c
    };
    let (c0, c1) = (count(&b0), count(&b1));
    let test = chi_square_homogeneity(&c0, &c1);
    let mut report = base_report(spec, &format!("chi_square({bins})"), spec.trials, empirical_tv(&c0, &c1));
    report.statistic = Some(test.statistic);
    report.p_value = Some(test.p_value);
    Ok(report)
}

fn tag_len(config: &SchemeConfig) -> Result<usize> {
    let group = match config {
        SchemeConfig::Fpcds(c) => &c.group,
        SchemeConfig::Fss(c) => &c.group,
        other => {
            return Err(Error::InvalidExperiment(format!(
                "repeated_tag needs a group-based scheme, not {}",
                other.name()
            )))
        }
    };
    Ok(group.parse::<AbelianGroup>()?.byte_len())
}

fn threshold(spec: &ExperimentSpec, configs: &[SchemeConfig; 2], statistic: &Statistic) -> Result<ExperimentReport> {
    let [s0, s1] = match statistic {
        Statistic::RepeatedTag => {
            let len = tag_len(&spec.config)?;
            sample_views(spec, configs, |view| {
                let tags: Vec<&[u8]> = view_records(view)?.into_iter().map(|r| &r[..len.min(r.len())]).collect();
                let repeated = tags.iter().enumerate().any(|(i, t)| tags[..i].contains(t));
                Ok(f64::from(u8::from(repeated)))
            })?
        }
        Statistic::ViewU64Prefix => sample_views(spec, configs, |view| {
            let first = view_records(view)?.into_iter().next().unwrap_or_default();
            let take = first.len().min(8);
            let mut buf = [0u8; 8];
            buf[8 - take..].copy_from_slice(&first[..take]);
            Ok(u64::from_be_bytes(buf) as f64)
        })?,
    };
    let d = ks_statistic(&s0, &s1);
    let name = match statistic {
        Statistic::RepeatedTag => "threshold(repeated_tag)",
        Statistic::ViewU64Prefix => "threshold(view_u64_prefix)",
    };
    let mut report = base_report(spec, name, spec.trials, d);
    report.statistic = Some(d);
    report.p_value = Some(ks_p_value(d, s0.len(), s1.len()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ExperimentSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn shamir_single_share_exact() {
        let s = spec(
            r#"{"name":"shamir","config":{"scheme":"shamir","q":5,"t":2,"n":3,"secret":0},
                "h0":{"secret":1},"h1":{"secret":4},
                "view":[{"item":"key","party":2}],"mode":{"kind":"exact"},
                "expect":{"kind":"indistinguishable","max_advantage":0.0}}"#,
        );
        let r = run_experiment(&s).unwrap();
        assert_eq!((r.advantage, r.trials, r.passed), (0.0, 5, Some(true)));
        assert_eq!(r.blocks[0].tv, "0/1");

        let mut both = s.clone();
        both.view = vec![ViewItem::Key { party: 1 }, ViewItem::Key { party: 2 }];
        assert_eq!(run_experiment(&both).unwrap().advantage, 1.0);
    }

    #[test]
    fn dpf_nn_exact_projects_keys_per_block() {
        let base = r#"{"name":"nn","config":{"scheme":"dpf_nn","q":2,"ell":1,"lambda":1,"n":2,"a":"0","alpha":1},
            "h0":{"a":"0"},"h1":{"a":"1"},"view":VIEW,"mode":{"kind":"exact"}}"#;
        let tv = |view: &str, block: usize| {
            let s = spec(&base.replace("VIEW", view));
            let configs = [s.config.apply(&s.h0).unwrap(), s.config.apply(&s.h1).unwrap()];
            let b = &coin_blocks(&configs[0]).unwrap()[block];
            let states = b.states().unwrap();
            let m: Vec<_> = configs
                .iter()
                .map(|c| view_multiset(c, block, &b.radices, states, &s.view).unwrap())
                .collect();
            exact_tv(&m[0], &m[1])
        };
        let one = r#"[{"item":"key","party":2}]"#;
        assert_eq!((tv(one, 0), tv(one, 1)), ((0, 1), (0, 1)));
        // Both keys together reveal which v_j entered theta.
        assert_ne!(tv(r#"[{"item":"key","party":1},{"item":"key","party":2}]"#, 0), (0, 1));
        let evals = base.replace("VIEW", r#"[{"item":"eval_shares","party":1}]"#);
        assert!(matches!(run_experiment(&spec(&evals)), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn exact_bound_is_enforced() {
        let mut s = spec(
            r#"{"name":"b","config":{"scheme":"fpcds","group":"xor:8","a":"0","b":"0","s":1,"runs":[]},
                "view":[{"item":"key","party":1}],"mode":{"kind":"exact"}}"#,
        );
        assert!(matches!(run_experiment(&s), Err(Error::InfeasibleEnumeration { .. })));
        s.state_bound = Some(1);
        s.config = serde_json::from_str(r#"{"scheme":"shamir","q":5,"t":2,"n":3,"secret":0}"#).unwrap();
        assert!(matches!(run_experiment(&s), Err(Error::InfeasibleEnumeration { states: 5, bound: 1 })));
    }

    #[test]
    fn refresh_breaks_the_tag_linkage() {
        let base = r#"{"name":"refresh","config":{"scheme":"fpcds","group":"xor:16","a":"00","b":"00","s":5,"runs":[],"refresh":REFRESH},
            "h0":{"runs":[{"alpha":"01","beta":"01"},{"alpha":"10","beta":"11"}]},
            "h1":{"runs":[{"alpha":"01","beta":"01"},{"alpha":"00","beta":"11"}]},
            "view":[{"item":"carol_messages","party":1}],
            "mode":{"kind":"threshold","statistic":{"kind":"repeated_tag"}},"trials":2000}"#;
        let plain = run_experiment(&spec(&base.replace("REFRESH", "false"))).unwrap();
        assert_eq!(plain.advantage, 1.0);
        let refreshed = run_experiment(&spec(&base.replace("REFRESH", "true"))).unwrap();
        assert!(refreshed.advantage <= 0.05, "{refreshed}");
    }

    #[test]
    fn identical_hypotheses_stay_within_noise() {
        let s = spec(
            r#"{"name":"same","config":{"scheme":"poly","q":101,"coeffs":[3,1,4],"t":2,"k":3,"x_hat":[5]},
                "view":[{"item":"eval_shares","party":1}],"mode":{"kind":"chi_square","bins":16},"trials":900}"#,
        );
        let r = run_experiment(&s).unwrap();
        assert!(r.advantage <= 3.0 / 30.0, "{r}");
        let t = ExperimentSpec {
            mode: Mode::Threshold { statistic: Statistic::ViewU64Prefix },
            ..s
        };
        assert!(run_experiment(&t).unwrap().advantage <= 0.1);
    }

    #[test]
    fn report_json_and_table() {
        let s = spec(
            r#"{"name":"t","config":{"scheme":"shamir","q":5,"t":2,"n":3,"secret":0},
                "view":[{"item":"output"}],"mode":{"kind":"exact"}}"#,
        );
        let r = run_experiment(&s).unwrap();
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_string().contains("advantage   0.000000"));
    }

    #[test]
    fn invalid_specs() {
        let s = spec(
            r#"{"name":"t","config":{"scheme":"shamir","q":5,"t":2,"n":3,"secret":0},"h0":{"alpha":1},
                "view":[{"item":"output"}],"mode":{"kind":"exact"}}"#,
        );
        assert!(matches!(run_experiment(&s), Err(Error::InvalidExperiment(_))));
        let s = ExperimentSpec {
            h0: Hypothesis::default(),
            mode: Mode::ChiSquare { bins: 4 },
            trials: 0,
            ..s
        };
        assert!(matches!(run_experiment(&s), Err(Error::InvalidExperiment(_))));
    }
}
