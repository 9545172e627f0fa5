//! Experiment runner: builds a code from a config, generates corrupted
//! instances, and estimates the Fool and Limit predicates from raw counts.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::{BigRational, Ratio};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, AttackKind, Corruption};
use crate::bits::BitString;
use crate::crldc::hamming::{compute_hamming_params, hamming_params_with_mu, HammingCrldc};
use crate::crldc::insdel::decomp::{check_gamma_bounds, GammaBoundCheck};
use crate::crldc::insdel::{
    classify_gamma_good, insdel_params_from_inner, optimal_block_decomposition, BlockDecomposition, GammaGoodReport,
    InsDelCrldc,
};
use crate::crldc::{AcceptedPair, BlockOutcome, Encoding, LocalDecoder};
use crate::error::{Error, Result};
use crate::oracle::ReceivedWordOracle;
use crate::sig::Schnorr;
use crate::util::{big, big_f64, derive_seed, parse_rational, wilson, Z99};

/// Samples per InsDel decode when the config leaves μ unset.
pub const DEFAULT_INSDEL_MU: usize = 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    Hamming,
    Insdel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    #[default]
    Full,
    /// Hamming only: verifies under the key parsed from the target block.
    Strawman,
    /// InsDel only: reads blocks at their uncorrupted offsets.
    Naive,
}

/// `"all"`, `"sample"` (one index per block plus 32 random), or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexSpec {
    Named(String),
    List(Vec<usize>),
}

impl Default for IndexSpec {
    fn default() -> Self {
        IndexSpec::Named("sample".into())
    }
}

fn d_lambda() -> u32 {
    128
}
fn d_k() -> usize {
    1024
}
fn d_r() -> usize {
    128
}
fn d_quarter() -> String {
    "1/4".into()
}
fn d_rho_star() -> String {
    "1/10".into()
}
fn d_target() -> f64 {
    2.0 / 3.0
}
fn d_one() -> usize {
    1
}
fn d_trials() -> usize {
    200
}
fn d_attack() -> AttackKind {
    AttackKind::None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeKind,
    #[serde(default)]
    pub decoder: DecoderKind,
    #[serde(default = "d_lambda")]
    pub lambda: u32,
    #[serde(default = "d_k")]
    pub k: usize,
    #[serde(default = "d_r")]
    pub r: usize,
    /// Hamming: fraction of blocks the adversary may destroy.
    #[serde(default = "d_quarter")]
    pub c: String,
    #[serde(default = "d_quarter")]
    pub beta_in: String,
    #[serde(default = "d_quarter")]
    pub beta_sz: String,
    #[serde(default = "d_rho_star")]
    pub rho_star: String,
    /// Decoder samples; derived from `target_p` on the Hamming path when unset.
    #[serde(default)]
    pub mu: Option<usize>,
    #[serde(default = "d_target")]
    pub target_p: f64,
    #[serde(default)]
    pub scan_slack: Option<f64>,
    #[serde(default = "d_attack")]
    pub attack: AttackKind,
    /// Attack budget; defaults to the code's ρ.
    #[serde(default)]
    pub budget: Option<String>,
    /// Blocks exchanged by `block-swap`.
    #[serde(default)]
    pub swap: Option<(usize, usize)>,
    #[serde(default = "d_one")]
    pub instances: usize,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default)]
    pub indices: IndexSpec,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(code: CodeKind) -> Self {
        Self {
            code,
            decoder: DecoderKind::Full,
            lambda: d_lambda(),
            k: d_k(),
            r: d_r(),
            c: d_quarter(),
            beta_in: d_quarter(),
            beta_sz: d_quarter(),
            rho_star: d_rho_star(),
            mu: None,
            target_p: d_target(),
            scan_slack: None,
            attack: AttackKind::None,
            budget: None,
            swap: None,
            instances: 1,
            trials: d_trials(),
            indices: IndexSpec::default(),
            seed: 0,
        }
    }
}

fn ratio(s: &str, name: &str) -> Result<Ratio<u64>> {
    let r = parse_rational(s).ok_or_else(|| Error::ConfigInvalid(format!("{name} = {s:?} is not a rational")))?;
    let (n, d) = (r.numer().try_into().ok(), r.denom().try_into().ok());
    match (n, d) {
        (Some(n), Some(d)) => Ok(Ratio::new(n, d)),
        _ => Err(Error::ConfigInvalid(format!("{name} = {s:?} is out of range"))),
    }
}

#[derive(Clone)]
pub enum Code {
    Hamming(HammingCrldc),
    InsDel(InsDelCrldc),
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub code: Code,
    decoder: Box<dyn LocalDecoder + Send>,
}

/// One corrupted codeword and what produced it.
#[derive(Clone, Debug)]
pub struct Instance {
    pub number: usize,
    pub seed: u64,
    pub x: BitString,
    pub encoding: Encoding,
    pub corruption: Corruption,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        if config.trials == 0 || config.instances == 0 {
            return Err(Error::ConfigInvalid("trials and instances must be positive".into()));
        }
        let scheme = Arc::new(Schnorr::new(config.lambda)?);
        let allowed: &[AttackKind] = match config.code {
            CodeKind::Hamming => &[
                AttackKind::None,
                AttackKind::RandomHamming,
                AttackKind::WorstBlockHamming,
                AttackKind::StrawmanKeySubstitution,
                AttackKind::BlockSwap,
            ],
            CodeKind::Insdel => &[
                AttackKind::None,
                AttackKind::RandomHamming,
                AttackKind::BlockSwap,
                AttackKind::RotationInsdel,
                AttackKind::RandomInsdel,
            ],
        };
        if !allowed.contains(&config.attack) {
            return Err(Error::ConfigInvalid(format!(
                "attack {} does not apply to the {:?} code",
                config.attack.name(),
                config.code
            )));
        }
        let (code, decoder): (Code, Box<dyn LocalDecoder + Send>) = match config.code {
            CodeKind::Hamming => {
                let c = ratio(&config.c, "c")?;
                let beta_in = ratio(&config.beta_in, "beta_in")?;
                let params = match config.mu {
                    Some(mu) => hamming_params_with_mu(config.lambda, config.k, config.r, config.r, c, mu, beta_in)?,
                    None => compute_hamming_params(config.lambda, config.k, config.r, config.r, c, config.target_p, beta_in)?,
                };
                let code = HammingCrldc::new(params, scheme)?;
                let dec: Box<dyn LocalDecoder + Send> = match config.decoder {
                    DecoderKind::Full => Box::new(code.clone()),
                    DecoderKind::Strawman => Box::new(code.strawman()),
                    DecoderKind::Naive => {
                        return Err(Error::ConfigInvalid("the naive decoder belongs to the InsDel code".into()))
                    }
                };
                (Code::Hamming(code), dec)
            }
            CodeKind::Insdel => {
                let beta_sz = ratio(&config.beta_sz, "beta_sz")?;
                let rho_star = ratio(&config.rho_star, "rho_star")?;
                let mut params =
                    insdel_params_from_inner(config.lambda, config.k, config.r, beta_sz, rho_star, config.target_p)?
                        .with_mu(config.mu.unwrap_or(DEFAULT_INSDEL_MU));
                if let Some(s) = config.scan_slack {
                    params = params.with_scan_slack(s);
                }
                let code = InsDelCrldc::new(params, scheme)?;
                let dec: Box<dyn LocalDecoder + Send> = match config.decoder {
                    DecoderKind::Full => Box::new(code.clone()),
                    DecoderKind::Naive => Box::new(code.naive()),
                    DecoderKind::Strawman => {
                        return Err(Error::ConfigInvalid("the strawman decoder belongs to the Hamming code".into()))
                    }
                };
                (Code::InsDel(code), dec)
            }
        };
        if let IndexSpec::Named(n) = &config.indices {
            if n != "all" && n != "sample" {
                return Err(Error::ConfigInvalid(format!("unknown index set {n:?}")));
            }
        }
        Ok(Self { config, code, decoder })
    }

    pub fn decoder(&self) -> &dyn LocalDecoder {
        self.decoder.as_ref()
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn block_len(&self) -> usize {
        match &self.code {
            Code::Hamming(c) => c.params().bl,
            Code::InsDel(c) => c.params().block_len,
        }
    }

    /// The code's admissible error rate.
    pub fn rho(&self) -> BigRational {
        match &self.code {
            Code::Hamming(c) => big(c.params().rho),
            Code::InsDel(c) => c.params().rho.clone(),
        }
    }

    pub fn budget(&self) -> Result<BigRational> {
        match &self.config.budget {
            Some(s) => parse_rational(s).ok_or_else(|| Error::ConfigInvalid(format!("budget {s:?} is not a rational"))),
            None => Ok(self.rho()),
        }
    }

    /// Success threshold p of the Fool predicate.
    pub fn p(&self) -> f64 {
        match &self.code {
            Code::Hamming(c) => c.params().p,
            Code::InsDel(_) => self.config.target_p,
        }
    }

    pub fn delta(&self) -> f64 {
        match &self.code {
            Code::Hamming(c) => crate::util::ratio_f64(&c.params().delta),
            Code::InsDel(c) => big_f64(&c.params().delta),
        }
    }

    pub fn query_bound(&self, word_len: usize) -> u64 {
        match &self.code {
            Code::Hamming(c) => c.params().locality_bound,
            Code::InsDel(c) => c.params().decode_query_bound(word_len),
        }
    }

    pub fn probe_indices(&self) -> Vec<usize> {
        let k = self.k();
        match &self.config.indices {
            IndexSpec::List(v) => v.clone(),
            IndexSpec::Named(n) if n == "all" => (1..=k).collect(),
            IndexSpec::Named(_) => {
                let r = self.config.r;
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, u64::MAX));
                let mut set: BTreeSet<usize> = (0..self.decoder.blocks()).map(|b| (b * r + 1).min(k)).collect();
                for _ in 0..32 {
                    set.insert(rng.gen_range(1..=k));
                }
                set.into_iter().collect()
            }
        }
    }

    fn check_indices(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i == 0 || i > self.k()) {
            Some(&i) => Err(Error::IndexOutOfRange { index: i, max: self.k() }),
            None if idx.is_empty() => Err(Error::ConfigInvalid("no indices to probe".into())),
            None => Ok(()),
        }
    }

    pub fn encode(&self, x: &BitString, rng: &mut dyn rand::RngCore) -> Result<Encoding> {
        match &self.code {
            Code::Hamming(c) => c.encode(x, rng),
            Code::InsDel(c) => c.encode(x, rng),
        }
    }

    /// Encodes a fresh random message and corrupts it; fully determined by `(seed, number)`.
    pub fn instance(&self, number: usize) -> Result<Instance> {
        let seed = derive_seed(self.config.seed, number as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: BitString = (0..self.k()).map(|_| rng.gen()).collect();
        let encoding = self.encode(&x, &mut rng)?;
        let corruption = self.corrupt(&encoding, rng.gen())?;
        Ok(Instance { number, seed, x, encoding, corruption })
    }

    pub fn corrupt(&self, enc: &Encoding, seed: u64) -> Result<Corruption> {
        let c = &enc.codeword;
        let budget = self.budget()?;
        match (self.config.attack, &self.code) {
            (AttackKind::None, _) => Ok(adversary::no_corruption(c)),
            (AttackKind::RandomHamming, _) => adversary::random_hamming_channel(c, &budget, seed),
            (AttackKind::WorstBlockHamming, Code::Hamming(code)) => adversary::worst_block_hamming(c, code, seed),
            (AttackKind::StrawmanKeySubstitution, Code::Hamming(code)) => {
                adversary::strawman_key_substitution(c, &enc.debug, code, &budget, seed)
            }
            (AttackKind::BlockSwap, _) => {
                let (a, b) = self.config.swap.unwrap_or((1, 2));
                adversary::block_swap(c, self.block_len(), a, b, &budget)
            }
            (AttackKind::RotationInsdel, _) => adversary::rotation_insdel(c, self.block_len(), &budget, seed),
            (AttackKind::RandomInsdel, _) => adversary::random_insdel_channel(c, &budget, seed),
            (a, _) => Err(Error::ConfigInvalid(format!("attack {} does not apply", a.name()))),
        }
    }

    /// Decodes each listed block `trials` times; outcomes ordered by (block, trial).
    pub fn run_blocks(&self, inst: &Instance, blocks: &[usize], trials: usize) -> Result<Vec<BlockOutcome>> {
        let word = &inst.corruption.word;
        let jobs: Vec<(usize, usize)> = blocks.iter().flat_map(|&j| (0..trials).map(move |t| (j, t))).collect();
        jobs.par_iter()
            .map(|&(j, t)| {
                let mut oracle = ReceivedWordOracle::new(word);
                self.decoder.decode_block(&mut oracle, j, trial_seed(inst.seed, j, t))
            })
            .collect()
    }
}

fn trial_seed(instance_seed: u64, j: usize, t: usize) -> u64 {
    derive_seed(instance_seed ^ 0x9e37_79b9_7f4a_7c15, ((j as u64) << 32) | t as u64)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IndexCount {
    pub index: usize,
    pub correct: u64,
    pub bot: u64,
    pub wrong: u64,
    pub trials: u64,
}

impl IndexCount {
    /// `Pr̂[Dec(i) ∈ {x_i, ⊥}]`.
    pub fn safe_rate(&self) -> f64 {
        (self.correct + self.bot) as f64 / self.trials as f64
    }

    pub fn correct_rate(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }
}

/// Counts per index plus every accepted pair the encoder never issued.
fn tally(exp: &Experiment, inst: &Instance, indices: &[usize], trials: usize) -> Result<(Vec<IndexCount>, usize, u64)> {
    let r = exp.config.r;
    let blocks: Vec<usize> = indices.iter().map(|&i| exp.decoder.block_of(i)).collect::<BTreeSet<_>>().into_iter().collect();
    let outcomes = exp.run_blocks(inst, &blocks, trials)?;
    let issued: HashSet<AcceptedPair> = inst.encoding.debug.issued_pairs();
    let foreign = outcomes.iter().filter_map(|o| o.accepted.as_ref()).filter(|p| !issued.contains(p)).count();
    let max_queries = outcomes.iter().map(|o| o.queries).max().unwrap_or(0);
    let counts = indices
        .iter()
        .map(|&i| {
            let j = exp.decoder.block_of(i);
            let b = blocks.binary_search(&j).expect("block listed");
            let mut c = IndexCount { index: i, trials: trials as u64, ..Default::default() };
            for o in &outcomes[b * trials..(b + 1) * trials] {
                match o.at(i - (j - 1) * r).value {
                    None => c.bot += 1,
                    Some(v) if v == inst.x[i - 1] => c.correct += 1,
                    Some(_) => c.wrong += 1,
                }
            }
            c
        })
        .collect();
    Ok((counts, foreign, max_queries))
}

#[derive(Clone, Debug, Serialize)]
pub struct FoolInstance {
    pub instance: usize,
    pub distance_raw: u64,
    pub distance: f64,
    pub counts: Vec<IndexCount>,
    pub min_rate: f64,
    pub min_index: usize,
    /// Accepted pairs the encoder never signed.
    pub foreign_accepts: usize,
    pub fooled: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoolReport {
    pub code: CodeKind,
    pub decoder: String,
    pub attack: AttackKind,
    pub p: f64,
    pub trials: usize,
    pub z: f64,
    pub instances: Vec<FoolInstance>,
    pub min_rate: f64,
    pub wrong_total: u64,
    pub foreign_accepts: usize,
    /// Some index's safe rate has a 99% upper bound below p.
    pub fooled: bool,
}

pub fn estimate_fool(exp: &Experiment) -> Result<FoolReport> {
    let indices = exp.probe_indices();
    exp.check_indices(&indices)?;
    let trials = exp.config.trials;
    let p = exp.p();
    let mut instances = Vec::new();
    for n in 0..exp.config.instances {
        let inst = exp.instance(n)?;
        let (counts, foreign_accepts, _) = tally(exp, &inst, &indices, trials)?;
        let (min_index, min_rate) = counts
            .iter()
            .map(|c| (c.index, c.safe_rate()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let fooled = counts.iter().any(|c| wilson(c.correct + c.bot, c.trials, Z99).1 < p);
        instances.push(FoolInstance {
            instance: n,
            distance_raw: inst.corruption.distance.raw,
            distance: inst.corruption.distance.normalized,
            counts,
            min_rate,
            min_index,
            foreign_accepts,
            fooled,
        });
    }
    Ok(FoolReport {
        code: exp.config.code,
        decoder: exp.decoder.name().to_string(),
        attack: exp.config.attack,
        p,
        trials,
        z: Z99,
        min_rate: instances.iter().map(|i| i.min_rate).fold(f64::INFINITY, f64::min),
        wrong_total: instances.iter().flat_map(|i| &i.counts).map(|c| c.wrong).sum(),
        foreign_accepts: instances.iter().map(|i| i.foreign_accepts).sum(),
        fooled: instances.iter().any(|i| i.fooled),
        instances,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitInstance {
    pub instance: usize,
    pub distance_raw: u64,
    pub distance: f64,
    pub counts: Vec<IndexCount>,
    /// Indices with `Pr̂[Dec(i) = x_i] > 2/3`.
    pub good: Vec<usize>,
    pub good_count: usize,
    pub foreign_accepts: usize,
    pub limited: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub code: CodeKind,
    pub decoder: String,
    pub attack: AttackKind,
    pub delta: f64,
    pub delta_k: f64,
    pub trials: usize,
    pub probed: usize,
    pub instances: Vec<LimitInstance>,
    pub min_good: usize,
    pub wrong_total: u64,
    pub foreign_accepts: usize,
    /// Some instance had fewer than δ·k good indices.
    pub limited: bool,
}

pub fn estimate_limit(exp: &Experiment) -> Result<LimitReport> {
    let indices: Vec<usize> = match &exp.config.indices {
        IndexSpec::Named(n) if n == "sample" => (1..=exp.k()).collect(),
        _ => exp.probe_indices(),
    };
    exp.check_indices(&indices)?;
    let trials = exp.config.trials;
    let delta_k = exp.delta() * exp.k() as f64;
    // Unprobed indices count as not good.
    let mut instances = Vec::new();
    for n in 0..exp.config.instances {
        let inst = exp.instance(n)?;
        let (counts, foreign_accepts, _) = tally(exp, &inst, &indices, trials)?;
        let good: Vec<usize> = counts.iter().filter(|c| 3 * c.correct > 2 * c.trials).map(|c| c.index).collect();
        instances.push(LimitInstance {
            instance: n,
            distance_raw: inst.corruption.distance.raw,
            distance: inst.corruption.distance.normalized,
            good_count: good.len(),
            limited: (good.len() as f64) < delta_k,
            good,
            counts,
            foreign_accepts,
        });
    }
    Ok(LimitReport {
        code: exp.config.code,
        decoder: exp.decoder.name().to_string(),
        attack: exp.config.attack,
        delta: exp.delta(),
        delta_k,
        trials,
        probed: indices.len(),
        min_good: instances.iter().map(|i| i.good_count).min().unwrap_or(0),
        wrong_total: instances.iter().flat_map(|i| &i.counts).map(|c| c.wrong).sum(),
        foreign_accepts: instances.iter().map(|i| i.foreign_accepts).sum(),
        limited: instances.iter().any(|i| i.limited),
        instances,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityReport {
    pub code: CodeKind,
    pub runs: u64,
    pub min_queries: u64,
    pub max_queries: u64,
    pub mean_queries: f64,
    pub bound: u64,
    pub violations: u64,
}

impl LocalityReport {
    pub fn check(&self) -> Result<()> {
        if self.violations > 0 || self.min_queries == 0 {
            return Err(Error::BoundViolated { queries: self.max_queries, bound: self.bound });
        }
        Ok(())
    }
}

/// Runs the decoder on every probed index for `trials` seeds and compares
/// each run's query count with the declared bound.
pub fn audit_locality(exp: &Experiment) -> Result<LocalityReport> {
    let indices = exp.probe_indices();
    exp.check_indices(&indices)?;
    let trials = exp.config.trials;
    let (mut runs, mut sum, mut min, mut max, mut violations) = (0u64, 0u128, u64::MAX, 0u64, 0u64);
    let mut bound = 0;
    for n in 0..exp.config.instances {
        let inst = exp.instance(n)?;
        bound = exp.query_bound(inst.corruption.word.len());
        let word = &inst.corruption.word;
        let jobs: Vec<(usize, usize)> = indices.iter().flat_map(|&i| (0..trials).map(move |t| (i, t))).collect();
        let queries: Vec<u64> = jobs
            .par_iter()
            .map(|&(i, t)| {
                let mut oracle = ReceivedWordOracle::new(word);
                exp.decoder.decode(&mut oracle, i, trial_seed(inst.seed, i, t)).map(|o| o.queries)
            })
            .collect::<Result<_>>()?;
        for q in queries {
            runs += 1;
            sum += q as u128;
            min = min.min(q);
            max = max.max(q);
            violations += (q > bound) as u64;
        }
    }
    Ok(LocalityReport {
        code: exp.config.code,
        runs,
        min_queries: min,
        max_queries: max,
        mean_queries: sum as f64 / runs.max(1) as f64,
        bound,
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WorksheetLine {
    pub name: String,
    pub value: String,
    pub derivation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Worksheet {
    pub code: CodeKind,
    pub lines: Vec<WorksheetLine>,
    pub notes: Vec<String>,
}

impl Worksheet {
    pub fn render(&self) -> String {
        let w = self.lines.iter().map(|l| l.name.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for l in &self.lines {
            let pad = w - l.name.chars().count();
            let _ = writeln!(out, "{}{} = {:<24} {}", l.name, " ".repeat(pad), l.value, l.derivation);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

pub fn param_worksheet(exp: &Experiment) -> Worksheet {
    let mut lines = Vec::new();
    let mut add = |name: &str, value: String, derivation: &str| {
        lines.push(WorksheetLine { name: name.into(), value, derivation: derivation.into() })
    };
    let mut notes = Vec::new();
    match &exp.code {
        Code::Hamming(code) => {
            let p = code.params();
            add("k", p.k.to_string(), "message bits");
            add("r", p.r.to_string(), "block message bits = signature length");
            add("pk_len", p.pk_len.to_string(), "public key bits");
            add("d", p.d.to_string(), "⌈k/r⌉");
            add("index_len", p.index_len.to_string(), "max(1, ⌈log₂ d⌉), stores j − 1");
            add("payload_len", p.payload_len.to_string(), "2r + pk_len + index_len");
            add("beta_in", p.beta_in.to_string(), "inner rate");
            add("bl", p.bl.to_string(), "payload_len / β_in");
            add("K", p.big_k.to_string(), "d · bl");
            add("rho_in", p.rho_in.to_string(), "inner radius / bl");
            add("c", p.c.to_string(), "destroyed-block fraction");
            add("rho", p.rho.to_string(), "c · ρ_in");
            add("mu", p.mu.to_string(), "smallest μ with 1 − exp(−μ(1/2−c)²/(2(1−c))) ≥ target");
            add("p", format!("{:.6}", p.p), "1 − exp(−μ(1/2−c)²/(2(1−c)))");
            add("delta", p.delta.to_string(), "blocks outside J̃ are at least half");
            add("locality", p.locality_bound.to_string(), "(μ + 1) · bl");
            if p.r >= p.k {
                notes.push(format!("r ≥ k: a single padded block, so K = bl = Θ(r) = {}", p.big_k));
            }
        }
        Code::InsDel(code) => {
            let p = code.params();
            let f = |x: &BigRational| format!("{:.6e}", big_f64(x));
            add("k", p.k.to_string(), "message bits");
            add("r", p.r.to_string(), "block message bits = signature length = pk_len");
            add("d", p.d.to_string(), "⌈k/r⌉");
            add("index_len", p.index_len.to_string(), "max(1, ⌈log₂ k⌉), stores j − 1");
            add("tau", p.tau.to_string(), "3r + index_len");
            add("beta_sz", p.beta_sz.to_string(), "inner rate");
            add("rho_sz", p.rho_sz.to_string(), "inner radius, normalized");
            add("gamma", p.gamma.to_string(), "fixed");
            add("alpha", p.alpha.to_string(), "2γρ_sz/(γ + 6) = (2/73)ρ_sz");
            add("beta", p.beta.to_string(), "2α + 1/β_sz");
            add("rho", f(&p.rho), "(γα/(2β))(1 − β/(2(1−γ)(β−αγ)))");
            add("rho_closed", f(&p.rho_closed), "closed form below ρ; μ is sized here");
            add("delta", f(&p.delta), "1 − 2βρ/(γα) = β/(2(1−γ)(β−αγ))");
            add("q", format!("{:.6}", p.q), "(1−γ)·(β−αγ)/((1+ρ)β)·(1 − 2βρ/(γα)) at ρ_closed");
            add("mu_required", p.mu_required.to_string(), "smallest μ with 1 − ρ* − exp(−μ(q−1/2)²/(2q)) ≥ target");
            add("mu", p.mu.to_string(), "samples used by the decoder");
            add("buffer_len", p.buffer_len.to_string(), "⌈ατ⌉");
            add("core_len", p.core_len.to_string(), "τ / β_sz");
            add("block_len", p.block_len.to_string(), "2 · buffer_len + core_len");
            add("K", p.big_k.to_string(), "d · block_len");
            add("raw_budget", p.raw_budget().to_string(), "⌊2ρK⌋ edits");
            add("query_bound", p.decode_query_bound(p.big_k).to_string(), "C₁(log³K + μ)(r + log k) at K′ = K");
            if p.raw_budget() == 0 {
                notes.push("ρ admits no whole edit at this K; attacks need an explicit budget".into());
            }
            if p.mu < p.mu_required as usize {
                notes.push(format!("μ = {} is below the Chernoff requirement {}", p.mu, p.mu_required));
            }
        }
    }
    Worksheet { code: exp.config.code, lines, notes }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockmapReport {
    pub instance: usize,
    pub decomposition: BlockDecomposition,
    pub gamma: GammaGoodReport,
    /// Checked at the realized normalized edit distance of the instance.
    pub bounds: GammaBoundCheck,
}

/// Optimal block decomposition and γ-good classification of one instance.
pub fn blockmap(exp: &Experiment, number: usize) -> Result<BlockmapReport> {
    let Code::InsDel(code) = &exp.code else {
        return Err(Error::ConfigInvalid("blockmap applies to the InsDel code".into()));
    };
    let inst = exp.instance(number)?;
    let p = code.params();
    let decomposition = optimal_block_decomposition(&inst.encoding.codeword, &inst.corruption.word, p.d)?;
    let gamma = classify_gamma_good(&decomposition, Ratio::new(1, 12));
    let n = inst.encoding.codeword.len().max(inst.corruption.word.len());
    let realized = BigRational::new(decomposition.total_raw.into(), (2 * n as u64).into());
    let bounds = check_gamma_bounds(&gamma, p, &realized);
    Ok(BlockmapReport { instance: number, decomposition, gamma, bounds })
}

/// Flat rows `instance,index,correct,bot,wrong,trials` for plotting.
pub fn counts_csv_rows<'a>(
    instances: impl Iterator<Item = (usize, &'a [IndexCount])>,
) -> Vec<(usize, usize, u64, u64, u64, u64)> {
    instances
        .flat_map(|(n, counts)| counts.iter().map(move |c| (n, c.index, c.correct, c.bot, c.wrong, c.trials)))
        .collect()
}
