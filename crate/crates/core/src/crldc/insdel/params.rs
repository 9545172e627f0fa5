//! Exact-rational parameter arithmetic for the InsDel code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::util::{big, big_f64, big_int, ratio_str};

/// NBS query bound `C · log³(K′) · (τ + log d)`: the constant `C`.
pub const NBS_QUERY_CONSTANT: f64 = 1.0;
/// Decoder query bound `C₁ · (log³ K′ + μ) · (r + log k)`: the constant `C₁`.
pub const DEC_QUERY_CONSTANT: f64 = 4.0;
/// Default slack on the BlockDec scan radius.
pub const DEFAULT_SCAN_SLACK: f64 = 1.5;

#[derive(Clone, Debug, Serialize)]
pub struct InsDelParams {
    pub lambda: u32,
    pub k: usize,
    pub r: usize,
    pub pk_len: usize,
    /// Decoder sample count actually used.
    pub mu: usize,
    /// Smallest μ meeting `target_p` under the Chernoff estimate.
    pub mu_required: u64,
    pub target_p: f64,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho_sz: Ratio<u64>,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub beta_sz: Ratio<u64>,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho_star: Ratio<u64>,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub gamma: BigRational,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub alpha: BigRational,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub beta: BigRational,
    /// Supremum of admissible error rates.
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho: BigRational,
    /// Closed-form rate strictly below `rho`; μ is sized against it.
    #[serde(serialize_with = "ratio_str::serialize")]
    pub rho_closed: BigRational,
    #[serde(serialize_with = "ratio_str::serialize")]
    pub delta: BigRational,
    /// Lower bound on the per-sample key success probability at `rho_closed`.
    pub q: f64,
    pub d: usize,
    pub index_len: usize,
    pub tau: usize,
    pub buffer_len: usize,
    pub core_len: usize,
    pub block_len: usize,
    pub big_k: usize,
    pub scan_slack: f64,
}

fn ratio_in_open_unit(r: Ratio<u64>, name: &str, upper: Ratio<u64>) -> Result<()> {
    if r <= Ratio::from_integer(0) || r >= upper {
        return Err(Error::ConfigInvalid(format!("{name} = {r} must lie in (0, {upper})")));
    }
    Ok(())
}

fn ceil_big(r: &BigRational) -> BigInt {
    let (q, rem) = r.numer().div_rem(r.denom());
    if rem.is_zero() || r.numer() < &BigInt::zero() {
        q
    } else {
        q + 1
    }
}

/// γ, α, β, ρ and δ for given inner-code constants.
pub struct Rates {
    pub gamma: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub rho: BigRational,
    pub rho_closed: BigRational,
    pub delta: BigRational,
}

pub fn rates(rho_sz: Ratio<u64>, beta_sz: Ratio<u64>) -> Rates {
    let rho_sz = big(rho_sz);
    let inv_beta_sz = big(beta_sz).recip();
    let gamma = BigRational::new(1.into(), 12.into());
    let alpha = big_int(2) * &gamma * &rho_sz / (&gamma + big_int(6));
    let beta = big_int(2) * &alpha + &inv_beta_sz;
    let one = BigRational::one();
    let delta = &beta / (big_int(2) * (&one - &gamma) * (&beta - &alpha * &gamma));
    let rho = &gamma * &alpha / (big_int(2) * &beta) * (&one - &delta);
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let lead = r(2, 876) * &rho_sz / (r(8, 73) + big_int(2) * &inv_beta_sz);
    let tail = r(6, 11) * (r(4, 73) * &rho_sz + &inv_beta_sz) / (r(23, 438) * &rho_sz + &inv_beta_sz);
    let rho_closed = lead * (&one - tail);
    Rates { gamma, alpha, beta, rho, rho_closed, delta }
}

/// Per-sample key success lower bound at error rate `rho`.
pub fn q_bound(rates: &Rates, rho: &BigRational) -> f64 {
    let Rates { gamma, alpha, beta, .. } = rates;
    let one = BigRational::one();
    let good = &one - big_int(2) * beta * rho / (gamma * alpha);
    let len = (beta - alpha * gamma) / ((&one + rho) * beta);
    big_f64(&((&one - gamma) * len * good))
}

pub fn mu_required(q: f64, rho_star: f64, target_p: f64) -> Result<u64> {
    if !(target_p > 0.0 && target_p < 1.0 - rho_star) {
        return Err(Error::InfeasibleTarget(format!("target_p = {target_p} needs to be below 1 − ρ* = {}", 1.0 - rho_star)));
    }
    if q <= 0.5 {
        return Err(Error::InfeasibleTarget(format!("per-sample success bound q = {q} is not above 1/2")));
    }
    let p = |mu: f64| 1.0 - rho_star - (-mu * (q - 0.5).powi(2) / (2.0 * q)).exp();
    let rate = (q - 0.5).powi(2) / (2.0 * q);
    let mut mu = ((-(1.0 - rho_star - target_p).ln()) / rate).ceil().max(1.0) as u64;
    while mu > 1 && p((mu - 1) as f64) >= target_p {
        mu -= 1;
    }
    while p(mu as f64) < target_p {
        mu += 1;
    }
    Ok(mu)
}

pub fn compute_insdel_params(
    lambda: u32,
    k: usize,
    r: usize,
    rho_sz: Ratio<u64>,
    beta_sz: Ratio<u64>,
    rho_star: Ratio<u64>,
    target_p: f64,
) -> Result<InsDelParams> {
    ratio_in_open_unit(rho_sz, "ρ_sz", Ratio::from_integer(1))?;
    ratio_in_open_unit(rho_star, "ρ*", Ratio::new(1, 3))?;
    if beta_sz <= Ratio::from_integer(0) || beta_sz > Ratio::from_integer(1) {
        return Err(Error::ConfigInvalid(format!("β_sz = {beta_sz} must lie in (0, 1]")));
    }
    if k == 0 || r == 0 {
        return Err(Error::ConfigInvalid("k and r must be positive".into()));
    }
    let rt = rates(rho_sz, beta_sz);
    let q = q_bound(&rt, &rt.rho_closed);
    let mu_req = mu_required(q, *rho_star.numer() as f64 / *rho_star.denom() as f64, target_p)?;

    let d = k.div_ceil(r);
    let index_len = (ceil_log2(k as u64) as usize).max(1);
    let tau = 3 * r + index_len;
    let core = Ratio::from_integer(tau as u64) / beta_sz;
    if !core.is_integer() {
        return Err(Error::BadRate(format!("τ / β_sz = {core}")));
    }
    let core_len = core.to_integer() as usize;
    let buffer_len = ceil_big(&(&rt.alpha * big_int(tau as i64))).to_usize().expect("buffer fits usize");
    let block_len = 2 * buffer_len + core_len;
    Ok(InsDelParams {
        lambda,
        k,
        r,
        pk_len: r,
        mu: mu_req.min(usize::MAX as u64) as usize,
        mu_required: mu_req,
        target_p,
        rho_sz,
        beta_sz,
        rho_star,
        gamma: rt.gamma,
        alpha: rt.alpha,
        beta: rt.beta,
        rho: rt.rho,
        rho_closed: rt.rho_closed,
        delta: rt.delta,
        q,
        d,
        index_len,
        tau,
        buffer_len,
        core_len,
        block_len,
        big_k: d * block_len,
        scan_slack: DEFAULT_SCAN_SLACK,
    })
}

impl InsDelParams {
    /// Uses `mu` decoder samples instead of `mu_required`.
    pub fn with_mu(mut self, mu: usize) -> Self {
        self.mu = mu.max(1);
        self
    }

    pub fn with_scan_slack(mut self, slack: f64) -> Self {
        self.scan_slack = slack;
        self
    }

    /// Largest raw edit count allowed on the whole codeword at rate `rho`.
    pub fn raw_budget(&self) -> u64 {
        let budget = &self.rho * big_int(2 * self.big_k as i64);
        budget.floor().to_integer().to_u64().unwrap_or(0)
    }

    /// Bad-block fraction bound `2βρ/(γα)` evaluated at `rho`.
    pub fn bad_fraction_bound(&self, rho: &BigRational) -> BigRational {
        big_int(2) * &self.beta * rho / (&self.gamma * &self.alpha)
    }

    pub fn nbs_query_bound(&self, word_len: usize) -> u64 {
        let lg = (word_len.max(2) as f64).log2();
        let ld = (self.d.max(2) as f64).log2();
        (NBS_QUERY_CONSTANT * lg.powi(3) * (self.tau as f64 + ld)).ceil() as u64
    }

    pub fn decode_query_bound(&self, word_len: usize) -> u64 {
        let lg = (word_len.max(2) as f64).log2();
        let lk = (self.k.max(2) as f64).log2();
        (DEC_QUERY_CONSTANT * (lg.powi(3) + self.mu as f64) * (self.r as f64 + lk)).ceil() as u64
    }

    /// `(β + αγ)·τ`, the longest interval a good block can occupy.
    pub fn max_good_interval(&self) -> f64 {
        big_f64(&((&self.beta + &self.alpha * &self.gamma) * big_int(self.tau as i64)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk() -> InsDelParams {
        compute_insdel_params(128, 1024, 128, Ratio::new(7, 3166), Ratio::new(1, 4), Ratio::new(1, 10), 2.0 / 3.0).unwrap()
    }

    #[test]
    fn desk_lengths() {
        let p = desk();
        assert_eq!(p.tau, 394);
        assert_eq!(p.index_len, 10);
        assert_eq!(p.core_len, 1576);
        assert_eq!(p.buffer_len, 1);
        assert_eq!(p.block_len, 1578);
        assert_eq!(p.big_k, 8 * 1578);
        assert_eq!(p.raw_budget(), 0);
    }

    #[test]
    fn exact_identities() {
        let p = desk();
        let rho_sz = big(p.rho_sz);
        assert_eq!(p.gamma, BigRational::new(1.into(), 12.into()));
        assert_eq!(p.alpha, BigRational::new(2.into(), 73.into()) * &rho_sz);
        assert_eq!(p.beta, big_int(2) * &p.alpha + big(p.beta_sz).recip());
        assert_eq!(p.beta, BigRational::new(4.into(), 73.into()) * &rho_sz + big_int(4));
        assert_eq!(&p.delta + p.bad_fraction_bound(&p.rho), BigRational::one());
        let one = BigRational::one();
        let alt = &p.beta / (big_int(2) * (&one - &p.gamma) * (&p.beta - &p.alpha * &p.gamma));
        assert_eq!(p.delta, alt);
        assert!(p.rho_closed < p.rho && p.rho_closed > BigRational::zero());
    }

    #[test]
    fn mid_range_constants() {
        let p = compute_insdel_params(128, 1024, 128, Ratio::new(1, 20), Ratio::new(1, 2), Ratio::new(1, 10), 0.7).unwrap();
        let delta = big_f64(&p.delta);
        assert!(delta > 0.0 && delta < 1.0);
        assert_eq!(&p.delta + p.bad_fraction_bound(&p.rho), BigRational::one());
        assert!(big_f64(&p.rho) > 0.0);
    }

    #[test]
    fn rho_grows_with_rho_sz() {
        let mut last = BigRational::zero();
        for n in 1..=20u64 {
            let rt = rates(Ratio::new(n, 21), Ratio::new(1, 4));
            assert!(rt.rho > last);
            last = rt.rho;
        }
    }

    #[test]
    fn supremum_rate_leaves_no_margin() {
        let rt = rates(Ratio::new(7, 3166), Ratio::new(1, 4));
        let q_sup = q_bound(&rt, &rt.rho);
        assert!(q_sup < 0.5);
        assert!(q_bound(&rt, &rt.rho_closed) > 0.5);
    }

    #[test]
    fn infeasible_targets() {
        let r = |a, b| Ratio::new(a, b);
        assert!(matches!(
            compute_insdel_params(128, 1024, 128, r(7, 3166), r(1, 4), r(1, 4), 0.8),
            Err(Error::InfeasibleTarget(_))
        ));
        assert!(matches!(
            compute_insdel_params(128, 1024, 128, r(7, 3166), r(1, 4), r(1, 2), 0.6),
            Err(Error::ConfigInvalid(_))
        ));
        assert!(mu_required(0.5, 0.1, 0.6).is_err());
    }
}
