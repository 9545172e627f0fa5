//! Schnorr signatures in an order-q subgroup of Z_p^*, |p| = λ and |q| = λ/2.
//!
//! This is a desk-scale instantiation: λ = 128 gives 64-bit discrete-log
//! security at best. Signatures are `e ∥ s` with λ/2 bits each, and the
//! nonce is derived from the key and message, so signing is deterministic.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{KeyPair, SecretKey, SigError, SignatureScheme};
use crate::bits::BitString;

pub const MIN_LAMBDA: u32 = 32;
pub const MAX_LAMBDA: u32 = 512;

#[derive(Debug)]
struct Group {
    p: BigUint,
    q: BigUint,
    g: BigUint,
}

#[derive(Clone, Debug)]
pub struct Schnorr {
    lambda: u32,
    group: Arc<Group>,
}

impl Schnorr {
    pub fn new(lambda: u32) -> Result<Self, SigError> {
        if !(MIN_LAMBDA..=MAX_LAMBDA).contains(&lambda) || lambda % 16 != 0 {
            return Err(SigError::UnsupportedLambda(lambda));
        }
        Ok(Self { lambda, group: group_for(lambda) })
    }

    fn half(&self) -> usize {
        self.lambda as usize / 2
    }

    fn challenge(&self, r: &BigUint, m: &BitString) -> BigUint {
        let mut h = Sha256::new();
        h.update(b"crldc/schnorr/challenge");
        h.update(self.lambda.to_be_bytes());
        h.update(to_fixed_bytes(r, self.lambda as usize / 8));
        h.update((m.len() as u64).to_be_bytes());
        h.update(m.to_bytes());
        let digest = h.finalize();
        let bits = BitString::from_bytes(digest.as_slice());
        bits_to_uint(&bits.slice(1, self.half()).expect("digest is 256 bits"))
    }

    fn nonce(&self, x: &[u8], m: &BitString) -> BigUint {
        let q = &self.group.q;
        for counter in 0u32.. {
            let mut h = Sha256::new();
            h.update(b"crldc/schnorr/nonce");
            h.update(x);
            h.update((m.len() as u64).to_be_bytes());
            h.update(m.to_bytes());
            h.update(counter.to_be_bytes());
            let k = BigUint::from_bytes_be(h.finalize().as_slice()) % q;
            if !k.is_zero() {
                return k;
            }
        }
        unreachable!()
    }
}

impl SignatureScheme for Schnorr {
    fn name(&self) -> &'static str {
        "schnorr"
    }

    fn lambda(&self) -> u32 {
        self.lambda
    }

    fn sig_len(&self) -> usize {
        self.lambda as usize
    }

    fn pk_len(&self) -> usize {
        self.lambda as usize
    }

    fn gen(&self, rng: &mut dyn RngCore) -> KeyPair {
        let Group { p, q, g } = &*self.group;
        let x = loop {
            let mut buf = vec![0u8; self.half().div_ceil(8) + 8];
            rng.fill_bytes(&mut buf);
            let x = BigUint::from_bytes_be(&buf) % q;
            if !x.is_zero() {
                break x;
            }
        };
        let y = g.modpow(&x, p);
        KeyPair {
            pk: uint_to_bits(&y, self.lambda as usize),
            sk: SecretKey::new(to_fixed_bytes(&x, self.half() / 8)),
            lambda: self.lambda,
        }
    }

    fn sign(&self, sk: &SecretKey, m: &BitString) -> BitString {
        let Group { p, q, g } = &*self.group;
        let x = BigUint::from_bytes_be(sk.bytes());
        let k = self.nonce(sk.bytes(), m);
        let r = g.modpow(&k, p);
        let e = self.challenge(&r, m);
        let s = (k + x * &e) % q;
        let mut sig = uint_to_bits(&e, self.half());
        sig.extend_from(&uint_to_bits(&s, self.half()));
        sig
    }

    fn verify(&self, pk: &BitString, m: &BitString, sig: &BitString) -> Result<bool, SigError> {
        if pk.len() != self.pk_len() {
            return Err(SigError::MalformedInput(format!("pk has {} bits, expected {}", pk.len(), self.pk_len())));
        }
        if sig.len() != self.sig_len() {
            return Err(SigError::MalformedInput(format!(
                "signature has {} bits, expected {}",
                sig.len(),
                self.sig_len()
            )));
        }
        let Group { p, q, g } = &*self.group;
        let y = bits_to_uint(pk);
        if y.is_zero() || &y >= p {
            return Ok(false);
        }
        let h = self.half();
        let e = bits_to_uint(&sig.slice(1, h).expect("length checked"));
        let s = bits_to_uint(&sig.slice(h + 1, 2 * h).expect("length checked"));
        if &s >= q {
            return Ok(false);
        }
        let neg_e = (q - (&e % q)) % q;
        let r = (g.modpow(&s, p) * y.modpow(&neg_e, p)) % p;
        Ok(self.challenge(&r, m) == e)
    }
}

fn group_for(lambda: u32) -> Arc<Group> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Group>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("group cache poisoned");
    map.entry(lambda).or_insert_with(|| Arc::new(generate_group(lambda))).clone()
}

/// Deterministic per λ so that every process agrees on the public group.
fn generate_group(lambda: u32) -> Group {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c4e_0000 ^ lambda as u64);
    let qbits = lambda as u64 / 2;
    let pbits = lambda as u64;
    let q = loop {
        let mut c = rng.gen_biguint(qbits);
        c.set_bit(qbits - 1, true);
        c.set_bit(0, true);
        if is_probable_prime(&c, &mut rng) {
            break c;
        }
    };
    let lo = (BigUint::one() << (pbits - 1)) / &q + 1u32;
    let hi = ((BigUint::one() << pbits) - 1u32) / &q;
    let p = loop {
        let mut h = rng.gen_biguint_range(&lo, &hi);
        if h.is_odd() {
            h += 1u32;
        }
        let p = &q * h + 1u32;
        if p.bits() == pbits && is_probable_prime(&p, &mut rng) {
            break p;
        }
    };
    let cofactor = (&p - 1u32) / &q;
    let mut a = BigUint::from(2u32);
    let g = loop {
        let g = a.modpow(&cofactor, &p);
        if !g.is_one() {
            break g;
        }
        a += 1u32;
    };
    Group { p, q, g }
}

fn is_probable_prime(n: &BigUint, rng: &mut ChaCha8Rng) -> bool {
    const SMALL: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    for &sp in &SMALL {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> s;
    let two = BigUint::from(2u32);
    'witness: for _ in 0..32 {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn to_fixed_bytes(v: &BigUint, len: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    let mut out = vec![0u8; len.saturating_sub(raw.len())];
    out.extend_from_slice(&raw);
    out
}

fn uint_to_bits(v: &BigUint, width: usize) -> BitString {
    (0..width as u64).rev().map(|k| v.bit(k)).collect()
}

fn bits_to_uint(b: &BitString) -> BigUint {
    let mut v = BigUint::zero();
    for bit in b.iter() {
        v <<= 1;
        if bit {
            v += 1u32;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> BitString {
        (0..n).map(|_| rng.gen()).collect()
    }

    #[test]
    fn lambda_bounds() {
        assert_eq!(Schnorr::new(16).unwrap_err(), SigError::UnsupportedLambda(16));
        assert!(Schnorr::new(40).is_err());
        assert!(Schnorr::new(32).is_ok());
    }

    #[test]
    fn group_is_well_formed() {
        for lambda in [32, 64, 128] {
            let s = Schnorr::new(lambda).unwrap();
            let Group { p, q, g } = &*s.group;
            assert_eq!(p.bits(), lambda as u64);
            assert_eq!(q.bits(), lambda as u64 / 2);
            assert!(((p - 1u32) % q).is_zero());
            assert!(g.modpow(q, p).is_one());
            assert!(!g.is_one());
        }
    }

    #[test]
    fn primality_matches_trial_division() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2u32..3000 {
            let trial = (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_probable_prime(&BigUint::from(n), &mut rng), trial, "n = {n}");
        }
    }

    #[test]
    fn keys_are_distinct_and_sized() {
        let s = Schnorr::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pks: HashSet<BitString> = (0..100).map(|_| s.gen(&mut rng).pk).collect();
        assert_eq!(pks.len(), 100);
        assert!(pks.iter().all(|pk| pk.len() == s.pk_len()));
    }

    #[test]
    fn completeness_and_rejections() {
        let s = Schnorr::new(128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kp = s.gen(&mut rng);
        let other = s.gen(&mut rng);
        let empty = BitString::new();
        assert!(s.verify(&kp.pk, &empty, &s.sign(&kp.sk, &empty)).unwrap());
        for _ in 0..300 {
            let len = rng.gen_range(0..400);
            let m = random_bits(&mut rng, len);
            let sig = s.sign(&kp.sk, &m);
            assert_eq!(sig.len(), s.sig_len());
            assert!(s.verify(&kp.pk, &m, &sig).unwrap());
            assert!(!s.verify(&other.pk, &m, &sig).unwrap());
            if !m.is_empty() {
                let mut m2 = m.clone();
                m2.flip(rng.gen_range(0..m.len()));
                assert!(!s.verify(&kp.pk, &m2, &sig).unwrap());
            }
            let mut sig2 = sig.clone();
            sig2.flip(rng.gen_range(0..sig.len()));
            assert!(!s.verify(&kp.pk, &m, &sig2).unwrap());
        }
    }

    #[test]
    fn malformed_lengths_are_errors() {
        let s = Schnorr::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kp = s.gen(&mut rng);
        let m = BitString::parse("101").unwrap();
        let sig = s.sign(&kp.sk, &m);
        assert!(matches!(s.verify(&kp.pk, &m, &BitString::zeros(3)), Err(SigError::MalformedInput(_))));
        assert!(matches!(s.verify(&BitString::zeros(3), &m, &sig), Err(SigError::MalformedInput(_))));
        assert!(!s.verify(&BitString::zeros(64), &m, &sig).unwrap());
    }

    #[test]
    fn verify_is_deterministic() {
        let s = Schnorr::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kp = s.gen(&mut rng);
        let m = random_bits(&mut rng, 77);
        let sig = random_bits(&mut rng, 64);
        assert_eq!(s.verify(&kp.pk, &m, &sig), s.verify(&kp.pk, &m, &sig));
        assert_eq!(s.sign(&kp.sk, &m), s.sign(&kp.sk, &m));
    }
}
