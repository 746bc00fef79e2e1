//! HMAC-SHA256 pseudorandom function and the `(b, j)` output split used by
//! rejection sampling.
//!
//! The PRF is applied to the packed payload bytes of a document. Output bits
//! are consumed from the most significant end of the 256-bit tag, big-endian:
//! the first `value_bits` bits form the embedded value and the following bits
//! select the position it is embedded at.

use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::Sha256;

use crate::bits::{Bits, Document};
use crate::error::{Error, Result};

type HmacSha256 = Hmac<Sha256>;

/// Attacker key `ak`, a uniformly random κ-bit string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AttackKey(Bits);

impl AttackKey {
    pub fn generate<R: RngCore + ?Sized>(kappa: usize, rng: &mut R) -> Self {
        AttackKey(Bits::random(kappa, rng))
    }

    pub fn from_bits(bits: Bits) -> Self {
        AttackKey(bits)
    }

    pub fn bits(&self) -> &Bits {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

impl std::fmt::Debug for AttackKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AttackKey({} bits)", self.0.len())
    }
}

/// Keyed HMAC-SHA256 with the key schedule done once.
#[derive(Clone)]
pub struct Prf {
    mac: HmacSha256,
}

impl Prf {
    pub fn new(key: &[u8]) -> Self {
        let mac = HmacSha256::new_from_slice(key).expect("HMAC accepts any key length");
        Prf { mac }
    }

    pub fn from_key(ak: &AttackKey) -> Self {
        Self::new(ak.bits().as_bytes())
    }

    pub fn eval(&self, input: &[u8]) -> [u8; 32] {
        let mut mac = self.mac.clone();
        mac.update(input);
        mac.finalize().into_bytes().into()
    }

    /// Evaluates a sequence of labelled parts without ambiguity between
    /// different splits of the same bytes.
    pub fn eval_parts(&self, domain: &[u8], parts: &[&Bits]) -> [u8; 32] {
        let mut mac = self.mac.clone();
        mac.update(&(domain.len() as u32).to_be_bytes());
        mac.update(domain);
        for p in parts {
            mac.update(&(p.len() as u32).to_be_bytes());
            mac.update(p.as_bytes());
        }
        mac.finalize().into_bytes().into()
    }

    pub fn eval_doc(&self, d: &Document) -> [u8; 32] {
        self.eval(d.as_bytes())
    }

    /// `(b, j)`: the first output bit and the next `log2(ml)` bits as an index.
    pub fn split(&self, d: &Document, ml: usize) -> Result<(bool, usize)> {
        let index_bits = log2_exact(ml)?;
        let out = self.eval_doc(d);
        let b = read_bits(&out, 0, 1) == 1;
        let j = read_bits(&out, 1, index_bits) as usize;
        Ok((b, j))
    }

    /// Block generalisation of [`Prf::split`]: a `value_bits`-bit value and a
    /// block index uniform over `blocks`.
    ///
    /// When `blocks` is a power of two the index is the next `log2(blocks)`
    /// bits, so `value_bits = 1, blocks = ml` coincides with `split`.
    /// Otherwise the next 64 bits are reduced modulo `blocks`.
    pub fn split_block(&self, d: &Document, value_bits: usize, blocks: usize) -> (u64, usize) {
        assert!(
            (1..=32).contains(&value_bits),
            "value_bits must be in 1..=32"
        );
        assert!(blocks >= 1, "need at least one block");
        let out = self.eval_doc(d);
        let value = read_bits(&out, 0, value_bits);
        let j = if blocks.is_power_of_two() {
            read_bits(&out, value_bits, blocks.trailing_zeros() as usize) as usize
        } else {
            (read_bits(&out, value_bits, 64) % blocks as u64) as usize
        };
        (value, j)
    }
}

/// `log2(n)` for a power of two, the error otherwise.
pub fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Reads `n <= 64` bits starting at bit `offset`, most significant first.
pub fn read_bits(bytes: &[u8], offset: usize, n: usize) -> u64 {
    assert!(n <= 64);
    assert!(offset + n <= bytes.len() * 8, "read past end of PRF output");
    (offset..offset + n).fold(0u64, |acc, i| {
        (acc << 1) | ((bytes[i / 8] >> (7 - i % 8)) & 1) as u64
    })
}
