//! Test-scale primitives that the attacks subvert.
//!
//! Every randomized primitive exposes explicit-coin evaluation: fixing the
//! coins makes it a pure function, and the sampling entry points only draw
//! coins and delegate.

mod algorithm;
mod det;
mod randpad;
mod signature;

use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

pub use algorithm::{EncryptionAlgorithm, RandomizedAlgorithm, SigningAlgorithm};
pub use det::{det_scheme, DetScheme};
pub use randpad::{randpad_scheme, RandPad};
pub use signature::{
    sig_fixture, KeyPair, SignatureKind, SignatureScheme, SigningKey, TagSignature, VerifyingKey,
};

/// Exact distribution over documents.
pub type Pmf = BTreeMap<Bits, f64>;

/// Largest coin length for which distributions are computed by enumeration.
pub const MAX_ENUMERATED_COIN_BITS: usize = 16;

/// Serializable description of a fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    pub kind: String,
    #[serde(rename = "κ")]
    pub kappa: usize,
    pub r: usize,
    pub ml: usize,
    pub cl: usize,
    pub t: Option<usize>,
}

/// A symmetric encryption scheme with explicit coins.
pub trait EncryptionScheme: Send + Sync {
    fn id(&self) -> String;
    fn key_bits(&self) -> usize;
    fn message_bits(&self) -> usize;
    fn ciphertext_bits(&self) -> usize;
    fn coin_bits(&self) -> usize;

    fn gen(&self, rng: &mut dyn RngCore) -> Bits {
        Bits::random(self.key_bits(), rng)
    }

    /// `Enc(k, m; coins)`, a deterministic function of its arguments.
    fn encrypt_with_coins(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits>;

    fn encrypt(&self, k: &Bits, m: &Bits, rng: &mut dyn RngCore) -> Result<Bits> {
        let coins = Bits::random(self.coin_bits(), rng);
        self.encrypt_with_coins(k, m, &coins)
    }

    /// `None` is the rejection symbol ⊥.
    fn decrypt(&self, k: &Bits, c: &Bits) -> Result<Option<Bits>>;

    /// Exact ciphertext distribution of `Enc(k, m)`, by enumerating coins.
    fn ciphertext_pmf(&self, k: &Bits, m: &Bits) -> Option<Result<Pmf>> {
        let r = self.coin_bits();
        if r > MAX_ENUMERATED_COIN_BITS {
            return None;
        }
        Some(enumerate_coins(r, |coins| {
            self.encrypt_with_coins(k, m, coins)
        }))
    }

    /// Validity of a ciphertext under a public verification key, for
    /// schemes that have one.
    fn verify_public(&self, _c: &Bits) -> Option<bool> {
        None
    }

    fn params(&self) -> FixtureParams;
}

/// Pushes every coin string of length `coin_bits` through `f`, each with
/// weight `2^-coin_bits`.
pub(crate) fn enumerate_coins(
    coin_bits: usize,
    mut f: impl FnMut(&Bits) -> Result<Bits>,
) -> Result<Pmf> {
    let w = (-(coin_bits as f64)).exp2();
    let mut pmf = Pmf::new();
    for coins in Bits::all(coin_bits) {
        *pmf.entry(f(&coins)?).or_insert(0.0) += w;
    }
    Ok(pmf)
}

/// Uniform distribution over `{0,1}^bits`, `None` above the enumeration limit.
pub fn uniform_pmf(bits: usize) -> Option<Pmf> {
    if bits > MAX_ENUMERATED_COIN_BITS {
        return None;
    }
    let w = (-(bits as f64)).exp2();
    Some(Bits::all(bits).map(|d| (d, w)).collect())
}

pub(crate) fn check_len(what: &'static str, bits: &Bits, expected: usize) -> Result<()> {
    if bits.len() != expected {
        return Err(Error::LengthMismatch {
            what,
            expected,
            actual: bits.len(),
        });
    }
    Ok(())
}

/// Looks up a fixture by its command-line name: `randpad:<r>`,
/// `randpad:<r>:<ml>`, `det` or `det:<ml>`.
pub fn scheme_by_name(name: &str, kappa: usize) -> Result<std::sync::Arc<dyn EncryptionScheme>> {
    let mut parts = name.split(':');
    let kind = parts.next().unwrap_or_default();
    let nums: Vec<usize> = parts
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number {p:?} in {name:?}")))
        })
        .collect::<Result<_>>()?;
    match (kind, nums.as_slice()) {
        ("randpad", [r]) => Ok(std::sync::Arc::new(RandPad::new(kappa, 8, *r)?)),
        ("randpad", [r, ml]) => Ok(std::sync::Arc::new(RandPad::new(kappa, *ml, *r)?)),
        ("det", []) => Ok(std::sync::Arc::new(det_scheme(kappa)?)),
        ("det", [ml]) => Ok(std::sync::Arc::new(DetScheme::new(kappa, *ml)?)),
        _ => Err(Error::InvalidParameter(format!(
            "unknown host scheme {name:?}"
        ))),
    }
}
