//! Toy MAC-style signatures.
//!
//! A signature is `ρ ∥ tag(sk, m, ρ)` where the tag is HMAC-SHA256 truncated
//! to `t` bits. Exposing the coins makes the scheme coin-extractable (and,
//! with long tags, coin-injective); dropping them gives a unique signature.
//!
//! Verification needs the signing material, so public verifiability is
//! modelled as a capability: a [`VerifyingKey`] can be handed to an adversary
//! and used through [`SignatureScheme::verify`] but never read or used to
//! sign.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prf::Prf;

use super::{check_len, FixtureParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignatureKind {
    CoinInjective,
    CoinExtractable,
    Unique,
}

impl FromStr for SignatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coin-injective" => Ok(SignatureKind::CoinInjective),
            "coin-extractable" => Ok(SignatureKind::CoinExtractable),
            "unique" => Ok(SignatureKind::Unique),
            other => Err(Error::UnsupportedKind(other.into())),
        }
    }
}

impl fmt::Display for SignatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignatureKind::CoinInjective => "coin-injective",
            SignatureKind::CoinExtractable => "coin-extractable",
            SignatureKind::Unique => "unique",
        })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SigningKey(Bits);

impl SigningKey {
    pub fn from_bits(bits: Bits) -> Self {
        SigningKey(bits)
    }

    pub fn bits(&self) -> &Bits {
        &self.0
    }
}

impl fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SigningKey({} bits)", self.0.len())
    }
}

/// Opaque verification capability.
#[derive(Clone, PartialEq, Eq)]
pub struct VerifyingKey {
    material: Bits,
}

impl fmt::Debug for VerifyingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VerifyingKey(..)")
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub sk: SigningKey,
    pub vk: VerifyingKey,
}

impl KeyPair {
    pub fn from_signing_key(sk: SigningKey) -> Self {
        let vk = VerifyingKey {
            material: sk.0.clone(),
        };
        KeyPair { sk, vk }
    }
}

pub trait SignatureScheme: Send + Sync {
    fn id(&self) -> String;
    fn kind(&self) -> SignatureKind;
    fn key_bits(&self) -> usize;
    fn message_bits(&self) -> usize;
    fn signature_bits(&self) -> usize;
    fn coin_bits(&self) -> usize;

    fn gen(&self, rng: &mut dyn RngCore) -> KeyPair;
    fn sign_with_coins(&self, sk: &SigningKey, m: &Bits, coins: &Bits) -> Result<Bits>;

    fn sign(&self, sk: &SigningKey, m: &Bits, rng: &mut dyn RngCore) -> Result<Bits> {
        let coins = Bits::random(self.coin_bits(), rng);
        self.sign_with_coins(sk, m, &coins)
    }

    fn verify(&self, vk: &VerifyingKey, m: &Bits, sig: &Bits) -> bool;

    /// The coin extractor `B`, for kinds that expose their coins.
    fn extract_coins(&self, sig: &Bits) -> Option<Bits>;

    fn params(&self) -> FixtureParams;
}

#[derive(Clone, Debug)]
pub struct TagSignature {
    kind: SignatureKind,
    kappa: usize,
    message_bits: usize,
    coin_bits: usize,
    tag_bits: usize,
}

impl TagSignature {
    pub fn new(
        kind: SignatureKind,
        kappa: usize,
        message_bits: usize,
        coin_bits: usize,
        tag_bits: usize,
    ) -> Result<Self> {
        if kind == SignatureKind::Unique && coin_bits != 0 {
            return Err(Error::InvalidParameter(
                "unique signatures take no coins".into(),
            ));
        }
        if !(1..=256).contains(&tag_bits) {
            return Err(Error::InvalidParameter(format!(
                "tag length must be in 1..=256, got {tag_bits}"
            )));
        }
        if kappa == 0 {
            return Err(Error::InvalidParameter("κ must be positive".into()));
        }
        Ok(TagSignature {
            kind,
            kappa,
            message_bits,
            coin_bits,
            tag_bits,
        })
    }

    pub fn tag_bits(&self) -> usize {
        self.tag_bits
    }

    fn tag(&self, key: &Bits, m: &Bits, coins: &Bits) -> Bits {
        let out = Prf::new(key.as_bytes()).eval_parts(b"sig", &[coins, m]);
        Bits::from_prefix(&out, self.tag_bits)
    }
}

/// Fixture defaults: 8-bit messages; 4 coin bits and 64-bit tags for the
/// coin-exposing kinds, 8-bit tags and no coins for the unique kind.
pub fn sig_fixture(kind: &str, kappa: usize) -> Result<TagSignature> {
    match kind.parse::<SignatureKind>()? {
        SignatureKind::Unique => TagSignature::new(SignatureKind::Unique, kappa, 8, 0, 8),
        k => TagSignature::new(k, kappa, 8, 4, 64),
    }
}

impl SignatureScheme for TagSignature {
    fn id(&self) -> String {
        format!(
            "sig:{}:r{}:t{}:ml{}",
            self.kind, self.coin_bits, self.tag_bits, self.message_bits
        )
    }

    fn kind(&self) -> SignatureKind {
        self.kind
    }

    fn key_bits(&self) -> usize {
        self.kappa
    }

    fn message_bits(&self) -> usize {
        self.message_bits
    }

    fn signature_bits(&self) -> usize {
        self.coin_bits + self.tag_bits
    }

    fn coin_bits(&self) -> usize {
        self.coin_bits
    }

    fn gen(&self, rng: &mut dyn RngCore) -> KeyPair {
        KeyPair::from_signing_key(SigningKey(Bits::random(self.kappa, rng)))
    }

    fn sign_with_coins(&self, sk: &SigningKey, m: &Bits, coins: &Bits) -> Result<Bits> {
        check_len("signing key", &sk.0, self.kappa)?;
        check_len("message", m, self.message_bits)?;
        check_len("coins", coins, self.coin_bits)?;
        Ok(coins.concat(&self.tag(&sk.0, m, coins)))
    }

    fn verify(&self, vk: &VerifyingKey, m: &Bits, sig: &Bits) -> bool {
        if m.len() != self.message_bits || sig.len() != self.signature_bits() {
            return false;
        }
        let coins = sig.slice(0, self.coin_bits);
        let tag = sig.slice(self.coin_bits, self.tag_bits);
        self.tag(&vk.material, m, &coins) == tag
    }

    fn extract_coins(&self, sig: &Bits) -> Option<Bits> {
        match self.kind {
            SignatureKind::Unique => None,
            _ if sig.len() == self.signature_bits() => Some(sig.slice(0, self.coin_bits)),
            _ => None,
        }
    }

    fn params(&self) -> FixtureParams {
        FixtureParams {
            kind: format!("sig-{}", self.kind),
            kappa: self.kappa,
            r: self.coin_bits,
            ml: self.message_bits,
            cl: self.signature_bits(),
            t: Some(self.tag_bits),
        }
    }
}
