use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prf::Prf;

use super::{check_len, EncryptionScheme, FixtureParams};

/// `Enc(k, m; ρ) = ρ ∥ (m ⊕ pad(k, ρ))` with an HMAC-derived pad.
///
/// The coin length `r` is adjustable, so the scheme's ciphertext
/// min-entropy is exactly `r` bits; `r = 0` gives a deterministic scheme.
#[derive(Clone, Debug)]
pub struct RandPad {
    kappa: usize,
    message_bits: usize,
    coin_bits: usize,
}

impl RandPad {
    pub fn new(kappa: usize, message_bits: usize, coin_bits: usize) -> Result<Self> {
        if message_bits == 0 || message_bits > 256 {
            return Err(Error::InvalidParameter(format!(
                "randpad message length must be in 1..=256, got {message_bits}"
            )));
        }
        if kappa == 0 {
            return Err(Error::InvalidParameter("κ must be positive".into()));
        }
        Ok(RandPad {
            kappa,
            message_bits,
            coin_bits,
        })
    }

    fn pad(&self, k: &Bits, coins: &Bits) -> Bits {
        let out = Prf::new(k.as_bytes()).eval_parts(b"randpad", &[coins]);
        Bits::from_prefix(&out, self.message_bits)
    }
}

/// RandPad with `r` coin bits and 8-bit messages.
pub fn randpad_scheme(r: usize, kappa: usize) -> Result<RandPad> {
    RandPad::new(kappa, 8, r)
}

impl EncryptionScheme for RandPad {
    fn id(&self) -> String {
        format!("randpad:{}:{}", self.coin_bits, self.message_bits)
    }

    fn key_bits(&self) -> usize {
        self.kappa
    }

    fn message_bits(&self) -> usize {
        self.message_bits
    }

    fn ciphertext_bits(&self) -> usize {
        self.coin_bits + self.message_bits
    }

    fn coin_bits(&self) -> usize {
        self.coin_bits
    }

    fn encrypt_with_coins(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        check_len("key", k, self.kappa)?;
        check_len("message", m, self.message_bits)?;
        check_len("coins", coins, self.coin_bits)?;
        let body = m.xor(&self.pad(k, coins))?;
        Ok(coins.concat(&body))
    }

    fn decrypt(&self, k: &Bits, c: &Bits) -> Result<Option<Bits>> {
        check_len("key", k, self.kappa)?;
        check_len("ciphertext", c, self.ciphertext_bits())?;
        let coins = c.slice(0, self.coin_bits);
        let body = c.slice(self.coin_bits, self.message_bits);
        Ok(Some(body.xor(&self.pad(k, &coins))?))
    }

    fn params(&self) -> FixtureParams {
        FixtureParams {
            kind: "randpad".into(),
            kappa: self.kappa,
            r: self.coin_bits,
            ml: self.message_bits,
            cl: self.ciphertext_bits(),
            t: None,
        }
    }
}
