use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::prf::Prf;

use super::{check_len, EncryptionScheme, FixtureParams};

const ROUNDS: u8 = 4;

/// Deterministic encryption: a keyed four-round Feistel permutation of the
/// message space, no coins.
#[derive(Clone, Debug)]
pub struct DetScheme {
    kappa: usize,
    message_bits: usize,
}

impl DetScheme {
    pub fn new(kappa: usize, message_bits: usize) -> Result<Self> {
        if message_bits == 0 || !message_bits.is_multiple_of(2) || message_bits > 512 {
            return Err(Error::InvalidParameter(format!(
                "deterministic scheme needs an even message length in 2..=512, got {message_bits}"
            )));
        }
        if kappa == 0 {
            return Err(Error::InvalidParameter("κ must be positive".into()));
        }
        Ok(DetScheme {
            kappa,
            message_bits,
        })
    }

    fn round(&self, prf: &Prf, i: u8, half: &Bits) -> Bits {
        let out = prf.eval_parts(b"feistel", &[&Bits::from_u64(i as u64, 8), half]);
        Bits::from_prefix(&out, self.message_bits / 2)
    }
}

/// The deterministic fixture with 8-bit messages.
pub fn det_scheme(kappa: usize) -> Result<DetScheme> {
    DetScheme::new(kappa, 8)
}

impl EncryptionScheme for DetScheme {
    fn id(&self) -> String {
        format!("det:{}", self.message_bits)
    }

    fn key_bits(&self) -> usize {
        self.kappa
    }

    fn message_bits(&self) -> usize {
        self.message_bits
    }

    fn ciphertext_bits(&self) -> usize {
        self.message_bits
    }

    fn coin_bits(&self) -> usize {
        0
    }

    fn encrypt_with_coins(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        check_len("key", k, self.kappa)?;
        check_len("message", m, self.message_bits)?;
        check_len("coins", coins, 0)?;
        let prf = Prf::new(k.as_bytes());
        let half = self.message_bits / 2;
        let (mut l, mut r) = (m.slice(0, half), m.slice(half, half));
        for i in 0..ROUNDS {
            let f = self.round(&prf, i, &r);
            (l, r) = (r, l.xor(&f)?);
        }
        Ok(l.concat(&r))
    }

    fn decrypt(&self, k: &Bits, c: &Bits) -> Result<Option<Bits>> {
        check_len("key", k, self.kappa)?;
        check_len("ciphertext", c, self.message_bits)?;
        let prf = Prf::new(k.as_bytes());
        let half = self.message_bits / 2;
        let (mut l, mut r) = (c.slice(0, half), c.slice(half, half));
        for i in (0..ROUNDS).rev() {
            let f = self.round(&prf, i, &l);
            (l, r) = (r.xor(&f)?, l);
        }
        Ok(Some(l.concat(&r)))
    }

    fn params(&self) -> FixtureParams {
        FixtureParams {
            kind: "det".into(),
            kappa: self.kappa,
            r: 0,
            ml: self.message_bits,
            cl: self.message_bits,
            t: None,
        }
    }
}
