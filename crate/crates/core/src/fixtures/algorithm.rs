use std::sync::Arc;

use rand::RngCore;

use crate::bits::Bits;
use crate::error::Result;

use super::{
    enumerate_coins, uniform_pmf, EncryptionScheme, Pmf, SignatureScheme, SigningKey,
    MAX_ENUMERATED_COIN_BITS,
};

/// A randomized algorithm `R(s, x; coins)` with a hardwired secret `s`.
pub trait RandomizedAlgorithm: Send + Sync {
    fn id(&self) -> String;
    fn secret_bits(&self) -> usize;
    fn input_bits(&self) -> usize;
    fn output_bits(&self) -> usize;
    fn coin_bits(&self) -> usize;

    fn secret_gen(&self, rng: &mut dyn RngCore) -> Bits;

    /// The input generator `GenI`.
    fn input_gen(&self, rng: &mut dyn RngCore) -> Bits {
        Bits::random(self.input_bits(), rng)
    }

    /// Exact distribution of `secret_gen`, when enumerable.
    fn secret_pmf(&self) -> Option<Pmf> {
        uniform_pmf(self.secret_bits())
    }

    /// Exact distribution of `input_gen`, when enumerable.
    fn input_pmf(&self) -> Option<Pmf> {
        uniform_pmf(self.input_bits())
    }

    fn run_with_coins(&self, s: &Bits, x: &Bits, coins: &Bits) -> Result<Bits>;

    fn run(&self, s: &Bits, x: &Bits, rng: &mut dyn RngCore) -> Result<Bits> {
        let coins = Bits::random(self.coin_bits(), rng);
        self.run_with_coins(s, x, &coins)
    }

    fn output_pmf(&self, s: &Bits, x: &Bits) -> Option<Result<Pmf>> {
        let r = self.coin_bits();
        if r > MAX_ENUMERATED_COIN_BITS {
            return None;
        }
        Some(enumerate_coins(r, |coins| self.run_with_coins(s, x, coins)))
    }

    /// Whether `y` is a valid output for `(s, x)`, when the algorithm has a
    /// public notion of validity (decryption, verification).
    fn output_consistent(&self, _s: &Bits, _x: &Bits, _y: &Bits) -> Option<bool> {
        None
    }
}

/// `Enc` seen as a randomized algorithm: secret = key, input = message.
#[derive(Clone)]
pub struct EncryptionAlgorithm(pub Arc<dyn EncryptionScheme>);

impl RandomizedAlgorithm for EncryptionAlgorithm {
    fn id(&self) -> String {
        format!("enc[{}]", self.0.id())
    }

    fn secret_bits(&self) -> usize {
        self.0.key_bits()
    }

    fn input_bits(&self) -> usize {
        self.0.message_bits()
    }

    fn output_bits(&self) -> usize {
        self.0.ciphertext_bits()
    }

    fn coin_bits(&self) -> usize {
        self.0.coin_bits()
    }

    fn secret_gen(&self, rng: &mut dyn RngCore) -> Bits {
        self.0.gen(rng)
    }

    fn run_with_coins(&self, s: &Bits, x: &Bits, coins: &Bits) -> Result<Bits> {
        self.0.encrypt_with_coins(s, x, coins)
    }

    fn run(&self, s: &Bits, x: &Bits, rng: &mut dyn RngCore) -> Result<Bits> {
        self.0.encrypt(s, x, rng)
    }

    fn output_pmf(&self, s: &Bits, x: &Bits) -> Option<Result<Pmf>> {
        self.0.ciphertext_pmf(s, x)
    }

    fn output_consistent(&self, s: &Bits, x: &Bits, y: &Bits) -> Option<bool> {
        Some(matches!(self.0.decrypt(s, y), Ok(Some(m)) if &m == x))
    }
}

/// `Sign` seen as a randomized algorithm: secret = signing key, input = message.
#[derive(Clone)]
pub struct SigningAlgorithm(pub Arc<dyn SignatureScheme>);

impl RandomizedAlgorithm for SigningAlgorithm {
    fn id(&self) -> String {
        format!("sign[{}]", self.0.id())
    }

    fn secret_bits(&self) -> usize {
        self.0.key_bits()
    }

    fn input_bits(&self) -> usize {
        self.0.message_bits()
    }

    fn output_bits(&self) -> usize {
        self.0.signature_bits()
    }

    fn coin_bits(&self) -> usize {
        self.0.coin_bits()
    }

    fn secret_gen(&self, rng: &mut dyn RngCore) -> Bits {
        self.0.gen(rng).sk.bits().clone()
    }

    fn run_with_coins(&self, s: &Bits, x: &Bits, coins: &Bits) -> Result<Bits> {
        self.0
            .sign_with_coins(&SigningKey::from_bits(s.clone()), x, coins)
    }

    fn output_consistent(&self, s: &Bits, x: &Bits, y: &Bits) -> Option<bool> {
        let kp = super::KeyPair::from_signing_key(SigningKey::from_bits(s.clone()));
        Some(self.0.verify(&kp.vk, x, y))
    }
}
