//! Rate limits of universal substitution attacks: the signed encryption
//! family, the forger built from a universal attack, `φ`, and rate reports.

use std::cell::RefCell;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use rand::SeedableRng;

use crate::asa::{
    universal_asa, EncryptionOracle, OracleAttack, SchemeOracle, SubstitutionAttack, TracedOracle,
    UniversalAttack,
};
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::fixtures::{
    EncryptionAlgorithm, EncryptionScheme, FixtureParams, KeyPair, SignatureScheme,
};
use crate::games::{
    estimate_unrel_asa, run_enc_asa_dist, run_sig_forge, AsaWatchdog, Forger, GameReport,
    SignOracle, TrialRng,
};
use crate::prf::{AttackKey, Prf};
use crate::stats::std_error;
use crate::stego::{RejSam, State, StegoParams};

/// `Enc(k, m) = c ∥ Sign(sk, c)` over a base scheme, with a key pair fixed
/// at construction. Decryption verifies first. Signature messages longer
/// than the base ciphertext sign `c` padded with zeros.
#[derive(Clone)]
pub struct SignedScheme {
    base: Arc<dyn EncryptionScheme>,
    sig: Arc<dyn SignatureScheme>,
    kp: KeyPair,
}

/// `make_signed_family`: one member `SES_{pk,sk}` of the family.
pub fn make_signed_family(
    base: Arc<dyn EncryptionScheme>,
    sig: Arc<dyn SignatureScheme>,
    kp: KeyPair,
) -> Result<SignedScheme> {
    if sig.message_bits() < base.ciphertext_bits() {
        return Err(Error::LengthMismatch {
            what: "signature message",
            expected: base.ciphertext_bits(),
            actual: sig.message_bits(),
        });
    }
    Ok(SignedScheme { base, sig, kp })
}

fn pad_to(c: &Bits, len: usize) -> Bits {
    if c.len() == len {
        c.clone()
    } else {
        c.concat(&Bits::zeros(len - c.len()))
    }
}

impl SignedScheme {
    pub fn base(&self) -> &Arc<dyn EncryptionScheme> {
        &self.base
    }

    pub fn signature(&self) -> &Arc<dyn SignatureScheme> {
        &self.sig
    }

    /// Splits `c ∥ σ`.
    pub fn split(&self, ct: &Bits) -> Result<(Bits, Bits)> {
        split_signed(ct, self.base.ciphertext_bits(), self.sig.signature_bits())
    }

    /// `Vrfy(pk, c, σ)` on a full ciphertext.
    pub fn verify(&self, ct: &Bits) -> bool {
        match self.split(ct) {
            Ok((c, s)) => self
                .sig
                .verify(&self.kp.vk, &pad_to(&c, self.sig.message_bits()), &s),
            Err(_) => false,
        }
    }
}

fn split_signed(ct: &Bits, cl: usize, sigl: usize) -> Result<(Bits, Bits)> {
    if ct.len() != cl + sigl {
        return Err(Error::LengthMismatch {
            what: "signed ciphertext",
            expected: cl + sigl,
            actual: ct.len(),
        });
    }
    Ok((ct.slice(0, cl), ct.slice(cl, sigl)))
}

impl EncryptionScheme for SignedScheme {
    fn id(&self) -> String {
        format!("signed[{},{}]", self.base.id(), self.sig.id())
    }

    fn key_bits(&self) -> usize {
        self.base.key_bits()
    }

    fn message_bits(&self) -> usize {
        self.base.message_bits()
    }

    fn ciphertext_bits(&self) -> usize {
        self.base.ciphertext_bits() + self.sig.signature_bits()
    }

    /// Base coins followed by signing coins.
    fn coin_bits(&self) -> usize {
        self.base.coin_bits() + self.sig.coin_bits()
    }

    fn gen(&self, rng: &mut dyn RngCore) -> Bits {
        self.base.gen(rng)
    }

    fn encrypt_with_coins(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        if coins.len() != self.coin_bits() {
            return Err(Error::LengthMismatch {
                what: "coins",
                expected: self.coin_bits(),
                actual: coins.len(),
            });
        }
        let r = self.base.coin_bits();
        let c = self.base.encrypt_with_coins(k, m, &coins.slice(0, r))?;
        let s = self.sig.sign_with_coins(
            &self.kp.sk,
            &pad_to(&c, self.sig.message_bits()),
            &coins.slice(r, self.sig.coin_bits()),
        )?;
        Ok(c.concat(&s))
    }

    fn decrypt(&self, k: &Bits, ct: &Bits) -> Result<Option<Bits>> {
        let (c, _) = self.split(ct)?;
        if !self.verify(ct) {
            return Ok(None);
        }
        self.base.decrypt(k, &c)
    }

    fn verify_public(&self, ct: &Bits) -> Option<bool> {
        Some(self.verify(ct))
    }

    fn params(&self) -> FixtureParams {
        let base = self.base.params();
        FixtureParams {
            kind: format!("signed-{}", base.kind),
            kappa: base.kappa,
            r: self.coin_bits(),
            ml: base.ml,
            cl: self.ciphertext_bits(),
            t: self.sig.params().t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiParams {
    pub outl: u64,
    pub query: u64,
    pub ml: u64,
}

/// `log2 φ = outl·log2(outl·query) − ml`. Exact whenever `outl·query` is a
/// power of two (including the zero cases), otherwise one rounding of the
/// logarithm.
pub fn log2_phi(p: PhiParams) -> f64 {
    let ml = p.ml as f64;
    if p.outl == 0 {
        return -ml;
    }
    let base = u128::from(p.outl) * u128::from(p.query);
    if base == 0 {
        return f64::NEG_INFINITY;
    }
    if base.is_power_of_two() {
        let e = i128::from(p.outl) * i128::from(base.trailing_zeros()) - i128::from(p.ml);
        return e as f64;
    }
    p.outl as f64 * (base as f64).log2() - ml
}

/// `φ` itself; `+∞` once it leaves the `f64` range.
pub fn phi(p: PhiParams) -> f64 {
    log2_phi(p).exp2()
}

/// Host oracle simulated by a forger: base encryption followed by a call to
/// its signing oracle. The signing part of the coins is ignored because the
/// signing oracle draws its own.
struct ForgerOracle<'a, 'o> {
    base: &'a dyn EncryptionScheme,
    sign: RefCell<&'o mut dyn SignOracle>,
    sig_message_bits: usize,
    sig_coin_bits: usize,
    sig_bits: usize,
}

impl EncryptionOracle for ForgerOracle<'_, '_> {
    fn message_bits(&self) -> usize {
        self.base.message_bits()
    }

    fn ciphertext_bits(&self) -> usize {
        self.base.ciphertext_bits() + self.sig_bits
    }

    fn coin_bits(&self) -> usize {
        self.base.coin_bits() + self.sig_coin_bits
    }

    fn query(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        if coins.len() != self.coin_bits() {
            return Err(Error::LengthMismatch {
                what: "coins",
                expected: self.coin_bits(),
                actual: coins.len(),
            });
        }
        let c = self
            .base
            .encrypt_with_coins(k, m, &coins.slice(0, self.base.coin_bits()))?;
        let s = self
            .sign
            .borrow_mut()
            .sign(&pad_to(&c, self.sig_message_bits))?;
        Ok(c.concat(&s))
    }

    fn verify_output(&self, ct: &Bits) -> Option<bool> {
        let (c, s) = split_signed(ct, self.base.ciphertext_bits(), self.sig_bits).ok()?;
        Some(
            self.sign
                .borrow()
                .verify(&pad_to(&c, self.sig_message_bits), &s),
        )
    }
}

/// Sig-Forge adversary built from a universal attack on the signed family:
/// it runs one subverted encryption on random `(ak, am, k, m)`, answers the
/// attack's oracle calls with base encryptions signed by its own signing
/// oracle, and submits the first output `(ĉ, σ̂)`.
#[derive(Clone)]
pub struct UniversalForger {
    attack: Arc<dyn OracleAttack>,
    base: Arc<dyn EncryptionScheme>,
    sig_coin_bits: usize,
}

/// `forger_from_universal_asa`.
pub fn forger_from_universal_asa(
    asa: &UniversalAttack,
    base: Arc<dyn EncryptionScheme>,
    sig: &dyn SignatureScheme,
) -> UniversalForger {
    UniversalForger {
        attack: asa.attack().clone(),
        base,
        sig_coin_bits: sig.coin_bits(),
    }
}

impl UniversalForger {
    /// The forgery attempt together with whether `ĉ` came out of an oracle
    /// answer.
    pub fn attempt(
        &self,
        oracle: &mut dyn SignOracle,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, Bits, bool)> {
        let ak = self.attack.gen(rng);
        let am = Bits::random(self.attack.message_bits(), rng);
        let k = self.base.gen(rng);
        let m = Bits::random(self.base.message_bits(), rng);
        let sig_message_bits = oracle.message_bits();
        let sig_bits = oracle.signature_bits();
        let fo = ForgerOracle {
            base: self.base.as_ref(),
            sign: RefCell::new(oracle),
            sig_message_bits,
            sig_coin_bits: self.sig_coin_bits,
            sig_bits,
        };
        let mut traced = TracedOracle::new(&fo);
        let (out, _) =
            self.attack
                .encrypt_with(&ak, &am, &k, &m, State::empty(), &mut traced, rng)?;
        let transcript = traced.into_transcript();
        let (c, s) = split_signed(&out, self.base.ciphertext_bits(), sig_bits)?;
        Ok((
            pad_to(&c, sig_message_bits),
            s,
            transcript.contains_output(&out),
        ))
    }
}

impl Forger for UniversalForger {
    fn name(&self) -> String {
        "universal-asa".into()
    }

    fn run(&self, oracle: &mut dyn SignOracle, rng: &mut TrialRng) -> Result<(Bits, Bits)> {
        let (m, s, _) = self.attempt(oracle, rng)?;
        Ok((m, s))
    }
}

/// Demonstration attack that fabricates its output: one ciphertext
/// `(am ⊕ F_ak(tail)) ∥ tail` of the base length after `queries` discarded
/// oracle calls, signed by trying the last `search_bits` bits of the
/// signature against the host's public check. Receivers drop outputs that
/// fail that check.
#[derive(Clone, Copy, Debug)]
pub struct FabricatingAttack {
    pub message_bits: usize,
    pub base_ciphertext_bits: usize,
    pub queries: usize,
    pub search_bits: u32,
}

impl FabricatingAttack {
    pub fn new(message_bits: usize, base_ciphertext_bits: usize) -> Result<Self> {
        if message_bits > 256 || message_bits > base_ciphertext_bits {
            return Err(Error::InvalidParameter(format!(
                "cannot fabricate {message_bits} hidden bits in a {base_ciphertext_bits}-bit ciphertext"
            )));
        }
        Ok(FabricatingAttack {
            message_bits,
            base_ciphertext_bits,
            queries: 4,
            search_bits: 8,
        })
    }

    fn mask(&self, ak: &AttackKey, tail: &Bits) -> Bits {
        let out = Prf::from_key(ak).eval_parts(b"fabricate", &[tail]);
        Bits::from_byte_slice(&out).slice(0, self.message_bits)
    }

    fn recover(&self, ak: &AttackKey, ct: &Bits) -> Result<Bits> {
        let head = ct.slice(0, self.message_bits);
        let tail = ct.slice(
            self.message_bits,
            self.base_ciphertext_bits - self.message_bits,
        );
        head.xor(&self.mask(ak, &tail))
    }

    fn check_count(outputs: &[Bits]) -> Result<()> {
        if outputs.len() != 1 {
            return Err(Error::WrongDocumentCount {
                expected: 1,
                actual: outputs.len(),
            });
        }
        Ok(())
    }
}

impl OracleAttack for FabricatingAttack {
    fn message_bits(&self) -> usize {
        self.message_bits
    }

    fn output_len(&self) -> usize {
        1
    }

    fn key_bits(&self) -> usize {
        128
    }

    fn encrypt_with(
        &self,
        ak: &AttackKey,
        am: &Bits,
        k: &Bits,
        m: &Bits,
        state: State,
        oracle: &mut TracedOracle<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)> {
        for _ in 0..self.queries {
            oracle.query_fresh(k, m, rng)?;
        }
        let sig_bits = oracle
            .ciphertext_bits()
            .checked_sub(self.base_ciphertext_bits)
            .ok_or_else(|| {
                Error::InvalidParameter("host ciphertexts shorter than the base".into())
            })?;
        let tail = Bits::random(self.base_ciphertext_bits - self.message_bits, rng);
        let c = am.xor(&self.mask(ak, &tail))?.concat(&tail);
        let tries = 1u64 << self.search_bits.min(sig_bits.min(63) as u32);
        let mut out = c.concat(&Bits::zeros(sig_bits));
        for v in 0..tries {
            let s = low_bits(sig_bits, v);
            out = c.concat(&s);
            if oracle.verify_output(&out) != Some(false) {
                break;
            }
        }
        Ok((out, state))
    }

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>> {
        Self::check_count(outputs)?;
        self.recover(ak, &outputs[0]).map(Some)
    }

    fn extract_with(
        &self,
        ak: &AttackKey,
        outputs: &[Bits],
        oracle: &dyn EncryptionOracle,
    ) -> Result<Option<Bits>> {
        Self::check_count(outputs)?;
        if oracle.verify_output(&outputs[0]) == Some(false) {
            return Ok(None);
        }
        self.recover(ak, &outputs[0]).map(Some)
    }
}

fn low_bits(len: usize, v: u64) -> Bits {
    if len <= 64 {
        Bits::from_u64(v & if len == 64 { u64::MAX } else { (1 << len) - 1 }, len)
    } else {
        Bits::zeros(len - 64).concat(&Bits::from_u64(v, 64))
    }
}

/// Rate of an attack together with the forger inequality
/// `success ≥ 1 − insec − unrel − φ`, instantiated with measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub ml: u64,
    pub outl: u64,
    pub bits_per_ciphertext: f64,
    pub log2_phi: f64,
    pub insec_hat: f64,
    pub unrel_hat: f64,
    /// `1 − insec − unrel − φ`; absent once `φ` overflows.
    pub forger_bound: Option<f64>,
    pub forger_success_hat: Option<f64>,
}

/// Builds a rate report. `insec` takes the largest normalized advantage
/// among the given distinguishing reports.
pub fn rate_report(
    p: PhiParams,
    insec: &[GameReport],
    unrel: Option<&GameReport>,
    forger: Option<&GameReport>,
) -> RateReport {
    let insec_hat = insec
        .iter()
        .filter_map(|r| r.normalized_advantage)
        .fold(0.0, f64::max);
    let unrel_hat = unrel.map_or(0.0, |r| r.p_hat);
    let l = log2_phi(p);
    let bound = 1.0 - insec_hat - unrel_hat - l.exp2();
    RateReport {
        ml: p.ml,
        outl: p.outl,
        bits_per_ciphertext: if p.outl == 0 {
            0.0
        } else {
            p.ml as f64 / p.outl as f64
        },
        log2_phi: l,
        insec_hat,
        unrel_hat,
        forger_bound: bound.is_finite().then_some(bound),
        forger_success_hat: forger.map(|r| r.p_hat),
    }
}

/// Whether measured forger success clears the bound minus three combined
/// standard errors of the three measured terms.
pub fn inequality_holds(
    report: &RateReport,
    insec: &[GameReport],
    unrel: Option<&GameReport>,
    forger: &GameReport,
) -> bool {
    let Some(bound) = report.forger_bound else {
        return true;
    };
    let insec_se = insec
        .iter()
        .filter(|r| r.normalized_advantage == Some(report.insec_hat))
        .map(|r| 2.0 * r.std_error())
        .next()
        .unwrap_or(0.0);
    let unrel_se = unrel.map_or(0.0, |r| std_error(r.p_hat, r.trials));
    let se = (forger.std_error().powi(2) + insec_se.powi(2) + unrel_se.powi(2)).sqrt();
    forger.p_hat >= bound - 3.0 * se
}

/// Which universal attack a [`LowerBoundSetup`] runs.
#[derive(Clone, Debug)]
pub enum LowerBoundAttack {
    /// RejSam whose channel draws are oracle queries.
    RejSam(StegoParams),
    /// [`FabricatingAttack`] hiding `message_bits` bits.
    Fabricating { message_bits: usize },
}

/// One member of the signed family over `base` and the universal attack
/// run against it.
#[derive(Clone)]
pub struct LowerBoundSetup {
    pub base: Arc<dyn EncryptionScheme>,
    pub sig: Arc<dyn SignatureScheme>,
    pub family: Arc<SignedScheme>,
    pub attack: UniversalAttack,
    /// Oracle calls per output the attack can make.
    pub query_bound: u64,
}

/// Measured terms of the rate inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateRun {
    pub report: RateReport,
    pub holds: bool,
    pub insec: Vec<GameReport>,
    pub unrel: GameReport,
    pub forger: GameReport,
}

impl LowerBoundSetup {
    /// The key pair of the family member is drawn from `key_seed`.
    pub fn new(
        base: Arc<dyn EncryptionScheme>,
        sig: Arc<dyn SignatureScheme>,
        key_seed: u64,
        attack: LowerBoundAttack,
    ) -> Result<Self> {
        let kp = sig.gen(&mut rand_chacha::ChaCha20Rng::seed_from_u64(key_seed));
        let family = Arc::new(make_signed_family(base.clone(), sig.clone(), kp)?);
        let oracle = Arc::new(SchemeOracle(family.clone()));
        let (attack, query_bound) = match attack {
            LowerBoundAttack::RejSam(p) => {
                let q = p.s as u64 + 1;
                (universal_asa(RejSam::new(p)?, oracle), q)
            }
            LowerBoundAttack::Fabricating { message_bits } => {
                let fa = FabricatingAttack::new(message_bits, base.ciphertext_bits())?;
                let q = fa.queries as u64;
                (UniversalAttack::new(Arc::new(fa), oracle), q)
            }
        };
        Ok(LowerBoundSetup {
            base,
            sig,
            family,
            attack,
            query_bound,
        })
    }

    pub fn forger(&self) -> UniversalForger {
        forger_from_universal_asa(&self.attack, self.base.clone(), self.sig.as_ref())
    }

    pub fn phi_params(&self) -> PhiParams {
        PhiParams {
            outl: self.attack.output_len() as u64,
            query: self.query_bound,
            ml: self.attack.message_bits() as u64,
        }
    }

    pub fn forger_report(&self, n: u64, seed: u64) -> Result<GameReport> {
        run_sig_forge(&self.forger(), self.sig.as_ref(), n, seed)
    }

    /// Forger success against the bound, with insecurity taken over the
    /// given watchdogs. All three estimates use `n` trials.
    pub fn rate(&self, watchdogs: &[&dyn AsaWatchdog], n: u64, seed: u64) -> Result<RateRun> {
        let forger = self.forger_report(n, seed)?;
        let insec = watchdogs
            .iter()
            .map(|w| run_enc_asa_dist(*w, &self.attack, self.family.clone(), n, seed))
            .collect::<Result<Vec<_>>>()?;
        let host = EncryptionAlgorithm(self.family.clone());
        let unrel = estimate_unrel_asa(&self.attack, &host, n, seed)?;
        let report = rate_report(self.phi_params(), &insec, Some(&unrel), Some(&forger));
        let holds = inequality_holds(&report, &insec, Some(&unrel), &forger);
        Ok(RateRun {
            report,
            holds,
            insec,
            unrel,
            forger,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asa::{universal_asa, SchemeOracle, SharedOracle, SubstitutionAttack};
    use crate::fixtures::{randpad_scheme, RandPad, SignatureKind, TagSignature};
    use crate::games::{estimate_unrel_asa, run_sig_forge, RecordingSignOracle};
    use crate::stego::{RejSam, StegoParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn tag_sig(
        kind: SignatureKind,
        msg: usize,
        coins: usize,
        t: usize,
    ) -> Arc<dyn SignatureScheme> {
        Arc::new(TagSignature::new(kind, 128, msg, coins, t).unwrap())
    }

    fn signed(
        base: Arc<dyn EncryptionScheme>,
        sig: Arc<dyn SignatureScheme>,
        seed: u64,
    ) -> SignedScheme {
        let kp = sig.gen(&mut ChaCha20Rng::seed_from_u64(seed));
        make_signed_family(base, sig, kp).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(
            log2_phi(PhiParams {
                outl: 1,
                query: 4,
                ml: 64
            }),
            -62.0
        );
        assert_eq!(
            log2_phi(PhiParams {
                outl: 256,
                query: 2,
                ml: 16
            }),
            2288.0
        );
        assert!(
            log2_phi(PhiParams {
                outl: 3,
                query: 5,
                ml: 0
            }) >= 0.0
        );
        assert!(
            (phi(PhiParams {
                outl: 1,
                query: 4,
                ml: 64
            }) - 2.168404344971009e-19)
                .abs()
                < 1e-30
        );
        let big = log2_phi(PhiParams {
            outl: 1 << 20,
            query: 1 << 20,
            ml: 64,
        });
        assert_eq!(big, (40u64 << 20) as f64 - 64.0);
        assert!(log2_phi(PhiParams {
            outl: (1 << 20) - 1,
            query: 3,
            ml: 8
        })
        .is_finite());
    }

    #[test]
    fn signed_scheme_roundtrip_and_tamper() {
        let base: Arc<dyn EncryptionScheme> = Arc::new(randpad_scheme(8, 128).unwrap());
        let s = signed(base, tag_sig(SignatureKind::CoinInjective, 16, 4, 64), 1);
        assert_eq!(s.ciphertext_bits(), 16 + 68);
        assert_eq!(s.coin_bits(), 12);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..50 {
            let k = s.gen(&mut rng);
            let m = Bits::random(8, &mut rng);
            let ct = s.encrypt(&k, &m, &mut rng).unwrap();
            assert_eq!(s.decrypt(&k, &ct).unwrap(), Some(m));
            let mut bad = ct.clone();
            bad.set(ct.len() - 1, !ct.get(ct.len() - 1));
            assert_eq!(s.decrypt(&k, &bad).unwrap(), None);
        }
        let short: Arc<dyn EncryptionScheme> = Arc::new(randpad_scheme(8, 128).unwrap());
        let sig = tag_sig(SignatureKind::Unique, 8, 0, 8);
        let kp = sig.gen(&mut rng);
        assert!(make_signed_family(short, sig, kp).is_err());
    }

    fn max_prob(s: &dyn EncryptionScheme, k: &Bits, m: &Bits) -> f64 {
        s.ciphertext_pmf(k, m)
            .unwrap()
            .unwrap()
            .values()
            .fold(0.0, |a: f64, &b| a.max(b))
    }

    #[test]
    fn signed_family_min_entropy() {
        // visible signing coins add their length; a coinless signature adds nothing
        let base: Arc<dyn EncryptionScheme> = Arc::new(RandPad::new(128, 4, 4).unwrap());
        let coined = signed(
            base.clone(),
            tag_sig(SignatureKind::CoinInjective, 8, 4, 16),
            3,
        );
        let unique = signed(base.clone(), tag_sig(SignatureKind::Unique, 8, 0, 16), 3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..5 {
            let k = base.gen(&mut rng);
            let m = Bits::random(4, &mut rng);
            let h_base = -max_prob(base.as_ref(), &k, &m).log2();
            assert_eq!(h_base, 4.0);
            assert_eq!(-max_prob(&coined, &k, &m).log2(), 8.0);
            assert_eq!(-max_prob(&unique, &k, &m).log2(), 4.0);
        }
    }

    fn universal_rejsam(oracle: SharedOracle) -> UniversalAttack {
        let steg = RejSam::new(StegoParams::new(128, 8, 64, 1, None, Some(64)).unwrap()).unwrap();
        universal_asa(steg, oracle)
    }

    #[test]
    fn universal_rejsam_only_replays_oracle_pairs() {
        let base: Arc<dyn EncryptionScheme> = Arc::new(randpad_scheme(8, 128).unwrap());
        let sig = tag_sig(SignatureKind::CoinInjective, 16, 4, 64);
        let fam = Arc::new(signed(base.clone(), sig.clone(), 5));
        let asa = universal_rejsam(Arc::new(SchemeOracle(fam.clone())));
        let forger = forger_from_universal_asa(&asa, base, sig.as_ref());
        let mut fresh = 0;
        for t in 0..100 {
            let mut rng = TrialRng::new(6, t);
            let kp = sig.gen(&mut rng);
            let mut oracle = RecordingSignOracle::new(sig.as_ref(), kp, rng.clone());
            let (m, _, from_oracle) = forger.attempt(&mut oracle, &mut rng).unwrap();
            assert!(from_oracle);
            assert!(oracle.queried().contains(&m));
            fresh += usize::from(!from_oracle);
        }
        assert_eq!(fresh, 0);
        let r = run_sig_forge(&forger, sig.as_ref(), 300, 6).unwrap();
        assert_eq!(r.success_count, 0);
    }

    fn fabricating_setup(
        t: usize,
    ) -> (
        Arc<dyn EncryptionScheme>,
        Arc<dyn SignatureScheme>,
        UniversalAttack,
    ) {
        let base: Arc<dyn EncryptionScheme> = Arc::new(RandPad::new(128, 64, 8).unwrap());
        let sig = tag_sig(SignatureKind::CoinInjective, 72, 4, t);
        let fam: Arc<dyn EncryptionScheme> = Arc::new(signed(base.clone(), sig.clone(), 7));
        let fab = FabricatingAttack::new(64, 72).unwrap();
        let asa = UniversalAttack::new(Arc::new(fab), Arc::new(SchemeOracle(fam)));
        (base, sig, asa)
    }

    #[test]
    fn fabricating_attack_forges_short_tags_only() {
        let (base, sig, asa) = fabricating_setup(8);
        let forger = forger_from_universal_asa(&asa, base.clone(), sig.as_ref());
        let r = run_sig_forge(&forger, sig.as_ref(), 200, 8).unwrap();
        assert!(r.p_hat >= 0.9, "{r:?}");
        let host = crate::fixtures::EncryptionAlgorithm(Arc::new(signed(base, sig, 7)));
        let u = estimate_unrel_asa(&asa, &host, 200, 8).unwrap();
        assert!(u.p_hat <= 0.01, "{u:?}");

        let (base, sig, asa) = fabricating_setup(64);
        let forger = forger_from_universal_asa(&asa, base.clone(), sig.as_ref());
        let r = run_sig_forge(&forger, sig.as_ref(), 200, 9).unwrap();
        assert!(r.p_hat <= 0.01, "{r:?}");
        let host = crate::fixtures::EncryptionAlgorithm(Arc::new(signed(base, sig, 7)));
        let u = estimate_unrel_asa(&asa, &host, 200, 9).unwrap();
        assert!(u.p_hat >= 0.99, "{u:?}");
        assert_eq!(asa.output_len(), 1);
    }

    #[test]
    fn fabricated_outputs_never_come_from_the_oracle() {
        let (base, sig, asa) = fabricating_setup(8);
        let forger = forger_from_universal_asa(&asa, base, sig.as_ref());
        for t in 0..50 {
            let mut rng = TrialRng::new(10, t);
            let kp = sig.gen(&mut rng);
            let mut oracle = RecordingSignOracle::new(sig.as_ref(), kp, rng.clone());
            let (_, _, from_oracle) = forger.attempt(&mut oracle, &mut rng).unwrap();
            assert!(!from_oracle);
            assert_eq!(oracle.queried().len(), 4);
        }
    }

    #[test]
    fn rate_examples() {
        let empty: Vec<GameReport> = Vec::new();
        let r = rate_report(
            PhiParams {
                outl: 256,
                query: 2,
                ml: 16,
            },
            &empty,
            None,
            None,
        );
        assert_eq!(r.bits_per_ciphertext, 0.0625);
        assert_eq!(r.forger_bound, None);
        let b = rate_report(
            PhiParams {
                outl: 49,
                query: 64,
                ml: 64,
            },
            &empty,
            None,
            None,
        );
        assert!((b.bits_per_ciphertext - 64.0 / 49.0).abs() < 1e-12);
        let f = rate_report(
            PhiParams {
                outl: 1,
                query: 4,
                ml: 64,
            },
            &empty,
            None,
            None,
        );
        assert_eq!(f.bits_per_ciphertext, 64.0);
        assert!(f.forger_bound.unwrap() > 0.999);
        let v = serde_json::to_value(&f).unwrap();
        for key in [
            "ml",
            "outl",
            "bits_per_ciphertext",
            "log2_phi",
            "insec_hat",
            "unrel_hat",
            "forger_bound",
            "forger_success_hat",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn setup_wires_the_fabricating_run() {
        let base: Arc<dyn EncryptionScheme> = Arc::new(RandPad::new(128, 64, 8).unwrap());
        let sig = tag_sig(SignatureKind::CoinInjective, 72, 4, 8);
        let lb = LowerBoundSetup::new(
            base,
            sig,
            3,
            LowerBoundAttack::Fabricating { message_bits: 64 },
        )
        .unwrap();
        let p = lb.phi_params();
        assert_eq!((p.outl, p.query, p.ml), (1, 4, 64));
        assert_eq!(log2_phi(p), -62.0);
        assert!(lb.forger_report(100, 5).unwrap().p_hat >= 0.9);
    }
}
