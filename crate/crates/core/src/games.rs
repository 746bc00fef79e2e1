//! Monte Carlo security experiments and a small library of adversaries.
//!
//! Every trial owns one ChaCha20 stream derived from `(seed, trial)`. The
//! game, its oracles and the adversary all draw from that stream through
//! clones of a [`TrialRng`] handle, so results do not depend on how trials
//! are scheduled across threads, and two games that make the same calls in
//! the same order see the same randomness.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asa::{asa_enc_all, SubstitutionAttack};
use crate::bits::{Bits, Document, History};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::fixtures::{
    EncryptionAlgorithm, EncryptionScheme, RandomizedAlgorithm, SignatureScheme,
};
use crate::stats::{chi_square_quantile, chi_square_uniform, std_error, wilson95};
use crate::stego::{encode_all, encode_scheduled, Schedule, State, Stegosystem};

/// Shared handle on one trial's random stream.
#[derive(Clone)]
pub struct TrialRng(Rc<RefCell<ChaCha20Rng>>);

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        TrialRng(Rc::new(RefCell::new(rng)))
    }
}

impl RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.0.borrow_mut().next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.borrow_mut().next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.borrow_mut().fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.borrow_mut().try_fill_bytes(dest)
    }
}

/// Runs `n` independent trials in parallel and counts the ones returning
/// `true`. The first error aborts the count.
pub fn count_successes<F>(n: u64, seed: u64, trial: F) -> Result<u64>
where
    F: Fn(u64, TrialRng) -> Result<bool> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| trial(i, TrialRng::new(seed, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub game: String,
    pub trials: u64,
    pub success_count: u64,
    pub p_hat: f64,
    /// `2·|p̂ − 1/2|` for distinguishing games, absent for forgery and
    /// unreliability estimates.
    pub normalized_advantage: Option<f64>,
    pub ci95: (f64, f64),
    pub seed: u64,
    pub config: serde_json::Value,
}

impl GameReport {
    pub fn new(
        game: &str,
        trials: u64,
        success_count: u64,
        seed: u64,
        distinguishing: bool,
        config: serde_json::Value,
    ) -> Self {
        let p_hat = if trials == 0 {
            0.0
        } else {
            success_count as f64 / trials as f64
        };
        GameReport {
            game: game.into(),
            trials,
            success_count,
            p_hat,
            normalized_advantage: distinguishing.then(|| 2.0 * (p_hat - 0.5).abs()),
            ci95: wilson95(success_count, trials),
            seed,
            config,
        }
    }

    /// The Wilson interval for `p` mapped through `2·|p − 1/2|`.
    pub fn advantage_ci95(&self) -> (f64, f64) {
        let (lo, hi) = self.ci95;
        let (a, b) = (2.0 * (lo - 0.5).abs(), 2.0 * (hi - 0.5).abs());
        if lo <= 0.5 && 0.5 <= hi {
            (0.0, a.max(b))
        } else {
            (a.min(b), a.max(b))
        }
    }

    /// Whether the advantage interval reaches zero.
    pub fn ci_contains_zero_advantage(&self) -> bool {
        self.ci95.0 <= 0.5 && 0.5 <= self.ci95.1
    }

    pub fn std_error(&self) -> f64 {
        std_error(self.p_hat, self.trials)
    }

    pub const CSV_HEADER: [&'static str; 9] = [
        "game",
        "trials",
        "success_count",
        "p_hat",
        "normalized_advantage",
        "ci95_lo",
        "ci95_hi",
        "seed",
        "config",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.game.clone(),
            self.trials.to_string(),
            self.success_count.to_string(),
            self.p_hat.to_string(),
            self.normalized_advantage
                .map(|a| a.to_string())
                .unwrap_or_default(),
            self.ci95.0.to_string(),
            self.ci95.1.to_string(),
            self.seed.to_string(),
            self.config.to_string(),
        ]
    }
}

/// The report with the largest `p̂`, standing in for a maximum over a
/// parameter grid.
pub fn worst_case(reports: Vec<GameReport>) -> Option<GameReport> {
    reports
        .into_iter()
        .max_by(|a, b| a.p_hat.total_cmp(&b.p_hat))
}

/// The hidden bit of one trial and the adversary's guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub b: bool,
    pub guess: bool,
}

impl Decision {
    pub fn correct(self) -> bool {
        self.b == self.guess
    }
}

fn coin(rng: &mut TrialRng) -> bool {
    rng.next_u32() & 1 == 1
}

// ---------------------------------------------------------------------------
// CPA-Dist

/// Encryption oracle of the CPA game: real ciphertexts or fresh random
/// strings of the same length.
pub trait CpaOracle {
    fn message_bits(&self) -> usize;
    fn ciphertext_bits(&self) -> usize;
    fn encrypt(&mut self, m: &Bits) -> Result<Bits>;
}

pub trait CpaAdversary: Send + Sync {
    fn name(&self) -> String;
    /// Guess for the hidden bit: `true` means random strings.
    fn run(&self, oracle: &mut dyn CpaOracle, rng: &mut TrialRng) -> Result<bool>;
}

struct CpaGameOracle<'a> {
    ses: &'a dyn EncryptionScheme,
    k: Bits,
    b: bool,
    rng: TrialRng,
}

impl CpaOracle for CpaGameOracle<'_> {
    fn message_bits(&self) -> usize {
        self.ses.message_bits()
    }

    fn ciphertext_bits(&self) -> usize {
        self.ses.ciphertext_bits()
    }

    fn encrypt(&mut self, m: &Bits) -> Result<Bits> {
        if self.b {
            Ok(Bits::random(self.ses.ciphertext_bits(), &mut self.rng))
        } else {
            self.ses.encrypt(&self.k, m, &mut self.rng)
        }
    }
}

/// One CPA-Dist trial on the given stream.
pub fn cpa_trial(
    att: &dyn CpaAdversary,
    ses: &dyn EncryptionScheme,
    mut rng: TrialRng,
) -> Result<Decision> {
    let b = coin(&mut rng);
    let k = ses.gen(&mut rng);
    let mut oracle = CpaGameOracle {
        ses,
        k,
        b,
        rng: rng.clone(),
    };
    let guess = att.run(&mut oracle, &mut rng)?;
    Ok(Decision { b, guess })
}

pub fn run_cpa_dist(
    att: &dyn CpaAdversary,
    ses: &dyn EncryptionScheme,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let wins = count_successes(n, seed, |_, rng| Ok(cpa_trial(att, ses, rng)?.correct()))?;
    let config = json!({"adversary": att.name(), "host": ses.id()});
    Ok(GameReport::new("cpa-dist", n, wins, seed, true, config))
}

// ---------------------------------------------------------------------------
// EncASA-Dist / RASA-Dist

/// Challenge oracle of the substitution-detection games: honest `R(s, x)`
/// or the attack, with the watchdog choosing everything but the attack key.
pub trait AsaOracle {
    fn hidden_message_bits(&self) -> usize;
    fn query(
        &mut self,
        am: &Bits,
        secret: &Bits,
        input: &Bits,
        state: State,
    ) -> Result<(Bits, State)>;
}

pub trait AsaWatchdog: Send + Sync {
    fn name(&self) -> String;
    /// Guess for the hidden bit: `true` means subverted. The honest
    /// algorithm is public.
    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool>;
}

struct AsaGameOracle<'a> {
    asa: &'a dyn SubstitutionAttack,
    host: &'a dyn RandomizedAlgorithm,
    ak: crate::prf::AttackKey,
    b: bool,
    rng: TrialRng,
}

impl AsaOracle for AsaGameOracle<'_> {
    fn hidden_message_bits(&self) -> usize {
        self.asa.message_bits()
    }

    fn query(
        &mut self,
        am: &Bits,
        secret: &Bits,
        input: &Bits,
        state: State,
    ) -> Result<(Bits, State)> {
        if self.b {
            self.asa
                .encrypt(&self.ak, am, secret, input, state, &mut self.rng)
        } else {
            Ok((self.host.run(secret, input, &mut self.rng)?, state))
        }
    }
}

/// RASA-Dist: the watchdog against an attack on a randomized algorithm.
pub fn run_rasa_dist(
    watchdog: &dyn AsaWatchdog,
    asa: &dyn SubstitutionAttack,
    host: &dyn RandomizedAlgorithm,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    run_asa_game("rasa-dist", watchdog, asa, host, n, seed)
}

/// EncASA-Dist: RASA-Dist with `R = Enc`.
pub fn run_enc_asa_dist(
    watchdog: &dyn AsaWatchdog,
    asa: &dyn SubstitutionAttack,
    ses: Arc<dyn EncryptionScheme>,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let host = EncryptionAlgorithm(ses);
    run_asa_game("enc-asa-dist", watchdog, asa, &host, n, seed)
}

/// One trial of the substitution-detection game on the given stream.
pub fn asa_trial(
    watchdog: &dyn AsaWatchdog,
    asa: &dyn SubstitutionAttack,
    host: &dyn RandomizedAlgorithm,
    mut rng: TrialRng,
) -> Result<Decision> {
    let b = coin(&mut rng);
    let ak = asa.gen(&mut rng);
    let mut oracle = AsaGameOracle {
        asa,
        host,
        ak,
        b,
        rng: rng.clone(),
    };
    let guess = watchdog.run(&mut oracle, host, &mut rng)?;
    Ok(Decision { b, guess })
}

fn run_asa_game(
    game: &str,
    watchdog: &dyn AsaWatchdog,
    asa: &dyn SubstitutionAttack,
    host: &dyn RandomizedAlgorithm,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    if asa.output_bits() != host.output_bits() {
        return Err(Error::LengthMismatch {
            what: "attack output",
            expected: host.output_bits(),
            actual: asa.output_bits(),
        });
    }
    let wins = count_successes(n, seed, |_, rng| {
        Ok(asa_trial(watchdog, asa, host, rng)?.correct())
    })?;
    let config = json!({"watchdog": watchdog.name(), "host": host.id()});
    Ok(GameReport::new(game, n, wins, seed, true, config))
}

// ---------------------------------------------------------------------------
// SS-CHA-Dist

/// Oracles of the steganographic game: free channel samples plus the
/// challenge (cover document or stego document).
pub trait StegoOracle {
    fn hidden_message_bits(&self) -> usize;
    fn sample(&mut self, h: &History) -> Result<Document>;
    fn challenge(&mut self, am: &Bits, h: &History) -> Result<Document>;
}

pub trait Warden: Send + Sync {
    fn name(&self) -> String;
    /// Guess for the hidden bit: `true` means stego.
    fn run(&self, oracle: &mut dyn StegoOracle, rng: &mut TrialRng) -> Result<bool>;
}

struct StegoGameOracle<'a> {
    steg: &'a dyn Stegosystem,
    channel: &'a dyn Channel,
    ak: crate::prf::AttackKey,
    b: bool,
    state: State,
    rng: TrialRng,
}

impl StegoOracle for StegoGameOracle<'_> {
    fn hidden_message_bits(&self) -> usize {
        self.steg.message_bits()
    }

    fn sample(&mut self, h: &History) -> Result<Document> {
        self.channel.sample(h, &mut self.rng)
    }

    fn challenge(&mut self, am: &Bits, h: &History) -> Result<Document> {
        if self.b {
            let state = std::mem::take(&mut self.state);
            let (d, state) =
                self.steg
                    .encode(&self.ak, am, self.channel, h, state, &mut self.rng)?;
            self.state = state;
            Ok(d)
        } else {
            self.channel.sample(h, &mut self.rng)
        }
    }
}

/// One SS-CHA-Dist trial on the given stream.
pub fn ss_cha_trial(
    warden: &dyn Warden,
    steg: &dyn Stegosystem,
    channel: &dyn Channel,
    mut rng: TrialRng,
) -> Result<Decision> {
    let b = coin(&mut rng);
    let ak = steg.gen(&mut rng);
    let mut oracle = StegoGameOracle {
        steg,
        channel,
        ak,
        b,
        state: State::empty(),
        rng: rng.clone(),
    };
    let guess = warden.run(&mut oracle, &mut rng)?;
    Ok(Decision { b, guess })
}

pub fn run_ss_cha_dist(
    warden: &dyn Warden,
    steg: &dyn Stegosystem,
    channel: &dyn Channel,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let wins = count_successes(n, seed, |_, rng| {
        Ok(ss_cha_trial(warden, steg, channel, rng)?.correct())
    })?;
    let config = json!({"warden": warden.name(), "channel": channel.descriptor()});
    Ok(GameReport::new("ss-cha-dist", n, wins, seed, true, config))
}

// ---------------------------------------------------------------------------
// Sig-Forge

/// What a forger may use: a signing oracle and the verification capability.
pub trait SignOracle {
    fn message_bits(&self) -> usize;
    fn signature_bits(&self) -> usize;
    fn sign(&mut self, m: &Bits) -> Result<Bits>;
    fn verify(&self, m: &Bits, sig: &Bits) -> bool;
}

pub trait Forger: Send + Sync {
    fn name(&self) -> String;
    /// A forgery attempt `(m, σ)`.
    fn run(&self, oracle: &mut dyn SignOracle, rng: &mut TrialRng) -> Result<(Bits, Bits)>;
}

/// Signing oracle that remembers the set `Q` of signed messages.
pub struct RecordingSignOracle<'a> {
    sig: &'a dyn SignatureScheme,
    kp: crate::fixtures::KeyPair,
    queried: Vec<Bits>,
    rng: TrialRng,
}

impl<'a> RecordingSignOracle<'a> {
    pub fn new(sig: &'a dyn SignatureScheme, kp: crate::fixtures::KeyPair, rng: TrialRng) -> Self {
        RecordingSignOracle {
            sig,
            kp,
            queried: Vec::new(),
            rng,
        }
    }

    pub fn queried(&self) -> &[Bits] {
        &self.queried
    }
}

impl SignOracle for RecordingSignOracle<'_> {
    fn message_bits(&self) -> usize {
        self.sig.message_bits()
    }

    fn signature_bits(&self) -> usize {
        self.sig.signature_bits()
    }

    fn sign(&mut self, m: &Bits) -> Result<Bits> {
        self.queried.push(m.clone());
        self.sig.sign(&self.kp.sk, m, &mut self.rng)
    }

    fn verify(&self, m: &Bits, sig: &Bits) -> bool {
        self.sig.verify(&self.kp.vk, m, sig)
    }
}

pub fn run_sig_forge(
    forger: &dyn Forger,
    sig: &dyn SignatureScheme,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let wins = count_successes(n, seed, |_, mut rng| {
        let kp = sig.gen(&mut rng);
        let mut oracle = RecordingSignOracle::new(sig, kp.clone(), rng.clone());
        let (m, s) = forger.run(&mut oracle, &mut rng)?;
        Ok(!oracle.queried.contains(&m) && sig.verify(&kp.vk, &m, &s))
    })?;
    let config = json!({"forger": forger.name(), "signature": sig.id()});
    Ok(GameReport::new("sig-forge", n, wins, seed, false, config))
}

// ---------------------------------------------------------------------------
// Unreliability

/// Failure rate of `Ext(ak, asa_enc_all(ak, am, s, x_1..x_outl))` over random
/// `ak, am, s` and inputs drawn by the host's input generator.
pub fn estimate_unrel_asa(
    asa: &dyn SubstitutionAttack,
    host: &dyn RandomizedAlgorithm,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let fails = count_successes(n, seed, |_, mut rng| {
        let ak = asa.gen(&mut rng);
        let am = Bits::random(asa.message_bits(), &mut rng);
        let s = host.secret_gen(&mut rng);
        let xs: Vec<_> = (0..asa.output_len())
            .map(|_| host.input_gen(&mut rng))
            .collect();
        let cs = asa_enc_all(asa, &ak, &am, &s, &xs, &mut rng)?;
        Ok(asa.extract(&ak, &cs)? != Some(am))
    })?;
    let config = json!({"system": "asa", "host": host.id(), "ml": asa.message_bits(), "outl": asa.output_len()});
    Ok(GameReport::new("unrel", n, fails, seed, false, config))
}

/// A history made of `len` successive channel samples.
pub fn sample_history(channel: &dyn Channel, len: usize, rng: &mut dyn RngCore) -> Result<History> {
    let mut h = History::new();
    for _ in 0..len {
        let d = channel.sample(&h, rng)?;
        h.push(d);
    }
    Ok(h)
}

/// Failure rate of decoding `outl` documents encoded from a history of
/// `prefix_len` channel samples.
pub fn estimate_unrel_stego(
    steg: &dyn Stegosystem,
    channel: &dyn Channel,
    prefix_len: usize,
    n: u64,
    seed: u64,
) -> Result<GameReport> {
    let fails = count_successes(n, seed, |_, mut rng| {
        let ak = steg.gen(&mut rng);
        let am = Bits::random(steg.message_bits(), &mut rng);
        let h = sample_history(channel, prefix_len, &mut rng)?;
        let docs = encode_all(steg, &ak, &am, channel, &h, steg.output_len(), &mut rng)?;
        Ok(steg.decode(&ak, &docs)? != Some(am))
    })?;
    let config = json!({
        "system": "stego",
        "channel": channel.descriptor(),
        "ml": steg.message_bits(),
        "outl": steg.output_len(),
    });
    Ok(GameReport::new("unrel", n, fails, seed, false, config))
}

/// Splits `outl` into `tau` nearly equal segments, each starting from its
/// own freshly sampled history of `prefix_len` documents.
pub fn split_schedule(
    channel: &dyn Channel,
    prefix_len: usize,
    outl: usize,
    tau: usize,
    rng: &mut dyn RngCore,
) -> Result<Schedule> {
    if tau == 0 || tau > outl.max(1) {
        return Err(Error::InvalidParameter(format!(
            "τ must be in 1..={outl}, got {tau}"
        )));
    }
    (0..tau)
        .map(|i| {
            let len = outl / tau + usize::from(i < outl % tau);
            Ok((sample_history(channel, prefix_len, rng)?, len))
        })
        .collect()
}

/// Reboot-unreliability: failure rate when encoding is restarted along the
/// schedules produced by `schedule`.
pub fn estimate_unrel_star<F>(
    steg: &dyn Stegosystem,
    channel: &dyn Channel,
    schedule: F,
    n: u64,
    seed: u64,
) -> Result<GameReport>
where
    F: Fn(&mut dyn RngCore) -> Result<Schedule> + Sync,
{
    let fails = count_successes(n, seed, |_, mut rng| {
        let ak = steg.gen(&mut rng);
        let am = Bits::random(steg.message_bits(), &mut rng);
        let plan = schedule(&mut rng)?;
        let docs = encode_scheduled(steg, &ak, &am, channel, &plan, &mut rng)?;
        Ok(steg.decode(&ak, &docs)? != Some(am))
    })?;
    let config = json!({
        "system": "stego",
        "channel": channel.descriptor(),
        "ml": steg.message_bits(),
        "outl": steg.output_len(),
    });
    Ok(GameReport::new("unrel-star", n, fails, seed, false, config))
}

// ---------------------------------------------------------------------------
// Built-in adversaries

fn collisions(items: &[Bits]) -> u64 {
    let mut counts: HashMap<&Bits, u64> = HashMap::new();
    for it in items {
        *counts.entry(it).or_insert(0) += 1;
    }
    counts.values().map(|&c| c * (c - 1) / 2).sum()
}

fn prefix_counts(items: &[Bits], bits: usize) -> Vec<u64> {
    let bits = bits.min(items.first().map_or(0, Bits::len)).min(16);
    let mut counts = vec![0u64; 1 << bits];
    for it in items {
        counts[it.slice(0, bits).to_u64() as usize] += 1;
    }
    counts
}

/// `true` if `observed` scores higher than `reference`, a coin flip on ties.
fn compare(observed: f64, reference: f64, rng: &mut TrialRng) -> bool {
    match observed.partial_cmp(&reference) {
        Some(std::cmp::Ordering::Greater) => true,
        Some(std::cmp::Ordering::Less) => false,
        _ => coin(rng),
    }
}

/// Always answers the same bit.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub bool);

/// Ignores the oracles and flips a coin.
#[derive(Clone, Copy, Debug)]
pub struct CoinFlip;

/// Asks the same question twice. For CPA a repeated ciphertext means real
/// encryption; against substitution attacks it flags outputs that fail the
/// host's public validity check, or that differ on a deterministic host.
#[derive(Clone, Copy, Debug)]
pub struct RepeatQuery;

/// Pearson statistic of the leading `bits` bits of `queries` answers.
/// Against a key-less oracle it is compared with the chi-square median;
/// where honest samples are available it is compared with the statistic of
/// as many honest samples.
#[derive(Clone, Copy, Debug)]
pub struct ChiSquare {
    pub queries: usize,
    pub bits: usize,
}

impl Default for ChiSquare {
    fn default() -> Self {
        ChiSquare {
            queries: 32,
            bits: 4,
        }
    }
}

/// Repeats one query `queries` times and compares the number of repeated
/// answers with that of as many honest samples for the same question.
#[derive(Clone, Copy, Debug)]
pub struct RepeatFrequency {
    pub queries: usize,
}

impl Default for RepeatFrequency {
    fn default() -> Self {
        RepeatFrequency { queries: 2 }
    }
}

/// Flags the attack as soon as one of `queries` outputs fails the host's
/// validity check.
#[derive(Clone, Copy, Debug)]
pub struct ValidityCheck {
    pub queries: usize,
}

impl CpaAdversary for Constant {
    fn name(&self) -> String {
        format!("constant-{}", u8::from(self.0))
    }

    fn run(&self, _oracle: &mut dyn CpaOracle, _rng: &mut TrialRng) -> Result<bool> {
        Ok(self.0)
    }
}

impl CpaAdversary for CoinFlip {
    fn name(&self) -> String {
        "coin-flip".into()
    }

    fn run(&self, _oracle: &mut dyn CpaOracle, rng: &mut TrialRng) -> Result<bool> {
        Ok(coin(rng))
    }
}

impl CpaAdversary for RepeatQuery {
    fn name(&self) -> String {
        "repeat-query".into()
    }

    fn run(&self, oracle: &mut dyn CpaOracle, rng: &mut TrialRng) -> Result<bool> {
        let m = Bits::random(oracle.message_bits(), rng);
        let a = oracle.encrypt(&m)?;
        let b = oracle.encrypt(&m)?;
        Ok(a != b)
    }
}

impl CpaAdversary for ChiSquare {
    fn name(&self) -> String {
        format!("chi2-q{}-b{}", self.queries, self.bits)
    }

    fn run(&self, oracle: &mut dyn CpaOracle, rng: &mut TrialRng) -> Result<bool> {
        let mut outs = Vec::with_capacity(self.queries);
        for _ in 0..self.queries {
            let m = Bits::random(oracle.message_bits(), rng);
            outs.push(oracle.encrypt(&m)?);
        }
        let gof = chi_square_uniform(&prefix_counts(&outs, self.bits));
        // random strings sit below the median half of the time
        Ok(gof.statistic < chi_square_quantile(gof.dof, 0.5))
    }
}

impl AsaWatchdog for Constant {
    fn name(&self) -> String {
        format!("constant-{}", u8::from(self.0))
    }

    fn run(
        &self,
        _o: &mut dyn AsaOracle,
        _h: &dyn RandomizedAlgorithm,
        _r: &mut TrialRng,
    ) -> Result<bool> {
        Ok(self.0)
    }
}

impl AsaWatchdog for CoinFlip {
    fn name(&self) -> String {
        "coin-flip".into()
    }

    fn run(
        &self,
        _o: &mut dyn AsaOracle,
        _h: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        Ok(coin(rng))
    }
}

impl AsaWatchdog for RepeatQuery {
    fn name(&self) -> String {
        "repeat-query".into()
    }

    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        let s = host.secret_gen(rng);
        let x = host.input_gen(rng);
        let am = Bits::random(oracle.hidden_message_bits(), rng);
        let (a, state) = oracle.query(&am, &s, &x, State::empty())?;
        let (b, _) = oracle.query(&am, &s, &x, state)?;
        let invalid = [&a, &b]
            .iter()
            .any(|y| host.output_consistent(&s, &x, y) == Some(false));
        Ok(invalid || (host.coin_bits() == 0 && a != b))
    }
}

impl AsaWatchdog for ChiSquare {
    fn name(&self) -> String {
        format!("chi2-q{}-b{}", self.queries, self.bits)
    }

    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        let mut seen = Vec::with_capacity(self.queries);
        let mut honest = Vec::with_capacity(self.queries);
        let mut state = State::empty();
        for _ in 0..self.queries {
            let s = host.secret_gen(rng);
            let x = host.input_gen(rng);
            let am = Bits::random(oracle.hidden_message_bits(), rng);
            let (y, next) = oracle.query(&am, &s, &x, state)?;
            state = next;
            seen.push(y);
            honest.push(host.run(&s, &x, rng)?);
        }
        let a = chi_square_uniform(&prefix_counts(&seen, self.bits)).statistic;
        let b = chi_square_uniform(&prefix_counts(&honest, self.bits)).statistic;
        Ok(compare(a, b, rng))
    }
}

impl AsaWatchdog for RepeatFrequency {
    fn name(&self) -> String {
        format!("repeat-frequency-q{}", self.queries)
    }

    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        let s = host.secret_gen(rng);
        let x = host.input_gen(rng);
        let am = Bits::random(oracle.hidden_message_bits(), rng);
        let mut seen = Vec::with_capacity(self.queries);
        let mut state = State::empty();
        for _ in 0..self.queries {
            let (y, next) = oracle.query(&am, &s, &x, state)?;
            state = next;
            seen.push(y);
        }
        let honest = (0..self.queries)
            .map(|_| host.run(&s, &x, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(compare(
            collisions(&seen) as f64,
            collisions(&honest) as f64,
            rng,
        ))
    }
}

impl AsaWatchdog for ValidityCheck {
    fn name(&self) -> String {
        format!("validity-q{}", self.queries)
    }

    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        let mut state = State::empty();
        let mut invalid = false;
        for _ in 0..self.queries {
            let s = host.secret_gen(rng);
            let x = host.input_gen(rng);
            let am = Bits::random(oracle.hidden_message_bits(), rng);
            let (y, next) = oracle.query(&am, &s, &x, state)?;
            state = next;
            invalid |= host.output_consistent(&s, &x, &y) == Some(false);
        }
        Ok(invalid)
    }
}

impl Warden for Constant {
    fn name(&self) -> String {
        format!("constant-{}", u8::from(self.0))
    }

    fn run(&self, _oracle: &mut dyn StegoOracle, _rng: &mut TrialRng) -> Result<bool> {
        Ok(self.0)
    }
}

impl Warden for CoinFlip {
    fn name(&self) -> String {
        "coin-flip".into()
    }

    fn run(&self, _oracle: &mut dyn StegoOracle, rng: &mut TrialRng) -> Result<bool> {
        Ok(coin(rng))
    }
}

/// Warden adaptors of the watchdog strategies. Each challenge history is a
/// run of `prefix_len` channel samples, so on an encryption channel
/// `prefix_len = ℓ + 1` yields key, messages and no ciphertexts yet.
#[derive(Clone, Copy, Debug)]
pub struct HistoryWarden<S> {
    pub strategy: S,
    pub prefix_len: usize,
}

fn sample_prefix(oracle: &mut dyn StegoOracle, len: usize) -> Result<History> {
    let mut h = History::new();
    for _ in 0..len {
        let d = oracle.sample(&h)?;
        h.push(d);
    }
    Ok(h)
}

impl Warden for HistoryWarden<ChiSquare> {
    fn name(&self) -> String {
        format!(
            "chi2-q{}-b{}-p{}",
            self.strategy.queries, self.strategy.bits, self.prefix_len
        )
    }

    fn run(&self, oracle: &mut dyn StegoOracle, rng: &mut TrialRng) -> Result<bool> {
        let mut seen = Vec::with_capacity(self.strategy.queries);
        let mut honest = Vec::with_capacity(self.strategy.queries);
        for _ in 0..self.strategy.queries {
            let h = sample_prefix(oracle, self.prefix_len)?;
            let am = Bits::random(oracle.hidden_message_bits(), rng);
            seen.push(oracle.challenge(&am, &h)?);
            honest.push(oracle.sample(&h)?);
        }
        let a = chi_square_uniform(&prefix_counts(&seen, self.strategy.bits)).statistic;
        let b = chi_square_uniform(&prefix_counts(&honest, self.strategy.bits)).statistic;
        Ok(compare(a, b, rng))
    }
}

impl Warden for HistoryWarden<RepeatFrequency> {
    fn name(&self) -> String {
        format!(
            "repeat-frequency-q{}-p{}",
            self.strategy.queries, self.prefix_len
        )
    }

    fn run(&self, oracle: &mut dyn StegoOracle, rng: &mut TrialRng) -> Result<bool> {
        let h = sample_prefix(oracle, self.prefix_len)?;
        let am = Bits::random(oracle.hidden_message_bits(), rng);
        let seen = (0..self.strategy.queries)
            .map(|_| oracle.challenge(&am, &h))
            .collect::<Result<Vec<_>>>()?;
        let honest = (0..self.strategy.queries)
            .map(|_| oracle.sample(&h))
            .collect::<Result<Vec<_>>>()?;
        Ok(compare(
            collisions(&seen) as f64,
            collisions(&honest) as f64,
            rng,
        ))
    }
}

/// Signs a message and hands back the pair, which is never a valid forgery.
#[derive(Clone, Copy, Debug)]
pub struct ReplayForger;

/// Tries signatures `0, 1, …, budget − 1` (read as integers) on a fresh
/// message with the verification capability and returns the first that
/// verifies.
#[derive(Clone, Copy, Debug)]
pub struct BruteForceForger {
    pub budget: u64,
}

/// A uniformly random signature on a random message.
#[derive(Clone, Copy, Debug)]
pub struct RandomGuessForger;

impl Forger for ReplayForger {
    fn name(&self) -> String {
        "replay".into()
    }

    fn run(&self, oracle: &mut dyn SignOracle, rng: &mut TrialRng) -> Result<(Bits, Bits)> {
        let m = Bits::random(oracle.message_bits(), rng);
        let s = oracle.sign(&m)?;
        Ok((m, s))
    }
}

impl Forger for BruteForceForger {
    fn name(&self) -> String {
        format!("brute-force-{}", self.budget)
    }

    fn run(&self, oracle: &mut dyn SignOracle, rng: &mut TrialRng) -> Result<(Bits, Bits)> {
        let m = Bits::random(oracle.message_bits(), rng);
        let len = oracle.signature_bits();
        let limit = if len >= 64 {
            self.budget
        } else {
            self.budget.min(1 << len)
        };
        let mut candidate = Bits::zeros(len);
        for v in 0..limit {
            candidate = low_bits_set(len, v);
            if oracle.verify(&m, &candidate) {
                break;
            }
        }
        Ok((m, candidate))
    }
}

fn low_bits_set(len: usize, v: u64) -> Bits {
    if len <= 64 {
        Bits::from_u64(v, len)
    } else {
        Bits::zeros(len - 64).concat(&Bits::from_u64(v, 64))
    }
}

impl Forger for RandomGuessForger {
    fn name(&self) -> String {
        "random-guess".into()
    }

    fn run(&self, oracle: &mut dyn SignOracle, rng: &mut TrialRng) -> Result<(Bits, Bits)> {
        let m = Bits::random(oracle.message_bits(), rng);
        Ok((m, Bits::random(oracle.signature_bits(), rng)))
    }
}

/// Built-in watchdogs by command-line name.
pub fn watchdog_by_name(name: &str) -> Result<Box<dyn AsaWatchdog>> {
    Ok(match name {
        "constant" | "constant-0" => Box::new(Constant(false)),
        "constant-1" => Box::new(Constant(true)),
        "coin-flip" => Box::new(CoinFlip),
        "chi2" => Box::new(ChiSquare::default()),
        "repeat-frequency" => Box::new(RepeatFrequency::default()),
        "repeat-query" => Box::new(RepeatQuery),
        "validity" => Box::new(ValidityCheck { queries: 4 }),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown watchdog {other:?}"
            )))
        }
    })
}

/// Built-in CPA adversaries by command-line name.
pub fn cpa_adversary_by_name(name: &str) -> Result<Box<dyn CpaAdversary>> {
    Ok(match name {
        "constant" | "constant-0" => Box::new(Constant(false)),
        "constant-1" => Box::new(Constant(true)),
        "coin-flip" => Box::new(CoinFlip),
        "chi2" => Box::new(ChiSquare::default()),
        "repeat-query" => Box::new(RepeatQuery),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown CPA adversary {other:?}"
            )))
        }
    })
}

/// Built-in wardens by command-line name; `prefix_len` is the length of the
/// sampled history each challenge is asked on.
pub fn warden_by_name(name: &str, prefix_len: usize) -> Result<Box<dyn Warden>> {
    Ok(match name {
        "constant" | "constant-0" => Box::new(Constant(false)),
        "constant-1" => Box::new(Constant(true)),
        "coin-flip" => Box::new(CoinFlip),
        "chi2" => Box::new(HistoryWarden {
            strategy: ChiSquare::default(),
            prefix_len,
        }),
        "repeat-frequency" => Box::new(HistoryWarden {
            strategy: RepeatFrequency::default(),
            prefix_len,
        }),
        other => return Err(Error::InvalidParameter(format!("unknown warden {other:?}"))),
    })
}

/// Built-in forgers by command-line name.
pub fn forger_by_name(name: &str, budget: u64) -> Result<Box<dyn Forger>> {
    Ok(match name {
        "replay" => Box::new(ReplayForger),
        "brute-force" => Box::new(BruteForceForger { budget }),
        "random-guess" => Box::new(RandomGuessForger),
        other => return Err(Error::InvalidParameter(format!("unknown forger {other:?}"))),
    })
}

/// Key/value summary of a batch of reports, keyed by game name.
pub fn summarize(reports: &[GameReport]) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in reports {
        out.entry(r.game.clone()).or_default().push(r.p_hat);
    }
    out
}
