//! Algorithm substitution attacks.
//!
//! An attack replaces `R(s, x)` (encryption: `Enc(k, m)`) by a keyed
//! subverted version whose outputs leak a hidden message `am` to whoever
//! holds the attack key. Three families live here:
//!
//! * [`StegoAttack`]: run any stegosystem on the channel of `R`, with the
//!   history `s ∥ x^ℓ`; every channel draw is a fresh honest run.
//! * [`UniversalAttack`]: the same idea with nothing but an explicit-coin
//!   oracle for the host, every query recorded in a [`Transcript`].
//! * [`UniformCoverAttack`]: embeds by rejection sampling over uniformly
//!   random outputs, which is always reliable but visibly not honest on
//!   deterministic hosts.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::{Bits, Document, History};
use crate::channel::{Channel, DocumentSource, RandAlgChannel, SesChannel, UniformChannel};
use crate::error::{Error, Result};
use crate::fixtures::{EncryptionAlgorithm, EncryptionScheme, RandomizedAlgorithm};
use crate::prf::AttackKey;
use crate::stego::{SamplingStego, State, Stegosystem};

/// A subverted implementation of `R(s, x)`.
///
/// For encryption the secret is the key `k` and the input the message `m`.
pub trait SubstitutionAttack: Send + Sync {
    fn message_bits(&self) -> usize;
    fn output_len(&self) -> usize;
    fn key_bits(&self) -> usize;
    /// Length of every produced output, equal to the host's.
    fn output_bits(&self) -> usize;

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        AttackKey::generate(self.key_bits(), rng)
    }

    fn encrypt(
        &self,
        ak: &AttackKey,
        am: &Bits,
        secret: &Bits,
        input: &Bits,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)>;

    /// Recovers `am` from outputs alone; `Ok(None)` is ⊥.
    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>>;
}

/// `asa_enc_all`: one subverted output per input, threading the state.
pub fn asa_enc_all(
    asa: &dyn SubstitutionAttack,
    ak: &AttackKey,
    am: &Bits,
    secret: &Bits,
    inputs: &[Bits],
    rng: &mut dyn RngCore,
) -> Result<Vec<Bits>> {
    let mut state = State::empty();
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (c, next) = asa.encrypt(ak, am, secret, x, state, rng)?;
        state = next;
        out.push(c);
    }
    Ok(out)
}

/// The host channel a [`StegoAttack`] embeds into.
#[derive(Clone)]
enum HostChannel {
    Ses(SesChannel),
    Alg(RandAlgChannel),
}

impl HostChannel {
    fn as_channel(&self) -> &dyn Channel {
        match self {
            HostChannel::Ses(c) => c,
            HostChannel::Alg(c) => c,
        }
    }

    fn output_bits(&self) -> usize {
        match self {
            HostChannel::Ses(c) => c.grammar().output_bits,
            HostChannel::Alg(c) => c.grammar().output_bits,
        }
    }
}

/// A stegosystem run on `C(ℓ)` of the host with `ℓ = outl`; each call
/// encodes with history `s ∥ x^ℓ`.
#[derive(Clone)]
pub struct StegoAttack {
    steg: Arc<dyn Stegosystem>,
    host: HostChannel,
}

/// `asa_from_stego`.
pub fn asa_from_stego(
    steg: Arc<dyn Stegosystem>,
    ses: Arc<dyn EncryptionScheme>,
) -> Result<StegoAttack> {
    let channel = SesChannel::new(ses, steg.output_len().max(1))?;
    Ok(StegoAttack {
        steg,
        host: HostChannel::Ses(channel),
    })
}

/// `generic_asa_against_R`. The inputs of the channel come from the
/// algorithm's own input generator.
pub fn generic_asa_against_r(
    steg: Arc<dyn Stegosystem>,
    alg: Arc<dyn RandomizedAlgorithm>,
) -> Result<StegoAttack> {
    let channel = RandAlgChannel::new(alg, steg.output_len().max(1))?;
    Ok(StegoAttack {
        steg,
        host: HostChannel::Alg(channel),
    })
}

impl StegoAttack {
    pub fn stegosystem(&self) -> &Arc<dyn Stegosystem> {
        &self.steg
    }

    pub fn channel(&self) -> &dyn Channel {
        self.host.as_channel()
    }

    /// The history `s ∥ x^ℓ` simulated for one call.
    pub fn history(&self, secret: &Bits, input: &Bits) -> History {
        let cycle = self.steg.output_len().max(1);
        let mut docs = Vec::with_capacity(cycle + 1);
        docs.push(secret.clone());
        docs.extend(std::iter::repeat_n(input.clone(), cycle));
        History::from_docs(docs)
    }
}

impl SubstitutionAttack for StegoAttack {
    fn message_bits(&self) -> usize {
        self.steg.message_bits()
    }

    fn output_len(&self) -> usize {
        self.steg.output_len()
    }

    fn key_bits(&self) -> usize {
        self.steg.key_bits()
    }

    fn output_bits(&self) -> usize {
        self.host.output_bits()
    }

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        self.steg.gen(rng)
    }

    fn encrypt(
        &self,
        ak: &AttackKey,
        am: &Bits,
        secret: &Bits,
        input: &Bits,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)> {
        let h = self.history(secret, input);
        self.steg
            .encode(ak, am, self.host.as_channel(), &h, state, rng)
    }

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>> {
        self.steg.decode(ak, outputs)
    }
}

/// Explicit-coin access to a host encryption algorithm, and nothing else.
pub trait EncryptionOracle {
    fn message_bits(&self) -> usize;
    fn ciphertext_bits(&self) -> usize;
    fn coin_bits(&self) -> usize;
    /// `Enc(k, m; coins)`.
    fn query(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits>;

    /// Public validity check of a ciphertext, for hosts that publish a
    /// verification key.
    fn verify_output(&self, _c: &Bits) -> Option<bool> {
        None
    }
}

/// An oracle that can be shared across trial threads.
pub type SharedOracle = Arc<dyn EncryptionOracle + Send + Sync>;

/// Oracle view of a concrete scheme.
#[derive(Clone)]
pub struct SchemeOracle(pub Arc<dyn EncryptionScheme>);

impl EncryptionOracle for SchemeOracle {
    fn message_bits(&self) -> usize {
        self.0.message_bits()
    }

    fn ciphertext_bits(&self) -> usize {
        self.0.ciphertext_bits()
    }

    fn coin_bits(&self) -> usize {
        self.0.coin_bits()
    }

    fn query(&self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        self.0.encrypt_with_coins(k, m, coins)
    }

    fn verify_output(&self, c: &Bits) -> Option<bool> {
        self.0.verify_public(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleQuery {
    pub k: Bits,
    pub m: Bits,
    pub coins: Bits,
    pub c: Bits,
}

/// Append-only record of the oracle calls made during one `encrypt`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    queries: Vec<OracleQuery>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptLine {
    trial: u64,
    query_index: usize,
    k_hex: String,
    m_hex: String,
    coins_hex: String,
    c_hex: String,
}

impl Transcript {
    pub fn queries(&self) -> &[OracleQuery] {
        &self.queries
    }

    pub fn count(&self) -> usize {
        self.queries.len()
    }

    pub fn contains_output(&self, c: &Bits) -> bool {
        self.queries.iter().any(|q| &q.c == c)
    }

    /// One JSON object per query.
    pub fn to_jsonl(&self, trial: u64) -> String {
        let mut out = String::new();
        for (i, q) in self.queries.iter().enumerate() {
            let line = TranscriptLine {
                trial,
                query_index: i,
                k_hex: q.k.to_hex(),
                m_hex: q.m.to_hex(),
                coins_hex: q.coins.to_hex(),
                c_hex: q.c.to_hex(),
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

/// An oracle wrapper that records every call.
pub struct TracedOracle<'a> {
    oracle: &'a dyn EncryptionOracle,
    transcript: Transcript,
}

impl<'a> TracedOracle<'a> {
    pub fn new(oracle: &'a dyn EncryptionOracle) -> Self {
        TracedOracle {
            oracle,
            transcript: Transcript::default(),
        }
    }

    pub fn message_bits(&self) -> usize {
        self.oracle.message_bits()
    }

    pub fn ciphertext_bits(&self) -> usize {
        self.oracle.ciphertext_bits()
    }

    pub fn coin_bits(&self) -> usize {
        self.oracle.coin_bits()
    }

    pub fn query(&mut self, k: &Bits, m: &Bits, coins: &Bits) -> Result<Bits> {
        let c = self.oracle.query(k, m, coins)?;
        self.transcript.queries.push(OracleQuery {
            k: k.clone(),
            m: m.clone(),
            coins: coins.clone(),
            c: c.clone(),
        });
        Ok(c)
    }

    /// The host's public validity check; not recorded as a query.
    pub fn verify_output(&self, c: &Bits) -> Option<bool> {
        self.oracle.verify_output(c)
    }

    /// A query with fresh uniform coins.
    pub fn query_fresh(&mut self, k: &Bits, m: &Bits, rng: &mut dyn RngCore) -> Result<Bits> {
        let coins = Bits::random(self.coin_bits(), rng);
        self.query(k, m, &coins)
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

/// An attack whose encryptor touches the host only through an oracle.
pub trait OracleAttack: Send + Sync {
    fn message_bits(&self) -> usize;
    fn output_len(&self) -> usize;
    fn key_bits(&self) -> usize;

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        AttackKey::generate(self.key_bits(), rng)
    }

    #[allow(clippy::too_many_arguments)]
    fn encrypt_with(
        &self,
        ak: &AttackKey,
        am: &Bits,
        k: &Bits,
        m: &Bits,
        state: State,
        oracle: &mut TracedOracle<'_>,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)>;

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>>;

    /// Extraction for a receiver that also sees the host's public validity
    /// check, and drops outputs it rejects.
    fn extract_with(
        &self,
        ak: &AttackKey,
        outputs: &[Bits],
        _oracle: &dyn EncryptionOracle,
    ) -> Result<Option<Bits>> {
        self.extract(ak, outputs)
    }
}

/// Channel draws realised as oracle calls `Enc(k, m; coins)` with fresh
/// uniform coins.
struct OracleSource<'o, 'a> {
    oracle: &'o mut TracedOracle<'a>,
    k: &'o Bits,
    m: &'o Bits,
}

impl DocumentSource for OracleSource<'_, '_> {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<Document> {
        self.oracle.query_fresh(self.k, self.m, rng)
    }
}

/// A sampling stegosystem driven by oracle queries.
pub struct OracleStego<S> {
    steg: S,
}

impl<S: SamplingStego> OracleStego<S> {
    pub fn new(steg: S) -> Self {
        OracleStego { steg }
    }

    pub fn stegosystem(&self) -> &S {
        &self.steg
    }
}

impl<S: SamplingStego> OracleAttack for OracleStego<S> {
    fn message_bits(&self) -> usize {
        self.steg.message_bits()
    }

    fn output_len(&self) -> usize {
        self.steg.output_len()
    }

    fn key_bits(&self) -> usize {
        self.steg.key_bits()
    }

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        self.steg.gen(rng)
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
        let mut source = OracleSource { oracle, k, m };
        self.steg.encode_from(ak, am, &mut source, state, rng)
    }

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>> {
        self.steg.decode(ak, outputs)
    }
}

/// An oracle attack bound to one host oracle.
#[derive(Clone)]
pub struct UniversalAttack {
    attack: Arc<dyn OracleAttack>,
    oracle: SharedOracle,
}

/// `universal_asa`: a sampling stegosystem whose channel draws are oracle
/// queries.
pub fn universal_asa<S: SamplingStego + 'static>(steg: S, oracle: SharedOracle) -> UniversalAttack {
    UniversalAttack::new(Arc::new(OracleStego::new(steg)), oracle)
}

impl UniversalAttack {
    pub fn new(attack: Arc<dyn OracleAttack>, oracle: SharedOracle) -> Self {
        UniversalAttack { attack, oracle }
    }

    pub fn attack(&self) -> &Arc<dyn OracleAttack> {
        &self.attack
    }

    pub fn oracle(&self) -> &SharedOracle {
        &self.oracle
    }

    /// The same attack over another host.
    pub fn with_oracle(&self, oracle: SharedOracle) -> Self {
        UniversalAttack::new(self.attack.clone(), oracle)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn encrypt_traced(
        &self,
        ak: &AttackKey,
        am: &Bits,
        k: &Bits,
        m: &Bits,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State, Transcript)> {
        let mut traced = TracedOracle::new(self.oracle.as_ref());
        let (c, state) = self
            .attack
            .encrypt_with(ak, am, k, m, state, &mut traced, rng)?;
        Ok((c, state, traced.into_transcript()))
    }
}

impl SubstitutionAttack for UniversalAttack {
    fn message_bits(&self) -> usize {
        self.attack.message_bits()
    }

    fn output_len(&self) -> usize {
        self.attack.output_len()
    }

    fn key_bits(&self) -> usize {
        self.attack.key_bits()
    }

    fn output_bits(&self) -> usize {
        self.oracle.ciphertext_bits()
    }

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        self.attack.gen(rng)
    }

    fn encrypt(
        &self,
        ak: &AttackKey,
        am: &Bits,
        secret: &Bits,
        input: &Bits,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)> {
        let (c, state, _) = self.encrypt_traced(ak, am, secret, input, state, rng)?;
        Ok((c, state))
    }

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>> {
        self.attack.extract_with(ak, outputs, self.oracle.as_ref())
    }
}

/// `query_count`: the largest, over `samples` random `(ak, am, k, m)`, of
/// the mean number of oracle calls per encryption across `calls` calls.
pub fn query_count(
    asa: &UniversalAttack,
    key_bits: usize,
    samples: usize,
    calls: usize,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    let ml = asa.oracle().message_bits();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let ak = asa.gen(rng);
        let am = Bits::random(asa.message_bits(), rng);
        let k = Bits::random(key_bits, rng);
        let m = Bits::random(ml, rng);
        let mut total = 0usize;
        for _ in 0..calls {
            let (_, _, t) = asa.encrypt_traced(&ak, &am, &k, &m, State::empty(), rng)?;
            total += t.count();
        }
        worst = worst.max(total as f64 / calls.max(1) as f64);
    }
    Ok(worst)
}

/// Embeds by sampling uniformly random output strings until one carries the
/// right mark. Extraction works on any host, but outputs ignore `R`
/// entirely.
#[derive(Clone)]
pub struct UniformCoverAttack {
    steg: Arc<dyn Stegosystem>,
    cover: UniformChannel,
    output_bits: usize,
}

impl UniformCoverAttack {
    pub fn new(steg: Arc<dyn Stegosystem>, output_bits: usize) -> Self {
        UniformCoverAttack {
            steg,
            cover: UniformChannel::new(output_bits),
            output_bits,
        }
    }
}

impl SubstitutionAttack for UniformCoverAttack {
    fn message_bits(&self) -> usize {
        self.steg.message_bits()
    }

    fn output_len(&self) -> usize {
        self.steg.output_len()
    }

    fn key_bits(&self) -> usize {
        self.steg.key_bits()
    }

    fn output_bits(&self) -> usize {
        self.output_bits
    }

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        self.steg.gen(rng)
    }

    fn encrypt(
        &self,
        ak: &AttackKey,
        am: &Bits,
        _secret: &Bits,
        _input: &Bits,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Bits, State)> {
        self.steg
            .encode(ak, am, &self.cover, &History::new(), state, rng)
    }

    fn extract(&self, ak: &AttackKey, outputs: &[Bits]) -> Result<Option<Bits>> {
        self.steg.decode(ak, outputs)
    }
}

/// Checks that every output has the host's length.
pub fn check_outputs(asa: &dyn SubstitutionAttack, outputs: &[Bits]) -> Result<()> {
    for c in outputs {
        if c.len() != asa.output_bits() {
            return Err(Error::LengthMismatch {
                what: "subverted output",
                expected: asa.output_bits(),
                actual: c.len(),
            });
        }
    }
    Ok(())
}

/// `asa_from_stego` over an encryption scheme seen as a randomized
/// algorithm; outputs coincide with [`asa_from_stego`] under equal seeds.
pub fn asa_from_stego_via_alg(
    steg: Arc<dyn Stegosystem>,
    ses: Arc<dyn EncryptionScheme>,
) -> Result<StegoAttack> {
    generic_asa_against_r(steg, Arc::new(EncryptionAlgorithm(ses)))
}
