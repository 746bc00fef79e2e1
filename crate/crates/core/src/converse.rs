//! From a substitution attack back to a stegosystem on the host's channel,
//! and the matching reduction that runs a warden as a watchdog.

use std::sync::Arc;

use rand::RngCore;

use crate::asa::SubstitutionAttack;
use crate::bits::{Bits, Document, History};
use crate::channel::{Channel, CycleGrammar, Phase, RandAlgChannel};
use crate::error::{Error, Result};
use crate::fixtures::{EncryptionAlgorithm, EncryptionScheme, RandomizedAlgorithm};
use crate::games::{AsaOracle, AsaWatchdog, StegoOracle, TrialRng, Warden};
use crate::prf::AttackKey;
use crate::stego::{State, Stegosystem};

/// Stegosystem for `C(ℓ)` of the host, `ℓ` the attack's output length.
/// Before the history holds all `ℓ` inputs it samples the channel honestly;
/// afterwards every document comes from the attack on `(s, x_{r mod ℓ})`.
/// Decoding reads the `2ℓ + 1` documents produced from the empty history.
#[derive(Clone)]
pub struct WrappedStego {
    asa: Arc<dyn SubstitutionAttack>,
    host: Arc<dyn RandomizedAlgorithm>,
    grammar: CycleGrammar,
}

/// `stego_from_asa` for an encryption scheme.
pub fn stego_from_asa(
    asa: Arc<dyn SubstitutionAttack>,
    ses: Arc<dyn EncryptionScheme>,
) -> Result<WrappedStego> {
    stego_from_rasa(asa, Arc::new(EncryptionAlgorithm(ses)))
}

/// The same wrapping for any randomized algorithm.
pub fn stego_from_rasa(
    asa: Arc<dyn SubstitutionAttack>,
    host: Arc<dyn RandomizedAlgorithm>,
) -> Result<WrappedStego> {
    if asa.output_bits() != host.output_bits() {
        return Err(Error::LengthMismatch {
            what: "attack output",
            expected: host.output_bits(),
            actual: asa.output_bits(),
        });
    }
    let grammar = CycleGrammar::new(
        host.secret_bits(),
        host.input_bits(),
        host.output_bits(),
        asa.output_len().max(1),
    )?;
    Ok(WrappedStego { asa, host, grammar })
}

impl WrappedStego {
    /// `ℓ`.
    pub fn cycle(&self) -> usize {
        self.grammar.cycle
    }

    /// The channel the stegosystem is defined for.
    pub fn channel(&self) -> Result<RandAlgChannel> {
        RandAlgChannel::new(self.host.clone(), self.grammar.cycle)
    }

    pub fn attack(&self) -> &Arc<dyn SubstitutionAttack> {
        &self.asa
    }
}

impl Stegosystem for WrappedStego {
    fn message_bits(&self) -> usize {
        self.asa.message_bits()
    }

    fn output_len(&self) -> usize {
        2 * self.grammar.cycle + 1
    }

    fn key_bits(&self) -> usize {
        self.asa.key_bits()
    }

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        self.asa.gen(rng)
    }

    fn encode(
        &self,
        ak: &AttackKey,
        am: &Bits,
        _channel: &dyn Channel,
        h: &History,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Document, State)> {
        if am.len() != self.message_bits() {
            return Err(Error::LengthMismatch {
                what: "hidden message",
                expected: self.message_bits(),
                actual: am.len(),
            });
        }
        match self.grammar.phase(h)? {
            Phase::Secret => Ok((self.host.secret_gen(rng), state)),
            Phase::Input(_) => Ok((self.host.input_gen(rng), state)),
            Phase::Output(r) => {
                let (s, x) = self.grammar.output_context(h, r);
                self.asa.encrypt(ak, am, s, x, state, rng)
            }
        }
    }

    fn decode(&self, ak: &AttackKey, docs: &[Document]) -> Result<Option<Bits>> {
        if docs.len() != self.output_len() {
            return Err(Error::WrongDocumentCount {
                expected: self.output_len(),
                actual: docs.len(),
            });
        }
        self.asa.extract(ak, &docs[self.grammar.cycle + 1..])
    }
}

/// Runs a warden against the substitution game. Sampling requests and
/// challenges on histories that do not yet hold all `ℓ` inputs are answered
/// by running the public host; challenges on complete histories are
/// forwarded to the game's oracle with the state threaded between calls.
#[derive(Clone)]
pub struct WardenWatchdog {
    pub warden: Arc<dyn Warden>,
    pub cycle: usize,
}

struct SimulatedStegoOracle<'a> {
    oracle: &'a mut dyn AsaOracle,
    host: &'a dyn RandomizedAlgorithm,
    grammar: CycleGrammar,
    state: State,
    rng: TrialRng,
}

impl SimulatedStegoOracle<'_> {
    fn honest(&mut self, phase: Phase, h: &History) -> Result<Document> {
        match phase {
            Phase::Secret => Ok(self.host.secret_gen(&mut self.rng)),
            Phase::Input(_) => Ok(self.host.input_gen(&mut self.rng)),
            Phase::Output(r) => {
                let (s, x) = self.grammar.output_context(h, r);
                self.host.run(s, x, &mut self.rng)
            }
        }
    }
}

impl StegoOracle for SimulatedStegoOracle<'_> {
    fn hidden_message_bits(&self) -> usize {
        self.oracle.hidden_message_bits()
    }

    fn sample(&mut self, h: &History) -> Result<Document> {
        let phase = self.grammar.phase(h)?;
        self.honest(phase, h)
    }

    fn challenge(&mut self, am: &Bits, h: &History) -> Result<Document> {
        match self.grammar.phase(h)? {
            Phase::Output(r) => {
                let (s, x) = self.grammar.output_context(h, r);
                let state = std::mem::take(&mut self.state);
                let (y, state) = self.oracle.query(am, s, x, state)?;
                self.state = state;
                Ok(y)
            }
            phase => self.honest(phase, h),
        }
    }
}

impl AsaWatchdog for WardenWatchdog {
    fn name(&self) -> String {
        format!("via-warden[{}]", self.warden.name())
    }

    fn run(
        &self,
        oracle: &mut dyn AsaOracle,
        host: &dyn RandomizedAlgorithm,
        rng: &mut TrialRng,
    ) -> Result<bool> {
        let grammar = CycleGrammar::new(
            host.secret_bits(),
            host.input_bits(),
            host.output_bits(),
            self.cycle,
        )?;
        let mut sim = SimulatedStegoOracle {
            oracle,
            host,
            grammar,
            state: State::empty(),
            rng: rng.clone(),
        };
        self.warden.run(&mut sim, rng)
    }
}
