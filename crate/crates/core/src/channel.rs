//! Channels: history-indexed distributions over documents.
//!
//! Besides toy channels (uniform, point mass) this module builds the two
//! channel families induced by a primitive. For a randomized algorithm `R`
//! with cycle length `ℓ` the history grammar is
//!
//! ```text
//! s ∥ x_1 ∥ … ∥ x_ℓ ∥ y_1 ∥ y_2 ∥ …
//! ```
//!
//! The empty history samples a secret, a history with `r < ℓ` inputs samples
//! the next input, and a history with all `ℓ` inputs and `r` outputs samples
//! `R(s, x_{(r mod ℓ)+1})`. The encryption channel is the special case
//! secret = key, input = message, output = ciphertext.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::{Bits, Document, History};
use crate::error::{Error, Result};
use crate::fixtures::{uniform_pmf, EncryptionScheme, Pmf, RandomizedAlgorithm};

/// Serializable channel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "κ")]
    pub kappa: usize,
    #[serde(rename = "ℓ")]
    pub cycle: Option<usize>,
    pub scheme_id: Option<String>,
    pub max_doc_len: usize,
}

pub trait Channel: Send + Sync {
    fn max_doc_len(&self) -> usize;

    /// Grammar check.
    fn validate(&self, h: &History) -> Result<()>;

    /// Samples from `C_h` for a history already accepted by [`Channel::validate`].
    fn sample_valid(&self, h: &History, rng: &mut dyn RngCore) -> Result<Document>;

    fn sample(&self, h: &History, rng: &mut dyn RngCore) -> Result<Document> {
        self.validate(h)?;
        self.sample_valid(h, rng)
    }

    /// Exact distribution of `C_h`, `Ok(None)` when the channel cannot
    /// enumerate it.
    fn pmf(&self, h: &History) -> Result<Option<Pmf>> {
        self.validate(h)?;
        Ok(None)
    }

    fn descriptor(&self) -> ChannelDescriptor;
}

/// `channel_sample`: one document from `C_h`.
pub fn channel_sample(
    channel: &dyn Channel,
    h: &History,
    rng: &mut dyn RngCore,
) -> Result<Document> {
    channel.sample(h, rng)
}

/// Uniform over `{0,1}^bits` regardless of history.
#[derive(Clone, Debug)]
pub struct UniformChannel {
    bits: usize,
}

impl UniformChannel {
    pub fn new(bits: usize) -> Self {
        UniformChannel { bits }
    }
}

impl Channel for UniformChannel {
    fn max_doc_len(&self) -> usize {
        self.bits
    }

    fn validate(&self, h: &History) -> Result<()> {
        for (i, d) in h.docs().iter().enumerate() {
            if d.len() != self.bits {
                return Err(Error::InvalidHistory(format!(
                    "document {i} has {} bits, channel emits {}",
                    d.len(),
                    self.bits
                )));
            }
        }
        Ok(())
    }

    fn sample_valid(&self, _h: &History, rng: &mut dyn RngCore) -> Result<Document> {
        Ok(Bits::random(self.bits, rng))
    }

    fn pmf(&self, h: &History) -> Result<Option<Pmf>> {
        self.validate(h)?;
        Ok(uniform_pmf(self.bits))
    }

    fn descriptor(&self) -> ChannelDescriptor {
        ChannelDescriptor {
            kind: "uniform".into(),
            kappa: 0,
            cycle: None,
            scheme_id: None,
            max_doc_len: self.bits,
        }
    }
}

/// Always emits the same document: min-entropy zero.
#[derive(Clone, Debug)]
pub struct PointMassChannel {
    doc: Document,
}

impl PointMassChannel {
    pub fn new(doc: Document) -> Self {
        PointMassChannel { doc }
    }
}

impl Channel for PointMassChannel {
    fn max_doc_len(&self) -> usize {
        self.doc.len()
    }

    fn validate(&self, h: &History) -> Result<()> {
        match h.docs().iter().position(|d| d != &self.doc) {
            Some(i) => Err(Error::InvalidHistory(format!(
                "document {i} is outside the point-mass support"
            ))),
            None => Ok(()),
        }
    }

    fn sample_valid(&self, _h: &History, _rng: &mut dyn RngCore) -> Result<Document> {
        Ok(self.doc.clone())
    }

    fn pmf(&self, h: &History) -> Result<Option<Pmf>> {
        self.validate(h)?;
        Ok(Some(Pmf::from([(self.doc.clone(), 1.0)])))
    }

    fn descriptor(&self) -> ChannelDescriptor {
        ChannelDescriptor {
            kind: "point-mass".into(),
            kappa: 0,
            cycle: None,
            scheme_id: None,
            max_doc_len: self.doc.len(),
        }
    }
}

/// Where a history stands in the `s ∥ x^ℓ ∥ y*` grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Empty history: next document is the secret.
    Secret,
    /// `r < ℓ` inputs seen.
    Input(usize),
    /// All inputs seen plus `r` outputs; next output uses input index `r mod ℓ`.
    Output(usize),
}

/// Length/count automaton for the cyclic grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleGrammar {
    pub secret_bits: usize,
    pub input_bits: usize,
    pub output_bits: usize,
    pub cycle: usize,
}

impl CycleGrammar {
    pub fn new(
        secret_bits: usize,
        input_bits: usize,
        output_bits: usize,
        cycle: usize,
    ) -> Result<Self> {
        if cycle == 0 {
            return Err(Error::InvalidParameter("ℓ must be at least 1".into()));
        }
        Ok(CycleGrammar {
            secret_bits,
            input_bits,
            output_bits,
            cycle,
        })
    }

    pub fn phase(&self, h: &History) -> Result<Phase> {
        let docs = h.docs();
        let expect = |i: usize, role: &str, bits: usize| -> Result<()> {
            if docs[i].len() != bits {
                return Err(Error::InvalidHistory(format!(
                    "document {i} should be a {bits}-bit {role}, has {} bits",
                    docs[i].len()
                )));
            }
            Ok(())
        };
        if docs.is_empty() {
            return Ok(Phase::Secret);
        }
        expect(0, "secret", self.secret_bits)?;
        let inputs = (docs.len() - 1).min(self.cycle);
        for i in 1..=inputs {
            expect(i, "input", self.input_bits)?;
        }
        if inputs < self.cycle {
            return Ok(Phase::Input(inputs));
        }
        for i in 1 + self.cycle..docs.len() {
            expect(i, "output", self.output_bits)?;
        }
        Ok(Phase::Output(docs.len() - 1 - self.cycle))
    }

    /// Phase of a history of `n` documents that is already known to be valid.
    pub fn phase_of_len(&self, n: usize) -> Phase {
        match n {
            0 => Phase::Secret,
            n if n <= self.cycle => Phase::Input(n - 1),
            n => Phase::Output(n - 1 - self.cycle),
        }
    }

    /// `(s, x_{(r mod ℓ)+1})` for a history in the output phase.
    pub fn output_context<'h>(&self, h: &'h History, r: usize) -> (&'h Bits, &'h Bits) {
        let docs = h.docs();
        (&docs[0], &docs[1 + r % self.cycle])
    }

    pub fn max_doc_len(&self) -> usize {
        self.secret_bits.max(self.input_bits).max(self.output_bits)
    }
}

/// The channel family `C_SES(ℓ)` of an encryption scheme.
#[derive(Clone)]
pub struct SesChannel {
    scheme: Arc<dyn EncryptionScheme>,
    grammar: CycleGrammar,
}

impl SesChannel {
    pub fn new(scheme: Arc<dyn EncryptionScheme>, cycle: usize) -> Result<Self> {
        let grammar = CycleGrammar::new(
            scheme.key_bits(),
            scheme.message_bits(),
            scheme.ciphertext_bits(),
            cycle,
        )?;
        Ok(SesChannel { scheme, grammar })
    }

    pub fn scheme(&self) -> &Arc<dyn EncryptionScheme> {
        &self.scheme
    }

    pub fn grammar(&self) -> &CycleGrammar {
        &self.grammar
    }

    pub fn cycle(&self) -> usize {
        self.grammar.cycle
    }
}

/// `ses_channel`.
pub fn ses_channel(ses: Arc<dyn EncryptionScheme>, cycle: usize) -> Result<SesChannel> {
    SesChannel::new(ses, cycle)
}

impl Channel for SesChannel {
    fn max_doc_len(&self) -> usize {
        self.grammar.max_doc_len()
    }

    fn validate(&self, h: &History) -> Result<()> {
        self.grammar.phase(h).map(|_| ())
    }

    fn sample_valid(&self, h: &History, rng: &mut dyn RngCore) -> Result<Document> {
        match self.grammar.phase_of_len(h.len()) {
            Phase::Secret => Ok(self.scheme.gen(rng)),
            Phase::Input(_) => Ok(Bits::random(self.scheme.message_bits(), rng)),
            Phase::Output(r) => {
                let (k, m) = self.grammar.output_context(h, r);
                self.scheme.encrypt(k, m, rng)
            }
        }
    }

    fn pmf(&self, h: &History) -> Result<Option<Pmf>> {
        match self.grammar.phase(h)? {
            Phase::Secret => Ok(uniform_pmf(self.scheme.key_bits())),
            Phase::Input(_) => Ok(uniform_pmf(self.scheme.message_bits())),
            Phase::Output(r) => {
                let (k, m) = self.grammar.output_context(h, r);
                self.scheme.ciphertext_pmf(k, m).transpose()
            }
        }
    }

    fn descriptor(&self) -> ChannelDescriptor {
        ChannelDescriptor {
            kind: "ses".into(),
            kappa: self.scheme.key_bits(),
            cycle: Some(self.grammar.cycle),
            scheme_id: Some(self.scheme.id()),
            max_doc_len: self.max_doc_len(),
        }
    }
}

/// The channel family `C_R(ℓ)` of a randomized algorithm; inputs are drawn
/// with the algorithm's own input generator.
#[derive(Clone)]
pub struct RandAlgChannel {
    alg: Arc<dyn RandomizedAlgorithm>,
    grammar: CycleGrammar,
}

impl RandAlgChannel {
    pub fn new(alg: Arc<dyn RandomizedAlgorithm>, cycle: usize) -> Result<Self> {
        let grammar = CycleGrammar::new(
            alg.secret_bits(),
            alg.input_bits(),
            alg.output_bits(),
            cycle,
        )?;
        Ok(RandAlgChannel { alg, grammar })
    }

    pub fn algorithm(&self) -> &Arc<dyn RandomizedAlgorithm> {
        &self.alg
    }

    pub fn grammar(&self) -> &CycleGrammar {
        &self.grammar
    }
}

/// `rand_alg_channel`.
pub fn rand_alg_channel(alg: Arc<dyn RandomizedAlgorithm>, cycle: usize) -> Result<RandAlgChannel> {
    RandAlgChannel::new(alg, cycle)
}

impl Channel for RandAlgChannel {
    fn max_doc_len(&self) -> usize {
        self.grammar.max_doc_len()
    }

    fn validate(&self, h: &History) -> Result<()> {
        self.grammar.phase(h).map(|_| ())
    }

    fn sample_valid(&self, h: &History, rng: &mut dyn RngCore) -> Result<Document> {
        match self.grammar.phase_of_len(h.len()) {
            Phase::Secret => Ok(self.alg.secret_gen(rng)),
            Phase::Input(_) => Ok(self.alg.input_gen(rng)),
            Phase::Output(r) => {
                let (s, x) = self.grammar.output_context(h, r);
                self.alg.run(s, x, rng)
            }
        }
    }

    fn pmf(&self, h: &History) -> Result<Option<Pmf>> {
        match self.grammar.phase(h)? {
            Phase::Secret => Ok(self.alg.secret_pmf()),
            Phase::Input(_) => Ok(self.alg.input_pmf()),
            Phase::Output(r) => {
                let (s, x) = self.grammar.output_context(h, r);
                self.alg.output_pmf(s, x).transpose()
            }
        }
    }

    fn descriptor(&self) -> ChannelDescriptor {
        ChannelDescriptor {
            kind: "rand-alg".into(),
            kappa: self.alg.secret_bits(),
            cycle: Some(self.grammar.cycle),
            scheme_id: Some(self.alg.id()),
            max_doc_len: self.max_doc_len(),
        }
    }
}

/// A channel's sampler pinned to one history, validated once.
pub struct ChannelSource<'a> {
    channel: &'a dyn Channel,
    history: &'a History,
}

impl<'a> ChannelSource<'a> {
    pub fn new(channel: &'a dyn Channel, history: &'a History) -> Result<Self> {
        channel.validate(history)?;
        Ok(ChannelSource { channel, history })
    }
}

/// Sampling access to one fixed distribution `C_h`.
pub trait DocumentSource {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<Document>;
}

impl DocumentSource for ChannelSource<'_> {
    fn draw(&mut self, rng: &mut dyn RngCore) -> Result<Document> {
        self.channel.sample_valid(self.history, rng)
    }
}

/// Builds a channel from its command-line name: `uniform:<bits>`,
/// `pointmass:<bits>`, or a host scheme name wrapped as `C_SES(ℓ)`.
pub fn channel_by_name(name: &str, kappa: usize, cycle: usize) -> Result<Arc<dyn Channel>> {
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("bad number {s:?} in {name:?}")))
    };
    if let Some(bits) = name.strip_prefix("uniform:") {
        return Ok(Arc::new(UniformChannel::new(num(bits)?)));
    }
    if let Some(bits) = name.strip_prefix("pointmass:") {
        return Ok(Arc::new(PointMassChannel::new(Bits::zeros(num(bits)?))));
    }
    let scheme = crate::fixtures::scheme_by_name(name, kappa)?;
    Ok(Arc::new(SesChannel::new(scheme, cycle)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{det_scheme, randpad_scheme, EncryptionAlgorithm, RandPad};
    use crate::stats::chi_square_gof;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn randpad8() -> Arc<dyn EncryptionScheme> {
        Arc::new(randpad_scheme(8, 128).unwrap())
    }

    #[test]
    fn uniform_channel_frequencies_pass_chi_square() {
        let ch = UniformChannel::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let samples: Vec<_> = (0..100_000)
            .map(|_| channel_sample(&ch, &History::new(), &mut rng).unwrap())
            .collect();
        let pmf = ch.pmf(&History::new()).unwrap().unwrap();
        let gof = chi_square_gof(&samples, &pmf);
        assert!(gof.passes(0.999), "{gof:?}");
    }

    #[test]
    fn ses_grammar_phases() {
        let ch = ses_channel(randpad8(), 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let mut h = History::new();
        let mut phases = Vec::new();
        for _ in 0..8 {
            phases.push(ch.grammar().phase(&h).unwrap());
            let d = channel_sample(&ch, &h, &mut rng).unwrap();
            h.push(d);
            // every prefix produced by sampling is accepted
            ch.validate(&h).unwrap();
        }
        assert_eq!(
            phases,
            vec![
                Phase::Secret,
                Phase::Input(0),
                Phase::Input(1),
                Phase::Input(2),
                Phase::Output(0),
                Phase::Output(1),
                Phase::Output(2),
                Phase::Output(3)
            ]
        );
        assert_eq!(h.docs()[0].len(), 128);
        assert_eq!(h.docs()[1].len(), 8);
        assert_eq!(h.docs()[5].len(), 16);
    }

    #[test]
    fn ciphertext_before_all_messages_is_invalid() {
        let ch = ses_channel(randpad8(), 3).unwrap();
        let h = History::from_docs(vec![Bits::zeros(128), Bits::zeros(8), Bits::zeros(16)]);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(matches!(
            channel_sample(&ch, &h, &mut rng),
            Err(Error::InvalidHistory(_))
        ));
        assert!(ses_channel(randpad8(), 0).is_err());
    }

    #[test]
    fn output_index_uses_r_mod_cycle() {
        let ch = ses_channel(randpad8(), 2).unwrap();
        let k = Bits::zeros(128);
        let (m1, m2) = (Bits::from_u64(1, 8), Bits::from_u64(2, 8));
        let mut h = History::from_docs(vec![k, m1.clone(), m2.clone()]);
        for r in 0..5 {
            let (_, m) = ch.grammar().output_context(&h, r);
            assert_eq!(m, if r % 2 == 0 { &m1 } else { &m2 });
            h.push(Bits::zeros(16));
        }
    }

    #[test]
    fn full_history_sampler_is_the_scheme_sampler() {
        let ses = randpad8();
        let ch = ses_channel(ses.clone(), 1).unwrap();
        let k = Bits::from_u64(0xdead_beef, 128 - 64).concat(&Bits::zeros(64));
        let m = Bits::from_u64(0x3c, 8);
        let h = History::from_docs(vec![k.clone(), m.clone()]);
        let mut a = ChaCha20Rng::seed_from_u64(23);
        let mut b = ChaCha20Rng::seed_from_u64(23);
        for _ in 0..200 {
            assert_eq!(
                channel_sample(&ch, &h, &mut a).unwrap(),
                ses.encrypt(&k, &m, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn rand_alg_channel_matches_ses_channel_on_tiny_instance() {
        // κ = 2, ml = 2, r = 2: every history up to one output is enumerable.
        let ses: Arc<dyn EncryptionScheme> = Arc::new(RandPad::new(2, 2, 2).unwrap());
        let alg: Arc<dyn RandomizedAlgorithm> = Arc::new(EncryptionAlgorithm(ses.clone()));
        for cycle in 1..=2 {
            let a = ses_channel(ses.clone(), cycle).unwrap();
            let b = rand_alg_channel(alg.clone(), cycle).unwrap();
            let mut frontier = vec![History::new()];
            for _ in 0..cycle + 2 {
                let mut next = Vec::new();
                for h in &frontier {
                    let pa = a.pmf(h).unwrap().unwrap();
                    let pb = b.pmf(h).unwrap().unwrap();
                    assert_eq!(pa, pb, "history {h:?}");
                    next.extend(pa.keys().map(|d| h.extended(d.clone())));
                }
                frontier = next;
            }
        }
    }

    #[test]
    fn deterministic_channel_is_point_mass_on_full_histories() {
        let ses: Arc<dyn EncryptionScheme> = Arc::new(det_scheme(128).unwrap());
        let ch = ses_channel(ses, 1).unwrap();
        let h = History::from_docs(vec![Bits::zeros(128), Bits::from_u64(5, 8)]);
        let pmf = ch.pmf(&h).unwrap().unwrap();
        assert_eq!(pmf.len(), 1);
    }

    #[test]
    fn descriptor_json() {
        let ch = ses_channel(randpad8(), 4).unwrap();
        let v = serde_json::to_value(ch.descriptor()).unwrap();
        assert_eq!(v["type"], "ses");
        assert_eq!(v["ℓ"], 4);
        assert_eq!(v["κ"], 128);
        assert_eq!(v["max_doc_len"], 128);
        assert_eq!(v["scheme_id"], "randpad:8:8");
    }

    #[test]
    fn point_mass_validation() {
        let ch = PointMassChannel::new(Bits::from_u64(3, 4));
        assert!(ch
            .validate(&History::from_docs(vec![Bits::from_u64(3, 4)]))
            .is_ok());
        assert!(ch
            .validate(&History::from_docs(vec![Bits::from_u64(2, 4)]))
            .is_err());
    }

    #[test]
    fn channel_names() {
        assert_eq!(
            channel_by_name("uniform:8", 128, 1).unwrap().max_doc_len(),
            8
        );
        assert_eq!(
            channel_by_name("randpad:8", 128, 2)
                .unwrap()
                .descriptor()
                .kind,
            "ses"
        );
        assert!(channel_by_name("uniform:x", 128, 1).is_err());
    }
}
