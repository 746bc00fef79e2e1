//! Stegosystems and the rejection-sampling construction RejSam.
//!
//! The encoder draws cover documents until the keyed PRF maps one of them to
//! a (value, index) pair that agrees with the hidden message, giving up once
//! more than `s` draws were made. The decoder reads the same pairs back and needs no history.
//! With `block_bits = 1` every document carries one message bit; larger
//! blocks carry `block_bits` bits at the cost of `2^block_bits` expected
//! draws.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::{Bits, Document, History};
use crate::channel::{Channel, ChannelSource, DocumentSource};
use crate::error::{Error, Result};
use crate::prf::{log2_exact, AttackKey, Prf};

/// Opaque encoder state. Every construction here is stateless and hands the
/// state back untouched.
pub type State = Bits;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StegoParams {
    #[serde(rename = "κ")]
    pub kappa: usize,
    pub ml: usize,
    pub s: usize,
    #[serde(rename = "β")]
    pub beta: f64,
    pub block_bits: usize,
    pub outl: usize,
}

/// `ml - ln ml` for the bit variant; for blocks the same rule applied to
/// the number of blocks.
pub fn default_beta(ml: usize, block_bits: usize) -> f64 {
    let n = ml.div_ceil(block_bits.max(1)) as f64;
    n - n.ln()
}

/// Documents needed so that every one of the `⌈ml / block_bits⌉` blocks is
/// hit with good probability: `⌈n (ln n + β)⌉`.
pub fn outl_for(ml: usize, beta: f64, block_bits: usize) -> Result<usize> {
    log2_exact(ml)?;
    if block_bits == 0 || block_bits > 32 {
        return Err(Error::InvalidParameter(format!(
            "block_bits must be in 1..=32, got {block_bits}"
        )));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "β must be positive, got {beta}"
        )));
    }
    let n = ml.div_ceil(block_bits) as f64;
    // Guard against 255.99999999999997-style rounding in exact cases.
    Ok((n * (n.ln() + beta) - 1e-9).ceil().max(0.0) as usize)
}

impl StegoParams {
    /// Parameters with `outl` and `β` filled in from their defaults when
    /// absent.
    pub fn new(
        kappa: usize,
        ml: usize,
        s: usize,
        block_bits: usize,
        beta: Option<f64>,
        outl: Option<usize>,
    ) -> Result<Self> {
        let beta = beta.unwrap_or_else(|| default_beta(ml, block_bits));
        let computed = outl_for(ml, beta, block_bits)?;
        let p = StegoParams {
            kappa,
            ml,
            s,
            beta,
            block_bits,
            outl: outl.unwrap_or(computed),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        log2_exact(self.ml)?;
        if self.kappa == 0 {
            return Err(Error::InvalidParameter("κ must be positive".into()));
        }
        if self.block_bits == 0 || self.block_bits > 32 {
            return Err(Error::InvalidParameter(format!(
                "block_bits must be in 1..=32, got {}",
                self.block_bits
            )));
        }
        Ok(())
    }

    /// Number of message blocks, after zero-padding `ml` to a multiple of
    /// `block_bits`.
    pub fn blocks(&self) -> usize {
        self.ml.div_ceil(self.block_bits)
    }

    pub fn pad_bits(&self) -> usize {
        self.blocks() * self.block_bits - self.ml
    }

    /// Embedded bits per document.
    pub fn rate(&self) -> f64 {
        if self.outl == 0 {
            0.0
        } else {
            self.ml as f64 / self.outl as f64
        }
    }
}

/// A keyed encoder/decoder pair over some channel.
pub trait Stegosystem: Send + Sync {
    fn message_bits(&self) -> usize;
    fn output_len(&self) -> usize;
    fn key_bits(&self) -> usize;

    fn gen(&self, rng: &mut dyn RngCore) -> AttackKey {
        AttackKey::generate(self.key_bits(), rng)
    }

    /// One document for history `h` of `channel`.
    fn encode(
        &self,
        ak: &AttackKey,
        am: &Bits,
        channel: &dyn Channel,
        h: &History,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Document, State)>;

    /// `Ok(None)` is ⊥.
    fn decode(&self, ak: &AttackKey, docs: &[Document]) -> Result<Option<Bits>>;
}

/// A stegosystem whose encoder only needs sampling access to `C_h`, never
/// `h` itself. These can run over any document source, including an
/// encryption oracle.
pub trait SamplingStego: Stegosystem {
    fn encode_from(
        &self,
        ak: &AttackKey,
        am: &Bits,
        source: &mut dyn DocumentSource,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Document, State)>;
}

/// Result of one rejection-sampling step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub doc: Document,
    /// Channel draws made, including the one returned.
    pub draws: usize,
    /// Whether the returned document encodes the right value.
    pub matched: bool,
}

/// The rejection-sampling stegosystem.
#[derive(Clone, Debug)]
pub struct RejSam {
    params: StegoParams,
}

impl RejSam {
    pub fn new(params: StegoParams) -> Result<Self> {
        params.validate()?;
        Ok(RejSam { params })
    }

    pub fn params(&self) -> &StegoParams {
        &self.params
    }

    /// `(value, block index)` carried by `d`.
    pub fn mark(&self, prf: &Prf, d: &Document) -> Result<(u64, usize)> {
        if self.params.block_bits == 1 {
            let (b, j) = prf.split(d, self.params.ml)?;
            Ok((b as u64, j))
        } else {
            Ok(prf.split_block(d, self.params.block_bits, self.params.blocks()))
        }
    }

    fn padded(&self, am: &Bits) -> Result<Bits> {
        if am.len() != self.params.ml {
            return Err(Error::LengthMismatch {
                what: "hidden message",
                expected: self.params.ml,
                actual: am.len(),
            });
        }
        Ok(am.concat(&Bits::zeros(self.params.pad_bits())))
    }

    fn block_value(&self, padded: &Bits, j: usize) -> u64 {
        let bb = self.params.block_bits;
        padded.slice(j * bb, bb).to_u64()
    }

    /// Draws until the mark of a document agrees with `am` or more than `s`
    /// draws were made; in the latter case the last draw is returned
    /// regardless. At most `s + 1` draws.
    pub fn encode_step(
        &self,
        ak: &AttackKey,
        am: &Bits,
        source: &mut dyn DocumentSource,
        rng: &mut dyn RngCore,
    ) -> Result<Step> {
        let prf = Prf::from_key(ak);
        let padded = self.padded(am)?;
        let mut draws = 0;
        loop {
            let doc = source.draw(rng)?;
            draws += 1;
            let (v, j) = self.mark(&prf, &doc)?;
            let matched = self.block_value(&padded, j) == v;
            if matched || draws > self.params.s {
                return Ok(Step {
                    doc,
                    draws,
                    matched,
                });
            }
        }
    }
}

impl Stegosystem for RejSam {
    fn message_bits(&self) -> usize {
        self.params.ml
    }

    fn output_len(&self) -> usize {
        self.params.outl
    }

    fn key_bits(&self) -> usize {
        self.params.kappa
    }

    fn encode(
        &self,
        ak: &AttackKey,
        am: &Bits,
        channel: &dyn Channel,
        h: &History,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Document, State)> {
        let mut source = ChannelSource::new(channel, h)?;
        self.encode_from(ak, am, &mut source, state, rng)
    }

    fn decode(&self, ak: &AttackKey, docs: &[Document]) -> Result<Option<Bits>> {
        if docs.len() != self.params.outl {
            return Err(Error::WrongDocumentCount {
                expected: self.params.outl,
                actual: docs.len(),
            });
        }
        let prf = Prf::from_key(ak);
        let mut blocks: Vec<Option<u64>> = vec![None; self.params.blocks()];
        for d in docs {
            let (v, j) = self.mark(&prf, d)?;
            blocks[j] = Some(v);
        }
        let bb = self.params.block_bits;
        let mut out = Bits::empty();
        for v in blocks {
            match v {
                Some(v) => out = out.concat(&Bits::from_u64(v, bb)),
                None => return Ok(None),
            }
        }
        Ok(Some(out.slice(0, self.params.ml)))
    }
}

impl SamplingStego for RejSam {
    fn encode_from(
        &self,
        ak: &AttackKey,
        am: &Bits,
        source: &mut dyn DocumentSource,
        state: State,
        rng: &mut dyn RngCore,
    ) -> Result<(Document, State)> {
        let step = self.encode_step(ak, am, source, rng)?;
        Ok((step.doc, state))
    }
}

/// `rejsam_encode_all`: `count` documents, each appended to the history
/// before the next one is encoded.
pub fn encode_all(
    steg: &dyn Stegosystem,
    ak: &AttackKey,
    am: &Bits,
    channel: &dyn Channel,
    h: &History,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Document>> {
    let mut h = h.clone();
    let mut state = State::empty();
    let mut docs = Vec::with_capacity(count);
    for _ in 0..count {
        let (d, next) = steg.encode(ak, am, channel, &h, state, rng)?;
        state = next;
        h.push(d.clone());
        docs.push(d);
    }
    Ok(docs)
}

/// A restart plan: encode `ℓ_i` documents starting from history `h_i`.
pub type Schedule = Vec<(History, usize)>;

/// Encodes along a restart schedule and returns the concatenated documents.
/// The segment lengths must add up to the stegosystem's output length.
pub fn encode_scheduled(
    steg: &dyn Stegosystem,
    ak: &AttackKey,
    am: &Bits,
    channel: &dyn Channel,
    schedule: &Schedule,
    rng: &mut dyn RngCore,
) -> Result<Vec<Document>> {
    let total: usize = schedule.iter().map(|(_, l)| l).sum();
    if total != steg.output_len() {
        return Err(Error::ScheduleMismatch {
            expected: steg.output_len(),
            actual: total,
        });
    }
    let mut docs = Vec::with_capacity(total);
    for (h, l) in schedule {
        docs.extend(encode_all(steg, ak, am, channel, h, *l, rng)?);
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{PointMassChannel, UniformChannel};
    use crate::stats::chi_square_uniform;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params(ml: usize, s: usize, block_bits: usize, outl: usize) -> StegoParams {
        StegoParams::new(128, ml, s, block_bits, None, Some(outl)).unwrap()
    }

    #[test]
    fn outl_examples() {
        assert_eq!(outl_for(16, 16.0 - 16f64.ln(), 1).unwrap(), 256);
        assert_eq!(outl_for(2, 2f64.ln(), 1).unwrap(), 3);
        assert_eq!(outl_for(64, 2.0, 6).unwrap(), 49);
        assert_eq!(outl_for(12, 1.0, 1), Err(Error::NotPowerOfTwo(12)));
        assert!(outl_for(8, 0.0, 1).is_err());
        let p = StegoParams::new(128, 16, 64, 1, None, None).unwrap();
        assert_eq!(p.outl, 256);
        assert_eq!(p.rate(), 0.0625);
    }

    #[test]
    fn params_json() {
        let p = params(8, 64, 1, 64);
        let v = serde_json::to_value(&p).unwrap();
        for k in ["κ", "ml", "s", "β", "block_bits", "outl"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let back: StegoParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn block_padding() {
        let p = params(64, 64, 6, 49);
        assert_eq!(p.blocks(), 11);
        assert_eq!(p.pad_bits(), 2);
    }

    #[test]
    fn cutoff_bounds_draws() {
        let ch = UniformChannel::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        let am = Bits::from_u64(0xa5, 8);
        let empty = History::new();
        for (s, max) in [(0, 1), (1, 2), (3, 4)] {
            let steg = RejSam::new(params(8, s, 1, 64)).unwrap();
            let ak = steg.gen(&mut rng);
            let mut seen = [false; 5];
            for _ in 0..400 {
                let mut src = ChannelSource::new(&ch, &empty).unwrap();
                let step = steg.encode_step(&ak, &am, &mut src, &mut rng).unwrap();
                assert!(step.draws <= max);
                seen[step.draws] = true;
            }
            assert!(seen[max], "cutoff {s} never reached");
        }
    }

    #[test]
    fn point_mass_channel_terminates() {
        let steg = RejSam::new(params(8, 16, 1, 64)).unwrap();
        let ch = PointMassChannel::new(Bits::from_u64(7, 8));
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let ak = steg.gen(&mut rng);
        let docs = encode_all(
            &steg,
            &ak,
            &Bits::zeros(8),
            &ch,
            &History::new(),
            64,
            &mut rng,
        )
        .unwrap();
        assert!(docs.iter().all(|d| d == &Bits::from_u64(7, 8)));
        // a single document covers one index at most
        assert_eq!(steg.decode(&ak, &docs).unwrap(), None);
    }

    #[test]
    fn decode_rejects_wrong_count_and_uncovered() {
        let steg = RejSam::new(params(8, 64, 1, 4)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let ak = steg.gen(&mut rng);
        assert_eq!(
            steg.decode(&ak, &[Bits::zeros(8)]),
            Err(Error::WrongDocumentCount {
                expected: 4,
                actual: 1
            })
        );
        // four documents cannot cover eight positions
        let docs: Vec<_> = (0..4).map(|_| Bits::random(8, &mut rng)).collect();
        assert_eq!(steg.decode(&ak, &docs).unwrap(), None);
    }

    #[test]
    fn state_passes_through() {
        let steg = RejSam::new(params(8, 64, 1, 64)).unwrap();
        let ch = UniformChannel::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(44);
        let ak = steg.gen(&mut rng);
        let am = Bits::from_u64(3, 8);
        let sigma = Bits::from_u64(0xfeed, 16);
        let mut a = ChaCha20Rng::seed_from_u64(1);
        let mut b = ChaCha20Rng::seed_from_u64(1);
        let (d1, s1) = steg
            .encode(&ak, &am, &ch, &History::new(), sigma.clone(), &mut a)
            .unwrap();
        let (d2, s2) = steg
            .encode(&ak, &am, &ch, &History::new(), State::empty(), &mut b)
            .unwrap();
        assert_eq!(s1, sigma);
        assert_eq!(s2, State::empty());
        assert_eq!(d1, d2);
    }

    #[test]
    fn block_bits_one_is_the_bit_variant() {
        // the bit path and the block path agree when blocks are single bits
        let steg = RejSam::new(params(16, 64, 1, 64)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(45);
        let ak = steg.gen(&mut rng);
        let prf = Prf::from_key(&ak);
        for _ in 0..500 {
            let d = Bits::random(8, &mut rng);
            assert_eq!(steg.mark(&prf, &d).unwrap(), prf.split_block(&d, 1, 16));
        }
    }

    #[test]
    fn emitted_documents_look_uniform() {
        let steg = RejSam::new(params(8, 64, 1, 64)).unwrap();
        let ch = UniformChannel::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(46);
        let mut counts = vec![0u64; 256];
        for _ in 0..(10_000 / 64 + 1) {
            let ak = steg.gen(&mut rng);
            let am = Bits::random(8, &mut rng);
            for d in encode_all(&steg, &ak, &am, &ch, &History::new(), 64, &mut rng).unwrap() {
                counts[d.to_u64() as usize] += 1;
            }
        }
        assert!(chi_square_uniform(&counts).passes(0.999));
    }

    #[test]
    fn schedule_sum_checked() {
        let steg = RejSam::new(params(8, 64, 1, 64)).unwrap();
        let ch = UniformChannel::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(47);
        let ak = steg.gen(&mut rng);
        let bad = vec![(History::new(), 10)];
        let am = Bits::zeros(8);
        assert_eq!(
            encode_scheduled(&steg, &ak, &am, &ch, &bad, &mut rng),
            Err(Error::ScheduleMismatch {
                expected: 64,
                actual: 10
            })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn honest_marks_never_conflict(seed in any::<u64>(), am in any::<u8>()) {
            // with an unreachable cutoff every emitted document matches, so
            // two documents hitting the same index carry the same bit
            let steg = RejSam::new(params(8, 1 << 20, 1, 64)).unwrap();
            let ch = UniformChannel::new(8);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let ak = steg.gen(&mut rng);
            let am = Bits::from_u64(am as u64, 8);
            let docs = encode_all(&steg, &ak, &am, &ch, &History::new(), 64, &mut rng).unwrap();
            let prf = Prf::from_key(&ak);
            for d in &docs {
                let (v, j) = steg.mark(&prf, d).unwrap();
                prop_assert_eq!(v == 1, am.get(j));
            }
            let mut rev = docs.clone();
            rev.reverse();
            prop_assert_eq!(steg.decode(&ak, &docs).unwrap(), steg.decode(&ak, &rev).unwrap());
        }

        #[test]
        fn block_roundtrip_when_covered(seed in any::<u64>(), am in any::<u16>()) {
            let steg = RejSam::new(params(16, 1 << 20, 4, 64)).unwrap();
            let ch = UniformChannel::new(16);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let ak = steg.gen(&mut rng);
            let am = Bits::from_u64(am as u64, 16);
            let docs = encode_all(&steg, &ak, &am, &ch, &History::new(), 64, &mut rng).unwrap();
            if let Some(out) = steg.decode(&ak, &docs).unwrap() {
                prop_assert_eq!(out, am);
            }
        }
    }
}
