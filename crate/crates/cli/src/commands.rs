//! One function per subcommand. Each resolves fixtures from the settings and
//! hands the work to the core library.

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Map, Value};
use subvertlab_core::asa::{asa_enc_all, check_outputs, StegoAttack};
use subvertlab_core::channel::channel_by_name;
use subvertlab_core::fixtures::{
    scheme_by_name, EncryptionScheme, SignatureKind, SignatureScheme, SigningAlgorithm,
    TagSignature,
};
use subvertlab_core::games::{
    cpa_adversary_by_name, estimate_unrel_star, estimate_unrel_stego, forger_by_name, run_cpa_dist,
    run_enc_asa_dist, run_rasa_dist, run_sig_forge, run_ss_cha_dist, split_schedule,
    warden_by_name, watchdog_by_name,
};
use subvertlab_core::stego::encode_all;
use subvertlab_core::{
    asa_from_stego, generic_asa_against_r, log2_phi, min_entropy_estimate, min_entropy_exact,
    AsaWatchdog, AttackKey, Bits, Channel, History, LowerBoundAttack, LowerBoundSetup, PhiParams,
    RejSam, StegoParams, Stegosystem, SubstitutionAttack,
};

use crate::report::{emit, read_records, write_csv, Clock, Record};
use crate::settings::{resolve, Opts, Settings};
use crate::CliError;

type Results = Result<Vec<Value>, CliError>;

/// Resolves the settings, runs `f` once per grid point and writes the
/// report. With `--input`, the input report's configuration is the lowest
/// layer.
pub fn run(command: &str, opts: Opts, f: fn(&Settings, &Opts) -> Results) -> Result<(), CliError> {
    let clock = Clock::start();
    if let Some(jobs) = opts.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(CliError::io)?;
    }
    let base = match &opts.input {
        Some(p) => input_record(p)?
            .config
            .as_object()
            .cloned()
            .unwrap_or_default(),
        None => Map::new(),
    };
    let (runs, out) = resolve(base, &opts)?;
    let mut records = Vec::new();
    for s in &runs {
        for r in f(s, &opts)? {
            records.push(Record::new(command, s, r));
        }
    }
    emit(command, &records, out.as_deref(), clock)
}

pub fn report_merge(paths: &[std::path::PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let records = crate::report::merge(paths)?;
    match out {
        Some(p) => write_csv(&records, std::fs::File::create(p).map_err(CliError::io)?),
        None => write_csv(&records, std::io::stdout()),
    }
}

fn input_record(path: &Path) -> Result<Record, CliError> {
    read_records(path)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Config(format!("{} holds no records", path.display())))
}

fn input_result(opts: &Opts) -> Result<Value, CliError> {
    let p = opts
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("--input is required".into()))?;
    Ok(input_record(p)?.result)
}

fn rng(s: &Settings) -> Result<ChaCha20Rng, CliError> {
    Ok(ChaCha20Rng::seed_from_u64(s.seed()?))
}

fn params(s: &Settings) -> Result<StegoParams, CliError> {
    StegoParams::new(s.kappa, s.ml, s.s, s.block_bits, s.beta, s.outl).map_err(CliError::config)
}

fn rejsam(s: &Settings) -> Result<RejSam, CliError> {
    RejSam::new(params(s)?).map_err(CliError::config)
}

fn channel(s: &Settings) -> Result<Arc<dyn Channel>, CliError> {
    channel_by_name(&s.channel, s.kappa, s.cycle).map_err(CliError::config)
}

fn host(s: &Settings) -> Result<Arc<dyn EncryptionScheme>, CliError> {
    scheme_by_name(&s.host, s.kappa).map_err(CliError::config)
}

fn history(s: &Settings) -> Result<History, CliError> {
    match &s.history {
        Some(h) => History::from_hex(h).map_err(CliError::config),
        None => Ok(History::new()),
    }
}

/// Where encoders and wardens start: after the full `s ∥ x^ℓ` prefix on
/// scheme channels, at the empty history otherwise.
fn prefix_len(s: &Settings, ch: &dyn Channel) -> usize {
    s.prefix_len
        .unwrap_or_else(|| ch.descriptor().cycle.map_or(0, |l| l + 1))
}

fn signature(s: &Settings, message_bits: usize) -> Result<Arc<dyn SignatureScheme>, CliError> {
    let kind: SignatureKind = s.sig.parse().map_err(CliError::config)?;
    let coins = if kind == SignatureKind::Unique {
        0
    } else {
        s.r
    };
    let sig =
        TagSignature::new(kind, s.kappa, message_bits, coins, s.t).map_err(CliError::config)?;
    Ok(Arc::new(sig))
}

fn attack_key(
    s: &Settings,
    steg_key_bits: usize,
    rng: &mut ChaCha20Rng,
) -> Result<AttackKey, CliError> {
    match &s.key {
        Some(h) => Ok(AttackKey::from_bits(
            Bits::from_hex(h, steg_key_bits).map_err(CliError::config)?,
        )),
        None => Ok(AttackKey::generate(steg_key_bits, rng)),
    }
}

fn hidden_message(s: &Settings, rng: &mut ChaCha20Rng) -> Result<Bits, CliError> {
    match &s.message {
        Some(h) => Bits::from_hex(h, s.ml).map_err(CliError::config),
        None => Ok(Bits::random(s.ml, rng)),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a str, CliError> {
    v.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Config(format!("input report has no {key:?}")))
}

fn watchdogs(s: &Settings) -> Result<Vec<Box<dyn AsaWatchdog>>, CliError> {
    s.watchdog
        .iter()
        .map(|w| watchdog_by_name(w).map_err(CliError::config))
        .collect()
}

fn to_value(r: impl serde::Serialize) -> Value {
    serde_json::to_value(r).expect("plain struct")
}

// ---------------------------------------------------------------------------
// channel

pub fn channel_sample(s: &Settings, _: &Opts) -> Results {
    let ch = channel(s)?;
    let mut h = history(s)?;
    ch.validate(&h).map_err(CliError::config)?;
    let mut rng = rng(s)?;
    let mut docs = Vec::with_capacity(s.count);
    for _ in 0..s.count {
        let d = ch.sample(&h, &mut rng).map_err(CliError::run)?;
        h.push(d.clone());
        docs.push(d.to_hex());
    }
    Ok(vec![json!({
        "channel": ch.descriptor(),
        "docs": docs,
        "history": h.to_hex(),
    })])
}

pub fn channel_entropy(s: &Settings, _: &Opts) -> Results {
    let ch = channel(s)?;
    let h = history(s)?;
    let exact = ch.pmf(&h).map_err(CliError::config)?.is_some();
    let report = if exact {
        min_entropy_exact(ch.as_ref(), [&h]).map_err(CliError::run)?
    } else {
        min_entropy_estimate(ch.as_ref(), &h, s.n as usize, &mut rng(s)?).map_err(CliError::run)?
    };
    Ok(vec![
        json!({"channel": ch.descriptor(), "min_entropy": report}),
    ])
}

// ---------------------------------------------------------------------------
// stego

pub fn stego_embed(s: &Settings, _: &Opts) -> Results {
    let steg = rejsam(s)?;
    let ch = channel(s)?;
    let h = history(s)?;
    let mut rng = rng(s)?;
    let ak = attack_key(s, steg.key_bits(), &mut rng)?;
    let am = hidden_message(s, &mut rng)?;
    let docs = encode_all(
        &steg,
        &ak,
        &am,
        ch.as_ref(),
        &h,
        steg.output_len(),
        &mut rng,
    )
    .map_err(CliError::run)?;
    Ok(vec![json!({
        "params": steg.params(),
        "key": ak.to_hex(),
        "message": am.to_hex(),
        "docs": History::from_docs(docs).to_hex(),
    })])
}

pub fn stego_extract(s: &Settings, opts: &Opts) -> Results {
    let steg = rejsam(s)?;
    let input = input_result(opts)?;
    let key = match &s.key {
        Some(k) => k.clone(),
        None => field(&input, "key")?.to_string(),
    };
    let ak = AttackKey::from_bits(Bits::from_hex(&key, steg.key_bits()).map_err(CliError::config)?);
    let docs = History::from_hex(field(&input, "docs")?).map_err(CliError::config)?;
    let out = steg.decode(&ak, docs.docs()).map_err(CliError::run)?;
    let expected = input.get("message").and_then(Value::as_str);
    Ok(vec![json!({
        "message": out.as_ref().map(Bits::to_hex),
        "matches": expected.map(|m| out.as_ref().map(Bits::to_hex).as_deref() == Some(m)),
    })])
}

pub fn stego_roundtrip(s: &Settings, _: &Opts) -> Results {
    let steg = rejsam(s)?;
    let ch = channel(s)?;
    let prefix = prefix_len(s, ch.as_ref());
    let seed = s.seed()?;
    let report = if s.tau <= 1 {
        estimate_unrel_stego(&steg, ch.as_ref(), prefix, s.n, seed)
    } else {
        let outl = steg.output_len();
        let ch = ch.as_ref();
        estimate_unrel_star(
            &steg,
            ch,
            |rng| split_schedule(ch, prefix, outl, s.tau, rng),
            s.n,
            seed,
        )
    }
    .map_err(CliError::run)?;
    Ok(vec![to_value(report)])
}

// ---------------------------------------------------------------------------
// asa

fn stego_attack(s: &Settings) -> Result<(StegoAttack, Arc<dyn EncryptionScheme>), CliError> {
    let ses = host(s)?;
    let asa = asa_from_stego(Arc::new(rejsam(s)?), ses.clone()).map_err(CliError::config)?;
    Ok((asa, ses))
}

pub fn asa_build(s: &Settings, _: &Opts) -> Results {
    let (asa, ses) = stego_attack(s)?;
    Ok(vec![json!({
        "host": ses.id(),
        "host_params": ses.params(),
        "params": params(s)?,
        "output_len": asa.output_len(),
        "output_bits": asa.output_bits(),
        "key_bits": asa.key_bits(),
        "rate": asa.message_bits() as f64 / asa.output_len().max(1) as f64,
    })])
}

pub fn asa_run(s: &Settings, _: &Opts) -> Results {
    let (asa, ses) = stego_attack(s)?;
    let mut rng = rng(s)?;
    let ak = attack_key(s, asa.key_bits(), &mut rng)?;
    let am = hidden_message(s, &mut rng)?;
    let k = ses.gen(&mut rng);
    let inputs: Vec<Bits> = (0..asa.output_len())
        .map(|_| Bits::random(ses.message_bits(), &mut rng))
        .collect();
    let outputs = asa_enc_all(&asa, &ak, &am, &k, &inputs, &mut rng).map_err(CliError::run)?;
    check_outputs(&asa, &outputs).map_err(|e| CliError::Invariant(e.to_string()))?;
    Ok(vec![json!({
        "key": ak.to_hex(),
        "message": am.to_hex(),
        "secret": k.to_hex(),
        "inputs": History::from_docs(inputs).to_hex(),
        "outputs": History::from_docs(outputs).to_hex(),
    })])
}

pub fn asa_extract(s: &Settings, opts: &Opts) -> Results {
    let (asa, _) = stego_attack(s)?;
    let input = input_result(opts)?;
    let key = match &s.key {
        Some(k) => k.clone(),
        None => field(&input, "key")?.to_string(),
    };
    let ak = AttackKey::from_bits(Bits::from_hex(&key, asa.key_bits()).map_err(CliError::config)?);
    let outputs = History::from_hex(field(&input, "outputs")?).map_err(CliError::config)?;
    check_outputs(&asa, outputs.docs()).map_err(CliError::config)?;
    let out = asa.extract(&ak, outputs.docs()).map_err(CliError::run)?;
    let expected = input.get("message").and_then(Value::as_str);
    Ok(vec![json!({
        "message": out.as_ref().map(Bits::to_hex),
        "matches": expected.map(|m| out.as_ref().map(Bits::to_hex).as_deref() == Some(m)),
    })])
}

// ---------------------------------------------------------------------------
// games

pub fn game_cpa(s: &Settings, _: &Opts) -> Results {
    let ses = host(s)?;
    let seed = s.seed()?;
    s.adversary
        .iter()
        .map(|name| {
            let adv = cpa_adversary_by_name(name).map_err(CliError::config)?;
            let r = run_cpa_dist(adv.as_ref(), ses.as_ref(), s.n, seed).map_err(CliError::run)?;
            Ok(to_value(r))
        })
        .collect()
}

pub fn game_enc_asa(s: &Settings, _: &Opts) -> Results {
    let (asa, ses) = stego_attack(s)?;
    let seed = s.seed()?;
    watchdogs(s)?
        .iter()
        .map(|w| {
            let r = run_enc_asa_dist(w.as_ref(), &asa, ses.clone(), s.n, seed)
                .map_err(CliError::run)?;
            Ok(to_value(r))
        })
        .collect()
}

pub fn game_ss_cha(s: &Settings, _: &Opts) -> Results {
    let steg = rejsam(s)?;
    let ch = channel(s)?;
    let prefix = prefix_len(s, ch.as_ref());
    let seed = s.seed()?;
    s.warden
        .iter()
        .map(|name| {
            let w = warden_by_name(name, prefix).map_err(CliError::config)?;
            let r = run_ss_cha_dist(w.as_ref(), &steg, ch.as_ref(), s.n, seed)
                .map_err(CliError::run)?;
            Ok(to_value(r))
        })
        .collect()
}

/// The signing host for the generic attack signs 8-bit messages.
const SIGNED_MESSAGE_BITS: usize = 8;

pub fn game_rasa(s: &Settings, _: &Opts) -> Results {
    let sig = signature(s, SIGNED_MESSAGE_BITS)?;
    let host = SigningAlgorithm(sig);
    let asa = generic_asa_against_r(Arc::new(rejsam(s)?), Arc::new(host.clone()))
        .map_err(CliError::config)?;
    let seed = s.seed()?;
    watchdogs(s)?
        .iter()
        .map(|w| {
            let r = run_rasa_dist(w.as_ref(), &asa, &host, s.n, seed).map_err(CliError::run)?;
            Ok(to_value(r))
        })
        .collect()
}

pub fn game_forge(s: &Settings, _: &Opts) -> Results {
    let sig = signature(s, SIGNED_MESSAGE_BITS)?;
    let seed = s.seed()?;
    s.forger
        .iter()
        .map(|name| {
            let f = forger_by_name(name, s.budget).map_err(CliError::config)?;
            let r = run_sig_forge(f.as_ref(), sig.as_ref(), s.n, seed).map_err(CliError::run)?;
            Ok(to_value(r))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// lowerbound

pub fn lowerbound_phi(s: &Settings, _: &Opts) -> Results {
    let outl = match s.outl {
        Some(o) => o,
        None => params(s)?.outl,
    };
    let p = PhiParams {
        outl: outl as u64,
        query: s.query.unwrap_or(s.s as u64 + 1),
        ml: s.ml as u64,
    };
    let l = log2_phi(p);
    Ok(vec![json!({
        "outl": p.outl,
        "query": p.query,
        "ml": p.ml,
        "log2_phi": l,
        "phi": l.exp2(),
    })])
}

fn lowerbound_setup(s: &Settings) -> Result<LowerBoundSetup, CliError> {
    let base = host(s)?;
    let sig = signature(s, base.ciphertext_bits())?;
    let attack = match s.attack.as_str() {
        "rejsam" => LowerBoundAttack::RejSam(params(s)?),
        "fabricating" => LowerBoundAttack::Fabricating { message_bits: s.ml },
        other => {
            return Err(CliError::Config(format!(
                "unknown lower-bound attack {other:?} (rejsam or fabricating)"
            )))
        }
    };
    let mut lb = LowerBoundSetup::new(base, sig, s.seed()?, attack).map_err(CliError::config)?;
    if let Some(q) = s.query {
        lb.query_bound = q;
    }
    Ok(lb)
}

pub fn lowerbound_forger(s: &Settings, _: &Opts) -> Results {
    let lb = lowerbound_setup(s)?;
    let r = lb.forger_report(s.n, s.seed()?).map_err(CliError::run)?;
    Ok(vec![to_value(r)])
}

pub fn lowerbound_rate(s: &Settings, _: &Opts) -> Results {
    let lb = lowerbound_setup(s)?;
    let wds = watchdogs(s)?;
    let refs: Vec<&dyn AsaWatchdog> = wds.iter().map(|w| w.as_ref()).collect();
    let run = lb.rate(&refs, s.n, s.seed()?).map_err(CliError::run)?;
    let mut v = to_value(&run.report);
    v["inequality_holds"] = run.holds.into();
    v["host"] = lb.family.id().into();
    Ok(vec![v])
}
