//! Algorithm substitution attacks and their steganographic counterparts:
//! channels induced by primitives, rejection-sampling steganography,
//! subverted encryption and signing, and Monte Carlo security games.

pub mod asa;
pub mod bits;
pub mod channel;
pub mod converse;
pub mod entropy;
pub mod error;
pub mod fixtures;
pub mod games;
pub mod lowerbound;
pub mod prf;
pub mod stats;
pub mod stego;

pub use asa::{
    asa_from_stego, generic_asa_against_r, universal_asa, EncryptionOracle, OracleAttack,
    SchemeOracle, SharedOracle, StegoAttack, SubstitutionAttack, Transcript, UniformCoverAttack,
    UniversalAttack,
};
pub use bits::{Bits, Document, History};
pub use channel::{
    channel_sample, rand_alg_channel, ses_channel, Channel, ChannelDescriptor, DocumentSource,
    PointMassChannel, RandAlgChannel, SesChannel, UniformChannel,
};
pub use converse::{stego_from_asa, stego_from_rasa, WardenWatchdog, WrappedStego};
pub use entropy::{min_entropy_estimate, min_entropy_exact, EntropyMethod, MinEntropyReport};
pub use error::{Error, Result};
pub use fixtures::{
    det_scheme, randpad_scheme, scheme_by_name, sig_fixture, EncryptionAlgorithm, EncryptionScheme,
    RandomizedAlgorithm, SignatureKind, SignatureScheme, SigningAlgorithm, TagSignature,
};
pub use games::{AsaWatchdog, CpaAdversary, Decision, Forger, GameReport, TrialRng, Warden};
pub use lowerbound::{
    forger_from_universal_asa, log2_phi, make_signed_family, phi, rate_report, FabricatingAttack,
    LowerBoundAttack, LowerBoundSetup, PhiParams, RateReport, RateRun, SignedScheme,
};
pub use prf::{AttackKey, Prf};
pub use stego::{outl_for, RejSam, SamplingStego, State, StegoParams, Stegosystem};
