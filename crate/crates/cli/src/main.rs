//! `subvertlab`: runs channels, stegosystems, substitution attacks, games
//! and lower-bound experiments, and writes JSON-lines reports.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a run
//! detects an invariant violation, 1 for I/O failures.

mod commands;
mod report;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::settings::Opts;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Invariant(String),
    Io(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    /// Errors while building fixtures and constructions.
    pub fn config(e: subvertlab_core::Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Errors raised while a run is in progress. Parameter errors are still
    /// configuration errors; anything else means an invariant broke.
    pub fn run(e: subvertlab_core::Error) -> Self {
        use subvertlab_core::Error as E;
        match e {
            E::NotPowerOfTwo(_) | E::InvalidParameter(_) | E::UnsupportedKind(_) => {
                CliError::Config(e.to_string())
            }
            e => CliError::Invariant(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violation: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "subvertlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample channels and measure their min-entropy
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Rejection-sampling stegosystem
    #[command(subcommand)]
    Stego(StegoCmd),
    /// Substitution attack built from the stegosystem
    #[command(subcommand)]
    Asa(AsaCmd),
    /// Monte Carlo security games
    #[command(subcommand)]
    Game(GameCmd),
    /// Rate lower-bound experiment
    #[command(subcommand)]
    Lowerbound(LowerboundCmd),
    /// Work with report files
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Draw successive documents after a history
    Sample(Opts),
    /// Exact or collision-estimated min-entropy after a history
    Entropy(Opts),
}

#[derive(Subcommand)]
enum StegoCmd {
    /// Encode one hidden message
    Embed(Opts),
    /// Decode the documents of an embed report
    Extract(Opts),
    /// Estimate the decoding failure rate
    Roundtrip(Opts),
}

#[derive(Subcommand)]
enum AsaCmd {
    /// Describe the attack against the host
    Build(Opts),
    /// Produce one sequence of subverted ciphertexts
    Run(Opts),
    /// Recover the hidden message from a run report
    Extract(Opts),
}

#[derive(Subcommand)]
enum GameCmd {
    /// Real-or-random CPA game against the host
    Cpa(Opts),
    /// Watchdogs against the attack on the host encryption
    EncAsa(Opts),
    /// Wardens against the stegosystem
    SsCha(Opts),
    /// Watchdogs against the attack on a signing algorithm
    Rasa(Opts),
    /// Existential forgery against the signature fixture
    Forge(Opts),
}

#[derive(Subcommand)]
enum LowerboundCmd {
    /// Evaluate φ(outl, query, ml)
    Phi(Opts),
    /// Forger success of the forger built from the attack
    Forger(Opts),
    /// Forger success against 1 − insec − unrel − φ
    Rate(Opts),
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Concatenate reports into one CSV with provenance columns
    Merge {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// CSV destination (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    use commands::*;
    match cmd {
        Command::Channel(ChannelCmd::Sample(o)) => run("channel sample", o, channel_sample),
        Command::Channel(ChannelCmd::Entropy(o)) => run("channel entropy", o, channel_entropy),
        Command::Stego(StegoCmd::Embed(o)) => run("stego embed", o, stego_embed),
        Command::Stego(StegoCmd::Extract(o)) => run("stego extract", o, stego_extract),
        Command::Stego(StegoCmd::Roundtrip(o)) => run("stego roundtrip", o, stego_roundtrip),
        Command::Asa(AsaCmd::Build(o)) => run("asa build", o, asa_build),
        Command::Asa(AsaCmd::Run(o)) => run("asa run", o, asa_run),
        Command::Asa(AsaCmd::Extract(o)) => run("asa extract", o, asa_extract),
        Command::Game(GameCmd::Cpa(o)) => run("game cpa", o, game_cpa),
        Command::Game(GameCmd::EncAsa(o)) => run("game enc-asa", o, game_enc_asa),
        Command::Game(GameCmd::SsCha(o)) => run("game ss-cha", o, game_ss_cha),
        Command::Game(GameCmd::Rasa(o)) => run("game rasa", o, game_rasa),
        Command::Game(GameCmd::Forge(o)) => run("game forge", o, game_forge),
        Command::Lowerbound(LowerboundCmd::Phi(o)) => run("lowerbound phi", o, lowerbound_phi),
        Command::Lowerbound(LowerboundCmd::Forger(o)) => {
            run("lowerbound forger", o, lowerbound_forger)
        }
        Command::Lowerbound(LowerboundCmd::Rate(o)) => run("lowerbound rate", o, lowerbound_rate),
        Command::Report(ReportCmd::Merge { paths, out }) => report_merge(&paths, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subvertlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
