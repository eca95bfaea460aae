//! Command-line front end: key generation, authentication, key agreement,
//! bit exchange, condition checks, attacks, and preset listing. Exit codes:
//! 0 success or accept, 1 reject, 2 usage error, 3 runtime error.

use crate::attacks::{attack_a_key, attack_b_key, attack_variant_b};
use crate::conditions::check_condition;
use crate::protocols::{presets, sample_role_secrets, Role};
use crate::session::{
    read_params_file, run_pipe_session, run_session, transport, write_params_file, SessionConfig,
    SessionMode, SessionOutcome, Transcript,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ncsg",
    about = "Authentication and key agreement over non-commutative semigroups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair and print the public key
    Keygen(KeygenArgs),
    /// Run an authentication session
    Auth(SessionArgs),
    /// Run a key agreement session
    Ka(SessionArgs),
    /// Run a bit exchange over the word-problem channel
    Bits(BitsArgs),
    /// Evaluate the commutativity conditions for a parameter set
    CheckConditions(ParamsSource),
    /// Recover an equivalent key pair from a seeded honest run
    Attack(AttackArgs),
    /// Inspect built-in presets
    Presets(PresetsArgs),
}

#[derive(Args, Clone)]
struct ParamsSource {
    /// Built-in preset name (see `presets list`)
    #[arg(long, default_value = "perm6")]
    preset: String,
    /// Load params from a file instead of a preset
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Fixes all sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the params to a file for distribution
    #[arg(long, value_name = "FILE")]
    params_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("endpoint")
    .args(["pipe", "listen", "connect"])
    .required(true)
    .multiple(false))]
struct SessionArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// Endpoint role (ignored with --pipe, which runs both)
    #[arg(long, value_enum, default_value_t = RoleArg::A)]
    role: RoleArg,
    /// Fixes all sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Use the inverse-based protocol variant
    #[arg(long)]
    variant: bool,
    /// Run both endpoints in process over a pipe
    #[arg(long)]
    pipe: bool,
    /// Serve one session on ADDR (e.g. 127.0.0.1:7000)
    #[arg(long, value_name = "ADDR")]
    listen: Option<String>,
    /// Connect to a serving endpoint on ADDR
    #[arg(long, value_name = "ADDR")]
    connect: Option<String>,
    /// Write this endpoint's transcript (role A's in --pipe runs)
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct BitsArgs {
    #[command(flatten)]
    session: SessionArgs,
    /// Number of bits to transfer
    #[arg(short, default_value_t = 32, value_name = "BITS")]
    m: u32,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    source: ParamsSource,
    /// What to recover
    #[arg(long, value_enum)]
    target: TargetArg,
    /// Seed for the honest run under attack
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate word length bound for braid platforms
    #[arg(long, value_name = "LEN")]
    word_bound: Option<u16>,
}

#[derive(Args)]
struct PresetsArgs {
    #[command(subcommand)]
    action: PresetsAction,
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List every built-in preset
    List,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum RoleArg {
    A,
    B,
}

impl From<RoleArg> for Role {
    fn from(r: RoleArg) -> Role {
        match r {
            RoleArg::A => Role::A,
            RoleArg::B => Role::B,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    AKey,
    BKey,
    VariantB,
}

/// Parses argv and runs the selected command, translating every outcome
/// into an exit code.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Keygen(args) => run_keygen(args),
        Command::Auth(args) => run_session_cmd(args, AuthOrKa::Auth, None),
        Command::Ka(args) => run_session_cmd(args, AuthOrKa::Ka, None),
        Command::Bits(args) => run_session_cmd(args.session, AuthOrKa::Bits, Some(args.m)),
        Command::CheckConditions(args) => run_check_conditions(args),
        Command::Attack(args) => run_attack(args),
        Command::Presets(args) => match args.action {
            PresetsAction::List => run_presets_list(),
        },
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn load_bundle(source: &ParamsSource) -> Result<presets::PresetBundle, String> {
    match &source.params {
        Some(path) => {
            let params = read_params_file(path).map_err(|e| e.to_string())?;
            Ok(presets::PresetBundle {
                name: path.display().to_string(),
                params,
                selection: None,
            })
        }
        None => presets::load(&source.preset).map_err(|e| e.to_string()),
    }
}

fn seeded_rng(seed: Option<u64>, stream: u64) -> ChaCha12Rng {
    let mut rng = match seed {
        Some(s) => ChaCha12Rng::seed_from_u64(s),
        None => ChaCha12Rng::from_entropy(),
    };
    rng.set_stream(stream);
    rng
}

fn run_keygen(args: KeygenArgs) -> Result<i32, String> {
    let bundle = load_bundle(&args.source)?;
    let params = &bundle.params;
    let mut rng = seeded_rng(args.seed, 1);
    let secrets = sample_role_secrets(params, bundle.selection.as_ref(), Role::A, &mut rng)
        .map_err(|e| e.to_string())?;
    let public = secrets.sandwich(&params.z).map_err(|e| e.to_string())?;
    println!("preset: {}", bundle.name);
    println!("platform: {}", params.platform);
    println!("params digest: {}", hex::encode(params.digest()));
    println!("public key: {public}");
    println!("public key bytes: {}", hex::encode(public.canonical_bytes()));
    if let Some(path) = &args.params_out {
        write_params_file(path, params).map_err(|e| e.to_string())?;
        println!("params written to {}", path.display());
    }
    Ok(EXIT_OK)
}

fn run_check_conditions(args: ParamsSource) -> Result<i32, String> {
    let bundle = load_bundle(&args)?;
    let report = check_condition(&bundle.params).map_err(|e| e.to_string())?;
    println!("preset: {}", bundle.name);
    print!("{report}");
    Ok(if report.all_hold { EXIT_OK } else { EXIT_REJECT })
}

enum AuthOrKa {
    Auth,
    Ka,
    Bits,
}

fn run_session_cmd(args: SessionArgs, kind: AuthOrKa, bits: Option<u32>) -> Result<i32, String> {
    let bundle = load_bundle(&args.source)?;
    let mode = match (kind, args.variant) {
        (AuthOrKa::Auth, false) => SessionMode::Auth,
        (AuthOrKa::Auth, true) => SessionMode::AuthVariant,
        (AuthOrKa::Ka, false) => SessionMode::Ka,
        (AuthOrKa::Ka, true) => SessionMode::KaVariant,
        (AuthOrKa::Bits, false) => SessionMode::Bits(bits.unwrap_or(32)),
        (AuthOrKa::Bits, true) => {
            return Err("the bit channel has no inverse variant".into());
        }
    };
    let config = |role| {
        SessionConfig::new(bundle.params.clone(), role, args.seed, mode)
            .with_selection(bundle.selection.clone())
    };

    let (transcript, outcome, peer_outcome) = if args.pipe {
        let (ra, rb) = run_pipe_session(&config(Role::A), &config(Role::B));
        let (ta, oa) = ra.map_err(|e| e.to_string())?;
        let (_, ob) = rb.map_err(|e| e.to_string())?;
        (ta, oa, Some(ob))
    } else {
        let mut t: Box<dyn transport::Transport> = if let Some(addr) = &args.listen {
            Box::new(transport::TcpTransport::accept_one(addr.as_str()).map_err(|e| e.to_string())?)
        } else {
            let addr = args.connect.as_ref().expect("clap enforces the endpoint group");
            Box::new(transport::TcpTransport::connect(addr.as_str()).map_err(|e| e.to_string())?)
        };
        let (tr, o) =
            run_session(&config(args.role.into()), t.as_mut()).map_err(|e| e.to_string())?;
        (tr, o, None)
    };

    if let Some(path) = &args.transcript {
        write_transcript(path, &transcript)?;
    }
    println!("outcome: {outcome}");
    if let Some(peer) = &peer_outcome {
        println!("peer outcome: {peer}");
    }
    let ok = |o: &SessionOutcome| match o {
        SessionOutcome::Auth(v) => *v == crate::protocols::Verdict::Accept,
        SessionOutcome::SharedKey { confirmed, .. } => *confirmed,
        SessionOutcome::Bits { confirmed, .. } => *confirmed,
    };
    let accepted = ok(&outcome) && peer_outcome.as_ref().is_none_or(ok);
    Ok(if accepted { EXIT_OK } else { EXIT_REJECT })
}

fn write_transcript(path: &Path, transcript: &Transcript) -> Result<(), String> {
    std::fs::write(path, transcript.to_bytes())
        .map_err(|e| format!("cannot write transcript to {}: {e}", path.display()))?;
    Ok(())
}

/// Replays a seeded honest run to obtain the public values an eavesdropper
/// would see, then runs the selected attack against them.
fn run_attack(args: AttackArgs) -> Result<i32, String> {
    let bundle = load_bundle(&args.source)?;
    let params = &bundle.params;
    let selection = bundle.selection.as_ref();
    let err = |e: &dyn std::fmt::Display| e.to_string();

    let mut rng_a = seeded_rng(Some(args.seed), 1);
    let mut rng_b = seeded_rng(Some(args.seed), 2);
    let mut rng_atk = seeded_rng(Some(args.seed), 3);

    let sa = sample_role_secrets(params, selection, Role::A, &mut rng_a).map_err(|e| err(&e))?;
    let result = match args.target {
        TargetArg::AKey => {
            let public = sa.sandwich(&params.z).map_err(|e| err(&e))?;
            println!("honest public key: {public}");
            attack_a_key(params, selection, &public, &mut rng_atk).map_err(|e| err(&e))?
        }
        TargetArg::BKey => {
            let sb = sample_role_secrets(params, selection, Role::B, &mut rng_b).map_err(|e| err(&e))?;
            let k_a = sa.sandwich(&params.z).map_err(|e| err(&e))?;
            let k_b = sb.sandwich(&params.z).map_err(|e| err(&e))?;
            let kappa = sa.sandwich(&k_b).map_err(|e| err(&e))?;
            attack_b_key(params, &k_b, &k_a, &kappa).map_err(|e| err(&e))?
        }
        TargetArg::VariantB => {
            let sb = sample_role_secrets(params, selection, Role::B, &mut rng_b).map_err(|e| err(&e))?;
            let k_a = sa.sandwich(&params.z).map_err(|e| err(&e))?;
            let k_b = sb.sandwich(&k_a).map_err(|e| err(&e))?;
            let kappa = sb.sandwich(&params.z).map_err(|e| err(&e))?;
            attack_variant_b(params, &k_a, &k_b, &kappa, args.word_bound).map_err(|e| err(&e))?
        }
    };
    println!("{result}");
    Ok(EXIT_OK)
}

fn run_presets_list() -> Result<i32, String> {
    for (name, summary) in presets::catalog() {
        println!("{name:<16} {summary}");
    }
    Ok(EXIT_OK)
}
