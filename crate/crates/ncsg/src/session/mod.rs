//! Two-party protocol sessions over a byte transport: params-digest
//! handshake, framed message flow for authentication, key agreement, and
//! the bit channel, plus a transcript of every frame in wire order.

pub mod transport;
pub mod wire;

use crate::algebra::{AlgebraError, PlatformElement};
use crate::bytes::DecodeError;
use crate::conditions::SelectionOutcome;
use crate::protocols::{
    challenge, challenge_variant, decode_bit_round, digest32, encode_bit_round, hash_element,
    sample_role_secrets, verify, verify_variant, ProtocolError, ProtocolParams, Role, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use transport::Transport;
use wire::{
    check_preamble, params_preamble, tag_name, WireMessage, PARAMS_MAGIC, TAG_BIT_ROUND,
    TAG_CHALLENGE, TAG_ERROR, TAG_KAPPA_CONFIRM, TAG_K_PUBLISH, TAG_RESPONSE, TAG_VERDICT,
    WIRE_VERSION,
};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("transport failure: {0}")]
    TransportFailure(#[from] std::io::Error),
    #[error("params digests differ between the two endpoints")]
    ParamsMismatch,
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionMode {
    Auth,
    AuthVariant,
    Ka,
    KaVariant,
    Bits(u32),
}

impl fmt::Display for SessionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionMode::Auth => write!(f, "auth"),
            SessionMode::AuthVariant => write!(f, "auth-variant"),
            SessionMode::Ka => write!(f, "ka"),
            SessionMode::KaVariant => write!(f, "ka-variant"),
            SessionMode::Bits(m) => write!(f, "bits({m})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub params: ProtocolParams,
    /// Selection outcome for anchor-based presets; honest endpoints need
    /// the anchors to sample their secrets.
    pub selection: Option<SelectionOutcome>,
    pub role: Role,
    pub seed: Option<u64>,
    pub mode: SessionMode,
}

impl SessionConfig {
    pub fn new(params: ProtocolParams, role: Role, seed: Option<u64>, mode: SessionMode) -> SessionConfig {
        SessionConfig {
            params,
            selection: None,
            role,
            seed,
            mode,
        }
    }

    pub fn with_selection(mut self, selection: Option<SelectionOutcome>) -> SessionConfig {
        self.selection = selection;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Clone, Debug)]
pub struct TranscriptRecord {
    pub direction: Direction,
    pub message: WireMessage,
}

/// Every frame that crossed the transport, in wire order, from this
/// endpoint's point of view. The handshake preamble is not a frame and is
/// not recorded.
#[derive(Clone, Debug, Default)]
pub struct Transcript {
    records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    /// Stable byte form: the frames in wire order, each serialized as its
    /// (tag, length, payload) record. Direction lives only in `records`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for rec in &self.records {
            out.extend_from_slice(&rec.message.encode());
        }
        out
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rec in &self.records {
            let dir = match rec.direction {
                Direction::Sent => "sent",
                Direction::Received => "recv",
            };
            writeln!(
                f,
                "{dir} {} ({} bytes)",
                tag_name(rec.message.tag),
                rec.message.payload.len()
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SessionOutcome {
    Auth(Verdict),
    SharedKey { digest: [u8; 32], confirmed: bool },
    Bits { bits: Vec<bool>, confirmed: bool },
}

impl fmt::Display for SessionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionOutcome::Auth(Verdict::Accept) => write!(f, "accept"),
            SessionOutcome::Auth(Verdict::Reject) => write!(f, "reject"),
            SessionOutcome::SharedKey { digest, confirmed } => write!(
                f,
                "shared key digest {} ({})",
                hex::encode(digest),
                if *confirmed { "confirmed" } else { "UNCONFIRMED" }
            ),
            SessionOutcome::Bits { bits, confirmed } => {
                let text: String = bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
                write!(
                    f,
                    "bits {text} ({})",
                    if *confirmed { "confirmed" } else { "UNCONFIRMED" }
                )
            }
        }
    }
}

pub fn kappa_digest(kappa: &PlatformElement) -> [u8; 32] {
    digest32(&kappa.canonical_bytes())
}

struct Channel<'a> {
    transport: &'a mut dyn Transport,
    transcript: Transcript,
}

impl<'a> Channel<'a> {
    fn send(&mut self, msg: WireMessage) -> Result<(), SessionError> {
        self.transport.send(&msg.encode())?;
        self.transcript.records.push(TranscriptRecord {
            direction: Direction::Sent,
            message: msg,
        });
        Ok(())
    }

    fn recv(&mut self) -> Result<WireMessage, SessionError> {
        let mut head = [0u8; 5];
        self.transport.recv_exact(&mut head)?;
        let mut framed = head.to_vec();
        let len = u32::from_be_bytes([head[1], head[2], head[3], head[4]]) as usize;
        framed.resize(5 + len, 0);
        if len > 0 {
            self.transport.recv_exact(&mut framed[5..])?;
        }
        let (msg, _) = WireMessage::decode(&framed)?;
        self.transcript.records.push(TranscriptRecord {
            direction: Direction::Received,
            message: msg.clone(),
        });
        Ok(msg)
    }

    fn expect(&mut self, tag: u8) -> Result<WireMessage, SessionError> {
        let msg = self.recv()?;
        if msg.tag == TAG_ERROR {
            return Err(SessionError::ProtocolViolation(format!(
                "peer reported: {}",
                String::from_utf8_lossy(&msg.payload)
            )));
        }
        if msg.tag != tag {
            return Err(SessionError::ProtocolViolation(format!(
                "expected {} but received {}",
                tag_name(tag),
                tag_name(msg.tag)
            )));
        }
        Ok(msg)
    }
}

fn session_rng(config: &SessionConfig) -> ChaCha12Rng {
    let mut rng = match config.seed {
        Some(seed) => ChaCha12Rng::seed_from_u64(seed),
        None => ChaCha12Rng::from_entropy(),
    };
    // Both endpoints share the seed; the stream separates their draws.
    rng.set_stream(match config.role {
        Role::A => 1,
        Role::B => 2,
    });
    rng
}

fn verdict_byte(v: Verdict) -> u8 {
    match v {
        Verdict::Accept => 1,
        Verdict::Reject => 0,
    }
}

fn parse_verdict(payload: &[u8]) -> Result<Verdict, SessionError> {
    match payload {
        [1] => Ok(Verdict::Accept),
        [0] => Ok(Verdict::Reject),
        _ => Err(SessionError::ProtocolViolation(
            "malformed verdict payload".into(),
        )),
    }
}

fn decode_element(payload: &[u8]) -> Result<PlatformElement, SessionError> {
    Ok(PlatformElement::from_bytes(payload)?)
}

/// Drives the configured protocol over the transport to completion.
/// Returns this endpoint's transcript together with the outcome. On a
/// local failure a best-effort error frame is sent before returning.
pub fn run_session(
    config: &SessionConfig,
    transport: &mut dyn Transport,
) -> Result<(Transcript, SessionOutcome), SessionError> {
    let digest = config.params.digest();
    transport.send(&params_preamble(&digest))?;
    let mut received = [0u8; 38];
    transport.recv_exact(&mut received)?;
    check_preamble(&received, &digest)?;

    let mut chan = Channel {
        transport,
        transcript: Transcript::default(),
    };
    let mut rng = session_rng(config);
    let result = match config.mode {
        SessionMode::Auth => run_auth(config, &mut chan, &mut rng, false),
        SessionMode::AuthVariant => run_auth(config, &mut chan, &mut rng, true),
        SessionMode::Ka => run_ka(config, &mut chan, &mut rng, false).map(|(o, _)| o),
        SessionMode::KaVariant => run_ka(config, &mut chan, &mut rng, true).map(|(o, _)| o),
        SessionMode::Bits(m) => run_bits(config, &mut chan, &mut rng, m as usize),
    };
    match result {
        Ok(outcome) => Ok((chan.transcript, outcome)),
        Err(err) => {
            if !matches!(err, SessionError::TransportFailure(_)) {
                let note = err.to_string().into_bytes();
                let _ = chan.send(WireMessage::new(TAG_ERROR, note));
            }
            Err(err)
        }
    }
}

fn run_auth(
    config: &SessionConfig,
    chan: &mut Channel<'_>,
    rng: &mut ChaCha12Rng,
    variant: bool,
) -> Result<SessionOutcome, SessionError> {
    let params = &config.params;
    match config.role {
        Role::A => {
            let secrets = sample_role_secrets(params, config.selection.as_ref(), Role::A, rng)?;
            let public = secrets.sandwich(&params.z)?;
            chan.send(WireMessage::new(TAG_K_PUBLISH, public.canonical_bytes()))?;
            let x = decode_element(&chan.expect(TAG_CHALLENGE)?.payload)?;
            let e = if variant {
                secrets.sandwich_inverse(&x)?
            } else {
                secrets.sandwich(&x)?
            };
            chan.send(WireMessage::new(TAG_RESPONSE, hash_element(params, &e)))?;
            let verdict = parse_verdict(&chan.expect(TAG_VERDICT)?.payload)?;
            Ok(SessionOutcome::Auth(verdict))
        }
        Role::B => {
            let public = decode_element(&chan.expect(TAG_K_PUBLISH)?.payload)?;
            let (x, state) = if variant {
                challenge_variant(params, &public, rng)?
            } else {
                challenge(params, rng)?
            };
            chan.send(WireMessage::new(TAG_CHALLENGE, x.canonical_bytes()))?;
            let w = chan.expect(TAG_RESPONSE)?.payload;
            let verdict = if variant {
                verify_variant(params, &state, &w)?
            } else {
                verify(params, &state, &public, &w)?
            };
            chan.send(WireMessage::new(TAG_VERDICT, vec![verdict_byte(verdict)]))?;
            Ok(SessionOutcome::Auth(verdict))
        }
    }
}

/// Key agreement flow; returns the outcome and the raw shared element so
/// the bit channel can reuse it.
fn run_ka(
    config: &SessionConfig,
    chan: &mut Channel<'_>,
    rng: &mut ChaCha12Rng,
    variant: bool,
) -> Result<(SessionOutcome, PlatformElement), SessionError> {
    let params = &config.params;
    let selection = config.selection.as_ref();
    let kappa = match (config.role, variant) {
        (Role::A, false) | (Role::A, true) => {
            let secrets = sample_role_secrets(params, selection, Role::A, rng)?;
            let k_a = secrets.sandwich(&params.z)?;
            chan.send(WireMessage::new(TAG_K_PUBLISH, k_a.canonical_bytes()))?;
            let k_b = decode_element(&chan.expect(TAG_K_PUBLISH)?.payload)?;
            if variant {
                secrets.sandwich_inverse(&k_b)?
            } else {
                secrets.sandwich(&k_b)?
            }
        }
        (Role::B, false) => {
            let k_a = decode_element(&chan.expect(TAG_K_PUBLISH)?.payload)?;
            let secrets = sample_role_secrets(params, selection, Role::B, rng)?;
            let k_b = secrets.sandwich(&params.z)?;
            chan.send(WireMessage::new(TAG_K_PUBLISH, k_b.canonical_bytes()))?;
            secrets.sandwich(&k_a)?
        }
        (Role::B, true) => {
            let k_a = decode_element(&chan.expect(TAG_K_PUBLISH)?.payload)?;
            let secrets = sample_role_secrets(params, selection, Role::B, rng)?;
            let k_b = secrets.sandwich(&k_a)?;
            chan.send(WireMessage::new(TAG_K_PUBLISH, k_b.canonical_bytes()))?;
            secrets.sandwich(&params.z)?
        }
    };
    let digest = kappa_digest(&kappa);
    let peer_digest = match config.role {
        Role::A => {
            chan.send(WireMessage::new(TAG_KAPPA_CONFIRM, digest.to_vec()))?;
            chan.expect(TAG_KAPPA_CONFIRM)?.payload
        }
        Role::B => {
            let peer = chan.expect(TAG_KAPPA_CONFIRM)?.payload;
            chan.send(WireMessage::new(TAG_KAPPA_CONFIRM, digest.to_vec()))?;
            peer
        }
    };
    let confirmed = peer_digest == digest;
    Ok((SessionOutcome::SharedKey { digest, confirmed }, kappa))
}

const RESAMPLE_CAP: usize = 1000;

/// Word-problem bit channel: key agreement first, then role A streams m
/// bit rounds and both sides cross-check digests of their bit strings.
fn run_bits(
    config: &SessionConfig,
    chan: &mut Channel<'_>,
    rng: &mut ChaCha12Rng,
    m: usize,
) -> Result<SessionOutcome, SessionError> {
    let (ka_outcome, kappa) = run_ka(config, chan, rng, false)?;
    match ka_outcome {
        SessionOutcome::SharedKey { confirmed: true, .. } => {}
        _ => {
            return Err(SessionError::ProtocolViolation(
                "key confirmation failed before the bit stream".into(),
            ))
        }
    }
    let kappa_word = kappa
        .as_braid()
        .ok_or(SessionError::Protocol(ProtocolError::NotABraidPlatform))?
        .clone();

    let mut bits = Vec::with_capacity(m);
    match config.role {
        Role::A => {
            for _ in 0..m {
                let bit = rng.gen_bool(0.5);
                let mut word = None;
                for _ in 0..RESAMPLE_CAP {
                    match encode_bit_round(&kappa_word, bit, rng) {
                        Ok(w) => {
                            word = Some(w);
                            break;
                        }
                        Err(ProtocolError::RoundAmbiguous) => continue,
                        Err(e) => return Err(e.into()),
                    }
                }
                let word = word.ok_or(SessionError::Protocol(ProtocolError::RoundAmbiguous))?;
                chan.send(WireMessage::new(TAG_BIT_ROUND, wire::encode_word(&word)))?;
                bits.push(bit);
            }
        }
        Role::B => {
            for _ in 0..m {
                let payload = chan.expect(TAG_BIT_ROUND)?.payload;
                let word = wire::decode_word(&payload)?;
                bits.push(decode_bit_round(&kappa_word, &word)?);
            }
        }
    }

    let bit_bytes: Vec<u8> = bits.iter().map(|b| *b as u8).collect();
    let digest = digest32(&bit_bytes);
    let peer_digest = match config.role {
        Role::A => {
            chan.send(WireMessage::new(TAG_KAPPA_CONFIRM, digest.to_vec()))?;
            chan.expect(TAG_KAPPA_CONFIRM)?.payload
        }
        Role::B => {
            let peer = chan.expect(TAG_KAPPA_CONFIRM)?.payload;
            chan.send(WireMessage::new(TAG_KAPPA_CONFIRM, digest.to_vec()))?;
            peer
        }
    };
    Ok(SessionOutcome::Bits {
        bits,
        confirmed: peer_digest == digest,
    })
}

type EndpointResult = Result<(Transcript, SessionOutcome), SessionError>;

/// Runs both endpoints of one session over an in-process pipe, role A on a
/// worker thread. Configs may differ only in role (and will fail the
/// handshake if their params differ).
pub fn run_pipe_session(
    config_a: &SessionConfig,
    config_b: &SessionConfig,
) -> (EndpointResult, EndpointResult) {
    let (mut ta, mut tb) = transport::PipeTransport::pair();
    let owned_a = config_a.clone();
    let handle = std::thread::spawn(move || run_session(&owned_a, &mut ta));
    let b_result = run_session(config_b, &mut tb);
    let a_result = match handle.join() {
        Ok(r) => r,
        Err(_) => Err(SessionError::ProtocolViolation(
            "endpoint thread panicked".into(),
        )),
    };
    (a_result, b_result)
}

/// Params files carry the magic, a format version byte, and the canonical
/// params serialization.
pub fn write_params_file(path: &Path, params: &ProtocolParams) -> Result<(), SessionError> {
    let mut out = Vec::new();
    out.extend_from_slice(PARAMS_MAGIC);
    out.push(WIRE_VERSION);
    out.extend_from_slice(&params.to_bytes());
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

pub fn read_params_file(path: &Path) -> Result<ProtocolParams, SessionError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 6 || &buf[..5] != PARAMS_MAGIC {
        return Err(SessionError::ProtocolViolation(
            "not a params file (bad magic)".into(),
        ));
    }
    if buf[5] != WIRE_VERSION {
        return Err(SessionError::ProtocolViolation(format!(
            "params file format version {} is not supported",
            buf[5]
        )));
    }
    Ok(ProtocolParams::from_bytes(&buf[6..])?)
}
