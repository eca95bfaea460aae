//! Length-prefixed message framing and the byte encodings that cross a
//! transport: framed protocol messages, the params-digest handshake
//! preamble, and the raw word encoding used by bit rounds.

use crate::braid::BraidWord;
use crate::bytes::{put_u16, put_u32, Reader};
use super::SessionError;

pub const TAG_CHALLENGE: u8 = 0x10;
pub const TAG_RESPONSE: u8 = 0x11;
pub const TAG_VERDICT: u8 = 0x12;
pub const TAG_K_PUBLISH: u8 = 0x20;
pub const TAG_KAPPA_CONFIRM: u8 = 0x21;
pub const TAG_BIT_ROUND: u8 = 0x30;
pub const TAG_ERROR: u8 = 0x7F;

pub const PARAMS_MAGIC: &[u8; 5] = b"NCSG1";
pub const WIRE_VERSION: u8 = 1;

/// Frames larger than this are treated as protocol violations rather than
/// allocation requests.
const MAX_PAYLOAD: usize = 1 << 24;

pub(crate) fn known_tag(tag: u8) -> bool {
    matches!(
        tag,
        TAG_CHALLENGE
            | TAG_RESPONSE
            | TAG_VERDICT
            | TAG_K_PUBLISH
            | TAG_KAPPA_CONFIRM
            | TAG_BIT_ROUND
            | TAG_ERROR
    )
}

pub(crate) fn tag_name(tag: u8) -> &'static str {
    match tag {
        TAG_CHALLENGE => "challenge",
        TAG_RESPONSE => "response",
        TAG_VERDICT => "verdict",
        TAG_K_PUBLISH => "K-publish",
        TAG_KAPPA_CONFIRM => "kappa-confirm",
        TAG_BIT_ROUND => "bit-round",
        TAG_ERROR => "error",
        _ => "unknown",
    }
}

/// One framed message: [tag: 1][length: u32 BE][payload].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireMessage {
    pub tag: u8,
    pub payload: Vec<u8>,
}

impl WireMessage {
    pub fn new(tag: u8, payload: Vec<u8>) -> WireMessage {
        WireMessage { tag, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.push(self.tag);
        put_u32(&mut out, self.payload.len() as u32);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Decodes one message from the front of `buf` and returns it with the
    /// number of bytes consumed. Unknown tags are rejected, never skipped.
    pub fn decode(buf: &[u8]) -> Result<(WireMessage, usize), SessionError> {
        if buf.len() < 5 {
            return Err(SessionError::ProtocolViolation(
                "truncated frame header".into(),
            ));
        }
        let tag = buf[0];
        if !known_tag(tag) {
            return Err(SessionError::ProtocolViolation(format!(
                "unknown message tag 0x{tag:02x}"
            )));
        }
        let len = u32::from_be_bytes([buf[1], buf[2], buf[3], buf[4]]) as usize;
        if len > MAX_PAYLOAD {
            return Err(SessionError::ProtocolViolation(format!(
                "declared payload of {len} bytes exceeds the frame limit"
            )));
        }
        if buf.len() < 5 + len {
            return Err(SessionError::ProtocolViolation(
                "truncated frame payload".into(),
            ));
        }
        Ok((
            WireMessage::new(tag, buf[5..5 + len].to_vec()),
            5 + len,
        ))
    }
}

/// Handshake preamble both endpoints send before any framed message:
/// magic, format version, and the 32-byte digest of the serialized params.
pub fn params_preamble(params_digest: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(PARAMS_MAGIC.len() + 1 + 32);
    out.extend_from_slice(PARAMS_MAGIC);
    out.push(WIRE_VERSION);
    out.extend_from_slice(params_digest);
    out
}

pub fn check_preamble(received: &[u8], expected_digest: &[u8; 32]) -> Result<(), SessionError> {
    if received.len() != PARAMS_MAGIC.len() + 1 + 32 || &received[..5] != PARAMS_MAGIC {
        return Err(SessionError::ProtocolViolation(
            "peer did not send the params preamble".into(),
        ));
    }
    if received[5] != WIRE_VERSION {
        return Err(SessionError::ProtocolViolation(format!(
            "peer speaks wire version {}, this endpoint speaks {}",
            received[5], WIRE_VERSION
        )));
    }
    if &received[6..] != expected_digest {
        return Err(SessionError::ParamsMismatch);
    }
    Ok(())
}

/// Raw word payload for bit rounds: [index: u16 BE][count: u32 BE][letters
/// as i16 BE]. Letters of a braid on at most 2^15 strands always fit.
pub fn encode_word(word: &BraidWord) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + 2 * word.len());
    put_u16(&mut out, word.index());
    put_u32(&mut out, word.len() as u32);
    for &letter in word.letters() {
        crate::bytes::put_i16(&mut out, letter as i16);
    }
    out
}

pub fn decode_word(buf: &[u8]) -> Result<BraidWord, SessionError> {
    let mut r = Reader::new(buf);
    let index = r.u16()?;
    let count = r.u32()? as usize;
    let mut letters = Vec::with_capacity(count);
    for _ in 0..count {
        letters.push(r.i16()? as i32);
    }
    if !r.is_done() {
        return Err(SessionError::ProtocolViolation(
            "trailing bytes after word payload".into(),
        ));
    }
    BraidWord::new(index, letters)
        .map_err(|e| SessionError::ProtocolViolation(format!("bad word payload: {e}")))
}
