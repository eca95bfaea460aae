//! Challenge-response authentication and key agreement built on the
//! decomposition problem: secrets are pairs (s1, s2) from published subsets,
//! public values are sandwich products s1 * z * s2, and completeness rests
//! on the cross-party commutation clauses checked in `conditions`.
//!
//! Every transmitted element is canonicalized first, so no factorization
//! detail of a secret product survives onto the wire.

use crate::algebra::{
    canonicalize, invert, multiply, pow, AlgebraError, Platform, PlatformElement, SubsetLabel,
    SubsetSpec, TAG_BRAID, TAG_MATRIX, TAG_PERMUTATION,
};
use crate::braid::{random_word, words_equal, BraidError, BraidWord};
use crate::bytes::{put_u16, put_u32, DecodeError, Reader};
use crate::conditions::{
    check_condition_a, check_condition_b, ConditionError, ConditionVariant, SelectionMethod,
    SelectionOutcome,
};
use rand::Rng;
use sha2::{Digest, Sha256};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("commutativity condition failed:\n{0}")]
    ConditionFailed(String),
    #[error("{0}")]
    Condition(#[from] ConditionError),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("a sampled random word collided with the shared key; resample")]
    RoundAmbiguous,
    #[error("bit exchange requires a braid platform")]
    NotABraidPlatform,
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HashMode {
    /// 256-bit digest of the length-prefixed canonical serialization.
    BitString,
    /// The canonical serialization itself stands in for the hash value.
    ElementIdentity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SecretMode {
    /// s1 and s2 are drawn independently from their subsets.
    Independent,
    /// s2 is forced to s1^-1, turning sandwich products into conjugates.
    InversePair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    A,
    B,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::A => write!(f, "A"),
            Role::B => write!(f, "B"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => write!(f, "accept"),
            Verdict::Reject => write!(f, "reject"),
        }
    }
}

pub fn digest32(data: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(data);
    h.finalize().into()
}

/// Full parameter set shared by both parties. `z_set` is the public pool z
/// was drawn from; it defaults to {z} and only feeds the condition clauses
/// that mention Z.
#[derive(Clone, Debug)]
pub struct ProtocolParams {
    pub platform: Platform,
    pub z: PlatformElement,
    pub z_set: SubsetSpec,
    pub l_a: SubsetSpec,
    pub r_a: SubsetSpec,
    pub l_b: SubsetSpec,
    pub r_b: SubsetSpec,
    pub condition_variant: ConditionVariant,
    pub selection_method: SelectionMethod,
    pub hash_mode: HashMode,
    pub secret_mode: SecretMode,
}

#[allow(clippy::too_many_arguments)]
impl ProtocolParams {
    /// Builds params and enforces the full commutativity condition for the
    /// declared variant; construction fails unless every clause holds.
    pub fn new(
        l_a: SubsetSpec,
        r_a: SubsetSpec,
        l_b: SubsetSpec,
        r_b: SubsetSpec,
        z: PlatformElement,
        condition_variant: ConditionVariant,
        selection_method: SelectionMethod,
        hash_mode: HashMode,
        secret_mode: SecretMode,
    ) -> Result<ProtocolParams, ProtocolError> {
        let params = ProtocolParams::new_unchecked(
            l_a,
            r_a,
            l_b,
            r_b,
            z,
            condition_variant,
            selection_method,
            hash_mode,
            secret_mode,
        )?;
        let report = match condition_variant {
            ConditionVariant::A => check_condition_a(&params)?,
            ConditionVariant::B => check_condition_b(&params)?,
        };
        if !report.all_hold {
            return Err(ProtocolError::ConditionFailed(report.to_string()));
        }
        Ok(params)
    }

    /// Builds params with platform-consistency checks only. Intended for
    /// parameter sets that deliberately skip some degeneracy-guard clauses;
    /// completeness still requires the two cross-party commutations.
    pub fn new_unchecked(
        l_a: SubsetSpec,
        r_a: SubsetSpec,
        l_b: SubsetSpec,
        r_b: SubsetSpec,
        z: PlatformElement,
        condition_variant: ConditionVariant,
        selection_method: SelectionMethod,
        hash_mode: HashMode,
        secret_mode: SecretMode,
    ) -> Result<ProtocolParams, ProtocolError> {
        let platform = z.platform();
        for (name, subset) in [("L_A", &l_a), ("R_A", &r_a), ("L_B", &l_b), ("R_B", &r_b)] {
            if subset.platform() != platform {
                return Err(ProtocolError::BadParams(format!(
                    "{name} lives on {} but z lives on {platform}",
                    subset.platform()
                )));
            }
        }
        if secret_mode == SecretMode::InversePair && !platform.has_inverses() {
            return Err(ProtocolError::BadParams(format!(
                "inverse-pair secrets need inverses, which {platform} lacks"
            )));
        }
        let z_set = SubsetSpec::singleton(z.clone(), SubsetLabel::Z);
        Ok(ProtocolParams {
            platform,
            z,
            z_set,
            l_a,
            r_a,
            l_b,
            r_b,
            condition_variant,
            selection_method,
            hash_mode,
            secret_mode,
        })
    }

    /// Adopts the subsets published by a selection method. The anchors in
    /// `outcome` stay outside the params; validation is the selection's own
    /// generator-vs-anchor commutation, since subsets standing for the whole
    /// platform cannot satisfy the subset-level condition clauses.
    pub fn from_selection(
        outcome: &SelectionOutcome,
        z: PlatformElement,
        hash_mode: HashMode,
        secret_mode: SecretMode,
    ) -> Result<ProtocolParams, ProtocolError> {
        outcome.validate()?;
        let platform = z.platform();
        if outcome.l_a.platform() != platform {
            return Err(ProtocolError::BadParams(
                "selection outcome and z disagree on the platform".into(),
            ));
        }
        let condition_variant = if z.is_identity() {
            ConditionVariant::B
        } else {
            ConditionVariant::A
        };
        Ok(ProtocolParams {
            platform,
            z,
            z_set: outcome.z_set.clone(),
            l_a: outcome.l_a.clone(),
            r_a: outcome.r_a.clone(),
            l_b: outcome.l_b.clone(),
            r_b: outcome.r_b.clone(),
            condition_variant,
            selection_method: outcome.method,
            hash_mode,
            secret_mode,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        put_platform(&mut buf, self.platform);
        put_element(&mut buf, &self.z);
        for subset in [&self.l_a, &self.r_a, &self.l_b, &self.r_b, &self.z_set] {
            put_subset(&mut buf, subset);
        }
        buf.push(match self.condition_variant {
            ConditionVariant::A => 0,
            ConditionVariant::B => 1,
        });
        buf.push(match self.selection_method {
            SelectionMethod::First => 1,
            SelectionMethod::Second => 2,
            SelectionMethod::Third => 3,
        });
        buf.push(match self.hash_mode {
            HashMode::BitString => 0,
            HashMode::ElementIdentity => 1,
        });
        buf.push(match self.secret_mode {
            SecretMode::Independent => 0,
            SecretMode::InversePair => 1,
        });
        buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<ProtocolParams, ProtocolError> {
        let mut r = Reader::new(buf);
        let platform = read_platform(&mut r)?;
        let z = read_element(&mut r)?;
        let l_a = read_subset(&mut r)?;
        let r_a = read_subset(&mut r)?;
        let l_b = read_subset(&mut r)?;
        let r_b = read_subset(&mut r)?;
        let z_set = read_subset(&mut r)?;
        let condition_variant = match r.u8()? {
            0 => ConditionVariant::A,
            1 => ConditionVariant::B,
            v => return Err(ProtocolError::BadParams(format!("bad variant byte {v}"))),
        };
        let selection_method = match r.u8()? {
            1 => SelectionMethod::First,
            2 => SelectionMethod::Second,
            3 => SelectionMethod::Third,
            v => return Err(ProtocolError::BadParams(format!("bad method byte {v}"))),
        };
        let hash_mode = match r.u8()? {
            0 => HashMode::BitString,
            1 => HashMode::ElementIdentity,
            v => return Err(ProtocolError::BadParams(format!("bad hash-mode byte {v}"))),
        };
        let secret_mode = match r.u8()? {
            0 => SecretMode::Independent,
            1 => SecretMode::InversePair,
            v => return Err(ProtocolError::BadParams(format!("bad secret-mode byte {v}"))),
        };
        if !r.is_done() {
            return Err(ProtocolError::BadParams("trailing bytes after params".into()));
        }
        for subset in [&l_a, &r_a, &l_b, &r_b, &z_set] {
            if subset.platform() != platform {
                return Err(ProtocolError::BadParams(
                    "decoded subset disagrees with the declared platform".into(),
                ));
            }
        }
        if z.platform() != platform {
            return Err(ProtocolError::BadParams(
                "decoded z disagrees with the declared platform".into(),
            ));
        }
        Ok(ProtocolParams {
            platform,
            z,
            z_set,
            l_a,
            r_a,
            l_b,
            r_b,
            condition_variant,
            selection_method,
            hash_mode,
            secret_mode,
        })
    }

    /// Digest both endpoints compare before speaking the protocol.
    pub fn digest(&self) -> [u8; 32] {
        digest32(&self.to_bytes())
    }
}

fn put_platform(buf: &mut Vec<u8>, platform: Platform) {
    match platform {
        Platform::Braid { index } => {
            buf.push(TAG_BRAID);
            put_u16(buf, index);
        }
        Platform::Permutation { degree } => {
            buf.push(TAG_PERMUTATION);
            put_u16(buf, degree);
        }
        Platform::MatrixModP { dim, modulus } => {
            buf.push(TAG_MATRIX);
            put_u16(buf, dim);
            put_u16(buf, modulus);
        }
    }
}

fn read_platform(r: &mut Reader<'_>) -> Result<Platform, ProtocolError> {
    let tag = r.u8()?;
    let platform = match tag {
        TAG_BRAID => Platform::braid(r.u16()?)?,
        TAG_PERMUTATION => Platform::permutation(r.u16()?)?,
        TAG_MATRIX => {
            let dim = r.u16()?;
            let modulus = r.u16()?;
            Platform::matrix_mod_p(dim, modulus)?
        }
        other => {
            return Err(ProtocolError::BadParams(format!(
                "unknown platform tag {other:#04x}"
            )))
        }
    };
    Ok(platform)
}

fn put_element(buf: &mut Vec<u8>, e: &PlatformElement) {
    let bytes = e.canonical_bytes();
    put_u32(buf, bytes.len() as u32);
    buf.extend_from_slice(&bytes);
}

fn read_element(r: &mut Reader<'_>) -> Result<PlatformElement, ProtocolError> {
    let len = r.u32()? as usize;
    let bytes = r.take(len)?;
    Ok(PlatformElement::from_bytes(bytes)?)
}

fn put_subset(buf: &mut Vec<u8>, subset: &SubsetSpec) {
    match subset.label() {
        SubsetLabel::LA => buf.push(1),
        SubsetLabel::RA => buf.push(2),
        SubsetLabel::LB => buf.push(3),
        SubsetLabel::RB => buf.push(4),
        SubsetLabel::Z => buf.push(5),
        SubsetLabel::Custom(name) => {
            buf.push(0);
            put_u16(buf, name.len() as u16);
            buf.extend_from_slice(name.as_bytes());
        }
    }
    let (min_len, max_len) = subset.sample_length_range();
    put_u16(buf, min_len);
    put_u16(buf, max_len);
    put_u16(buf, subset.generators().len() as u16);
    for g in subset.generators() {
        put_element(buf, g);
    }
}

fn read_subset(r: &mut Reader<'_>) -> Result<SubsetSpec, ProtocolError> {
    let label = match r.u8()? {
        1 => SubsetLabel::LA,
        2 => SubsetLabel::RA,
        3 => SubsetLabel::LB,
        4 => SubsetLabel::RB,
        5 => SubsetLabel::Z,
        0 => {
            let len = r.u16()? as usize;
            let raw = r.take(len)?;
            let name = String::from_utf8(raw.to_vec())
                .map_err(|_| ProtocolError::BadParams("label is not UTF-8".into()))?;
            SubsetLabel::Custom(name)
        }
        v => return Err(ProtocolError::BadParams(format!("bad label byte {v}"))),
    };
    let min_len = r.u16()?;
    let max_len = r.u16()?;
    let count = r.u16()? as usize;
    let mut generators = Vec::with_capacity(count);
    for _ in 0..count {
        generators.push(read_element(r)?);
    }
    Ok(SubsetSpec::new(generators, label, (min_len, max_len))?)
}

/// The configured hash over the length-prefixed canonical serialization.
pub fn hash_element(params: &ProtocolParams, e: &PlatformElement) -> Vec<u8> {
    let canonical = e.canonical_bytes();
    match params.hash_mode {
        HashMode::BitString => {
            let mut input = Vec::with_capacity(4 + canonical.len());
            put_u32(&mut input, canonical.len() as u32);
            input.extend_from_slice(&canonical);
            digest32(&input).to_vec()
        }
        HashMode::ElementIdentity => canonical,
    }
}

/// One party's secret sandwich pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SecretPair {
    first: PlatformElement,
    second: PlatformElement,
}

impl SecretPair {
    pub fn from_elements(
        params: &ProtocolParams,
        first: PlatformElement,
        second: PlatformElement,
    ) -> Result<SecretPair, ProtocolError> {
        if first.platform() != params.platform || second.platform() != params.platform {
            return Err(ProtocolError::BadParams(
                "secret pair does not live on the params platform".into(),
            ));
        }
        Ok(SecretPair { first, second })
    }

    pub fn sample<R: Rng>(
        params: &ProtocolParams,
        role: Role,
        rng: &mut R,
    ) -> Result<SecretPair, ProtocolError> {
        let (left, right) = match role {
            Role::A => (&params.l_a, &params.r_a),
            Role::B => (&params.l_b, &params.r_b),
        };
        let first = left.sample(rng);
        let second = match params.secret_mode {
            SecretMode::Independent => right.sample(rng),
            SecretMode::InversePair => invert(&first)?,
        };
        Ok(SecretPair { first, second })
    }

    pub fn first(&self) -> &PlatformElement {
        &self.first
    }

    pub fn second(&self) -> &PlatformElement {
        &self.second
    }

    /// Computes canonicalize(first * middle * second).
    pub fn sandwich(&self, middle: &PlatformElement) -> Result<PlatformElement, ProtocolError> {
        let left = multiply(&self.first, middle)?;
        Ok(canonicalize(&multiply(&left, &self.second)?))
    }

    /// Computes canonicalize(first^-1 * middle * second^-1).
    pub fn sandwich_inverse(
        &self,
        middle: &PlatformElement,
    ) -> Result<PlatformElement, ProtocolError> {
        let f = invert(&self.first)?;
        let s = invert(&self.second)?;
        let left = multiply(&f, middle)?;
        Ok(canonicalize(&multiply(&left, &s)?))
    }
}

/// Samples role secrets, routing through selection anchors when the params
/// came from a selection method. Anchor-based secrets are random powers of
/// the anchor, so they commute with everything published against it.
pub fn sample_role_secrets<R: Rng>(
    params: &ProtocolParams,
    selection: Option<&SelectionOutcome>,
    role: Role,
    rng: &mut R,
) -> Result<SecretPair, ProtocolError> {
    let anchor_power = |anchor: &PlatformElement, rng: &mut R| {
        let k = rng.gen_range(1..=4u64);
        pow(anchor, k)
    };
    match (params.selection_method, selection, role) {
        (SelectionMethod::Second, Some(outcome), Role::A) => {
            let first = anchor_power(&outcome.anchors()[0], rng);
            let second = anchor_power(&outcome.anchors()[1], rng);
            SecretPair::from_elements(params, first, second)
        }
        (SelectionMethod::Third, Some(outcome), Role::A) => {
            let first = anchor_power(&outcome.anchors()[0], rng);
            let second = params.r_a.sample(rng);
            SecretPair::from_elements(params, first, second)
        }
        (SelectionMethod::Third, Some(outcome), Role::B) => {
            let first = params.l_b.sample(rng);
            let second = anchor_power(&outcome.anchors()[1], rng);
            SecretPair::from_elements(params, first, second)
        }
        _ => SecretPair::sample(params, role, rng),
    }
}

/// A's long-term key: the secret pair and the published z' = a1 * z * a2.
#[derive(Clone, Debug)]
pub struct KeyPair {
    secrets: SecretPair,
    public: PlatformElement,
}

impl KeyPair {
    pub fn from_secrets(
        params: &ProtocolParams,
        secrets: SecretPair,
    ) -> Result<KeyPair, ProtocolError> {
        let public = secrets.sandwich(&params.z)?;
        Ok(KeyPair { secrets, public })
    }

    pub fn secrets(&self) -> &SecretPair {
        &self.secrets
    }

    pub fn public(&self) -> &PlatformElement {
        &self.public
    }
}

pub fn keygen<R: Rng>(params: &ProtocolParams, rng: &mut R) -> Result<KeyPair, ProtocolError> {
    let secrets = SecretPair::sample(params, Role::A, rng)?;
    KeyPair::from_secrets(params, secrets)
}

/// Keygen for the inverse-based protocol variant; both secrets must be
/// invertible, and non-invertible draws are rejected here rather than at
/// response time.
pub fn keygen_variant<R: Rng>(
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<KeyPair, ProtocolError> {
    let pair = keygen(params, rng)?;
    invert(pair.secrets.first())?;
    invert(pair.secrets.second())?;
    Ok(pair)
}

/// Verifier-side state retained between challenge and verdict.
#[derive(Clone, Debug)]
pub struct VerifierState {
    secrets: SecretPair,
}

impl VerifierState {
    pub fn new(secrets: SecretPair) -> VerifierState {
        VerifierState { secrets }
    }

    pub fn secrets(&self) -> &SecretPair {
        &self.secrets
    }
}

/// Draws verifier secrets and issues the challenge x = b1 * z * b2.
pub fn challenge<R: Rng>(
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<(PlatformElement, VerifierState), ProtocolError> {
    let secrets = SecretPair::sample(params, Role::B, rng)?;
    let x = secrets.sandwich(&params.z)?;
    Ok((x, VerifierState { secrets }))
}

pub fn challenge_with(
    params: &ProtocolParams,
    secrets: &SecretPair,
) -> Result<PlatformElement, ProtocolError> {
    secrets.sandwich(&params.z)
}

/// Variant challenge x = b1 * z' * b2, built on the published key instead
/// of z.
pub fn challenge_variant<R: Rng>(
    params: &ProtocolParams,
    public_key: &PlatformElement,
    rng: &mut R,
) -> Result<(PlatformElement, VerifierState), ProtocolError> {
    let secrets = SecretPair::sample(params, Role::B, rng)?;
    let x = secrets.sandwich(public_key)?;
    Ok((x, VerifierState { secrets }))
}

/// Prover response w = H(a1 * x * a2).
pub fn respond(
    params: &ProtocolParams,
    key: &KeyPair,
    x: &PlatformElement,
) -> Result<Vec<u8>, ProtocolError> {
    let e = key.secrets.sandwich(x)?;
    Ok(hash_element(params, &e))
}

/// Variant response w = H(a1^-1 * x * a2^-1).
pub fn respond_variant(
    params: &ProtocolParams,
    key: &KeyPair,
    x: &PlatformElement,
) -> Result<Vec<u8>, ProtocolError> {
    let e = key.secrets.sandwich_inverse(x)?;
    Ok(hash_element(params, &e))
}

/// Accepts iff w = H(b1 * z' * b2).
pub fn verify(
    params: &ProtocolParams,
    state: &VerifierState,
    public_key: &PlatformElement,
    w: &[u8],
) -> Result<Verdict, ProtocolError> {
    let expected = hash_element(params, &state.secrets.sandwich(public_key)?);
    Ok(if expected == w {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}

/// Variant acceptance: w = H(b1 * z * b2).
pub fn verify_variant(
    params: &ProtocolParams,
    state: &VerifierState,
    w: &[u8],
) -> Result<Verdict, ProtocolError> {
    let expected = hash_element(params, &state.secrets.sandwich(&params.z)?);
    Ok(if expected == w {
        Verdict::Accept
    } else {
        Verdict::Reject
    })
}

/// Draws role secrets and publishes K = s1 * z * s2.
pub fn ka_publish<R: Rng>(
    params: &ProtocolParams,
    role: Role,
    rng: &mut R,
) -> Result<(SecretPair, PlatformElement), ProtocolError> {
    let secrets = SecretPair::sample(params, role, rng)?;
    let k = secrets.sandwich(&params.z)?;
    Ok((secrets, k))
}

/// The agreed key κ = s1 * K_other * s2.
pub fn ka_shared(
    _params: &ProtocolParams,
    secrets: &SecretPair,
    other_public: &PlatformElement,
) -> Result<PlatformElement, ProtocolError> {
    secrets.sandwich(other_public)
}

pub fn ka_shared_hashed(
    params: &ProtocolParams,
    secrets: &SecretPair,
    other_public: &PlatformElement,
) -> Result<Vec<u8>, ProtocolError> {
    Ok(hash_element(params, &ka_shared(params, secrets, other_public)?))
}

/// Responder step of the inverse variant: publishes K_B = b1 * K_A * b2 and
/// already knows κ = b1 * z * b2.
pub fn ka_variant_respond<R: Rng>(
    params: &ProtocolParams,
    k_a: &PlatformElement,
    rng: &mut R,
) -> Result<(SecretPair, PlatformElement, PlatformElement), ProtocolError> {
    let secrets = SecretPair::sample(params, Role::B, rng)?;
    let k_b = secrets.sandwich(k_a)?;
    let kappa = secrets.sandwich(&params.z)?;
    Ok((secrets, k_b, kappa))
}

/// Initiator finish of the inverse variant: κ = a1^-1 * K_B * a2^-1.
pub fn ka_variant_finish(
    _params: &ProtocolParams,
    secrets: &SecretPair,
    k_b: &PlatformElement,
) -> Result<PlatformElement, ProtocolError> {
    secrets.sandwich_inverse(k_b)
}

/// Role-dispatched shared-key computation of the inverse variant: the
/// initiator unwraps the responder's K_B, the responder sandwiches z
/// directly. Both results agree on honest runs.
pub fn ka_variant_shared(
    params: &ProtocolParams,
    role: Role,
    secrets: &SecretPair,
    k_b: &PlatformElement,
) -> Result<PlatformElement, ProtocolError> {
    match role {
        Role::A => secrets.sandwich_inverse(k_b),
        Role::B => secrets.sandwich(&params.z),
    }
}

const BIT_ROUND_RESAMPLE_CAP: usize = 1000;

/// One transmission of the word-problem bit channel: an equal rewrite of κ
/// encodes 1, a fresh random word encodes 0. Random words that collide with
/// κ are reported so the caller can resample.
pub fn encode_bit_round<R: Rng>(
    kappa: &BraidWord,
    bit: bool,
    rng: &mut R,
) -> Result<BraidWord, ProtocolError> {
    if bit {
        let mut w = kappa.clone();
        let inserts = rng.gen_range(3..=8);
        for _ in 0..inserts {
            w = crate::braid::insert_relator(&w, rng);
        }
        Ok(w)
    } else {
        let len = kappa.len().max(4) + rng.gen_range(0..4);
        let w = random_word(kappa.index(), len, rng);
        if words_equal(&w, kappa)? {
            return Err(ProtocolError::RoundAmbiguous);
        }
        Ok(w)
    }
}

/// Receiver side: the bit is whether the received word equals κ.
pub fn decode_bit_round(kappa: &BraidWord, received: &BraidWord) -> Result<bool, ProtocolError> {
    Ok(words_equal(received, kappa)?)
}

/// Runs m rounds end to end with both parties' private κ words, resampling
/// ambiguous rounds. Returns (sent bits, decoded bits).
pub fn bit_exchange<R: Rng>(
    kappa_sender: &BraidWord,
    kappa_receiver: &BraidWord,
    m: usize,
    rng: &mut R,
) -> Result<(Vec<bool>, Vec<bool>), ProtocolError> {
    let mut sent = Vec::with_capacity(m);
    let mut received = Vec::with_capacity(m);
    for _ in 0..m {
        let bit = rng.gen::<bool>();
        let mut word = None;
        for _ in 0..BIT_ROUND_RESAMPLE_CAP {
            match encode_bit_round(kappa_sender, bit, rng) {
                Ok(w) => {
                    word = Some(w);
                    break;
                }
                Err(ProtocolError::RoundAmbiguous) => continue,
                Err(e) => return Err(e),
            }
        }
        let word = word.ok_or(ProtocolError::RoundAmbiguous)?;
        sent.push(bit);
        received.push(decode_bit_round(kappa_receiver, &word)?);
    }
    Ok((sent, received))
}

/// All elements the sampler of `spec` can produce, one entry per drawable
/// (length, factor choice) tuple. Multiplicities are kept on purpose so the
/// result mirrors the sampler's distribution.
pub fn sampler_support(spec: &SubsetSpec) -> Result<Vec<PlatformElement>, ProtocolError> {
    let gens = spec.generators();
    let (lo, hi) = spec.sample_length_range();
    let mut out = Vec::new();
    for len in lo..=hi {
        let tuples = (gens.len() as u64).saturating_pow(len as u32);
        let total = (out.len() as u64).saturating_add(tuples);
        if total > crate::algebra::MAX_ENUMERATION {
            return Err(ProtocolError::Algebra(AlgebraError::EnumerationTooLarge(
                total,
            )));
        }
        let mut idx = vec![0usize; len as usize];
        loop {
            let mut acc = spec.platform().identity();
            for &i in &idx {
                acc = multiply(&acc, &gens[i])?;
            }
            out.push(canonicalize(&acc));
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < gens.len() {
                    break;
                }
                idx[pos] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(out)
}

fn verifier_pair_support(
    params: &ProtocolParams,
) -> Result<Vec<(PlatformElement, PlatformElement)>, ProtocolError> {
    let firsts = sampler_support(&params.l_b)?;
    match params.secret_mode {
        SecretMode::Independent => {
            let seconds = sampler_support(&params.r_b)?;
            let mut pairs = Vec::with_capacity(firsts.len() * seconds.len());
            for b1 in &firsts {
                for b2 in &seconds {
                    pairs.push((b1.clone(), b2.clone()));
                }
            }
            Ok(pairs)
        }
        SecretMode::InversePair => firsts
            .into_iter()
            .map(|b1| {
                let b2 = invert(&b1)?;
                Ok((b1, b2))
            })
            .collect(),
    }
}

/// (challenge bytes, response hash) pairs, one per possible verifier draw.
pub type TranscriptPairs = Vec<(Vec<u8>, Vec<u8>)>;

/// Transcript multiset of honest interactions, one (x, w) per verifier draw.
pub fn honest_transcript_support(
    params: &ProtocolParams,
    key: &KeyPair,
) -> Result<TranscriptPairs, ProtocolError> {
    let mut out = Vec::new();
    for (b1, b2) in verifier_pair_support(params)? {
        let secrets = SecretPair::from_elements(params, b1, b2)?;
        let x = challenge_with(params, &secrets)?;
        let w = respond(params, key, &x)?;
        out.push((x.canonical_bytes(), w));
    }
    Ok(out)
}

/// Transcript multiset produced without the prover's secrets: the simulator
/// draws the same verifier pairs and emits (x, H(b1 * z' * b2)).
pub fn simulator_transcript_support(
    params: &ProtocolParams,
    public_key: &PlatformElement,
) -> Result<TranscriptPairs, ProtocolError> {
    let mut out = Vec::new();
    for (b1, b2) in verifier_pair_support(params)? {
        let secrets = SecretPair::from_elements(params, b1, b2)?;
        let x = challenge_with(params, &secrets)?;
        let w = hash_element(params, &secrets.sandwich(public_key)?);
        out.push((x.canonical_bytes(), w));
    }
    Ok(out)
}

pub mod presets {
    //! Named parameter sets. Braid families take the strand count from the
    //! preset name, e.g. `sdg-b8`.

    use super::*;
    use crate::braid::standard_commuting_subgroups;
    use crate::matrix::Matrix;
    use crate::perm::Perm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Params plus, for selection-based presets, the reproducible selection
    /// outcome whose anchors the honest prover needs.
    #[derive(Clone, Debug)]
    pub struct PresetBundle {
        pub name: String,
        pub params: ProtocolParams,
        pub selection: Option<SelectionOutcome>,
    }

    const SELECTION_PRESET_SEED: u64 = 0x6e63_7367;

    fn perm_elt(degree: usize, cycles: &[&[usize]]) -> PlatformElement {
        PlatformElement::permutation(
            Perm::from_cycles(degree, cycles).expect("preset cycles are valid"),
        )
    }

    fn perm_subset(
        degree: usize,
        cycles: &[&[usize]],
        label: SubsetLabel,
        range: (u16, u16),
    ) -> SubsetSpec {
        SubsetSpec::new(vec![perm_elt(degree, cycles)], label, range)
            .expect("preset subset is valid")
    }

    fn mat_elt(modulus: u16, rows: &[&[u16]]) -> PlatformElement {
        PlatformElement::matrix(Matrix::from_rows(modulus, rows).expect("preset matrix is valid"))
            .expect("preset modulus is prime")
    }

    fn mat_subset(modulus: u16, rows: &[&[u16]], label: SubsetLabel) -> SubsetSpec {
        SubsetSpec::new(vec![mat_elt(modulus, rows)], label, (1, 3))
            .expect("preset subset is valid")
    }

    /// S_6 with single-transposition subsets and a non-identity z; all eight
    /// clauses of the z != e condition hold.
    pub fn perm6() -> Result<ProtocolParams, ProtocolError> {
        ProtocolParams::new(
            perm_subset(6, &[&[1, 2]], SubsetLabel::LA, (1, 3)),
            perm_subset(6, &[&[1, 5]], SubsetLabel::RA, (1, 3)),
            perm_subset(6, &[&[3, 4]], SubsetLabel::LB, (1, 3)),
            perm_subset(6, &[&[3, 6]], SubsetLabel::RB, (1, 3)),
            perm_elt(6, &[&[2, 4], &[5, 6]]),
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
    }

    /// 2x2 matrices over F_3. The paired subsets share eigenstructure, so
    /// they commute across parties but not within one.
    pub fn matrix_2_3() -> Result<ProtocolParams, ProtocolError> {
        ProtocolParams::new(
            mat_subset(3, &[&[1, 1], &[0, 1]], SubsetLabel::LA),
            mat_subset(3, &[&[1, 0], &[1, 1]], SubsetLabel::RA),
            mat_subset(3, &[&[2, 1], &[0, 2]], SubsetLabel::LB),
            mat_subset(3, &[&[2, 0], &[1, 2]], SubsetLabel::RB),
            mat_elt(3, &[&[0, 1], &[1, 0]]),
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
    }

    fn braid_family(
        n: u16,
        swap_b_sides: bool,
        secret_mode: SecretMode,
        strict: bool,
    ) -> Result<ProtocolParams, ProtocolError> {
        let (lower, upper) = standard_commuting_subgroups(n)?;
        let z = PlatformElement::braid_word(
            n,
            &[(n / 2) as i32 - 1, (n / 2) as i32, (n / 2) as i32 + 1],
        )?;
        let l_a = lower.clone().relabeled(SubsetLabel::LA);
        let r_a = if swap_b_sides {
            upper.clone().relabeled(SubsetLabel::RA)
        } else {
            lower.clone().relabeled(SubsetLabel::RA)
        };
        let l_b = upper.clone().relabeled(SubsetLabel::LB);
        let r_b = if swap_b_sides {
            lower.relabeled(SubsetLabel::RB)
        } else {
            upper.relabeled(SubsetLabel::RB)
        };
        let build = if strict {
            ProtocolParams::new
        } else {
            ProtocolParams::new_unchecked
        };
        build(
            l_a,
            r_a,
            l_b,
            r_b,
            z,
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            secret_mode,
        )
    }

    /// Conjugacy-style authentication on B_n: secrets are (s, s^-1) pairs
    /// over the low/high commuting subgroups. Needs n >= 6 so the
    /// within-party non-commutation clauses hold.
    pub fn sdg(n: u16) -> Result<ProtocolParams, ProtocolError> {
        braid_family(n, false, SecretMode::InversePair, true)
    }

    /// Key agreement on B_n with independent sandwich secrets.
    pub fn cklhc(n: u16) -> Result<ProtocolParams, ProtocolError> {
        braid_family(n, false, SecretMode::Independent, true)
    }

    /// Key agreement on B_n with conjugating (s, s^-1) secrets.
    pub fn klchkp(n: u16) -> Result<ProtocolParams, ProtocolError> {
        braid_family(n, false, SecretMode::InversePair, true)
    }

    /// The L_A = R_B, L_B = R_A layout. Its within-party subsets commute,
    /// which skips two degeneracy-guard clauses, so this preset bypasses
    /// strict validation; the completeness clauses still hold.
    pub fn shpilrain(n: u16) -> Result<ProtocolParams, ProtocolError> {
        braid_family(n, true, SecretMode::Independent, false)
    }

    /// Power subsets in S_6 with z = e: both parties sandwich with powers
    /// of a fixed 6-cycle on the left and a fixed transposition on the
    /// right. All six z = e clauses hold.
    pub fn stickel() -> Result<ProtocolParams, ProtocolError> {
        let a = perm_subset(6, &[&[1, 2, 3, 4, 5, 6]], SubsetLabel::LA, (1, 5));
        let b = perm_subset(6, &[&[1, 2]], SubsetLabel::RA, (1, 5));
        ProtocolParams::new(
            a.clone(),
            b.clone(),
            a.relabeled(SubsetLabel::LB),
            b.relabeled(SubsetLabel::RB),
            Platform::permutation(6)?.identity(),
            ConditionVariant::B,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
    }

    /// Minimal B_5 params for the word-problem bit channel. L_A = R_A is a
    /// single generator, which deliberately fails one degeneracy-guard
    /// clause, so validation is skipped; the channel only needs the
    /// cross-party commutations.
    pub fn bits_b5() -> Result<ProtocolParams, ProtocolError> {
        let one = |letters: &[i32], label| {
            SubsetSpec::new(
                letters
                    .iter()
                    .map(|&l| PlatformElement::braid_word(5, &[l]).expect("valid letter"))
                    .collect(),
                label,
                (1, 4),
            )
            .expect("preset subset is valid")
        };
        ProtocolParams::new_unchecked(
            one(&[1], SubsetLabel::LA),
            one(&[1], SubsetLabel::RA),
            one(&[3, 4], SubsetLabel::LB),
            one(&[3, 4], SubsetLabel::RB),
            PlatformElement::braid_word(5, &[2])?,
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
    }

    fn selection_preset(
        name: &str,
        platform: Platform,
    ) -> Result<PresetBundle, ProtocolError> {
        let mut rng = ChaCha12Rng::seed_from_u64(SELECTION_PRESET_SEED);
        let outcome = crate::conditions::select_method2(platform, &mut rng)?;
        let mut z = outcome.z_set.sample(&mut rng);
        while z.is_identity() {
            z = outcome.z_set.sample(&mut rng);
        }
        let params = ProtocolParams::from_selection(
            &outcome,
            z,
            HashMode::BitString,
            SecretMode::Independent,
        )?;
        Ok(PresetBundle {
            name: name.to_string(),
            params,
            selection: Some(outcome),
        })
    }

    /// S_6 parameters built by the centralizer-publishing selection method
    /// from a fixed seed, so both endpoints and tests reproduce the same
    /// anchors.
    pub fn perm6_method2() -> Result<PresetBundle, ProtocolError> {
        selection_preset("perm6-method2", Platform::permutation(6)?)
    }

    /// Matrix analogue of `perm6_method2`.
    pub fn matrix_2_3_method2() -> Result<PresetBundle, ProtocolError> {
        selection_preset("matrix-2-3-method2", Platform::matrix_mod_p(2, 3)?)
    }

    pub fn catalog() -> Vec<(&'static str, &'static str)> {
        vec![
            ("perm6", "S_6, single-transposition subsets, z != e"),
            ("matrix-2-3", "2x2 matrices mod 3, triangular subsets"),
            ("sdg-b<N>", "B_N conjugacy authentication, inverse-pair secrets (N >= 6)"),
            ("cklhc-b<N>", "B_N key agreement, independent secrets (N >= 6)"),
            ("klchkp-b<N>", "B_N key agreement, inverse-pair secrets (N >= 6)"),
            ("shpilrain-b<N>", "B_N with L_A = R_B, L_B = R_A; skips degeneracy guards (N >= 5)"),
            ("stickel", "S_6 power subsets with z = e"),
            ("bits-b5", "B_5 params for the m-bit word-problem channel"),
            ("perm6-method2", "S_6 via centralizer selection, fixed seed"),
            ("matrix-2-3-method2", "2x2 mod 3 via centralizer selection, fixed seed"),
        ]
    }

    fn braid_strands(name: &str, prefix: &str) -> Option<u16> {
        name.strip_prefix(prefix)?.parse().ok()
    }

    pub fn load(name: &str) -> Result<PresetBundle, ProtocolError> {
        let simple = |params: Result<ProtocolParams, ProtocolError>| {
            params.map(|params| PresetBundle {
                name: name.to_string(),
                params,
                selection: None,
            })
        };
        match name {
            "perm6" => simple(perm6()),
            "matrix-2-3" => simple(matrix_2_3()),
            "stickel" => simple(stickel()),
            "bits-b5" => simple(bits_b5()),
            "perm6-method2" => perm6_method2(),
            "matrix-2-3-method2" => matrix_2_3_method2(),
            _ => {
                if let Some(n) = braid_strands(name, "sdg-b") {
                    simple(sdg(n))
                } else if let Some(n) = braid_strands(name, "cklhc-b") {
                    simple(cklhc(n))
                } else if let Some(n) = braid_strands(name, "klchkp-b") {
                    simple(klchkp(n))
                } else if let Some(n) = braid_strands(name, "shpilrain-b") {
                    simple(shpilrain(n))
                } else {
                    Err(ProtocolError::UnknownPreset(name.to_string()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::equal;
    use crate::conditions::select_method3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn identity_params() -> ProtocolParams {
        // Single-identity subsets force every secret to the identity.
        let platform = Platform::permutation(4).unwrap();
        let id = platform.identity();
        let sub = |label| SubsetSpec::singleton(id.clone(), label);
        let z = PlatformElement::permutation(crate::perm::Perm::from_cycles(4, &[&[1, 2, 3]]).unwrap());
        ProtocolParams::new_unchecked(
            sub(SubsetLabel::LA),
            sub(SubsetLabel::RA),
            sub(SubsetLabel::LB),
            sub(SubsetLabel::RB),
            z,
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
        .unwrap()
    }

    #[test]
    fn identity_secrets_publish_z_itself() {
        let params = identity_params();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let key = keygen(&params, &mut rng).unwrap();
        assert!(equal(key.public(), &params.z).unwrap());
        let (x, state) = challenge(&params, &mut rng).unwrap();
        assert!(equal(&x, &params.z).unwrap());
        let w = respond(&params, &key, &x).unwrap();
        assert_eq!(w, hash_element(&params, &canonicalize(&params.z)));
        assert_eq!(verify(&params, &state, key.public(), &w).unwrap(), Verdict::Accept);
    }

    fn honest_auth_accepts(params: &ProtocolParams, seeds: std::ops::Range<u64>) {
        for seed in seeds {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let key = keygen(params, &mut rng).unwrap();
            let (x, state) = challenge(params, &mut rng).unwrap();
            let w = respond(params, &key, &x).unwrap();
            assert_eq!(
                verify(params, &state, key.public(), &w).unwrap(),
                Verdict::Accept,
                "seed {seed}"
            );
        }
    }

    fn honest_variant_accepts(params: &ProtocolParams, seeds: std::ops::Range<u64>) {
        for seed in seeds {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let key = keygen_variant(params, &mut rng).unwrap();
            let (x, state) = challenge_variant(params, key.public(), &mut rng).unwrap();
            let w = respond_variant(params, &key, &x).unwrap();
            assert_eq!(
                verify_variant(params, &state, &w).unwrap(),
                Verdict::Accept,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn honest_runs_accept_across_presets() {
        honest_auth_accepts(&presets::perm6().unwrap(), 0..20);
        honest_auth_accepts(&presets::matrix_2_3().unwrap(), 0..20);
        honest_auth_accepts(&presets::sdg(6).unwrap(), 0..10);
        honest_auth_accepts(&presets::stickel().unwrap(), 0..20);
    }

    #[test]
    fn honest_variant_runs_accept() {
        honest_variant_accepts(&presets::perm6().unwrap(), 0..20);
        honest_variant_accepts(&presets::matrix_2_3().unwrap(), 0..20);
        honest_variant_accepts(&presets::sdg(6).unwrap(), 0..10);
        honest_variant_accepts(&presets::stickel().unwrap(), 0..20);
    }

    #[test]
    fn tampered_response_rejects() {
        let params = presets::perm6().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let key = keygen(&params, &mut rng).unwrap();
        let (x, state) = challenge(&params, &mut rng).unwrap();
        let mut w = respond(&params, &key, &x).unwrap();
        w[0] ^= 0x80;
        assert_eq!(verify(&params, &state, key.public(), &w).unwrap(), Verdict::Reject);
    }

    #[test]
    fn unrelated_key_rejects() {
        let params = presets::perm6().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let honest = keygen(&params, &mut rng).unwrap();
        // An imposter with its own unrelated public value.
        let imposter_secrets = SecretPair::from_elements(
            &params,
            PlatformElement::permutation(crate::perm::Perm::from_cycles(6, &[&[1, 3, 5]]).unwrap()),
            PlatformElement::permutation(crate::perm::Perm::from_cycles(6, &[&[2, 6]]).unwrap()),
        )
        .unwrap();
        let (x, state) = challenge(&params, &mut rng).unwrap();
        let w = hash_element(&params, &imposter_secrets.sandwich(&x).unwrap());
        let expected = hash_element(&params, &state.secrets().sandwich(honest.public()).unwrap());
        assert_ne!(w, expected, "imposter accidentally matched; pick another seed");
        assert_eq!(verify(&params, &state, honest.public(), &w).unwrap(), Verdict::Reject);
    }

    #[test]
    fn broken_commutation_breaks_completeness() {
        // Adjacent braid generators on both sides: the cross-party clauses
        // fail, so some honest run must reject.
        let gen_subset = |letter: i32, label| {
            SubsetSpec::new(
                vec![PlatformElement::braid_word(4, &[letter]).unwrap()],
                label,
                (1, 3),
            )
            .unwrap()
        };
        let params = ProtocolParams::new_unchecked(
            gen_subset(1, SubsetLabel::LA),
            gen_subset(2, SubsetLabel::RA),
            gen_subset(2, SubsetLabel::LB),
            gen_subset(3, SubsetLabel::RB),
            PlatformElement::braid_word(4, &[1, 2, 3]).unwrap(),
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
        .unwrap();
        let mut any_reject = false;
        for seed in 0..30 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let key = keygen(&params, &mut rng).unwrap();
            let (x, state) = challenge(&params, &mut rng).unwrap();
            let w = respond(&params, &key, &x).unwrap();
            if verify(&params, &state, key.public(), &w).unwrap() == Verdict::Reject {
                any_reject = true;
                break;
            }
        }
        assert!(any_reject, "non-commuting subsets still always accepted");
    }

    #[test]
    fn strict_construction_rejects_failing_conditions() {
        // The swapped-sides layout makes [L_A, R_A] = 1, so strict params
        // construction must fail even though completeness would hold.
        let (lower, upper) = crate::braid::standard_commuting_subgroups(6).unwrap();
        let err = ProtocolParams::new(
            lower.clone().relabeled(SubsetLabel::LA),
            upper.clone().relabeled(SubsetLabel::RA),
            upper.relabeled(SubsetLabel::LB),
            lower.relabeled(SubsetLabel::RB),
            PlatformElement::braid_word(6, &[2, 3, 4]).unwrap(),
            ConditionVariant::A,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::Independent,
        )
        .unwrap_err();
        assert!(matches!(err, ProtocolError::ConditionFailed(_)));
    }

    #[test]
    fn ka_agrees_across_presets() {
        for params in [
            presets::perm6().unwrap(),
            presets::matrix_2_3().unwrap(),
            presets::cklhc(6).unwrap(),
            presets::klchkp(6).unwrap(),
        ] {
            for seed in 0..10 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
                let (sb, kb) = ka_publish(&params, Role::B, &mut rng).unwrap();
                let kappa_a = ka_shared(&params, &sa, &kb).unwrap();
                let kappa_b = ka_shared(&params, &sb, &ka).unwrap();
                assert!(equal(&kappa_a, &kappa_b).unwrap(), "seed {seed}");
                assert_eq!(
                    ka_shared_hashed(&params, &sa, &kb).unwrap(),
                    ka_shared_hashed(&params, &sb, &ka).unwrap()
                );
            }
        }
    }

    #[test]
    fn conjugating_ka_key_has_the_nested_conjugate_shape() {
        let params = presets::klchkp(6).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
        let (sb, kb) = ka_publish(&params, Role::B, &mut rng).unwrap();
        let kappa = ka_shared(&params, &sa, &kb).unwrap();
        // a1 b1 z b1^-1 a1^-1, composed directly from the secrets.
        let a1 = sa.first();
        let b1 = sb.first();
        let mut expected = multiply(a1, b1).unwrap();
        expected = multiply(&expected, &params.z).unwrap();
        expected = multiply(&expected, &invert(b1).unwrap()).unwrap();
        expected = multiply(&expected, &invert(a1).unwrap()).unwrap();
        assert!(equal(&kappa, &expected).unwrap());
        assert!(equal(&kappa, &ka_shared(&params, &sb, &ka).unwrap()).unwrap());
    }

    #[test]
    fn ka_variant_agrees_and_stickel_key_is_a_power_product() {
        let params = presets::stickel().unwrap();
        for seed in 0..10 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
            let (sb, kb, kappa_b) = ka_variant_respond(&params, &ka, &mut rng).unwrap();
            let kappa_a = ka_variant_finish(&params, &sa, &kb).unwrap();
            assert!(equal(&kappa_a, &kappa_b).unwrap(), "seed {seed}");
            // κ = a^v b^w where the responder's secrets are the powers.
            let a = params.l_b.generators()[0].clone();
            let b = params.r_b.generators()[0].clone();
            let log = |base: &PlatformElement, target: &PlatformElement| {
                let mut acc = base.platform().identity();
                for k in 0..8u64 {
                    if equal(&acc, target).unwrap() {
                        return k;
                    }
                    acc = multiply(&acc, base).unwrap();
                }
                panic!("target is not a small power of the base");
            };
            let v = log(&a, sb.first());
            let w = log(&b, sb.second());
            let expected = multiply(&pow(&a, v), &pow(&b, w)).unwrap();
            assert!(equal(&kappa_a, &expected).unwrap());
        }
    }

    #[test]
    fn ka_variant_agrees_on_nonidentity_z() {
        for params in [presets::perm6().unwrap(), presets::matrix_2_3().unwrap()] {
            for seed in 0..10 {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
                let (_, kb, kappa_b) = ka_variant_respond(&params, &ka, &mut rng).unwrap();
                let kappa_a = ka_variant_finish(&params, &sa, &kb).unwrap();
                assert!(equal(&kappa_a, &kappa_b).unwrap(), "seed {seed}");
            }
        }
    }

    #[test]
    fn ka_variant_shared_matches_both_role_computations() {
        let params = presets::matrix_2_3().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
        let (sb, kb, kappa_b) = ka_variant_respond(&params, &ka, &mut rng).unwrap();
        let via_a = ka_variant_shared(&params, Role::A, &sa, &kb).unwrap();
        let via_b = ka_variant_shared(&params, Role::B, &sb, &kb).unwrap();
        assert!(equal(&via_a, &kappa_b).unwrap());
        assert!(equal(&via_b, &kappa_b).unwrap());
    }

    #[test]
    fn conjugate_message_shapes_under_inverse_pair_secrets() {
        let params = presets::sdg(6).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let key = keygen(&params, &mut rng).unwrap();
        // z' = a1 z a1^-1, so z' a1 = a1 z.
        assert!(equal(
            &multiply(key.public(), key.secrets().first()).unwrap(),
            &multiply(key.secrets().first(), &params.z).unwrap()
        )
        .unwrap());
        let (x, state) = challenge(&params, &mut rng).unwrap();
        assert!(equal(
            &multiply(&x, state.secrets().first()).unwrap(),
            &multiply(state.secrets().first(), &params.z).unwrap()
        )
        .unwrap());
    }

    #[test]
    fn rewriting_a_braid_challenge_does_not_change_the_response() {
        let params = presets::cklhc(6).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let key = keygen(&params, &mut rng).unwrap();
        let (x, state) = challenge(&params, &mut rng).unwrap();
        let rewritten = PlatformElement::braid(crate::braid::insert_relator(
            x.as_braid().unwrap(),
            &mut rng,
        ));
        let w1 = respond(&params, &key, &x).unwrap();
        let w2 = respond(&params, &key, &rewritten).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(verify(&params, &state, key.public(), &w2).unwrap(), Verdict::Accept);
    }

    #[test]
    fn element_identity_hash_mode_runs_and_exposes_canonical_bytes() {
        let mut params = presets::perm6().unwrap();
        params.hash_mode = HashMode::ElementIdentity;
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let key = keygen(&params, &mut rng).unwrap();
        let (x, state) = challenge(&params, &mut rng).unwrap();
        let w = respond(&params, &key, &x).unwrap();
        // The response is itself a canonical serialization.
        assert!(PlatformElement::from_bytes(&w).is_ok());
        assert_eq!(verify(&params, &state, key.public(), &w).unwrap(), Verdict::Accept);

        params.hash_mode = HashMode::BitString;
        let w = respond(&params, &key, &x).unwrap();
        assert_eq!(w.len(), 32);
    }

    #[test]
    fn keygen_is_deterministic_per_seed() {
        let params = presets::perm6().unwrap();
        let k1 = keygen(&params, &mut ChaCha12Rng::seed_from_u64(42)).unwrap();
        let k2 = keygen(&params, &mut ChaCha12Rng::seed_from_u64(42)).unwrap();
        assert!(equal(k1.public(), k2.public()).unwrap());
        assert_eq!(k1.secrets(), k2.secrets());
    }

    #[test]
    fn params_serialization_round_trips() {
        for name in [
            "perm6",
            "matrix-2-3",
            "sdg-b6",
            "cklhc-b7",
            "klchkp-b6",
            "shpilrain-b5",
            "stickel",
            "bits-b5",
            "perm6-method2",
            "matrix-2-3-method2",
        ] {
            let bundle = presets::load(name).unwrap();
            let bytes = bundle.params.to_bytes();
            let back = ProtocolParams::from_bytes(&bytes).unwrap();
            assert_eq!(back.to_bytes(), bytes, "{name}");
            assert_eq!(back.digest(), bundle.params.digest(), "{name}");
        }
        assert!(ProtocolParams::from_bytes(&[0xff, 0x00, 0x01]).is_err());
        assert!(matches!(
            presets::load("nope"),
            Err(ProtocolError::UnknownPreset(_))
        ));
    }

    #[test]
    fn method2_params_run_honestly_with_anchor_secrets() {
        let bundle = presets::perm6_method2().unwrap();
        let params = &bundle.params;
        let selection = bundle.selection.as_ref().unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let secrets = sample_role_secrets(params, Some(selection), Role::A, &mut rng).unwrap();
            let key = KeyPair::from_secrets(params, secrets).unwrap();
            let (x, state) = challenge(params, &mut rng).unwrap();
            let w = respond(params, &key, &x).unwrap();
            assert_eq!(
                verify(params, &state, key.public(), &w).unwrap(),
                Verdict::Accept,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn method3_params_run_honestly_with_split_anchors() {
        let platform = Platform::permutation(5).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let outcome = select_method3(platform, &mut rng).unwrap();
            let mut z = outcome.z_set.sample(&mut rng);
            while z.is_identity() {
                z = outcome.z_set.sample(&mut rng);
            }
            let params = ProtocolParams::from_selection(
                &outcome,
                z,
                HashMode::BitString,
                SecretMode::Independent,
            )
            .unwrap();
            let a = sample_role_secrets(&params, Some(&outcome), Role::A, &mut rng).unwrap();
            let b = sample_role_secrets(&params, Some(&outcome), Role::B, &mut rng).unwrap();
            let key = KeyPair::from_secrets(&params, a).unwrap();
            let x = challenge_with(&params, &b).unwrap();
            let state = VerifierState::new(b);
            let w = respond(&params, &key, &x).unwrap();
            assert_eq!(
                verify(&params, &state, key.public(), &w).unwrap(),
                Verdict::Accept,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn method2_selection_presets_are_reproducible() {
        let b1 = presets::perm6_method2().unwrap();
        let b2 = presets::perm6_method2().unwrap();
        assert_eq!(b1.params.digest(), b2.params.digest());
        assert!(!b1.params.z.is_identity());
        let m = presets::matrix_2_3_method2().unwrap();
        assert_eq!(m.params.selection_method, SelectionMethod::Second);
    }

    #[test]
    fn bit_rounds_encode_and_decode() {
        let params = presets::bits_b5().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let (sa, ka) = ka_publish(&params, Role::A, &mut rng).unwrap();
        let (sb, kb) = ka_publish(&params, Role::B, &mut rng).unwrap();
        let kappa_a = ka_shared(&params, &sa, &kb).unwrap();
        let kappa_b = ka_shared(&params, &sb, &ka).unwrap();
        let wa = kappa_a.as_braid().unwrap();
        let wb = kappa_b.as_braid().unwrap();

        let r1 = encode_bit_round(wa, true, &mut rng).unwrap();
        assert!(decode_bit_round(wb, &r1).unwrap());
        // The rewrite must differ syntactically while staying equal.
        assert_ne!(r1.letters(), wa.letters());

        let r0 = encode_bit_round(wa, false, &mut rng).unwrap();
        assert!(!decode_bit_round(wb, &r0).unwrap());

        let (sent, got) = bit_exchange(wa, wb, 16, &mut rng).unwrap();
        assert_eq!(sent.len(), 16);
        assert_eq!(sent, got);

        let (sent, got) = bit_exchange(wa, wb, 0, &mut rng).unwrap();
        assert!(sent.is_empty() && got.is_empty());
    }

    #[test]
    fn transcript_multisets_match_the_simulator() {
        let params = presets::perm6().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let key = keygen(&params, &mut rng).unwrap();
        let mut honest = honest_transcript_support(&params, &key).unwrap();
        let mut simulated = simulator_transcript_support(&params, key.public()).unwrap();
        assert!(!honest.is_empty());
        honest.sort();
        simulated.sort();
        assert_eq!(honest, simulated);
    }

    #[test]
    fn inverse_pair_mode_is_rejected_without_inverses() {
        let platform = Platform::matrix_mod_p(2, 3).unwrap();
        let id = platform.identity();
        let sub = |label| SubsetSpec::singleton(id.clone(), label);
        let err = ProtocolParams::new_unchecked(
            sub(SubsetLabel::LA),
            sub(SubsetLabel::RA),
            sub(SubsetLabel::LB),
            sub(SubsetLabel::RB),
            id,
            ConditionVariant::B,
            SelectionMethod::First,
            HashMode::BitString,
            SecretMode::InversePair,
        )
        .unwrap_err();
        assert!(matches!(err, ProtocolError::BadParams(_)));
    }
}
