//! Pluggable semigroup platforms and the element operations every other
//! layer is written against.
//!
//! A platform fixes the carrier: braid groups (infinite, with inverses and a
//! normal form), symmetric groups on a fixed number of points, or square
//! matrices over a prime field (a genuine semigroup: some elements have no
//! inverse). Elements carry their platform, and every operation checks it,
//! so mixed-platform arithmetic is an error rather than a silent wrong
//! answer.
//!
//! Equality is always the platform's word-problem decision. For braids that
//! means handle reduction of `e1 * e2^-1`, never a comparison of raw words.
//! The canonical serialization routes braids through the left-greedy normal
//! form, so equal elements serialize to identical bytes on every platform.

use crate::braid::{self, BraidError, BraidWord, GarsideForm};
use crate::bytes::{self, DecodeError, Reader};
use crate::matrix::{is_prime, Matrix, MatrixError};
use crate::perm::Perm;
use rand::Rng;
use std::fmt;

pub const TAG_BRAID: u8 = 0x01;
pub const TAG_PERMUTATION: u8 = 0x02;
pub const TAG_MATRIX: u8 = 0x03;

/// Enumeration-based helpers refuse to materialize more elements than this.
pub const MAX_ENUMERATION: u64 = 1 << 21;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("elements live on different platforms")]
    PlatformMismatch,
    #[error("element has no inverse on this platform")]
    NonInvertible,
    #[error("platform is infinite; enumeration is not available")]
    InfinitePlatform,
    #[error("platform would enumerate {0} elements, above the {MAX_ENUMERATION} cap")]
    EnumerationTooLarge(u64),
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),
    #[error("subset has no generators")]
    EmptySubset,
    #[error("sample length range ({0}, {1}) is not a positive range")]
    BadSampleRange(u16, u16),
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

impl From<MatrixError> for AlgebraError {
    fn from(e: MatrixError) -> AlgebraError {
        match e {
            MatrixError::NotInvertible(_) => AlgebraError::NonInvertible,
            other => AlgebraError::InvalidPlatform(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Platform {
    Braid { index: u16 },
    Permutation { degree: u16 },
    MatrixModP { dim: u16, modulus: u16 },
}

impl Platform {
    pub fn braid(index: u16) -> Result<Platform, AlgebraError> {
        if index < 2 {
            return Err(AlgebraError::InvalidPlatform(format!(
                "braid index must be at least 2, got {index}"
            )));
        }
        Ok(Platform::Braid { index })
    }

    pub fn permutation(degree: u16) -> Result<Platform, AlgebraError> {
        if degree < 1 {
            return Err(AlgebraError::InvalidPlatform(
                "permutation degree must be at least 1".into(),
            ));
        }
        Ok(Platform::Permutation { degree })
    }

    pub fn matrix_mod_p(dim: u16, modulus: u16) -> Result<Platform, AlgebraError> {
        if dim < 2 {
            return Err(AlgebraError::InvalidPlatform(format!(
                "matrix dimension must be at least 2, got {dim}"
            )));
        }
        if !is_prime(modulus) {
            return Err(AlgebraError::InvalidPlatform(format!(
                "matrix modulus must be prime, got {modulus}"
            )));
        }
        Ok(Platform::MatrixModP { dim, modulus })
    }

    pub fn has_inverses(&self) -> bool {
        !matches!(self, Platform::MatrixModP { .. })
    }

    pub fn has_canonical_form(&self) -> bool {
        true
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Platform::Braid { .. })
    }

    pub fn identity(&self) -> PlatformElement {
        match *self {
            Platform::Braid { index } => PlatformElement {
                platform: *self,
                payload: Payload::Braid(BraidWord::identity(index)),
            },
            Platform::Permutation { degree } => PlatformElement {
                platform: *self,
                payload: Payload::Permutation(Perm::identity(degree as usize)),
            },
            Platform::MatrixModP { dim, modulus } => PlatformElement {
                platform: *self,
                payload: Payload::Matrix(Matrix::identity(dim, modulus)),
            },
        }
    }

    pub fn element_count(&self) -> Option<u64> {
        match *self {
            Platform::Braid { .. } => None,
            Platform::Permutation { degree } => {
                let mut acc: u64 = 1;
                for k in 2..=degree as u64 {
                    acc = acc.checked_mul(k)?;
                }
                Some(acc)
            }
            Platform::MatrixModP { dim, modulus } => {
                (modulus as u64).checked_pow((dim as u32) * (dim as u32))
            }
        }
    }

    /// Every element of a finite platform, in a fixed lexicographic order
    /// (permutations by image table, matrices by row-major entries).
    pub fn enumerate_elements(&self) -> Result<Vec<PlatformElement>, AlgebraError> {
        if !self.is_finite() {
            return Err(AlgebraError::InfinitePlatform);
        }
        let count = self
            .element_count()
            .ok_or(AlgebraError::EnumerationTooLarge(u64::MAX))?;
        if count > MAX_ENUMERATION {
            return Err(AlgebraError::EnumerationTooLarge(count));
        }
        let mut out = Vec::with_capacity(count as usize);
        match *self {
            Platform::Braid { .. } => unreachable!(),
            Platform::Permutation { degree } => {
                let mut p = Perm::identity(degree as usize);
                loop {
                    out.push(PlatformElement {
                        platform: *self,
                        payload: Payload::Permutation(p.clone()),
                    });
                    if !p.next_lex() {
                        break;
                    }
                }
            }
            Platform::MatrixModP { dim, modulus } => {
                let cells = dim as usize * dim as usize;
                let mut entries = vec![0u16; cells];
                loop {
                    out.push(PlatformElement {
                        platform: *self,
                        payload: Payload::Matrix(
                            Matrix::from_entries(dim, modulus, entries.clone()).unwrap(),
                        ),
                    });
                    let mut cell = cells;
                    loop {
                        if cell == 0 {
                            return Ok(out);
                        }
                        cell -= 1;
                        entries[cell] += 1;
                        if entries[cell] < modulus {
                            break;
                        }
                        entries[cell] = 0;
                    }
                }
            }
        }
        Ok(out)
    }

    /// A small generating family for the whole platform. For braids these
    /// are the Artin generators and their inverses; for permutations a
    /// transposition plus a full cycle; for matrices a generating set of the
    /// invertible group plus one rank-deficient idempotent (products of
    /// invertibles and that idempotent reach every matrix).
    pub fn full_generator_set(&self) -> Vec<PlatformElement> {
        match *self {
            Platform::Braid { index } => {
                let mut out = Vec::new();
                for i in 1..index as i32 {
                    out.push(PlatformElement::braid(
                        BraidWord::generator(index, i).unwrap(),
                    ));
                    out.push(PlatformElement::braid(
                        BraidWord::generator(index, -i).unwrap(),
                    ));
                }
                out
            }
            Platform::Permutation { degree } => {
                let d = degree as usize;
                let mut out = vec![self.identity()];
                if d >= 2 {
                    out.push(PlatformElement::permutation(
                        Perm::from_cycles(d, &[&[1, 2]]).unwrap(),
                    ));
                }
                if d >= 3 {
                    let cycle: Vec<usize> = (1..=d).collect();
                    out.push(PlatformElement::permutation(
                        Perm::from_cycles(d, &[&cycle]).unwrap(),
                    ));
                }
                out
            }
            Platform::MatrixModP { dim, modulus } => {
                let d = dim as usize;
                let mut out = vec![self.identity()];
                // Transvection with a 1 above the diagonal.
                let mut t = Matrix::identity(dim, modulus).entries().to_vec();
                t[1] = 1 % modulus;
                out.push(PlatformElement {
                    platform: *self,
                    payload: Payload::Matrix(Matrix::from_entries(dim, modulus, t).unwrap()),
                });
                // Permutation matrix of the full cycle.
                let mut c = vec![0u16; d * d];
                for i in 0..d {
                    c[i * d + (i + 1) % d] = 1;
                }
                out.push(PlatformElement {
                    platform: *self,
                    payload: Payload::Matrix(Matrix::from_entries(dim, modulus, c).unwrap()),
                });
                // Scaling by a primitive root, to reach every determinant.
                let g = primitive_root(modulus);
                let mut s = Matrix::identity(dim, modulus).entries().to_vec();
                s[0] = g;
                out.push(PlatformElement {
                    platform: *self,
                    payload: Payload::Matrix(Matrix::from_entries(dim, modulus, s).unwrap()),
                });
                // Rank dim-1 idempotent, the door into the singular part.
                let mut e = Matrix::identity(dim, modulus).entries().to_vec();
                e[d * d - 1] = 0;
                out.push(PlatformElement {
                    platform: *self,
                    payload: Payload::Matrix(Matrix::from_entries(dim, modulus, e).unwrap()),
                });
                out
            }
        }
    }
}

fn primitive_root(p: u16) -> u16 {
    if p == 2 {
        return 1;
    }
    for g in 2..p {
        let mut acc = g as u64;
        let mut order = 1u64;
        while acc != 1 {
            acc = acc * g as u64 % p as u64;
            order += 1;
        }
        if order == (p - 1) as u64 {
            return g;
        }
    }
    unreachable!("every prime has a primitive root")
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Platform::Braid { index } => write!(f, "braid({index})"),
            Platform::Permutation { degree } => write!(f, "permutation({degree})"),
            Platform::MatrixModP { dim, modulus } => write!(f, "matrix({dim}, mod {modulus})"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Payload {
    Braid(BraidWord),
    Permutation(Perm),
    Matrix(Matrix),
}

#[derive(Clone, Debug)]
pub struct PlatformElement {
    platform: Platform,
    payload: Payload,
}

impl PlatformElement {
    pub fn braid(word: BraidWord) -> PlatformElement {
        let platform = Platform::Braid { index: word.index() };
        PlatformElement {
            platform,
            payload: Payload::Braid(word),
        }
    }

    pub fn braid_word(index: u16, letters: &[i32]) -> Result<PlatformElement, AlgebraError> {
        Ok(PlatformElement::braid(BraidWord::new(
            index,
            letters.to_vec(),
        )?))
    }

    pub fn permutation(perm: Perm) -> PlatformElement {
        assert!(perm.degree() >= 1, "permutation platform needs degree >= 1");
        let platform = Platform::Permutation {
            degree: perm.degree() as u16,
        };
        PlatformElement {
            platform,
            payload: Payload::Permutation(perm),
        }
    }

    pub fn matrix(m: Matrix) -> Result<PlatformElement, AlgebraError> {
        let platform = Platform::matrix_mod_p(m.dim(), m.modulus())?;
        Ok(PlatformElement {
            platform,
            payload: Payload::Matrix(m),
        })
    }

    pub fn platform(&self) -> Platform {
        self.platform
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn as_braid(&self) -> Option<&BraidWord> {
        match &self.payload {
            Payload::Braid(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_permutation(&self) -> Option<&Perm> {
        match &self.payload {
            Payload::Permutation(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match &self.payload {
            Payload::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        equal(self, &self.platform.identity()).expect("platforms match")
    }

    /// Canonical byte encoding: a platform tag, the platform shape, then the
    /// canonical payload. Braids serialize their normal form (twist power
    /// plus permutation factors), so equal elements always produce
    /// bit-identical bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        match &self.payload {
            Payload::Braid(w) => {
                let form = braid::left_canonical_form(w);
                buf.push(TAG_BRAID);
                bytes::put_u16(&mut buf, w.index());
                bytes::put_u32(&mut buf, form.canonical_length() as u32);
                bytes::put_i32(&mut buf, form.infimum());
                for factor in form.factors() {
                    for &img in factor.images() {
                        bytes::put_u16(&mut buf, img);
                    }
                }
            }
            Payload::Permutation(p) => {
                buf.push(TAG_PERMUTATION);
                bytes::put_u16(&mut buf, p.degree() as u16);
                for &img in p.images() {
                    bytes::put_u16(&mut buf, img);
                }
            }
            Payload::Matrix(m) => {
                buf.push(TAG_MATRIX);
                bytes::put_u16(&mut buf, m.dim());
                bytes::put_u16(&mut buf, m.modulus());
                for &e in m.entries() {
                    bytes::put_u16(&mut buf, e);
                }
            }
        }
        buf
    }

    pub fn from_reader(r: &mut Reader<'_>) -> Result<PlatformElement, AlgebraError> {
        let tag = r.u8()?;
        match tag {
            TAG_BRAID => {
                let index = r.u16()?;
                let count = r.u32()? as usize;
                let infimum = r.i32()?;
                let mut factors = Vec::with_capacity(count);
                for _ in 0..count {
                    let mut images = Vec::with_capacity(index as usize);
                    for _ in 0..index {
                        images.push(r.u16()?);
                    }
                    let p = Perm::from_images(images).map_err(|e| {
                        AlgebraError::InvalidPlatform(format!("bad braid factor: {e}"))
                    })?;
                    factors.push(p);
                }
                let word = GarsideForm::from_parts(index, infimum, factors).expand();
                Ok(PlatformElement::braid(BraidWord::new(
                    index,
                    word.letters().to_vec(),
                )?))
            }
            TAG_PERMUTATION => {
                let degree = r.u16()?;
                let mut images = Vec::with_capacity(degree as usize);
                for _ in 0..degree {
                    images.push(r.u16()?);
                }
                let p = Perm::from_images(images)
                    .map_err(|e| AlgebraError::InvalidPlatform(format!("bad permutation: {e}")))?;
                if p.degree() < 1 {
                    return Err(AlgebraError::InvalidPlatform(
                        "permutation degree must be at least 1".into(),
                    ));
                }
                Ok(PlatformElement::permutation(p))
            }
            TAG_MATRIX => {
                let dim = r.u16()?;
                let modulus = r.u16()?;
                Platform::matrix_mod_p(dim, modulus)?;
                let mut entries = Vec::with_capacity(dim as usize * dim as usize);
                for _ in 0..dim as usize * dim as usize {
                    let e = r.u16()?;
                    if e >= modulus {
                        return Err(AlgebraError::InvalidPlatform(format!(
                            "matrix entry {e} not reduced mod {modulus}"
                        )));
                    }
                    entries.push(e);
                }
                PlatformElement::matrix(Matrix::from_entries(dim, modulus, entries)?)
            }
            other => Err(AlgebraError::InvalidPlatform(format!(
                "unknown element tag 0x{other:02x}"
            ))),
        }
    }

    pub fn from_bytes(buf: &[u8]) -> Result<PlatformElement, AlgebraError> {
        let mut r = Reader::new(buf);
        let e = PlatformElement::from_reader(&mut r)?;
        if !r.is_done() {
            return Err(AlgebraError::InvalidPlatform(
                "trailing bytes after element".into(),
            ));
        }
        Ok(e)
    }
}

/// Equality by the word-problem decision, never by raw payload comparison.
impl PartialEq for PlatformElement {
    fn eq(&self, other: &Self) -> bool {
        self.platform == other.platform && equal(self, other).unwrap_or(false)
    }
}

impl Eq for PlatformElement {}

impl fmt::Display for PlatformElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Braid(w) => write!(f, "{w}"),
            Payload::Permutation(p) => write!(f, "{p}"),
            Payload::Matrix(m) => write!(f, "{m}"),
        }
    }
}

pub fn multiply(
    e1: &PlatformElement,
    e2: &PlatformElement,
) -> Result<PlatformElement, AlgebraError> {
    if e1.platform != e2.platform {
        return Err(AlgebraError::PlatformMismatch);
    }
    let payload = match (&e1.payload, &e2.payload) {
        (Payload::Braid(w1), Payload::Braid(w2)) => Payload::Braid(w1.concat(w2)?),
        (Payload::Permutation(p1), Payload::Permutation(p2)) => {
            Payload::Permutation(p1.then(p2))
        }
        (Payload::Matrix(m1), Payload::Matrix(m2)) => Payload::Matrix(m1.mul(m2)?),
        _ => return Err(AlgebraError::PlatformMismatch),
    };
    Ok(PlatformElement {
        platform: e1.platform,
        payload,
    })
}

pub fn invert(e: &PlatformElement) -> Result<PlatformElement, AlgebraError> {
    let payload = match &e.payload {
        Payload::Braid(w) => Payload::Braid(w.inverse()),
        Payload::Permutation(p) => Payload::Permutation(p.inverse()),
        Payload::Matrix(m) => Payload::Matrix(m.inverse()?),
    };
    Ok(PlatformElement {
        platform: e.platform,
        payload,
    })
}

pub fn equal(e1: &PlatformElement, e2: &PlatformElement) -> Result<bool, AlgebraError> {
    if e1.platform != e2.platform {
        return Err(AlgebraError::PlatformMismatch);
    }
    match (&e1.payload, &e2.payload) {
        (Payload::Braid(w1), Payload::Braid(w2)) => Ok(braid::words_equal(w1, w2)?),
        (Payload::Permutation(p1), Payload::Permutation(p2)) => Ok(p1 == p2),
        (Payload::Matrix(m1), Payload::Matrix(m2)) => Ok(m1 == m2),
        _ => Err(AlgebraError::PlatformMismatch),
    }
}

/// Rewrites the element into its canonical representative. Braid payloads
/// become the deterministic expansion of the normal form; finite-platform
/// payloads are already canonical. Idempotent, and equal inputs yield
/// payload-identical outputs.
pub fn canonicalize(e: &PlatformElement) -> PlatformElement {
    match &e.payload {
        Payload::Braid(w) => {
            PlatformElement::braid(braid::left_canonical_form(w).expand())
        }
        _ => e.clone(),
    }
}

/// Repeated-squaring power; `k = 0` gives the identity.
pub fn pow(e: &PlatformElement, k: u64) -> PlatformElement {
    let mut acc = e.platform.identity();
    let mut base = e.clone();
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = multiply(&acc, &base).expect("same platform");
        }
        k >>= 1;
        if k > 0 {
            base = multiply(&base, &base).expect("same platform");
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubsetLabel {
    LA,
    RA,
    LB,
    RB,
    Z,
    Custom(String),
}

impl fmt::Display for SubsetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetLabel::LA => write!(f, "L_A"),
            SubsetLabel::RA => write!(f, "R_A"),
            SubsetLabel::LB => write!(f, "L_B"),
            SubsetLabel::RB => write!(f, "R_B"),
            SubsetLabel::Z => write!(f, "Z"),
            SubsetLabel::Custom(s) => write!(f, "{s}"),
        }
    }
}

/// A finitely generated subset of a platform: explicit generators plus the
/// length range used when sampling random members. Sampling multiplies
/// generators only (no inverses), so it is well defined on semigroups; for
/// subsets meant to be closed under inversion, list the inverses as
/// generators too.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetSpec {
    generators: Vec<PlatformElement>,
    label: SubsetLabel,
    min_len: u16,
    max_len: u16,
}

impl SubsetSpec {
    pub fn new(
        generators: Vec<PlatformElement>,
        label: SubsetLabel,
        (min_len, max_len): (u16, u16),
    ) -> Result<SubsetSpec, AlgebraError> {
        if generators.is_empty() {
            return Err(AlgebraError::EmptySubset);
        }
        let platform = generators[0].platform();
        if generators.iter().any(|g| g.platform() != platform) {
            return Err(AlgebraError::PlatformMismatch);
        }
        if min_len < 1 || min_len > max_len {
            return Err(AlgebraError::BadSampleRange(min_len, max_len));
        }
        Ok(SubsetSpec {
            generators,
            label,
            min_len,
            max_len,
        })
    }

    pub fn singleton(element: PlatformElement, label: SubsetLabel) -> SubsetSpec {
        SubsetSpec {
            generators: vec![element],
            label,
            min_len: 1,
            max_len: 1,
        }
    }

    pub fn generators(&self) -> &[PlatformElement] {
        &self.generators
    }

    pub fn label(&self) -> &SubsetLabel {
        &self.label
    }

    pub fn sample_length_range(&self) -> (u16, u16) {
        (self.min_len, self.max_len)
    }

    pub fn platform(&self) -> Platform {
        self.generators[0].platform()
    }

    pub fn relabeled(mut self, label: SubsetLabel) -> SubsetSpec {
        self.label = label;
        self
    }

    pub fn with_range(mut self, (min_len, max_len): (u16, u16)) -> Result<SubsetSpec, AlgebraError> {
        if min_len < 1 || min_len > max_len {
            return Err(AlgebraError::BadSampleRange(min_len, max_len));
        }
        self.min_len = min_len;
        self.max_len = max_len;
        Ok(self)
    }

    /// Draws a positive product of between `min` and `max` generators, both
    /// chosen uniformly from the injected randomness. Deterministic for a
    /// seeded generator.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> PlatformElement {
        let len = rng.gen_range(self.min_len..=self.max_len);
        let mut acc = self.platform().identity();
        for _ in 0..len {
            let g = &self.generators[rng.gen_range(0..self.generators.len())];
            acc = multiply(&acc, g).expect("subset generators share a platform");
        }
        acc
    }
}

/// The full centralizer of `e`, computed by enumerating the platform.
pub fn centralizer_enumerate(
    platform: Platform,
    e: &PlatformElement,
) -> Result<SubsetSpec, AlgebraError> {
    if e.platform() != platform {
        return Err(AlgebraError::PlatformMismatch);
    }
    let mut members = Vec::new();
    for candidate in platform.enumerate_elements()? {
        let xe = multiply(&candidate, e)?;
        let ex = multiply(e, &candidate)?;
        if equal(&xe, &ex)? {
            members.push(candidate);
        }
    }
    SubsetSpec::new(
        members,
        SubsetLabel::Custom(format!("C({e})")),
        (1, 1),
    )
}

/// All products of the subset's generators (the empty product included), by
/// breadth-first closure. Deduplicates via canonical bytes; the result order
/// is the deterministic discovery order.
pub fn subsemigroup_closure(subset: &SubsetSpec) -> Result<Vec<PlatformElement>, AlgebraError> {
    if !subset.platform().is_finite() {
        return Err(AlgebraError::InfinitePlatform);
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    let identity = subset.platform().identity();
    seen.insert(identity.canonical_bytes());
    queue.push_back(identity.clone());
    out.push(identity);
    while let Some(current) = queue.pop_front() {
        for g in subset.generators() {
            let next = multiply(&current, g)?;
            let key = next.canonical_bytes();
            if seen.insert(key) {
                if out.len() as u64 >= MAX_ENUMERATION {
                    return Err(AlgebraError::EnumerationTooLarge(out.len() as u64 + 1));
                }
                out.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}
