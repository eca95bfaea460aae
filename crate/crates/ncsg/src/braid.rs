//! Braid words on n strands, the word problem via handle reduction, and the
//! left-greedy normal form `D^k · A_1 ... A_m` built from permutation factors.
//!
//! Letters are nonzero signed integers: `i` stands for the Artin generator
//! `s_i` crossing strands i and i+1 (1-based, `1 <= i <= n-1`), `-i` for its
//! inverse. The defining relations are `s_i s_j = s_j s_i` for `|i-j| > 1`
//! and `s_i s_j s_i = s_j s_i s_j` for `|i-j| = 1`.

use crate::algebra::{PlatformElement, SubsetLabel, SubsetSpec};
use crate::perm::Perm;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BraidError {
    #[error("braid index must be at least 2, got {0}")]
    IndexTooSmall(u16),
    #[error("letter {letter} out of range for braid index {index}")]
    LetterOutOfRange { index: u16, letter: i32 },
    #[error("braid index mismatch: {0} vs {1}")]
    IndexMismatch(u16, u16),
}

/// A word in the generators of the braid group on `index` strands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidWord {
    index: u16,
    letters: Vec<i32>,
}

impl BraidWord {
    pub fn new(index: u16, letters: Vec<i32>) -> Result<BraidWord, BraidError> {
        if index < 2 {
            return Err(BraidError::IndexTooSmall(index));
        }
        for &l in &letters {
            if l == 0 || l.unsigned_abs() > (index - 1) as u32 {
                return Err(BraidError::LetterOutOfRange { index, letter: l });
            }
        }
        Ok(BraidWord { index, letters })
    }

    pub fn identity(index: u16) -> BraidWord {
        BraidWord {
            index,
            letters: Vec::new(),
        }
    }

    pub fn generator(index: u16, letter: i32) -> Result<BraidWord, BraidError> {
        BraidWord::new(index, vec![letter])
    }

    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord, BraidError> {
        if self.index != other.index {
            return Err(BraidError::IndexMismatch(self.index, other.index));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord {
            index: self.index,
            letters,
        })
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            index: self.index,
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// The underlying permutation of the word (strand i ends at position
    /// `perm(i)`).
    pub fn underlying_perm(&self) -> Perm {
        let n = self.index as usize;
        let mut p = Perm::identity(n);
        for &l in &self.letters {
            let s = Perm::transposition(n, l.unsigned_abs() as usize - 1);
            p = p.then(&s);
        }
        p
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, &l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if l > 0 {
                write!(f, "s{l}")?;
            } else {
                write!(f, "s{}^-1", -l)?;
            }
        }
        Ok(())
    }
}

/// Removes handles until none remain, scanning for the handle whose closing
/// letter comes first. A handle is a subword `s_i^e v s_i^-e` whose interior
/// `v` uses only generators with index above `i`; it is removed by rewriting
/// each interior `s_{i+1}^d` as `s_{i+1}^-e s_i^d s_{i+1}^e`. The result is
/// empty exactly when the input represents the identity braid.
pub fn handle_reduce(w: &BraidWord) -> BraidWord {
    let mut letters = w.letters.clone();
    loop {
        let mut handle: Option<(usize, usize)> = None;
        'scan: for k in 0..letters.len() {
            let closing = letters[k];
            let ci = closing.abs();
            for j in (0..k).rev() {
                let opening = letters[j];
                let oi = opening.abs();
                if oi > ci {
                    continue;
                }
                if oi == ci && opening == -closing {
                    handle = Some((j, k));
                    break 'scan;
                }
                // A same-sign letter of index ci, or any letter of smaller
                // index, means no handle closes at position k.
                break;
            }
        }
        let Some((j, k)) = handle else {
            return BraidWord {
                index: w.index,
                letters,
            };
        };
        let e = letters[j].signum();
        let i = letters[j].abs();
        let mut out = Vec::with_capacity(letters.len() + 4);
        out.extend_from_slice(&letters[..j]);
        for &l in &letters[j + 1..k] {
            if l.abs() == i + 1 {
                out.push(-e * (i + 1));
                out.push(l.signum() * i);
                out.push(e * (i + 1));
            } else {
                out.push(l);
            }
        }
        out.extend_from_slice(&letters[k + 1..]);
        letters = out;
    }
}

/// Decides whether two words represent the same braid.
pub fn words_equal(w1: &BraidWord, w2: &BraidWord) -> Result<bool, BraidError> {
    let diff = w1.concat(&w2.inverse())?;
    Ok(handle_reduce(&diff).is_empty())
}

/// Left-greedy normal form: `D^infimum` followed by permutation factors,
/// each a simple braid (any two strands cross at most once), none trivial or
/// equal to the half twist, with every adjacent pair left-weighted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GarsideForm {
    index: u16,
    infimum: i32,
    factors: Vec<Perm>,
}

impl GarsideForm {
    pub fn index(&self) -> u16 {
        self.index
    }

    pub fn infimum(&self) -> i32 {
        self.infimum
    }

    pub fn factors(&self) -> &[Perm] {
        &self.factors
    }

    pub fn canonical_length(&self) -> usize {
        self.factors.len()
    }

    pub fn from_parts(index: u16, infimum: i32, factors: Vec<Perm>) -> GarsideForm {
        GarsideForm {
            index,
            infimum,
            factors,
        }
    }

    /// Rebuilds a concrete word: `infimum` copies of the half-twist word (or
    /// of its inverse), then each factor spelled as its minimal positive
    /// word. Deterministic, so equal braids expand to identical words.
    pub fn expand(&self) -> BraidWord {
        let n = self.index as usize;
        let mut letters = Vec::new();
        let delta = simple_braid_word(&Perm::reversal(n));
        if self.infimum >= 0 {
            for _ in 0..self.infimum {
                letters.extend_from_slice(&delta);
            }
        } else {
            let delta_inv: Vec<i32> = delta.iter().rev().map(|&l| -l).collect();
            for _ in 0..(-self.infimum) {
                letters.extend_from_slice(&delta_inv);
            }
        }
        for factor in &self.factors {
            letters.extend(simple_braid_word(factor));
        }
        BraidWord {
            index: self.index,
            letters,
        }
    }
}

/// Conjugation by the half twist, an involution sending `s_i` to `s_{n-i}`.
fn tau(p: &Perm, reversal: &Perm) -> Perm {
    reversal.then(p).then(reversal)
}

/// Position i is in the starting set of a simple braid iff the strands
/// beginning at i and i+1 cross, i.e. the permutation descends at i.
fn in_starting_set(p: &Perm, i: usize) -> bool {
    p.apply(i) > p.apply(i + 1)
}

/// Position i is in the finishing set iff the strands ending at i and i+1
/// cross, i.e. the inverse permutation descends at i.
fn in_finishing_set_inv(p_inv: &Perm, i: usize) -> bool {
    p_inv.apply(i) > p_inv.apply(i + 1)
}

/// Shifts crossings from the head of `b` into the tail of `a` until the pair
/// is left-weighted (every starting letter of `b` finishes `a`). Returns
/// whether anything moved.
fn make_left_weighted(a: &mut Perm, b: &mut Perm) -> bool {
    let n = a.degree();
    let mut moved = false;
    loop {
        let a_inv = a.inverse();
        let mut pick = None;
        for i in 0..n - 1 {
            if in_starting_set(b, i) && !in_finishing_set_inv(&a_inv, i) {
                pick = Some(i);
                break;
            }
        }
        let Some(i) = pick else {
            return moved;
        };
        let s = Perm::transposition(n, i);
        *a = a.then(&s);
        *b = s.then(b);
        moved = true;
    }
}

/// Rewrites a word as a power of the half twist times positive permutation
/// factors: each inverse letter `s_i^-1` becomes `D^-1 (D s_i^-1)` and the
/// `D^-1` is carried to the front through the factors collected so far.
fn word_to_delta_factors(w: &BraidWord) -> (i32, Vec<Perm>) {
    let n = w.index as usize;
    let reversal = Perm::reversal(n);
    let mut infimum = 0i32;
    let mut factors: Vec<Perm> = Vec::new();
    for &l in &w.letters {
        let s = Perm::transposition(n, l.unsigned_abs() as usize - 1);
        if l > 0 {
            factors.push(s);
        } else {
            infimum -= 1;
            for f in factors.iter_mut() {
                *f = tau(f, &reversal);
            }
            let complement = reversal.then(&s);
            if !complement.is_identity() {
                factors.push(complement);
            }
        }
    }
    (infimum, factors)
}

fn normalize(n: usize, mut infimum: i32, mut factors: Vec<Perm>) -> (i32, Vec<Perm>) {
    let reversal = Perm::reversal(n);
    loop {
        let mut changed = false;

        let before = factors.len();
        factors.retain(|f| !f.is_identity());
        if factors.len() != before {
            changed = true;
        }

        let mut k = 0;
        while k < factors.len() {
            if factors[k] == reversal {
                for f in factors.iter_mut().take(k) {
                    *f = tau(f, &reversal);
                }
                factors.remove(k);
                infimum += 1;
                changed = true;
            } else {
                k += 1;
            }
        }

        let mut j = 0;
        while factors.len() >= 2 && j + 1 < factors.len() {
            let (left, right) = factors.split_at_mut(j + 1);
            if make_left_weighted(&mut left[j], &mut right[0]) {
                changed = true;
            }
            if factors[j + 1].is_identity() {
                factors.remove(j + 1);
            } else {
                j += 1;
            }
        }

        if !changed {
            return (infimum, factors);
        }
    }
}

/// Computes the unique left-greedy normal form of a word. Two words
/// represent the same braid exactly when their forms are identical.
pub fn left_canonical_form(w: &BraidWord) -> GarsideForm {
    let (infimum, factors) = word_to_delta_factors(w);
    let (infimum, factors) = normalize(w.index as usize, infimum, factors);
    GarsideForm {
        index: w.index,
        infimum,
        factors,
    }
}

/// Spells a simple braid as its minimal positive word, always choosing the
/// lowest available generator first. The word length equals the inversion
/// count of the permutation.
pub fn simple_braid_word(p: &Perm) -> Vec<i32> {
    let n = p.degree();
    let mut q = p.clone();
    let mut out = Vec::with_capacity(p.inversions());
    loop {
        let mut pick = None;
        for i in 0..n - 1 {
            if in_starting_set(&q, i) {
                pick = Some(i);
                break;
            }
        }
        let Some(i) = pick else {
            return out;
        };
        out.push(i as i32 + 1);
        let s = Perm::transposition(n, i);
        q = s.then(&q);
    }
}

/// All defining trivial words of the group on `index` strands: free
/// cancellations, far-commutation relators `s_i s_j s_i^-1 s_j^-1` for
/// `|i-j| > 1`, and braid relators `s_i s_j s_i s_j^-1 s_i^-1 s_j^-1` for
/// `|i-j| = 1`.
pub fn relators(index: u16) -> Vec<BraidWord> {
    let n = index as i32;
    let mut out = Vec::new();
    for i in 1..n {
        out.push(BraidWord::new(index, vec![i, -i]).unwrap());
        out.push(BraidWord::new(index, vec![-i, i]).unwrap());
    }
    for i in 1..n {
        for j in i + 1..n {
            if j - i > 1 {
                out.push(BraidWord::new(index, vec![i, j, -i, -j]).unwrap());
            } else {
                out.push(BraidWord::new(index, vec![i, j, i, -j, -i, -j]).unwrap());
            }
        }
    }
    out
}

/// Inserts one randomly chosen relator (or its inverse) at a random
/// position, producing a different word for the same braid.
pub fn insert_relator<R: Rng>(w: &BraidWord, rng: &mut R) -> BraidWord {
    let relators = relators(w.index);
    let relator = &relators[rng.gen_range(0..relators.len())];
    let relator = if rng.gen_bool(0.5) {
        relator.inverse()
    } else {
        relator.clone()
    };
    let at = rng.gen_range(0..=w.letters.len());
    let mut letters = Vec::with_capacity(w.letters.len() + relator.len());
    letters.extend_from_slice(&w.letters[..at]);
    letters.extend_from_slice(relator.letters());
    letters.extend_from_slice(&w.letters[at..]);
    BraidWord {
        index: w.index,
        letters,
    }
}

/// Uniform random word of the given length.
pub fn random_word<R: Rng>(index: u16, len: usize, rng: &mut R) -> BraidWord {
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let i = rng.gen_range(1..index as i32);
        letters.push(if rng.gen_bool(0.5) { i } else { -i });
    }
    BraidWord {
        index,
        letters,
    }
}

/// The standard pair of commuting subgroups: the lower subgroup generated by
/// `s_1 ... s_{floor(n/2)-1}` and the upper subgroup generated by
/// `s_{floor(n/2)+1} ... s_{n-1}`. Generator indices in the two ranges
/// always differ by at least 2, so the subgroups commute elementwise.
pub fn standard_commuting_subgroups(
    index: u16,
) -> Result<(SubsetSpec, SubsetSpec), BraidError> {
    if index < 5 {
        return Err(BraidError::IndexTooSmall(index));
    }
    let mid = index / 2;
    let gens = |range: std::ops::RangeInclusive<u16>| -> Vec<PlatformElement> {
        range
            .map(|i| PlatformElement::braid(BraidWord::generator(index, i as i32).unwrap()))
            .collect()
    };
    let lower = SubsetSpec::new(
        gens(1..=mid - 1),
        SubsetLabel::Custom(format!("LB_{index}")),
        (1, 4),
    )
    .expect("lower generator range is nonempty for index >= 5");
    let upper = SubsetSpec::new(
        gens(mid + 1..=index - 1),
        SubsetLabel::Custom(format!("UB_{index}")),
        (1, 4),
    )
    .expect("upper generator range is nonempty for index >= 5");
    Ok((lower, upper))
}
