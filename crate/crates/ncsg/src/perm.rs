//! Permutations on `{0, ..., n-1}` stored as image tables.
//!
//! Products are taken in diagram order: `a.then(b)` applies `a` first and
//! `b` second. This matches word order for braid words, so the map from a
//! braid word to its underlying permutation is a homomorphism.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm {
    map: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermError {
    #[error("image table {0:?} is not a bijection")]
    NotABijection(Vec<u16>),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("cycle entry {0} out of range for degree {1}")]
    CycleOutOfRange(usize, usize),
    #[error("cycle repeats entry {0}")]
    CycleRepeats(usize),
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            map: (0..n as u16).collect(),
        }
    }

    /// Adjacent transposition swapping positions `i` and `i+1` (0-based).
    pub fn transposition(n: usize, i: usize) -> Perm {
        assert!(i + 1 < n, "transposition index {i} out of range for degree {n}");
        let mut map: Vec<u16> = (0..n as u16).collect();
        map.swap(i, i + 1);
        Perm { map }
    }

    /// The order-reversing permutation `i -> n-1-i`.
    pub fn reversal(n: usize) -> Perm {
        Perm {
            map: (0..n as u16).rev().collect(),
        }
    }

    pub fn from_images(map: Vec<u16>) -> Result<Perm, PermError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if (v as usize) >= n || seen[v as usize] {
                return Err(PermError::NotABijection(map));
            }
            seen[v as usize] = true;
        }
        Ok(Perm { map })
    }

    /// Builds a permutation from disjoint cycles written with 1-based points,
    /// e.g. `from_cycles(6, &[&[1, 2], &[5, 6]])` for (1 2)(5 6).
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Perm, PermError> {
        let mut map: Vec<u16> = (0..n as u16).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for window in 0..cycle.len() {
                let from = cycle[window];
                let to = cycle[(window + 1) % cycle.len()];
                if from == 0 || from > n || to == 0 || to > n {
                    return Err(PermError::CycleOutOfRange(from.max(to), n));
                }
                if touched[from - 1] {
                    return Err(PermError::CycleRepeats(from));
                }
                touched[from - 1] = true;
                map[from - 1] = (to - 1) as u16;
            }
        }
        Ok(Perm { map })
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i] as usize
    }

    pub fn images(&self) -> &[u16] {
        &self.map
    }

    /// Diagram-order product: applies `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree());
        Perm {
            map: self.map.iter().map(|&v| other.map[v as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut map = vec![0u16; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v as usize] = i as u16;
        }
        Perm { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// Number of inversions; equals the positive word length of the
    /// corresponding simple braid.
    pub fn inversions(&self) -> usize {
        let mut count = 0;
        for i in 0..self.map.len() {
            for j in i + 1..self.map.len() {
                if self.map[i] > self.map[j] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Lexicographically next image table, for enumerating all permutations
    /// of a given degree in order. Returns false once the table is maximal.
    pub fn next_lex(&mut self) -> bool {
        let map = &mut self.map;
        if map.len() < 2 {
            return false;
        }
        let mut i = map.len() - 1;
        while i > 0 && map[i - 1] >= map[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = map.len() - 1;
        while map[j] <= map[i - 1] {
            j -= 1;
        }
        map.swap(i - 1, j);
        map[i..].reverse();
        true
    }

    /// Disjoint cycle decomposition over 1-based points, fixed points omitted.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cycle.push(cur + 1);
                cur = self.apply(cur);
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            write!(f, "(")?;
            for (i, point) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{point}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_is_diagram_order() {
        // (1 2) then (2 3): 1 -> 2 -> 3, so the product maps 1 to 3.
        let a = Perm::from_cycles(3, &[&[1, 2]]).unwrap();
        let b = Perm::from_cycles(3, &[&[2, 3]]).unwrap();
        let ab = a.then(&b);
        assert_eq!(ab.apply(0), 2);
        assert_eq!(ab.apply(1), 0);
        assert_eq!(ab.apply(2), 1);
    }

    #[test]
    fn disjoint_transpositions_commute() {
        let a = Perm::from_cycles(6, &[&[1, 2]]).unwrap();
        let b = Perm::from_cycles(6, &[&[3, 4]]).unwrap();
        assert_eq!(a.then(&b), b.then(&a));
        // Frozen image table for (1 2)(3 4) acting on 0-based points.
        assert_eq!(a.then(&b).images(), &[1, 0, 3, 2, 4, 5]);
    }

    #[test]
    fn overlapping_transpositions_do_not_commute() {
        let a = Perm::from_cycles(3, &[&[1, 2]]).unwrap();
        let b = Perm::from_cycles(3, &[&[2, 3]]).unwrap();
        assert_ne!(a.then(&b), b.then(&a));
    }

    #[test]
    fn inverse_round_trips() {
        let p = Perm::from_cycles(5, &[&[1, 3, 5], &[2, 4]]).unwrap();
        assert!(p.then(&p.inverse()).is_identity());
        assert!(p.inverse().then(&p).is_identity());
    }

    #[test]
    fn reversal_has_maximal_inversions() {
        let w = Perm::reversal(4);
        assert_eq!(w.inversions(), 6);
        assert!(w.then(&w).is_identity());
    }

    #[test]
    fn from_images_rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0, 2]).is_err());
        assert!(Perm::from_images(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn lex_enumeration_counts_factorial() {
        let mut p = Perm::identity(4);
        let mut count = 1;
        while p.next_lex() {
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn cycle_display_is_one_based() {
        let p = Perm::from_cycles(6, &[&[2, 4], &[5, 6]]).unwrap();
        assert_eq!(p.to_string(), "(2 4)(5 6)");
        assert_eq!(Perm::identity(3).to_string(), "()");
    }
}
