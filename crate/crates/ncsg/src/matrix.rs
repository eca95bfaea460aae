//! Square matrices over the integers mod a prime `p`.
//!
//! This is a true semigroup platform: multiplication is always defined,
//! inversion only for matrices with nonzero determinant.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    dim: u16,
    modulus: u16,
    entries: Vec<u16>, // row-major, each entry reduced mod `modulus`
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    WrongEntryCount { dim: u16, expected: usize, got: usize },
    #[error("dimension or modulus mismatch")]
    ShapeMismatch,
    #[error("matrix is not invertible mod {0}")]
    NotInvertible(u16),
}

impl Matrix {
    pub fn identity(dim: u16, modulus: u16) -> Matrix {
        let mut entries = vec![0u16; dim as usize * dim as usize];
        for i in 0..dim as usize {
            entries[i * dim as usize + i] = 1 % modulus;
        }
        Matrix { dim, modulus, entries }
    }

    pub fn zero(dim: u16, modulus: u16) -> Matrix {
        Matrix {
            dim,
            modulus,
            entries: vec![0u16; dim as usize * dim as usize],
        }
    }

    pub fn from_entries(dim: u16, modulus: u16, entries: Vec<u16>) -> Result<Matrix, MatrixError> {
        let expected = dim as usize * dim as usize;
        if entries.len() != expected {
            return Err(MatrixError::WrongEntryCount {
                dim,
                expected,
                got: entries.len(),
            });
        }
        let entries = entries.into_iter().map(|e| e % modulus).collect();
        Ok(Matrix { dim, modulus, entries })
    }

    /// Convenience for literals in tests and parameter sets.
    pub fn from_rows(modulus: u16, rows: &[&[u16]]) -> Result<Matrix, MatrixError> {
        let dim = rows.len() as u16;
        let mut entries = Vec::with_capacity(rows.len() * rows.len());
        for row in rows {
            if row.len() != rows.len() {
                return Err(MatrixError::WrongEntryCount {
                    dim,
                    expected: rows.len() * rows.len(),
                    got: row.len() * rows.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Matrix::from_entries(dim, modulus, entries)
    }

    pub fn dim(&self) -> u16 {
        self.dim
    }

    pub fn modulus(&self) -> u16 {
        self.modulus
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.entries[row * self.dim as usize + col]
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if self.dim != other.dim || self.modulus != other.modulus {
            return Err(MatrixError::ShapeMismatch);
        }
        let n = self.dim as usize;
        let p = self.modulus as u64;
        let mut entries = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: u64 = 0;
                for k in 0..n {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                }
                entries[i * n + j] = (acc % p) as u16;
            }
        }
        Ok(Matrix {
            dim: self.dim,
            modulus: self.modulus,
            entries,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.dim, self.modulus)
    }

    /// Gauss-Jordan inverse over F_p.
    pub fn inverse(&self) -> Result<Matrix, MatrixError> {
        let n = self.dim as usize;
        let p = self.modulus as u64;
        let mut work: Vec<u64> = self.entries.iter().map(|&e| e as u64).collect();
        let mut inv: Vec<u64> = Matrix::identity(self.dim, self.modulus)
            .entries
            .iter()
            .map(|&e| e as u64)
            .collect();
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !work[r * n + col].is_multiple_of(p));
            let Some(pivot_row) = pivot_row else {
                return Err(MatrixError::NotInvertible(self.modulus));
            };
            if pivot_row != col {
                for j in 0..n {
                    work.swap(col * n + j, pivot_row * n + j);
                    inv.swap(col * n + j, pivot_row * n + j);
                }
            }
            let scale = mod_inv(work[col * n + col] % p, p);
            for j in 0..n {
                work[col * n + j] = work[col * n + j] * scale % p;
                inv[col * n + j] = inv[col * n + j] * scale % p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = work[row * n + col] % p;
                if factor == 0 {
                    continue;
                }
                for j in 0..n {
                    work[row * n + j] = (work[row * n + j] + (p - factor) * work[col * n + j]) % p;
                    inv[row * n + j] = (inv[row * n + j] + (p - factor) * inv[col * n + j]) % p;
                }
            }
        }
        Ok(Matrix {
            dim: self.dim,
            modulus: self.modulus,
            entries: inv.into_iter().map(|e| e as u16).collect(),
        })
    }
}

/// Inverse of `a` mod prime `p` via Fermat.
fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub fn is_prime(p: u16) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p as u32 {
        if (p as u32).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim as usize {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim as usize {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "] mod {}", self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_mod_three() {
        let a = Matrix::from_rows(3, &[&[1, 1], &[0, 1]]).unwrap();
        let b = Matrix::from_rows(3, &[&[0, 1], &[1, 0]]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.entries(), &[1, 1, 1, 0]);
        let ba = b.mul(&a).unwrap();
        assert_eq!(ba.entries(), &[0, 1, 1, 1]);
        assert_ne!(ab, ba);
    }

    #[test]
    fn upper_unitriangular_matrices_commute() {
        let a = Matrix::from_rows(3, &[&[1, 1], &[0, 1]]).unwrap();
        let b = Matrix::from_rows(3, &[&[2, 1], &[0, 2]]).unwrap();
        assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn inverse_of_invertible() {
        let a = Matrix::from_rows(5, &[&[1, 2], &[3, 4]]).unwrap();
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        assert!(inv.mul(&a).unwrap().is_identity());
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_rows(3, &[&[1, 1], &[0, 0]]).unwrap();
        assert_eq!(a.inverse(), Err(MatrixError::NotInvertible(3)));
    }

    #[test]
    fn zero_matrix_absorbs() {
        let z = Matrix::zero(2, 3);
        let a = Matrix::from_rows(3, &[&[1, 2], &[2, 1]]).unwrap();
        assert_eq!(a.mul(&z).unwrap(), z);
        assert_eq!(z.mul(&a).unwrap(), z);
    }

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(65521));
        assert!(!is_prime(1));
        assert!(!is_prime(9));
        assert!(!is_prime(65535));
    }
}
