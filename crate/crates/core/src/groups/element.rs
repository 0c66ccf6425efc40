use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A square matrix with exact integer entries, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        IntMatrix { dim, entries }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::input("matrix generators must be nonempty"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("matrix generators must be square"));
        }
        let entries = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        Ok(IntMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> &BigInt {
        &self.entries[row * self.dim + col]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * &other.entries[k * n + j];
                }
            }
        }
        IntMatrix { dim: n, entries }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                    a[i * n + j] = v;
                }
            }
            prev = a[k * n + k].clone();
        }
        if n == 0 {
            return BigInt::one();
        }
        sign * &a[n * n - 1]
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntMatrix {
        let n = self.dim;
        let entries = (0..n)
            .filter(|&r| r != skip_row)
            .flat_map(|r| (0..n).filter(move |&c| c != skip_col).map(move |c| (r, c)))
            .map(|(r, c)| self.entries[r * n + c].clone())
            .collect();
        IntMatrix { dim: n - 1, entries }
    }

    /// Inverse over the integers; defined exactly when `det = ±1`.
    pub fn inverse(&self) -> Result<IntMatrix> {
        let det = self.determinant();
        if det.abs() != BigInt::one() {
            return Err(Error::input(format!("matrix with determinant {det} has no integer inverse")));
        }
        let n = self.dim;
        if n == 1 {
            return Ok(IntMatrix { dim: 1, entries: vec![det] });
        }
        let mut entries = vec![BigInt::zero(); n * n];
        for r in 0..n {
            for c in 0..n {
                let cofactor = self.minor(r, c).determinant();
                let signed = if (r + c) % 2 == 0 { cofactor } else { -cofactor };
                // adjugate is the transposed cofactor matrix
                entries[c * n + r] = signed * &det;
            }
        }
        Ok(IntMatrix { dim: n, entries })
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.dim {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for c in 0..self.dim {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.entry(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// A group element in canonical form. Equality of canonical forms is
/// equality in the group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    /// Freely reduced word; letter `+(i+1)` is generator `i`, `−(i+1)` its inverse.
    Word(Vec<i32>),
    /// Point of `Zⁿ`.
    Vector(Vec<i64>),
    Matrix(IntMatrix),
    /// Element of a direct product, one coordinate per factor.
    Tuple(Vec<Element>),
}

impl Element {
    /// Reduced product of two free words.
    pub(crate) fn word_product(a: &[i32], b: &[i32]) -> Vec<i32> {
        let mut out = a.to_vec();
        for &letter in b {
            if out.last() == Some(&-letter) {
                out.pop();
            } else {
                out.push(letter);
            }
        }
        out
    }
}

fn letter_name(letter: i32) -> String {
    let idx = letter.unsigned_abs() - 1;
    let base = if letter > 0 { b'a' } else { b'A' };
    if idx < 26 {
        ((base + idx as u8) as char).to_string()
    } else if letter > 0 {
        format!("g{idx}")
    } else {
        format!("G{idx}")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Word(w) if w.is_empty() => write!(f, "e"),
            Element::Word(w) => {
                for &l in w {
                    write!(f, "{}", letter_name(l))?;
                }
                Ok(())
            }
            Element::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Matrix(m) => write!(f, "{m}"),
            Element::Tuple(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        assert_eq!(Element::word_product(&[1, 2], &[-2, -1]), Vec::<i32>::new());
        assert_eq!(Element::word_product(&[1, 2], &[-2, 1]), vec![1, 1]);
        assert_eq!(Element::Word(vec![1, -2]).to_string(), "aB");
        assert_eq!(Element::Word(vec![]).to_string(), "e");
    }

    #[test]
    fn determinant_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.determinant(), BigInt::from(1));
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(inv, IntMatrix::from_rows(&[vec![1, -1], vec![-1, 2]]).unwrap());

        let m3 = IntMatrix::from_rows(&[vec![1, 2, 3], vec![0, 1, 4], vec![5, 6, 0]]).unwrap();
        assert_eq!(m3.determinant(), BigInt::from(1));
        assert!(m3.inverse().unwrap().mul(&m3).is_identity());

        let swap = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(swap.determinant(), BigInt::from(-1));
        assert!(swap.inverse().unwrap().mul(&swap).is_identity());

        let singular = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(singular.inverse().is_err());
        assert!(IntMatrix::from_rows(&[vec![1, 2]]).is_err());
    }
}
