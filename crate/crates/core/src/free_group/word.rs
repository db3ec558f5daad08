use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced word over `a₁, …, a_n` and their inverses. Letter `i > 0` is `aᵢ`,
/// letter `−i` is `aᵢ⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word {
    letters: Vec<i32>,
}

impl Word {
    pub fn identity() -> Self {
        Word { letters: Vec::new() }
    }

    /// Validates letters against `generators` and rejects unreduced input.
    pub fn new(letters: Vec<i32>, generators: usize) -> Result<Self> {
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize > generators {
                return Err(Error::BadLetter { letter: l, generators });
            }
        }
        if let Some(i) = letters.windows(2).position(|w| w[0] == -w[1]) {
            return Err(Error::NotReduced(i));
        }
        Ok(Word { letters })
    }

    /// Freely reduces arbitrary letters.
    pub fn reduce(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// Word length `|x|`.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word { letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    pub fn mul(&self, other: &Word) -> Self {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// `|y⁻¹x|`, computed from the common prefix.
    pub fn distance(&self, y: &Word) -> usize {
        let common = self.letters.iter().zip(&y.letters).take_while(|(a, b)| a == b).count();
        self.len() + y.len() - 2 * common
    }

    pub(crate) fn push(&self, letter: i32) -> Option<Self> {
        if self.letters.last() == Some(&-letter) {
            return None;
        }
        let mut letters = self.letters.clone();
        letters.push(letter);
        Some(Word { letters })
    }

    pub(crate) fn pop(&self) -> Self {
        Word { letters: self.letters[..self.letters.len().saturating_sub(1)].to_vec() }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *l > 0 {
                write!(f, "a{l}")?;
            } else {
                write!(f, "a{}^-1", -l)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_distance() {
        let a = Word::new(vec![1, 2], 2).unwrap();
        let b = Word::new(vec![-2], 2).unwrap();
        assert_eq!(a.mul(&b), Word::new(vec![1], 2).unwrap());
        assert!(a.mul(&a.inverse()).is_identity());
        let a1 = Word::new(vec![1], 2).unwrap();
        let a2 = Word::new(vec![2], 2).unwrap();
        assert_eq!(a1.distance(&a2), 2);
        assert_eq!(a2.inverse().mul(&a1).len(), 2);
        assert_eq!(Word::new(vec![1, -1], 2), Err(Error::NotReduced(0)));
        assert!(Word::new(vec![3], 2).is_err());
        assert_eq!(Word::new(vec![1, -2], 2).unwrap().to_string(), "a1 a2^-1");
    }
}
