//! Words in the free monoid on generators `g1, ..., gd`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{NcError, Result};

/// A word `g_{i1} ... g_{il}` stored as its 1-based letter indices.
///
/// Words order by length first, then lexicographically on letters, so a
/// `BTreeMap<Word, _>` iterates degree by degree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.iter().any(|&l| l == 0) {
            return Err(NcError::argument("word letters are 1-based"));
        }
        Ok(Word(letters))
    }

    pub fn letter(i: usize) -> Self {
        assert!(i >= 1, "word letters are 1-based");
        Word(vec![i])
    }

    /// `g_i^k`.
    pub fn power(i: usize, k: usize) -> Self {
        assert!(i >= 1, "word letters are 1-based");
        Word(vec![i; k])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Errors unless every letter lies in `1..=d`.
    pub fn check(&self, d: usize) -> Result<()> {
        if self.max_letter() > d {
            return Err(NcError::argument(format!("word {self} uses a letter beyond d = {d}")));
        }
        Ok(())
    }

    /// `g_{il} ... g_{i1}`.
    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn push(&self, letter: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    pub fn prepend(&self, letter: usize) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }

    /// Inserts `letter` so that it becomes the letter at 0-based position `pos`.
    pub fn insert(&self, pos: usize, letter: usize) -> Word {
        let mut letters = self.0.clone();
        letters.insert(pos, letter);
        Word(letters)
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k..].to_vec())
    }
}

pub fn word_length(w: &Word) -> usize {
    w.len()
}

pub fn word_transpose(w: &Word) -> Word {
    w.transpose()
}

pub fn word_concat(u: &Word, v: &Word) -> Word {
    u.concat(v)
}

/// All `d^l` words of length `l`, lexicographic in their letters.
pub fn words_of_length(d: usize, l: usize) -> Result<Vec<Word>> {
    if d < 1 {
        return Err(NcError::argument("need at least one generator"));
    }
    let count = d
        .checked_pow(l as u32)
        .ok_or_else(|| NcError::argument(format!("{d}^{l} words is too many to enumerate")))?;
    let mut out = Vec::with_capacity(count);
    let mut letters = vec![1usize; l];
    loop {
        out.push(Word(letters.clone()));
        // Odometer increment from the last position.
        let mut pos = l;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if letters[pos] < d {
                letters[pos] += 1;
                break;
            }
            letters[pos] = 1;
        }
    }
}

/// Words of every length `0..=max_len`, in graded order.
pub fn words_up_to(d: usize, max_len: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for l in 0..=max_len {
        out.extend(words_of_length(d, l)?);
    }
    Ok(out)
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "g{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Word {
    type Err = NcError;

    /// Accepts `e` (or the empty string) and `g1.g2.g1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let bad = || NcError::argument(format!("invalid word '{s}'"));
        let letters = s
            .split('.')
            .map(|part| {
                part.strip_prefix('g')
                    .and_then(|digits| digits.parse::<usize>().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(bad)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word(letters))
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
