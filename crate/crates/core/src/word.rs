//! Words over the alphabet `{0, 1, ..., d}` where `0` is the time letter.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A single letter. `0` is the time letter, `1..=d` are spatial letters.
pub type Letter = u8;

/// The distinguished time letter.
pub const TIME: Letter = 0;

/// A finite sequence of letters.
///
/// Words are ordered first by tensor degree (length) and then
/// lexicographically with `0 < 1 < ... < d`, so that sorted collections
/// iterate degree by degree.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of letters (`#w`).
    pub fn tensor_degree(&self) -> usize {
        self.0.len()
    }

    /// `#w` plus the number of time letters (`|w|`).
    pub fn weighted_degree(&self) -> usize {
        self.0.len() + self.zero_count()
    }

    pub fn zero_count(&self) -> usize {
        self.0.iter().filter(|&&l| l == TIME).count()
    }

    pub fn contains_time(&self) -> bool {
        self.0.contains(&TIME)
    }

    pub fn ends_in_time(&self) -> bool {
        self.0.last() == Some(&TIME)
    }

    pub fn max_letter(&self) -> Letter {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// The word with every time letter removed.
    pub fn strip_time(&self) -> Word {
        Word(self.0.iter().copied().filter(|&l| l != TIME).collect())
    }

    /// The binary pattern of the word: nonzero letters replaced by `1`.
    pub fn binary_pattern(&self) -> Word {
        Word(self.0.iter().map(|&l| (l != TIME) as Letter).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn split_last(&self) -> Option<(Word, Letter)> {
        self.0
            .split_last()
            .map(|(&l, rest)| (Word(rest.to_vec()), l))
    }

    /// Checks that every letter lies in `{0, ..., d}`.
    pub fn check_alphabet(&self, d: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l as usize > d) {
            Some(&l) => Err(Error::LetterOutOfRange { letter: l, d }),
            None => Ok(()),
        }
    }

    /// All words of length exactly `len` over the letters `lo..=hi`, in
    /// lexicographic order.
    pub fn all_of_length(lo: Letter, hi: Letter, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * (hi - lo + 1) as usize);
            for w in &out {
                for l in lo..=hi {
                    let mut x = w.clone();
                    x.push(l);
                    next.push(x);
                }
            }
            out = next;
        }
        out
    }

    /// All words of length `0..=max_len` over `lo..=hi`, sorted by
    /// (degree, lexicographic).
    pub fn all_up_to(lo: Letter, hi: Letter, max_len: usize) -> Vec<Word> {
        (0..=max_len)
            .flat_map(|n| Word::all_of_length(lo, hi, n))
            .collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
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
            return f.write_str("∅");
        }
        for &l in &self.0 {
            write!(f, "{}", l)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl Word {
    /// Serialization key: letters as digits, the empty word as `""`.
    pub fn key(&self) -> String {
        self.0.iter().map(|l| char::from(b'0' + l)).collect()
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|x| x as Letter)
                    .ok_or_else(|| Error::Parse(format!("invalid letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(v: [Letter; N]) -> Self {
        Word(v.to_vec())
    }
}

/// Shorthand used heavily in tests: `w("0110")`.
pub fn w(s: &str) -> Word {
    s.parse().expect("valid word literal")
}

/// The order `<_0` on words of one equivalence class: fewer time letters
/// first, then lexicographic.
pub fn zero_order(a: &Word, b: &Word) -> Ordering {
    a.zero_count()
        .cmp(&b.zero_count())
        .then_with(|| a.letters().cmp(b.letters()))
}
