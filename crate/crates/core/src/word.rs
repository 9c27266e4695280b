//! Words of the free product `V1 * V2`.
//!
//! A word is an alternating sequence of non-root letters. The empty word is
//! the root `o`; root letters are never stored, so appending a root symbol is
//! the identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of one of the two factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    One,
    Two,
}

impl Factor {
    pub const BOTH: [Factor; 2] = [Factor::One, Factor::Two];

    pub fn other(self) -> Factor {
        match self {
            Factor::One => Factor::Two,
            Factor::Two => Factor::One,
        }
    }

    /// 0-based slot, for indexing `[T; 2]` arrays.
    pub fn index(self) -> usize {
        match self {
            Factor::One => 0,
            Factor::Two => 1,
        }
    }

    /// 1-based id as used in configuration files.
    pub fn id(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_id(id: u8) -> Option<Factor> {
        match id {
            1 => Some(Factor::One),
            2 => Some(Factor::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// A non-root vertex of one factor. Vertex 0 of every factor is its root and
/// never appears in a letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub factor: Factor,
    pub vertex: u16,
}

impl Letter {
    pub fn new(factor: Factor, vertex: u16) -> Letter {
        debug_assert!(vertex != 0, "root vertices are not letters");
        Letter { factor, vertex }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn root() -> Word {
        Word(Vec::new())
    }

    /// Builds a word from letters, rejecting root letters and consecutive
    /// letters from the same factor.
    pub fn from_letters(letters: Vec<Letter>) -> Result<Word> {
        for pair in letters.windows(2) {
            if pair[0].factor == pair[1].factor {
                return Err(Error::IncompatibleLetters {
                    factor: pair[0].factor.id(),
                });
            }
        }
        if letters.iter().any(|l| l.vertex == 0) {
            return Err(Error::Parse("root symbol inside a word".into()));
        }
        Ok(Word(letters))
    }

    pub fn single(letter: Letter) -> Word {
        Word(vec![letter])
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Word length `||u||`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// `delta(u)`: the factor of the last letter.
    pub fn delta(&self) -> Result<Factor> {
        self.last().map(|l| l.factor).ok_or(Error::EmptyWord)
    }

    /// Partial composition `u v`.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        match (self.last(), other.first()) {
            (Some(a), Some(b)) if a.factor == b.factor => Err(Error::IncompatibleLetters {
                factor: a.factor.id(),
            }),
            _ => {
                let mut letters = Vec::with_capacity(self.len() + other.len());
                letters.extend_from_slice(&self.0);
                letters.extend_from_slice(&other.0);
                Ok(Word(letters))
            }
        }
    }

    /// True iff `prefix` is a prefix of `self`, i.e. `self` lies in the cone `C(prefix)`.
    pub fn in_cone(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.len())].to_vec())
    }

    /// Letters at 1-based positions `start..=end`.
    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start - 1..end].to_vec())
    }

    pub(crate) fn push(&mut self, letter: Letter) {
        debug_assert!(self.last().is_none_or(|l| l.factor != letter.factor));
        self.0.push(letter);
    }

    pub(crate) fn pop(&mut self) -> Option<Letter> {
        self.0.pop()
    }

    pub(crate) fn replace_last(&mut self, letter: Letter) {
        let last = self.0.last_mut().expect("replace on empty word");
        debug_assert_eq!(last.factor, letter.factor);
        *last = letter;
    }

    /// Successor obtained by moving the active coordinate of `factor` to `vertex`.
    ///
    /// With `delta(self) == factor` this rewrites the last letter (or removes
    /// it when `vertex` is the root); otherwise it appends a letter from a
    /// fresh copy of the factor.
    pub fn moved(&self, factor: Factor, vertex: u16) -> Word {
        let mut w = self.clone();
        match self.last() {
            Some(l) if l.factor == factor => {
                if vertex == 0 {
                    w.pop();
                } else {
                    w.replace_last(Letter::new(factor, vertex));
                }
            }
            _ => {
                if vertex != 0 {
                    w.push(Letter::new(factor, vertex));
                }
            }
        }
        w
    }

    /// Vertex of `factor` that is currently active at this word: the last
    /// letter if it belongs to `factor`, else the root of a fresh copy.
    pub fn active_vertex(&self, factor: Factor) -> u16 {
        match self.last() {
            Some(l) if l.factor == factor => l.vertex,
            _ => 0,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "o");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}:{}", l.factor.id(), l.vertex)?;
        }
        Ok(())
    }
}
