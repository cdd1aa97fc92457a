use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Letters of the alphabet `S = {1, 2, 3}`.
pub const LETTERS: [u8; 3] = [1, 2, 3];

/// Address of a cell: a finite word over `{1, 2, 3}`.
///
/// The cell of `w = w1 w2 ... wm` is the image `G_{w1} o ... o G_{wm}` of the
/// whole ladder; the empty word addresses the top cell.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if let Some(bad) = letters.iter().find(|l| !(1..=3).contains(*l)) {
            return Err(Error::invalid(format!("letter {bad} is not in {{1,2,3}}")));
        }
        Ok(Self(letters))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// The constant word `letter^len`.
    pub fn repeat(letter: u8, len: usize) -> Result<Self> {
        Self::new(vec![letter; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// `self` followed by `letter`.
    pub fn child(&self, letter: u8) -> Self {
        debug_assert!((1..=3).contains(&letter));
        let mut v = self.0.clone();
        v.push(letter);
        Self(v)
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    /// The first `k` letters.
    pub fn prefix(&self, k: usize) -> Self {
        Self(self.0[..k.min(self.0.len())].to_vec())
    }

    pub(crate) fn split_last(&self) -> Option<(Word, u8)> {
        let (&l, rest) = self.0.split_last()?;
        Some((Word(rest.to_vec()), l))
    }
}

/// All `3^n` words of length `n` in lexicographic order.
pub fn words_of_length(n: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|w| LETTERS.iter().map(move |&l| w.child(l)))
            .collect();
    }
    out
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Digit strings such as `"132"`; `""`, `"-"` and `"e"` denote the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" || s == "e" || s == "∅" {
            return Ok(Self::empty());
        }
        let letters = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                '3' => Ok(3),
                other => Err(Error::invalid(format!(
                    "bad letter {other:?} in word {s:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical address of the node `G_word(p_corner)`.
///
/// `G_{w i}(p_j) = G_{w j}(p_i)` for `i != j`; the canonical representative is
/// the one whose last letter is not larger than the corner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    word: Word,
    corner: u8,
}

impl VertexId {
    pub fn new(word: Word, corner: u8) -> Result<Self> {
        if !(1..=3).contains(&corner) {
            return Err(Error::invalid(format!(
                "corner {corner} is not in {{1,2,3}}"
            )));
        }
        Ok(Self::canonical(word, corner))
    }

    fn canonical(word: Word, corner: u8) -> Self {
        match word.split_last() {
            Some((prefix, last)) if last > corner => Self {
                word: prefix.child(corner),
                corner: last,
            },
            _ => Self { word, corner },
        }
    }

    /// One of the three level-0 corners.
    pub fn top(corner: u8) -> Self {
        debug_assert!((1..=3).contains(&corner));
        Self {
            word: Word::empty(),
            corner,
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn corner(&self) -> u8 {
        self.corner
    }

    /// The other representation of an identified node, if any.
    pub fn alias(&self) -> Option<(Word, u8)> {
        match self.word.split_last() {
            Some((prefix, last)) if last != self.corner => Some((prefix.child(self.corner), last)),
            _ => None,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};{})", self.word, self.corner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn words_enumerate_lexicographically() {
        let w2 = words_of_length(2);
        assert_eq!(w2.len(), 9);
        assert_eq!(w2[0].to_string(), "11");
        assert_eq!(w2[5].to_string(), "23");
        assert_eq!(words_of_length(0), vec![Word::empty()]);
    }

    #[test]
    fn word_parsing() {
        assert_eq!("132".parse::<Word>().unwrap().letters(), &[1, 3, 2]);
        assert!("".parse::<Word>().unwrap().is_empty());
        assert!("-".parse::<Word>().unwrap().is_empty());
        assert!("14".parse::<Word>().is_err());
        assert!(Word::new(vec![0]).is_err());
    }

    #[test]
    fn identification_p12() {
        let a = VertexId::new(Word::new(vec![1]).unwrap(), 2).unwrap();
        let b = VertexId::new(Word::new(vec![2]).unwrap(), 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.word().letters(), &[1]);
        assert_eq!(a.corner(), 2);
        // p_ii is not identified with anything.
        let p11 = VertexId::new(Word::new(vec![1]).unwrap(), 1).unwrap();
        assert_eq!(p11.alias(), None);
        assert!(VertexId::new(Word::empty(), 4).is_err());
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(1u8..=3, 0..=max).prop_map(|v| Word::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn identification_holds_up_to_level_six(w in word_strategy(5), i in 1u8..=3, j in 1u8..=3) {
            prop_assume!(i != j);
            let a = VertexId::new(w.child(i), j).unwrap();
            let b = VertexId::new(w.child(j), i).unwrap();
            prop_assert_eq!(&a, &b);
            let again = VertexId::new(a.word().clone(), a.corner()).unwrap();
            prop_assert_eq!(&again, &a);
            prop_assert!(a.word().last().unwrap() <= a.corner());
        }

        #[test]
        fn word_display_round_trips(w in word_strategy(8)) {
            prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        }
    }
}
