//! Character vocabulary and token sequences.
//!
//! The recognizer reads 94 printable symbols: the 10 digits, 26 lowercase and
//! 26 uppercase letters, and the 32 ASCII punctuation characters
//! (`0x21..=0x2F`, `0x3A..=0x40`, `0x5B..=0x60`, `0x7B..=0x7E`). Three special
//! tokens are prepended to the index space, so a logits row has 97 entries:
//!
//! | index | symbol    |
//! |-------|-----------|
//! | 0     | `<pad>`   |
//! | 1     | `<start>` |
//! | 2     | `<end>`   |
//! | 3..   | printable characters, digits first, then `a-z`, `A-Z`, punctuation |

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const START: u32 = 1;
pub const END: u32 = 2;
/// Index of the first printable character.
pub const CHAR_OFFSET: u32 = 3;

/// Bijective map between the 94 printable symbols and token indices.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    chars: Vec<char>,
    index: HashMap<char, u32>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    /// The 94-symbol charset in index order.
    pub fn standard_charset() -> Vec<char> {
        let mut chars: Vec<char> = ('0'..='9').collect();
        chars.extend('a'..='z');
        chars.extend('A'..='Z');
        for range in [0x21..=0x2f_u32, 0x3a..=0x40, 0x5b..=0x60, 0x7b..=0x7e] {
            chars.extend(range.filter_map(char::from_u32));
        }
        chars
    }

    pub fn standard() -> Self {
        Self::from_charset(Self::standard_charset())
    }

    pub fn from_charset(chars: Vec<char>) -> Self {
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, CHAR_OFFSET + i as u32))
            .collect();
        Self { chars, index }
    }

    /// Number of printable symbols (94 for the standard charset).
    pub fn charset_size(&self) -> usize {
        self.chars.len()
    }

    /// Total index count including `<pad>`, `<start>`, `<end>`.
    pub fn total_size(&self) -> usize {
        self.chars.len() + CHAR_OFFSET as usize
    }

    /// The charset as a string, in index order.
    pub fn charset_string(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn index_of(&self, c: char) -> Option<u32> {
        self.index.get(&c).copied()
    }

    pub fn char_at(&self, token: u32) -> Option<char> {
        self.chars.get(token.checked_sub(CHAR_OFFSET)? as usize).copied()
    }

    /// Encode a transcript to printable-character indices (no specials).
    ///
    /// Fails listing every character outside the charset.
    pub fn encode_text(&self, text: &str) -> Result<Vec<u32>> {
        let mut offenders = Vec::new();
        let mut out = Vec::with_capacity(text.chars().count());
        for c in text.chars() {
            match self.index_of(c) {
                Some(i) => out.push(i),
                None => {
                    if !offenders.contains(&c) {
                        offenders.push(c);
                    }
                }
            }
        }
        if offenders.is_empty() {
            Ok(out)
        } else {
            Err(Error::UnknownCharacters {
                offenders,
                charset_size: self.charset_size(),
            })
        }
    }

    /// Inverse of [`encode_text`](Self::encode_text); rejects special indices.
    pub fn decode_tokens(&self, tokens: &[u32]) -> Result<String> {
        tokens
            .iter()
            .map(|&t| self.char_at(t).ok_or(Error::InvalidToken(t)))
            .collect()
    }
}

/// A validated token sequence: at most one `<end>`, followed only by `<pad>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<u32>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<u32>) -> Result<Self> {
        if let Some(end_pos) = tokens.iter().position(|&t| t == END) {
            if tokens[end_pos + 1..].iter().any(|&t| t != PAD) {
                return Err(Error::Config(
                    "token sequence has symbols after <end> that are not <pad>".into(),
                ));
            }
        }
        Ok(Self { tokens })
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Decoder input for teacher forcing: `<start>`, the characters, then pad
    /// out to `width`.
    pub fn teacher_input(text_tokens: &[u32], width: usize) -> Vec<u32> {
        let mut v = Vec::with_capacity(width);
        v.push(START);
        v.extend_from_slice(text_tokens);
        v.resize(width, PAD);
        v
    }

    /// Training label: the characters, `<end>`, then pad out to `width`.
    pub fn label(text_tokens: &[u32], width: usize) -> Vec<u32> {
        let mut v = Vec::with_capacity(width);
        v.extend_from_slice(text_tokens);
        v.push(END);
        v.resize(width, PAD);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charset_has_94_distinct_symbols() {
        let v = Vocabulary::standard();
        assert_eq!(v.charset_size(), 94);
        assert_eq!(v.total_size(), 97);
        // each printable maps to a distinct index and round-trips
        let mut seen = std::collections::HashSet::new();
        for c in Vocabulary::standard_charset() {
            let i = v.index_of(c).unwrap();
            assert!(seen.insert(i), "index {i} reused");
            assert_eq!(v.char_at(i), Some(c));
        }
        // specials never collide with printable characters
        for special in [PAD, START, END] {
            assert_eq!(v.char_at(special), None);
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let v = Vocabulary::standard();
        let toks = v.encode_text("abc").unwrap();
        assert_eq!(toks.len(), 3);
        assert_eq!(v.decode_tokens(&toks).unwrap(), "abc");
        assert_eq!(v.encode_text("").unwrap(), Vec::<u32>::new());
        let all: String = Vocabulary::standard_charset().into_iter().collect();
        let toks = v.encode_text(&all).unwrap();
        assert_eq!(v.decode_tokens(&toks).unwrap(), all);
    }

    #[test]
    fn unknown_characters_are_listed() {
        let v = Vocabulary::standard();
        let err = v.encode_text("ab c€").unwrap_err();
        match err {
            Error::UnknownCharacters { offenders, .. } => {
                assert_eq!(offenders, vec![' ', '€']);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn decode_rejects_specials() {
        let v = Vocabulary::standard();
        assert!(v.decode_tokens(&[END]).is_err());
    }

    #[test]
    fn token_sequence_invariant() {
        assert!(TokenSequence::new(vec![5, 6, END, PAD, PAD]).is_ok());
        assert!(TokenSequence::new(vec![5, END, 6]).is_err());
        assert!(TokenSequence::new(vec![5, 6]).is_ok());
    }

    #[test]
    fn teacher_pairs() {
        let text = [10, 11, 12];
        assert_eq!(TokenSequence::teacher_input(&text, 6), vec![START, 10, 11, 12, PAD, PAD]);
        assert_eq!(TokenSequence::label(&text, 6), vec![10, 11, 12, END, PAD, PAD]);
    }
}
