//! Alphabets and words of the free monoid, the concrete text syntax, and
//! factor/overlap search.
//!
//! Letters are single ASCII alphabetic characters stored as bytes. The text
//! syntax is a sequence of letters, each optionally raised to a positive power
//! (`a^2b^2ab^2`); parenthesized groups may also be powered (`a(bab)^2`).
//! Whitespace is ignored.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite ordered set of letters. The order is the default precedence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<u8>,
}

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(letters: I) -> Result<Self> {
        let mut out = Vec::new();
        for c in letters {
            if !c.is_ascii_alphabetic() {
                return Err(Error::InvalidLetter(c));
            }
            let b = c as u8;
            if out.contains(&b) {
                return Err(Error::DuplicateLetter(c));
            }
            out.push(b);
        }
        if out.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet { letters: out })
    }

    /// Parses a letter list such as `a b x` or `abx`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.chars().filter(|c| !c.is_whitespace() && *c != ','))
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, letter: u8) -> bool {
        self.letters.contains(&letter)
    }

    pub fn index_of(&self, letter: u8) -> Option<usize> {
        self.letters.iter().position(|&l| l == letter)
    }

    /// Returns a copy with `letter` appended (a no-op if already present).
    pub fn with_letter(&self, letter: char) -> Result<Self> {
        if self.contains(letter as u8) {
            return Ok(self.clone());
        }
        Self::new(self.chars().chain(std::iter::once(letter)))
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.letters.iter().map(|&b| b as char)
    }

    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.letters.iter().all(|&l| other.contains(l))
    }

    /// Checks that every letter of `w` belongs to this alphabet.
    pub fn check(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&l| !self.contains(l)) {
            Some(&l) => Err(Error::UnknownLetter {
                letter: l as char,
                alphabet: self.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// All words of length at most `max_len`, in shortlex order with respect
    /// to the alphabet order.
    pub fn words_up_to(&self, max_len: usize) -> WordsUpTo<'_> {
        WordsUpTo {
            alphabet: self,
            max_len,
            current: Some(Vec::new()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.chars().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Shortlex enumeration of words over an alphabet, see [`Alphabet::words_up_to`].
pub struct WordsUpTo<'a> {
    alphabet: &'a Alphabet,
    max_len: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for WordsUpTo<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let digits = self.current.as_mut()?;
        let letters = &self.alphabet.letters;
        let word = Word(digits.iter().map(|&d| letters[d]).collect());

        // odometer increment, growing the length on wrap-around
        let base = letters.len();
        let mut i = digits.len();
        loop {
            if i == 0 {
                if digits.len() == self.max_len {
                    self.current = None;
                } else {
                    let n = digits.len() + 1;
                    *digits = vec![0; n];
                }
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
        }
        Some(word)
    }
}

/// An element of the free monoid: a finite sequence of letters.
///
/// `Ord` is shortlex over the raw letter bytes (length first, then
/// lexicographic), which is well-founded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses the text syntax over `alphabet`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let w = Self::parse_free(text)?;
        alphabet.check(&w)?;
        Ok(w)
    }

    /// Parses the text syntax accepting any ASCII letter.
    pub fn parse_free(text: &str) -> Result<Self> {
        let mut parser = Parser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        };
        let w = parser.sequence(0)?;
        if parser.pos != parser.bytes.len() {
            return Err(parser.malformed());
        }
        Ok(Word(w))
    }

    /// Builds a word from raw letters, validating that each is an ASCII letter.
    pub fn from_letters(letters: &[u8]) -> Result<Self> {
        if let Some(&b) = letters.iter().find(|b| !b.is_ascii_alphabetic()) {
            return Err(Error::InvalidLetter(b as char));
        }
        Ok(Word(letters.to_vec()))
    }

    pub(crate) fn from_vec(letters: Vec<u8>) -> Self {
        debug_assert!(letters.iter().all(u8::is_ascii_alphabetic));
        Word(letters)
    }

    pub fn letter(c: char) -> Self {
        assert!(c.is_ascii_alphabetic(), "not an ASCII letter: {c:?}");
        Word(vec![c as u8])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn pow(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    pub fn factor(&self, start: usize, len: usize) -> Word {
        Word(self.0[start..start + len].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix(&self, len: usize) -> Word {
        Word(self.0[self.len() - len..].to_vec())
    }

    /// Replaces the factor `[pos, pos + len)` with `with`.
    pub fn splice(&self, pos: usize, len: usize, with: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() - len + with.len());
        v.extend_from_slice(&self.0[..pos]);
        v.extend_from_slice(&with.0);
        v.extend_from_slice(&self.0[pos + len..]);
        Word(v)
    }

    pub fn is_factor_at(&self, needle: &Word, pos: usize) -> bool {
        self.0.get(pos..pos + needle.len()) == Some(&needle.0[..])
    }

    pub fn contains_factor(&self, needle: &Word) -> bool {
        needle.is_empty() || self.0.windows(needle.len()).any(|w| w == &needle.0[..])
    }

    pub fn count(&self, letter: u8) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }

    /// Replaces every occurrence of `letter` by `image`.
    pub fn substitute(&self, letter: u8, image: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if l == letter {
                v.extend_from_slice(&image.0);
            } else {
                v.push(l);
            }
        }
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Prints powers compactly: `aabbabb` is written `a^2b^2ab^2`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        while i < self.0.len() {
            let c = self.0[i];
            let mut j = i + 1;
            while j < self.0.len() && self.0[j] == c {
                j += 1;
            }
            match j - i {
                1 => write!(f, "{}", c as char)?,
                n => write!(f, "{}^{n}", c as char)?,
            }
            i = j;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn malformed(&self) -> Error {
        Error::MalformedExponent {
            text: self.text.to_string(),
            offset: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn sequence(&mut self, depth: usize) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let Some(&c) = self.bytes.get(self.pos) else {
                return Ok(out);
            };
            let atom = match c {
                b'(' => {
                    self.pos += 1;
                    let inner = self.sequence(depth + 1)?;
                    self.skip_ws();
                    if self.bytes.get(self.pos) != Some(&b')') {
                        return Err(self.malformed());
                    }
                    self.pos += 1;
                    inner
                }
                b')' if depth > 0 => return Ok(out),
                c if c.is_ascii_alphabetic() => {
                    self.pos += 1;
                    vec![c]
                }
                b'^' | b')' => return Err(self.malformed()),
                c if c.is_ascii() => return Err(Error::InvalidLetter(c as char)),
                _ => {
                    let ch = self.text[self.pos..].chars().next().unwrap_or('?');
                    return Err(Error::InvalidLetter(ch));
                }
            };
            let n = self.exponent()?;
            for _ in 0..n {
                out.extend_from_slice(&atom);
            }
        }
    }

    fn exponent(&mut self) -> Result<usize> {
        self.skip_ws();
        if self.bytes.get(self.pos) != Some(&b'^') {
            return Ok(1);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let mut braced = false;
        if self.bytes.get(self.pos) == Some(&b'{') {
            braced = true;
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(self.malformed());
        }
        let n: usize = self.text[digits_start..self.pos]
            .parse()
            .map_err(|_| self.malformed())?;
        if braced {
            if self.bytes.get(self.pos) != Some(&b'}') {
                return Err(self.malformed());
            }
            self.pos += 1;
        }
        if n == 0 {
            return Err(Error::ZeroExponent {
                text: self.text.to_string(),
                offset: start,
            });
        }
        Ok(n)
    }
}

pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word> {
    Word::parse(text, alphabet)
}

pub fn print_word(w: &Word) -> String {
    w.to_string()
}

/// All start positions of `needle` in `haystack`, ascending, overlapping
/// occurrences included.
pub fn find_occurrences(haystack: &Word, needle: &Word) -> Result<Vec<usize>> {
    if needle.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(occurrences(haystack.letters(), needle.letters()).collect())
}

pub(crate) fn occurrences<'a>(
    haystack: &'a [u8],
    needle: &'a [u8],
) -> impl Iterator<Item = usize> + 'a {
    haystack
        .windows(needle.len())
        .enumerate()
        .filter(move |(_, w)| *w == needle)
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Overlap {
    /// The suffix of `u` of length `len` equals the prefix of `v` of length `len`.
    SuffixPrefix { len: usize },
    /// `v` occurs in `u` at `position`, touching neither end of `u`.
    Containment { position: usize },
}

/// Proper suffix-prefix overlaps of `u` with `v` (lengths `0 < t < min(|u|,|v|)`),
/// followed by occurrences of `v` strictly inside `u`.
pub fn overlaps(u: &Word, v: &Word) -> Result<Vec<Overlap>> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyWord);
    }
    let (a, b) = (u.letters(), v.letters());
    let mut out: Vec<Overlap> = (1..a.len().min(b.len()))
        .filter(|&t| a[a.len() - t..] == b[..t])
        .map(|len| Overlap::SuffixPrefix { len })
        .collect();
    if b.len() + 2 <= a.len() {
        out.extend(
            occurrences(a, b)
                .filter(|&p| p > 0 && p + b.len() < a.len())
                .map(|position| Overlap::Containment { position }),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> Alphabet {
        Alphabet::parse("a b").unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse_free(s).unwrap()
    }

    #[test]
    fn parse_expands_powers() {
        assert_eq!(w("abab").letters(), b"abab");
        let abx = Alphabet::parse("a b x").unwrap();
        assert_eq!(parse_word("x^2b^2", &abx).unwrap().letters(), b"xxbb");
        assert!(parse_word("", &ab()).unwrap().is_empty());
        assert_eq!(w("a(bab)^2a^2").letters(), b"ababbabaa");
        assert_eq!(w("x b^{2} x").letters(), b"xbbx");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_word("abc", &ab()),
            Err(Error::UnknownLetter { letter: 'c', .. })
        ));
        assert!(matches!(
            parse_word("a^0b", &ab()),
            Err(Error::ZeroExponent { .. })
        ));
        for bad in ["a^", "a^b", "^2", "a^2^", "(ab", "ab)", "a^{2"] {
            assert!(
                matches!(Word::parse_free(bad), Err(Error::MalformedExponent { .. })),
                "{bad}"
            );
        }
        assert!(matches!(
            Word::parse_free("a1"),
            Err(Error::InvalidLetter('1'))
        ));
    }

    #[test]
    fn print_compresses_runs() {
        assert_eq!(w("aabbabb").to_string(), "a^2b^2ab^2");
        assert_eq!(w("xxxbaxxxb").to_string(), "x^3bax^3b");
        assert_eq!(Word::empty().to_string(), "");
    }

    #[test]
    fn alphabet_invariants() {
        assert_eq!(Alphabet::parse(""), Err(Error::EmptyAlphabet));
        assert_eq!(Alphabet::parse("a b a"), Err(Error::DuplicateLetter('a')));
        let abx = ab().with_letter('x').unwrap();
        assert_eq!(abx.letters(), b"abx");
        assert_eq!(abx.to_string(), "a b x");
    }

    #[test]
    fn shortlex_enumeration() {
        let all: Vec<String> = ab().words_up_to(2).map(|w| w.to_string()).collect();
        assert_eq!(all, ["", "a", "b", "a^2", "ab", "ba", "b^2"]);
        assert_eq!(ab().words_up_to(0).count(), 1);
        assert_eq!(ab().words_up_to(10).count(), 2047);
    }

    #[test]
    fn occurrences_examples() {
        assert_eq!(find_occurrences(&w("abab"), &w("ab")).unwrap(), vec![0, 2]);
        assert_eq!(find_occurrences(&w("aaa"), &w("aa")).unwrap(), vec![0, 1]);
        assert_eq!(
            find_occurrences(&w("x^2bx^2bx"), &w("x^2bx")).unwrap(),
            vec![0, 3]
        );
        assert_eq!(
            find_occurrences(&w("ab"), &Word::empty()),
            Err(Error::EmptyWord)
        );
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(
            overlaps(&w("abab"), &w("abab")).unwrap(),
            vec![Overlap::SuffixPrefix { len: 2 }]
        );
        assert!(overlaps(&w("abab^2"), &w("abab^2")).unwrap().is_empty());
        assert!(overlaps(&w("ab"), &w("b")).unwrap().is_empty());
        assert_eq!(
            overlaps(&w("ab"), &w("ba")).unwrap(),
            vec![Overlap::SuffixPrefix { len: 1 }]
        );
        assert_eq!(
            overlaps(&w("abba"), &w("b")).unwrap(),
            vec![
                Overlap::Containment { position: 1 },
                Overlap::Containment { position: 2 }
            ]
        );
        assert_eq!(overlaps(&w("ab"), &Word::empty()), Err(Error::EmptyWord));
    }

    #[test]
    fn relator_self_overlap_matches_condition() {
        for al in 1..=4 {
            for be in 1..=4 {
                for ga in 1..=4 {
                    for de in 1..=4 {
                        let rel = w("a")
                            .pow(al)
                            .concat(&w("b").pow(be))
                            .concat(&w("a").pow(ga))
                            .concat(&w("b").pow(de));
                        let self_overlaps = overlaps(&rel, &rel).unwrap();
                        assert_eq!(
                            self_overlaps.is_empty(),
                            !(be >= de && ga >= al),
                            "({al},{be},{ga},{de})"
                        );
                    }
                }
            }
        }
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(prop_oneof![Just(b'a'), Just(b'b'), Just(b'x')], 0..max)
            .prop_map(Word)
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(x in word_strategy(24)) {
            prop_assert_eq!(Word::parse_free(&x.to_string()).unwrap(), x);
        }

        #[test]
        fn occurrences_match_naive_scan(h in word_strategy(20), n in word_strategy(4)) {
            prop_assume!(!n.is_empty());
            let naive: Vec<usize> = (0..h.len())
                .filter(|&p| p + n.len() <= h.len() && h.letters()[p..p + n.len()] == *n.letters())
                .collect();
            prop_assert_eq!(find_occurrences(&h, &n).unwrap(), naive);
        }
    }
}
