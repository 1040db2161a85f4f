use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rewrite::parse_header;
use crate::words::{Alphabet, Word};

/// A monoid presentation `Mon⟨A : lᵢ = rᵢ⟩`. Equations are unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    alphabet: Alphabet,
    equations: Vec<(Word, Word)>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, equations: Vec<(Word, Word)>) -> Result<Self> {
        for (l, r) in &equations {
            alphabet.check(l)?;
            alphabet.check(r)?;
        }
        Ok(Presentation {
            alphabet,
            equations,
        })
    }

    pub fn from_pairs(alphabet: &Alphabet, pairs: &[(&str, &str)]) -> Result<Self> {
        let equations = pairs
            .iter()
            .map(|(l, r)| Ok((Word::parse(l, alphabet)?, Word::parse(r, alphabet)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet.clone(), equations)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn equations(&self) -> &[(Word, Word)] {
        &self.equations
    }

    /// Length of the longest side of any equation.
    pub fn max_side_len(&self) -> usize {
        self.equations
            .iter()
            .map(|(l, r)| l.len().max(r.len()))
            .max()
            .unwrap_or(0)
    }

    /// Parses `letters: a b` followed by one `lhs = rhs` per line.
    pub fn parse(text: &str) -> Result<Self> {
        let (alphabet, body) = parse_header(text)?;
        let mut equations = Vec::new();
        for (line, content) in body {
            let (l, r) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `lhs = rhs`, got `{content}`"),
            })?;
            let at = |e: Error| Error::Parse {
                line,
                message: e.to_string(),
            };
            equations.push((
                Word::parse(l, &alphabet).map_err(at)?,
                Word::parse(r, &alphabet).map_err(at)?,
            ));
        }
        Self::new(alphabet, equations)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "letters: {}", self.alphabet)?;
        for (l, r) in &self.equations {
            writeln!(f, "{l} = {r}")?;
        }
        Ok(())
    }
}

impl Serialize for Presentation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Presentation", 2)?;
        st.serialize_field("letters", &self.alphabet.to_string())?;
        let eqs: Vec<String> = self
            .equations
            .iter()
            .map(|(l, r)| format!("{l} = {r}"))
            .collect();
        st.serialize_field("equations", &eqs)?;
        st.end()
    }
}
