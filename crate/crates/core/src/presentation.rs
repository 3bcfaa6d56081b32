//! Finite presentations and the line-based presentation file format.

use crate::error::{Error, Result};
use crate::words::{Alphabet, Word};
use serde::{Deserialize, Serialize};

/// Generators plus relator words. Doubles as a quotient-group handle and as
/// the witness group of a sentence disjunct. Relators are reduced words;
/// they need not be cyclically reduced here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            if let Some(g) = r.max_gen() {
                if g >= alphabet.rank() {
                    return Err(Error::invalid(format!(
                        "relator uses generator {g} beyond rank {}",
                        alphabet.rank()
                    )));
                }
            }
        }
        Ok(Presentation { alphabet, relators })
    }

    pub fn free(alphabet: Alphabet) -> Self {
        Presentation {
            alphabet,
            relators: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    /// Parse the line-based format: `gens: a b c`, one `rel: <word>` per
    /// relator, `#` comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut alphabet: Option<Alphabet> = None;
        let mut relators: Vec<Word> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("gens:") {
                if alphabet.is_some() {
                    return Err(Error::parse(lineno, "duplicate gens: line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
                alphabet = Some(Alphabet::new(names)?);
            } else if let Some(rest) = line.strip_prefix("rel:") {
                let alpha = alphabet
                    .as_ref()
                    .ok_or_else(|| Error::parse(lineno, "rel: before gens:"))?;
                relators.push(Word::parse(alpha, rest.trim())?);
            } else {
                return Err(Error::parse(lineno, format!("unrecognized line {line:?}")));
            }
        }
        let alphabet = alphabet.ok_or_else(|| Error::parse(0, "missing gens: line"))?;
        Presentation::new(alphabet, relators)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("gens: {}\n", self.alphabet.names().join(" "));
        for r in &self.relators {
            out.push_str(&format!("rel: {}\n", r.display(&self.alphabet)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let text = "# surface-like\ngens: a b c d\nrel: abABcdCD\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.rank(), 4);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.relators[0].len(), 8);
        let p2 = Presentation::parse(&p.to_text()).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn parse_errors() {
        assert!(Presentation::parse("rel: ab\n").is_err());
        assert!(Presentation::parse("gens: a a\n").is_err());
        assert!(Presentation::parse("gens: a b\nrel: c\n").is_err());
        assert!(Presentation::parse("nonsense\n").is_err());
    }
}
