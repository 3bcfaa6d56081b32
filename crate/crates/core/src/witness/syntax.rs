//! Concrete syntax for prenex sentences over groups.
//!
//! ```text
//! sentence := block+ matrix
//! block    := ("E"|"A") ident+
//! matrix   := clause ("&" clause)*
//! clause   := "(" atom ("|" atom)* ")"
//! atom     := word ("="|"!=") word
//! word     := "1" | factor (("*")? factor)*
//! factor   := (ident | "$"ident | "[" word "," word "]") ("^" int)?
//! ```
//! The right-hand side of an atom is usually the literal `1`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub quantifier: Quantifier,
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorBase {
    Var(String),
    Const(String),
    Commutator(VarWord, VarWord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub base: FactorBase,
    pub exponent: i64,
}

/// A word in variables and constants; empty means the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VarWord(pub Vec<Factor>);

impl VarWord {
    pub fn inverse(&self) -> VarWord {
        VarWord(
            self.0
                .iter()
                .rev()
                .map(|f| Factor {
                    base: f.base.clone(),
                    exponent: -f.exponent,
                })
                .collect(),
        )
    }

    pub fn concat(&self, other: &VarWord) -> VarWord {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        VarWord(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn visit_names<F: FnMut(&FactorBase)>(&self, f: &mut F) {
        for factor in &self.0 {
            f(&factor.base);
            if let FactorBase::Commutator(u, v) = &factor.base {
                u.visit_names(f);
                v.visit_names(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub lhs: VarWord,
    pub rhs: VarWord,
    pub negated: bool,
}

impl Atom {
    /// The single word whose (non-)triviality the atom asserts.
    pub fn word(&self) -> VarWord {
        if self.rhs.is_one() {
            self.lhs.clone()
        } else {
            self.lhs.concat(&self.rhs.inverse())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause(pub Vec<Atom>);

/// A prenex sentence: quantifier blocks plus a conjunction of disjunctive
/// clauses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub blocks: Vec<Block>,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Quant(Quantifier),
    Ident(String),
    Const(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    Amp,
    Eq,
    Neq,
    Caret,
    Star,
    One,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                toks.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((start, Tok::RParen));
                i += 1;
            }
            '[' => {
                toks.push((start, Tok::LBracket));
                i += 1;
            }
            ']' => {
                toks.push((start, Tok::RBracket));
                i += 1;
            }
            ',' => {
                toks.push((start, Tok::Comma));
                i += 1;
            }
            '|' => {
                toks.push((start, Tok::Pipe));
                i += 1;
            }
            '&' => {
                toks.push((start, Tok::Amp));
                i += 1;
            }
            '^' => {
                toks.push((start, Tok::Caret));
                i += 1;
            }
            '*' => {
                toks.push((start, Tok::Star));
                i += 1;
            }
            '=' => {
                toks.push((start, Tok::Eq));
                i += 1;
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    toks.push((start, Tok::Neq));
                    i += 2;
                } else {
                    return Err(Error::parse(start, "expected != after !"));
                }
            }
            '$' => {
                i += 1;
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                if i == s {
                    return Err(Error::parse(start, "expected constant name after $"));
                }
                toks.push((start, Tok::Const(chars[s..i].iter().collect())));
            }
            '-' => {
                let s = i + 1;
                let mut j = s;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == s {
                    return Err(Error::parse(start, "expected digits after -"));
                }
                let n: i64 = chars[s..j]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::parse(start, "integer overflow"))?;
                toks.push((start, Tok::Int(-n)));
                i = j;
            }
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                if text == "1" {
                    toks.push((start, Tok::One));
                } else {
                    let n: i64 = text
                        .parse()
                        .map_err(|_| Error::parse(start, "integer overflow"))?;
                    toks.push((start, Tok::Int(n)));
                }
                i = j;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                match name.as_str() {
                    "E" => toks.push((start, Tok::Quant(Quantifier::Exists))),
                    "A" => toks.push((start, Tok::Quant(Quantifier::Forall))),
                    _ => toks.push((start, Tok::Ident(name))),
                }
                i = j;
            }
            _ => return Err(Error::parse(start, format!("unexpected character {c:?}"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(0, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let at = self.here();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => Err(Error::parse(at, format!("expected {what}"))),
        }
    }

    fn parse_word(&mut self) -> Result<VarWord> {
        let mut factors: Vec<Factor> = Vec::new();
        if self.peek() == Some(&Tok::One) {
            self.next();
            return Ok(VarWord(factors));
        }
        loop {
            let at = self.here();
            let base = match self.peek() {
                Some(Tok::Ident(_)) => {
                    let Some(Tok::Ident(name)) = self.next() else {
                        unreachable!()
                    };
                    FactorBase::Var(name)
                }
                Some(Tok::Const(_)) => {
                    let Some(Tok::Const(name)) = self.next() else {
                        unreachable!()
                    };
                    FactorBase::Const(name)
                }
                Some(Tok::LBracket) => {
                    self.next();
                    let u = self.parse_word()?;
                    self.expect(Tok::Comma, "',' in commutator")?;
                    let v = self.parse_word()?;
                    self.expect(Tok::RBracket, "']' closing commutator")?;
                    FactorBase::Commutator(u, v)
                }
                _ => {
                    if factors.is_empty() {
                        return Err(Error::parse(at, "expected a word"));
                    }
                    break;
                }
            };
            let mut exponent = 1i64;
            if self.peek() == Some(&Tok::Caret) {
                self.next();
                let at = self.here();
                exponent = match self.next() {
                    Some(Tok::Int(n)) => n,
                    Some(Tok::One) => 1,
                    _ => return Err(Error::parse(at, "expected integer exponent")),
                };
            }
            factors.push(Factor { base, exponent });
            if self.peek() == Some(&Tok::Star) {
                self.next();
                continue;
            }
            // juxtaposition continues a word only for word-ish tokens
            match self.peek() {
                Some(Tok::Ident(_)) | Some(Tok::Const(_)) | Some(Tok::LBracket) => continue,
                _ => break,
            }
        }
        Ok(VarWord(factors))
    }

    fn parse_atom(&mut self) -> Result<Atom> {
        let lhs = self.parse_word()?;
        let at = self.here();
        let negated = match self.next() {
            Some(Tok::Eq) => false,
            Some(Tok::Neq) => true,
            _ => return Err(Error::parse(at, "expected = or !=")),
        };
        let rhs = self.parse_word()?;
        Ok(Atom { lhs, rhs, negated })
    }

    fn parse_clause(&mut self) -> Result<Clause> {
        self.expect(Tok::LParen, "'(' opening clause")?;
        let mut atoms = vec![self.parse_atom()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.next();
            atoms.push(self.parse_atom()?);
        }
        self.expect(Tok::RParen, "')' closing clause")?;
        Ok(Clause(atoms))
    }
}

/// Parse a prenex sentence and resolve binders: every matrix variable must
/// be bound exactly once in the prefix.
pub fn parse_sentence(text: &str) -> Result<Sentence> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut blocks: Vec<Block> = Vec::new();
    while let Some(Tok::Quant(q)) = p.peek().cloned() {
        p.next();
        let mut vars = Vec::new();
        while let Some(Tok::Ident(_)) = p.peek() {
            let Some(Tok::Ident(name)) = p.next() else {
                unreachable!()
            };
            vars.push(name);
        }
        if vars.is_empty() {
            return Err(Error::parse(p.here(), "quantifier block without variables"));
        }
        blocks.push(Block {
            quantifier: q,
            vars,
        });
    }
    if blocks.is_empty() {
        return Err(Error::parse(0, "sentence must start with a quantifier block"));
    }
    let mut clauses = vec![p.parse_clause()?];
    while p.peek() == Some(&Tok::Amp) {
        p.next();
        clauses.push(p.parse_clause()?);
    }
    if p.peek().is_some() {
        return Err(Error::parse(p.here(), "trailing tokens after matrix"));
    }
    let s = Sentence { blocks, clauses };
    resolve_binders(&s)?;
    Ok(s)
}

fn resolve_binders(s: &Sentence) -> Result<()> {
    let mut bound: Vec<&str> = Vec::new();
    for b in &s.blocks {
        for v in &b.vars {
            if bound.contains(&v.as_str()) {
                return Err(Error::parse(0, format!("variable {v} bound twice")));
            }
            bound.push(v);
        }
    }
    let mut err: Option<String> = None;
    for c in &s.clauses {
        for a in &c.0 {
            for w in [&a.lhs, &a.rhs] {
                w.visit_names(&mut |base| {
                    if let FactorBase::Var(name) = base {
                        if !bound.contains(&name.as_str()) && err.is_none() {
                            err = Some(name.clone());
                        }
                    }
                });
            }
        }
    }
    match err {
        Some(name) => Err(Error::parse(0, format!("unbound variable {name}"))),
        None => Ok(()),
    }
}

impl fmt::Display for VarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|factor| {
                let base = match &factor.base {
                    FactorBase::Var(v) => v.clone(),
                    FactorBase::Const(c) => format!("${c}"),
                    FactorBase::Commutator(u, v) => format!("[{u},{v}]"),
                };
                if factor.exponent == 1 {
                    base
                } else {
                    format!("{base}^{}", factor.exponent)
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.lhs,
            if self.negated { "!=" } else { "=" },
            self.rhs
        )
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let q = match b.quantifier {
                Quantifier::Exists => "E",
                Quantifier::Forall => "A",
            };
            write!(f, "{q} {} ", b.vars.join(" "))?;
        }
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let atoms: Vec<String> = c.0.iter().map(|a| a.to_string()).collect();
                format!("( {} )", atoms.join(" | "))
            })
            .collect();
        write!(f, "{}", clauses.join(" & "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_basic() {
        let s = parse_sentence("E y A x ( [x,y] = 1 | x = 1 )").unwrap();
        assert_eq!(s.blocks.len(), 2);
        assert_eq!(s.blocks[0].quantifier, Quantifier::Exists);
        assert_eq!(s.blocks[0].vars, vec!["y"]);
        assert_eq!(s.clauses.len(), 1);
        assert_eq!(s.clauses[0].0.len(), 2);
    }

    #[test]
    fn parse_root_sentence() {
        let s = parse_sentence("A x E y ( y^5 = x )").unwrap();
        assert_eq!(s.blocks[0].quantifier, Quantifier::Forall);
        let atom = &s.clauses[0].0[0];
        assert!(!atom.negated);
        assert_eq!(atom.lhs.0[0].exponent, 5);
        assert!(!atom.rhs.is_one());
    }

    #[test]
    fn parse_errors() {
        assert!(parse_sentence("E y ( x = 1 )").is_err()); // unbound x
        assert!(parse_sentence("( x = 1 )").is_err()); // no prefix
        assert!(parse_sentence("E x E x ( x = 1 )").is_err()); // double bind
        assert!(parse_sentence("E x ( x = )").is_err());
        assert!(parse_sentence("E x ( x ! 1 )").is_err());
    }

    #[test]
    fn print_reparses() {
        for text in [
            "E y A x ( [x,y] = 1 | x = 1 )",
            "A x E y ( y^5 = x )",
            "A x ( x = 1 )",
            "E y ( y != 1 ) & ( y^2 = 1 )",
            "E y A x ( x*y^-2*$c = 1 | [x,y^2] != 1 )",
        ] {
            let s = parse_sentence(text).unwrap();
            let printed = s.to_string();
            let s2 = parse_sentence(&printed).unwrap();
            assert_eq!(s, s2, "round trip failed for {text} -> {printed}");
        }
    }

    #[test]
    fn atom_word_merges_sides() {
        let s = parse_sentence("A x E y ( y^5 = x )").unwrap();
        let w = s.clauses[0].0[0].word();
        assert_eq!(w.0.len(), 2);
        assert_eq!(w.0[1].exponent, -1);
    }
}
