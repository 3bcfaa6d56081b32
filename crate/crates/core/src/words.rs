//! Free-group word algebra over a signed generator alphabet, plus the exact
//! geometry of the Cayley tree: distances, Gromov products, translation
//! lengths and displacement energies.

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Ordered list of generator names. Names are distinct ASCII identifiers;
/// single lowercase letters double as their own word-syntax symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '$' || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::invalid("alphabet must have rank >= 1"));
        }
        for n in &names {
            if !valid_name(n) {
                return Err(Error::invalid(format!("bad generator name {n:?}")));
            }
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("duplicate generator name {n:?}")));
            }
        }
        Ok(Alphabet { names })
    }

    /// Default alphabet of the given rank. Rank 4 is named `s,t,x,y` (the
    /// tower convention: two elements to absorb, one designated free pair);
    /// other ranks use `a,b,c,...` and positional brackets past 26.
    pub fn with_rank(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::invalid("alphabet must have rank >= 1"));
        }
        let names = if rank == 4 {
            vec!["s".into(), "t".into(), "x".into(), "y".into()]
        } else {
            (0..rank)
                .map(|i| {
                    if i < 26 {
                        ((b'a' + i as u8) as char).to_string()
                    } else {
                        format!("g{i}")
                    }
                })
                .collect()
        };
        Alphabet::new(names)
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Generator index for a single lowercase letter, resolved against names.
    fn index_of_letter(&self, ch: char) -> Option<usize> {
        let s = ch.to_string();
        self.names.iter().position(|n| *n == s)
    }
}

impl Serialize for Alphabet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.names.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(d)?;
        Alphabet::new(names).map_err(D::Error::custom)
    }
}

/// One signed letter: a generator or its inverse. Encoded as a nonzero
/// integer, `+(i+1)` for generator `i`, `-(i+1)` for its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i32);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Letter {
        let code = (gen as i32) + 1;
        Letter(if inverse { -code } else { code })
    }

    pub fn gen(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn code(self) -> i32 {
        self.0
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "!{}", self.gen())
        } else {
            write!(f, "{}", self.gen())
        }
    }
}

/// A freely reduced word. The empty word is the identity. All constructors
/// reduce; the invariant `no adjacent x x^-1` always holds.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    /// Free reduction of a raw letter sequence: the unique reduced form.
    pub fn reduce(raw: &[Letter]) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    /// Free reduction with alphabet-range validation of generator indices.
    pub fn reduce_in(alphabet: &Alphabet, raw: &[Letter]) -> Result<Word> {
        for &l in raw {
            if l.gen() >= alphabet.rank() {
                return Err(Error::invalid(format!(
                    "generator index {} out of range (rank {})",
                    l.gen(),
                    alphabet.rank()
                )));
            }
        }
        Ok(Word::reduce(raw))
    }

    pub fn generator(gen: usize) -> Word {
        Word {
            letters: vec![Letter::new(gen, false)],
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced product `self * other`. Only the seam can cancel.
    pub fn mul(&self, other: &Word) -> Word {
        let mut left = self.letters.clone();
        let mut i = 0usize;
        while i < other.letters.len() {
            let l = other.letters[i];
            if left.last() == Some(&l.inverse()) {
                left.pop();
                i += 1;
            } else {
                break;
            }
        }
        left.extend_from_slice(&other.letters[i..]);
        Word { letters: left }
    }

    pub fn mul_all(words: &[&Word]) -> Word {
        let mut acc = Word::identity();
        for w in words {
            acc = acc.mul(w);
        }
        acc
    }

    pub fn pow(&self, k: i64) -> Word {
        if k == 0 || self.is_identity() {
            return Word::identity();
        }
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// `g * self * g^-1`, reduced.
    pub fn conjugate(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    /// Maximal generator index used, if any.
    pub fn max_gen(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.gen()).max()
    }

    /// Exponent-sum vector against an alphabet of the given rank.
    pub fn exponent_vector(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.letters {
            if l.is_inverse() {
                v[l.gen()] -= 1;
            } else {
                v[l.gen()] += 1;
            }
        }
        v
    }

    /// Leftmost rotation by `k`: `w[k..] w[..k]`. Caller keeps cyclic
    /// reducedness; rotations of a cyclically reduced word stay reduced.
    pub fn rotated(&self, k: usize) -> Word {
        let n = self.letters.len();
        if n == 0 {
            return Word::identity();
        }
        let k = k % n;
        let mut letters = Vec::with_capacity(n);
        letters.extend_from_slice(&self.letters[k..]);
        letters.extend_from_slice(&self.letters[..k]);
        Word { letters }
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => f != l.inverse() || self.letters.len() == 1,
            _ => true,
        }
    }

    /// Parse the compact text syntax: lowercase letter = generator named by
    /// that letter, uppercase = its inverse, optional decimal exponent after
    /// a letter, `[g7]`/`[G7]` positional access, whitespace ignored, a lone
    /// `1` is the identity.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Word> {
        let chars: Vec<char> = text.chars().collect();
        let mut raw: Vec<Letter> = Vec::new();
        let mut i = 0usize;
        let mut saw_item = false;
        let mut saw_one = false;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '1' && !saw_item && !saw_one {
                saw_one = true;
                i += 1;
                continue;
            }
            let (gen, inv, next) = if c == '[' {
                let mut j = i + 1;
                let kind = match chars.get(j) {
                    Some('g') => false,
                    Some('G') => true,
                    _ => return Err(Error::parse(i, "expected [g<k>] or [G<k>]")),
                };
                j += 1;
                let start = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j == start || chars.get(j) != Some(&']') {
                    return Err(Error::parse(i, "expected [g<k>] or [G<k>]"));
                }
                let idx: usize = chars[start..j]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::parse(start, "bad generator index"))?;
                (idx, kind, j + 1)
            } else if c.is_ascii_lowercase() {
                let idx = alphabet
                    .index_of_letter(c)
                    .ok_or_else(|| Error::parse(i, format!("unknown generator '{c}'")))?;
                (idx, false, i + 1)
            } else if c.is_ascii_uppercase() {
                let lower = c.to_ascii_lowercase();
                let idx = alphabet
                    .index_of_letter(lower)
                    .ok_or_else(|| Error::parse(i, format!("unknown generator '{lower}'")))?;
                (idx, true, i + 1)
            } else {
                return Err(Error::parse(i, format!("unexpected character '{c}'")));
            };
            if gen >= alphabet.rank() {
                return Err(Error::parse(
                    i,
                    format!("generator index {gen} out of range (rank {})", alphabet.rank()),
                ));
            }
            i = next;
            // optional decimal exponent
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let count: usize = if i > start {
                chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::parse(start, "bad exponent"))?
            } else {
                1
            };
            for _ in 0..count {
                raw.push(Letter::new(gen, inv));
            }
            saw_item = true;
        }
        if saw_one && saw_item {
            return Err(Error::parse(0, "'1' must stand alone"));
        }
        Ok(Word::reduce(&raw))
    }

    /// Canonical text form against an alphabet: single-letter names render
    /// as their letter (uppercase for inverses), other generators as
    /// brackets. Runs of equal letters collapse to exponents.
    pub fn display(&self, alphabet: &Alphabet) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        let mut out = String::new();
        let mut i = 0usize;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1usize;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            let name = alphabet.name(l.gen());
            if name.len() == 1 && name.chars().next().unwrap().is_ascii_lowercase() {
                let ch = name.chars().next().unwrap();
                if l.is_inverse() {
                    out.push(ch.to_ascii_uppercase());
                } else {
                    out.push(ch);
                }
            } else if l.is_inverse() {
                out.push_str(&format!("[G{}]", l.gen()));
            } else {
                out.push_str(&format!("[g{}]", l.gen()));
            }
            if run > 1 {
                out.push_str(&run.to_string());
            }
            i += run;
        }
        out
    }

    /// Alphabet-independent canonical text (positional letters a, b, ...).
    pub fn canonical_text(&self) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        let rank = self.max_gen().unwrap() + 1;
        let alphabet = Alphabet::standard(rank);
        self.display(&alphabet)
    }

    pub fn parse_canonical(text: &str) -> Result<Word> {
        Word::parse(&Alphabet::standard(1024), text)
    }
}

impl Alphabet {
    /// Positional alphabet a..z, g26, g27, ... used for canonical encoding.
    fn standard(rank: usize) -> Alphabet {
        let names = (0..rank.max(1))
            .map(|i| {
                if i < 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("g{i}")
                }
            })
            .collect();
        Alphabet { names }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_text())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical_text())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Word::parse_canonical(&text).map_err(D::Error::custom)
    }
}

/// A word split as `conjugator * word * conjugator^-1` with `word`
/// cyclically reduced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicWord {
    pub word: Word,
    pub conjugator: Word,
}

impl CyclicWord {
    /// Reassemble the original word.
    pub fn reassemble(&self) -> Word {
        self.word.conjugate(&self.conjugator)
    }
}

/// Strip inverse first/last pairs until the core is cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> CyclicWord {
    let mut letters = w.letters().to_vec();
    let mut conj: Vec<Letter> = Vec::new();
    while letters.len() >= 2 && letters[0] == letters[letters.len() - 1].inverse() {
        conj.push(letters[0]);
        letters.pop();
        letters.remove(0);
    }
    CyclicWord {
        word: Word { letters },
        conjugator: Word {
            letters: conj,
        },
    }
}

/// Smallest string period of the letter sequence, via the KMP failure
/// function. Returns `len` for primitive sequences.
fn smallest_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    let mut k = 0usize;
    for i in 1..n {
        while k > 0 && letters[i] != letters[k] {
            k = fail[k - 1];
        }
        if letters[i] == letters[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

/// Primitive root: cyclically reduce, then take the smallest rotation
/// period. `root.word^exponent` conjugated by `root.conjugator` reduces
/// back to the input; exponent 1 means the word is not a proper power.
pub fn primitive_root(w: &Word) -> Result<(CyclicWord, u32)> {
    if w.is_identity() {
        return Err(Error::domain("primitive root of the trivial word"));
    }
    let cw = cyclic_reduce(w);
    let p = smallest_period(cw.word.letters());
    let exponent = (cw.word.len() / p) as u32;
    let root = Word {
        letters: cw.word.letters()[..p].to_vec(),
    };
    Ok((
        CyclicWord {
            word: root,
            conjugator: cw.conjugator,
        },
        exponent,
    ))
}

/// Lexicographically least rotation of a letter sequence (Booth's
/// algorithm). Used for conjugacy of cyclic words.
pub fn least_rotation(w: &Word) -> Word {
    let n = w.len();
    if n == 0 {
        return Word::identity();
    }
    let s = w.letters();
    let mut f = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j % n];
        let mut i = f[j - k - 1];
        while i != usize::MAX && sj != s[(k + i + 1) % n] {
            if sj < s[(k + i + 1) % n] {
                k = j - i - 1;
            }
            i = f[i];
        }
        if i == usize::MAX && sj != s[k % n] {
            if sj < s[k % n] {
                k = j;
            }
            f[j - k] = usize::MAX;
        } else {
            f[j - k] = if i == usize::MAX { 0 } else { i + 1 };
        }
    }
    w.rotated(k % n)
}

/// True when `u` and `v` are conjugate in the free group, i.e. their
/// cyclically reduced cores are rotations of one another.
pub fn conjugate_in_free(u: &Word, v: &Word) -> bool {
    let cu = cyclic_reduce(u).word;
    let cv = cyclic_reduce(v).word;
    cu.len() == cv.len() && least_rotation(&cu) == least_rotation(&cv)
}

/// Distance and Gromov product data for a triple of Cayley-tree vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeGeometry {
    pub distance: u64,
    pub gromov_product: u64,
}

/// `distance(u, v)` and the Gromov product of `u, v` at `basepoint`; the
/// product is the common-prefix length of the based words, an integer in a
/// tree.
pub fn tree_geometry(u: &Word, v: &Word, basepoint: &Word) -> TreeGeometry {
    let distance = u.inverse().mul(v).len() as u64;
    let bu = basepoint.inverse().mul(u);
    let bv = basepoint.inverse().mul(v);
    let gromov_product = bu
        .letters()
        .iter()
        .zip(bv.letters())
        .take_while(|(a, b)| a == b)
        .count() as u64;
    TreeGeometry {
        distance,
        gromov_product,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationLength {
    pub norm: u64,
    pub stable_norm: u64,
}

/// Translation length on the Cayley tree: the length of the cyclically
/// reduced core. The tree has no hyperbolicity defect, so the stable
/// length coincides with the norm.
pub fn translation_length(w: &Word) -> TranslationLength {
    let n = cyclic_reduce(w).word.len() as u64;
    TranslationLength {
        norm: n,
        stable_norm: n,
    }
}

/// Exact minimal displacement data for a finite family of isometries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub linf: u64,
    pub l1: u64,
    pub minimizer: Word,
    pub l1_minimizer: Word,
}

/// Exact sup- and sum-displacement minima over Cayley-tree vertices.
///
/// The search is exhaustive over the ball of radius `max |g|` around the
/// identity. Every minimizer lies in that ball: in a tree the displacement
/// of `g` at `x` is `2 d(x, axis(g)) + ||g||`, and `d(1, axis(g)) <= |g|/2`,
/// so any vertex beyond the ball is displaced by more than `|max g|` by
/// every element of the family.
pub fn energy(family: &[Word]) -> EnergyReport {
    if family.is_empty() {
        return EnergyReport {
            linf: 0,
            l1: 0,
            minimizer: Word::identity(),
            l1_minimizer: Word::identity(),
        };
    }
    let radius = family.iter().map(|g| g.len()).max().unwrap();
    let rank = family
        .iter()
        .filter_map(|g| g.max_gen())
        .max()
        .map_or(1, |m| m + 1);
    let mut best_linf = u64::MAX;
    let mut best_l1 = u64::MAX;
    let mut linf_min = Word::identity();
    let mut l1_min = Word::identity();
    let min_len = family.iter().map(|g| g.len() as u64).min().unwrap();

    // DFS over the ball, pruning subtrees whose distance from the identity
    // already forces both objectives above the current bests.
    let mut stack: Vec<Word> = vec![Word::identity()];
    while let Some(x) = stack.pop() {
        let xinv = x.inverse();
        let mut sup = 0u64;
        let mut sum = 0u64;
        for g in family {
            let d = xinv.mul(g).mul(&x).len() as u64;
            sup = sup.max(d);
            sum += d;
        }
        if sup < best_linf {
            best_linf = sup;
            linf_min = x.clone();
        }
        if sum < best_l1 {
            best_l1 = sum;
            l1_min = x.clone();
        }
        if x.len() < radius {
            let depth = x.len() as u64 + 1;
            // displacement of g at depth d is at least 2d - |g|
            let lower = (2 * depth).saturating_sub(min_len);
            if lower > best_linf && lower > best_l1 {
                continue;
            }
            for gen in (0..rank).rev() {
                for inv in [true, false] {
                    let l = Letter::new(gen, inv);
                    if x.letters().last() != Some(&l.inverse()) {
                        let mut letters = x.letters().to_vec();
                        letters.push(l);
                        stack.push(Word { letters });
                    }
                }
            }
        }
    }
    EnergyReport {
        linf: best_linf,
        l1: best_l1,
        minimizer: linf_min,
        l1_minimizer: l1_min,
    }
}

/// All reduced words of length at most `radius`, in breadth-lexicographic
/// order (identity first).
pub fn ball(rank: usize, radius: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for w in &frontier {
            for gen in 0..rank {
                for inv in [false, true] {
                    let l = Letter::new(gen, inv);
                    if w.letters().last() != Some(&l.inverse()) {
                        let mut letters = w.letters().to_vec();
                        letters.push(l);
                        next.push(Word { letters });
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
