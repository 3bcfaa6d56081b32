//! Symmetrization and piece analysis of finite relator sets over a free
//! group, with exact rational small-cancellation verdicts.
//!
//! A piece is a common prefix of two distinct elements of the symmetrized
//! set. `max_piece` has two paths: a sorted rotation array over the doubled
//! cyclic words (fast, near-linear in practice) and a quadratic pairwise
//! scan kept as the independent reference.

use crate::error::{Error, Result};
use crate::words::{cyclic_reduce, least_rotation, primitive_root, Alphabet, Letter, Word};
use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i64>;

/// Serialize-friendly rendering of a rational as "N/D".
pub fn rational_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let parts: Vec<&str> = text.split('/').collect();
    let err = || Error::invalid(format!("bad rational {text:?}, expected N/D"));
    match parts.as_slice() {
        [n] => n.trim().parse::<i64>().map(Rational::from_integer).map_err(|_| err()),
        [n, d] => {
            let num: i64 = n.trim().parse().map_err(|_| err())?;
            let den: i64 = d.trim().parse().map_err(|_| err())?;
            if den == 0 {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
        _ => Err(err()),
    }
}

/// A finite family of relators: nontrivial, cyclically reduced, pairwise
/// distinct words over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatorSet {
    pub alphabet: Alphabet,
    relators: Vec<Word>,
}

impl RelatorSet {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            if r.is_identity() {
                return Err(Error::invalid("trivial relator"));
            }
            if !r.is_cyclically_reduced() {
                return Err(Error::invalid(format!(
                    "relator {} is not cyclically reduced",
                    r.canonical_text()
                )));
            }
            if let Some(g) = r.max_gen() {
                if g >= alphabet.rank() {
                    return Err(Error::invalid("relator generator out of range"));
                }
            }
        }
        for (i, r) in relators.iter().enumerate() {
            if relators[..i].contains(r) {
                return Err(Error::invalid(format!(
                    "duplicate relator {}",
                    r.canonical_text()
                )));
            }
        }
        Ok(RelatorSet { alphabet, relators })
    }

    /// Cyclically reduce, drop trivial words, and deduplicate. The normal
    /// closure is unchanged.
    pub fn normalized(alphabet: Alphabet, words: &[Word]) -> Result<Self> {
        let mut relators: Vec<Word> = Vec::new();
        for w in words {
            let core = cyclic_reduce(w).word;
            if !core.is_identity() && !relators.contains(&core) {
                relators.push(core);
            }
        }
        RelatorSet::new(alphabet, relators)
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn is_empty(&self) -> bool {
        self.relators.is_empty()
    }
}

/// Identifies one symmetrized element: a rotation of a relator or of its
/// inverse. `stage` distinguishes the contributing set in joint reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementOrigin {
    pub stage: usize,
    pub relator: usize,
    pub rotation: usize,
    pub inverted: bool,
}

#[derive(Debug, Clone)]
struct SymEntry {
    origin_stage: usize,
    origin_relator: usize,
    inverted: bool,
    /// relator (or inverse) letters doubled, for wraparound reads
    doubled: Vec<Letter>,
    /// primitive rotation period: number of distinct rotations
    period: usize,
    /// element length |r|
    len: usize,
}

/// Closure of a relator family under cyclic rotation and inversion.
/// Elements are stored as views into doubled relator arrays: a relator of
/// primitive period `p` has exactly `p` rotations per orientation.
#[derive(Debug, Clone)]
pub struct SymmetrizedSet {
    pub alphabet: Alphabet,
    entries: Vec<SymEntry>,
    /// index of (entry, rotation) pairs after global deduplication
    elements: Vec<(u32, u32)>,
    min_relator_len: Option<usize>,
}

/// Handle to one element of a symmetrized set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementRef(usize);

impl SymmetrizedSet {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_refs(&self) -> impl Iterator<Item = ElementRef> {
        (0..self.elements.len()).map(ElementRef)
    }

    pub fn origin(&self, e: ElementRef) -> ElementOrigin {
        let (entry, rotation) = self.elements[e.0];
        let entry = &self.entries[entry as usize];
        ElementOrigin {
            stage: entry.origin_stage,
            relator: entry.origin_relator,
            rotation: rotation as usize,
            inverted: entry.inverted,
        }
    }

    pub fn element_len(&self, e: ElementRef) -> usize {
        self.entries[self.elements[e.0].0 as usize].len
    }

    fn letters(&self, e: ElementRef) -> &[Letter] {
        let (entry, rotation) = self.elements[e.0];
        let entry = &self.entries[entry as usize];
        &entry.doubled[rotation as usize..rotation as usize + entry.len]
    }

    /// Materialize one element as a word.
    pub fn element_word(&self, e: ElementRef) -> Word {
        Word::reduce(self.letters(e))
    }

    /// All elements, materialized. Intended for desk-scale sets.
    pub fn element_words(&self) -> Vec<Word> {
        self.element_refs().map(|e| self.element_word(e)).collect()
    }

    pub fn min_relator_len(&self) -> Option<usize> {
        self.min_relator_len
    }

    fn lcp(&self, a: ElementRef, b: ElementRef) -> usize {
        let la = self.letters(a);
        let lb = self.letters(b);
        la.iter().zip(lb).take_while(|(x, y)| x == y).count()
    }

    fn lex_cmp(&self, a: ElementRef, b: ElementRef) -> std::cmp::Ordering {
        self.letters(a).cmp(self.letters(b))
    }
}

/// Symmetrize a relator family: all distinct cyclic rotations of each
/// relator and of each inverse, deduplicated globally.
pub fn symmetrize(set: &RelatorSet) -> SymmetrizedSet {
    symmetrize_staged(std::slice::from_ref(set)).expect("single stage cannot mismatch")
}

/// Symmetrize the union of several relator sets over one alphabet, keeping
/// per-stage origins for witness attribution.
pub fn symmetrize_staged(stages: &[RelatorSet]) -> Result<SymmetrizedSet> {
    let alphabet = match stages.first() {
        Some(s) => s.alphabet.clone(),
        None => Alphabet::with_rank(1)?,
    };
    for s in stages {
        if s.alphabet != alphabet {
            return Err(Error::invalid("alphabet mismatch between stages"));
        }
    }
    let mut entries: Vec<SymEntry> = Vec::new();
    let mut min_len: Option<usize> = None;
    for (stage, set) in stages.iter().enumerate() {
        for (ri, r) in set.relators().iter().enumerate() {
            let (root, _) = primitive_root(r).expect("relators are nontrivial");
            let period = root.word.len();
            min_len = Some(min_len.map_or(r.len(), |m| m.min(r.len())));
            for inverted in [false, true] {
                let w = if inverted { r.inverse() } else { r.clone() };
                let mut doubled = w.letters().to_vec();
                doubled.extend_from_slice(w.letters());
                entries.push(SymEntry {
                    origin_stage: stage,
                    origin_relator: ri,
                    inverted,
                    doubled,
                    period,
                    len: r.len(),
                });
            }
        }
    }
    let mut set = SymmetrizedSet {
        alphabet,
        entries,
        elements: Vec::new(),
        min_relator_len: min_len,
    };
    let mut elements: Vec<(u32, u32)> = Vec::new();
    for (ei, entry) in set.entries.iter().enumerate() {
        for rot in 0..entry.period {
            elements.push((ei as u32, rot as u32));
        }
    }
    // global dedup: sort handles lexicographically, then by origin for
    // determinism, and drop equal-letter duplicates (keeping the first
    // origin in stage/relator order)
    set.elements = elements;
    let mut order: Vec<usize> = (0..set.elements.len()).collect();
    order.sort_by(|&i, &j| {
        set.lex_cmp(ElementRef(i), ElementRef(j))
            .then_with(|| set.elements[i].cmp(&set.elements[j]))
    });
    let mut kept: Vec<(u32, u32)> = Vec::with_capacity(order.len());
    let mut prev: Option<ElementRef> = None;
    for idx in order {
        let e = ElementRef(idx);
        let dup = match prev {
            Some(p) => {
                set.element_len(p) == set.element_len(e)
                    && set.lcp(p, e) == set.element_len(e)
            }
            None => false,
        };
        if !dup {
            kept.push(set.elements[idx]);
            prev = Some(e);
        }
    }
    // restore deterministic origin order
    kept.sort();
    set.elements = kept;
    Ok(set)
}

/// A maximal piece: the common prefix and the two distinct elements
/// realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceWitness {
    pub piece: Word,
    pub first: ElementOrigin,
    pub second: ElementOrigin,
}

/// Maximal common-prefix length over distinct element pairs, computed by
/// sorting the rotation handles and scanning adjacent pairs.
pub fn max_piece(set: &SymmetrizedSet) -> (u64, Option<PieceWitness>) {
    if set.element_count() < 2 {
        return (0, None);
    }
    let mut order: Vec<u32> = (0..set.element_count() as u32).collect();
    order.sort_unstable_by(|&i, &j| {
        set.lex_cmp(ElementRef(i as usize), ElementRef(j as usize))
            .then(i.cmp(&j))
    });
    let mut best = 0usize;
    let mut pair: Option<(ElementRef, ElementRef)> = None;
    for w in order.windows(2) {
        let a = ElementRef(w[0] as usize);
        let b = ElementRef(w[1] as usize);
        let l = set.lcp(a, b);
        if l > best || pair.is_none() {
            best = l;
            pair = Some((a, b));
        }
    }
    finish_witness(set, best, pair)
}

/// Quadratic pairwise reference scan; parallel over the first index.
pub fn max_piece_reference(set: &SymmetrizedSet) -> (u64, Option<PieceWitness>) {
    let n = set.element_count();
    if n < 2 {
        return (0, None);
    }
    let candidate = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = 0usize;
            let mut pair = (i, i + 1);
            for j in i + 1..n {
                let l = set.lcp(ElementRef(i), ElementRef(j));
                if l > best {
                    best = l;
                    pair = (i, j);
                }
            }
            (best, pair)
        })
        .reduce(
            || (0usize, (0usize, 1usize)),
            |a, b| {
                // deterministic: larger piece wins, ties to the smaller pair
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    let (best, (i, j)) = candidate;
    finish_witness(set, best, Some((ElementRef(i), ElementRef(j))))
}

fn finish_witness(
    set: &SymmetrizedSet,
    best: usize,
    pair: Option<(ElementRef, ElementRef)>,
) -> (u64, Option<PieceWitness>) {
    let witness = pair.map(|(a, b)| PieceWitness {
        piece: Word::reduce(&set.letters(a)[..best]),
        first: set.origin(a),
        second: set.origin(b),
    });
    (best as u64, witness)
}

/// Piece statistics and condition verdicts for a relator family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SCReport {
    /// max piece length
    pub delta: u64,
    /// min relator length
    pub t: u64,
    /// exact lambda = delta / t
    pub lambda: Rational,
    /// 1 / t, the scale bound contributed by the shortest relation
    pub epsilon: Rational,
    pub cprime_sixth: bool,
    pub lambda0: Rational,
    pub epsilon0: Rational,
    /// delta <= lambda0 * t and t >= 1/epsilon0
    pub strengthened: bool,
    /// no relator a proper power, no two relators conjugate up to inversion
    pub tight: bool,
    /// informational per-relator variant: max over relators of
    /// (max piece prefix of its rotations) / |relator|
    pub per_relator_lambda: Rational,
    pub witness: Option<PieceWitness>,
}

fn check_targets(lambda0: Rational, epsilon0: Rational) -> Result<()> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if lambda0 <= zero || lambda0 >= one || epsilon0 <= zero || epsilon0 >= one {
        return Err(Error::domain("targets must lie in (0,1)"));
    }
    Ok(())
}

/// Full piece analysis of one relator set.
pub fn sc_report(set: &RelatorSet, lambda0: Rational, epsilon0: Rational) -> Result<SCReport> {
    joint_report(std::slice::from_ref(set), lambda0, epsilon0)
}

/// Piece analysis of a union of stages, with per-stage witness attribution.
pub fn joint_report(
    stages: &[RelatorSet],
    lambda0: Rational,
    epsilon0: Rational,
) -> Result<SCReport> {
    check_targets(lambda0, epsilon0)?;
    let sym = symmetrize_staged(stages)?;
    let all: Vec<&Word> = stages.iter().flat_map(|s| s.relators()).collect();
    if all.is_empty() {
        return Err(Error::domain("empty relator list"));
    }
    let t = sym.min_relator_len().unwrap() as u64;
    let large = sym.element_refs().map(|e| sym.element_len(e)).sum::<usize>() > 200_000
        || sym.element_count() > 2_000;
    let (delta, witness) = if large {
        max_piece(&sym)
    } else {
        max_piece_reference(&sym)
    };
    report_from_parts(stages, &sym, delta, witness, t, lambda0, epsilon0)
}

fn report_from_parts(
    stages: &[RelatorSet],
    sym: &SymmetrizedSet,
    delta: u64,
    witness: Option<PieceWitness>,
    t: u64,
    lambda0: Rational,
    epsilon0: Rational,
) -> Result<SCReport> {
    let lambda = Rational::new(delta as i64, t as i64);
    let epsilon = Rational::new(1, t as i64);
    let sixth = Rational::new(1, 6);
    let one = Rational::from_integer(1);
    // strengthened: delta <= lambda0 t and inj = one edge <= epsilon0 t
    let strengthened = Rational::from_integer(delta as i64) <= lambda0 * Rational::from_integer(t as i64)
        && Rational::from_integer(t as i64) >= one / epsilon0;

    // tightness: no proper powers, no conjugate or inverse-conjugate pairs
    let mut tight = true;
    let mut canon: Vec<(Word, Word)> = Vec::new();
    'outer: for set in stages {
        for r in set.relators() {
            let (_, e) = primitive_root(r).expect("relators nontrivial");
            if e > 1 {
                tight = false;
                break 'outer;
            }
            let c = least_rotation(r);
            let ci = least_rotation(&r.inverse());
            for (pc, pci) in &canon {
                if c == *pc || c == *pci || ci == *pc {
                    tight = false;
                    break 'outer;
                }
            }
            canon.push((c, ci));
        }
    }

    // informational per-relator lambda via sorted neighbor prefixes
    let per_relator_lambda = per_relator_lambda(sym);

    Ok(SCReport {
        delta,
        t,
        lambda,
        epsilon,
        cprime_sixth: lambda < sixth,
        lambda0,
        epsilon0,
        strengthened,
        tight,
        per_relator_lambda,
        witness,
    })
}

/// For each element, its longest common prefix with any other distinct
/// element is realized by a sorted neighbor; divide by the origin relator
/// length and take the max.
fn per_relator_lambda(set: &SymmetrizedSet) -> Rational {
    let n = set.element_count();
    if n < 2 {
        return Rational::from_integer(0);
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&i, &j| {
        set.lex_cmp(ElementRef(i as usize), ElementRef(j as usize))
            .then(i.cmp(&j))
    });
    let mut best = Rational::from_integer(0);
    for (pos, &idx) in order.iter().enumerate() {
        let e = ElementRef(idx as usize);
        let mut l = 0usize;
        if pos > 0 {
            l = l.max(set.lcp(e, ElementRef(order[pos - 1] as usize)));
        }
        if pos + 1 < order.len() {
            l = l.max(set.lcp(e, ElementRef(order[pos + 1] as usize)));
        }
        let ratio = Rational::new(l as i64, set.element_len(e) as i64);
        if ratio > best {
            best = ratio;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha2() -> Alphabet {
        Alphabet::with_rank(2).unwrap()
    }

    fn w(text: &str) -> Word {
        Word::parse(&alpha2(), text).unwrap()
    }

    fn sixth() -> (Rational, Rational) {
        (Rational::new(1, 6), Rational::new(1, 6))
    }

    #[test]
    fn symmetrize_examples() {
        let set = RelatorSet::new(alpha2(), vec![w("ab")]).unwrap();
        let sym = symmetrize(&set);
        let words = sym.element_words();
        assert_eq!(words.len(), 4);
        assert!(words.contains(&w("ab")));
        assert!(words.contains(&w("ba")));
        assert!(words.contains(&w("ab").inverse()));
        assert!(words.contains(&w("ba").inverse()));

        let set = RelatorSet::new(alpha2(), vec![w("a2b2").pow(7)]).unwrap();
        let sym = symmetrize(&set);
        assert_eq!(sym.element_count(), 8);

        let set = RelatorSet::new(alpha2(), vec![w("a")]).unwrap();
        assert_eq!(symmetrize(&set).element_count(), 2);
    }

    #[test]
    fn symmetrize_rejects_unreduced() {
        assert!(RelatorSet::new(alpha2(), vec![w("abA")]).is_err());
        assert!(RelatorSet::new(alpha2(), vec![Word::identity()]).is_err());
    }

    #[test]
    fn max_piece_examples() {
        let set = RelatorSet::new(alpha2(), vec![w("a2b2").pow(7)]).unwrap();
        let sym = symmetrize(&set);
        let (d, witness) = max_piece(&sym);
        assert_eq!(d, 1);
        let (d_ref, _) = max_piece_reference(&sym);
        assert_eq!(d_ref, 1);
        let wit = witness.unwrap();
        assert_eq!(wit.piece.len(), 1);

        let a4 = Alphabet::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        let surf = Word::parse(&a4, "abABcdCD").unwrap();
        let set = RelatorSet::new(a4, vec![surf]).unwrap();
        assert_eq!(max_piece(&symmetrize(&set)).0, 1);

        let set = RelatorSet::new(alpha2(), vec![w("ab")]).unwrap();
        assert_eq!(max_piece(&symmetrize(&set)).0, 0);
    }

    #[test]
    fn sc_report_examples() {
        let (l0, e0) = sixth();
        let set = RelatorSet::new(alpha2(), vec![w("a2b2").pow(7)]).unwrap();
        let rep = sc_report(&set, l0, e0).unwrap();
        assert_eq!(rep.delta, 1);
        assert_eq!(rep.t, 28);
        assert_eq!(rep.lambda, Rational::new(1, 28));
        assert!(rep.cprime_sixth);
        assert!(!rep.tight);

        let a4 = Alphabet::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        let surf = Word::parse(&a4, "abABcdCD").unwrap();
        let rep = sc_report(&RelatorSet::new(a4, vec![surf]).unwrap(), l0, e0).unwrap();
        assert_eq!((rep.delta, rep.t), (1, 8));
        assert_eq!(rep.lambda, Rational::new(1, 8));
        assert!(rep.cprime_sixth);
        assert!(rep.tight);

        let rep = sc_report(
            &RelatorSet::new(alpha2(), vec![w("ab"), w("ba")]).unwrap(),
            l0,
            e0,
        )
        .unwrap();
        assert!(!rep.tight);
    }

    #[test]
    fn sc_report_rejects_bad_input() {
        let (l0, e0) = sixth();
        assert!(sc_report(&RelatorSet::new(alpha2(), vec![]).unwrap(), l0, e0).is_err());
        let set = RelatorSet::new(alpha2(), vec![w("ab")]).unwrap();
        assert!(sc_report(&set, Rational::from_integer(2), e0).is_err());
    }

    #[test]
    fn joint_report_examples() {
        let (l0, e0) = sixth();
        let r = w("a2b2").pow(7);
        let s1 = RelatorSet::new(alpha2(), vec![r.clone()]).unwrap();
        let empty = RelatorSet::new(alpha2(), vec![]).unwrap();
        let joint = joint_report(&[s1.clone(), empty], l0, e0).unwrap();
        let single = sc_report(&s1, l0, e0).unwrap();
        assert_eq!(joint.delta, single.delta);
        assert_eq!(joint.t, single.t);

        let dup = joint_report(&[s1.clone(), s1.clone()], l0, e0).unwrap();
        assert_eq!(dup.delta, single.delta);
        assert_eq!(dup.t, single.t);
    }

    #[test]
    fn lambda_is_exact() {
        let (l0, e0) = sixth();
        let set = RelatorSet::new(alpha2(), vec![w("a2b2").pow(3)]).unwrap();
        let rep = sc_report(&set, l0, e0).unwrap();
        assert_eq!(
            rep.lambda * Rational::from_integer(rep.t as i64),
            Rational::from_integer(rep.delta as i64)
        );
    }

    #[test]
    fn witness_is_common_prefix() {
        let set = RelatorSet::new(alpha2(), vec![w("a2b2").pow(2), w("ab3")]).unwrap();
        let sym = symmetrize(&set);
        let (d, witness) = max_piece(&sym);
        let wit = witness.unwrap();
        assert_eq!(wit.piece.len() as u64, d);
        // locate the two elements and check the prefix property
        let find = |o: &ElementOrigin| {
            sym.element_refs()
                .find(|&e| sym.origin(e) == *o)
                .map(|e| sym.element_word(e))
                .unwrap()
        };
        let first = find(&wit.first);
        let second = find(&wit.second);
        assert_ne!(first, second);
        for e in [first, second] {
            assert_eq!(&e.letters()[..d as usize], wit.piece.letters());
        }
    }
}
