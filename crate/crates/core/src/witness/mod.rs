//! Prenex sentences over groups, their normalized two-block form, the
//! extraction of abstract witnesses from disjuncts, silly-word detection,
//! and brute-force validation of the sentence/witness correspondence on
//! finite groups.

pub mod finite;
pub mod syntax;

pub use finite::{holds_in_finite, FiniteGroup};
pub use syntax::{parse_sentence, Atom, Block, Clause, FactorBase, Quantifier, Sentence, VarWord};

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::words::{Alphabet, Letter, Word};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Limit on clauses produced by negation's CNF distribution.
const CNF_CAP: usize = 4096;

/// A sentence reduced to the two-block form: existential variables, then
/// universal variables, then a conjunction of disjuncts split into
/// equations and inequations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaSentence {
    pub y_vars: Vec<String>,
    pub x_vars: Vec<String>,
    pub constants: Vec<String>,
    pub disjuncts: Vec<Disjunct>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disjunct {
    /// the v_i: some must die for the disjunct to hold under a morphism
    pub equations: Vec<VarWord>,
    /// the w_j: relators of the witness group
    pub inequations: Vec<VarWord>,
}

fn coalesced_blocks(s: &Sentence) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    for b in &s.blocks {
        match out.last_mut() {
            Some(last) if last.quantifier == b.quantifier => {
                last.vars.extend(b.vars.iter().cloned())
            }
            _ => out.push(b.clone()),
        }
    }
    out
}

fn collect_constants(s: &Sentence) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in &s.clauses {
        for a in &c.0 {
            for w in [&a.lhs, &a.rhs] {
                let mut stack = vec![w.clone()];
                while let Some(word) = stack.pop() {
                    for f in &word.0 {
                        match &f.base {
                            FactorBase::Const(name) => {
                                if !out.contains(name) {
                                    out.push(name.clone());
                                }
                            }
                            FactorBase::Commutator(u, v) => {
                                stack.push(u.clone());
                                stack.push(v.clone());
                            }
                            FactorBase::Var(_) => {}
                        }
                    }
                }
            }
        }
    }
    out
}

/// Normalize a sentence with prefix `E* A*` (either block may be absent)
/// into its disjunct list. Any other prefix is rejected.
pub fn to_ea_normal(s: &Sentence) -> Result<EaSentence> {
    let blocks = coalesced_blocks(s);
    let (y_vars, x_vars) = match blocks.as_slice() {
        [b] => match b.quantifier {
            Quantifier::Exists => (b.vars.clone(), Vec::new()),
            Quantifier::Forall => (Vec::new(), b.vars.clone()),
        },
        [e, a] if e.quantifier == Quantifier::Exists && a.quantifier == Quantifier::Forall => {
            (e.vars.clone(), a.vars.clone())
        }
        _ => {
            return Err(Error::UnsupportedPrefix(format!(
                "prefix is not E*A*: {}",
                s.blocks
                    .iter()
                    .map(|b| match b.quantifier {
                        Quantifier::Exists => "E",
                        Quantifier::Forall => "A",
                    })
                    .collect::<String>()
            )))
        }
    };
    let disjuncts = s
        .clauses
        .iter()
        .map(|c| {
            let mut equations = Vec::new();
            let mut inequations = Vec::new();
            for a in &c.0 {
                if a.negated {
                    inequations.push(a.word());
                } else {
                    equations.push(a.word());
                }
            }
            Disjunct {
                equations,
                inequations,
            }
        })
        .collect();
    Ok(EaSentence {
        y_vars,
        x_vars,
        constants: collect_constants(s),
        disjuncts,
    })
}

/// Rebuild a plain sentence from the normalized form (used to cross-check
/// that normalization preserves truth).
pub fn ea_to_sentence(ea: &EaSentence) -> Sentence {
    let mut blocks = Vec::new();
    if !ea.y_vars.is_empty() {
        blocks.push(Block {
            quantifier: Quantifier::Exists,
            vars: ea.y_vars.clone(),
        });
    }
    if !ea.x_vars.is_empty() {
        blocks.push(Block {
            quantifier: Quantifier::Forall,
            vars: ea.x_vars.clone(),
        });
    }
    let clauses = ea
        .disjuncts
        .iter()
        .map(|d| {
            let mut atoms = Vec::new();
            for v in &d.equations {
                atoms.push(Atom {
                    lhs: v.clone(),
                    rhs: VarWord::default(),
                    negated: false,
                });
            }
            for w in &d.inequations {
                atoms.push(Atom {
                    lhs: w.clone(),
                    rhs: VarWord::default(),
                    negated: true,
                });
            }
            Clause(atoms)
        })
        .collect();
    Sentence { blocks, clauses }
}

/// Negate a prenex sentence: flip every quantifier and convert the negated
/// matrix back to conjunctive form by distribution. The distribution can
/// blow up; it is capped.
pub fn negate(s: &Sentence) -> Result<Sentence> {
    let blocks = s
        .blocks
        .iter()
        .map(|b| Block {
            quantifier: match b.quantifier {
                Quantifier::Exists => Quantifier::Forall,
                Quantifier::Forall => Quantifier::Exists,
            },
            vars: b.vars.clone(),
        })
        .collect();
    // not (AND of clauses) = OR over clauses of (AND of negated atoms);
    // distribute to CNF: one output clause per choice of an atom per clause
    let mut clauses: Vec<Clause> = vec![Clause(Vec::new())];
    for clause in &s.clauses {
        let mut next = Vec::new();
        for partial in &clauses {
            for atom in &clause.0 {
                let mut atoms = partial.0.clone();
                let neg = Atom {
                    lhs: atom.lhs.clone(),
                    rhs: atom.rhs.clone(),
                    negated: !atom.negated,
                };
                if !atoms.contains(&neg) {
                    atoms.push(neg);
                }
                next.push(Clause(atoms));
            }
            if next.len() > CNF_CAP {
                return Err(Error::BudgetExceeded(format!(
                    "negation CNF exceeds {CNF_CAP} clauses"
                )));
            }
        }
        clauses = next;
    }
    Ok(Sentence {
        blocks,
        clauses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub positive: bool,
    pub one_quantifier: bool,
    pub exists_forall: bool,
}

/// positive = no inequations; one_quantifier = a single coalesced block;
/// exists_forall = prefix of shape `E* A*`.
pub fn classify(s: &Sentence) -> Classification {
    let blocks = coalesced_blocks(s);
    let positive = s.clauses.iter().all(|c| c.0.iter().all(|a| !a.negated));
    let one_quantifier = blocks.len() == 1;
    let exists_forall = match blocks.as_slice() {
        [_] => true,
        [e, a] => e.quantifier == Quantifier::Exists && a.quantifier == Quantifier::Forall,
        _ => false,
    };
    Classification {
        positive,
        one_quantifier,
        exists_forall,
    }
}

/// The finite-presentation encoding of one disjunct: the group generated
/// by the universal and existential variables (plus constants) modulo the
/// inequation words, with the equation words as the kill list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractWitness {
    pub group: Presentation,
    /// rank of the free group on the existential variables
    pub h_rank: usize,
    /// generator indices of the existential variables inside `group`
    pub j_map: Vec<usize>,
    /// the equation words, as words in `group`
    pub v: Vec<Word>,
    /// explicitly-empty marker: no equations, so positive realization
    /// requires the morphism set itself to be empty
    pub v_empty_marked: bool,
    /// constant names, in order, occupying the trailing generators
    pub constants: Vec<String>,
}

fn var_word_to_word(
    w: &VarWord,
    index: &BTreeMap<String, usize>,
    const_index: &BTreeMap<String, usize>,
) -> Result<Word> {
    let mut letters: Vec<Letter> = Vec::new();
    fn emit(
        w: &VarWord,
        index: &BTreeMap<String, usize>,
        const_index: &BTreeMap<String, usize>,
        letters: &mut Vec<Letter>,
    ) -> Result<()> {
        for f in &w.0 {
            let mut once: Vec<Letter> = Vec::new();
            match &f.base {
                FactorBase::Var(name) => {
                    let idx = *index
                        .get(name)
                        .ok_or_else(|| Error::invalid(format!("unknown variable {name}")))?;
                    once.push(Letter::new(idx, false));
                }
                FactorBase::Const(name) => {
                    let idx = *const_index
                        .get(name)
                        .ok_or_else(|| Error::invalid(format!("unknown constant ${name}")))?;
                    once.push(Letter::new(idx, false));
                }
                FactorBase::Commutator(u, v) => {
                    let mut lu = Vec::new();
                    emit(u, index, const_index, &mut lu)?;
                    let mut lv = Vec::new();
                    emit(v, index, const_index, &mut lv)?;
                    once.extend(lu.iter().cloned());
                    once.extend(lv.iter().cloned());
                    once.extend(lu.iter().rev().map(|l| l.inverse()));
                    once.extend(lv.iter().rev().map(|l| l.inverse()));
                }
            }
            if f.exponent >= 0 {
                for _ in 0..f.exponent {
                    letters.extend(once.iter().cloned());
                }
            } else {
                let inv: Vec<Letter> = once.iter().rev().map(|l| l.inverse()).collect();
                for _ in 0..(-f.exponent) {
                    letters.extend(inv.iter().cloned());
                }
            }
        }
        Ok(())
    }
    emit(w, index, const_index, &mut letters)?;
    Ok(Word::reduce(&letters))
}

/// Build the abstract witness of one disjunct of a normalized sentence.
pub fn witness_of_disjunct(ea: &EaSentence, disjunct: usize) -> Result<AbstractWitness> {
    let d = ea
        .disjuncts
        .get(disjunct)
        .ok_or_else(|| Error::invalid("disjunct index out of range"))?;
    let mut names: Vec<String> = Vec::new();
    names.extend(ea.x_vars.iter().cloned());
    names.extend(ea.y_vars.iter().cloned());
    names.extend(ea.constants.iter().map(|c| format!("${c}")));
    let alphabet = Alphabet::new(names)?;
    let mut index = BTreeMap::new();
    for (i, v) in ea.x_vars.iter().chain(&ea.y_vars).enumerate() {
        index.insert(v.clone(), i);
    }
    let mut const_index = BTreeMap::new();
    let base = ea.x_vars.len() + ea.y_vars.len();
    for (i, c) in ea.constants.iter().enumerate() {
        const_index.insert(c.clone(), base + i);
    }
    let relators: Vec<Word> = d
        .inequations
        .iter()
        .map(|w| var_word_to_word(w, &index, &const_index))
        .collect::<Result<_>>()?;
    let v: Vec<Word> = d
        .equations
        .iter()
        .map(|w| var_word_to_word(w, &index, &const_index))
        .collect::<Result<_>>()?;
    let j_map = (ea.x_vars.len()..ea.x_vars.len() + ea.y_vars.len()).collect();
    Ok(AbstractWitness {
        group: Presentation::new(alphabet, relators)?,
        h_rank: ea.y_vars.len(),
        j_map,
        v_empty_marked: v.is_empty(),
        v,
        constants: ea.constants.clone(),
    })
}

/// A realization of an abstract witness: images of the existential
/// generators in the ambient group, with a label so ledgers can refer to
/// it, and optionally the sentence it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedWitness {
    pub label: String,
    pub witness: AbstractWitness,
    pub iota: Vec<Word>,
    pub sentence: Option<String>,
}

/// A word is silly when it freely reduces to the identity or its
/// exponent-sum vector has gcd one (its word map is then onto in every
/// group).
pub fn is_silly(w: &Word, rank: usize) -> bool {
    if w.is_identity() {
        return true;
    }
    let g = w
        .exponent_vector(rank)
        .iter()
        .fold(0i64, |acc, &x| num::integer::gcd(acc, x.abs()));
    g == 1
}

/// Enumerate all morphisms `group -> F` agreeing with `iota` on the
/// existential generators and killing every relator; return true when each
/// one also kills some element of `v`.
pub fn realizes_positively_finite(
    witness: &AbstractWitness,
    iota_images: &[usize],
    f: &FiniteGroup,
    const_assignment: &BTreeMap<String, usize>,
) -> Result<bool> {
    if iota_images.len() != witness.h_rank {
        return Err(Error::invalid(format!(
            "iota must assign {} generators",
            witness.h_rank
        )));
    }
    let rank = witness.group.rank();
    let x_count = rank - witness.h_rank - witness.constants.len();
    let space = (f.order as f64).powi(x_count as i32);
    if space > 1e7 {
        return Err(Error::BudgetExceeded(format!(
            "{space} assignments exceed 1e7"
        )));
    }
    let mut images = vec![0usize; rank];
    for (k, &gi) in witness.j_map.iter().enumerate() {
        images[gi] = iota_images[k];
    }
    for (k, cname) in witness.constants.iter().enumerate() {
        let val = const_assignment.get(cname).ok_or_else(|| {
            Error::invalid(format!("constant ${cname} needs an assignment"))
        })?;
        images[x_count + witness.h_rank + k] = *val;
    }
    // odometer over the x generators (indices 0..x_count)
    let mut idx = vec![0usize; x_count];
    loop {
        for (i, &x) in idx.iter().enumerate() {
            images[i] = x;
        }
        let compatible = witness
            .group
            .relators
            .iter()
            .all(|r| f.eval_word(r, &images) == 0);
        if compatible {
            let kills_some = witness.v.iter().any(|v| f.eval_word(v, &images) == 0);
            if !kills_some {
                // found a poison
                return Ok(false);
            }
        }
        let mut pos = 0;
        while pos < x_count {
            idx[pos] += 1;
            if idx[pos] < f.order {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == x_count {
            break;
        }
    }
    Ok(true)
}

/// Does some realization positively realize every disjunct's witness?
/// This is the witness-side reading of sentence truth in `f`.
pub fn positively_realizable(
    ea: &EaSentence,
    f: &FiniteGroup,
    const_assignment: &BTreeMap<String, usize>,
) -> Result<bool> {
    let witnesses: Vec<AbstractWitness> = (0..ea.disjuncts.len())
        .map(|i| witness_of_disjunct(ea, i))
        .collect::<Result<_>>()?;
    let y = ea.y_vars.len();
    let space = (f.order as f64).powi(y as i32);
    if space > 1e7 {
        return Err(Error::BudgetExceeded(format!(
            "{space} realizations exceed 1e7"
        )));
    }
    let mut idx = vec![0usize; y];
    loop {
        let all = witnesses
            .iter()
            .map(|w| realizes_positively_finite(w, &idx, f, const_assignment))
            .collect::<Result<Vec<bool>>>()?;
        if all.iter().all(|&b| b) {
            return Ok(true);
        }
        let mut pos = 0;
        while pos < y {
            idx[pos] += 1;
            if idx[pos] < f.order {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == y || y == 0 {
            break;
        }
    }
    Ok(false)
}

/// Sentence truth in a finite group, decided through the abstract-witness
/// route. Sentences with prefix `E*A*` go through directly; `A*E*`
/// sentences are decided by negating (the negation is `E*A*`).
pub fn finite_truth_via_witnesses(
    s: &Sentence,
    f: &FiniteGroup,
    const_assignment: &BTreeMap<String, usize>,
) -> Result<bool> {
    match to_ea_normal(s) {
        Ok(ea) => positively_realizable(&ea, f, const_assignment),
        Err(Error::UnsupportedPrefix(_)) => {
            let neg = negate(s)?;
            let ea = to_ea_normal(&neg)?;
            Ok(!positively_realizable(&ea, f, const_assignment)?)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        let s = parse_sentence("E y A x ( [x,y] = 1 | x != 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        assert_eq!(ea.disjuncts.len(), 1);
        assert_eq!(ea.disjuncts[0].equations.len(), 1);
        assert_eq!(ea.disjuncts[0].inequations.len(), 1);

        let s = parse_sentence("E y ( y = 1 ) & ( y^2 = 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        assert_eq!(ea.disjuncts.len(), 2);

        let s = parse_sentence("A x E y ( y^2 = x )").unwrap();
        assert!(matches!(
            to_ea_normal(&s),
            Err(Error::UnsupportedPrefix(_))
        ));
    }

    #[test]
    fn witness_construction() {
        let s = parse_sentence("E y A x ( x = 1 | x*y != 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        let w = witness_of_disjunct(&ea, 0).unwrap();
        assert_eq!(w.group.rank(), 2);
        assert_eq!(w.h_rank, 1);
        assert_eq!(w.j_map, vec![1]);
        assert_eq!(w.group.relators.len(), 1);
        assert_eq!(w.v.len(), 1);
        assert!(!w.v_empty_marked);

        // no inequations: the witness group is free
        let s = parse_sentence("E y A x ( [x,y] = 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        let w = witness_of_disjunct(&ea, 0).unwrap();
        assert!(w.group.relators.is_empty());

        // no equations: V is empty-marked
        let s = parse_sentence("E y A x ( x*y != 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        let w = witness_of_disjunct(&ea, 0).unwrap();
        assert!(w.v_empty_marked);
    }

    #[test]
    fn classify_examples() {
        let c = classify(&parse_sentence("A x E y ( y^5 = x )").unwrap());
        assert!(c.positive);
        assert!(!c.one_quantifier);
        assert!(!c.exists_forall);

        let c = classify(&parse_sentence("E y A x ( x*y != 1 )").unwrap());
        assert!(!c.positive);
        assert!(c.exists_forall);

        let c = classify(&parse_sentence("A x ( x = 1 )").unwrap());
        assert!(c.one_quantifier);
        assert!(c.exists_forall);

        let c = classify(&parse_sentence("A x A y ( [x,y] = 1 )").unwrap());
        assert!(c.one_quantifier);
    }

    #[test]
    fn silly_battery() {
        let rank = 2;
        let x = Word::generator(0);
        let y = Word::generator(1);
        let comm = x.mul(&y).mul(&x.inverse()).mul(&y.inverse());
        assert!(is_silly(&Word::identity(), rank));
        assert!(is_silly(&x, rank));
        assert!(!is_silly(&x.pow(2), rank));
        assert!(is_silly(&x.pow(2).mul(&y.pow(3)), rank));
        assert!(!is_silly(&comm, rank));
        assert!(!is_silly(&comm.mul(&x.pow(2)).mul(&y.pow(4)), rank));
    }

    #[test]
    fn positive_realization_examples() {
        let consts = BTreeMap::new();
        // V contains the empty word: always positively realized
        let s = parse_sentence("E y A x ( x*x^-1 = 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        let w = witness_of_disjunct(&ea, 0).unwrap();
        assert!(w.v[0].is_identity());
        let f = FiniteGroup::cyclic(4);
        assert!(realizes_positively_finite(&w, &[0], &f, &consts).unwrap());

        // G free, V = {x}: the nonidentity assignment poisons
        let s = parse_sentence("E y A x ( x = 1 )").unwrap();
        let ea = to_ea_normal(&s).unwrap();
        let w = witness_of_disjunct(&ea, 0).unwrap();
        let z2 = FiniteGroup::cyclic(2);
        assert!(!realizes_positively_finite(&w, &[0], &z2, &consts).unwrap());
        let z1 = FiniteGroup::cyclic(1);
        assert!(realizes_positively_finite(&w, &[0], &z1, &consts).unwrap());
    }

    #[test]
    fn witness_truth_matches_model_checking() {
        let consts = BTreeMap::new();
        let battery = [
            "A x E y ( y^2 = x )",
            "A x E y ( y^3 = x )",
            "E y A x ( [x,y] = 1 )",
            "A x ( x = 1 )",
            "E y ( y != 1 )",
            "A x A y ( [x,y] = 1 )",
        ];
        for text in battery {
            let s = parse_sentence(text).unwrap();
            for f in FiniteGroup::all_up_to_order_6() {
                let direct = holds_in_finite(&s, &f, &consts).unwrap();
                let via = finite_truth_via_witnesses(&s, &f, &consts).unwrap();
                assert_eq!(direct, via, "{text} disagrees on {}", f.name);
            }
        }
    }

    #[test]
    fn negation_roundtrip_truth() {
        let consts = BTreeMap::new();
        let s = parse_sentence("E y A x ( [x,y] = 1 | x = 1 )").unwrap();
        let n = negate(&s).unwrap();
        for f in FiniteGroup::all_up_to_order_6() {
            let a = holds_in_finite(&s, &f, &consts).unwrap();
            let b = holds_in_finite(&n, &f, &consts).unwrap();
            assert_ne!(a, b, "negation must flip truth on {}", f.name);
        }
    }
}
