//! Conjugacy-invariant norm computations: word length over conjugates of a
//! fixed element, commutator length, verbal word length, plus the integer
//! abelianization obstructions that certify infinite values.

use crate::dehn::{eq_in_quotient, is_trivial, QuotientHandle};
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::smallcancel::Rational;
use crate::snf::{in_row_lattice, smith_normal_form, SmithDecomposition};
use crate::words::{ball, Word};
use num::bigint::BigInt;
use num::Zero;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Integer normal form of the relator exponent matrix: the abelianization
/// of the presented group, with exact lattice membership.
#[derive(Debug, Clone)]
pub struct AbelianizationData {
    pub rank: usize,
    pub exponent_matrix: Vec<Vec<BigInt>>,
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
    snf: SmithDecomposition,
}

impl AbelianizationData {
    pub fn image_vector(&self, w: &Word) -> Vec<BigInt> {
        w.exponent_vector(self.rank)
            .into_iter()
            .map(BigInt::from)
            .collect()
    }

    /// Is the exponent vector of `w` in the relator row lattice, i.e. does
    /// `w` die in the abelianized quotient?
    pub fn kills(&self, w: &Word) -> bool {
        self.in_lattice(&self.image_vector(w))
    }

    pub fn in_lattice(&self, vec: &[BigInt]) -> bool {
        if self.exponent_matrix.is_empty() {
            return vec.iter().all(|x| x.is_zero());
        }
        in_row_lattice(&self.snf, vec)
    }

    /// `Z^free_rank + sum Z/d_i`, dropping unit factors.
    pub fn torsion_description(&self) -> String {
        let torsion: Vec<String> = self
            .invariant_factors
            .iter()
            .filter(|d| **d != BigInt::from(1))
            .map(|d| format!("Z/{d}"))
            .collect();
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        parts.extend(torsion);
        if parts.is_empty() {
            "trivial".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// Smith form of the relator exponent matrix of a finite presentation.
pub fn abelianization(p: &Presentation) -> AbelianizationData {
    let rank = p.rank();
    let matrix: Vec<Vec<BigInt>> = p
        .relators
        .iter()
        .map(|r| {
            r.exponent_vector(rank)
                .into_iter()
                .map(BigInt::from)
                .collect()
        })
        .collect();
    let snf = smith_normal_form(&matrix);
    let invariant_factors = snf.invariant_factors();
    let free_rank = rank - invariant_factors.len();
    AbelianizationData {
        rank,
        exponent_matrix: matrix,
        invariant_factors,
        free_rank,
        snf,
    }
}

/// Lattice generated by the relator rows plus extra generators; membership
/// of an exponent vector certifies (non-)membership in the abelianized
/// image of a normally generated subgroup.
fn augmented_lattice(p: &Presentation, extra: &[Vec<BigInt>]) -> SmithDecomposition {
    let rank = p.rank();
    let mut matrix: Vec<Vec<BigInt>> = p
        .relators
        .iter()
        .map(|r| {
            r.exponent_vector(rank)
                .into_iter()
                .map(BigInt::from)
                .collect()
        })
        .collect();
    matrix.extend(extra.iter().cloned());
    smith_normal_form(&matrix)
}

/// One conjugate `g a^{+-1} g^-1` in a norm expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugatePower {
    pub conjugator: Word,
    pub inverted: bool,
}

impl ConjugatePower {
    pub fn word(&self, alpha: &Word) -> Word {
        let a = if self.inverted {
            alpha.inverse()
        } else {
            alpha.clone()
        };
        a.conjugate(&self.conjugator)
    }
}

pub fn conjugate_product(alpha: &Word, factors: &[ConjugatePower]) -> Word {
    factors
        .iter()
        .fold(Word::identity(), |acc, f| acc.mul(&f.word(alpha)))
}

/// Explicit expression realizing a norm bound; replayable against the
/// element in the ambient quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormExpression {
    /// element = product of conjugates of alpha
    ConjugateProduct {
        alpha: Word,
        factors: Vec<ConjugatePower>,
    },
    /// element^q = product of conjugates of alpha (stable bound p*L/q)
    StablePower {
        q: u64,
        alpha: Word,
        factors: Vec<ConjugatePower>,
    },
    /// element = product of commutators
    CommutatorProduct { pairs: Vec<(Word, Word)> },
    /// element = w(t_1) ... w(t_k) for explicit substitution tuples
    Substitution { word: Word, tuples: Vec<Vec<Word>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    EllAlpha { alpha: Word },
    StableEllAlpha { alpha: Word },
    Cl,
    WLength { word: Word },
}

/// A certified norm upper bound with its realizing expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormCertificate {
    pub element: Word,
    pub kind: NormKind,
    pub bound: Rational,
    pub expression: NormExpression,
    /// tower stage the bound holds at; None means the free group
    pub stage: Option<usize>,
}

impl NormCertificate {
    /// Re-derive the claimed identity in the given quotient. Exact: free
    /// reduction when the handle is free, Dehn reduction otherwise.
    pub fn replay(&self, q: &QuotientHandle) -> Result<()> {
        let (lhs, rhs) = match &self.expression {
            NormExpression::ConjugateProduct { alpha, factors } => {
                (self.element.clone(), conjugate_product(alpha, factors))
            }
            NormExpression::StablePower { q: qq, alpha, factors } => (
                self.element.pow(*qq as i64),
                conjugate_product(alpha, factors),
            ),
            NormExpression::CommutatorProduct { pairs } => {
                let mut prod = Word::identity();
                for (u, v) in pairs {
                    let comm = u.mul(v).mul(&u.inverse()).mul(&v.inverse());
                    prod = prod.mul(&comm);
                }
                (self.element.clone(), prod)
            }
            NormExpression::Substitution { word, tuples } => {
                let mut prod = Word::identity();
                for tuple in tuples {
                    prod = prod.mul(&substitute(word, tuple)?);
                }
                (self.element.clone(), prod)
            }
        };
        let verdict = eq_in_quotient(&lhs, &rhs, q);
        if verdict.is_trivial() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "certificate does not replay: residue {}",
                verdict.residue.canonical_text()
            )))
        }
    }

    /// Conjugating every factor by `g` certifies the conjugate element at
    /// the same factor count.
    pub fn conjugated(&self, g: &Word) -> NormCertificate {
        let mut out = self.clone();
        out.element = self.element.conjugate(g);
        out.expression = match &self.expression {
            NormExpression::ConjugateProduct { alpha, factors } => {
                NormExpression::ConjugateProduct {
                    alpha: alpha.clone(),
                    factors: factors
                        .iter()
                        .map(|f| ConjugatePower {
                            conjugator: g.mul(&f.conjugator),
                            inverted: f.inverted,
                        })
                        .collect(),
                }
            }
            NormExpression::StablePower { q, alpha, factors } => NormExpression::StablePower {
                q: *q,
                alpha: alpha.clone(),
                factors: factors
                    .iter()
                    .map(|f| ConjugatePower {
                        conjugator: g.mul(&f.conjugator),
                        inverted: f.inverted,
                    })
                    .collect(),
            },
            NormExpression::CommutatorProduct { pairs } => NormExpression::CommutatorProduct {
                pairs: pairs
                    .iter()
                    .map(|(u, v)| (g.mul(u).mul(&g.inverse()), g.mul(v).mul(&g.inverse())))
                    .collect(),
            },
            NormExpression::Substitution { word, tuples } => NormExpression::Substitution {
                word: word.clone(),
                tuples: tuples
                    .iter()
                    .map(|t| t.iter().map(|s| g.mul(s).mul(&g.inverse())).collect())
                    .collect(),
            },
        };
        out
    }

    pub fn factor_count(&self) -> usize {
        match &self.expression {
            NormExpression::ConjugateProduct { factors, .. }
            | NormExpression::StablePower { factors, .. } => factors.len(),
            NormExpression::CommutatorProduct { pairs } => pairs.len(),
            NormExpression::Substitution { tuples, .. } => tuples.len(),
        }
    }
}

/// Evidence that a norm value is infinite: an exponent vector outside the
/// relevant abelianized lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfinityCertificate {
    pub element: Word,
    pub vector: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormOutcome {
    Bounded(NormCertificate),
    Infinite(InfinityCertificate),
    Unknown,
}

impl NormOutcome {
    pub fn bound(&self) -> Option<Rational> {
        match self {
            NormOutcome::Bounded(c) => Some(c.bound),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormBudget {
    pub max_factors: usize,
    pub max_conjugator_len: usize,
}

fn infinity(element: &Word, rank: usize, reason: &str) -> NormOutcome {
    NormOutcome::Infinite(InfinityCertificate {
        element: element.clone(),
        vector: element
            .exponent_vector(rank)
            .iter()
            .map(|x| x.to_string())
            .collect(),
        reason: reason.to_string(),
    })
}

/// Level-bounded search for `gamma` as a product of at most `max_factors`
/// words from `generators`, testing Dehn equality in the quotient. Level
/// order makes the first hit the shortest expression.
fn product_search(
    gamma: &Word,
    generators: &[(Word, usize)],
    max_factors: usize,
    q: &QuotientHandle,
) -> Option<Vec<usize>> {
    if is_trivial(gamma, q).is_trivial() {
        return Some(Vec::new());
    }
    let mut frontier: Vec<(Word, Vec<usize>)> = vec![(Word::identity(), Vec::new())];
    let mut seen: HashSet<Word> = HashSet::new();
    for _ in 0..max_factors {
        let mut next = Vec::new();
        for (prefix, ids) in &frontier {
            for (gi, (g, _)) in generators.iter().enumerate() {
                let prod = prefix.mul(g);
                if !seen.insert(prod.clone()) {
                    continue;
                }
                let mut nids = ids.clone();
                nids.push(gi);
                if eq_in_quotient(&prod, gamma, q).is_trivial() {
                    return Some(nids);
                }
                next.push((prod, nids));
            }
        }
        frontier = next;
    }
    None
}

/// Upper bound on the word length of `gamma` over all conjugates of
/// `alpha^{+-1}`. Infinity only ever comes from the abelianization
/// obstruction, never from search exhaustion.
pub fn ell_alpha_bound(
    gamma: &Word,
    alpha: &Word,
    q: &QuotientHandle,
    budget: NormBudget,
) -> NormOutcome {
    let rank = q.presentation.rank();
    let alpha_vec: Vec<BigInt> = alpha
        .exponent_vector(rank)
        .into_iter()
        .map(BigInt::from)
        .collect();
    let lattice = augmented_lattice(&q.presentation, &[alpha_vec]);
    let gamma_vec: Vec<BigInt> = gamma
        .exponent_vector(rank)
        .into_iter()
        .map(BigInt::from)
        .collect();
    if !in_row_lattice(&lattice, &gamma_vec) {
        return infinity(
            gamma,
            rank,
            "exponent vector outside the lattice of relators and alpha",
        );
    }
    // generator list: conjugates of alpha^{+-1}, conjugators from the ball
    let mut generators: Vec<(Word, usize)> = Vec::new();
    let mut factor_data: Vec<ConjugatePower> = Vec::new();
    let mut seen = HashSet::new();
    for g in ball(rank, budget.max_conjugator_len) {
        for inverted in [false, true] {
            let cp = ConjugatePower {
                conjugator: g.clone(),
                inverted,
            };
            let word = cp.word(alpha);
            if seen.insert(word.clone()) {
                generators.push((word, factor_data.len()));
                factor_data.push(cp);
            }
        }
    }
    match product_search(gamma, &generators, budget.max_factors, q) {
        Some(ids) => {
            let factors: Vec<ConjugatePower> = ids
                .iter()
                .map(|&i| factor_data[generators[i].1].clone())
                .collect();
            let bound = Rational::from_integer(factors.len() as i64);
            NormOutcome::Bounded(NormCertificate {
                element: gamma.clone(),
                kind: NormKind::EllAlpha {
                    alpha: alpha.clone(),
                },
                bound,
                expression: NormExpression::ConjugateProduct {
                    alpha: alpha.clone(),
                    factors,
                },
                stage: None,
            })
        }
        None => NormOutcome::Unknown,
    }
}

/// Upper bound on commutator length, or the abelianization witness that
/// the element lies outside the derived subgroup.
pub fn cl_bound(gamma: &Word, q: &QuotientHandle, budget: NormBudget) -> NormOutcome {
    let rank = q.presentation.rank();
    let ab = abelianization(&q.presentation);
    if !ab.kills(gamma) {
        return infinity(gamma, rank, "nonzero image in the abelianization");
    }
    let mut generators: Vec<(Word, usize)> = Vec::new();
    let mut pair_data: Vec<(Word, Word)> = Vec::new();
    let mut seen = HashSet::new();
    let vertices = ball(rank, budget.max_conjugator_len);
    for u in &vertices {
        for v in &vertices {
            let comm = u.mul(v).mul(&u.inverse()).mul(&v.inverse());
            if comm.is_identity() {
                continue;
            }
            if seen.insert(comm.clone()) {
                generators.push((comm, pair_data.len()));
                pair_data.push((u.clone(), v.clone()));
            }
        }
    }
    match product_search(gamma, &generators, budget.max_factors, q) {
        Some(ids) => {
            let pairs: Vec<(Word, Word)> = ids
                .iter()
                .map(|&i| pair_data[generators[i].1].clone())
                .collect();
            NormOutcome::Bounded(NormCertificate {
                element: gamma.clone(),
                kind: NormKind::Cl,
                bound: Rational::from_integer(pairs.len() as i64),
                expression: NormExpression::CommutatorProduct { pairs },
                stage: None,
            })
        }
        None => NormOutcome::Unknown,
    }
}

/// Substitute `tuple[i]` for generator `i` of the verbal word.
pub fn substitute(word: &Word, tuple: &[Word]) -> Result<Word> {
    let need = word.max_gen().map_or(0, |g| g + 1);
    if tuple.len() < need {
        return Err(Error::invalid(format!(
            "substitution tuple has {} entries, word needs {need}",
            tuple.len()
        )));
    }
    let mut out = Word::identity();
    for &l in word.letters() {
        let img = &tuple[l.gen()];
        out = out.mul(&if l.is_inverse() { img.inverse() } else { img.clone() });
    }
    Ok(out)
}

/// Upper bound on the `w`-length of `g`: bounded search over substitution
/// tuples drawn from a ball, products of up to `max_factors` values.
pub fn w_length_bound(
    g: &Word,
    word: &Word,
    q: &QuotientHandle,
    budget: NormBudget,
) -> Result<NormOutcome> {
    let rank = q.presentation.rank();
    let arity = word.max_gen().map_or(0, |m| m + 1);
    if word.is_identity() {
        return Ok(if is_trivial(g, q).is_trivial() {
            NormOutcome::Bounded(NormCertificate {
                element: g.clone(),
                kind: NormKind::WLength { word: word.clone() },
                bound: Rational::from_integer(0),
                expression: NormExpression::Substitution {
                    word: word.clone(),
                    tuples: Vec::new(),
                },
                stage: None,
            })
        } else {
            infinity(g, rank, "the trivial word generates the trivial verbal subgroup")
        });
    }
    // abelianized obstruction: substituted values land in d * H_1 + relators
    let d = word
        .exponent_vector(arity)
        .iter()
        .fold(0i64, |acc, &x| num::integer::gcd(acc, x.abs()));
    let mut extra: Vec<Vec<BigInt>> = Vec::new();
    for i in 0..rank {
        let mut row = vec![BigInt::zero(); rank];
        row[i] = BigInt::from(d);
        extra.push(row);
    }
    let lattice = augmented_lattice(&q.presentation, &extra);
    let g_vec: Vec<BigInt> = g
        .exponent_vector(rank)
        .into_iter()
        .map(BigInt::from)
        .collect();
    if !in_row_lattice(&lattice, &g_vec) {
        return Ok(infinity(
            g,
            rank,
            "exponent vector outside the verbal sublattice",
        ));
    }
    // enumerate substituted values, deduplicated
    let vertices = ball(rank, budget.max_conjugator_len);
    let tuple_count = vertices.len().pow(arity as u32);
    if tuple_count > 2_000_000 {
        return Err(Error::BudgetExceeded(format!(
            "{tuple_count} substitution tuples"
        )));
    }
    let mut generators: Vec<(Word, usize)> = Vec::new();
    let mut tuple_data: Vec<Vec<Word>> = Vec::new();
    let mut seen = HashSet::new();
    let mut idx = vec![0usize; arity];
    loop {
        let tuple: Vec<Word> = idx.iter().map(|&i| vertices[i].clone()).collect();
        let value = substitute(word, &tuple)?;
        if !value.is_identity() && seen.insert(value.clone()) {
            generators.push((value, tuple_data.len()));
            tuple_data.push(tuple);
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == arity {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < vertices.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == arity {
            break;
        }
        if arity == 0 {
            break;
        }
    }
    Ok(match product_search(g, &generators, budget.max_factors, q) {
        Some(ids) => {
            let tuples: Vec<Vec<Word>> = ids
                .iter()
                .map(|&i| tuple_data[generators[i].1].clone())
                .collect();
            NormOutcome::Bounded(NormCertificate {
                element: g.clone(),
                kind: NormKind::WLength { word: word.clone() },
                bound: Rational::from_integer(tuples.len() as i64),
                expression: NormExpression::Substitution {
                    word: word.clone(),
                    tuples,
                },
                stage: None,
            })
        }
        None => NormOutcome::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn alpha2() -> Alphabet {
        Alphabet::with_rank(2).unwrap()
    }

    fn w(text: &str) -> Word {
        Word::parse(&alpha2(), text).unwrap()
    }

    fn free_handle() -> QuotientHandle {
        QuotientHandle::sixth(Presentation::free(alpha2())).unwrap()
    }

    #[test]
    fn abelianization_examples() {
        let p = Presentation::new(alpha2(), vec![w("a2b2").pow(5)]).unwrap();
        let ab = abelianization(&p);
        assert_eq!(ab.invariant_factors, vec![BigInt::from(10)]);
        assert_eq!(ab.free_rank, 1);
        assert_eq!(ab.torsion_description(), "Z^1 + Z/10");

        let free = abelianization(&Presentation::free(alpha2()));
        assert_eq!(free.free_rank, 2);
        assert!(free.invariant_factors.is_empty());

        let a1 = Alphabet::with_rank(1).unwrap();
        let killed = Presentation::new(a1, vec![Word::generator(0)]).unwrap();
        let ab = abelianization(&killed);
        assert_eq!(ab.free_rank, 0);
        assert_eq!(ab.torsion_description(), "trivial");
    }

    #[test]
    fn ell_alpha_examples() {
        let q = free_handle();
        let budget = NormBudget {
            max_factors: 3,
            max_conjugator_len: 2,
        };
        let alpha = w("a");
        let out = ell_alpha_bound(&alpha, &alpha, &q, budget);
        assert_eq!(out.bound(), Some(Rational::from_integer(1)));

        let gamma = alpha.conjugate(&w("ba")).mul(&alpha);
        let out = ell_alpha_bound(&gamma, &alpha, &q, budget);
        assert_eq!(out.bound(), Some(Rational::from_integer(2)));
        if let NormOutcome::Bounded(cert) = &out {
            cert.replay(&q).unwrap();
        }

        // b is not in the normal closure of a in the free group
        let out = ell_alpha_bound(&w("b"), &alpha, &q, budget);
        assert!(matches!(out, NormOutcome::Infinite(_)));
    }

    #[test]
    fn cl_examples() {
        let q = free_handle();
        let budget = NormBudget {
            max_factors: 2,
            max_conjugator_len: 1,
        };
        let comm = w("abAB");
        let out = cl_bound(&comm, &q, budget);
        assert_eq!(out.bound(), Some(Rational::from_integer(1)));
        if let NormOutcome::Bounded(cert) = &out {
            cert.replay(&q).unwrap();
            let conj = cert.conjugated(&w("ab"));
            assert_eq!(conj.factor_count(), cert.factor_count());
            conj.replay(&q).unwrap();
        }

        let out = cl_bound(&w("a"), &q, budget);
        assert!(matches!(out, NormOutcome::Infinite(_)));

        let a4 = Alphabet::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        let q4 = QuotientHandle::sixth(Presentation::free(a4.clone())).unwrap();
        let two = Word::parse(&a4, "abABcdCD").unwrap();
        let out = cl_bound(&two, &q4, budget);
        match out {
            NormOutcome::Bounded(c) => assert!(c.bound <= Rational::from_integer(2)),
            other => panic!("expected bound, got {other:?}"),
        }
    }

    #[test]
    fn w_length_examples() {
        let q = free_handle();
        let budget = NormBudget {
            max_factors: 2,
            max_conjugator_len: 2,
        };
        // w = x (silly): any element has length 1
        let x = Word::generator(0);
        let out = w_length_bound(&w("ab"), &x, &q, budget).unwrap();
        assert_eq!(out.bound(), Some(Rational::from_integer(1)));

        // w = x^2, g = a^2
        let out = w_length_bound(&w("a2"), &x.pow(2), &q, budget).unwrap();
        assert_eq!(out.bound(), Some(Rational::from_integer(1)));

        // w = [x, y], g = [a, b][a, b2]
        let comm_word = {
            let x = Word::generator(0);
            let y = Word::generator(1);
            x.mul(&y).mul(&x.inverse()).mul(&y.inverse())
        };
        let g = w("abAB").mul(&w("ab2AB2"));
        let out = w_length_bound(&g, &comm_word, &q, budget).unwrap();
        match out {
            NormOutcome::Bounded(c) => {
                assert!(c.bound <= Rational::from_integer(2));
                c.replay(&q).unwrap();
            }
            other => panic!("expected bound, got {other:?}"),
        }
    }
}
