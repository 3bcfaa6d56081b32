//! Word-problem decisions in small-cancellation quotients via Dehn's
//! algorithm, with replayable traces, Greendlinger-bound injectivity
//! certificates, and an independent brute-force normal-closure oracle.

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::smallcancel::{sc_report, symmetrize, ElementOrigin, Rational, RelatorSet, SCReport};
use crate::words::{ball, cyclic_reduce, Letter, Word};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// An immutable handle on a quotient presentation: symmetrized relators,
/// a prefix trie for subword search, and the piece report. `sound` means
/// the Dehn decisions below are complete (C'(1/6)); for the free group
/// (no relators) free reduction is already exact, so the handle is sound
/// with a vacuous report.
#[derive(Debug, Clone)]
pub struct QuotientHandle {
    pub presentation: Presentation,
    pub relator_set: RelatorSet,
    pub report: Option<SCReport>,
    pub sound: bool,
    elements: Vec<Word>,
    origins: Vec<ElementOrigin>,
    matcher: Matcher,
    /// T - 3*Delta: the classical kernel length bound, when relators exist
    greendlinger_bound: Option<i64>,
}

/// Candidate priority: shortest element first, then relator, rotation and
/// orientation. The first valid candidate in this order wins, which keeps
/// traces deterministic.
fn elem_key(elements: &[Word], origins: &[ElementOrigin], id: u32) -> (usize, usize, usize, bool) {
    let o = &origins[id as usize];
    (
        elements[id as usize].len(),
        o.relator,
        o.rotation,
        o.inverted,
    )
}

#[derive(Debug, Clone)]
struct TrieNode {
    children: Vec<(Letter, u32)>,
    /// element of minimal key having this node's path as a prefix
    best: u32,
}

/// Prefix trie over the symmetrized elements; affordable for desk-scale
/// sets. Larger sets fall back to a direct scan with identical semantics.
#[derive(Debug, Clone)]
enum Matcher {
    Trie(Vec<TrieNode>),
    Scan,
}

fn build_trie(elements: &[Word], origins: &[ElementOrigin]) -> Vec<TrieNode> {
    let mut nodes: Vec<TrieNode> = vec![TrieNode {
        children: Vec::new(),
        best: 0,
    }];
    for (id, w) in elements.iter().enumerate() {
        let id = id as u32;
        let mut node = 0u32;
        for &l in w.letters() {
            let next = match nodes[node as usize]
                .children
                .iter()
                .find(|(c, _)| *c == l)
            {
                Some(&(_, n)) => {
                    if elem_key(elements, origins, id) < elem_key(elements, origins, nodes[n as usize].best) {
                        nodes[n as usize].best = id;
                    }
                    n
                }
                None => {
                    let n = nodes.len() as u32;
                    nodes.push(TrieNode {
                        children: Vec::new(),
                        best: id,
                    });
                    nodes[node as usize].children.push((l, n));
                    n
                }
            };
            node = next;
        }
    }
    nodes
}

impl QuotientHandle {
    pub fn new(presentation: Presentation, lambda0: Rational, epsilon0: Rational) -> Result<Self> {
        let relator_set =
            RelatorSet::normalized(presentation.alphabet.clone(), &presentation.relators)?;
        let report = if relator_set.is_empty() {
            None
        } else {
            Some(sc_report(&relator_set, lambda0, epsilon0)?)
        };
        let sym = symmetrize(&relator_set);
        let mut elements = Vec::with_capacity(sym.element_count());
        let mut origins = Vec::with_capacity(sym.element_count());
        for e in sym.element_refs() {
            elements.push(sym.element_word(e));
            origins.push(sym.origin(e));
        }
        let total: usize = elements.iter().map(|e| e.len()).sum();
        let matcher = if total <= 50_000 {
            Matcher::Trie(build_trie(&elements, &origins))
        } else {
            Matcher::Scan
        };
        let sound = report.as_ref().map_or(true, |r| r.cprime_sixth);
        let greendlinger_bound = report.as_ref().map(|r| r.t as i64 - 3 * r.delta as i64);
        Ok(QuotientHandle {
            presentation,
            relator_set,
            report,
            sound,
            elements,
            origins,
            matcher,
            greendlinger_bound,
        })
    }

    /// Handle with the default 1/6 targets.
    pub fn sixth(presentation: Presentation) -> Result<Self> {
        QuotientHandle::new(presentation, Rational::new(1, 6), Rational::new(1, 6))
    }

    pub fn is_free(&self) -> bool {
        self.elements.is_empty()
    }

    /// Classical kernel length bound `(1 - 3 lambda) T = T - 3 Delta`:
    /// every nontrivial kernel element is at least this long.
    pub fn kernel_length_bound(&self) -> Option<i64> {
        self.greendlinger_bound
    }

    /// Longest match of the cyclic word of `w` against the symmetrized set,
    /// scanning offsets left to right. Returns the leftmost-longest
    /// half-exceeding match as `(offset, matched_len, element_id)`. A match
    /// at depth `d` is valid for an element of length `r` when `2d > r`;
    /// the winning element at a given depth is the one of minimal
    /// (length, relator, rotation, orientation).
    fn find_half_match(&self, w: &Word) -> Option<(usize, usize, usize)> {
        let n = w.len();
        if n == 0 {
            return None;
        }
        let mut doubled = w.letters().to_vec();
        doubled.extend_from_slice(w.letters());
        for i in 0..n {
            let window = &doubled[i..i + n];
            let hit = match &self.matcher {
                Matcher::Trie(nodes) => self.match_at_trie(nodes, window),
                Matcher::Scan => self.match_at_scan(window),
            };
            if let Some((d, id)) = hit {
                return Some((i, d, id));
            }
        }
        None
    }

    fn match_at_trie(&self, nodes: &[TrieNode], window: &[Letter]) -> Option<(usize, usize)> {
        let mut node = 0u32;
        let mut hit: Option<(usize, usize)> = None;
        for (d, &l) in window.iter().enumerate() {
            let d = d + 1;
            match nodes[node as usize].children.iter().find(|(c, _)| *c == l) {
                Some(&(_, next)) => node = next,
                None => break,
            }
            let best = nodes[node as usize].best;
            if 2 * d > self.elements[best as usize].len() {
                hit = Some((d, best as usize));
            }
        }
        hit
    }

    fn match_at_scan(&self, window: &[Letter]) -> Option<(usize, usize)> {
        let mut hit: Option<(usize, usize)> = None;
        for (id, e) in self.elements.iter().enumerate() {
            let lcp = e
                .letters()
                .iter()
                .zip(window)
                .take_while(|(a, b)| a == b)
                .count();
            if 2 * lcp > e.len() {
                let better = match hit {
                    None => true,
                    Some((d, prev)) => {
                        lcp > d
                            || (lcp == d
                                && elem_key(&self.elements, &self.origins, id as u32)
                                    < elem_key(&self.elements, &self.origins, prev as u32))
                    }
                };
                if better {
                    hit = Some((lcp, id));
                }
            }
        }
        hit
    }
}

/// One step of a Dehn reduction. Replaying the steps from the input word
/// reproduces the recorded result exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DehnStep {
    /// strip `conjugator . core . conjugator^-1` down to the core
    CyclicReduce { conjugator: Word },
    /// pass to the rotation starting at `offset`
    Rotate { offset: usize },
    /// the prefix of length `matched` equals a prefix of `element`; replace
    /// it by the inverse of the element's remainder
    Replace {
        element: Word,
        origin: ElementOrigin,
        matched: usize,
        replacement: Word,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrivialityStatus {
    Trivial,
    Nontrivial,
    Unknown,
}

/// Decision record: the status, the Dehn-irreducible residue, the full
/// step trace, and whether the presentation was sound when deciding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialityVerdict {
    pub status: TrivialityStatus,
    pub residue: Word,
    pub trace: Vec<DehnStep>,
    pub sound: bool,
}

impl TrivialityVerdict {
    pub fn is_trivial(&self) -> bool {
        self.status == TrivialityStatus::Trivial
    }

    pub fn is_nontrivial(&self) -> bool {
        self.status == TrivialityStatus::Nontrivial
    }
}

/// Greedy Dehn reduction of the cyclic word of `w`: repeatedly cyclically
/// reduce, then replace the leftmost-longest subword exceeding half of a
/// symmetrized relator by the shorter complementary side. Terminates since
/// every replacement strictly shortens the word.
pub fn dehn_reduce(w: &Word, q: &QuotientHandle) -> (Word, Vec<DehnStep>) {
    let mut cur = w.clone();
    let mut trace = Vec::new();
    loop {
        let cw = cyclic_reduce(&cur);
        if !cw.conjugator.is_identity() {
            trace.push(DehnStep::CyclicReduce {
                conjugator: cw.conjugator.clone(),
            });
            cur = cw.word;
        }
        match q.find_half_match(&cur) {
            None => return (cur, trace),
            Some((offset, matched, id)) => {
                if offset > 0 {
                    trace.push(DehnStep::Rotate { offset });
                    cur = cur.rotated(offset);
                }
                let element = &q.elements[id];
                let replacement = Word::reduce(&element.letters()[matched..]).inverse();
                let rest = Word::reduce(&cur.letters()[matched..]);
                trace.push(DehnStep::Replace {
                    element: element.clone(),
                    origin: q.origins[id],
                    matched,
                    replacement: replacement.clone(),
                });
                cur = replacement.mul(&rest);
            }
        }
    }
}

/// Re-execute a trace from `input`, checking every step's side conditions.
pub fn replay_trace(input: &Word, trace: &[DehnStep]) -> Result<Word> {
    let mut cur = input.clone();
    for step in trace {
        match step {
            DehnStep::CyclicReduce { conjugator } => {
                let inner = conjugator.inverse().mul(&cur).mul(conjugator);
                if !inner.is_cyclically_reduced() || inner.conjugate(conjugator) != cur {
                    return Err(Error::invalid("cyclic reduce step does not replay"));
                }
                cur = inner;
            }
            DehnStep::Rotate { offset } => {
                if *offset >= cur.len().max(1) {
                    return Err(Error::invalid("rotation offset out of range"));
                }
                cur = cur.rotated(*offset);
            }
            DehnStep::Replace {
                element,
                matched,
                replacement,
                ..
            } => {
                if cur.len() < *matched
                    || element.len() < *matched
                    || cur.letters()[..*matched] != element.letters()[..*matched]
                {
                    return Err(Error::invalid("replace step prefix mismatch"));
                }
                if 2 * *matched <= element.len() {
                    return Err(Error::invalid("replace step is not over half"));
                }
                let expect = Word::reduce(&element.letters()[*matched..]).inverse();
                if expect != *replacement {
                    return Err(Error::invalid("replacement is not the complementary side"));
                }
                let rest = Word::reduce(&cur.letters()[*matched..]);
                cur = replacement.mul(&rest);
            }
        }
    }
    Ok(cur)
}

/// Triviality of the image of `w` in the quotient. Sound handles give
/// definite answers; unsound handles only certify the trivial case (an
/// empty residue replays regardless of the piece condition).
pub fn is_trivial(w: &Word, q: &QuotientHandle) -> TrivialityVerdict {
    let (residue, trace) = dehn_reduce(w, q);
    let status = if residue.is_identity() {
        TrivialityStatus::Trivial
    } else if q.sound {
        TrivialityStatus::Nontrivial
    } else {
        TrivialityStatus::Unknown
    };
    TrivialityVerdict {
        status,
        residue,
        trace,
        sound: q.sound,
    }
}

/// Equality test `u = v` in the quotient, via triviality of `u v^-1`.
pub fn eq_in_quotient(u: &Word, v: &Word, q: &QuotientHandle) -> TrivialityVerdict {
    is_trivial(&u.mul(&v.inverse()), q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectivityCertificate {
    pub certified: bool,
    pub failures: Vec<(Word, Word)>,
    pub pairs_checked: u64,
    /// pairs settled by the kernel length bound without running Dehn
    pub fast_path_hits: u64,
}

/// Certify that the quotient map is injective on the given finite set:
/// every difference `u v^-1` of distinct members stays nontrivial. Short
/// differences are settled at once by the kernel length bound.
pub fn injectivity_certificate(
    family: &[Word],
    q: &QuotientHandle,
) -> Result<InjectivityCertificate> {
    if !q.sound {
        return Err(Error::UnsoundPresentation(
            "injectivity certification needs C'(1/6)".into(),
        ));
    }
    let bound = q.kernel_length_bound();
    let mut failures = Vec::new();
    let mut pairs = 0u64;
    let mut fast = 0u64;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let diff = family[i].mul(&family[j].inverse());
            if diff.is_identity() {
                // duplicated entries collapse by definition
                failures.push((family[i].clone(), family[j].clone()));
                continue;
            }
            pairs += 1;
            if let Some(b) = bound {
                if (diff.len() as i64) < b {
                    fast += 1;
                    continue;
                }
            } else {
                // free group: distinct reduced words always differ
                fast += 1;
                continue;
            }
            if is_trivial(&diff, q).is_trivial() {
                failures.push((family[i].clone(), family[j].clone()));
            }
        }
    }
    Ok(InjectivityCertificate {
        certified: failures.is_empty(),
        failures,
        pairs_checked: pairs,
        fast_path_hits: fast,
    })
}

/// Search budget for the normal-closure oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_factors: usize,
    pub max_conjugator_len: usize,
}

/// One conjugate factor `g r^s g^-1` of a membership certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateFactor {
    pub conjugator: Word,
    pub relator: usize,
    pub inverted: bool,
}

impl ConjugateFactor {
    pub fn word(&self, relators: &RelatorSet) -> Word {
        let r = &relators.relators()[self.relator];
        let r = if self.inverted { r.inverse() } else { r.clone() };
        r.conjugate(&self.conjugator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleOutcome {
    /// certificate: the listed factors multiply to the word in the free group
    Member(Vec<ConjugateFactor>),
    NotFoundWithinBudget,
}

impl OracleOutcome {
    pub fn is_member(&self) -> bool {
        matches!(self, OracleOutcome::Member(_))
    }
}

fn compact(w: &Word) -> Box<[i8]> {
    w.letters().iter().map(|l| l.code() as i8).collect()
}

/// Breadth-first search over products of conjugates of relators, testing
/// free equality with `w`. A `Member` answer is a certificate; `NotFound`
/// is inconclusive on its own. Independent of Dehn's algorithm by design.
pub fn normal_closure_member_oracle(
    w: &Word,
    relators: &RelatorSet,
    budget: OracleBudget,
) -> Result<OracleOutcome> {
    if relators
        .relators()
        .iter()
        .chain(std::iter::once(w))
        .any(|r| r.max_gen().map_or(false, |g| g >= 126))
    {
        return Err(Error::invalid("oracle supports ranks below 126"));
    }
    if w.is_identity() {
        return Ok(OracleOutcome::Member(Vec::new()));
    }
    if relators.is_empty() {
        return Ok(OracleOutcome::NotFoundWithinBudget);
    }
    let rank = relators.alphabet.rank();
    // deduplicated conjugate alphabet, in (conjugator, relator, sign) order
    let mut conjugates: Vec<(Word, ConjugateFactor)> = Vec::new();
    let mut seen: HashMap<Box<[i8]>, ()> = HashMap::new();
    for g in ball(rank, budget.max_conjugator_len) {
        for (ri, r) in relators.relators().iter().enumerate() {
            for inverted in [false, true] {
                let cw = {
                    let r = if inverted { r.inverse() } else { r.clone() };
                    r.conjugate(&g)
                };
                if seen.insert(compact(&cw), ()).is_none() {
                    conjugates.push((
                        cw,
                        ConjugateFactor {
                            conjugator: g.clone(),
                            relator: ri,
                            inverted,
                        },
                    ));
                }
            }
        }
    }
    let half = budget.max_factors.div_ceil(2);
    if conjugates
        .len()
        .checked_pow(half as u32)
        .map_or(true, |n| n > 20_000_000)
    {
        return Err(Error::BudgetExceeded(format!(
            "oracle layer would exceed 2e7 states ({} conjugates at half-depth {})",
            conjugates.len(),
            half
        )));
    }

    // layers[k]: reduced products of exactly k conjugates, first-found
    let mut layer_words: Vec<Vec<Word>> = vec![vec![Word::identity()]];
    let mut layer_factors: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new()]];
    let mut layer_index: Vec<HashMap<Box<[i8]>, u32>> = Vec::new();
    let mut index0 = HashMap::new();
    index0.insert(compact(&Word::identity()), 0u32);
    layer_index.push(index0);

    for k in 1..=half {
        let mut words = Vec::new();
        let mut factors: Vec<Vec<u32>> = Vec::new();
        let mut index: HashMap<Box<[i8]>, u32> = HashMap::new();
        for (pi, p) in layer_words[k - 1].iter().enumerate() {
            for (ci, (c, _)) in conjugates.iter().enumerate() {
                let prod = p.mul(c);
                let key = compact(&prod);
                if !index.contains_key(&key) {
                    let mut f = layer_factors[k - 1][pi].clone();
                    f.push(ci as u32);
                    index.insert(key, words.len() as u32);
                    words.push(prod);
                    factors.push(f);
                }
            }
        }
        layer_words.push(words);
        layer_factors.push(factors);
        layer_index.push(index);
    }

    let materialize = |ids: &[u32]| -> Vec<ConjugateFactor> {
        ids.iter()
            .map(|&i| conjugates[i as usize].1.clone())
            .collect()
    };

    let target = compact(w);
    for k in 0..=half {
        if let Some(&idx) = layer_index[k].get(&target) {
            return Ok(OracleOutcome::Member(materialize(
                &layer_factors[k][idx as usize],
            )));
        }
    }
    // split k = a + half for depths beyond the stored layers
    for k in half + 1..=budget.max_factors {
        let a = k - half;
        for (pi, p) in layer_words[a].iter().enumerate() {
            let tail = p.inverse().mul(w);
            if let Some(&idx) = layer_index[half].get(&compact(&tail)) {
                let mut ids = layer_factors[a][pi].clone();
                ids.extend_from_slice(&layer_factors[half][idx as usize]);
                return Ok(OracleOutcome::Member(materialize(&ids)));
            }
        }
    }
    Ok(OracleOutcome::NotFoundWithinBudget)
}
