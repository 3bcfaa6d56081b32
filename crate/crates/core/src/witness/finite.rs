//! Finite groups given by multiplication tables: the brute-force oracle
//! target for sentence truth and witness realization.

use crate::error::{Error, Result};
use crate::witness::syntax::{FactorBase, Quantifier, Sentence, VarWord};
use crate::words::Word;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Multiplication-table group. Index 0 is the identity; associativity,
/// identity and inverses are verified at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    pub name: String,
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(name: &str, mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = mul.len();
        if n == 0 {
            return Err(Error::invalid("empty multiplication table"));
        }
        for row in &mul {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::invalid("table is not n x n over 0..n"));
            }
        }
        for i in 0..n {
            if mul[0][i] != i || mul[i][0] != i {
                return Err(Error::invalid("index 0 is not an identity"));
            }
        }
        let mut inv = vec![usize::MAX; n];
        for i in 0..n {
            for j in 0..n {
                if mul[i][j] == 0 {
                    inv[i] = j;
                }
            }
            if inv[i] == usize::MAX {
                return Err(Error::invalid(format!("element {i} has no inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::invalid(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            name: name.to_string(),
            order: n,
            mul,
            inv,
        })
    }

    pub fn cyclic(n: usize) -> FiniteGroup {
        let mul = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::from_table(&format!("Z{n}"), mul).expect("cyclic tables are groups")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> FiniteGroup {
        let n = a.order * b.order;
        let idx = |x: usize, y: usize| x * b.order + y;
        let mut mul = vec![vec![0usize; n]; n];
        for x1 in 0..a.order {
            for y1 in 0..b.order {
                for x2 in 0..a.order {
                    for y2 in 0..b.order {
                        mul[idx(x1, y1)][idx(x2, y2)] = idx(a.mul[x1][x2], b.mul[y1][y2]);
                    }
                }
            }
        }
        FiniteGroup::from_table(&format!("{}x{}", a.name, b.name), mul)
            .expect("product of groups is a group")
    }

    /// The symmetric group on three points, as permutation composition.
    pub fn symmetric3() -> FiniteGroup {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 2, 0],
            [2, 0, 1],
            [0, 2, 1],
            [2, 1, 0],
            [1, 0, 2],
        ];
        let compose = |p: &[usize; 3], q: &[usize; 3]| -> [usize; 3] {
            // (p.q)(i) = p(q(i))
            [p[q[0]], p[q[1]], p[q[2]]]
        };
        let mut mul = vec![vec![0usize; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                let r = compose(&perms[i], &perms[j]);
                mul[i][j] = perms.iter().position(|p| *p == r).unwrap();
            }
        }
        FiniteGroup::from_table("S3", mul).expect("S3 table is a group")
    }

    /// Every group of order at most 6, up to isomorphism.
    pub fn all_up_to_order_6() -> Vec<FiniteGroup> {
        let z2 = FiniteGroup::cyclic(2);
        let mut v = vec![
            FiniteGroup::cyclic(1),
            FiniteGroup::cyclic(2),
            FiniteGroup::cyclic(3),
            FiniteGroup::cyclic(4),
            FiniteGroup::direct_product(&z2, &z2),
            FiniteGroup::cyclic(5),
            FiniteGroup::cyclic(6),
            FiniteGroup::symmetric3(),
        ];
        v[4].name = "V4".into();
        v
    }

    /// Text format: first line the order, then n rows of n indices.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing order line"))?
            .trim()
            .parse()
            .map_err(|_| Error::parse(0, "bad order"))?;
        let mut mul = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let row: std::result::Result<Vec<usize>, _> =
                line.split_whitespace().map(|t| t.parse()).collect();
            let row = row.map_err(|_| Error::parse(i + 1, "bad table entry"))?;
            mul.push(row);
        }
        if mul.len() != n {
            return Err(Error::parse(0, format!("expected {n} rows, got {}", mul.len())));
        }
        FiniteGroup::from_table(name, mul)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.order);
        for row in &self.mul {
            out.push_str(
                &row.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
        out
    }

    pub fn pow(&self, x: usize, e: i64) -> usize {
        let base = if e < 0 { self.inv[x] } else { x };
        let mut acc = 0usize;
        for _ in 0..e.unsigned_abs() {
            acc = self.mul[acc][base];
        }
        acc
    }

    /// Evaluate a variable word under an environment.
    pub fn eval_var_word(
        &self,
        w: &VarWord,
        env: &BTreeMap<String, usize>,
        consts: &BTreeMap<String, usize>,
    ) -> Result<usize> {
        let mut acc = 0usize;
        for f in &w.0 {
            let base = match &f.base {
                FactorBase::Var(v) => *env
                    .get(v)
                    .ok_or_else(|| Error::invalid(format!("unassigned variable {v}")))?,
                FactorBase::Const(c) => *consts
                    .get(c)
                    .ok_or_else(|| Error::invalid(format!("unassigned constant ${c}")))?,
                FactorBase::Commutator(u, v) => {
                    let a = self.eval_var_word(u, env, consts)?;
                    let b = self.eval_var_word(v, env, consts)?;
                    self.mul[self.mul[a][b]][self.mul[self.inv[a]][self.inv[b]]]
                }
            };
            acc = self.mul[acc][self.pow(base, f.exponent)];
        }
        Ok(acc)
    }

    /// Evaluate a letter word under per-generator images.
    pub fn eval_word(&self, w: &Word, images: &[usize]) -> usize {
        let mut acc = 0usize;
        for l in w.letters() {
            let x = images[l.gen()];
            let x = if l.is_inverse() { self.inv[x] } else { x };
            acc = self.mul[acc][x];
        }
        acc
    }
}

/// Exhaustive prenex evaluation. Refuses when the assignment space
/// exceeds the budget (`order^vars <= 10^7`).
pub fn holds_in_finite(
    s: &Sentence,
    f: &FiniteGroup,
    consts: &BTreeMap<String, usize>,
) -> Result<bool> {
    let var_count: usize = s.blocks.iter().map(|b| b.vars.len()).sum();
    let space = (f.order as f64).powi(var_count as i32);
    if space > 1e7 {
        return Err(Error::BudgetExceeded(format!(
            "{} assignments exceed 1e7",
            space
        )));
    }
    let blocks: Vec<(Quantifier, Vec<String>)> = s
        .blocks
        .iter()
        .map(|b| (b.quantifier, b.vars.clone()))
        .collect();
    // flatten to one variable per level
    let mut levels: Vec<(Quantifier, String)> = Vec::new();
    for (q, vars) in blocks {
        for v in vars {
            levels.push((q, v.clone()));
        }
    }
    fn recurse(
        levels: &[(Quantifier, String)],
        depth: usize,
        env: &mut BTreeMap<String, usize>,
        s: &Sentence,
        f: &FiniteGroup,
        consts: &BTreeMap<String, usize>,
    ) -> Result<bool> {
        if depth == levels.len() {
            for clause in &s.clauses {
                let mut any = false;
                for atom in &clause.0 {
                    let value = f.eval_var_word(&atom.word(), env, consts)?;
                    if (value == 0) != atom.negated {
                        any = true;
                        break;
                    }
                }
                if !any {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let (q, ref var) = levels[depth];
        for x in 0..f.order {
            env.insert(var.clone(), x);
            let sub = recurse(levels, depth + 1, env, s, f, consts)?;
            match q {
                Quantifier::Exists if sub => {
                    env.remove(var);
                    return Ok(true);
                }
                Quantifier::Forall if !sub => {
                    env.remove(var);
                    return Ok(false);
                }
                _ => {}
            }
        }
        env.remove(var);
        Ok(q == Quantifier::Forall)
    }
    let mut env = BTreeMap::new();
    recurse(&levels, 0, &mut env, s, f, consts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::syntax::parse_sentence;

    #[test]
    fn group_constructions() {
        for g in FiniteGroup::all_up_to_order_6() {
            assert!(g.order <= 6);
            // spot-check round trip through the text format
            let back = FiniteGroup::parse(&g.name, &g.to_text()).unwrap();
            assert_eq!(g, back);
        }
        let s3 = FiniteGroup::symmetric3();
        assert_eq!(s3.order, 6);
        // S3 is nonabelian
        let ab = s3.mul[1][3];
        let ba = s3.mul[3][1];
        assert_ne!(ab, ba);
    }

    #[test]
    fn reject_bad_tables() {
        assert!(FiniteGroup::from_table("bad", vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(FiniteGroup::parse("bad", "2\n0 1\n").is_err());
    }

    #[test]
    fn square_root_sentences() {
        let consts = BTreeMap::new();
        let s = parse_sentence("A x E y ( y^2 = x )").unwrap();
        assert!(holds_in_finite(&s, &FiniteGroup::cyclic(3), &consts).unwrap());
        assert!(!holds_in_finite(&s, &FiniteGroup::cyclic(4), &consts).unwrap());
        let t = parse_sentence("A x ( x = 1 )").unwrap();
        assert!(holds_in_finite(&t, &FiniteGroup::cyclic(1), &consts).unwrap());
        assert!(!holds_in_finite(&t, &FiniteGroup::cyclic(2), &consts).unwrap());
    }

    #[test]
    fn commutativity_sentence() {
        let consts = BTreeMap::new();
        let s = parse_sentence("A x A y ( [x,y] = 1 )").unwrap();
        assert!(holds_in_finite(&s, &FiniteGroup::cyclic(6), &consts).unwrap());
        assert!(!holds_in_finite(&s, &FiniteGroup::symmetric3(), &consts).unwrap());
    }
}
