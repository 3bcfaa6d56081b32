//! Smith normal form over arbitrary-precision integers, tracking the
//! unimodular row and column transforms so lattice-membership queries can
//! be answered exactly.

use num::bigint::BigInt;
use num::{Signed, Zero};

pub type Mat = Vec<Vec<BigInt>>;

fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn swap_rows(m: &mut Mat, i: usize, j: usize) {
    m.swap(i, j);
}

fn swap_cols(m: &mut Mat, i: usize, j: usize) {
    for row in m.iter_mut() {
        row.swap(i, j);
    }
}

fn add_row(m: &mut Mat, dst: usize, src: usize, c: &BigInt) {
    for j in 0..m[dst].len() {
        let delta = c * &m[src][j];
        m[dst][j] += delta;
    }
}

fn add_col(m: &mut Mat, dst: usize, src: usize, c: &BigInt) {
    for row in m.iter_mut() {
        let delta = c * &row[src];
        row[dst] += delta;
    }
}

fn negate_row(m: &mut Mat, i: usize) {
    for x in m[i].iter_mut() {
        *x = -(x.clone());
    }
}

/// `u * a * v = d` with `u`, `v` unimodular and `d` diagonal with
/// successive divisibility.
#[derive(Debug, Clone)]
pub struct SmithDecomposition {
    pub d: Mat,
    pub u: Mat,
    pub v: Mat,
    pub rank: usize,
}

impl SmithDecomposition {
    /// Nonzero diagonal entries `d_1 | d_2 | ...`, positive.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[i][i].clone()).collect()
    }
}

pub fn smith_normal_form(a: &Mat) -> SmithDecomposition {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let mut k = 0usize;
    while k < rows.min(cols) {
        // pivot: the smallest nonzero entry of the trailing submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !d[i][j].is_zero()
                    && pivot.map_or(true, |(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, k, pi);
        swap_rows(&mut u, k, pi);
        swap_cols(&mut d, k, pj);
        swap_cols(&mut v, k, pj);

        // clear row and column k; restart whenever a remainder survives
        loop {
            let mut dirty = false;
            for i in k + 1..rows {
                if !d[i][k].is_zero() {
                    let qn = -(&d[i][k] / &d[k][k]);
                    add_row(&mut d, i, k, &qn);
                    add_row(&mut u, i, k, &qn);
                    if !d[i][k].is_zero() {
                        // remainder became the new smaller pivot
                        swap_rows(&mut d, k, i);
                        swap_rows(&mut u, k, i);
                        dirty = true;
                    }
                }
            }
            for j in k + 1..cols {
                if !d[k][j].is_zero() {
                    let qn = -(&d[k][j] / &d[k][k]);
                    add_col(&mut d, j, k, &qn);
                    add_col(&mut v, j, k, &qn);
                    if !d[k][j].is_zero() {
                        swap_cols(&mut d, k, j);
                        swap_cols(&mut v, k, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }

        // divisibility: fold any non-divisible trailing entry into column k
        let mut fixed = false;
        'scan: for i in k + 1..rows {
            for j in k + 1..cols {
                if !(&d[i][j] % &d[k][k]).is_zero() {
                    let one = BigInt::from(1);
                    add_row(&mut d, k, i, &one);
                    add_row(&mut u, k, i, &one);
                    fixed = true;
                    break 'scan;
                }
            }
        }
        if fixed {
            continue; // redo the elimination at position k
        }
        if d[k][k].is_negative() {
            negate_row(&mut d, k);
            negate_row(&mut u, k);
        }
        k += 1;
    }
    SmithDecomposition {
        rank: k,
        d,
        u,
        v,
    }
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let inner = if n == 0 { 0 } else { a[0].len() };
    let m = if b.is_empty() { 0 } else { b[0].len() };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| &a[i][k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Row vector times matrix.
pub fn vec_mat(vec: &[BigInt], m: &Mat) -> Vec<BigInt> {
    let cols = if m.is_empty() { vec.len() } else { m[0].len() };
    (0..cols)
        .map(|j| (0..vec.len()).map(|i| &vec[i] * &m[i][j]).sum())
        .collect()
}

/// Does `vec` lie in the integer row lattice of the decomposed matrix?
pub fn in_row_lattice(snf: &SmithDecomposition, vec: &[BigInt]) -> bool {
    if snf.v.is_empty() {
        return vec.iter().all(|x| x.is_zero());
    }
    let z = vec_mat(vec, &snf.v);
    for (i, zi) in z.iter().enumerate() {
        if i < snf.rank {
            if !(zi % &snf.d[i][i]).is_zero() {
                return false;
            }
        } else if !zi.is_zero() {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Mat {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn snf_diagonalizes() {
        let a = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let s = smith_normal_form(&a);
        assert_eq!(
            s.invariant_factors(),
            vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]
        );
        assert_eq!(mat_mul(&mat_mul(&s.u, &a), &s.v), s.d);
        for i in 0..s.rank.saturating_sub(1) {
            assert!((&s.d[i + 1][i + 1] % &s.d[i][i]).is_zero());
        }
    }

    #[test]
    fn snf_single_row() {
        let a = mat(&[&[10, 10]]);
        let s = smith_normal_form(&a);
        assert_eq!(s.invariant_factors(), vec![BigInt::from(10)]);
        assert_eq!(mat_mul(&mat_mul(&s.u, &a), &s.v), s.d);
    }

    #[test]
    fn lattice_membership() {
        let a = mat(&[&[2, 0], &[0, 3]]);
        let s = smith_normal_form(&a);
        let yes = |v: &[i64]| {
            in_row_lattice(
                &s,
                &v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>(),
            )
        };
        assert!(yes(&[2, 3]));
        assert!(yes(&[4, 0]));
        assert!(!yes(&[1, 0]));
        assert!(!yes(&[0, 1]));
        assert!(yes(&[0, 0]));
    }

    #[test]
    fn empty_matrix() {
        let s = smith_normal_form(&vec![]);
        assert_eq!(s.rank, 0);
        assert!(in_row_lattice(&s, &[]));
    }
}
