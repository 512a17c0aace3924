//! Exact sparse matrices and fraction-free elimination.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::field::Rational;

/// Row-major sparse matrix with exact rational entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    ncols: usize,
    /// Each row sorted by column, no explicit zeros.
    rows: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseMatrix { ncols, rows: Vec::new() }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = SparseMatrix::new(ncols);
        for r in rows {
            m.push_row(r.iter().cloned().enumerate().collect());
        }
        m
    }

    /// Appends a row; duplicate columns are summed.
    pub fn push_row(&mut self, entries: Vec<(usize, Rational)>) {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (c, v) in entries {
            assert!(c < self.ncols, "column {c} out of range");
            *acc.entry(c).or_insert_with(Rational::zero) += v;
        }
        self.rows.push(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect());
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[(usize, Rational)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        match self.rows[r].binary_search_by_key(&c, |e| e.0) {
            Ok(k) => self.rows[r][k].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = alloc::vec![Rational::zero(); self.ncols];
                for (c, v) in row {
                    d[*c] = v.clone();
                }
                d
            })
            .collect()
    }

    /// Submatrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut remap = alloc::vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            remap[c] = k;
        }
        let mut out = SparseMatrix::new(cols.len());
        for &r in rows {
            let mut row: Vec<(usize, Rational)> = self.rows[r]
                .iter()
                .filter(|(c, _)| remap[*c] != usize::MAX)
                .map(|(c, v)| (remap[*c], v.clone()))
                .collect();
            row.sort_by_key(|e| e.0);
            out.rows.push(row);
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut elim = Eliminator::new();
        for row in &self.rows {
            elim.insert(integer_row(row));
        }
        elim.rank()
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }
}

/// Scales a rational row to a primitive integer row.
fn integer_row(row: &[(usize, Rational)]) -> Vec<(usize, BigInt)> {
    let mut l = BigInt::one();
    for (_, v) in row {
        l = l.lcm(v.denom());
    }
    let out: Vec<(usize, BigInt)> =
        row.iter().map(|(c, v)| (*c, v.numer() * (&l / v.denom()))).collect();
    primitive(out)
}

fn primitive(mut row: Vec<(usize, BigInt)>) -> Vec<(usize, BigInt)> {
    let mut g = BigInt::zero();
    for (_, v) in &row {
        g = g.gcd(v);
        if g.is_one() {
            return row;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
    row
}

/// Incremental fraction-free row echelon form over the integers.
struct Eliminator {
    pivots: BTreeMap<usize, Vec<(usize, BigInt)>>,
}

impl Eliminator {
    fn new() -> Self {
        Eliminator { pivots: BTreeMap::new() }
    }

    fn insert(&mut self, mut row: Vec<(usize, BigInt)>) {
        while let Some((lead, lv)) = row.first().cloned() {
            let Some(p) = self.pivots.get(&lead) else {
                self.pivots.insert(lead, row);
                return;
            };
            // row <- a * row - b * pivot, with a/b the reduced ratio of leading entries.
            let pv = &p[0].1;
            let g = pv.gcd(&lv);
            let a = pv / &g;
            let b = &lv / &g;
            row = primitive(combine(&row, &a, p, &b));
        }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn combine(x: &[(usize, BigInt)], a: &BigInt, y: &[(usize, BigInt)], b: &BigInt) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let cx = x.get(i).map_or(usize::MAX, |e| e.0);
        let cy = y.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if cx < cy {
            i += 1;
            (cx, a * &x[i - 1].1)
        } else if cy < cx {
            j += 1;
            (cy, -(b * &y[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (cx, a * &x[i - 1].1 - b * &y[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    out
}

/// Exact determinant by rational Gaussian elimination.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Rational::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let piv = a[k][k].clone();
        det *= &piv;
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = &a[r][k] / &piv;
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][k..n].iter_mut().zip(&top[k][k..n]) {
                *x -= &f * y;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, ratio};

    #[test]
    fn trivial_ranks() {
        let z = SparseMatrix::from_dense(&[alloc::vec![int(0); 5], alloc::vec![int(0); 5]]);
        assert_eq!(z.nullity(), 5);
        let id: Vec<Vec<Rational>> =
            (0..4).map(|i| (0..4).map(|j| int((i == j) as i64)).collect()).collect();
        assert_eq!(SparseMatrix::from_dense(&id).nullity(), 0);
    }

    #[test]
    fn dependent_rows() {
        let m = SparseMatrix::from_dense(&[
            alloc::vec![ratio(1, 2), int(1), int(0)],
            alloc::vec![int(1), int(2), int(0)],
            alloc::vec![int(0), ratio(1, 3), int(1)],
        ]);
        assert_eq!(m.rank(), 2);
        assert!(determinant(&m.to_dense()).is_zero());
    }

    #[test]
    fn vandermonde_block_nullity() {
        // Four rows of (x - a)^3 coefficients over five distinct abscissae.
        let a = [0, 1, 2, 3, 4];
        let rows: Vec<Vec<Rational>> = (0..4)
            .map(|r| {
                a.iter()
                    .map(|&x| {
                        let x = int(x);
                        match r {
                            0 => int(1),
                            1 => int(-3) * &x,
                            2 => int(3) * &x * &x,
                            _ => -(&x * &x * &x),
                        }
                    })
                    .collect()
            })
            .collect();
        assert_eq!(SparseMatrix::from_dense(&rows).nullity(), 1);
        let four: Vec<Vec<Rational>> = rows.iter().map(|r| r[..4].to_vec()).collect();
        assert_eq!(SparseMatrix::from_dense(&four).nullity(), 0);
        assert!(!determinant(&four).is_zero());
    }

    #[test]
    fn select_submatrix() {
        let m = SparseMatrix::from_dense(&[
            alloc::vec![int(1), int(2), int(3)],
            alloc::vec![int(4), int(5), int(6)],
        ]);
        let s = m.select(&[1], &[2, 0]);
        assert_eq!(s.to_dense(), alloc::vec![alloc::vec![int(6), int(4)]]);
    }
}
