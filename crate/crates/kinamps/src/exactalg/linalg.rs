//! Dense exact linear algebra over the rationals. The matrices here are small
//! (catalog-sized), so simple Gaussian elimination is plenty.

use num::{One, Zero};

use super::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Rational::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = (a.len(), a.first().map_or(0, |r| r.len()));
    let cb = b.first().map_or(0, |r| r.len());
    assert_eq!(ca, b.len(), "dimension mismatch");
    let mut out = zeros(ra, cb);
    for i in 0..ra {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..cb {
                if !b[k][j].is_zero() {
                    out[i][j] += aik * &b[k][j];
                }
            }
        }
    }
    out
}

pub fn mat_sub(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect()
}

/// Row-reduce in place scanning columns in the given order. Returns the
/// (column, row) pivot pairs.
pub fn rref_in_order(m: &mut Matrix, col_order: &[usize]) -> Vec<(usize, usize)> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut next_row = 0usize;
    for &col in col_order {
        if next_row >= rows {
            break;
        }
        let mut sel = None;
        for (r, row) in m.iter().enumerate().skip(next_row) {
            if !row[col].is_zero() {
                sel = Some(r);
                break;
            }
        }
        let Some(sel) = sel else { continue };
        m.swap(next_row, sel);
        let inv = Rational::one() / m[next_row][col].clone();
        for x in m[next_row].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for r in 0..rows {
            if r == next_row || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            let pivot_row = m[next_row].clone();
            for (x, p) in m[r].iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push((col, next_row));
        next_row += 1;
    }
    pivots
}

pub fn rref(m: &mut Matrix) -> Vec<(usize, usize)> {
    let cols = m.first().map_or(0, |r| r.len());
    let order: Vec<usize> = (0..cols).collect();
    rref_in_order(m, &order)
}

pub fn rank(m: &Matrix) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

/// Solve `A X = B` for `X` when `A` has full column rank and the system is
/// consistent; `None` otherwise.
pub fn solve_exact(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    let rows = a.len();
    let cols_a = a.first().map_or(0, |r| r.len());
    let cols_b = b.first().map_or(0, |r| r.len());
    assert_eq!(rows, b.len(), "row mismatch");
    let mut aug: Matrix = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend_from_slice(&b[i]);
            row
        })
        .collect();
    let order: Vec<usize> = (0..cols_a).collect();
    let pivots = rref_in_order(&mut aug, &order);
    if pivots.len() < cols_a {
        return None; // rank-deficient
    }
    // consistency: rows past the pivots must be entirely zero
    for row in aug.iter().skip(pivots.len()) {
        if row.iter().any(|x| !x.is_zero()) {
            return None;
        }
    }
    let mut x = zeros(cols_a, cols_b);
    for &(col, row) in pivots.iter() {
        for j in 0..cols_b {
            x[col][j] = aug[row][cols_a + j].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat_int;

    #[test]
    fn rank_and_solve() {
        let a = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(3), rat_int(4)],
            vec![rat_int(4), rat_int(6)],
        ];
        assert_eq!(rank(&a), 2);
        let b = vec![vec![rat_int(5)], vec![rat_int(11)], vec![rat_int(16)]];
        let x = solve_exact(&a, &b).unwrap();
        assert_eq!(x, vec![vec![rat_int(1)], vec![rat_int(2)]]);
    }

    #[test]
    fn inconsistent_system() {
        let a = vec![vec![rat_int(1)], vec![rat_int(1)]];
        let b = vec![vec![rat_int(1)], vec![rat_int(2)]];
        assert!(solve_exact(&a, &b).is_none());
    }
}
