//! Smith normal form over arbitrary-precision integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::IntegerMatrix;

/// Nonzero Smith invariants `d_1 | d_2 | ... | d_r` of `matrix`, all
/// positive. The empty list for the zero matrix.
pub fn smith_normal_form(matrix: &IntegerMatrix) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = (0..matrix.rows()).map(|i| matrix.row(i).to_vec()).collect();
    smith_in_place(&mut a, matrix.cols())
}

pub(crate) fn smith_in_place(a: &mut [Vec<BigInt>], cols: usize) -> Vec<BigInt> {
    let rows = a.len();
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_abs_entry(a, t, cols) else {
            break;
        };
        a.swap(t, pi);
        swap_cols(a, t, pj);
        loop {
            let mut dirty = false;
            // Clear column t below the pivot.
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    sub_row_multiple(a, i, t, &q, t);
                    if !a[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            // Clear row t right of the pivot.
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    sub_col_multiple(a, j, t, &q, t);
                    if !a[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                let (pi, pj) = min_abs_in_cross(a, t, cols);
                a.swap(t, pi);
                swap_cols(a, t, pj);
                continue;
            }
            // Pivot must divide the rest of the trailing block.
            let bad = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t]))
            });
            match bad {
                Some(i) => {
                    let (head, tail) = a.split_at_mut(i);
                    for j in t..cols {
                        let v = tail[0][j].clone();
                        head[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

fn min_abs_entry(a: &[Vec<BigInt>], t: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().take(cols).skip(t) {
            if v.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| v.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
                if v.abs().is_one() {
                    return best;
                }
            }
        }
    }
    best
}

// Smallest nonzero entry in row t or column t (from t onward).
fn min_abs_in_cross(a: &[Vec<BigInt>], t: usize, cols: usize) -> (usize, usize) {
    let mut best = (t, t);
    let mut best_abs = a[t][t].abs();
    for (i, row) in a.iter().enumerate().skip(t + 1) {
        if !row[t].is_zero() && row[t].abs() < best_abs {
            best_abs = row[t].abs();
            best = (i, t);
        }
    }
    for j in t + 1..cols {
        if !a[t][j].is_zero() && a[t][j].abs() < best_abs {
            best_abs = a[t][j].abs();
            best = (t, j);
        }
    }
    best
}

fn swap_cols(a: &mut [Vec<BigInt>], x: usize, y: usize) {
    if x != y {
        for row in a.iter_mut() {
            row.swap(x, y);
        }
    }
}

// row_i -= q * row_t, over columns from `start`.
fn sub_row_multiple(a: &mut [Vec<BigInt>], i: usize, t: usize, q: &BigInt, start: usize) {
    let (lo, hi) = a.split_at_mut(i);
    let src = &lo[t];
    for (dst, s) in hi[0].iter_mut().zip(src).skip(start) {
        if !s.is_zero() {
            *dst -= q * s;
        }
    }
}

// col_j -= q * col_t, over rows from `start`.
fn sub_col_multiple(a: &mut [Vec<BigInt>], j: usize, t: usize, q: &BigInt, start: usize) {
    for row in a.iter_mut().skip(start) {
        if !row[t].is_zero() {
            let d = q * &row[t];
            row[j] -= d;
        }
    }
}

/// A basis (in echelon form) of the row lattice of `rows`, obtained with
/// unimodular row operations only. At most `cols` rows.
pub fn lattice_basis<I>(rows: I, cols: usize) -> Vec<Vec<BigInt>>
where
    I: IntoIterator<Item = Vec<BigInt>>,
{
    let mut pivots: Vec<Option<Vec<BigInt>>> = vec![None; cols];
    for mut v in rows {
        let mut c = 0;
        loop {
            while c < cols && v[c].is_zero() {
                c += 1;
            }
            if c == cols {
                break;
            }
            match &mut pivots[c] {
                slot @ None => {
                    if v[c].is_negative() {
                        v.iter_mut().for_each(|x| *x = -&*x);
                    }
                    *slot = Some(v);
                    break;
                }
                Some(p) => {
                    // [x y; -b/g a/g] is unimodular and zeroes column c of v.
                    let a = p[c].clone();
                    let b = v[c].clone();
                    let eg = a.extended_gcd(&b);
                    let (g, x, y) = (eg.gcd, eg.x, eg.y);
                    let ag = &a / &g;
                    let bg = &b / &g;
                    let new_p: Vec<BigInt> =
                        p.iter().zip(&v).map(|(pi, vi)| &x * pi + &y * vi).collect();
                    let new_v: Vec<BigInt> =
                        p.iter().zip(&v).map(|(pi, vi)| &ag * vi - &bg * pi).collect();
                    *p = new_p;
                    if p[c].is_negative() {
                        p.iter_mut().for_each(|x| *x = -&*x);
                    }
                    v = new_v;
                }
            }
        }
    }
    pivots.into_iter().flatten().collect()
}
