//! Column-rank tests for the exponent-sum matrix.
//!
//! Three kinds of evidence, each exact in the direction it claims:
//!
//! * structural: a maximum row/column matching of the nonzero pattern bounds
//!   the rank from above, so a deficient matching proves `rank < m`;
//! * modular: rank over `F_q` never exceeds rank over `Q`, so full rank modulo
//!   `q = 2^61 - 1` proves `rank = m` (dense elimination for small `m`, a
//!   Wiedemann determinant certificate for large sparse systems);
//! * fraction-free elimination over the integers, which decides either way.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A relator row as `(column, exponent sum)` pairs with nonzero values.
pub type SparseRow = Vec<(u32, i64)>;

pub const MODULUS: u64 = (1 << 61) - 1;

#[inline]
fn reduce(x: u128) -> u64 {
    let lo = (x as u64) & MODULUS;
    let hi = (x >> 61) as u64;
    let mut r = lo + hi;
    if r >= MODULUS {
        r -= MODULUS;
    }
    r
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64) -> u64 {
    let r = reduce(u128::from(a) * u128::from(b));
    if r >= MODULUS {
        r - MODULUS
    } else {
        r
    }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MODULUS {
        s - MODULUS
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + MODULUS - b
    }
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    debug_assert!(a != 0);
    pow_mod(a, MODULUS - 2)
}

#[inline]
fn lift(v: i64) -> u64 {
    if v >= 0 {
        v as u64 % MODULUS
    } else {
        MODULUS - ((-v) as u64 % MODULUS)
    }
}

/// Maximum matching between columns and rows over the nonzero pattern.
/// Returns, for each column, the matched row index.
pub fn structural_matching(rows: &[SparseRow], cols: usize) -> Vec<Option<usize>> {
    let mut col_match: Vec<Option<usize>> = vec![None; cols];
    let mut row_match: Vec<Option<u32>> = vec![None; rows.len()];
    for (r, row) in rows.iter().enumerate() {
        if let Some(&(c, _)) = row.iter().find(|(c, _)| col_match[*c as usize].is_none()) {
            col_match[c as usize] = Some(r);
            row_match[r] = Some(c);
        }
    }
    if col_match.iter().all(Option::is_some) {
        return col_match;
    }
    let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); cols];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            incidence[c as usize].push(r as u32);
        }
    }
    // Breadth-first augmenting paths from each free column.
    for start in 0..cols {
        if col_match[start].is_some() {
            continue;
        }
        let mut parent_row: Vec<Option<u32>> = vec![None; rows.len()];
        let mut seen_col = vec![false; cols];
        seen_col[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut found: Option<usize> = None;
        'bfs: while let Some(c) = queue.pop_front() {
            for &r in &incidence[c] {
                let r = r as usize;
                if parent_row[r].is_some() {
                    continue;
                }
                parent_row[r] = Some(c as u32);
                match row_match[r] {
                    None => {
                        found = Some(r);
                        break 'bfs;
                    }
                    Some(c2) if !seen_col[c2 as usize] => {
                        seen_col[c2 as usize] = true;
                        queue.push_back(c2 as usize);
                    }
                    Some(_) => {}
                }
            }
        }
        let Some(mut r) = found else { continue };
        loop {
            let c = parent_row[r].expect("on path") as usize;
            let prev = col_match[c];
            col_match[c] = Some(r);
            row_match[r] = Some(c as u32);
            match prev {
                Some(pr) if c != start => r = pr,
                _ => break,
            }
        }
    }
    col_match
}

/// Rank modulo `2^61 - 1` by streaming rows into a dense reduced echelon
/// basis; stops early at full rank.
pub fn modular_rank_dense(rows: &[SparseRow], cols: usize) -> usize {
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut v = vec![0u64; cols];
    for row in rows {
        if basis.len() == cols {
            break;
        }
        v.iter_mut().for_each(|x| *x = 0);
        for &(c, val) in row {
            v[c as usize] = lift(val);
        }
        // Basis rows are zero on every other pivot column, so only the
        // original support needs clearing.
        for &(c, _) in row {
            if let Some(b) = pivot_of_col[c as usize] {
                let f = v[c as usize];
                if f != 0 {
                    for (x, &y) in v.iter_mut().zip(&basis[b]) {
                        if y != 0 {
                            *x = sub_mod(*x, mul_mod(f, y));
                        }
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|&x| x != 0) else {
            continue;
        };
        let inv = inv_mod(v[p]);
        v.iter_mut().for_each(|x| *x = mul_mod(*x, inv));
        for b in basis.iter_mut() {
            let f = b[p];
            if f != 0 {
                for (x, &y) in b.iter_mut().zip(&v) {
                    if y != 0 {
                        *x = sub_mod(*x, mul_mod(f, y));
                    }
                }
            }
        }
        pivot_of_col[p] = Some(basis.len());
        basis.push(v.clone());
    }
    basis.len()
}

/// Minimal polynomial (low degree first, monic leading term) of the linear
/// recurrence generating `seq`, by Berlekamp-Massey.
pub fn berlekamp_massey(seq: &[u64]) -> Vec<u64> {
    let mut c = vec![1u64];
    let mut b = vec![1u64];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_disc = 1u64;
    for n in 0..seq.len() {
        let mut d = seq[n];
        for i in 1..=l {
            d = add_mod(d, mul_mod(c[i], seq[n - i]));
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = mul_mod(d, inv_mod(last_disc));
        let t = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = sub_mod(c[i + shift], mul_mod(coef, bi));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = t;
            last_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(l + 1, 0);
    // c is the connection polynomial 1 + c_1 x + ... + c_l x^l; the minimal
    // polynomial is its reversal x^l + c_1 x^{l-1} + ... + c_l.
    c.reverse();
    c
}

/// Tries to prove that the square sparse matrix `square` (rows over `n`
/// columns) is nonsingular modulo `2^61 - 1`.
///
/// With a random diagonal preconditioner `D` and random projections, the
/// Berlekamp-Massey polynomial of `u^T (A D)^i v` divides the minimal
/// polynomial of `A D`. When it has full degree `n` it equals the
/// characteristic polynomial, and a nonzero constant term then proves
/// `det(A D) != 0`. A `false` result is inconclusive.
pub fn wiedemann_nonsingular(square: &[SparseRow], n: usize, seed: u64) -> bool {
    if square.len() != n {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| rng.random_range(1..MODULUS);
    let diag: Vec<u64> = (0..n).map(|_| draw(&mut rng)).collect();
    let u: Vec<u64> = (0..n).map(|_| draw(&mut rng)).collect();
    let mut x: Vec<u64> = (0..n).map(|_| draw(&mut rng)).collect();
    let rows: Vec<Vec<(u32, u64)>> = square
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(c, v)| (c, mul_mod(lift(v), diag[c as usize])))
                .collect()
        })
        .collect();
    let mut seq = Vec::with_capacity(2 * n);
    let mut next = vec![0u64; n];
    for _ in 0..2 * n {
        let s = u
            .iter()
            .zip(&x)
            .fold(0u64, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b)));
        seq.push(s);
        for (out, row) in next.iter_mut().zip(&rows) {
            *out = row
                .iter()
                .fold(0u64, |acc, &(c, v)| add_mod(acc, mul_mod(v, x[c as usize])));
        }
        std::mem::swap(&mut x, &mut next);
    }
    let poly = berlekamp_massey(&seq);
    poly.len() == n + 1 && poly[0] != 0
}

/// Exact rank over the rationals by fraction-free elimination. Rows are kept
/// primitive (content divided out) to limit coefficient growth; stops early
/// at full rank.
pub fn exact_rank(rows: &[SparseRow], cols: usize) -> usize {
    let mut pivots: Vec<Option<Vec<BigInt>>> = vec![None; cols];
    let mut rank = 0;
    for row in rows {
        if rank == cols {
            break;
        }
        let mut v: Vec<BigInt> = vec![BigInt::zero(); cols];
        for &(c, val) in row {
            v[c as usize] = BigInt::from(val);
        }
        let mut c = 0;
        loop {
            while c < cols && v[c].is_zero() {
                c += 1;
            }
            if c == cols {
                break;
            }
            match &pivots[c] {
                None => {
                    make_primitive(&mut v);
                    pivots[c] = Some(v);
                    rank += 1;
                    break;
                }
                Some(p) => {
                    let a = &p[c];
                    let b = v[c].clone();
                    let g = a.gcd(&b);
                    let (af, bf) = (a / &g, &b / &g);
                    for (x, y) in v.iter_mut().zip(p) {
                        *x = &af * &*x - &bf * y;
                    }
                    make_primitive(&mut v);
                }
            }
        }
    }
    rank
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && g != BigInt::from(1) {
        v.iter_mut().for_each(|x| *x = &*x / &g);
    }
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            v.iter_mut().for_each(|x| *x = -&*x);
        }
    }
}
