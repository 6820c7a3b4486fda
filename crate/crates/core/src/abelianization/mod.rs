//! Exponent-sum matrices and the abelianization `Z^m / row lattice`.

mod rank;
mod snf;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::presentation::Presentation;
use crate::words::Word;

pub use rank::{
    berlekamp_massey, exact_rank, modular_rank_dense, structural_matching, wiedemann_nonsingular,
    SparseRow,
};
pub use snf::{lattice_basis, smith_normal_form};

/// Dense integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    cols: usize,
    data: Vec<Vec<BigInt>>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            cols,
            data: vec![vec![BigInt::zero(); cols]; rows],
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>, cols: usize) -> Self {
        let data = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "row length");
                r.into_iter().map(BigInt::from).collect()
            })
            .collect();
        IntegerMatrix { cols, data }
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length");
        IntegerMatrix { cols, data: rows }
    }

    pub fn rows(&self) -> usize {
        self.data.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }
}

/// Exponent sums of `word` as sparse `(column, value)` pairs, column
/// `g - 1` for generator `g`.
pub fn exponent_row(word: &Word) -> SparseRow {
    let mut row: SparseRow = Vec::with_capacity(word.len());
    for l in word.letters() {
        let c = l.generator() - 1;
        match row.iter_mut().find(|(col, _)| *col == c) {
            Some(e) => e.1 += i64::from(l.sign()),
            None => row.push((c, i64::from(l.sign()))),
        }
    }
    row.retain(|&(_, v)| v != 0);
    row.sort_unstable_by_key(|&(c, _)| c);
    row
}

pub fn exponent_rows(pres: &Presentation) -> Vec<SparseRow> {
    pres.relators().iter().map(exponent_row).collect()
}

/// The `|R| x m` exponent-sum matrix.
pub fn exponent_matrix(pres: &Presentation) -> IntegerMatrix {
    let m = pres.m as usize;
    let mut out = IntegerMatrix::zeros(pres.num_relators(), m);
    for (i, row) in exponent_rows(pres).into_iter().enumerate() {
        for (c, v) in row {
            out.data[i][c as usize] = BigInt::from(v);
        }
    }
    out
}

/// `Z^betti + Z/t_1 + ... + Z/t_k` with `t_1 | ... | t_k`, each `t_i > 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub betti: usize,
    /// Written as decimal strings, since the values are unbounded.
    #[serde(with = "decimal_list")]
    pub torsion: Vec<BigInt>,
}

mod decimal_list {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(ToString::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|x| x.parse().map_err(D::Error::custom))
            .collect()
    }
}

impl std::fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.betti > 0 {
            parts.push(if self.betti == 1 {
                "Z".into()
            } else {
                format!("Z^{}", self.betti)
            });
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

pub fn invariants_of_matrix(matrix: &IntegerMatrix) -> AbelianInvariants {
    let rows = (0..matrix.rows()).map(|i| matrix.row(i).to_vec());
    let mut basis = lattice_basis(rows, matrix.cols());
    let diag = snf::smith_in_place(&mut basis, matrix.cols());
    AbelianInvariants {
        betti: matrix.cols() - diag.len(),
        torsion: diag.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Abelian invariants of the presented group. Exact; the row lattice is
/// first reduced to at most `m` basis rows so the Smith form works on an
/// `m x m` block.
pub fn abelian_invariants(pres: &Presentation) -> AbelianInvariants {
    let m = pres.m as usize;
    let rows = exponent_rows(pres).into_iter().map(|row| {
        let mut v = vec![BigInt::zero(); m];
        for (c, x) in row {
            v[c as usize] = BigInt::from(x);
        }
        v
    });
    let mut basis = lattice_basis(rows, m);
    let diag = snf::smith_in_place(&mut basis, m);
    AbelianInvariants {
        betti: m - diag.len(),
        torsion: diag.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Which test settled [`surjects_onto_z`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankRoute {
    FewRows,
    ZeroColumn,
    StructuralMatching,
    DenseModular,
    Wiedemann,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectionDecision {
    pub surjects: bool,
    pub route: RankRoute,
}

/// Largest `m` handled by dense modular elimination before trying the
/// sparse determinant certificate.
pub const DENSE_LIMIT: usize = 512;

const WIEDEMANN_ATTEMPTS: u64 = 3;

/// Decides whether the group maps onto `Z`, i.e. whether the exponent-sum
/// matrix has rank below `m`. Exact.
pub fn surjects_onto_z(pres: &Presentation) -> bool {
    decide_surjection(pres).surjects
}

pub fn decide_surjection(pres: &Presentation) -> SurjectionDecision {
    let m = pres.m as usize;
    let rows: Vec<SparseRow> = exponent_rows(pres)
        .into_iter()
        .filter(|r| !r.is_empty())
        .collect();
    decide_rows(&rows, m)
}

pub(crate) fn decide_rows(rows: &[SparseRow], m: usize) -> SurjectionDecision {
    let decided = |surjects, route| SurjectionDecision { surjects, route };
    if rows.len() < m {
        return decided(true, RankRoute::FewRows);
    }
    let mut seen = vec![false; m];
    for row in rows {
        for &(c, _) in row {
            seen[c as usize] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return decided(true, RankRoute::ZeroColumn);
    }
    let matching = structural_matching(rows, m);
    if matching.iter().any(Option::is_none) {
        return decided(true, RankRoute::StructuralMatching);
    }
    if m <= DENSE_LIMIT {
        if modular_rank_dense(rows, m) == m {
            return decided(false, RankRoute::DenseModular);
        }
    } else {
        // Each attempt certifies a different square subsystem: the matching
        // is recomputed on a shuffled row order.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut matching = matching;
        for attempt in 0..WIEDEMANN_ATTEMPTS {
            if attempt > 0 {
                order.shuffle(&mut rng);
                let shuffled: Vec<SparseRow> = order.iter().map(|&i| rows[i].clone()).collect();
                matching = structural_matching(&shuffled, m)
                    .into_iter()
                    .map(|r| r.map(|i| order[i]))
                    .collect();
            }
            let square: Vec<SparseRow> = matching
                .iter()
                .map(|r| rows[r.expect("perfect matching")].clone())
                .collect();
            if wiedemann_nonsingular(&square, m, 0x5eed_0000 + attempt) {
                return decided(false, RankRoute::Wiedemann);
            }
        }
        if modular_rank_dense(rows, m) == m {
            return decided(false, RankRoute::DenseModular);
        }
    }
    decided(exact_rank(rows, m) < m, RankRoute::Exact)
}
