//! The relator-support hypergraph `H` on the generators, its `len`-uniform
//! part `H_len`, and counters for the structural properties that make the
//! elimination argument for freeness go through.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::words::Word;

/// Generators occurring in a relator. Bitsets for `m <= 64`, sorted indices
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Support {
    Bits(u64),
    Sorted(SmallVec<[u32; 8]>),
}

impl Support {
    pub fn of(word: &Word, m: u32) -> Support {
        if m <= 64 {
            Support::Bits(
                word.letters()
                    .iter()
                    .fold(0u64, |acc, l| acc | 1 << (l.generator() - 1)),
            )
        } else {
            Support::Sorted(word.support())
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Support::Bits(b) => b.count_ones() as usize,
            Support::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Generator indices in increasing order.
    pub fn generators(&self) -> SmallVec<[u32; 8]> {
        match self {
            Support::Bits(b) => {
                let mut out = SmallVec::new();
                let mut bits = *b;
                while bits != 0 {
                    out.push(bits.trailing_zeros() + 1);
                    bits &= bits - 1;
                }
                out
            }
            Support::Sorted(v) => v.clone(),
        }
    }
}

/// Relator type by the number of distinct generators it uses: 1 when at most
/// `len - 2`, 2 when `len - 1`, 3 when all `len` letters use distinct
/// generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelatorType {
    One = 1,
    Two = 2,
    Three = 3,
}

fn type_from_support_size(size: usize, len: usize) -> RelatorType {
    if size + 2 <= len {
        RelatorType::One
    } else if size + 1 == len {
        RelatorType::Two
    } else {
        RelatorType::Three
    }
}

pub fn classify_type(r: &Word, len: u32) -> Result<RelatorType> {
    if r.len() != len as usize {
        return Err(Error::LengthMismatch {
            expected: len as usize,
            found: r.len(),
        });
    }
    Ok(type_from_support_size(r.support().len(), len as usize))
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub relator: usize,
    pub support: Support,
    pub kind: RelatorType,
}

#[derive(Debug, Clone)]
pub struct SupportHypergraph {
    pub m: u32,
    pub len: u32,
    pub edges: Vec<Edge>,
    /// Indices into `edges` of the type-3 edges, which form `H_len`.
    pub uniform: Vec<usize>,
}

impl SupportHypergraph {
    pub fn build(pres: &Presentation) -> Self {
        let len = pres.len as usize;
        let edges: Vec<Edge> = pres
            .relators()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let support = Support::of(r, pres.m);
                let kind = type_from_support_size(support.len(), len);
                Edge {
                    relator: i,
                    support,
                    kind,
                }
            })
            .collect();
        let uniform = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == RelatorType::Three)
            .map(|(i, _)| i)
            .collect();
        SupportHypergraph {
            m: pres.m,
            len: pres.len,
            edges,
            uniform,
        }
    }

    fn uniform_union_find(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.m as usize);
        for &e in &self.uniform {
            let gens = self.edges[e].support.generators();
            for pair in gens.windows(2) {
                uf.union(pair[0] as usize - 1, pair[1] as usize - 1);
            }
        }
        uf
    }

    /// Connected components of `H_len` as sorted generator lists, ordered by
    /// their smallest generator. Isolated vertices are singleton components.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut uf = self.uniform_union_find();
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<Vec<u32>> = Vec::new();
        for v in 0..self.m as usize {
            let root = uf.find(v);
            let slot = *by_root.entry(root).or_insert_with(|| {
                out.push(Vec::new());
                out.len() - 1
            });
            out[slot].push(v as u32 + 1);
        }
        out
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Degree-1 census of one non-trivial component of `H_len`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentExposure {
    pub smallest_generator: u32,
    pub size: usize,
    pub degree_one_vertices: usize,
}

/// Violation counters for the structural properties behind the elimination
/// argument. All counters are zero on a presentation where every property
/// holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// Relators whose support equals the support of an earlier relator.
    pub double_edge_count: u64,
    /// Relators of type 1, 2 and 3.
    pub type_counts: [u64; 3],
    /// Components of `H_len`, isolated vertices included.
    pub component_count: usize,
    pub max_component_size: usize,
    /// Per non-trivial component of `H_len`: vertices lying in exactly one
    /// `H_len` edge.
    pub component_exposure: Vec<ComponentExposure>,
    /// Non-trivial components with fewer than two degree-1 vertices.
    pub exposure_violations: u64,
    /// Non-trivial components meeting some type-2 edge in two or more vertices.
    pub type2_component_multi_meet: u64,
    /// Non-trivial components meeting at least two distinct type-2 edges.
    pub components_meeting_two_type2: u64,
    /// Generators lying in at least two type-2 edges.
    pub type2_matching_violations: u64,
}

impl DiagnosticsReport {
    /// Compact form without the per-component list.
    pub fn summary(&self) -> DiagnosticsSummary {
        DiagnosticsSummary {
            double_edge_count: self.double_edge_count,
            type_counts: self.type_counts,
            component_count: self.component_count,
            max_component_size: self.max_component_size,
            exposure_violations: self.exposure_violations,
            type2_component_multi_meet: self.type2_component_multi_meet,
            components_meeting_two_type2: self.components_meeting_two_type2,
            type2_matching_violations: self.type2_matching_violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub double_edge_count: u64,
    pub type_counts: [u64; 3],
    pub component_count: usize,
    pub max_component_size: usize,
    pub exposure_violations: u64,
    pub type2_component_multi_meet: u64,
    pub components_meeting_two_type2: u64,
    pub type2_matching_violations: u64,
}

pub fn diagnostics(pres: &Presentation) -> DiagnosticsReport {
    SupportHypergraph::build(pres).diagnostics()
}

impl SupportHypergraph {
    pub fn diagnostics(&self) -> DiagnosticsReport {
        let m = self.m as usize;

        let mut type_counts = [0u64; 3];
        for e in &self.edges {
            type_counts[e.kind as usize - 1] += 1;
        }

        let mut supports: Vec<&Support> = self.edges.iter().map(|e| &e.support).collect();
        supports.sort_unstable();
        let double_edge_count = supports.windows(2).filter(|w| w[0] == w[1]).count() as u64;

        let mut uf = self.uniform_union_find();
        let mut degree = vec![0u32; m];
        for &e in &self.uniform {
            for g in self.edges[e].support.generators() {
                degree[g as usize - 1] += 1;
            }
        }
        let roots: Vec<usize> = (0..m).map(|v| uf.find(v)).collect();
        let mut comp_size = vec![0usize; m];
        let mut comp_deg1 = vec![0usize; m];
        let mut comp_min = vec![u32::MAX; m];
        for v in 0..m {
            let r = roots[v];
            comp_size[r] += 1;
            comp_min[r] = comp_min[r].min(v as u32 + 1);
            if degree[v] == 1 {
                comp_deg1[r] += 1;
            }
        }
        // A component is non-trivial when it carries at least one edge.
        let nontrivial: Vec<bool> = (0..m).map(|v| degree[v] > 0).collect();
        let mut root_nontrivial = vec![false; m];
        for v in 0..m {
            if nontrivial[v] {
                root_nontrivial[roots[v]] = true;
            }
        }

        let mut component_exposure = Vec::new();
        let mut exposure_violations = 0;
        let mut component_count = 0;
        let mut max_component_size = 0;
        for r in 0..m {
            if comp_size[r] == 0 {
                continue;
            }
            component_count += 1;
            max_component_size = max_component_size.max(comp_size[r]);
            if root_nontrivial[r] {
                if comp_deg1[r] < 2 {
                    exposure_violations += 1;
                }
                component_exposure.push(ComponentExposure {
                    smallest_generator: comp_min[r],
                    size: comp_size[r],
                    degree_one_vertices: comp_deg1[r],
                });
            }
        }
        component_exposure.sort_by_key(|c| c.smallest_generator);

        let mut type2_incidence = vec![0u32; m];
        let mut multi_meet = vec![false; m];
        let mut type2_meets = vec![0u32; m];
        for e in self.edges.iter().filter(|e| e.kind == RelatorType::Two) {
            let gens = e.support.generators();
            let mut touched: SmallVec<[usize; 8]> = SmallVec::new();
            for &g in &gens {
                let v = g as usize - 1;
                type2_incidence[v] += 1;
                if root_nontrivial[roots[v]] {
                    touched.push(roots[v]);
                }
            }
            touched.sort_unstable();
            for w in touched.windows(2) {
                if w[0] == w[1] {
                    multi_meet[w[0]] = true;
                }
            }
            touched.dedup();
            for r in touched {
                type2_meets[r] += 1;
            }
        }

        DiagnosticsReport {
            double_edge_count,
            type_counts,
            component_count,
            max_component_size,
            component_exposure,
            exposure_violations,
            type2_component_multi_meet: multi_meet.iter().filter(|&&b| b).count() as u64,
            components_meeting_two_type2: type2_meets.iter().filter(|&&c| c >= 2).count() as u64,
            type2_matching_violations: type2_incidence.iter().filter(|&&c| c >= 2).count() as u64,
        }
    }
}

/// Exact check of `ceil((2k-1)/len) >= 6k / (5(len-1))` for `len >= 3` and
/// `k >= len + 1`.
pub fn verify_edge_lower_bound(len: u64, k: u64) -> Result<bool> {
    if len < 3 || k < len + 1 {
        return Err(Error::Domain(format!(
            "edge bound needs len >= 3 and k >= len + 1, got len = {len}, k = {k}"
        )));
    }
    let lhs = u128::from((2 * k - 1).div_ceil(len));
    Ok(lhs * 5 * u128::from(len - 1) >= 6 * u128::from(k))
}
