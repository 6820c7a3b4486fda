//! Exact checkers for the covering properties (L) and (SL), and the combined
//! Property FA verdict.
//!
//! For positive relators of length `len` over `m` generators, with
//! `s = ceil(eps m)` and `K = floor((1 - eps) m)`:
//!
//! * (L) holds if for all `V_1..V_len` of size `s` some relator `v_1..v_len`
//!   has every `v_i` in `V_i`;
//! * (SL) holds if for every split `S = U + V` with `1 <= |U| <= K` some
//!   relator starts in `U` and has all later letters in `V`.
//!
//! Both together imply Property FA when `eps = 1/100`; other values are
//! reported as exploratory.

use serde::{Deserialize, Serialize};

use crate::abelianization::surjects_onto_z;
use crate::error::{Error, Result};
use crate::freeness::{certify_free, EliminationCertificate, FreenessOutcome};
use crate::presentation::Presentation;
use crate::words::Word;

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_BUDGET: u64 = 50_000_000;
/// Largest `m` for which the SL search enumerates subsets by Gray code.
pub const GRAY_MAX_M: u32 = 16;
/// SL searches use 128-bit generator masks.
pub const SL_MAX_M: u32 = 128;

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

/// Size `s = max(1, ceil(eps m))` of the sets in (L).
pub fn l_set_size(eps: f64, m: u32) -> usize {
    let x = eps * f64::from(m);
    ((x - 1e-9).ceil() as usize).clamp(1, m as usize)
}

/// Upper bound `max(1, floor((1 - eps) m))` on `|U|` in (SL).
pub fn sl_upper_bound(eps: f64, m: u32) -> usize {
    let x = (1.0 - eps) * f64::from(m);
    ((x + 1e-9).floor() as usize).clamp(1, m as usize)
}

pub fn is_default_epsilon(eps: f64) -> bool {
    (eps - DEFAULT_EPSILON).abs() < 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LMode {
    /// Relators must be positive words; letters are matched as generators.
    PositiveLetters,
    /// Any relator; each letter is replaced by its generator.
    Support,
}

/// An avoided tuple `(V_1, ..., V_len)`, each a sorted list of generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LWitness {
    pub sets: Vec<Vec<u32>>,
}

/// An avoided split; `u` and `v` are sorted and partition the generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SLWitness {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum Check<W> {
    Holds,
    Fails(W),
}

impl<W> Check<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Check::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Check::Holds => None,
            Check::Fails(w) => Some(w),
        }
    }
}

fn generator_rows(pres: &Presentation, mode: LMode) -> Result<Vec<Vec<u32>>> {
    if mode == LMode::PositiveLetters && !pres.all_positive() {
        return Err(Error::Domain(
            "positive_letters mode needs every relator to be a positive word".into(),
        ));
    }
    Ok(pres
        .relators()
        .iter()
        .map(|r| r.letters().iter().map(|l| l.generator() - 1).collect())
        .collect())
}

/// Exact (L) check with the default node budget.
pub fn check_l_exact(pres: &Presentation, eps: f64, mode: LMode) -> Result<Check<LWitness>> {
    check_l_with_budget(pres, eps, mode, DEFAULT_BUDGET)
}

pub fn check_l_with_budget(
    pres: &Presentation,
    eps: f64,
    mode: LMode,
    budget: u64,
) -> Result<Check<LWitness>> {
    check_epsilon(eps)?;
    let rows = generator_rows(pres, mode)?;
    let s = l_set_size(eps, pres.m);
    let mut search = LSearch {
        rows: &rows,
        m: pres.m as usize,
        len: pres.len as usize,
        s,
        nodes: 0,
        budget,
        chosen: Vec::new(),
    };
    let all: Vec<u32> = (0..rows.len() as u32).collect();
    if search.descend(&all)? {
        let sets = search
            .chosen
            .into_iter()
            .map(|v| v.into_iter().map(|g| g + 1).collect())
            .collect();
        Ok(Check::Fails(LWitness { sets }))
    } else {
        Ok(Check::Holds)
    }
}

/// Depth-first search over positions. At each level only relators that
/// still match every earlier set matter. Generators absent from their
/// letters at this position can always be added to `V_j` for free, so `V_j`
/// is that free part plus the fewest possible threatened letters.
struct LSearch<'a> {
    rows: &'a [Vec<u32>],
    m: usize,
    len: usize,
    s: usize,
    nodes: u64,
    budget: u64,
    chosen: Vec<Vec<u32>>,
}

impl LSearch<'_> {
    fn descend(&mut self, threatening: &[u32]) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let j = self.chosen.len();
        if threatening.is_empty() {
            while self.chosen.len() < self.len {
                self.chosen.push((0..self.s as u32).collect());
            }
            return Ok(true);
        }
        if j == self.len {
            return Ok(false);
        }
        let mut present = vec![false; self.m];
        for &r in threatening {
            present[self.rows[r as usize][j] as usize] = true;
        }
        let letters: Vec<u32> = (0..self.m as u32).filter(|&g| present[g as usize]).collect();
        let free: Vec<u32> = (0..self.m as u32).filter(|&g| !present[g as usize]).collect();
        let need = self.s.saturating_sub(free.len());
        let fill = self.s - need;
        if need > 0 && j + 1 == self.len {
            return Ok(false);
        }
        let mut combo: Vec<usize> = (0..need).collect();
        loop {
            let mut in_w = vec![false; self.m];
            for &i in &combo {
                in_w[letters[i] as usize] = true;
            }
            let next: Vec<u32> = threatening
                .iter()
                .copied()
                .filter(|&r| in_w[self.rows[r as usize][j] as usize])
                .collect();
            let mut set: Vec<u32> = combo.iter().map(|&i| letters[i]).collect();
            set.extend(&free[..fill]);
            set.sort_unstable();
            self.chosen.push(set);
            if self.descend(&next)? {
                return Ok(true);
            }
            self.chosen.pop();
            if !next_combination(&mut combo, letters.len()) {
                return Ok(false);
            }
        }
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for t in i + 1..k {
                combo[t] = combo[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// True iff `witness` has the right shape and no relator of `pres` reads
/// `v_1..v_len` with every `v_i` in `V_i`.
pub fn verify_l_witness(pres: &Presentation, eps: f64, witness: &LWitness) -> bool {
    let s = l_set_size(eps, pres.m);
    if witness.sets.len() != pres.len as usize {
        return false;
    }
    let mut member = vec![vec![false; pres.m as usize + 1]; witness.sets.len()];
    for (i, set) in witness.sets.iter().enumerate() {
        if set.len() != s || set.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        for &g in set {
            if g == 0 || g > pres.m {
                return false;
            }
            member[i][g as usize] = true;
        }
    }
    !pres.relators().iter().any(|r| {
        r.letters()
            .iter()
            .enumerate()
            .all(|(i, l)| member[i][l.generator() as usize])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SLStrategy {
    /// Gray code for `m <= GRAY_MAX_M`, branch and bound otherwise.
    Auto,
    Gray,
    BranchAndBound,
}

/// A relator seen by (SL): it matches `U` iff `first` is in `U` and `rest`
/// misses `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pattern {
    first: u32,
    rest: u128,
}

fn sl_patterns(pres: &Presentation) -> Result<Vec<Pattern>> {
    if !pres.all_positive() {
        return Err(Error::Domain("SL check needs every relator to be a positive word".into()));
    }
    if pres.m > SL_MAX_M {
        return Err(Error::Domain(format!("SL search supports m <= {SL_MAX_M}")));
    }
    let mut pats: Vec<Pattern> = pres
        .relators()
        .iter()
        .filter_map(|r| {
            let first = r.letters()[0].generator() - 1;
            let rest = r.letters()[1..]
                .iter()
                .fold(0u128, |acc, l| acc | 1 << (l.generator() - 1));
            // A relator reusing its first generator can never match.
            (rest >> first & 1 == 0).then_some(Pattern { first, rest })
        })
        .collect();
    pats.sort_unstable();
    pats.dedup();
    // For a fixed first letter, a smaller rest set is a stronger constraint.
    let mut kept: Vec<Pattern> = Vec::with_capacity(pats.len());
    for p in &pats {
        let dominated = pats
            .iter()
            .any(|q| q.first == p.first && q.rest != p.rest && q.rest & !p.rest == 0);
        if !dominated {
            kept.push(*p);
        }
    }
    Ok(kept)
}

fn sl_witness(m: u32, u: u128) -> SLWitness {
    let (mut us, mut vs) = (Vec::new(), Vec::new());
    for g in 0..m {
        if u >> g & 1 == 1 {
            us.push(g + 1);
        } else {
            vs.push(g + 1);
        }
    }
    SLWitness { u: us, v: vs }
}

pub fn check_sl_exact(pres: &Presentation, eps: f64) -> Result<Check<SLWitness>> {
    check_sl_with(pres, eps, SLStrategy::Auto, DEFAULT_BUDGET)
}

pub fn check_sl_with(
    pres: &Presentation,
    eps: f64,
    strategy: SLStrategy,
    budget: u64,
) -> Result<Check<SLWitness>> {
    check_epsilon(eps)?;
    let pats = sl_patterns(pres)?;
    let k = sl_upper_bound(eps, pres.m);
    let gray = match strategy {
        SLStrategy::Auto => pres.m <= GRAY_MAX_M,
        SLStrategy::Gray => true,
        SLStrategy::BranchAndBound => false,
    };
    let found = if gray {
        if pres.m >= 64 || (1u64 << pres.m) > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        sl_gray(pres.m, k, &pats)
    } else {
        sl_branch_and_bound(pres.m, k, &pats, budget)?
    };
    Ok(match found {
        Some(u) => Check::Fails(sl_witness(pres.m, u)),
        None => Check::Holds,
    })
}

/// Walks all subsets in reflected Gray code order, keeping for each pattern
/// the number of its `rest` generators inside `U`, and the number of
/// patterns currently matched.
fn sl_gray(m: u32, k: usize, pats: &[Pattern]) -> Option<u128> {
    let m = m as usize;
    let mut as_first: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut in_rest: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, p) in pats.iter().enumerate() {
        as_first[p.first as usize].push(i);
        for g in 0..m {
            if p.rest >> g & 1 == 1 {
                in_rest[g].push(i);
            }
        }
    }
    let mut hits = vec![0u32; pats.len()];
    let mut u: u128 = 0;
    let mut size = 0usize;
    let mut matched = 0usize;
    let is_match = |i: usize, u: u128, hits: &[u32]| u >> pats[i].first & 1 == 1 && hits[i] == 0;
    for step in 1u64..(1u64 << m) {
        let g = step.trailing_zeros() as usize;
        let adding = u >> g & 1 == 0;
        let touched = as_first[g].iter().chain(&in_rest[g]);
        for &i in touched.clone() {
            if is_match(i, u, &hits) {
                matched -= 1;
            }
        }
        for &i in &in_rest[g] {
            if adding {
                hits[i] += 1;
            } else {
                hits[i] -= 1;
            }
        }
        u ^= 1 << g;
        if adding {
            size += 1;
        } else {
            size -= 1;
        }
        for &i in touched {
            if is_match(i, u, &hits) {
                matched += 1;
            }
        }
        if matched == 0 && size <= k {
            return Some(u);
        }
    }
    None
}

/// Depth-first search for `U`: roots fix the least element of `U`; while
/// some pattern is matched, branch on which of its `rest` generators joins
/// `U`, excluding earlier choices in later branches.
fn sl_branch_and_bound(m: u32, k: usize, pats: &[Pattern], budget: u64) -> Result<Option<u128>> {
    let mut nodes = 0u64;
    for g0 in 0..m {
        let excluded = (1u128 << g0) - 1;
        if let Some(u) = sl_dfs(1 << g0, excluded, 1, k, pats, &mut nodes, budget)? {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

fn sl_dfs(
    u: u128,
    excluded: u128,
    size: usize,
    k: usize,
    pats: &[Pattern],
    nodes: &mut u64,
    budget: u64,
) -> Result<Option<u128>> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut best: Option<u128> = None;
    for p in pats {
        if u >> p.first & 1 == 1 && p.rest & u == 0 {
            let allowed = p.rest & !excluded;
            if allowed == 0 {
                return Ok(None);
            }
            if best.is_none_or(|b| allowed.count_ones() < b.count_ones()) {
                best = Some(allowed);
            }
        }
    }
    let Some(mut allowed) = best else {
        return Ok(Some(u));
    };
    if size == k {
        return Ok(None);
    }
    let mut excluded = excluded;
    while allowed != 0 {
        let bit = allowed & allowed.wrapping_neg();
        allowed ^= bit;
        if let Some(w) = sl_dfs(u | bit, excluded, size + 1, k, pats, nodes, budget)? {
            return Ok(Some(w));
        }
        excluded |= bit;
    }
    Ok(None)
}

/// True iff `witness` is a valid split of the generators with an allowed
/// size and no relator starts in `U` and continues in `V`.
pub fn verify_sl_witness(pres: &Presentation, eps: f64, witness: &SLWitness) -> bool {
    let m = pres.m as usize;
    let k = sl_upper_bound(eps, pres.m);
    let mut in_u = vec![None; m + 1];
    for (list, side) in [(&witness.u, true), (&witness.v, false)] {
        for &g in list.iter() {
            if g == 0 || g as usize > m || in_u[g as usize].is_some() {
                return false;
            }
            in_u[g as usize] = Some(side);
        }
    }
    if in_u[1..].iter().any(Option::is_none) || witness.u.is_empty() || witness.u.len() > k {
        return false;
    }
    let side = |g: u32| in_u[g as usize] == Some(true);
    !pres.relators().iter().any(|r| {
        let ls = r.letters();
        ls[0].is_positive()
            && side(ls[0].generator())
            && ls[1..].iter().all(|l| l.is_positive() && !side(l.generator()))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    FreeCertified { rank: i64 },
    SplitsWitness { unused: Vec<u32> },
    FaCertified,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
/// `Reference` only for ε = 1/100, the value the FA implication holds for.
pub enum EpsilonKind {
    Reference,
    Exploratory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FAReport {
    pub verdict: Verdict,
    pub epsilon: f64,
    pub epsilon_kind: EpsilonKind,
    /// Relators entering (L) and (SL): the positive ones.
    pub positive_relators: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<EliminationCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Check<LWitness>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sl: Option<Check<SLWitness>>,
    /// A search hit its node budget, so the verdict may be `Unknown` only
    /// for lack of effort.
    pub budget_exceeded: bool,
}

/// The presentation on the positive relators only. The full group is a
/// quotient of it, so FA for it implies FA for the full group.
pub fn positive_part(pres: &Presentation) -> Presentation {
    let rels: Vec<Word> = pres
        .relators()
        .iter()
        .filter(|r| r.is_positive())
        .cloned()
        .collect();
    Presentation::given(pres.m, pres.len, rels).expect("subset of a valid presentation")
}

/// Combines the individual results in priority order: free, splitting,
/// (L) and (SL), unknown.
pub fn combine_verdict(
    free_rank: Option<i64>,
    unused: &[u32],
    l_holds: Option<bool>,
    sl_holds: Option<bool>,
) -> Verdict {
    if let Some(rank) = free_rank {
        Verdict::FreeCertified { rank }
    } else if !unused.is_empty() {
        Verdict::SplitsWitness { unused: unused.to_vec() }
    } else if l_holds == Some(true) && sl_holds == Some(true) {
        Verdict::FaCertified
    } else {
        Verdict::Unknown
    }
}

pub fn fa_verdict(pres: &Presentation, eps: f64) -> Result<FAReport> {
    fa_verdict_with_budget(pres, eps, DEFAULT_BUDGET)
}

pub fn fa_verdict_with_budget(pres: &Presentation, eps: f64, budget: u64) -> Result<FAReport> {
    check_epsilon(eps)?;
    let positive = positive_part(pres);
    let mut report = FAReport {
        verdict: Verdict::Unknown,
        epsilon: eps,
        epsilon_kind: if is_default_epsilon(eps) {
            EpsilonKind::Reference
        } else {
            EpsilonKind::Exploratory
        },
        positive_relators: positive.num_relators(),
        certificate: None,
        l: None,
        sl: None,
        budget_exceeded: false,
    };
    if let FreenessOutcome::Certified(cert) = certify_free(pres) {
        report.verdict = combine_verdict(Some(cert.final_rank), &[], None, None);
        report.certificate = Some(cert);
        return Ok(report);
    }
    let unused = pres.unused_generators();
    if !unused.is_empty() {
        report.verdict = combine_verdict(None, &unused, None, None);
        return Ok(report);
    }
    match check_l_with_budget(&positive, eps, LMode::PositiveLetters, budget) {
        Ok(c) => report.l = Some(c),
        Err(Error::BudgetExceeded { .. }) => report.budget_exceeded = true,
        Err(e) => return Err(e),
    }
    if report.l.as_ref().is_none_or(Check::holds) {
        match check_sl_with(&positive, eps, SLStrategy::Auto, budget) {
            Ok(c) => report.sl = Some(c),
            Err(Error::BudgetExceeded { .. }) => report.budget_exceeded = true,
            Err(e) => return Err(e),
        }
    }
    report.verdict = combine_verdict(
        None,
        &[],
        report.l.as_ref().map(Check::holds),
        report.sl.as_ref().map(Check::holds),
    );
    if report.verdict == Verdict::FaCertified {
        debug_assert!(!surjects_onto_z(pres));
    }
    Ok(report)
}
