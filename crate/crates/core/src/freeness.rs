//! Freeness certificates by repeated generator/relator deletion.
//!
//! If a generator `a` occurs exactly once in the relator set, and that
//! occurrence is in relator `r`, then `r` can be solved for `a` and both can be
//! dropped without changing the group. When every relator can be removed this
//! way the group is free of rank `m - |R|`, and the ordered list of deletions
//! is a certificate that can be replayed independently.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::presentation::Presentation;
use crate::words::Word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationStep {
    pub generator: u32,
    pub relator: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationCertificate {
    pub steps: Vec<EliminationStep>,
    pub final_rank: i64,
}

/// Residue left when no admissible deletion exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StuckReport {
    pub steps_taken: usize,
    pub remaining_relators: Vec<Word>,
    /// Generators not deleted so far.
    pub remaining_generators: Vec<u32>,
    /// More relators remain than generators.
    pub rank_negative: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FreenessOutcome {
    Certified(EliminationCertificate),
    Stuck(StuckReport),
}

impl FreenessOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, FreenessOutcome::Certified(_))
    }

    pub fn certificate(&self) -> Option<&EliminationCertificate> {
        match self {
            FreenessOutcome::Certified(c) => Some(c),
            FreenessOutcome::Stuck(_) => None,
        }
    }
}

/// The admissible pair with the smallest generator index, if any: a
/// generator occurring exactly once across `relators`, with the relator
/// holding that occurrence.
pub fn find_elimination(relators: &[Word]) -> Option<(u32, Word)> {
    let mut occurrences: HashMap<u32, (u32, usize)> = HashMap::new();
    for (i, r) in relators.iter().enumerate() {
        for l in r.letters() {
            let e = occurrences.entry(l.generator()).or_insert((0, i));
            e.0 += 1;
        }
    }
    occurrences
        .into_iter()
        .filter(|(_, (count, _))| *count == 1)
        .min_by_key(|(g, _)| *g)
        .map(|(g, (_, i))| (g, relators[i].clone()))
}

/// Incremental elimination over relator indices.
///
/// Keeps, per generator, its number of letter occurrences in the surviving
/// relators and the ids of relators containing it; a min-heap holds
/// generators whose count dropped to one.
struct Eliminator<'a> {
    relators: &'a [Word],
    alive: Vec<bool>,
    occurrences: Vec<u32>,
    incidence: Vec<Vec<u32>>,
    ready: BinaryHeap<Reverse<u32>>,
    remaining: usize,
}

impl<'a> Eliminator<'a> {
    fn new(pres: &'a Presentation) -> Self {
        let m = pres.m as usize;
        let relators = pres.relators();
        let mut occurrences = vec![0u32; m + 1];
        let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); m + 1];
        for (i, r) in relators.iter().enumerate() {
            for g in r.support() {
                incidence[g as usize].push(i as u32);
            }
            for l in r.letters() {
                occurrences[l.generator() as usize] += 1;
            }
        }
        let ready = (1..=m as u32)
            .filter(|&g| occurrences[g as usize] == 1)
            .map(Reverse)
            .collect();
        Eliminator {
            relators,
            alive: vec![true; relators.len()],
            occurrences,
            incidence,
            ready,
            remaining: relators.len(),
        }
    }

    /// Performs the next deletion, returning `(generator, relator index)`.
    fn step(&mut self) -> Option<(u32, usize)> {
        while let Some(Reverse(g)) = self.ready.pop() {
            if self.occurrences[g as usize] != 1 {
                continue;
            }
            let r = self.incidence[g as usize]
                .iter()
                .map(|&i| i as usize)
                .find(|&i| self.alive[i])
                .expect("a generator with one occurrence has a live relator");
            self.alive[r] = false;
            self.remaining -= 1;
            for l in self.relators[r].letters() {
                let c = &mut self.occurrences[l.generator() as usize];
                *c -= 1;
                if *c == 1 {
                    self.ready.push(Reverse(l.generator()));
                }
            }
            return Some((g, r));
        }
        None
    }
}

/// Lightweight result of the elimination used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EliminationSummary {
    pub certified: bool,
    pub steps: usize,
    pub remaining_relators: usize,
}

pub fn eliminate_summary(pres: &Presentation) -> EliminationSummary {
    let mut e = Eliminator::new(pres);
    let mut steps = 0;
    while e.remaining > 0 && e.step().is_some() {
        steps += 1;
    }
    EliminationSummary {
        certified: e.remaining == 0,
        steps,
        remaining_relators: e.remaining,
    }
}

/// Runs the deletion process to completion or until stuck.
pub fn certify_free(pres: &Presentation) -> FreenessOutcome {
    let mut e = Eliminator::new(pres);
    let mut steps = Vec::new();
    let mut eliminated = vec![false; pres.m as usize + 1];
    while e.remaining > 0 {
        match e.step() {
            Some((g, r)) => {
                eliminated[g as usize] = true;
                steps.push(EliminationStep {
                    generator: g,
                    relator: pres.relators()[r].clone(),
                });
            }
            None => break,
        }
    }
    if e.remaining == 0 {
        return FreenessOutcome::Certified(EliminationCertificate {
            steps,
            final_rank: i64::from(pres.m) - pres.num_relators() as i64,
        });
    }
    let remaining_relators: Vec<Word> = pres
        .relators()
        .iter()
        .zip(&e.alive)
        .filter(|(_, &alive)| alive)
        .map(|(r, _)| r.clone())
        .collect();
    let remaining_generators: Vec<u32> =
        (1..=pres.m).filter(|&g| !eliminated[g as usize]).collect();
    FreenessOutcome::Stuck(StuckReport {
        steps_taken: steps.len(),
        rank_negative: remaining_relators.len() > remaining_generators.len(),
        remaining_relators,
        remaining_generators,
        reason: "no generator occurs exactly once among the remaining relators".into(),
    })
}

/// Independently re-checks a certificate against `pres`.
pub fn replay_certificate(pres: &Presentation, cert: &EliminationCertificate) -> bool {
    let mut remaining: HashMap<&Word, usize> = HashMap::new();
    for r in pres.relators() {
        *remaining.entry(r).or_insert(0) += 1;
    }
    let mut occurrences: HashMap<u32, u32> = HashMap::new();
    for r in pres.relators() {
        for l in r.letters() {
            *occurrences.entry(l.generator()).or_insert(0) += 1;
        }
    }
    for step in &cert.steps {
        match remaining.get_mut(&step.relator) {
            Some(c) if *c > 0 => *c -= 1,
            _ => return false,
        }
        let in_relator = step
            .relator
            .letters()
            .iter()
            .filter(|l| l.generator() == step.generator)
            .count();
        if in_relator != 1 || occurrences.get(&step.generator) != Some(&1) {
            return false;
        }
        for l in step.relator.letters() {
            *occurrences.get_mut(&l.generator()).expect("counted above") -= 1;
        }
    }
    remaining.values().all(|&c| c == 0)
        && cert.final_rank == i64::from(pres.m) - pres.num_relators() as i64
}
