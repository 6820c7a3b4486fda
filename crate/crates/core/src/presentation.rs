//! Group presentations `<s_1..s_m | R>` and their text file format.
//!
//! ```text
//! m len model_tag param seed
//! 1 2 3
//! 1 -2 1
//! ```
//!
//! The header holds the generator count, relator length, model tag, the model
//! parameter (`p` for the binomial and positive models, `d` for the
//! uniform-count model) and the seed. Every following non-blank line is one
//! relator as signed integers.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Binomial,
    Positive,
    UniformCount,
    /// Relators supplied by hand rather than sampled.
    Given,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Binomial => "binomial",
            ModelKind::Positive => "positive",
            ModelKind::UniformCount => "uniform_count",
            ModelKind::Given => "given",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(ModelKind::Binomial),
            "positive" => Ok(ModelKind::Positive),
            "uniform_count" | "uniform-count" => Ok(ModelKind::UniformCount),
            "given" => Ok(ModelKind::Given),
            other => Err(Error::Domain(format!("unknown model {other:?}"))),
        }
    }
}

/// Model tag written into presentation files. `poisson` marks a binomial
/// sample whose relator count was drawn from the Poisson approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelTag {
    pub kind: ModelKind,
    pub poisson: bool,
}

impl ModelTag {
    pub fn exact(kind: ModelKind) -> Self {
        ModelTag { kind, poisson: false }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poisson {
            write!(f, "{}+poisson", self.kind)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

impl FromStr for ModelTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_suffix("+poisson") {
            Some(kind) => Ok(ModelTag {
                kind: kind.parse()?,
                poisson: true,
            }),
            None => Ok(ModelTag::exact(s.parse()?)),
        }
    }
}

/// A finite presentation with `m` generators and relators of length `len`.
///
/// Relators are kept sorted and pairwise distinct; each one is cyclically
/// reduced, has length exactly `len` and only uses generators `1..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Presentation {
    pub m: u32,
    pub len: u32,
    pub tag: ModelTag,
    pub param: f64,
    pub seed: u64,
    relators: Vec<Word>,
}

impl Presentation {
    /// Validates and sorts `relators`.
    pub fn new(
        m: u32,
        len: u32,
        tag: ModelTag,
        param: f64,
        seed: u64,
        mut relators: Vec<Word>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("a presentation needs at least one generator".into()));
        }
        if len == 0 {
            return Err(Error::Domain("relator length must be positive".into()));
        }
        for r in &relators {
            check_relator(r, m, len, tag.kind)?;
        }
        relators.sort_unstable();
        if relators.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("relators must be pairwise distinct".into()));
        }
        Ok(Presentation {
            m,
            len,
            tag,
            param,
            seed,
            relators,
        })
    }

    /// A hand-built presentation tagged `given`.
    pub fn given(m: u32, len: u32, relators: Vec<Word>) -> Result<Self> {
        Presentation::new(m, len, ModelTag::exact(ModelKind::Given), 0.0, 0, relators)
    }

    /// Convenience for tests and examples: relators as signed-integer slices.
    pub fn from_signed(m: u32, len: u32, relators: &[&[i32]]) -> Result<Self> {
        let words = relators
            .iter()
            .map(|r| Word::from_signed(r))
            .collect::<Result<Vec<_>>>()?;
        Presentation::given(m, len, words)
    }

    // Sampler output is already sorted, distinct and valid by construction.
    pub(crate) fn from_sorted_unchecked(
        m: u32,
        len: u32,
        tag: ModelTag,
        param: f64,
        seed: u64,
        relators: Vec<Word>,
    ) -> Self {
        debug_assert!(relators.windows(2).all(|w| w[0] < w[1]));
        Presentation {
            m,
            len,
            tag,
            param,
            seed,
            relators,
        }
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn num_relators(&self) -> usize {
        self.relators.len()
    }

    /// `1 - m + |R|`.
    pub fn euler_characteristic(&self) -> i64 {
        1 - i64::from(self.m) + self.relators.len() as i64
    }

    pub fn all_positive(&self) -> bool {
        self.relators.iter().all(Word::is_positive)
    }

    /// Generators that occur in no relator, in increasing order.
    pub fn unused_generators(&self) -> Vec<u32> {
        let mut used = vec![false; self.m as usize + 1];
        for r in &self.relators {
            for l in r.letters() {
                used[l.generator() as usize] = true;
            }
        }
        (1..=self.m).filter(|&g| !used[g as usize]).collect()
    }

    /// Serializes into the text file format.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.m, self.len, self.tag, self.param, self.seed
        );
        for r in &self.relators {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the text file format; errors carry 1-based line numbers.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: hline,
                message: format!(
                    "header needs 5 fields \"m len model_tag param seed\", found {}",
                    fields.len()
                ),
            });
        }
        let perr = |what: &str, e: &dyn fmt::Display| Error::Parse {
            line: hline,
            message: format!("bad {what}: {e}"),
        };
        let m: u32 = fields[0].parse().map_err(|e| perr("m", &e))?;
        let len: u32 = fields[1].parse().map_err(|e| perr("length", &e))?;
        let tag: ModelTag = fields[2].parse().map_err(|e| perr("model tag", &e))?;
        let param: f64 = fields[3].parse().map_err(|e| perr("param", &e))?;
        let seed: u64 = fields[4].parse().map_err(|e| perr("seed", &e))?;
        if m == 0 || len == 0 {
            return Err(Error::Parse {
                line: hline,
                message: "m and len must be positive".into(),
            });
        }

        let mut relators = Vec::new();
        let mut seen = HashSet::new();
        for (line, body) in lines {
            let word: Word = body.parse().map_err(|e: Error| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            check_relator(&word, m, len, tag.kind).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if !seen.insert(word.clone()) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate relator {word}"),
                });
            }
            relators.push(word);
        }
        relators.sort_unstable();
        Ok(Presentation {
            m,
            len,
            tag,
            param,
            seed,
            relators,
        })
    }
}

fn check_relator(r: &Word, m: u32, len: u32, kind: ModelKind) -> Result<()> {
    if r.len() != len as usize {
        return Err(Error::LengthMismatch {
            expected: len as usize,
            found: r.len(),
        });
    }
    if r.max_generator() > m {
        return Err(Error::Domain(format!(
            "relator {r} uses a generator beyond m = {m}"
        )));
    }
    if !r.is_cyclically_reduced()? {
        return Err(Error::NotCyclicallyReduced);
    }
    if kind == ModelKind::Positive && !r.is_positive() {
        return Err(Error::Domain(format!(
            "positive-model relator {r} has an inverse letter"
        )));
    }
    Ok(())
}
