//! Letters, words and exact counting over the alphabet `S^±` of a free group
//! of rank `m`.
//!
//! A letter is stored as a signed integer: `i` for the generator `s_i` and
//! `-i` for its inverse. Letters order by generator index first, with the
//! positive letter before its inverse, so `1 < -1 < 2 < -2 < ...`. Words are
//! compared lexicographically under that order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Default upper bound on the number of words `enumerate_cyclically_reduced`
/// is willing to stream.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// A generator `s_i` or its inverse, encoded as `±i` with `i >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: u32, positive: bool) -> Self {
        assert!(generator >= 1, "generator index starts at 1");
        let g = generator as i32;
        Letter(if positive { g } else { -g })
    }

    pub fn from_signed(value: i32) -> Result<Self> {
        if value == 0 {
            return Err(Error::Domain("letter 0 is not a generator".into()));
        }
        Ok(Letter(value))
    }

    /// Letter with dense index `k` in `0..2m`: `k = 2(i-1)` for `s_i` and
    /// `k = 2(i-1)+1` for `s_i^-1`. Dense order agrees with `Ord`.
    #[inline]
    pub fn from_index(k: u32) -> Self {
        let g = (k / 2 + 1) as i32;
        Letter(if k.is_multiple_of(2) { g } else { -g })
    }

    #[inline]
    pub fn index(self) -> u32 {
        let g = self.generator() - 1;
        2 * g + u32::from(self.0 < 0)
    }

    #[inline]
    pub fn generator(self) -> u32 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    #[inline]
    pub fn sign(self) -> i32 {
        self.0.signum()
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    #[inline]
    pub fn value(self) -> i32 {
        self.0
    }
}

impl TryFrom<i32> for Letter {
    type Error = Error;
    fn try_from(v: i32) -> Result<Self> {
        Letter::from_signed(v)
    }
}

impl From<Letter> for i32 {
    fn from(l: Letter) -> i32 {
        l.0
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index().cmp(&other.index())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Letters = SmallVec<[Letter; 8]>;

/// A finite sequence of letters. Construction does not enforce reducedness;
/// use the predicates below.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Letters);

impl Word {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word(letters.into_iter().collect())
    }

    /// Builds a word from signed integers, rejecting the letter `0`.
    pub fn from_signed(values: &[i32]) -> Result<Self> {
        values
            .iter()
            .map(|&v| Letter::from_signed(v))
            .collect::<Result<Letters>>()
            .map(Word)
    }

    pub fn from_indices(indices: &[u32]) -> Self {
        Word(indices.iter().map(|&k| Letter::from_index(k)).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|l| l.is_positive())
    }

    /// Largest generator index occurring in the word (0 for the empty word).
    pub fn max_generator(&self) -> u32 {
        self.0.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn rotated(&self, k: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|i| self.0[(i + k) % n]).collect())
    }

    /// Sorted, deduplicated generator indices occurring in the word.
    pub fn support(&self) -> SmallVec<[u32; 8]> {
        let mut s: SmallVec<[u32; 8]> = self.0.iter().map(|l| l.generator()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn is_reduced(&self) -> Result<bool> {
        if self.0.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(self.0.windows(2).all(|w| w[1] != w[0].inverse()))
    }

    pub fn is_cyclically_reduced(&self) -> Result<bool> {
        if !self.is_reduced()? {
            return Ok(false);
        }
        let first = self.0[0];
        let last = self.0[self.0.len() - 1];
        Ok(self.0.len() == 1 || last != first.inverse())
    }

    /// Lexicographically least word among the rotations of `self` and of its
    /// inverse.
    pub fn canonical_class(&self) -> Result<Word> {
        if !self.is_cyclically_reduced()? {
            return Err(Error::NotCyclicallyReduced);
        }
        let inv = self.inverse();
        let n = self.len();
        let best = (0..n)
            .flat_map(|k| [self.rotated(k), inv.rotated(k)])
            .min()
            .expect("nonempty word has rotations");
        Ok(best)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Text form: space-separated signed integers, e.g. `1 2 -1`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split_whitespace()
            .map(|t| {
                t.parse::<i32>()
                    .map_err(|e| Error::Domain(format!("bad letter {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::EmptyWord);
        }
        Word::from_signed(&values)
    }
}

/// Exact number of cyclically reduced words of length `len` over `m`
/// generators: `(2m-1)^len + 1 + (m-1)(1 + (-1)^len)`.
pub fn count_cyclically_reduced(m: u32, len: u32) -> BigUint {
    assert!(m >= 1 && len >= 1, "count needs m >= 1 and len >= 1");
    let base = BigUint::from(2 * u64::from(m) - 1);
    let mut n = base.pow(len) + 1u32;
    if len.is_multiple_of(2) {
        n += BigUint::from(2 * (u64::from(m) - 1));
    }
    n
}

/// `count_cyclically_reduced` when it fits in a `u64`.
pub fn count_cyclically_reduced_u64(m: u32, len: u32) -> Option<u64> {
    u64::try_from(count_cyclically_reduced(m, len)).ok()
}

/// Number of positive words `m^len`, if it fits in a `u64`.
pub fn count_positive(m: u32, len: u32) -> Option<u64> {
    u64::from(m).checked_pow(len)
}

/// Streams every cyclically reduced word of length `len` over `m` generators
/// exactly once, in lexicographic order.
pub fn enumerate_cyclically_reduced(m: u32, len: u32) -> Result<CyclicallyReducedWords> {
    enumerate_cyclically_reduced_capped(m, len, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_cyclically_reduced_capped(
    m: u32,
    len: u32,
    cap: u64,
) -> Result<CyclicallyReducedWords> {
    if m == 0 || len == 0 {
        return Err(Error::Domain("enumeration needs m >= 1 and length >= 1".into()));
    }
    let count = count_cyclically_reduced(m, len);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    Ok(CyclicallyReducedWords::new(m, len as usize))
}

/// Iterator behind [`enumerate_cyclically_reduced`]: an odometer over dense
/// letter indices that skips cancelling neighbours.
#[derive(Debug, Clone)]
pub struct CyclicallyReducedWords {
    alphabet: u32,
    digits: Vec<u32>,
    started: bool,
    done: bool,
}

impl CyclicallyReducedWords {
    fn new(m: u32, len: usize) -> Self {
        let mut it = CyclicallyReducedWords {
            alphabet: 2 * m,
            digits: vec![0; len],
            started: false,
            done: false,
        };
        it.fill_from(1);
        it
    }

    // Smallest non-cancelling completion of positions `from..`.
    fn fill_from(&mut self, from: usize) {
        for i in from..self.digits.len() {
            let forbidden = self.digits[i - 1] ^ 1;
            self.digits[i] = if forbidden == 0 { 1 } else { 0 };
        }
    }

    // Next reduced word in lexicographic order; false when exhausted.
    fn step(&mut self) -> bool {
        let mut i = self.digits.len();
        while i > 0 {
            i -= 1;
            let forbidden = if i == 0 { u32::MAX } else { self.digits[i - 1] ^ 1 };
            let mut next = self.digits[i] + 1;
            if next == forbidden {
                next += 1;
            }
            if next < self.alphabet {
                self.digits[i] = next;
                self.fill_from(i + 1);
                return true;
            }
        }
        false
    }

    fn current_is_cyclic(&self) -> bool {
        let n = self.digits.len();
        n == 1 || self.digits[n - 1] != self.digits[0] ^ 1
    }
}

impl Iterator for CyclicallyReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        loop {
            if self.started {
                if !self.step() {
                    self.done = true;
                    return None;
                }
            } else {
                self.started = true;
            }
            if self.current_is_cyclic() {
                return Some(Word::from_indices(&self.digits));
            }
        }
    }
}

/// All `m^len` positive words in lexicographic order.
pub fn enumerate_positive(m: u32, len: u32) -> impl Iterator<Item = Word> {
    let total = count_positive(m, len).expect("positive universe fits in u64");
    (0..total).map(move |code| positive_word_from_code(m, len, code))
}

/// Decodes `code` in `0..m^len` as a positive word, most significant digit
/// first.
pub fn positive_word_from_code(m: u32, len: u32, mut code: u64) -> Word {
    let mut letters: Letters = SmallVec::from_elem(Letter(1), len as usize);
    for i in (0..len as usize).rev() {
        let g = (code % u64::from(m)) as u32 + 1;
        code /= u64::from(m);
        letters[i] = Letter::new(g, true);
    }
    Word(letters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i32]) -> Word {
        Word::from_signed(v).unwrap()
    }

    // Independent oracle: filter all (2m)^len sequences.
    fn brute_force_count(m: u32, len: u32) -> u64 {
        let alphabet: Vec<i32> = (1..=m as i32).flat_map(|g| [g, -g]).collect();
        let mut count = 0;
        let total = (2 * m as u64).pow(len);
        for mut code in 0..total {
            let mut word = Vec::new();
            for _ in 0..len {
                word.push(alphabet[(code % (2 * m as u64)) as usize]);
                code /= 2 * m as u64;
            }
            if w(&word).is_cyclically_reduced().unwrap() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn reduced_predicates() {
        assert!(w(&[1, 2]).is_reduced().unwrap());
        assert!(!w(&[1, -1]).is_reduced().unwrap());
        assert!(w(&[1, 2, 1]).is_reduced().unwrap());
        assert!(!w(&[1, 2, -1]).is_cyclically_reduced().unwrap());
        assert!(w(&[1, 2, 1]).is_cyclically_reduced().unwrap());
        assert!(w(&[1, 1]).is_cyclically_reduced().unwrap());
        assert_eq!(Word::new([]).is_reduced(), Err(Error::EmptyWord));
        assert_eq!(Word::new([]).is_cyclically_reduced(), Err(Error::EmptyWord));
    }

    #[test]
    fn counts_match_small_cases() {
        assert_eq!(count_cyclically_reduced(2, 3), BigUint::from(28u32));
        assert_eq!(count_cyclically_reduced(1, 2), BigUint::from(2u32));
        assert_eq!(count_cyclically_reduced(2, 2), BigUint::from(12u32));
        for m in 1..=3 {
            for len in 1..=5 {
                assert_eq!(
                    count_cyclically_reduced(m, len),
                    BigUint::from(brute_force_count(m, len)),
                    "m={m} len={len}"
                );
            }
        }
    }

    #[test]
    fn count_exceeds_u64_for_large_sweeps() {
        let n = count_cyclically_reduced(1 << 20, 4);
        assert!(n > BigUint::from(u64::MAX));
        assert_eq!(count_cyclically_reduced_u64(1 << 20, 4), None);
    }

    #[test]
    fn enumeration_order_and_size() {
        let words: Vec<Word> = enumerate_cyclically_reduced(1, 1).unwrap().collect();
        assert_eq!(words, vec![w(&[1]), w(&[-1])]);
        assert_eq!(enumerate_cyclically_reduced(2, 3).unwrap().count(), 28);
        assert_eq!(
            enumerate_cyclically_reduced(2, 2).unwrap().next().unwrap(),
            w(&[1, 1])
        );
        let all: Vec<Word> = enumerate_cyclically_reduced(2, 4).unwrap().collect();
        assert!(all.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_cyclically_reduced_capped(3, 6, 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn canonical_class_examples() {
        assert_eq!(w(&[2, 1]).canonical_class().unwrap(), w(&[1, 2]));
        assert_eq!(w(&[-1, -2]).canonical_class().unwrap(), w(&[1, 2]));
        assert_eq!(w(&[1, 1]).canonical_class().unwrap(), w(&[1, 1]));
        assert_eq!(
            w(&[1, 2, -1]).canonical_class(),
            Err(Error::NotCyclicallyReduced)
        );
    }

    #[test]
    fn text_form_round_trip() {
        let word: Word = "1 2 -1".parse().unwrap();
        assert_eq!(word, w(&[1, 2, -1]));
        assert_eq!(word.to_string(), "1 2 -1");
        assert!("1 0".parse::<Word>().is_err());
        assert!("".parse::<Word>().is_err());
    }

    #[test]
    fn dense_index_round_trip() {
        for k in 0..20 {
            assert_eq!(Letter::from_index(k).index(), k);
        }
        assert!(Letter::from_index(0) < Letter::from_index(1));
        assert_eq!(Letter::from_index(1), Letter::new(1, false));
    }

    #[test]
    fn positive_codes() {
        let all: Vec<Word> = enumerate_positive(2, 3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], w(&[1, 1, 1]));
        assert_eq!(all[3], w(&[1, 2, 2]));
        assert!(all.iter().all(|x| x.is_positive()));
    }
}
