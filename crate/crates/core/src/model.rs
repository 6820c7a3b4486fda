//! Samplers for the binomial, positive and uniform-count models.
//!
//! Binomial and positive samples are drawn as `K ~ Binomial(N, p)` followed by
//! `K` distinct uniform words from the `N`-word universe, which has the same
//! law as including every word independently with probability `p`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presentation::{ModelKind, ModelTag, Presentation};
use crate::words::{
    count_cyclically_reduced, count_positive, enumerate_cyclically_reduced_capped,
    positive_word_from_code, Word,
};

/// Largest universe that is enumerated when most of it is selected.
const ENUMERATE_LIMIT: u64 = 50_000_000;

/// Per-trial random stream. ChaCha keyed by the seed, with the 64-bit stream
/// id selecting an independent keystream.
pub type TrialRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of grid point `point`.
pub fn trial_stream(point: u32, trial: u32) -> u64 {
    (u64::from(point) << 32) | u64::from(trial)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Probability(f64),
    Density(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: u32,
    pub len: u32,
    pub parameter: Parameter,
    pub seed: u64,
}

impl ModelParams {
    pub fn probability(m: u32, len: u32, p: f64, seed: u64) -> Self {
        ModelParams {
            m,
            len,
            parameter: Parameter::Probability(p),
            seed,
        }
    }

    pub fn density(m: u32, len: u32, d: f64, seed: u64) -> Self {
        ModelParams {
            m,
            len,
            parameter: Parameter::Density(d),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Domain(format!("need m >= 2, got {}", self.m)));
        }
        if self.len < 3 {
            return Err(Error::Domain(format!("need len >= 3, got {}", self.len)));
        }
        match self.parameter {
            Parameter::Probability(p) if !(0.0..=1.0).contains(&p) => {
                Err(Error::Domain(format!("p = {p} is not in [0, 1]")))
            }
            Parameter::Density(d) if !(d > 0.0 && d < 1.0) => {
                Err(Error::Domain(format!("d = {d} is not in (0, 1)")))
            }
            _ => Ok(()),
        }
    }

    /// The inclusion probability, converting a density with `density_to_p`.
    pub fn p(&self) -> Result<f64> {
        match self.parameter {
            Parameter::Probability(p) => Ok(p),
            Parameter::Density(d) => density_to_p(self.m, self.len, d),
        }
    }
}

/// `p = m^{len (d - 1)}`.
pub fn density_to_p(m: u32, len: u32, d: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::Domain(format!("density {d} is not in (0, 1)")));
    }
    Ok(f64::from(m).powf(f64::from(len) * (d - 1.0)))
}

/// Inverse of `density_to_p`: `d = 1 + ln p / (len ln m)`.
pub fn p_to_density(m: u32, len: u32, p: f64) -> f64 {
    1.0 + p.ln() / (f64::from(len) * f64::from(m).ln())
}

/// A uniform cyclically reduced word: a uniform reduced word, rejected until
/// its last letter does not cancel the first.
pub fn sample_uniform_word<R: Rng + ?Sized>(m: u32, len: u32, rng: &mut R) -> Word {
    let mut buf = Vec::with_capacity(len as usize);
    loop {
        fill_reduced_indices(m, len, rng, &mut buf);
        if is_cyclic_indices(&buf) {
            return Word::from_indices(&buf);
        }
    }
}

fn fill_reduced_indices<R: Rng + ?Sized>(m: u32, len: u32, rng: &mut R, buf: &mut Vec<u32>) {
    let alphabet = 2 * m;
    buf.clear();
    let mut prev = rng.random_range(0..alphabet);
    buf.push(prev);
    for _ in 1..len {
        let forbidden = prev ^ 1;
        let mut k = rng.random_range(0..alphabet - 1);
        if k >= forbidden {
            k += 1;
        }
        buf.push(k);
        prev = k;
    }
}

#[inline]
fn is_cyclic_indices(idx: &[u32]) -> bool {
    idx.len() == 1 || idx[idx.len() - 1] != idx[0] ^ 1
}

// Packs dense letter indices into an integer key when (2m)^len fits u128.
fn packs_into_u128(m: u32, len: u32) -> bool {
    u128::from(2 * m).checked_pow(len).is_some()
}

fn pack(idx: &[u32], alphabet: u32) -> u128 {
    idx.iter()
        .fold(0u128, |acc, &k| acc * u128::from(alphabet) + u128::from(k))
}

/// `k` distinct uniform cyclically reduced words, sorted.
fn distinct_uniform_words<R: Rng + ?Sized>(
    m: u32,
    len: u32,
    k: u64,
    universe: &BigUint,
    rng: &mut R,
) -> Result<Vec<Word>> {
    if BigUint::from(k) > *universe {
        return Err(Error::CountExceedsUniverse {
            requested: k.to_string(),
            universe: universe.to_string(),
        });
    }
    let n_small = universe.to_u64().filter(|&n| n <= ENUMERATE_LIMIT);
    if let Some(n) = n_small {
        if k > n / 2 {
            let all: Vec<Word> = enumerate_cyclically_reduced_capped(m, len, n)?.collect();
            let mut chosen: Vec<usize> = index::sample(rng, n as usize, k as usize).into_vec();
            chosen.sort_unstable();
            return Ok(chosen.into_iter().map(|i| all[i].clone()).collect());
        }
    }
    let k = usize::try_from(k).map_err(|_| Error::Domain("relator count overflows".into()))?;
    let mut words = Vec::with_capacity(k);
    let mut buf = Vec::with_capacity(len as usize);
    if packs_into_u128(m, len) {
        let mut seen: HashSet<u128> = HashSet::with_capacity(k);
        while words.len() < k {
            fill_reduced_indices(m, len, rng, &mut buf);
            if is_cyclic_indices(&buf) && seen.insert(pack(&buf, 2 * m)) {
                words.push(Word::from_indices(&buf));
            }
        }
    } else {
        let mut seen: HashSet<Word> = HashSet::with_capacity(k);
        while words.len() < k {
            let w = sample_uniform_word(m, len, rng);
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
    }
    words.sort_unstable();
    Ok(words)
}

/// Draws `K ~ Binomial(N, p)`. Returns the count and whether the Poisson
/// approximation was used (only when `N > 2^63`, `p < 1e-8` and `Np < 2^63`).
fn binomial_count<R: Rng + ?Sized>(n: &BigUint, p: f64, rng: &mut R) -> Result<(u64, bool)> {
    if p == 0.0 {
        return Ok((0, false));
    }
    if let Some(n64) = n.to_u64().filter(|&x| x <= 1 << 63) {
        if p == 1.0 {
            return Ok((n64, false));
        }
        let dist = Binomial::new(n64, p).map_err(|e| Error::Domain(e.to_string()))?;
        return Ok((dist.sample(rng), false));
    }
    let mean = n.to_f64().unwrap_or(f64::INFINITY) * p;
    if p < 1e-8 && mean < 9.223_372_036_854_776e18 {
        let dist = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?;
        let k: f64 = dist.sample(rng);
        return Ok((k as u64, true));
    }
    Err(Error::Domain(format!(
        "universe of {n} words at p = {p} is outside the exact and Poisson regimes"
    )))
}

/// Binomial model: every cyclically reduced word of length `len` is a relator
/// independently with probability `p`.
pub fn sample_binomial(params: &ModelParams) -> Result<Presentation> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, 0);
    sample_binomial_with(params, &mut rng)
}

pub fn sample_binomial_with<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<Presentation> {
    params.validate()?;
    let p = params.p()?;
    let universe = count_cyclically_reduced(params.m, params.len);
    let (k, poisson) = binomial_count(&universe, p, rng)?;
    let relators = distinct_uniform_words(params.m, params.len, k, &universe, rng)?;
    Ok(Presentation::from_sorted_unchecked(
        params.m,
        params.len,
        ModelTag {
            kind: ModelKind::Binomial,
            poisson,
        },
        p,
        params.seed,
        relators,
    ))
}

/// Positive model: every one of the `m^len` words without inverse letters is
/// a relator independently with probability `p`.
pub fn sample_positive(params: &ModelParams) -> Result<Presentation> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, 0);
    sample_positive_with(params, &mut rng)
}

pub fn sample_positive_with<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<Presentation> {
    params.validate()?;
    let p = params.p()?;
    let (m, len) = (params.m, params.len);
    let universe = count_positive(m, len)
        .filter(|&n| n <= 1 << 63)
        .ok_or_else(|| Error::Domain(format!("{m}^{len} positive words overflow")))?;
    let (k, _) = binomial_count(&BigUint::from(universe), p, rng)?;
    let mut codes: Vec<u64> = if k > universe / 2 && universe <= ENUMERATE_LIMIT {
        index::sample(rng, universe as usize, k as usize)
            .into_iter()
            .map(|i| i as u64)
            .collect()
    } else {
        let k = k as usize;
        let mut seen: HashSet<u64> = HashSet::with_capacity(k);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let c = rng.random_range(0..universe);
            if seen.insert(c) {
                out.push(c);
            }
        }
        out
    };
    // Codes are most-significant-letter first, so code order is word order.
    codes.sort_unstable();
    let relators = codes
        .into_iter()
        .map(|c| positive_word_from_code(m, len, c))
        .collect();
    Ok(Presentation::from_sorted_unchecked(
        m,
        len,
        ModelTag::exact(ModelKind::Positive),
        p,
        params.seed,
        relators,
    ))
}

/// `floor((2m-1)^{len d})`, snapping values within 1e-9 (relative) of an
/// integer to that integer so that exact powers are not lost to rounding.
pub fn uniform_relator_count(m: u32, len: u32, d: f64) -> f64 {
    let x = f64::from(2 * m - 1).powf(f64::from(len) * d);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Uniform-count model: exactly `floor((2m-1)^{len d})` distinct cyclically
/// reduced words, uniform over all such sets.
pub fn sample_uniform_count(m: u32, len: u32, d: f64, seed: u64) -> Result<Presentation> {
    let params = ModelParams::density(m, len, d, seed);
    params.validate()?;
    let mut rng = stream_rng(seed, 0);
    sample_uniform_count_with(m, len, d, seed, &mut rng)
}

pub fn sample_uniform_count_with<R: Rng + ?Sized>(
    m: u32,
    len: u32,
    d: f64,
    seed: u64,
    rng: &mut R,
) -> Result<Presentation> {
    ModelParams::density(m, len, d, seed).validate()?;
    let universe = count_cyclically_reduced(m, len);
    let k = uniform_relator_count(m, len, d);
    let k_exact = BigUint::from(k as u128);
    if k_exact > universe || k >= 1.8e19 {
        return Err(Error::CountExceedsUniverse {
            requested: format!("{k}"),
            universe: universe.to_string(),
        });
    }
    let relators = distinct_uniform_words(m, len, k as u64, &universe, rng)?;
    Ok(Presentation::from_sorted_unchecked(
        m,
        len,
        ModelTag::exact(ModelKind::UniformCount),
        d,
        seed,
        relators,
    ))
}

/// Samples `kind` with `params` on an explicit stream.
pub fn sample_with<R: Rng + ?Sized>(
    kind: ModelKind,
    params: &ModelParams,
    rng: &mut R,
) -> Result<Presentation> {
    match kind {
        ModelKind::Binomial => sample_binomial_with(params, rng),
        ModelKind::Positive => sample_positive_with(params, rng),
        ModelKind::UniformCount => match params.parameter {
            Parameter::Density(d) => {
                sample_uniform_count_with(params.m, params.len, d, params.seed, rng)
            }
            Parameter::Probability(_) => Err(Error::Domain(
                "the uniform-count model is parametrized by a density".into(),
            )),
        },
        ModelKind::Given => Err(Error::Domain("cannot sample a given presentation".into())),
    }
}

/// Samples `kind` with `params` on the seed's default stream.
pub fn sample(kind: ModelKind, params: &ModelParams) -> Result<Presentation> {
    let mut rng = stream_rng(params.seed, 0);
    sample_with(kind, params, &mut rng)
}
