//! Plurality voting with single-minded voters, exact and on a sample.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::ceil_tol;
use crate::{Error, Result};

/// Each voter approves exactly one of `m` candidates, numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleMindedProfile {
    m: usize,
    choice: Vec<usize>,
}

impl SingleMindedProfile {
    pub fn new(m: usize, choice: Vec<usize>) -> Result<Self> {
        if choice.is_empty() || m == 0 {
            return Err(Error::InvalidInstance(
                "need at least one voter and candidate".into(),
            ));
        }
        if let Some(&c) = choice.iter().find(|&&c| c == 0 || c > m) {
            return Err(Error::InvalidInstance(format!("choice {c} not in 1..={m}")));
        }
        Ok(Self { m, choice })
    }

    pub fn uniform(n: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(m, (0..n).map(|_| rng.random_range(1..=m)).collect())
    }

    /// Candidate 1 gets `floor(n/2) + 1` votes and candidate 2 the rest.
    /// The first voters alternate between the two.
    pub fn near_tie(n: usize, m: usize) -> Result<Self> {
        if n < 3 || m < 2 {
            return Err(Error::InvalidParameter(
                "near tie needs n >= 3, m >= 2".into(),
            ));
        }
        let trailing = n - (n / 2 + 1);
        Self::new(
            m,
            (0..n)
                .map(|i| if i < 2 * trailing { 1 + i % 2 } else { 1 })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.choice.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn choices(&self) -> &[usize] {
        &self.choice
    }

    /// Votes per candidate, index 0 for candidate 1.
    pub fn counts(&self) -> Vec<usize> {
        tally(self.m, self.choice.iter().copied())
    }
}

fn tally(m: usize, votes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut counts = vec![0; m];
    for v in votes {
        counts[v - 1] += 1;
    }
    counts
}

/// Most-voted candidate; the smallest index wins ties.
fn winner(counts: &[usize]) -> usize {
    let mut best = 0;
    for j in 1..counts.len() {
        if counts[j] > counts[best] {
            best = j;
        }
    }
    best + 1
}

pub fn plurality(profile: &SingleMindedProfile) -> usize {
    winner(&profile.counts())
}

/// Voters whose choice is `candidate`.
pub fn social_welfare(profile: &SingleMindedProfile, candidate: usize) -> Result<usize> {
    if candidate == 0 || candidate > profile.m {
        return Err(Error::InvalidParameter(format!(
            "candidate {candidate} not in 1..={}",
            profile.m
        )));
    }
    Ok(profile.choice.iter().filter(|&&c| c == candidate).count())
}

/// `ceil(2 m^2 ln(2m / delta) / epsilon^2)`.
pub fn plurality_sample_size(m: usize, epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "m = {m}, epsilon = {epsilon}, delta = {delta}"
        )));
    }
    let m = m as f64;
    Ok(ceil_tol(
        2.0 * m * m * (2.0 * m / delta).ln() / (epsilon * epsilon),
    ))
}

/// Plurality of `c` voters drawn with replacement, or without it (then
/// `c <= n` is required).
pub fn plurality_of_sample(
    profile: &SingleMindedProfile,
    c: usize,
    with_replacement: bool,
    seed: u64,
) -> Result<usize> {
    let n = profile.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = if with_replacement {
        tally(
            profile.m,
            (0..c).map(|_| profile.choice[rng.random_range(0..n)]),
        )
    } else {
        if c > n {
            return Err(Error::SampleExceedsPopulation {
                sample: c,
                population: n,
            });
        }
        tally(
            profile.m,
            index::sample(&mut rng, n, c)
                .into_iter()
                .map(|i| profile.choice[i]),
        )
    };
    Ok(winner(&counts))
}

/// Plurality of a with-replacement sample sized by [`plurality_sample_size`].
pub fn approx_plurality(
    profile: &SingleMindedProfile,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<usize> {
    let c = plurality_sample_size(profile.m, epsilon, delta)?;
    plurality_of_sample(profile, c, true, seed)
}
