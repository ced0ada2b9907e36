use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{AuctionOutcome, SubAuction};
use super::ledger::BitLedger;
use super::profile::ValuationProfile;
use crate::experiment::{ceil_tol, run_trials, Summary};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundState {
    pub round_index: usize,
    /// Active agents after the round's update, in increasing order.
    pub active: Vec<usize>,
    pub last_winner: usize,
    pub announced_price: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AscendingConfig {
    pub sub: SubAuction,
    /// Sample size per round.
    pub c: usize,
    /// Use each announced price as a floor for later ones.
    pub reserve: bool,
}

/// `max(2, ceil(1 / epsilon^2))`.
pub fn single_item_sample_size(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    Ok(ceil_tol(1.0 / (epsilon * epsilon)).max(2))
}

impl AscendingConfig {
    pub fn new(sub: SubAuction, c: usize) -> Result<Self> {
        if c < 2 {
            return Err(Error::SampleTooSmall(c));
        }
        Ok(Self {
            sub,
            c,
            reserve: false,
        })
    }

    pub fn from_epsilon(sub: SubAuction, epsilon: f64) -> Result<Self> {
        Self::new(sub, single_item_sample_size(epsilon)?)
    }

    pub fn with_reserve(mut self, reserve: bool) -> Self {
        self.reserve = reserve;
        self
    }
}

/// One round's sub-auction result.
pub(crate) struct Draw {
    pub winner: usize,
    pub price: u64,
}

/// State of one item's ascending auction, advanced a round at a time so that
/// several items can share rounds.
pub(crate) struct ItemAuction<'a> {
    values: &'a [u64],
    k: u32,
    cfg: AscendingConfig,
    active: Vec<usize>,
    in_sample: Vec<bool>,
    floor: u64,
    result: Option<(usize, u64)>,
    pub rounds: usize,
    pub trace: Vec<RoundState>,
}

impl<'a> ItemAuction<'a> {
    pub fn new(values: &'a [u64], k: u32, cfg: AscendingConfig) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SecondPriceUndefined(values.len()));
        }
        if cfg.c < 2 {
            return Err(Error::SampleTooSmall(cfg.c));
        }
        Ok(Self {
            values,
            k,
            cfg,
            active: (0..values.len()).collect(),
            in_sample: vec![false; values.len()],
            floor: 0,
            result: None,
            rounds: 0,
            trace: Vec::new(),
        })
    }

    pub fn result(&self) -> Option<(usize, u64)> {
        self.result
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn value(&self, agent: usize) -> u64 {
        self.values[agent]
    }

    /// Another sampled round is needed (more than `c` agents remain).
    pub fn wants_sample(&self) -> bool {
        self.result.is_none() && self.active.len() > self.cfg.c
    }

    fn announce(&mut self, price: u64) -> u64 {
        if self.cfg.reserve {
            self.floor = self.floor.max(price);
            self.floor
        } else {
            price
        }
    }

    /// Samples `c` active agents and runs the sub-auction on them.
    pub fn draw(&mut self, rng: &mut ChaCha8Rng, ledger: &mut BitLedger) -> Result<Draw> {
        let sample: Vec<usize> = index::sample(rng, self.active.len(), self.cfg.c)
            .into_iter()
            .map(|j| self.active[j])
            .collect();
        for &a in &sample {
            self.in_sample[a] = true;
        }
        let (winner, price) = self.cfg.sub.run(&sample, self.values, self.k, ledger)?;
        let price = self.announce(price);
        Ok(Draw { winner, price })
    }

    pub fn is_sampled(&self, agent: usize) -> bool {
        self.in_sample[agent]
    }

    /// `N := {i in N \ S : v_i > p} ∪ {w}`.
    pub fn apply(&mut self, draw: &Draw) {
        let values = self.values;
        let in_sample = &mut self.in_sample;
        self.active.retain(|&a| {
            let sampled = std::mem::replace(&mut in_sample[a], false);
            a == draw.winner || (!sampled && values[a] > draw.price)
        });
        self.rounds += 1;
        self.trace.push(RoundState {
            round_index: self.rounds - 1,
            active: self.active.clone(),
            last_winner: draw.winner,
            announced_price: draw.price,
        });
        if self.active.len() == 1 {
            self.result = Some((draw.winner, draw.price));
        }
    }

    /// Final sub-auction on the remaining agents.
    pub fn finish(&mut self, ledger: &mut BitLedger) -> Result<(usize, u64)> {
        if let Some(r) = self.result {
            return Ok(r);
        }
        let (winner, price) = self
            .cfg
            .sub
            .run(&self.active, self.values, self.k, ledger)?;
        let price = self.announce(price);
        self.rounds += 1;
        self.trace.push(RoundState {
            round_index: self.rounds - 1,
            active: self.active.clone(),
            last_winner: winner,
            announced_price: price,
        });
        self.result = Some((winner, price));
        Ok((winner, price))
    }
}

/// Adaptive ascending single-item auction on item 0 of `profile`.
///
/// While more than `c` agents are active, a sample of `c` runs the
/// sub-auction, its price is announced and every other active agent answers
/// stay (value above the price) or quit with one bit.
pub fn ascending_auction(
    profile: &ValuationProfile,
    cfg: &AscendingConfig,
    seed: u64,
    ledger: &mut BitLedger,
) -> Result<(AuctionOutcome, Vec<RoundState>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut item = ItemAuction::new(profile.item(0), profile.k(), *cfg)?;
    while item.wants_sample() {
        ledger.begin_round();
        let draw = item.draw(&mut rng, ledger)?;
        for &a in item.active() {
            if !item.is_sampled(a) {
                ledger.charge(a, 1, "response");
            }
        }
        item.apply(&draw);
    }
    if item.result().is_none() {
        ledger.begin_round();
    }
    let (w, p) = item.finish(ledger)?;
    Ok((
        AuctionOutcome {
            winners: vec![w],
            payment: p,
            rounds: item.rounds,
            ledger: ledger.snapshot(),
        },
        item.trace,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionStats {
    pub mean: f64,
    pub variance: f64,
    /// Surviving fraction of each trial.
    pub samples: Vec<f64>,
}

/// Fraction of agents still active after one round with sample size `c`, on
/// fresh distinct-valued profiles of size `n`.
pub fn inclusion_rate_experiment(
    n: usize,
    c: usize,
    trials: usize,
    seed: u64,
) -> Result<InclusionStats> {
    if c < 2 || c > n {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    let samples = run_trials(trials, seed, |_, s| -> Result<f64> {
        let profile = ValuationProfile::distinct(n, s)?;
        let cfg = AscendingConfig::new(SubAuction::SealedBid, c)?;
        let mut item = ItemAuction::new(profile.item(0), profile.k(), cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5EED);
        let mut ledger = BitLedger::new(n);
        let draw = item.draw(&mut rng, &mut ledger)?;
        item.apply(&draw);
        Ok(item.active().len() as f64 / n as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let s = Summary::of(&samples);
    Ok(InclusionStats {
        mean: s.mean,
        variance: s.variance,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::vcg_oracle;

    #[test]
    fn n_equal_c_is_one_sub_auction() {
        let p = ValuationProfile::single(4, vec![3, 9, 1, 7]).unwrap();
        let cfg = AscendingConfig::new(SubAuction::SealedBid, 4).unwrap();
        let mut l = BitLedger::new(4);
        let (out, trace) = ascending_auction(&p, &cfg, 1, &mut l).unwrap();
        assert_eq!(out.winners, vec![1]);
        assert_eq!(out.payment, 7);
        assert_eq!(out.rounds, 1);
        assert_eq!(trace.len(), 1);
        assert_eq!(l.total(), 16);
    }

    #[test]
    fn small_sample_rejected() {
        assert!(matches!(
            AscendingConfig::new(SubAuction::English, 1),
            Err(Error::SampleTooSmall(1))
        ));
        assert_eq!(single_item_sample_size(0.1).unwrap(), 100);
        assert_eq!(single_item_sample_size(2.0).unwrap(), 2);
    }

    #[test]
    fn matches_vcg_and_keeps_winner() {
        for seed in 0..300 {
            let p = ValuationProfile::uniform(200, 1, 6, seed).unwrap();
            for sub in [SubAuction::SealedBid, SubAuction::English] {
                for reserve in [false, true] {
                    let cfg = AscendingConfig::new(sub, 5).unwrap().with_reserve(reserve);
                    let mut l = BitLedger::new(200);
                    let (out, trace) = ascending_auction(&p, &cfg, seed, &mut l).unwrap();
                    let (_, price) = vcg_oracle(p.item(0), 1).unwrap();
                    assert_eq!(out.payment, price);
                    let top = *p.item(0).iter().max().unwrap();
                    assert_eq!(p.value(out.winners[0], 0), top);
                    for s in &trace {
                        assert!(s.active.contains(&s.last_winner));
                    }
                    if reserve {
                        assert!(trace
                            .windows(2)
                            .all(|w| w[0].announced_price <= w[1].announced_price));
                    }
                    assert!(l.total() >= 200);
                }
            }
        }
    }

    #[test]
    fn full_sample_inclusion() {
        let s = inclusion_rate_experiment(50, 50, 5, 3).unwrap();
        assert!(s.samples.iter().all(|&x| x == 1.0 / 50.0));
    }
}
