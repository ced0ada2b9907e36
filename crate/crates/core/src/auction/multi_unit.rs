use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{vcg_on, AuctionOutcome};
use super::ledger::BitLedger;
use super::profile::ValuationProfile;
use crate::experiment::ceil_tol;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiUnitConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Overrides the per-level sample size.
    pub sample_size: Option<usize>,
    /// Draw estimator samples with replacement (the default).
    pub with_replacement: bool,
    /// Overrides the active-set size at which values are elicited directly.
    pub direct_threshold: Option<usize>,
    /// Re-estimations allowed before falling back to direct elicitation.
    pub max_retries: usize,
}

impl MultiUnitConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        Ok(Self {
            epsilon,
            delta,
            sample_size: None,
            with_replacement: true,
            direct_threshold: None,
            max_retries: 64,
        })
    }

    /// `ceil(2 ln(4k / delta) / epsilon^2)` unless overridden.
    pub fn per_level_sample_size(&self, k: u32) -> usize {
        self.sample_size.unwrap_or_else(|| {
            ceil_tol(2.0 * (4.0 * k as f64 / self.delta).ln() / (self.epsilon * self.epsilon))
                .max(1)
        })
    }

    /// `max(16, 2c)` unless overridden.
    pub fn direct_threshold(&self, k: u32) -> usize {
        self.direct_threshold
            .unwrap_or_else(|| 16.max(2 * self.per_level_sample_size(k)))
    }
}

/// One bit: whether the agent's value is at most `threshold`.
pub fn threshold_query(
    agent: usize,
    threshold: u64,
    values: &[u64],
    ledger: &mut BitLedger,
) -> bool {
    ledger.charge(agent, 1, "estimate");
    values[agent] <= threshold
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorState {
    /// Bits of the high estimate, most significant first.
    pub prefix_high: Vec<bool>,
    pub prefix_low: Vec<bool>,
    pub gamma: f64,
    pub epsilon: f64,
    pub c: usize,
    pub separated: bool,
    pub queries: u64,
}

fn prefix_value(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
}

impl EstimatorState {
    pub fn p_high(&self) -> u64 {
        prefix_value(&self.prefix_high)
    }

    pub fn p_low(&self) -> u64 {
        prefix_value(&self.prefix_low)
    }
}

struct Sampler<'a> {
    active: &'a [usize],
    c: usize,
    with_replacement: bool,
}

impl Sampler<'_> {
    /// Fraction of `c` sampled agents whose value exceeds `threshold`.
    fn above_fraction(
        &self,
        threshold: u64,
        values: &[u64],
        rng: &mut ChaCha8Rng,
        ledger: &mut BitLedger,
    ) -> f64 {
        let mut above = 0usize;
        let mut asked = 0usize;
        let mut ask = |a: usize| {
            asked += 1;
            if !threshold_query(a, threshold, values, ledger) {
                above += 1;
            }
        };
        if self.with_replacement {
            for _ in 0..self.c {
                ask(self.active[rng.random_range(0..self.active.len())]);
            }
        } else {
            let c = self.c.min(self.active.len());
            for j in index::sample(rng, self.active.len(), c) {
                ask(self.active[j]);
            }
        }
        above as f64 / asked as f64
    }
}

/// Threshold probed below a `level`-bit prefix: the prefix, then 0, then ones.
fn level_threshold(prefix: &[bool], k: u32) -> u64 {
    let level = prefix.len() as u32;
    let rest = k - level - 1;
    (prefix_value(prefix) << (rest + 1)) | ((1u64 << rest) - 1)
}

/// Stochastic binary search for the `(m+1)`-highest value among `active`.
///
/// At each of `k` levels a sample estimates the fraction `X` of agents above
/// the probe threshold, against the target `gamma = (m + 1/2) / |active|`.
/// When `|X - gamma| >= epsilon/2` the next bit is 1 if `X > gamma`, else 0.
/// Otherwise the level is ambiguous: the high estimate takes 1, the low one
/// 0, and from then on each estimate samples on its own.
pub fn estimate_bounds(
    active: &[usize],
    values: &[u64],
    k: u32,
    m: usize,
    cfg: &MultiUnitConfig,
    rng: &mut ChaCha8Rng,
    ledger: &mut BitLedger,
) -> Result<EstimatorState> {
    if m == 0 || m >= active.len() {
        return Err(Error::UnitsExceedAgents {
            units: m,
            agents: active.len(),
        });
    }
    let c = cfg.per_level_sample_size(k);
    let sampler = Sampler {
        active,
        c,
        with_replacement: cfg.with_replacement,
    };
    let gamma = (m as f64 + 0.5) / active.len() as f64;
    let half = cfg.epsilon / 2.0;
    let before = ledger.tag_total("estimate");
    let mut st = EstimatorState {
        prefix_high: Vec::with_capacity(k as usize),
        prefix_low: Vec::with_capacity(k as usize),
        gamma,
        epsilon: cfg.epsilon,
        c,
        separated: false,
        queries: 0,
    };
    // None: confident; Some: ambiguous.
    let decide = |x: f64| -> Option<bool> {
        if (x - gamma).abs() < half {
            None
        } else {
            Some(x > gamma)
        }
    };
    for _ in 0..k {
        if !st.separated {
            let t = level_threshold(&st.prefix_high, k);
            let x = sampler.above_fraction(t, values, rng, ledger);
            match decide(x) {
                Some(b) => {
                    st.prefix_high.push(b);
                    st.prefix_low.push(b);
                }
                None => {
                    st.prefix_high.push(true);
                    st.prefix_low.push(false);
                    st.separated = true;
                }
            }
        } else {
            let th = level_threshold(&st.prefix_high, k);
            let xh = sampler.above_fraction(th, values, rng, ledger);
            st.prefix_high.push(decide(xh).unwrap_or(true));
            let tl = level_threshold(&st.prefix_low, k);
            let xl = sampler.above_fraction(tl, values, rng, ledger);
            st.prefix_low.push(decide(xl).unwrap_or(false));
        }
    }
    st.queries = ledger.tag_total("estimate") - before;
    Ok(st)
}

/// The announced prices and the split of the active set they induce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundPrices {
    pub p_h: u64,
    pub p_l: u64,
    pub winners_above: Vec<usize>,
    pub losers_below: Vec<usize>,
    pub middle: Vec<usize>,
}

/// Splits `active` by `v > p_h`, `v < p_l`, and the rest, charging one bit
/// to the first two groups and two bits to the middle.
pub fn partition(
    active: &[usize],
    values: &[u64],
    p_h: u64,
    p_l: u64,
    ledger: &mut BitLedger,
) -> RoundPrices {
    let mut out = RoundPrices {
        p_h,
        p_l,
        winners_above: Vec::new(),
        losers_below: Vec::new(),
        middle: Vec::new(),
    };
    for &a in active {
        let v = values[a];
        if v > p_h {
            ledger.charge(a, 1, "response");
            out.winners_above.push(a);
        } else if v < p_l {
            ledger.charge(a, 1, "response");
            out.losers_below.push(a);
        } else {
            ledger.charge(a, 2, "response");
            out.middle.push(a);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RoundSummary {
    pub p_h: u64,
    pub p_l: u64,
    pub above: usize,
    pub below: usize,
    pub middle: usize,
    pub congruous: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiUnitOutcome {
    pub outcome: AuctionOutcome,
    pub retries: usize,
    pub estimator_bits: u64,
    /// Response and direct elicitation bits.
    pub agent_bits: u64,
    /// Agents whose values were elicited directly at the end, if any.
    pub fallback_agents: Option<usize>,
    pub trace: Vec<RoundSummary>,
}

/// Two-price multi-unit auction for `m` units and unit-demand agents.
///
/// Each round estimates `p_h >= p_l` around the `(m+1)`-highest active value;
/// agents above `p_h` win, agents below `p_l` lose, and the auction recurses
/// on the rest. A split that cannot contain the price is discarded and
/// re-estimated. Once few agents remain, after `max_retries` failed splits,
/// or when a round makes no progress, the remaining values are elicited with
/// `k` bits each and the price computed exactly.
pub fn multi_unit_auction(
    profile: &ValuationProfile,
    m: usize,
    cfg: &MultiUnitConfig,
    seed: u64,
    ledger: &mut BitLedger,
) -> Result<MultiUnitOutcome> {
    let n = profile.n();
    let values = profile.item(0);
    let k = profile.k();
    if m == 0 || m > n {
        return Err(Error::UnitsExceedAgents {
            units: m,
            agents: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = cfg.direct_threshold(k);
    let mut winners: Vec<usize> = Vec::new();
    let mut active: Vec<usize> = (0..n).collect();
    let mut m_rem = m;
    let mut retries = 0usize;
    let mut stalled = false;
    let mut trace = Vec::new();
    let mut rounds = 0usize;
    let mut fallback_agents = None;
    let payment;
    if m == n {
        winners = active.clone();
        payment = 0;
    } else {
        loop {
            if m_rem == 0 || active.len() <= threshold || retries > cfg.max_retries || stalled {
                ledger.begin_round();
                rounds += 1;
                for &a in &active {
                    ledger.charge(a, k as u64, "elicit");
                }
                fallback_agents = Some(active.len());
                if m_rem == 0 {
                    payment = active.iter().map(|&a| values[a]).max().unwrap_or(0);
                } else {
                    let (w, p) = vcg_on(&active, values, m_rem)?;
                    winners.extend(w);
                    payment = p;
                }
                break;
            }
            ledger.begin_round();
            rounds += 1;
            let est = estimate_bounds(&active, values, k, m_rem, cfg, &mut rng, ledger)?;
            let split = partition(&active, values, est.p_high(), est.p_low(), ledger);
            let above = split.winners_above.len();
            let middle = split.middle.len();
            let congruous = above <= m_rem && above + middle > m_rem;
            trace.push(RoundSummary {
                p_h: split.p_h,
                p_l: split.p_l,
                above,
                below: split.losers_below.len(),
                middle,
                congruous,
            });
            if !congruous {
                retries += 1;
                continue;
            }
            if split.p_h == split.p_l {
                // Everyone in the middle holds the price value; ties go to
                // the smallest index.
                winners.extend(split.winners_above);
                winners.extend(split.middle.iter().take(m_rem - above));
                payment = split.p_h;
                break;
            }
            stalled = middle == active.len();
            winners.extend(split.winners_above);
            m_rem -= above;
            active = split.middle;
        }
    }
    winners.sort_unstable();
    let estimator_bits = ledger.tag_total("estimate");
    Ok(MultiUnitOutcome {
        outcome: AuctionOutcome {
            winners,
            payment,
            rounds,
            ledger: ledger.snapshot(),
        },
        retries,
        estimator_bits,
        agent_bits: ledger.total() - estimator_bits,
        fallback_agents,
        trace,
    })
}

/// Ascending auction for a small number of units: each round a sample of
/// `c` agents runs a sealed-bid `m`-unit auction, its `(m+1)`-highest value
/// is announced, and the sample winners plus every other agent above the
/// price stay active.
pub fn multi_unit_constant_m(
    profile: &ValuationProfile,
    m: usize,
    c: usize,
    seed: u64,
    ledger: &mut BitLedger,
) -> Result<AuctionOutcome> {
    let n = profile.n();
    let values = profile.item(0);
    let k = profile.k() as u64;
    if m == 0 || m > n {
        return Err(Error::UnitsExceedAgents {
            units: m,
            agents: n,
        });
    }
    if c <= m {
        return Err(Error::SampleCannotPriceUnits {
            units: m,
            sample: c,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut active: Vec<usize> = (0..n).collect();
    let mut in_sample = vec![false; n];
    let mut rounds = 0;
    let mut last: Option<(Vec<usize>, u64)> = None;
    while active.len() > c {
        ledger.begin_round();
        rounds += 1;
        let sample: Vec<usize> = index::sample(&mut rng, active.len(), c)
            .into_iter()
            .map(|j| active[j])
            .collect();
        for &a in &sample {
            in_sample[a] = true;
            ledger.charge(a, k, "bid");
        }
        let (sample_winners, price) = vcg_on(&sample, values, m)?;
        let mut keep = vec![false; n];
        for &w in &sample_winners {
            keep[w] = true;
        }
        for &a in &active {
            if !in_sample[a] {
                ledger.charge(a, 1, "response");
            }
        }
        active.retain(|&a| {
            let sampled = std::mem::replace(&mut in_sample[a], false);
            keep[a] || (!sampled && values[a] > price)
        });
        last = Some((sample_winners, price));
        if active.len() == m {
            break;
        }
    }
    let (winners, payment) = match last {
        Some((_, price)) if active.len() == m => (active.clone(), price),
        _ => {
            ledger.begin_round();
            rounds += 1;
            for &a in &active {
                ledger.charge(a, k, "bid");
            }
            vcg_on(&active, values, m)?
        }
    };
    let mut winners = winners;
    winners.sort_unstable();
    Ok(AuctionOutcome {
        winners,
        payment,
        rounds,
        ledger: ledger.snapshot(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{ascending_auction, matches_vcg, vcg_oracle, AscendingConfig, SubAuction};

    #[test]
    fn query_charges_one_bit() {
        let mut l = BitLedger::new(1);
        assert!(threshold_query(0, 5, &[5], &mut l));
        assert!(!threshold_query(0, 4, &[5], &mut l));
        assert_eq!(l.total(), 2);
    }

    #[test]
    fn probe_thresholds() {
        assert_eq!(level_threshold(&[], 3), 0b011);
        assert_eq!(level_threshold(&[true], 3), 0b101);
        assert_eq!(level_threshold(&[true, false], 3), 0b100);
    }

    #[test]
    fn sample_size_rule() {
        let cfg = MultiUnitConfig::new(0.1, 0.1).unwrap();
        let c = cfg.per_level_sample_size(16);
        assert_eq!(c, 1293);
        assert!(2 * 16 * c <= 41_400);
        let cfg = MultiUnitConfig::new(0.1, 0.05).unwrap();
        assert_eq!(cfg.per_level_sample_size(16), 1431);
    }

    #[test]
    fn tiny_estimate_converges() {
        let values = [1, 3, 0, 2];
        let mut cfg = MultiUnitConfig::new(0.05, 0.1).unwrap();
        cfg.sample_size = Some(20_000);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut l = BitLedger::new(4);
        let st = estimate_bounds(&[0, 1, 2, 3], &values, 2, 2, &cfg, &mut rng, &mut l).unwrap();
        assert_eq!((st.p_high(), st.p_low()), (1, 1));
        assert!(!st.separated);
        assert!(st.queries <= 2 * 20_000 * 2);
    }

    #[test]
    fn all_equal_values_always_ambiguous() {
        let values = [5u64; 10];
        let mut cfg = MultiUnitConfig::new(2.5, 0.1).unwrap();
        cfg.sample_size = Some(10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut l = BitLedger::new(10);
        let active: Vec<usize> = (0..10).collect();
        let st = estimate_bounds(&active, &values, 3, 4, &cfg, &mut rng, &mut l).unwrap();
        assert_eq!((st.p_high(), st.p_low()), (0b111, 0b000));
        assert!(st.separated);
    }

    #[test]
    fn estimate_rejects_too_many_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut l = BitLedger::new(2);
        let cfg = MultiUnitConfig::new(0.1, 0.1).unwrap();
        assert!(estimate_bounds(&[0, 1], &[1, 2], 2, 2, &cfg, &mut rng, &mut l).is_err());
    }

    #[test]
    fn small_example() {
        let p = ValuationProfile::single(2, vec![1, 3, 0, 2]).unwrap();
        let cfg = MultiUnitConfig::new(0.1, 0.1).unwrap();
        let mut l = BitLedger::new(4);
        let out = multi_unit_auction(&p, 2, &cfg, 0, &mut l).unwrap();
        assert_eq!(out.outcome.winners, vec![1, 3]);
        assert_eq!(out.outcome.payment, 1);
        assert!(multi_unit_auction(&p, 5, &cfg, 0, &mut l).is_err());
    }

    #[test]
    fn estimator_path_is_exact() {
        let mut cfg = MultiUnitConfig::new(0.3, 0.2).unwrap();
        cfg.direct_threshold = Some(4);
        for seed in 0..200 {
            let n = 300;
            let p = ValuationProfile::uniform(n, 1, 8, seed).unwrap();
            for m in [1, n / 4, n / 2] {
                let mut l = BitLedger::new(n);
                let out = multi_unit_auction(&p, m, &cfg, seed, &mut l).unwrap();
                let (w, price) = vcg_oracle(p.item(0), m).unwrap();
                assert_eq!(out.outcome.payment, price, "seed {seed} m {m}");
                assert_eq!(out.outcome.winners, w, "seed {seed} m {m}");
            }
        }
    }

    #[test]
    fn constant_m_matches_single_item() {
        for seed in 0..40 {
            let p = ValuationProfile::uniform(400, 1, 8, seed).unwrap();
            let mut a = BitLedger::new(400);
            let mut b = BitLedger::new(400);
            let cfg = AscendingConfig::new(SubAuction::SealedBid, 9).unwrap();
            let (single, _) = ascending_auction(&p, &cfg, seed, &mut a).unwrap();
            let multi = multi_unit_constant_m(&p, 1, 9, seed, &mut b).unwrap();
            assert_eq!(single.winners, multi.winners);
            assert_eq!(single.payment, multi.payment);
            assert_eq!(a.per_agent(), b.per_agent());
        }
    }

    #[test]
    fn constant_m_is_vcg() {
        for seed in 0..100 {
            let p = ValuationProfile::uniform(1000, 1, 8, seed).unwrap();
            let mut l = BitLedger::new(1000);
            let out = multi_unit_constant_m(&p, 3, 20, seed, &mut l).unwrap();
            assert!(matches_vcg(p.item(0), &out.winners, out.payment));
        }
        let p = ValuationProfile::uniform(10, 1, 8, 0).unwrap();
        let mut l = BitLedger::new(10);
        assert!(matches!(
            multi_unit_constant_m(&p, 3, 3, 0, &mut l),
            Err(Error::SampleCannotPriceUnits { .. })
        ));
    }
}
