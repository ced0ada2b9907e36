use serde::Serialize;

use super::ledger::{BitLedger, LedgerSnapshot};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuctionOutcome {
    /// Winning agents in increasing index order.
    pub winners: Vec<usize>,
    /// Common price paid by every winner.
    pub payment: u64,
    pub rounds: usize,
    pub ledger: LedgerSnapshot,
}

/// Second-price auction used inside each round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubAuction {
    /// Every participant sends its k-bit value.
    SealedBid,
    /// Unit price ticks from 0; one stay/quit bit per active agent per tick.
    English,
}

impl SubAuction {
    pub fn run(
        self,
        agents: &[usize],
        values: &[u64],
        k: u32,
        ledger: &mut BitLedger,
    ) -> Result<(usize, u64)> {
        match self {
            SubAuction::SealedBid => sealed_bid_sim(agents, values, k, ledger),
            SubAuction::English => english_sim(agents, values, ledger),
        }
    }
}

/// Highest (value, lowest index) agent and the largest value among the rest.
fn top_two(agents: &[usize], values: &[u64]) -> Result<(usize, u64)> {
    if agents.len() < 2 {
        return Err(Error::SecondPriceUndefined(agents.len()));
    }
    let mut best = agents[0];
    for &a in &agents[1..] {
        if values[a] > values[best] || (values[a] == values[best] && a < best) {
            best = a;
        }
    }
    let second = agents
        .iter()
        .filter(|&&a| a != best)
        .map(|&a| values[a])
        .max()
        .unwrap_or(0);
    Ok((best, second))
}

/// Sealed-bid second-price auction; charges `k` bits to every participant.
pub fn sealed_bid_sim(
    agents: &[usize],
    values: &[u64],
    k: u32,
    ledger: &mut BitLedger,
) -> Result<(usize, u64)> {
    let out = top_two(agents, values)?;
    for &a in agents {
        ledger.charge(a, k as u64, "bid");
    }
    Ok(out)
}

/// English auction with unit ticks. At tick `t` each active agent answers
/// stay or quit with one bit and quits when `t` reaches its value; the
/// auction stops once at most one agent remains, so it clears at the second
/// highest value `T` and an agent with value `v` pays `min(v, T) + 1` bits.
/// If everyone quits at `T`, the smallest index among them wins.
pub fn english_sim(
    agents: &[usize],
    values: &[u64],
    ledger: &mut BitLedger,
) -> Result<(usize, u64)> {
    let (winner, clearing) = top_two(agents, values)?;
    for &a in agents {
        ledger.charge(a, values[a].min(clearing) + 1, "tick");
    }
    Ok((winner, clearing))
}

/// Top `m` agents by (value, lowest index) among `agents`, returned in
/// increasing index order, and the `(m+1)`-highest value (0 if none).
pub fn vcg_on(agents: &[usize], values: &[u64], m: usize) -> Result<(Vec<usize>, u64)> {
    if m == 0 || m > agents.len() {
        return Err(Error::UnitsExceedAgents {
            units: m,
            agents: agents.len(),
        });
    }
    let mut order = agents.to_vec();
    let by_rank = |a: &usize, b: &usize| values[*b].cmp(&values[*a]).then(a.cmp(b));
    let price = if m < order.len() {
        order.select_nth_unstable_by(m, by_rank);
        values[order[m]]
    } else {
        0
    };
    let mut winners = order[..m].to_vec();
    winners.sort_unstable();
    Ok((winners, price))
}

/// Exact VCG outcome for `m` identical units with unit demand.
pub fn vcg_oracle(values: &[u64], m: usize) -> Result<(Vec<usize>, u64)> {
    let all: Vec<usize> = (0..values.len()).collect();
    vcg_on(&all, values, m)
}

/// Whether an outcome realises VCG: same price, and the winners hold the top
/// `m` values. Under ties the identity of tied winners is arbitrary; with
/// distinct values this is winner-set equality.
pub fn matches_vcg(values: &[u64], winners: &[usize], price: u64) -> bool {
    let Ok((vw, vp)) = vcg_oracle(values, winners.len().max(1)) else {
        return false;
    };
    if winners.is_empty() || vp != price {
        return false;
    }
    let mut got: Vec<u64> = winners.iter().map(|&a| values[a]).collect();
    let mut want: Vec<u64> = vw.iter().map(|&a| values[a]).collect();
    got.sort_unstable();
    want.sort_unstable();
    let mut distinct = winners.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct.len() == winners.len() && got == want
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal tick-by-tick English auction.
    fn english_ticks(agents: &[usize], values: &[u64]) -> (usize, u64, u64) {
        let mut active: Vec<usize> = agents.to_vec();
        let mut bits = 0;
        let mut t = 0u64;
        loop {
            bits += active.len() as u64;
            let stay: Vec<usize> = active.iter().copied().filter(|&a| values[a] > t).collect();
            if stay.len() <= 1 {
                let w = stay
                    .first()
                    .copied()
                    .unwrap_or_else(|| *active.iter().min().unwrap());
                return (w, t, bits);
            }
            active = stay;
            t += 1;
        }
    }

    #[test]
    fn sealed_examples() {
        let mut l = BitLedger::new(3);
        assert_eq!(sealed_bid_sim(&[0, 1], &[5, 3], 4, &mut l).unwrap(), (0, 3));
        assert_eq!(l.total(), 8);
        assert_eq!(
            sealed_bid_sim(&[0, 1, 2], &[8, 8, 3], 4, &mut l).unwrap(),
            (0, 8)
        );
        assert!(matches!(
            sealed_bid_sim(&[1], &[8, 8, 3], 4, &mut l),
            Err(Error::SecondPriceUndefined(1))
        ));
    }

    #[test]
    fn english_examples() {
        let mut l = BitLedger::new(2);
        assert_eq!(english_sim(&[0, 1], &[5, 3], &mut l).unwrap(), (0, 3));
        assert_eq!(l.total(), 8);
        let mut l = BitLedger::new(2);
        assert_eq!(english_sim(&[0, 1], &[0, 1], &mut l).unwrap(), (1, 0));
        assert_eq!(l.total(), 2);
    }

    #[test]
    fn english_matches_ticks_and_sealed() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let n = rng.random_range(2..8);
            let values: Vec<u64> = (0..n).map(|_| rng.random_range(0..8)).collect();
            let agents: Vec<usize> = (0..n).collect();
            let mut l = BitLedger::new(n);
            let e = english_sim(&agents, &values, &mut l).unwrap();
            let (w, p, bits) = english_ticks(&agents, &values);
            assert_eq!(e, (w, p));
            assert_eq!(l.total(), bits);
            assert!(bits <= n as u64 * 8);
            let mut l2 = BitLedger::new(n);
            assert_eq!(sealed_bid_sim(&agents, &values, 3, &mut l2).unwrap(), e);
        }
    }

    #[test]
    fn vcg_examples() {
        assert_eq!(vcg_oracle(&[1, 3, 0, 2], 2).unwrap(), (vec![1, 3], 1));
        assert_eq!(vcg_oracle(&[5, 3], 1).unwrap(), (vec![0], 3));
        assert_eq!(vcg_oracle(&[5, 3], 2).unwrap(), (vec![0, 1], 0));
        assert!(vcg_oracle(&[5, 3], 3).is_err());
        assert!(matches_vcg(&[4, 4, 1], &[1], 4));
        assert!(!matches_vcg(&[4, 4, 1], &[2], 4));
        assert!(!matches_vcg(&[4, 3, 1], &[0], 1));
    }
}
