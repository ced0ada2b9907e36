use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ascending::{AscendingConfig, ItemAuction};
use super::kernel::AuctionOutcome;
use super::ledger::{BitLedger, LedgerSnapshot};
use super::profile::ValuationProfile;
use crate::experiment::ceil_tol;
use crate::{Error, Result};

/// `max(2, ceil(2 m^2 / delta))`.
pub fn multi_item_sample_size(m: usize, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta.is_finite()) || m == 0 {
        return Err(Error::InvalidParameter(format!("m = {m}, delta = {delta}")));
    }
    Ok(ceil_tol(2.0 * (m * m) as f64 / delta).max(2))
}

/// Response traffic of one global round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EncodingRound {
    pub round: usize,
    /// Agents that had to answer in at least one auction.
    pub messages: usize,
    /// Of those, agents that quit every auction they were asked about.
    pub withdraw_all: usize,
    /// Bits of the stay/quit messages, excluding sub-auction bids.
    pub response_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiItemOutcome {
    pub items: Vec<AuctionOutcome>,
    /// Global rounds until the last item resolved.
    pub rounds: usize,
    pub encoding: Vec<EncodingRound>,
    pub ledger: LedgerSnapshot,
}

/// One ascending auction per item, all advancing one round per global round.
///
/// An agent asked in `m_i` auctions this round sends a single bit when it
/// quits all of them and otherwise an `m_i`-bit stay vector. Item `j` draws
/// its samples from stream `j` of the seed, so item 0 reproduces the single
/// item auction.
pub fn simultaneous_additive(
    profile: &ValuationProfile,
    cfg: &AscendingConfig,
    seed: u64,
    ledger: &mut BitLedger,
) -> Result<MultiItemOutcome> {
    let n = profile.n();
    let m = profile.m();
    let mut items = (0..m)
        .map(|j| ItemAuction::new(profile.item(j), profile.k(), *cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut rngs: Vec<ChaCha8Rng> = (0..m)
        .map(|j| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(j as u64);
            r
        })
        .collect();
    let mut asked = vec![0u32; n];
    let mut stays = vec![false; n];
    let mut encoding = Vec::new();
    let mut rounds = 0;
    loop {
        let pending: Vec<usize> = (0..m).filter(|&j| items[j].result().is_none()).collect();
        if pending.is_empty() {
            break;
        }
        ledger.begin_round();
        rounds += 1;
        let mut draws = Vec::new();
        for &j in &pending {
            if items[j].wants_sample() {
                draws.push((j, items[j].draw(&mut rngs[j], ledger)?));
            } else {
                items[j].finish(ledger)?;
            }
        }
        if draws.is_empty() {
            continue;
        }
        for (j, draw) in &draws {
            let item = &items[*j];
            for &a in item.active() {
                if !item.is_sampled(a) {
                    asked[a] += 1;
                    stays[a] |= item.value(a) > draw.price;
                }
            }
        }
        let mut enc = EncodingRound {
            round: rounds - 1,
            messages: 0,
            withdraw_all: 0,
            response_bits: 0,
        };
        for a in 0..n {
            if asked[a] == 0 {
                continue;
            }
            let bits = if stays[a] { asked[a] as u64 } else { 1 };
            ledger.charge(a, bits, "response");
            enc.messages += 1;
            enc.withdraw_all += usize::from(!stays[a]);
            enc.response_bits += bits;
            asked[a] = 0;
            stays[a] = false;
        }
        encoding.push(enc);
        for (j, draw) in &draws {
            items[*j].apply(draw);
        }
    }
    let snapshot = ledger.snapshot();
    let items = items
        .iter()
        .map(|it| {
            let (w, p) = it.result().expect("every item resolves");
            AuctionOutcome {
                winners: vec![w],
                payment: p,
                rounds: it.rounds,
                ledger: snapshot.clone(),
            }
        })
        .collect();
    Ok(MultiItemOutcome {
        items,
        rounds,
        encoding,
        ledger: snapshot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{ascending_auction, matches_vcg, SubAuction};

    #[test]
    fn sample_size_rule() {
        assert_eq!(multi_item_sample_size(3, 0.1).unwrap(), 180);
        assert_eq!(multi_item_sample_size(1, 1.0).unwrap(), 2);
    }

    #[test]
    fn one_item_matches_single_auction() {
        for seed in 0..50 {
            let p = ValuationProfile::uniform(500, 1, 8, seed).unwrap();
            let cfg = AscendingConfig::new(SubAuction::SealedBid, 7).unwrap();
            let mut a = BitLedger::new(500);
            let mut b = BitLedger::new(500);
            let (single, _) = ascending_auction(&p, &cfg, seed, &mut a).unwrap();
            let multi = simultaneous_additive(&p, &cfg, seed, &mut b).unwrap();
            assert_eq!(a.per_agent(), b.per_agent());
            assert_eq!(a.per_round(), b.per_round());
            assert_eq!(multi.items[0].winners, single.winners);
            assert_eq!(multi.items[0].payment, single.payment);
        }
    }

    #[test]
    fn every_item_is_vcg() {
        for seed in 0..100 {
            let p = ValuationProfile::uniform(300, 3, 5, seed).unwrap();
            let cfg = AscendingConfig::new(SubAuction::English, 6).unwrap();
            let mut l = BitLedger::new(300);
            let out = simultaneous_additive(&p, &cfg, seed, &mut l).unwrap();
            for (j, item) in out.items.iter().enumerate() {
                assert!(matches_vcg(p.item(j), &item.winners, item.payment));
            }
            for e in &out.encoding {
                assert!(e.response_bits >= e.messages as u64);
                assert!(e.response_bits <= 3 * e.messages as u64);
            }
        }
    }
}
