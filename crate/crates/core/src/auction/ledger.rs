use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BitEvent {
    pub round: usize,
    pub agent: usize,
    pub bits: u64,
    pub tag: &'static str,
}

/// Append-only count of bits sent from agents to the auctioneer.
/// Broadcasts from the auctioneer are free and never recorded.
#[derive(Clone, Debug)]
pub struct BitLedger {
    per_agent: Vec<u64>,
    per_round: Vec<u64>,
    per_tag: BTreeMap<&'static str, u64>,
    total: u64,
    log: Option<Vec<BitEvent>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerSnapshot {
    pub total_bits: u64,
    pub per_round: Vec<u64>,
}

impl BitLedger {
    pub fn new(n: usize) -> Self {
        Self {
            per_agent: vec![0; n],
            per_round: Vec::new(),
            per_tag: BTreeMap::new(),
            total: 0,
            log: None,
        }
    }

    /// A ledger that also keeps every charge as an event.
    pub fn with_log(n: usize) -> Self {
        Self {
            log: Some(Vec::new()),
            ..Self::new(n)
        }
    }

    pub fn begin_round(&mut self) {
        self.per_round.push(0);
    }

    /// Index of the current round, opening round 0 if none is open.
    pub fn round(&mut self) -> usize {
        if self.per_round.is_empty() {
            self.per_round.push(0);
        }
        self.per_round.len() - 1
    }

    pub fn charge(&mut self, agent: usize, bits: u64, tag: &'static str) {
        let round = self.round();
        self.per_agent[agent] += bits;
        self.per_round[round] += bits;
        *self.per_tag.entry(tag).or_insert(0) += bits;
        self.total += bits;
        if let Some(log) = &mut self.log {
            log.push(BitEvent {
                round,
                agent,
                bits,
                tag,
            });
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n(&self) -> usize {
        self.per_agent.len()
    }

    pub fn agent_bits(&self, agent: usize) -> u64 {
        self.per_agent[agent]
    }

    pub fn per_agent(&self) -> &[u64] {
        &self.per_agent
    }

    pub fn per_round(&self) -> &[u64] {
        &self.per_round
    }

    pub fn tag_total(&self, tag: &str) -> u64 {
        self.per_tag.get(tag).copied().unwrap_or(0)
    }

    pub fn events(&self) -> Option<&[BitEvent]> {
        self.log.as_deref()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            total_bits: self.total,
            per_round: self.per_round.clone(),
        }
    }

    /// One JSON object per event: `{"round":..,"agent":..,"bits":..,"tag":..}`.
    /// Writes nothing if the ledger was built without a log.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in self.log.iter().flatten() {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_agree() {
        let mut l = BitLedger::with_log(3);
        l.charge(0, 2, "bid");
        l.begin_round();
        l.charge(2, 1, "response");
        l.charge(0, 1, "response");
        assert_eq!(l.total(), 4);
        assert_eq!(l.per_round(), &[2, 2]);
        assert_eq!(l.per_agent(), &[3, 0, 1]);
        assert_eq!(l.tag_total("response"), 2);
        let mut buf = Vec::new();
        l.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            r#"{"round":1,"agent":2,"bits":1,"tag":"response"}"#
        );
    }
}
