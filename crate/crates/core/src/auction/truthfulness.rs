use serde::Serialize;

use super::profile::ValuationProfile;
use crate::{Error, Result};

/// Per-item `(winners, price)` as produced by a mechanism run.
pub type ItemResults = Vec<(Vec<usize>, u64)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Deviation {
    pub seed: u64,
    pub agent: usize,
    pub report: Vec<u64>,
    pub truthful_utility: i64,
    pub deviation_utility: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    /// Mechanism runs compared, truthful baselines included.
    pub runs: usize,
    pub deviations_tested: usize,
    pub profitable: Vec<Deviation>,
}

impl ProbeReport {
    pub fn merge(&mut self, other: ProbeReport) {
        self.runs += other.runs;
        self.deviations_tested += other.deviations_tested;
        self.profitable.extend(other.profitable);
    }
}

/// Additive quasi-linear utility of `agent` under its true values.
pub fn utility(profile: &ValuationProfile, agent: usize, results: &ItemResults) -> i64 {
    results
        .iter()
        .enumerate()
        .filter(|(_, (w, _))| w.contains(&agent))
        .map(|(j, (_, p))| profile.value(agent, j) as i64 - *p as i64)
        .sum()
}

/// Every report vector over all items for one agent, in lexicographic order.
fn all_reports(m: usize, k: u32) -> impl Iterator<Item = Vec<u64>> {
    let base = 1u64 << k;
    let total = base.pow(m as u32);
    (0..total).map(move |mut code| {
        let mut r = vec![0; m];
        for slot in r.iter_mut() {
            *slot = code % base;
            code /= base;
        }
        r
    })
}

/// Tries every unilateral misreport of every agent, with the mechanism's
/// randomness fixed by each seed, and records reports that raise the
/// deviator's true utility.
pub fn truthfulness_probe<F>(
    profile: &ValuationProfile,
    mechanism: F,
    seeds: &[u64],
) -> Result<ProbeReport>
where
    F: Fn(&ValuationProfile, u64) -> Result<ItemResults>,
{
    let (n, m, k) = (profile.n(), profile.m(), profile.k());
    if n > 6 || k > 3 || m > 3 {
        return Err(Error::InvalidParameter(format!(
            "probe is exhaustive; n = {n}, m = {m}, k = {k} is too large"
        )));
    }
    let mut report = ProbeReport::default();
    for &seed in seeds {
        let truthful = mechanism(profile, seed)?;
        report.runs += 1;
        for agent in 0..n {
            let base = utility(profile, agent, &truthful);
            for r in all_reports(m, k) {
                if (0..m).all(|j| r[j] == profile.value(agent, j)) {
                    continue;
                }
                let mut lie = profile.clone();
                for (j, &v) in r.iter().enumerate() {
                    lie = lie.with_value(agent, j, v)?;
                }
                let out = mechanism(&lie, seed)?;
                report.runs += 1;
                report.deviations_tested += 1;
                let u = utility(profile, agent, &out);
                if u > base {
                    report.profitable.push(Deviation {
                        seed,
                        agent,
                        report: r,
                        truthful_utility: base,
                        deviation_utility: u,
                    });
                }
            }
        }
    }
    Ok(report)
}
