use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest supported value width.
pub const MAX_K: u32 = 62;

/// Integer valuations of `n` agents for `m` items, each below `2^k`.
/// Stored item-major, so one item's values form a contiguous slice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationProfile {
    k: u32,
    n: usize,
    items: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawValues {
    Single(Vec<u64>),
    /// One row per agent.
    Multi(Vec<Vec<u64>>),
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    k: u32,
    values: RawValues,
}

impl ValuationProfile {
    fn from_items(k: u32, items: Vec<Vec<u64>>) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidParameter(format!(
                "k = {k} not in 1..={MAX_K}"
            )));
        }
        let n = items.first().map_or(0, Vec::len);
        if n == 0 || items.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInstance(
                "profile needs at least one agent and equal-length rows".into(),
            ));
        }
        for col in &items {
            if let Some(&v) = col.iter().find(|&&v| v >> k != 0) {
                return Err(Error::ValueOutOfRange { value: v, k });
            }
        }
        Ok(Self { k, n, items })
    }

    pub fn single(k: u32, values: Vec<u64>) -> Result<Self> {
        Self::from_items(k, vec![values])
    }

    /// `rows[i][j]` is agent `i`'s value for item `j`.
    pub fn multi(k: u32, rows: Vec<Vec<u64>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidInstance("ragged or empty value rows".into()));
        }
        let items = (0..m)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        Self::from_items(k, items)
    }

    pub fn uniform(n: usize, m: usize, k: u32, seed: u64) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidParameter(format!(
                "k = {k} not in 1..={MAX_K}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..m)
            .map(|_| (0..n).map(|_| rng.random_range(0..1u64 << k)).collect())
            .collect();
        Self::from_items(k, items)
    }

    /// Single item, values a random permutation of `0..n`, with the smallest
    /// `k` that holds them.
    pub fn distinct(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<u64> = (0..n as u64).collect();
        values.shuffle(&mut rng);
        let k = (u64::BITS - (n.max(2) as u64 - 1).leading_zeros()).max(1);
        Self::single(k, values)
    }

    /// Zipf-distributed values over `[0, 2^k - 1]` with exponent `s`; small
    /// values are the most likely.
    pub fn zipf(n: usize, m: usize, k: u32, s: f64, seed: u64) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidParameter(format!(
                "k = {k} not in 1..={MAX_K}"
            )));
        }
        let dist = Zipf::new((1u64 << k) as f64, s)
            .map_err(|e| Error::InvalidParameter(format!("zipf: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| (dist.sample(&mut rng) as u64).saturating_sub(1))
                    .collect()
            })
            .collect();
        Self::from_items(k, items)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    /// Values for item `j`, indexed by agent.
    pub fn item(&self, j: usize) -> &[u64] {
        &self.items[j]
    }

    pub fn value(&self, agent: usize, item: usize) -> u64 {
        self.items[item][agent]
    }

    /// Same profile with one value replaced.
    pub fn with_value(&self, agent: usize, item: usize, value: u64) -> Result<Self> {
        if value >> self.k != 0 {
            return Err(Error::ValueOutOfRange { value, k: self.k });
        }
        let mut out = self.clone();
        out.items[item][agent] = value;
        Ok(out)
    }

    /// `{"k": 8, "values": [..]}` for one item, or one row per agent for
    /// several.
    pub fn to_json(&self) -> Result<String> {
        let values = if self.m() == 1 {
            RawValues::Single(self.items[0].clone())
        } else {
            RawValues::Multi(
                (0..self.n)
                    .map(|i| self.items.iter().map(|c| c[i]).collect())
                    .collect(),
            )
        };
        Ok(serde_json::to_string(&ProfileFile { k: self.k, values })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ProfileFile = serde_json::from_str(s)?;
        match f.values {
            RawValues::Single(v) => Self::single(f.k, v),
            RawValues::Multi(rows) => Self::multi(f.k, rows),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wide_values() {
        assert!(matches!(
            ValuationProfile::single(3, vec![1, 8]),
            Err(Error::ValueOutOfRange { value: 8, k: 3 })
        ));
        assert!(ValuationProfile::single(3, vec![]).is_err());
    }

    #[test]
    fn generators_stay_in_range() {
        let u = ValuationProfile::uniform(1000, 2, 5, 1).unwrap();
        assert!(u.item(1).iter().all(|&v| v < 32));
        let z = ValuationProfile::zipf(1000, 1, 4, 1.1, 1).unwrap();
        assert!(z.item(0).iter().all(|&v| v < 16));
        assert!(z.item(0).iter().filter(|&&v| v == 0).count() > 100);
        let d = ValuationProfile::distinct(100, 3).unwrap();
        let mut v = d.item(0).to_vec();
        v.sort();
        assert_eq!(v, (0..100).collect::<Vec<u64>>());
        assert_eq!(d.k(), 7);
    }

    #[test]
    fn json_round_trip() {
        let p = ValuationProfile::multi(4, vec![vec![1, 2], vec![3, 4], vec![0, 15]]).unwrap();
        let back = ValuationProfile::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
        let s = ValuationProfile::from_json(r#"{"k":3,"values":[5,3]}"#).unwrap();
        assert_eq!(s.item(0), &[5, 3]);
    }
}
