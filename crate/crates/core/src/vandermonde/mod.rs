//! Rank distribution of the median of a uniform sample.
//!
//! For a population of `n = 2κ + 1` ranked agents and a sample of
//! `c = 2ρ + 1` drawn without replacement, the median of the sample sits at
//! signed rank `i ∈ {-κ, …, κ}` (0 is the population median) with probability
//! `C(κ-i, ρ) C(κ+i, ρ) / C(2κ+1, 2ρ+1)`. As κ grows, `i/κ` converges to the
//! density `C(ρ) (1 - t²)^ρ` on `[-1, 1]`.

mod exact;
mod limit;
mod tables;

pub use exact::{binomial_exact, BinomialTable};
pub use limit::{abs_moment, integrate, limit_cdf, limit_density, norm_const, norm_const_beta};
pub use tables::{
    compare, comparison_csv, emit_tables, reference_abs_rank, reference_l1, rows_csv, table_grid,
    table_row, table_rows, CellComparison, CellStatus, TableKind, TableRow, SUSPECT_CELL,
    TABLE_KAPPAS, TABLE_RHOS,
};

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

/// `ln C(a, b)`, or `-inf` when `b > a`.
///
/// Short products are summed term by term, which keeps the absolute error
/// near machine epsilon; long ones go through log-gamma.
pub fn ln_binomial(a: u64, b: u64) -> f64 {
    if b > a {
        return f64::NEG_INFINITY;
    }
    let b = b.min(a - b);
    if b == 0 {
        return 0.0;
    }
    if b <= 512 {
        let s: KahanSum = (0..b)
            .map(|j| ((a - j) as f64 / (j + 1) as f64).ln())
            .collect();
        return s.total();
    }
    ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
}

/// Compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VandermondeDist {
    kappa: u64,
    rho: u64,
}

impl VandermondeDist {
    pub fn new(kappa: u64, rho: u64) -> Result<Self> {
        if kappa == 0 || rho > kappa {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= rho <= kappa and kappa >= 1, got kappa = {kappa}, rho = {rho}"
            )));
        }
        Ok(Self { kappa, rho })
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn rho(&self) -> u64 {
        self.rho
    }

    fn check_rank(&self, i: i64) -> Result<()> {
        if i.unsigned_abs() > self.kappa {
            return Err(Error::RankOutOfSupport {
                rank: i,
                kappa: self.kappa,
            });
        }
        Ok(())
    }

    fn ln_pmf_unchecked(&self, i: i64) -> f64 {
        let k = self.kappa as i64;
        ln_binomial((k - i) as u64, self.rho) + ln_binomial((k + i) as u64, self.rho)
            - ln_binomial(2 * self.kappa + 1, 2 * self.rho + 1)
    }

    pub fn pmf(&self, i: i64) -> Result<f64> {
        self.check_rank(i)?;
        Ok(self.ln_pmf_unchecked(i).exp())
    }

    /// The whole mass function, indexed from rank `-κ`.
    pub fn pmf_vec(&self) -> Vec<f64> {
        let k = self.kappa as i64;
        (-k..=k).map(|i| self.ln_pmf_unchecked(i).exp()).collect()
    }

    /// Exact mass at rank `i` in rational arithmetic.
    pub fn pmf_exact(&self, i: i64) -> Result<num_rational::BigRational> {
        self.check_rank(i)?;
        Ok(exact::pmf_exact(self.kappa, self.rho, i))
    }

    /// `Pr[i/κ ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.kappa as i64;
        let top = (x * self.kappa as f64 + 1e-9).floor();
        if top < -(k as f64) {
            return 0.0;
        }
        let top = (top as i64).min(k);
        let s: KahanSum = (-k..=top).map(|i| self.ln_pmf_unchecked(i).exp()).collect();
        s.total().min(1.0)
    }

    /// `E[|i/κ|]`.
    pub fn expected_abs_rank(&self) -> f64 {
        let k = self.kappa as i64;
        let kf = self.kappa as f64;
        let s: KahanSum = (1..=k)
            .map(|i| 2.0 * (i as f64 / kf) * self.ln_pmf_unchecked(i).exp())
            .collect();
        s.total()
    }

    pub fn expected_abs_rank_exact(&self) -> num_rational::BigRational {
        exact::expected_abs_rank_exact(self.kappa, self.rho)
    }

    /// Limit measure discretised onto the support: rank `i` receives the
    /// density mass over `[(i-½)/κ, (i+½)/κ]`, the end bins clamped to
    /// `[-1, 1]`, renormalised to total 1.
    pub fn discretized_limit(&self) -> Vec<f64> {
        let k = self.kappa as i64;
        let kf = self.kappa as f64;
        let c = norm_const(self.rho);
        let rho = self.rho as i32;
        let f = |t: f64| (1.0 - t * t).max(0.0).powi(rho);
        let half: Vec<f64> = (0..=k)
            .map(|i| {
                let a = if i == 0 { 0.0 } else { (i as f64 - 0.5) / kf };
                let b = ((i as f64 + 0.5) / kf).min(1.0);
                c * integrate(f, a, b, 1e-14)
            })
            .collect();
        // The centre bin straddles zero; both halves fold into index 0.
        let mut q: Vec<f64> = (-k..=k)
            .map(|i| {
                if i == 0 {
                    2.0 * half[0]
                } else {
                    half[i.unsigned_abs() as usize]
                }
            })
            .collect();
        let total: KahanSum = q.iter().copied().collect();
        let total = total.total();
        q.iter_mut().for_each(|x| *x /= total);
        q
    }

    /// `Σ |pmf(i) - q(i)|` against [`Self::discretized_limit`].
    pub fn l1_distance(&self) -> f64 {
        let q = self.discretized_limit();
        let s: KahanSum = self
            .pmf_vec()
            .iter()
            .zip(&q)
            .map(|(p, q)| (p - q).abs())
            .collect();
        s.total()
    }

    /// Total variation distance, half of [`Self::l1_distance`].
    pub fn tv_distance(&self) -> f64 {
        0.5 * self.l1_distance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_single_sample() {
        let d = VandermondeDist::new(1, 0).unwrap();
        for i in -1..=1 {
            assert!((d.pmf(i).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn small_pmf_value() {
        let d = VandermondeDist::new(2, 1).unwrap();
        assert!((d.pmf(0).unwrap() - 0.4).abs() < 1e-14);
        assert!(matches!(d.pmf(3), Err(Error::RankOutOfSupport { .. })));
        assert!(d
            .pmf(-3)
            .unwrap_err()
            .to_string()
            .starts_with("rank out of support"));
    }

    #[test]
    fn pmf_normalised_and_symmetric() {
        for (k, r) in [(10, 3), (100, 10), (1000, 40)] {
            let d = VandermondeDist::new(k, r).unwrap();
            let p = d.pmf_vec();
            let s: KahanSum = p.iter().copied().collect();
            assert!((s.total() - 1.0).abs() < 1e-12, "{k} {r}");
            let n = p.len();
            let signed: KahanSum = (0..n).map(|j| (j as f64 - k as f64) * p[j]).collect();
            assert!(signed.total().abs() < 1e-12);
            for j in 0..n {
                assert_eq!(p[j], p[n - 1 - j]);
            }
        }
    }

    #[test]
    fn rejects_rho_above_kappa() {
        assert!(VandermondeDist::new(3, 4).is_err());
        assert!(VandermondeDist::new(0, 0).is_err());
    }

    #[test]
    fn full_sample_sits_at_population_median() {
        let d = VandermondeDist::new(5, 5).unwrap();
        assert_eq!(d.pmf(0).unwrap(), 1.0);
    }

    #[test]
    fn discrete_cdf_edges() {
        let d = VandermondeDist::new(50, 5).unwrap();
        assert_eq!(d.cdf(-1.5), 0.0);
        assert!((d.cdf(1.0) - 1.0).abs() < 1e-12);
        let mid = d.cdf(0.0) - 0.5 * d.pmf(0).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tv_shrinks_in_kappa() {
        let tv: Vec<f64> = [100, 500, 1000]
            .iter()
            .map(|&k| VandermondeDist::new(k, 10).unwrap().tv_distance())
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2]);
        assert!((tv[0] - 0.0236).abs() < 5e-4);
    }
}
