use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `C(a, b)` as a big integer, zero when `b > a`.
pub fn binomial_exact(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for j in 0..b {
        acc *= a - j;
        acc /= j + 1;
    }
    acc
}

/// Pascal's triangle up to a fixed row.
pub struct BinomialTable {
    rows: Vec<Vec<BigUint>>,
}

impl BinomialTable {
    pub fn new(max_row: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_row + 1);
        rows.push(vec![BigUint::one()]);
        for a in 1..=max_row {
            let prev = &rows[a - 1];
            let mut row = Vec::with_capacity(a + 1);
            row.push(BigUint::one());
            for b in 1..a {
                row.push(&prev[b - 1] + &prev[b]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        Self { rows }
    }

    pub fn max_row(&self) -> usize {
        self.rows.len() - 1
    }

    /// Panics if `a` exceeds the table.
    pub fn get(&self, a: usize, b: usize) -> BigUint {
        if b > a {
            BigUint::zero()
        } else {
            self.rows[a][b].clone()
        }
    }

    fn get_ref(&self, a: usize, b: usize) -> Option<&BigUint> {
        self.rows[a].get(b)
    }

    /// Checks `Σ_i C(κ-i, ρ) C(κ+i, ρ) = C(2κ+1, 2ρ+1)` exactly.
    /// Needs `max_row >= 2κ + 1`.
    pub fn vandermonde_identity(&self, kappa: usize, rho: usize) -> bool {
        let mut lhs = BigUint::zero();
        for i in 0..=2 * kappa {
            // i runs over κ + (signed rank), so κ - rank = 2κ - i.
            if let (Some(x), Some(y)) = (self.get_ref(2 * kappa - i, rho), self.get_ref(i, rho)) {
                lhs += x * y;
            }
        }
        lhs == self.get(2 * kappa + 1, 2 * rho + 1)
    }
}

fn to_int(x: BigUint) -> BigInt {
    BigInt::from(x)
}

pub(crate) fn pmf_exact(kappa: u64, rho: u64, i: i64) -> BigRational {
    let k = kappa as i64;
    let num = binomial_exact((k - i) as u64, rho) * binomial_exact((k + i) as u64, rho);
    BigRational::new(
        to_int(num),
        to_int(binomial_exact(2 * kappa + 1, 2 * rho + 1)),
    )
}

pub(crate) fn expected_abs_rank_exact(kappa: u64, rho: u64) -> BigRational {
    let k = kappa as i64;
    let mut num = BigUint::zero();
    for i in 1..=k {
        num += binomial_exact((k - i) as u64, rho)
            * binomial_exact((k + i) as u64, rho)
            * (2 * i as u64);
    }
    let den = binomial_exact(2 * kappa + 1, 2 * rho + 1) * kappa;
    BigRational::new(to_int(num), to_int(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn table_matches_multiplicative_formula() {
        let t = BinomialTable::new(60);
        for a in 0..=60u64 {
            for b in 0..=a + 1 {
                assert_eq!(t.get(a as usize, b as usize), binomial_exact(a, b));
            }
        }
    }

    #[test]
    fn identity_small() {
        let t = BinomialTable::new(41);
        for k in 0..=20 {
            for r in 0..=k {
                assert!(t.vandermonde_identity(k, r));
            }
        }
        // Sanity: a wrong right-hand side is detected.
        assert_ne!(t.get(41, 21), t.get(41, 20) + 1u32);
    }

    #[test]
    fn exact_agrees_with_float() {
        let d = super::super::VandermondeDist::new(30, 4).unwrap();
        for i in -30..=30 {
            let e = d.pmf_exact(i).unwrap().to_f64().unwrap();
            assert!((e - d.pmf(i).unwrap()).abs() < 1e-13);
        }
        let ea = d.expected_abs_rank_exact().to_f64().unwrap();
        assert!((ea - d.expected_abs_rank()).abs() < 1e-13);
        assert_eq!(pmf_exact(2, 1, 0), BigRational::new(2.into(), 5.into()));
    }
}
