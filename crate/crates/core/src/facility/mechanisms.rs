use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{Instance, Position, Space};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FacilityOutcome {
    pub facilities: Vec<Position>,
    pub social_cost: f64,
    /// Social cost relative to the optimum, when an optimum oracle exists
    /// (the median for single-facility problems).
    pub ratio_vs_optimal: Option<f64>,
    /// Social cost relative to the full-information run of the same mechanism.
    pub ratio_vs_full_information: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSize {
    /// Derived from accuracy and confidence, capped at the population size.
    Accuracy {
        epsilon: f64,
        delta: f64,
    },
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub size: SampleSize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn accuracy(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon = {epsilon}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        Ok(Self {
            size: SampleSize::Accuracy { epsilon, delta },
            seed,
        })
    }

    pub fn fixed(c: usize, seed: u64) -> Self {
        Self {
            size: SampleSize::Fixed(c),
            seed,
        }
    }

    /// Smallest odd integer at least `ceil(1 / (epsilon * delta)^2)`.
    pub fn rule_size(epsilon: f64, delta: f64) -> usize {
        let c = crate::experiment::ceil_tol(1.0 / (epsilon * delta).powi(2)).max(1);
        if c.is_multiple_of(2) {
            c + 1
        } else {
            c
        }
    }

    pub fn resolve(&self, n: usize) -> Result<usize> {
        match self.size {
            SampleSize::Accuracy { epsilon, delta } => Ok(Self::rule_size(epsilon, delta).min(n)),
            SampleSize::Fixed(0) => Err(Error::InvalidParameter("sample size 0".into())),
            SampleSize::Fixed(c) if c > n => Err(Error::SampleExceedsPopulation {
                sample: c,
                population: n,
            }),
            SampleSize::Fixed(c) => Ok(c),
        }
    }
}

fn cmp_key(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Value at 0-based `rank` of `keys` under the (value, agent index) order.
fn select(mut keys: Vec<(f64, usize)>, rank: usize) -> f64 {
    keys.select_nth_unstable_by(rank, cmp_key);
    keys[rank].0
}

fn lower_median_rank(len: usize) -> usize {
    len.div_ceil(2) - 1
}

fn ratio(cost: f64, benchmark: f64) -> f64 {
    if benchmark == 0.0 {
        if cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        cost / benchmark
    }
}

pub fn social_cost(instance: &Instance, facilities: &[Position]) -> Result<f64> {
    if facilities.is_empty() {
        return Err(Error::NoFacilities);
    }
    for f in facilities {
        instance.check_position(f)?;
    }
    Ok(instance
        .points()
        .iter()
        .map(|p| {
            facilities
                .iter()
                .map(|f| instance.distance_unchecked(p, f))
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

/// Median of the agents at `sample` (indices into the instance).
///
/// Line and L1 use the coordinate-wise lower median, curves the lower median
/// parameter. On a star the center is the median whenever it is sampled;
/// otherwise the sampled leaves are isolated and the lowest-median node id is
/// returned.
pub fn median_of_sample(instance: &Instance, sample: &[usize]) -> Result<Position> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let points = instance.points();
    if let Some(&bad) = sample.iter().find(|&&i| i >= points.len()) {
        return Err(Error::InvalidParameter(format!("agent {bad} out of range")));
    }
    let rank = lower_median_rank(sample.len());
    let scalar = |f: &dyn Fn(&Position) -> f64| {
        select(sample.iter().map(|&i| (f(&points[i]), i)).collect(), rank)
    };
    Ok(match instance.space() {
        Space::Line => Position::Real(scalar(&|p| p.as_real().unwrap())),
        Space::Curve(_) => Position::Param(scalar(&|p| p.as_real().unwrap())),
        Space::L1 { dim } => Position::Vector(
            (0..*dim)
                .map(|j| {
                    scalar(&|p| match p {
                        Position::Vector(v) => v[j],
                        _ => unreachable!(),
                    })
                })
                .collect(),
        ),
        Space::StarTree { .. } => {
            let node = |i: usize| match points[i] {
                Position::Node(v) => v,
                _ => unreachable!(),
            };
            if sample.iter().any(|&i| node(i) == 0) {
                Position::Node(0)
            } else {
                let v = select(sample.iter().map(|&i| (node(i) as f64, i)).collect(), rank);
                Position::Node(v as usize)
            }
        }
    })
}

pub fn median(instance: &Instance) -> Result<Position> {
    let all: Vec<usize> = (0..instance.n()).collect();
    median_of_sample(instance, &all)
}

fn sample_indices(rng: &mut impl Rng, n: usize, c: usize) -> Vec<usize> {
    index::sample(rng, n, c).into_vec()
}

/// Facility at the median of a uniform sample drawn without replacement.
pub fn approx_median(instance: &Instance, spec: &SampleSpec) -> Result<FacilityOutcome> {
    let n = instance.n();
    let c = spec.resolve(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sample = sample_indices(&mut rng, n, c);
    let facility = median_of_sample(instance, &sample)?;
    let cost = social_cost(instance, std::slice::from_ref(&facility))?;
    let optimum = social_cost(instance, &[median(instance)?])?;
    let r = ratio(cost, optimum);
    Ok(FacilityOutcome {
        facilities: vec![facility],
        social_cost: cost,
        ratio_vs_optimal: Some(r),
        ratio_vs_full_information: Some(r),
    })
}

/// Multiplicative bound on `SC(x) / SC(median)` when `eps_frac * n` agents lie
/// between the median and `x`: `1 + 2 eps n / (floor(n/2) - eps n)`.
///
/// The count is rank-based and includes the median agent itself; see
/// [`agents_between`].
pub fn sensitivity_bound(n: usize, eps_frac: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps_frac) || n == 0 {
        return Err(Error::BoundUndefined(eps_frac));
    }
    let between = eps_frac * n as f64;
    let denom = (n / 2) as f64 - between;
    if denom <= 0.0 {
        return Err(Error::BoundUndefined(eps_frac));
    }
    Ok(1.0 + 2.0 * between / denom)
}

/// Number of agents between the lower median and a facility at `x` on a line
/// or curve (scalar key: coordinate or arc position).
///
/// Agents are taken in (value, index) order. For `x` above the median this
/// counts agents from the median's rank upwards whose value is below `x`; the
/// median agent is included. Symmetrically for `x` below. Zero when `x` is
/// the median.
pub fn agents_between(instance: &Instance, x: f64) -> Result<usize> {
    let mut keys: Vec<(f64, usize)> = instance
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            instance
                .scalar_key(p)
                .map(|k| (k, i))
                .ok_or_else(|| Error::SpaceMismatch("line or curve instance required".into()))
        })
        .collect::<Result<_>>()?;
    keys.sort_by(cmp_key);
    let r = lower_median_rank(keys.len());
    let m = keys[r].0;
    Ok(if x > m {
        keys[r..].iter().filter(|k| k.0 < x).count()
    } else if x < m {
        keys[..=r].iter().filter(|k| k.0 > x).count()
    } else {
        0
    })
}

fn line_values(instance: &Instance) -> Result<Vec<f64>> {
    match instance.space() {
        Space::Line => Ok(instance
            .points()
            .iter()
            .map(|p| p.as_real().unwrap())
            .collect()),
        _ => Err(Error::SpaceMismatch(
            "percentile mechanisms run on the line".into(),
        )),
    }
}

fn check_ranks(ranks: &[usize], n: usize) -> Result<()> {
    if ranks.is_empty() {
        return Err(Error::NoFacilities);
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > n) {
        return Err(Error::RankOutOfRange { rank: r, n });
    }
    if ranks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "ranks must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn sorted_by_rank(values: &[f64], agents: impl Iterator<Item = usize>) -> Vec<f64> {
    let mut keys: Vec<(f64, usize)> = agents.map(|i| (values[i], i)).collect();
    keys.sort_by(cmp_key);
    keys.into_iter().map(|k| k.0).collect()
}

/// Facilities at the given 1-based order statistics of a line instance.
/// `ranks = [1, n]` is the two-extremes mechanism.
pub fn percentile_mechanism(instance: &Instance, ranks: &[usize]) -> Result<FacilityOutcome> {
    let values = line_values(instance)?;
    check_ranks(ranks, values.len())?;
    let sorted = sorted_by_rank(&values, 0..values.len());
    let facilities: Vec<Position> = ranks
        .iter()
        .map(|&r| Position::Real(sorted[r - 1]))
        .collect();
    let cost = social_cost(instance, &facilities)?;
    Ok(FacilityOutcome {
        facilities,
        social_cost: cost,
        ratio_vs_optimal: None,
        ratio_vs_full_information: Some(1.0),
    })
}

/// Rank `r` of `n` rescaled to a sample of size `c`.
fn sample_ranks(ranks: &[usize], c: usize, n: usize) -> Vec<usize> {
    let mut mapped: Vec<usize> = ranks
        .iter()
        .map(|&r| ((r as f64 * c as f64 / n as f64).round() as usize).clamp(1, c))
        .collect();
    mapped.dedup();
    mapped
}

fn percentile_cost_of_sample(
    instance: &Instance,
    values: &[f64],
    sample: &[usize],
    ranks: &[usize],
) -> Result<(Vec<Position>, f64)> {
    let sorted = sorted_by_rank(values, sample.iter().copied());
    let facilities: Vec<Position> = sample_ranks(ranks, sample.len(), values.len())
        .into_iter()
        .map(|r| Position::Real(sorted[r - 1]))
        .collect();
    let cost = social_cost(instance, &facilities)?;
    Ok((facilities, cost))
}

/// The percentile mechanism run on a uniform sample of `c` agents drawn
/// without replacement, with ranks rescaled to the sample.
pub fn sampling_percentile(
    instance: &Instance,
    ranks: &[usize],
    c: usize,
    seed: u64,
) -> Result<FacilityOutcome> {
    let values = line_values(instance)?;
    let n = values.len();
    check_ranks(ranks, n)?;
    let c = SampleSpec::fixed(c, seed).resolve(n)?;
    let full = percentile_mechanism(instance, ranks)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sample_indices(&mut rng, n, c);
    let (facilities, cost) = percentile_cost_of_sample(instance, &values, &sample, ranks)?;
    Ok(FacilityOutcome {
        facilities,
        social_cost: cost,
        ratio_vs_optimal: None,
        ratio_vs_full_information: Some(ratio(cost, full.social_cost)),
    })
}

/// Exact expected social cost of [`sampling_percentile`] with sample size `c`,
/// by enumerating every `c`-subset. Refuses more than `10^7` subsets.
pub fn exact_expected_sampling_percentile_cost(
    instance: &Instance,
    ranks: &[usize],
    c: usize,
) -> Result<f64> {
    let values = line_values(instance)?;
    let n = values.len();
    check_ranks(ranks, n)?;
    if c == 0 || c > n {
        return Err(Error::SampleExceedsPopulation {
            sample: c,
            population: n,
        });
    }
    let subsets = crate::vandermonde::ln_binomial(n as u64, c as u64).exp();
    if subsets > 1e7 {
        return Err(Error::InvalidParameter(format!(
            "{subsets:.3e} subsets is too many to enumerate"
        )));
    }
    let mut total = 0.0;
    let mut count = 0u64;
    for sample in (0..n).combinations(c) {
        total += percentile_cost_of_sample(instance, &values, &sample, ranks)?.1;
        count += 1;
    }
    Ok(total / count as f64)
}

/// `ceil((1 - alpha) n)` agents spread evenly over `[0, inner]` and the rest
/// over `[l, l + inner]`.
pub fn make_counterexample(n: usize, alpha: f64, l: f64, inner: f64) -> Result<Instance> {
    let valid = alpha > 0.0 && alpha < 1.0 && l > 0.0 && inner >= 0.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha}, l = {l}, inner = {inner}"
        )));
    }
    let left = crate::experiment::ceil_tol((1.0 - alpha) * n as f64).min(n);
    let spread = |count: usize, start: f64| -> Vec<f64> {
        (0..count)
            .map(|i| {
                if count == 1 {
                    start
                } else {
                    start + inner * i as f64 / (count - 1) as f64
                }
            })
            .collect()
    };
    let mut points = spread(left, 0.0);
    points.extend(spread(n - left, l));
    Instance::line(points)
}

/// Facility at a uniformly random agent's position.
pub fn random_dictator(instance: &Instance, seed: u64) -> Result<FacilityOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dictator = rng.random_range(0..instance.n());
    let facility = instance.points()[dictator].clone();
    let cost = social_cost(instance, std::slice::from_ref(&facility))?;
    let optimum = social_cost(instance, &[median(instance)?])?;
    Ok(FacilityOutcome {
        facilities: vec![facility],
        social_cost: cost,
        ratio_vs_optimal: Some(ratio(cost, optimum)),
        ratio_vs_full_information: None,
    })
}

/// Exhaustive misreport check of the median on every line instance with
/// `n` agents on the grid `0..=grid`. Returns `(misreports tried, profitable
/// ones)`; a misreport is profitable when it moves the facility strictly
/// closer to the deviator's true position.
pub fn median_manipulation_check(n: usize, grid: u32) -> Result<(usize, usize)> {
    if n == 0 || n > 6 || grid > 8 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive check too large: n = {n}, grid = {grid}"
        )));
    }
    let g = grid as usize + 1;
    let mut tried = 0;
    let mut profitable = 0;
    for code in 0..g.pow(n as u32) {
        let truth: Vec<f64> = (0..n)
            .map(|i| ((code / g.pow(i as u32)) % g) as f64)
            .collect();
        let honest = median(&Instance::line(truth.clone())?)?.as_real().unwrap();
        for agent in 0..n {
            for lie in 0..g {
                let lie = lie as f64;
                if lie == truth[agent] {
                    continue;
                }
                let mut reported = truth.clone();
                reported[agent] = lie;
                let f = median(&Instance::line(reported)?)?.as_real().unwrap();
                tried += 1;
                if (f - truth[agent]).abs() < (honest - truth[agent]).abs() {
                    profitable += 1;
                }
            }
        }
    }
    Ok((tried, profitable))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facility::Polyline;

    fn line(v: &[f64]) -> Instance {
        Instance::line(v.to_vec()).unwrap()
    }

    #[test]
    fn social_cost_examples() {
        assert_eq!(
            social_cost(&line(&[1., 2., 3., 4., 5.]), &[Position::Real(3.0)]).unwrap(),
            6.0
        );
        let star = Instance::star(5).unwrap();
        assert_eq!(social_cost(&star, &[Position::Node(0)]).unwrap(), 4.0);
        assert_eq!(social_cost(&star, &[Position::Node(3)]).unwrap(), 7.0);
        let l1 = Instance::l1(2, vec![vec![0., 0.], vec![2., 2.]]).unwrap();
        assert_eq!(
            social_cost(&l1, &[Position::Vector(vec![1., 1.])]).unwrap(),
            4.0
        );
    }

    #[test]
    fn social_cost_errors() {
        let inst = line(&[1.0]);
        assert!(matches!(social_cost(&inst, &[]), Err(Error::NoFacilities)));
        assert!(matches!(
            social_cost(&inst, &[Position::Node(0)]),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&line(&[5., 1., 3.])).unwrap(), Position::Real(3.0));
        let l1 = Instance::l1(2, vec![vec![0., 0.], vec![1., 2.], vec![2., 1.]]).unwrap();
        assert_eq!(median(&l1).unwrap(), Position::Vector(vec![1., 1.]));
        assert_eq!(
            median(&Instance::star(5).unwrap()).unwrap(),
            Position::Node(0)
        );
        // Even counts use the lower median.
        assert_eq!(
            median(&line(&[4., 1., 3., 2.])).unwrap(),
            Position::Real(2.0)
        );
    }

    #[test]
    fn curve_median_follows_parameters() {
        let c = Polyline::new(vec![vec![0., 0.], vec![1., 0.], vec![1., 5.]]).unwrap();
        let inst = Instance::curve(c, vec![0.9, 0.1, 0.6]).unwrap();
        assert_eq!(median(&inst).unwrap(), Position::Param(0.6));
    }

    #[test]
    fn full_sample_is_exact() {
        let inst = line(&[3., 9., 1., 4., 7., 7., 2.]);
        let out = approx_median(&inst, &SampleSpec::fixed(7, 11)).unwrap();
        assert_eq!(out.ratio_vs_optimal, Some(1.0));
    }

    #[test]
    fn oversized_sample_rejected() {
        let inst = line(&[1., 2.]);
        let err = approx_median(&inst, &SampleSpec::fixed(3, 0)).unwrap_err();
        assert!(err.to_string().starts_with("sample exceeds population"));
    }

    #[test]
    fn sample_rule_is_odd_and_capped() {
        assert_eq!(SampleSpec::rule_size(0.1, 1.0), 101);
        assert_eq!(SampleSpec::rule_size(0.1, 0.1), 10_001);
        assert_eq!(SampleSpec::rule_size(0.5, 1.0), 5);
        let spec = SampleSpec::accuracy(0.01, 1.0, 0).unwrap();
        assert_eq!(spec.resolve(50).unwrap(), 50);
    }

    #[test]
    fn sensitivity_bound_values() {
        assert_eq!(sensitivity_bound(101, 0.0).unwrap(), 1.0);
        let b = sensitivity_bound(101, 0.1).unwrap();
        assert!((b - (1.0 + 20.2 / 39.9)).abs() < 1e-12);
        assert!((b - 1.506).abs() < 1e-3);
        assert!(sensitivity_bound(101, 0.5).is_err());
        assert!(sensitivity_bound(3, 0.4).is_err());
    }

    #[test]
    fn agents_between_counts_median_agent() {
        let inst = line(&[0., 1., 10.]);
        assert_eq!(agents_between(&inst, 1.0).unwrap(), 0);
        assert_eq!(agents_between(&inst, 9.99).unwrap(), 1);
        assert_eq!(agents_between(&inst, 11.0).unwrap(), 2);
        assert_eq!(agents_between(&inst, -1.0).unwrap(), 2);
    }

    #[test]
    fn percentile_examples() {
        let inst = line(&[1., 2., 3., 4., 5.]);
        let out = percentile_mechanism(&inst, &[1, 5]).unwrap();
        assert_eq!(
            out.facilities,
            vec![Position::Real(1.0), Position::Real(5.0)]
        );
        assert_eq!(out.social_cost, 4.0);
        let med = percentile_mechanism(&line(&[1., 2., 3.]), &[2]).unwrap();
        assert_eq!(med.facilities, vec![Position::Real(2.0)]);
        assert!(matches!(
            percentile_mechanism(&inst, &[0, 2]),
            Err(Error::RankOutOfRange { .. })
        ));
        assert!(percentile_mechanism(&inst, &[3, 3]).is_err());
    }

    #[test]
    fn rank_mapping() {
        assert_eq!(sample_ranks(&[1, 20], 10, 20), vec![1, 10]);
        assert_eq!(sample_ranks(&[1, 2, 3], 1, 100), vec![1]);
        assert_eq!(sample_ranks(&[1, 7], 7, 7), vec![1, 7]);
    }

    #[test]
    fn sampling_percentile_full_sample_matches() {
        let inst = make_counterexample(12, 0.25, 50.0, 1.0).unwrap();
        let full = percentile_mechanism(&inst, &[1, 12]).unwrap();
        let s = sampling_percentile(&inst, &[1, 12], 12, 3).unwrap();
        assert_eq!(s.facilities, full.facilities);
        assert_eq!(s.ratio_vs_full_information, Some(1.0));
    }

    #[test]
    fn counterexample_shape() {
        let inst = make_counterexample(10, 0.5, 100.0, 0.0).unwrap();
        let pts: Vec<f64> = inst.points().iter().map(|p| p.as_real().unwrap()).collect();
        assert_eq!(pts, [0., 0., 0., 0., 0., 100., 100., 100., 100., 100.]);
        assert_eq!(
            percentile_mechanism(&inst, &[1, 10]).unwrap().social_cost,
            0.0
        );
        // Two extremes on spread clusters costs inner * (cluster sizes).
        let spread = make_counterexample(10, 0.5, 100.0, 0.5).unwrap();
        let out = percentile_mechanism(&spread, &[1, 10]).unwrap();
        assert!((out.social_cost - 2.0 * 0.5 * 5.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn median_has_no_profitable_misreport() {
        for n in 1..=5 {
            let (tried, bad) = median_manipulation_check(n, 4).unwrap();
            assert!(tried > 0);
            assert_eq!(bad, 0);
        }
    }

    #[test]
    fn random_dictator_single_agent() {
        let inst = line(&[4.2]);
        let out = random_dictator(&inst, 0).unwrap();
        assert_eq!(out.facilities, vec![Position::Real(4.2)]);
        assert_eq!(out.ratio_vs_optimal, Some(1.0));
    }
}
