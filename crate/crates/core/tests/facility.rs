use mechsim::facility::{
    agents_between, approx_median, median, percentile_mechanism, random_dictator,
    sampling_percentile, sensitivity_bound, social_cost, Instance, Polyline, Position, SampleSpec,
};
use proptest::prelude::*;

fn grid_points(max_n: usize, grid: i32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0..=grid).prop_map(f64::from), 1..=max_n)
}

proptest! {
    #[test]
    fn line_median_beats_every_grid_point(pts in grid_points(9, 12)) {
        let inst = Instance::line(pts).unwrap();
        let best = social_cost(&inst, &[median(&inst).unwrap()]).unwrap();
        for x in 0..=24 {
            let x = Position::Real(x as f64 / 2.0);
            prop_assert!(best <= social_cost(&inst, &[x]).unwrap() + 1e-12);
        }
    }

    #[test]
    fn l1_median_beats_every_grid_point(
        pts in prop::collection::vec((0..=5i32, 0..=5i32), 1..=9)
    ) {
        let inst = Instance::l1(
            2,
            pts.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect(),
        )
        .unwrap();
        let best = social_cost(&inst, &[median(&inst).unwrap()]).unwrap();
        for a in 0..=5 {
            for b in 0..=5 {
                let x = Position::Vector(vec![a as f64, b as f64]);
                prop_assert!(best <= social_cost(&inst, &[x]).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn l1_cost_is_sum_of_coordinate_costs(
        pts in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 1..30),
        f in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let inst = Instance::l1(3, pts).unwrap();
        let total = social_cost(&inst, &[Position::Vector(f.clone())]).unwrap();
        let parts: f64 = (0..3)
            .map(|j| {
                social_cost(&inst.coordinate(j).unwrap(), &[Position::Real(f[j])]).unwrap()
            })
            .sum();
        prop_assert!((total - parts).abs() <= 1e-9 * total.max(1.0));
    }

    #[test]
    fn curve_sampling_follows_line_of_parameters(
        params in prop::collection::vec(0.0..=1.0f64, 1..200),
        c in 1usize..50,
        seed in any::<u64>(),
    ) {
        let c = c.min(params.len());
        let curve = Polyline::new(vec![
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![3.0, 2.0],
            vec![3.0, -1.0],
        ])
        .unwrap();
        let on_curve = Instance::curve(curve.clone(), params.clone()).unwrap();
        let on_line = Instance::line(params).unwrap();
        let a = approx_median(&on_curve, &SampleSpec::fixed(c, seed)).unwrap();
        let b = approx_median(&on_line, &SampleSpec::fixed(c, seed)).unwrap();
        let (Position::Param(t), Some(x)) = (&a.facilities[0], b.facilities[0].as_real()) else {
            panic!("unexpected positions");
        };
        prop_assert_eq!(*t, x);
        // Curve costs are arc lengths of the same parameters.
        let arcs = Instance::line(
            on_curve
                .points()
                .iter()
                .map(|p| match p {
                    Position::Param(s) => curve.arc_position(*s),
                    _ => unreachable!(),
                })
                .collect(),
        )
        .unwrap();
        let expect = social_cost(&arcs, &[Position::Real(curve.arc_position(*t))]).unwrap();
        prop_assert!((a.social_cost - expect).abs() <= 1e-9 * expect.max(1.0));
    }

    #[test]
    fn full_sample_reproduces_mechanisms(
        pts in prop::collection::vec(-100.0..100.0f64, 1..60),
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let inst = Instance::line(pts.clone()).unwrap();
        let full = approx_median(&inst, &SampleSpec::fixed(n, seed)).unwrap();
        prop_assert_eq!(&full.facilities[0], &median(&inst).unwrap());
        prop_assert_eq!(full.ratio_vs_optimal, Some(1.0));
        let ranks = [1, n.div_ceil(2), n];
        let mut ranks: Vec<usize> = ranks.to_vec();
        ranks.dedup();
        let exact = percentile_mechanism(&inst, &ranks).unwrap();
        let sampled = sampling_percentile(&inst, &ranks, n, seed).unwrap();
        prop_assert_eq!(exact.facilities, sampled.facilities);

        let l1 = Instance::l1(2, pts.iter().map(|&x| vec![x, -x / 3.0]).collect()).unwrap();
        let full = approx_median(&l1, &SampleSpec::fixed(n, seed)).unwrap();
        prop_assert_eq!(&full.facilities[0], &median(&l1).unwrap());
    }
}

#[test]
fn sensitivity_bound_holds_on_random_lines() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for _ in 0..1_000 {
        let n = rng.random_range(2..60);
        let pts: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let inst = Instance::line(pts.clone()).unwrap();
        let opt = social_cost(&inst, &[median(&inst).unwrap()]).unwrap();
        if opt == 0.0 {
            continue;
        }
        let mut candidates: Vec<f64> = (0..20).map(|_| rng.random_range(-12.0..12.0)).collect();
        candidates.extend(pts.iter().map(|p| p + 1e-9));
        for x in candidates {
            let between = agents_between(&inst, x).unwrap();
            let Ok(bound) = sensitivity_bound(n, between as f64 / n as f64) else {
                continue;
            };
            let sc = social_cost(&inst, &[Position::Real(x)]).unwrap();
            assert!(
                sc / opt <= bound + 1e-9,
                "n={n} x={x} {} > {bound}",
                sc / opt
            );
            checked += 1;
        }
    }
    assert!(checked > 5_000);
}

#[test]
fn random_dictator_is_a_two_approximation_in_expectation() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.random_range(1..40);
        let pts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let inst = Instance::line(pts).unwrap();
        let opt = social_cost(&inst, &[median(&inst).unwrap()]).unwrap();
        let expected: f64 = inst
            .points()
            .iter()
            .map(|p| social_cost(&inst, std::slice::from_ref(p)).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(expected <= 2.0 * opt + 1e-12);
    }
    let star = Instance::star(10).unwrap();
    let mean: f64 = (0..2_000)
        .map(|s| random_dictator(&star, s).unwrap().social_cost)
        .sum::<f64>()
        / 2_000.0;
    // Center with probability 1/10 (cost 9), a leaf otherwise (cost 17).
    assert!((mean - (0.1 * 9.0 + 0.9 * 17.0)).abs() < 0.3, "{mean}");
}

#[test]
fn instance_json_round_trips() {
    let inst = Instance::l1(2, vec![vec![0.0, 1.5], vec![-2.0, 3.0]]).unwrap();
    let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
    assert_eq!(inst, back);
    let star = Instance::star(4).unwrap();
    assert_eq!(Instance::from_json(&star.to_json().unwrap()).unwrap(), star);
}
