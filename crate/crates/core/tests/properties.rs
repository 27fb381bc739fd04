use curvtype_core::chain::{energy_profile, random_weights, ReversibleChain, WeightFamily};
use curvtype_core::curvature::{four_point_minimal_s, sturm_defect, WeightedConfiguration};
use curvtype_core::estimators::{
    enflo_search, markov_ratio_power, markov_ratio_resolvent, EnfloMode,
};
use curvtype_core::metric::{
    cycle_graph, euclidean_space, gaussian_cloud, lp_point_space, path_graph, product_space,
    sphere_sample, star_graph, tripod, validate_metric, FiniteMetricSpace,
};
use curvtype_core::Matrix;
use proptest::prelude::*;

fn family(k: u8) -> WeightFamily {
    [WeightFamily::Dense, WeightFamily::Sparse, WeightFamily::Kernel][k as usize % 3]
}

fn space_and_chain(n: usize, seed: u64, fam: u8) -> (FiniteMetricSpace, ReversibleChain) {
    let space = sphere_sample(n, seed, 1.0).unwrap();
    let chain = ReversibleChain::from_weights(&random_weights(&space, family(fam), seed ^ 0xabc)).unwrap();
    (space, chain)
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn powers_form_a_semigroup(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, l in 1usize..12, m in 1usize..12) {
        let (_, chain) = space_and_chain(n, seed, fam);
        let lhs = chain.power(l + m);
        let rhs = chain.power(l) * chain.power(m);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn resolvent_is_the_geometric_series(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, alpha in 0.01f64..0.8) {
        let (_, chain) = space_and_chain(n, seed, fam);
        let c = chain.resolvent(alpha).unwrap();
        let mut series = Matrix::identity(n, n);
        let mut term = Matrix::identity(n, n);
        for _ in 0..200 {
            term = term * chain.transition() * alpha;
            series += &term;
        }
        series *= 1.0 - alpha;
        prop_assert!(max_abs_diff(&c, &series) < 1e-10);
    }

    #[test]
    fn powers_stay_stochastic_and_reversible(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, l in 1usize..20) {
        let (_, chain) = space_and_chain(n, seed, fam);
        let p = chain.power(l);
        for i in 0..n {
            prop_assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert!(p[(i, j)] >= -1e-15);
                prop_assert!((chain.pi()[i] * p[(i, j)] - chain.pi()[j] * p[(j, i)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn energies_are_relabeling_invariant(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, shift in 0usize..9) {
        let (space, chain) = space_and_chain(n, seed, fam);
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + shift) % n).collect();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assume!(sorted.len() == n);
        let a = energy_profile(&space, &chain, 10).unwrap();
        let b = energy_profile(&space.subspace(&perm).unwrap(), &chain.permuted(&perm), 10).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn ratios_are_scale_invariant(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, factor in 0.01f64..100.0, l in 1usize..10) {
        let (space, chain) = space_and_chain(n, seed, fam);
        let scaled = space.scaled(factor).unwrap();
        let e = energy_profile(&space, &chain, l).unwrap();
        let es = energy_profile(&scaled, &chain, l).unwrap();
        prop_assert!(close(es.get(l).unwrap(), factor * factor * e.get(l).unwrap(), 1e-12));
        let r = markov_ratio_power(&space, &chain, l).unwrap().ratio;
        let rs = markov_ratio_power(&scaled, &chain, l).unwrap().ratio;
        prop_assert!(close(r, rs, 1e-12));
        let q = markov_ratio_resolvent(&space, &chain, 0.5).unwrap().ratio;
        let qs = markov_ratio_resolvent(&scaled, &chain, 0.5).unwrap().ratio;
        prop_assert!(close(q, qs, 1e-12));
    }

    #[test]
    fn product_energy_is_additive(nx in 2usize..5, ny in 2usize..5, seed in 0u64..1000) {
        let x = gaussian_cloud(nx, 2, seed).unwrap();
        let y = sphere_sample(ny, seed + 1, 1.0).unwrap();
        let cx = ReversibleChain::from_weights(&random_weights(&x, WeightFamily::Dense, seed)).unwrap();
        let cy = ReversibleChain::from_weights(&random_weights(&y, WeightFamily::Dense, seed + 7)).unwrap();
        let xy = product_space(&x, &y).unwrap();
        let pi: Vec<f64> = cx.pi().iter().flat_map(|a| cy.pi().iter().map(move |b| a * b)).collect();
        let a = cx.transition().kronecker(cy.transition());
        let cxy = ReversibleChain::new(pi, a, 1e-12).unwrap();
        let ex = energy_profile(&x, &cx, 6).unwrap();
        let ey = energy_profile(&y, &cy, 6).unwrap();
        let exy = energy_profile(&xy, &cxy, 6).unwrap();
        for l in 1..=6 {
            let sum = ex.get(l).unwrap() + ey.get(l).unwrap();
            prop_assert!(close(exy.get(l).unwrap(), sum, 1e-11));
        }
    }

    #[test]
    fn euclidean_defect_is_minus_twice_barycenter_distance(
        coords in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..7),
        raw in prop::collection::vec(0.01f64..1.0, 6),
        y in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let k = coords.len();
        let total: f64 = raw[..k].iter().sum();
        let weights: Vec<f64> = raw[..k].iter().map(|w| w / total).collect();
        let mut points = coords.clone();
        points.push(y.clone());
        let space = euclidean_space(points).unwrap();
        let config = WeightedConfiguration::new((0..k).collect(), weights.clone(), k).unwrap();
        let bary: Vec<f64> = (0..3).map(|t| coords.iter().zip(&weights).map(|(c, a)| a * c[t]).sum()).collect();
        let expected = -2.0 * bary.iter().zip(&y).map(|(b, v)| (b - v).powi(2)).sum::<f64>();
        let got = sturm_defect(&space, &config).unwrap();
        prop_assert!((got - expected).abs() <= 1e-10 * space.diameter().powi(2).max(1.0));
    }

    #[test]
    fn minimal_s_is_monotone_under_subsets(n in 4usize..8, seed in 0u64..1000, drop in 0usize..8) {
        let space = gaussian_cloud(n, 2, seed).unwrap();
        let keep: Vec<usize> = (0..n).filter(|&i| i != drop % n).collect();
        let (s_all, _) = four_point_minimal_s(&space).unwrap();
        let (s_sub, _) = four_point_minimal_s(&space.subspace(&keep).unwrap()).unwrap();
        prop_assert!(s_sub <= s_all + 1e-12);
    }

    #[test]
    fn generators_produce_valid_metrics(n in 2usize..12, seed in 0u64..1000, dim in 1usize..5) {
        let spaces = vec![
            sphere_sample(n, seed, 1.5).unwrap(),
            gaussian_cloud(n, dim, seed).unwrap(),
            path_graph(n).unwrap(),
            cycle_graph(n.max(3)).unwrap(),
            star_graph(n).unwrap(),
            tripod(),
            product_space(&sphere_sample(2, seed, 1.0).unwrap(), &gaussian_cloud(n.min(5), dim, seed).unwrap()).unwrap(),
            lp_point_space(gaussian_cloud(n, dim, seed).unwrap().model().unwrap().coords().to_vec(), 3.0).unwrap(),
        ];
        for space in spaces {
            prop_assert!(validate_metric(&space.rows(), 1e-9).is_ok());
        }
    }

    #[test]
    fn hilbert_power_ratios_are_at_most_one(n in 2usize..9, seed in 0u64..1000, fam in 0u8..3, l in 1usize..20) {
        let space = gaussian_cloud(n, 3, seed).unwrap();
        let chain = ReversibleChain::from_weights(&random_weights(&space, family(fam), seed)).unwrap();
        prop_assert!(markov_ratio_power(&space, &chain, l).unwrap().ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn local_enflo_never_beats_exhaustive(n in 2usize..5, seed in 0u64..1000, dim in 1usize..3) {
        let space = sphere_sample(n, seed, 1.0).unwrap();
        let (_, exact) = enflo_search(&space, dim, EnfloMode::Exhaustive { cap: 1e7 }).unwrap();
        let (_, local) = enflo_search(&space, dim, EnfloMode::Local { seed, budget: 300 }).unwrap();
        prop_assert!(local.ratio <= exact.ratio);
    }
}
