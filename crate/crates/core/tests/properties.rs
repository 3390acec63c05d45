mod common;

use aleatory_facility::adversary::random::{
    random_distribution, random_instance, random_instance_with, random_two_instance,
};
use aleatory_facility::bounds::{
    sar_lower, sar_lower_exact, sar_upper, sar_upper_exact, LowerRegime, Regime,
};
use aleatory_facility::instance::{esc, solve_optimal, Instance};
use aleatory_facility::single::{delta, delta_lift, lift, pqm, PhantomVector, QueryPlan};
use aleatory_facility::two::{aqm, cem, esc2, igm, pom, solve_optimal2, TwoInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quantile_inverts_cdf(seed in any::<u64>(), p in 1e-9f64..=1.0) {
        let mu = random_distribution(&mut rng(seed), 8);
        let t = mu.quantile(p).unwrap();
        prop_assert!((mu.cdf(t) - p).abs() < 1e-12);
        prop_assert!(mu.cdf(t - 1e-9) <= p + 1e-12);
    }

    #[test]
    fn closed_form_deviation_matches_integration(seed in any::<u64>(), y in -12.0f64..12.0) {
        let mu = random_distribution(&mut rng(seed), 8);
        let direct = common::abs_dev(&common::triples(&mu), y);
        prop_assert!((mu.mean_abs_dev(y) - direct).abs() < 1e-9);
    }

    #[test]
    fn median_set_minimises_the_cost(seed in any::<u64>(), y in -12.0f64..12.0) {
        let (inst, mu) = random_instance(&mut rng(seed), 15, 8);
        let s = solve_optimal(&inst, &mu);
        prop_assert!(s.lo <= s.hi);
        let best = esc(&inst, &mu, s.canonical);
        prop_assert!(best <= esc(&inst, &mu, y) + 1e-9);
        prop_assert!((esc(&inst, &mu, s.hi) - best).abs() < 1e-9);
    }

    #[test]
    fn phantom_mechanisms_are_truthful(
        seed in any::<u64>(),
        levels in prop::collection::vec(0.0f64..=1.0, 0..6),
        agent_pick in any::<usize>(),
        lie in -12.0f64..12.0,
    ) {
        let n_u = levels.len();
        let n_r = if n_u % 2 == 0 { 3 } else { 4 };
        let (inst, mu) = random_instance_with(&mut rng(seed), n_r + n_u, n_r, 8);
        let w = PhantomVector::new(levels).unwrap();
        let agent = agent_pick % n_r;
        let truth = inst.reports()[agent];
        let honest = (truth - pqm(&inst, &w, &mu).unwrap()).abs();
        let mut lied = inst.reports().to_vec();
        lied[agent] = lie;
        let dev = pqm(&Instance::new(inst.n(), lied).unwrap(), &w, &mu).unwrap();
        prop_assert!(honest <= (truth - dev).abs() + 1e-12);
    }

    #[test]
    fn lifted_gap_equals_plan_gap(levels in prop::collection::vec(0.0f64..=1.0, 1..6), n_r in 0usize..12, n_u in 1usize..12) {
        prop_assume!((n_r + n_u) % 2 == 1);
        let q = QueryPlan::new(levels).unwrap();
        let w = lift(&q, n_r, n_u).unwrap();
        prop_assert_eq!(w.len(), n_u);
        prop_assert_eq!(delta(&w, n_r, n_u).unwrap(), delta_lift(&q, n_r, n_u).unwrap());
    }

    #[test]
    fn upper_bounds_dominate_lower_bounds(half in 0usize..60, n_r_pick in any::<usize>()) {
        let n = 2 * half + 1;
        let n_r = n_r_pick % (n + 1);
        let zu = sar_upper_exact(Regime::Zero, n, n_r).unwrap();
        let zl = sar_lower_exact(LowerRegime::Zero, n, n_r, None, false).unwrap();
        prop_assert_eq!(zu, zl);
        let mu = sar_upper(Regime::Median, n, n_r, None).unwrap();
        prop_assert!(mu <= 3.0);
        if n - n_r >= 2 {
            prop_assert!(mu >= sar_lower(LowerRegime::Median, n, n_r, None, true).unwrap() - 1e-12);
        }
        for k in 2..=n - n_r {
            if (n - n_r) % k == 0 {
                let u = sar_upper(Regime::KQuantile, n, n_r, Some(&QueryPlan::even_grid(k).unwrap())).unwrap();
                let l = sar_lower(LowerRegime::KQuantileEvenGrid, n, n_r, Some(k), false).unwrap();
                prop_assert!(u >= l - 1e-12, "k = {}: {} < {}", k, u, l);
            }
        }
    }

    #[test]
    fn two_facility_mechanisms_respect_capacity_and_optimum(seed in any::<u64>(), c in 1usize..=5, pick in any::<usize>()) {
        let mut r = rng(seed);
        let n_r = pick % (2 * c + 1);
        let (inst, mu) = random_two_instance(&mut r, c, n_r, 8);
        let opt = esc2(&inst, &mu, &solve_optimal2(&inst, &mu)).unwrap();
        let mut outs = vec![cem(&inst, &mu, &QueryPlan::even_grid(2).unwrap()).unwrap()];
        if n_r <= c {
            outs.push(pom(&inst, &mu).unwrap());
        } else {
            outs.push(aqm(&inst, &mu).unwrap());
            outs.push(igm(&inst, &mu).unwrap());
        }
        for out in outs {
            let (a, b) = out.loads();
            prop_assert!(a <= c && b <= c);
            prop_assert!(out.y1() <= out.y2());
            prop_assert!(esc2(&inst, &mu, &out).unwrap() >= opt - 1e-9);
        }
    }

    #[test]
    fn exact_optimum_is_invariant_under_report_order(seed in any::<u64>(), c in 1usize..=4) {
        let (inst, mu) = random_two_instance(&mut rng(seed), c, c + 1, 4);
        let mut rev = inst.reports().to_vec();
        rev.reverse();
        let again = TwoInstance::new(c, rev).unwrap();
        prop_assert_eq!(solve_optimal2(&inst, &mu), solve_optimal2(&again, &mu));
    }
}
