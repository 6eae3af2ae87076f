use proptest::prelude::*;

use rach_core::allocator::{
    brute_force_optimal, brute_force_optimal_by, collision_rate_bound, delay_bound, proportional_allocation,
    reserve_and_divide, reserve_for_collision_rate, reserve_for_delay, Objective,
};
use rach_core::analytics::{
    cell_collision_density, cell_collision_probability, cell_collision_probability_exponent_form,
    full_dedication_rates, full_sharing_metrics, full_sharing_rate, mean_access_delay, partial_dedication_rates,
    simple_collision_rate,
};
use rach_core::model::{derive_ra_density, validate_scenario};
use rach_core::{AllocationPlan, ClassRecord, QosTarget, RaoRange, Scenario, ScenarioConfig, SharingTopology, Strategy as RaStrategy};

fn scenario(densities: &[f64], total_raos: u64) -> Scenario {
    let classes = densities
        .iter()
        .enumerate()
        .map(|(i, g)| ClassRecord::with_density(i as u32 + 1, *g, 1.0))
        .collect();
    validate_scenario(&ScenarioConfig { total_raos, strategy: RaStrategy::FullDedication, classes }).unwrap()
}

fn densities(max_classes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..2000.0, 1..=max_classes)
}

fn density_objective(s: &Scenario, plan: &AllocationPlan) -> f64 {
    cell_collision_density(s, plan).unwrap()
}

proptest! {
    #[test]
    fn sharing_is_simple_rate_on_summed_density(g in densities(6), l in 1u64..50_000) {
        let s = scenario(&g, l.max(g.len() as u64));
        let expected = simple_collision_rate(s.total_density(), s.total_raos() as f64).unwrap();
        prop_assert_eq!(full_sharing_rate(&s).unwrap(), expected);
    }

    #[test]
    fn dedicated_classes_are_decoupled(g in densities(5), bump in 0.1f64..10.0, l in 5u64..20_000, j in 0usize..5) {
        let s = scenario(&g, l);
        let j = j % g.len();
        let plan = proportional_allocation(&s).unwrap();
        let before = full_dedication_rates(&s, &plan).unwrap();
        let bumped = s.with_ra_density(j as u32 + 1, g[j] * bump).unwrap();
        let after = full_dedication_rates(&bumped, &plan).unwrap();
        for (i, (a, b)) in before.iter().zip(&after).enumerate() {
            if i != j {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn success_plus_collision_is_one(g in 1e-6f64..1e6, l in 1.0f64..1e6) {
        let p = simple_collision_rate(g, l).unwrap();
        prop_assert!(p > 0.0 && p < 1.0 || p == 1.0 && g / l > 36.0);
        prop_assert_eq!(p + (1.0 - p), 1.0);
        let s = scenario(&[g], 1);
        for m in full_sharing_metrics(&s).unwrap() {
            prop_assert_eq!(m.collision_rate + m.success_rate, 1.0);
            prop_assert_eq!(m.collision_density, m.ra_density * m.collision_rate);
        }
    }

    #[test]
    fn rate_is_monotone(g in 0.01f64..5000.0, l in 1.0f64..20_000.0, dg in 0.01f64..100.0, dl in 1.0f64..100.0) {
        // past this load 1 - e^{-x} rounds to 1
        prop_assume!(g / l <= 20.0);
        let p = simple_collision_rate(g, l).unwrap();
        prop_assert!(simple_collision_rate(g + dg, l).unwrap() > p);
        prop_assert!(simple_collision_rate(g, l + dl).unwrap() < p);
    }

    #[test]
    fn disjoint_partial_topology_is_dedication(g in densities(5), l in 5u64..20_000) {
        let s = scenario(&g, l);
        let plan = proportional_allocation(&s).unwrap();
        let topo = SharingTopology::disjoint_from_plan(&s, &plan).unwrap();
        let pd = partial_dedication_rates(&s, &topo).unwrap();
        let fd = full_dedication_rates(&s, &plan).unwrap();
        for (a, b) in pd.iter().zip(&fd) {
            prop_assert!((a.collision_rate - b.collision_rate).abs() <= 1e-12);
        }
    }

    #[test]
    fn fully_shared_partial_topology_is_sharing(g in densities(5), l in 1u64..20_000) {
        let s = scenario(&g, l.max(g.len() as u64));
        let topo = SharingTopology::fully_shared(&s).unwrap();
        let fs = full_sharing_rate(&s).unwrap();
        for m in partial_dedication_rates(&s, &topo).unwrap() {
            prop_assert!((m.collision_rate - fs).abs() <= 1e-12);
        }
    }

    #[test]
    fn cell_probability_forms_agree(g in prop::collection::vec(0.01f64..50.0, 1..5), l in 5u64..20_000) {
        let s = scenario(&g, l);
        let plan = proportional_allocation(&s).unwrap();
        let a = cell_collision_probability(&s, &plan).unwrap();
        let b = cell_collision_probability_exponent_form(&s, &plan).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn inclusive_delay_is_backoff_over_success(l in 1u64..20_000, load in 1e-4f64..5.0, t in 0.001f64..100.0) {
        // beyond a few requests per RAO, 1 - p itself loses the digits being compared
        let g = load * l as f64;
        let d = mean_access_delay(g, l as f64, t).unwrap();
        let p = simple_collision_rate(g, l as f64).unwrap();
        let reference = t / (1.0 - p);
        prop_assume!(reference.is_finite());
        prop_assert!((d.inclusive / reference - 1.0).abs() <= 1e-12);
        prop_assert!(((d.inclusive - d.exclusive) / t - 1.0).abs() <= 1e-12 * d.inclusive / t);
    }

    #[test]
    fn grouping_reduces_density(pop in 1u64..1_000_000, rate in 1e-4f64..10.0, group in 1u64..1000) {
        let d = derive_ra_density(pop, rate, group).unwrap();
        prop_assert!(derive_ra_density(pop, rate, group + 1).unwrap() <= d);
        let divisible = pop * group;
        let grouped = derive_ra_density(divisible, rate, group).unwrap();
        let ungrouped = derive_ra_density(divisible, rate, 1).unwrap();
        prop_assert!((ungrouped / grouped - group as f64).abs() <= 1e-9 * group as f64);
    }

    #[test]
    fn scenario_round_trips(g in densities(4), l in 4u64..20_000, special in any::<bool>(), group in 1u64..50) {
        let mut classes: Vec<ClassRecord> = g
            .iter()
            .enumerate()
            .map(|(i, d)| ClassRecord::with_density(10 - i as u32, *d, 0.5 + i as f64))
            .collect();
        classes.push(ClassRecord::with_population(42, 12_345, 0.01, group, 2.0));
        if special {
            classes[0] = classes[0].clone().special(QosTarget::MaxCollisionRate(0.05));
            classes.last_mut().unwrap().qos = Some(QosTarget::MaxMeanDelay(3.0));
        }
        let cfg = ScenarioConfig { total_raos: l + 1, strategy: RaStrategy::FullDedication, classes };
        let s = validate_scenario(&cfg).unwrap();
        let text = s.to_toml().unwrap();
        let back = Scenario::parse_toml(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn proportional_is_near_brute_force_optimum(g1 in 1.0f64..2000.0, g2 in 1.0f64..2000.0, l in 100u64..20_000) {
        // the equal-load rule is only optimal below one request per RAO
        prop_assume!((g1 + g2) < l as f64);
        let s = scenario(&[g1, g2], l);
        let prop_plan = proportional_allocation(&s).unwrap();
        let best = brute_force_optimal(&s).unwrap();
        let (dp, db) = (density_objective(&s, &prop_plan), density_objective(&s, &best));
        prop_assert!(db <= dp);
        prop_assert!((dp - db) / db < 1e-3, "proportional {} vs optimum {}", dp, db);
    }

    #[test]
    fn proportional_minimizes_cell_exponent(g1 in 1.0f64..2000.0, g2 in 1.0f64..2000.0, l in 100u64..5000) {
        let s = scenario(&[g1, g2], l);
        let best = brute_force_optimal_by(&s, Objective::CellCollisionExponent, u64::MAX).unwrap();
        let target = l as f64 * g1 / (g1 + g2);
        let l1 = best.get(1).unwrap() as f64;
        prop_assert!((l1 - target).abs() <= 1.0 || (target < 1.0 && l1 == 1.0) || (target > (l - 1) as f64 && l1 == (l - 1) as f64),
            "best L1 {} vs real target {}", l1, target);
    }

    #[test]
    fn reservation_is_tight(g in 0.01f64..5000.0, p in 0.001f64..0.999) {
        let l = reserve_for_collision_rate(g, p).unwrap();
        prop_assert!(simple_collision_rate(g, l as f64).unwrap() <= p);
        if l > 1 {
            prop_assert!(simple_collision_rate(g, (l - 1) as f64).unwrap() > p);
        }
    }

    #[test]
    fn delay_reservation_is_rate_reservation(g in 0.01f64..5000.0, t in 0.01f64..10.0, ratio in 1.001f64..100.0) {
        let d = t * ratio;
        let p = 1.0 - t / d;
        let by_delay = delay_bound(g, t, d).unwrap();
        let by_rate = collision_rate_bound(g, p).unwrap();
        prop_assert!((by_delay / by_rate - 1.0).abs() <= 1e-9);
        let (a, b) = (reserve_for_delay(g, t, d).unwrap(), reserve_for_collision_rate(g, p).unwrap());
        prop_assert!(a.abs_diff(b) <= 1);
    }

    #[test]
    fn reserve_and_divide_conserves(g in prop::collection::vec(1.0f64..500.0, 2..5), p in 0.01f64..0.5, l in 50_000u64..80_000) {
        let mut classes: Vec<ClassRecord> = g
            .iter()
            .enumerate()
            .map(|(i, d)| ClassRecord::with_density(i as u32 + 1, *d, 1.0))
            .collect();
        classes[0] = classes[0].clone().special(QosTarget::MaxCollisionRate(p));
        let s = validate_scenario(&ScenarioConfig { total_raos: l, strategy: RaStrategy::FullDedication, classes }).unwrap();
        let out = reserve_and_divide(&s).unwrap();
        prop_assert_eq!(out.plan.total(), l);
        prop_assert!(out.diagnostics[0].collision_rate <= p);
    }

    #[test]
    fn proportional_is_scale_invariant(g in densities(5), l in 5u64..20_000, k in -20i32..20) {
        let s = scenario(&g, l);
        let factor = 2f64.powi(k);
        let scaled: Vec<f64> = g.iter().map(|v| v * factor).collect();
        let t = scenario(&scaled, l);
        prop_assert_eq!(proportional_allocation(&s).unwrap(), proportional_allocation(&t).unwrap());
    }

    #[test]
    fn proportional_plan_sums_to_budget(g in densities(8), l in 8u64..100_000) {
        let s = scenario(&g, l);
        let plan = proportional_allocation(&s).unwrap();
        prop_assert_eq!(plan.total(), l);
        prop_assert!(plan.iter().all(|(_, v)| v >= 1));
        // every share within one RAO of its real target unless lifted by the floor
        let sum: f64 = g.iter().sum();
        for (i, c) in s.classes().iter().enumerate() {
            let target = l as f64 * g[i] / sum;
            let share = plan.get(c.id()).unwrap() as f64;
            prop_assert!((share - target).abs() < 1.0 + g.len() as f64 || share == 1.0);
        }
    }
}

#[test]
fn proportional_is_not_optimal_when_overloaded() {
    // 25 requests per RAO on average: the density optimum moves away from equal loads
    let s = scenario(&[503.05611132633334, 1991.4477135424188], 100);
    let prop_plan = proportional_allocation(&s).unwrap();
    let best = brute_force_optimal(&s).unwrap();
    let (dp, db) = (density_objective(&s, &prop_plan), density_objective(&s, &best));
    assert_ne!(prop_plan, best);
    assert!((dp - db) / db > 1e-3);
}

#[test]
fn non_power_of_two_scaling_keeps_table_plans() {
    for (g, l1) in [([50.0, 100.0], 3600), ([50.0, 500.0], 982), ([50.0, 1000.0], 514)] {
        for factor in [0.1, 0.3, 3.0, 7.0, 1e3] {
            let scaled = [g[0] * factor, g[1] * factor];
            assert_eq!(proportional_allocation(&scenario(&scaled, 10_800)).unwrap().get(1), Some(l1));
        }
    }
}

#[test]
fn partial_topology_ranges_parse_like_explicit_sets() {
    let a = SharingTopology::from_ranges(10, vec![(1, vec![RaoRange::new(0, 3), RaoRange::new(5, 7)])]).unwrap();
    let b = SharingTopology::new(10, vec![(1, vec![6, 0, 1, 2, 5])]).unwrap();
    assert_eq!(a, b);
}
