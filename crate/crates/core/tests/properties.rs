//! Property suites for the library invariants: measure axioms, partition
//! refinement, posterior validity, envelope conjugacy, and reduction of the
//! credal engine to the precise one.

mod common;

use common::*;
use dpk_core::dipk::update_generators;
use dpk_core::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const EPS: f64 = 1e-12;

fn measure_from(raw: &[f64]) -> ProbMeasure {
    let space = StateSpace::indexed(raw.len());
    let total: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|v| v / total).collect();
    ProbMeasure::new(space, masses).unwrap()
}

fn two_measures(raw_p: &[f64], raw_q: &[f64]) -> (ProbMeasure, ProbMeasure) {
    let p = measure_from(raw_p);
    let q = ProbMeasure::new(p.space().clone(), {
        let total: f64 = raw_q.iter().sum();
        raw_q.iter().map(|v| v / total).collect()
    })
    .unwrap();
    (p, q)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn additivity_on_disjoint_events(
        raw in proptest::collection::vec(0.001f64..1.0, 2..=10),
        mask_a in any::<u64>(),
        mask_b in any::<u64>(),
    ) {
        let p = measure_from(&raw);
        let m = p.m();
        let a = Event::from_bitmask(mask_a & ((1 << m) - 1), m);
        let b = Event::from_bitmask(mask_b & ((1 << m) - 1), m).minus(&a);
        let union = a.union(&b);
        let sum = p.prob(&a).unwrap() + p.prob(&b).unwrap();
        prop_assert!((p.prob(&union).unwrap() - sum).abs() <= EPS);
    }

    #[test]
    fn tv_matches_bruteforce(
        raw_p in proptest::collection::vec(0.001f64..1.0, 2..=9),
        seed in any::<u64>(),
    ) {
        let p = measure_from(&raw_p);
        let mut rng = StdRng::seed_from_u64(seed);
        let q = random_measure(&mut rng, p.space(), 0.001);
        let fast = tv_distance(&p, &q).unwrap();
        let brute = tv_distance_bruteforce(&p, &q).unwrap();
        prop_assert!((fast - brute).abs() <= EPS);
    }

    #[test]
    fn tv_metric_axioms(
        raw_p in proptest::collection::vec(0.001f64..1.0, 4),
        raw_q in proptest::collection::vec(0.001f64..1.0, 4),
        raw_r in proptest::collection::vec(0.001f64..1.0, 4),
    ) {
        let (p, q) = two_measures(&raw_p, &raw_q);
        let r = ProbMeasure::new(p.space().clone(), {
            let total: f64 = raw_r.iter().sum();
            raw_r.iter().map(|v| v / total).collect()
        }).unwrap();
        let pq = tv_distance(&p, &q).unwrap();
        let qp = tv_distance(&q, &p).unwrap();
        prop_assert_eq!(pq, qp);
        prop_assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        let pr = tv_distance(&p, &r).unwrap();
        let rq = tv_distance(&r, &q).unwrap();
        prop_assert!(pq <= pr + rq + EPS);
        if pq == 0.0 {
            for (a, b) in p.masses().iter().zip(q.masses()) {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn conditional_is_normalized_on_conditioner(
        raw in proptest::collection::vec(0.001f64..1.0, 2..=10),
        mask in any::<u64>(),
    ) {
        let p = measure_from(&raw);
        let m = p.m();
        let e = Event::from_bitmask(mask & ((1 << m) - 1), m);
        if !e.is_empty() {
            prop_assert!((p.cond_prob(&e, &e).unwrap() - 1.0).abs() <= EPS);
        }
    }

    #[test]
    fn partition_masses_total_one_and_refinement(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=10);
        let space = StateSpace::indexed(m);
        let n_symbols = rng.random_range(1..=m.min(6));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let first = rng.random_range(1..=n_symbols);
        let symbols: Vec<String> = model.symbols().iter().take(first).cloned().collect();
        let partition = model.induce_partition(&symbols).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        prop_assert!((masses.total() - 1.0).abs() <= EPS);
        prop_assert_eq!(partition.is_terminal(), masses.remainder_mass() == 0.0);

        let rest: Vec<String> = model.symbols().iter().skip(first).cloned().collect();
        if !rest.is_empty() {
            let refined = model.refine_partition(&partition, &rest).unwrap();
            prop_assert!(refined.refines(&partition));
            // Mutual refinement only when the pieces coincide (the sole new
            // block equal to the old remainder).
            if partition.refines(&refined) {
                let nonempty = |p: &Partition| -> Vec<Event> {
                    p.pieces().filter(|e| !e.is_empty()).cloned().collect()
                };
                let mut a = nonempty(&partition);
                let mut b = nonempty(&refined);
                a.sort_by(|x, y| x.indices().cmp(y.indices()));
                b.sort_by(|x, y| x.indices().cmp(y.indices()));
                prop_assert_eq!(a, b);
            }
        }

        // Deduplication: repeating the observations changes nothing.
        let mut doubled = symbols.clone();
        doubled.extend(symbols.iter().cloned());
        prop_assert_eq!(model.induce_partition(&doubled).unwrap(), partition);
    }

    #[test]
    fn posterior_is_valid_measure(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=10);
        let space = StateSpace::indexed(m);
        let n_symbols = rng.random_range(1..=m.min(6));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let prior = random_measure(&mut rng, &space, 0.01);
        let observe = rng.random_range(1..=n_symbols);
        let symbols: Vec<String> = model.symbols().iter().take(observe).cloned().collect();
        let partition = model.induce_partition(&symbols).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        let posterior = jeffrey_update(&prior, &partition, &masses).unwrap();

        let total: f64 = posterior.masses().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        prop_assert!(posterior.masses().iter().all(|&v| v >= 0.0));
        prop_assert!(check_jeffrey_condition(&prior, &posterior, &partition));
        for (piece, mass) in partition.pieces().zip(masses.piece_masses()) {
            prop_assert!((posterior.prob(piece).unwrap() - mass).abs() <= EPS);
            prop_assert_eq!(posterior.prob(piece).unwrap() == 0.0, piece.is_empty());
        }
    }

    #[test]
    fn run_partitions_are_monotone_refinements(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=8);
        let space = StateSpace::indexed(m);
        let n_symbols = rng.random_range(2..=m.min(5));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let prior = random_measure(&mut rng, &space, 0.01);
        let schedule = random_full_schedule(&mut rng, &model);
        let trace = dpk_run(prior, &model, &schedule, &StopRule::default()).unwrap();
        prop_assert_eq!(trace.stop_reason, StopReason::Terminal);
        for later in 1..trace.states.len() {
            for earlier in 0..later {
                prop_assert!(trace.states[later]
                    .partition
                    .refines(&trace.states[earlier].partition));
            }
        }
        // Terminal stabilization: replaying an empty batch moves nothing.
        let idle = dpk_step::<&str>(trace.final_state(), &model, &[]).unwrap();
        prop_assert!(tv_distance(&idle.measure, &trace.final_state().measure).unwrap() <= EPS);
    }

    #[test]
    fn envelope_conjugacy_and_hull_agreement(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(1..=5);
        let space = StateSpace::indexed(m);
        let set = random_credal_set(&mut rng, &space, k);

        // Append random convex combinations; envelopes must not move.
        let mut extended = set.generators().to_vec();
        for _ in 0..3 {
            let weights = random_masses(&mut rng, k, 0.01);
            extended.push(convex_combine(&weights, set.generators()).unwrap());
        }
        let hull = CredalSet::new(extended).unwrap();

        for _ in 0..16 {
            let a = random_event(&mut rng, m);
            let upper = set.upper_prob(&a).unwrap();
            prop_assert_eq!(upper, 1.0 - set.lower_prob(&a.complement(m)).unwrap());
            prop_assert!((set.lower_prob(&a).unwrap() - hull.lower_prob(&a).unwrap()).abs() <= EPS);
            prop_assert!((upper - hull.upper_prob(&a).unwrap()).abs() <= EPS);
            prop_assert!(core_membership(&set, &hull.generators()[hull.generator_count() - 1], 64).unwrap());
        }
    }

    #[test]
    fn singleton_credal_run_reduces_to_precise_run(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=8);
        let space = StateSpace::indexed(m);
        let n_symbols = rng.random_range(1..=m.min(5));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let prior = random_measure(&mut rng, &space, 0.01);
        let schedule = random_full_schedule(&mut rng, &model);

        let precise = dpk_run(prior.clone(), &model, &schedule, &StopRule::default()).unwrap();
        let credal = dipk_run(
            CredalSet::new(vec![prior]).unwrap(),
            &model,
            &schedule,
            &StopRule::default(),
        )
        .unwrap();
        prop_assert_eq!(precise.states.len(), credal.states.len());
        for (ds, cs) in precise.states.iter().zip(&credal.states) {
            let g = &cs.set.generators()[0];
            for (a, b) in ds.measure.masses().iter().zip(g.masses()) {
                prop_assert!((a - b).abs() <= EPS);
            }
        }
        for (tv, hd) in precise.tv_steps.iter().zip(&credal.hausdorff_steps) {
            prop_assert!((tv - hd).abs() <= EPS);
        }
    }

    #[test]
    fn credal_update_agrees_with_elementwise_precise_updates(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(2..=8);
        let k = rng.random_range(2..=4);
        let space = StateSpace::indexed(m);
        let set = random_credal_set(&mut rng, &space, k);
        let n_symbols = rng.random_range(1..=m.min(5));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let observe = rng.random_range(1..=n_symbols);
        let symbols: Vec<String> = model.symbols().iter().take(observe).cloned().collect();
        let partition = model.induce_partition(&symbols).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();

        let updated = update_generators(&set, &partition, &masses).unwrap();
        for (g, u) in set.generators().iter().zip(updated.generators()) {
            let alone = jeffrey_update(g, &partition, &masses).unwrap();
            for (a, b) in alone.masses().iter().zip(u.masses()) {
                prop_assert_eq!(a, b);
            }
        }
        // Updated envelopes collapse to the masses on partition pieces.
        for (piece, mass) in partition.pieces().zip(masses.piece_masses()) {
            prop_assert!((updated.lower_prob(piece).unwrap() - mass).abs() <= EPS);
            prop_assert!((updated.upper_prob(piece).unwrap() - mass).abs() <= EPS);
        }
    }

    #[test]
    fn coarsening_commutes_with_mass_aggregation(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = rng.random_range(3..=10);
        let space = StateSpace::indexed(m);
        let n_symbols = rng.random_range(2..=m.min(6));
        let model = random_covering_model(&mut rng, &space, n_symbols);
        let observe = rng.random_range(2..=n_symbols);
        let symbols: Vec<String> = model.symbols().iter().take(observe).cloned().collect();
        let fine = model.induce_partition(&symbols).unwrap();
        let fine_masses = model.mechanical_masses(&fine).unwrap();

        // Random grouping of the observed blocks.
        let n_groups = rng.random_range(1..=fine.block_count());
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
        for block in 0..fine.block_count() {
            groups[rng.random_range(0..n_groups)].push(block);
        }
        groups.retain(|g| !g.is_empty());
        let map = CoarseningMap::new(groups, fine.block_count()).unwrap();

        let coarse = coarsen_partition(&fine, &map).unwrap();
        let coarse_masses = coarsen_masses(&fine_masses, &map).unwrap();
        prop_assert!(fine.refines(&coarse));
        prop_assert!((coarse_masses.total() - 1.0).abs() <= EPS);
        for (group, mass) in map.groups().iter().zip(coarse_masses.block_masses()) {
            let summed: f64 = group.iter().map(|&b| fine_masses.block_masses()[b]).sum();
            prop_assert!((mass - summed).abs() <= EPS);
        }
    }
}
