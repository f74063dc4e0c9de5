//! Shared instance generators for the integration and acceptance suites.
//!
//! Everything is driven by a caller-supplied seeded generator so that suites
//! are deterministic run to run.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;

use dpk_core::{CredalSet, Event, ObservationModel, ProbMeasure, StateSpace};

/// Random positive mass vector summing to one, each entry at least
/// `min / (m * max)` of the total.
pub fn random_masses(rng: &mut StdRng, m: usize, min: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(min..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random strictly positive measure.
pub fn random_measure(rng: &mut StdRng, space: &Arc<StateSpace>, min: f64) -> ProbMeasure {
    ProbMeasure::new(space.clone(), random_masses(rng, space.len(), min)).unwrap()
}

/// Random credal set of `k` strictly positive generators.
pub fn random_credal_set(rng: &mut StdRng, space: &Arc<StateSpace>, k: usize) -> CredalSet {
    CredalSet::new((0..k).map(|_| random_measure(rng, space, 0.02)).collect()).unwrap()
}

/// Random observation model whose preimages partition the whole space:
/// every atom is assigned to one of `n_symbols` symbols, each symbol
/// nonempty, pmf random and strictly positive.
pub fn random_covering_model(
    rng: &mut StdRng,
    space: &Arc<StateSpace>,
    n_symbols: usize,
) -> ObservationModel {
    let m = space.len();
    assert!(n_symbols >= 1 && n_symbols <= m);
    // Surjective assignment: seed each symbol with one atom, then spread.
    let mut owner: Vec<usize> = (0..m).map(|_| rng.random_range(0..n_symbols)).collect();
    let mut atoms: Vec<usize> = (0..m).collect();
    for symbol in 0..n_symbols {
        let slot = rng.random_range(0..atoms.len());
        let atom = atoms.swap_remove(slot);
        owner[atom] = symbol;
    }
    let preimages: Vec<Event> = (0..n_symbols)
        .map(|s| Event::new(owner.iter().enumerate().filter(|(_, &o)| o == s).map(|(i, _)| i)))
        .collect();
    let symbols: Vec<String> = (0..n_symbols).map(|s| format!("s{s}")).collect();
    let pmf = random_masses(rng, n_symbols, 0.05);
    ObservationModel::new(space.clone(), symbols, pmf, preimages).unwrap()
}

/// Random observation order of all symbols, chopped into nonempty batches.
pub fn random_full_schedule(rng: &mut StdRng, model: &ObservationModel) -> Vec<Vec<String>> {
    let mut order: Vec<String> = model.symbols().to_vec();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut schedule = Vec::new();
    let mut rest = order.as_slice();
    while !rest.is_empty() {
        let take = rng.random_range(1..=rest.len());
        schedule.push(rest[..take].to_vec());
        rest = &rest[take..];
    }
    schedule
}

/// Random event over `m` atoms.
pub fn random_event(rng: &mut StdRng, m: usize) -> Event {
    Event::from_bitmask(rng.random_range(0..(1u128 << m) as u64), m)
}
