//! Finite state spaces, events, probability measures, conditioning, and
//! total-variation distance.
//!
//! The state space is a finite ordered list of labelled atoms and the event
//! algebra is its full power set, so every supremum or infimum over events is
//! exactly computable. Conditional probability follows the convention that
//! conditioning on the empty event yields zero, while conditioning on a
//! nonempty event of probability zero is an error.

use std::sync::Arc;

use crate::error::{DpkError, Result};

/// Construction tolerance: mass vectors and convex weights must sum to one
/// within this bound before being accepted (and rescaled).
pub const MASS_SUM_TOLERANCE: f64 = 1e-9;

/// Comparison tolerance used when checking values against exact rationals.
pub const VALUE_TOLERANCE: f64 = 1e-12;

/// Largest atom count for which full event enumeration (2^m events) is
/// allowed in brute-force oracles.
pub const ENUMERATION_LIMIT: usize = 20;

/// Finite state space: an ordered list of distinct atom labels.
///
/// The canonical identity of an atom is its index; labels exist for
/// configuration and reporting. Spaces are shared behind an [`Arc`] so that
/// measures can be cheaply tagged with the space they live on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    /// Builds a space from distinct labels. Errors when labels are empty or
    /// repeat.
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(DpkError::InvalidSpace("atom list is empty".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(DpkError::InvalidSpace(format!("duplicate atom label `{a}`")));
                }
            }
        }
        Ok(Arc::new(StateSpace { labels }))
    }

    /// Space with `m` atoms labelled `"0"`, `"1"`, ….
    pub fn indexed(m: usize) -> Arc<Self> {
        Self::new((0..m).map(|i| i.to_string())).expect("indexed labels are distinct")
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Event: a set of atom indices in canonical form (sorted, duplicate-free).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    indices: Vec<usize>,
}

impl Event {
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Event { indices }
    }

    pub fn empty() -> Self {
        Event { indices: Vec::new() }
    }

    /// The full event `{0, …, m−1}`.
    pub fn full(m: usize) -> Self {
        Event { indices: (0..m).collect() }
    }

    /// Event from the low `m` bits of a mask; bit `i` selects atom `i`.
    pub fn from_bitmask(mask: u64, m: usize) -> Self {
        Event { indices: (0..m).filter(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }

    pub fn complement(&self, m: usize) -> Event {
        Event { indices: (0..m).filter(|i| !self.contains(*i)).collect() }
    }

    pub fn intersect(&self, other: &Event) -> Event {
        Event { indices: self.indices.iter().copied().filter(|i| other.contains(*i)).collect() }
    }

    pub fn union(&self, other: &Event) -> Event {
        let mut indices = self.indices.clone();
        indices.extend_from_slice(&other.indices);
        Event::new(indices)
    }

    pub fn minus(&self, other: &Event) -> Event {
        Event { indices: self.indices.iter().copied().filter(|i| !other.contains(*i)).collect() }
    }

    pub fn is_subset_of(&self, other: &Event) -> bool {
        self.indices.iter().all(|i| other.contains(*i))
    }

    pub fn is_disjoint_from(&self, other: &Event) -> bool {
        self.indices.iter().all(|i| !other.contains(*i))
    }

    fn check_within(&self, m: usize) -> Result<()> {
        match self.max_index() {
            Some(index) if index >= m => Err(DpkError::InvalidEvent { index, m }),
            _ => Ok(()),
        }
    }
}

/// Probability measure: a dense nonnegative mass vector over the atoms of a
/// finite state space.
///
/// Construction validates that masses are nonnegative and sum to one within
/// [`MASS_SUM_TOLERANCE`], then rescales so the stored vector sums to one up
/// to rounding. All operations are pure; values are immutable and freely
/// shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMeasure {
    space: Arc<StateSpace>,
    masses: Vec<f64>,
}

impl ProbMeasure {
    pub fn new(space: Arc<StateSpace>, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != space.len() {
            return Err(DpkError::InvalidMeasure(format!(
                "mass vector has {} entries for {} atoms",
                masses.len(),
                space.len()
            )));
        }
        for (i, &v) in masses.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(DpkError::InvalidMeasure(format!("mass {v} at atom {i}")));
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(DpkError::InvalidMeasure(format!("masses sum to {sum}")));
        }
        let masses = if sum == 1.0 {
            masses
        } else {
            masses.into_iter().map(|v| v / sum).collect()
        };
        Ok(ProbMeasure { space, masses })
    }

    /// Uniform measure.
    pub fn uniform(space: Arc<StateSpace>) -> Self {
        let m = space.len();
        ProbMeasure { space, masses: vec![1.0 / m as f64; m] }
    }

    /// Point mass on one atom.
    pub fn point_mass(space: Arc<StateSpace>, atom: usize) -> Result<Self> {
        if atom >= space.len() {
            return Err(DpkError::InvalidEvent { index: atom, m: space.len() });
        }
        let mut masses = vec![0.0; space.len()];
        masses[atom] = 1.0;
        Ok(ProbMeasure { space, masses })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Atom count of the underlying space.
    pub fn m(&self) -> usize {
        self.masses.len()
    }

    pub fn same_space(&self, other: &ProbMeasure) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space == other.space
    }

    /// `P(A)` by finite additivity: the sum of atom masses over `A`.
    pub fn prob(&self, event: &Event) -> Result<f64> {
        event.check_within(self.m())?;
        Ok(event.indices().iter().map(|&i| self.masses[i]).sum())
    }

    /// Conditional probability `P(A | E)`.
    ///
    /// Returns zero when `E` is empty. A nonempty `E` of probability zero is
    /// a [`DpkError::NullNonemptyConditioner`] error: the defining ratio is
    /// undefined there, and no convention covers it.
    pub fn cond_prob(&self, event: &Event, given: &Event) -> Result<f64> {
        event.check_within(self.m())?;
        if given.is_empty() {
            return Ok(0.0);
        }
        let pe = self.prob(given)?;
        if pe == 0.0 {
            return Err(DpkError::NullNonemptyConditioner);
        }
        Ok(self.prob(&event.intersect(given))? / pe)
    }
}

/// Total variation distance `sup_A |P(A) − Q(A)|`, computed as half the L1
/// distance of the mass vectors.
pub fn tv_distance(p: &ProbMeasure, q: &ProbMeasure) -> Result<f64> {
    if !p.same_space(q) {
        return Err(DpkError::SpaceMismatch);
    }
    let l1: f64 = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(0.5 * l1)
}

/// Brute-force total variation: the maximum of `|P(A) − Q(A)|` over all 2^m
/// events. Testing oracle for [`tv_distance`]; rejects spaces with more than
/// [`ENUMERATION_LIMIT`] atoms.
pub fn tv_distance_bruteforce(p: &ProbMeasure, q: &ProbMeasure) -> Result<f64> {
    if !p.same_space(q) {
        return Err(DpkError::SpaceMismatch);
    }
    let m = p.m();
    if m > ENUMERATION_LIMIT {
        return Err(DpkError::BudgetExceeded(format!(
            "{m} atoms exceed the {ENUMERATION_LIMIT}-atom enumeration limit"
        )));
    }
    let mut best = 0.0f64;
    for mask in 0..(1u64 << m) {
        let event = Event::from_bitmask(mask, m);
        let d = (p.prob(&event)? - q.prob(&event)?).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// Componentwise convex combination of measures on a shared space.
pub fn convex_combine(weights: &[f64], measures: &[ProbMeasure]) -> Result<ProbMeasure> {
    if weights.len() != measures.len() || measures.is_empty() {
        return Err(DpkError::InvalidWeights(format!(
            "{} weights for {} measures",
            weights.len(),
            measures.len()
        )));
    }
    for &w in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(DpkError::InvalidWeights(format!("weight {w}")));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
        return Err(DpkError::InvalidWeights(format!("weights sum to {sum}")));
    }
    let first = &measures[0];
    for other in &measures[1..] {
        if !first.same_space(other) {
            return Err(DpkError::SpaceMismatch);
        }
    }
    let mut masses = vec![0.0; first.m()];
    for (w, measure) in weights.iter().zip(measures) {
        for (out, &v) in masses.iter_mut().zip(measure.masses()) {
            *out += w * v;
        }
    }
    ProbMeasure::new(first.space().clone(), masses)
}
