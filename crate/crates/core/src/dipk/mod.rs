//! Credal sets and their sequential updating: lower/upper envelopes,
//! elementwise updates, conditional bounds, cheap pre-update envelope
//! bounds, Hausdorff distances, and behavior classification.
//!
//! A credal set is represented by its finite generator list. Envelopes are
//! generator extrema: the unconditional envelope of the generators equals
//! the envelope of their convex hull and of its core, so nothing is lost at
//! the level of lower and upper probabilities. Conditional envelopes are
//! likewise taken over generators, which keeps them linear in the generator
//! count and sound for every bound below; [`corelp`] offers an exhaustive
//! core-level oracle on small spaces to measure the (conditional) gap.
//!
//! Two conditioning rules are provided. Generalized Bayes takes extrema of
//! the conditional ratio across generators. The geometric rule takes ratios
//! of unconditional envelope values, `lower(A∩E)/lower(E)` and
//! `upper(A∩E)/upper(E)`. Weighted over a new partition's pieces, the
//! generalized-Bayes sums bound the post-update envelopes from outside; the
//! geometric sums are tighter but bound only under a ratio-stationarity
//! assumption that [`geometric_jeffrey_bounds`] verifies after the fact.

pub mod corelp;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dpk::{jeffrey_update, StopReason, StopRule};
use crate::error::{DpkError, Result};
use crate::measure::{tv_distance, Event, ProbMeasure, StateSpace, ENUMERATION_LIMIT};
use crate::observation::{ObservationModel, Partition, PartitionMasses};
use std::sync::Arc;

/// Comparison tolerance for envelope and behavior comparisons.
pub const BEHAVIOR_EPS: f64 = 1e-12;

/// Largest atom count for which exhaustive event sweeps are attempted.
pub const SWEEP_LIMIT: usize = 12;

fn ge(a: f64, b: f64) -> bool {
    a >= b - BEHAVIOR_EPS
}

fn gt(a: f64, b: f64) -> bool {
    a > b + BEHAVIOR_EPS
}

/// Finite credal set: a nonempty list of generator measures on one space.
///
/// Duplicate generators are permitted; envelope extrema are unaffected by
/// them, so they are kept as given and merely flagged by
/// [`has_duplicate_generators`](Self::has_duplicate_generators).
#[derive(Debug, Clone, PartialEq)]
pub struct CredalSet {
    generators: Vec<ProbMeasure>,
    step_tag: usize,
}

impl CredalSet {
    pub fn new(generators: Vec<ProbMeasure>) -> Result<Self> {
        Self::with_step_tag(generators, 0)
    }

    pub fn with_step_tag(generators: Vec<ProbMeasure>, step_tag: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(DpkError::EmptyCredalSet);
        }
        let first = generators[0].clone();
        for g in &generators[1..] {
            if !first.same_space(g) {
                return Err(DpkError::SpaceMismatch);
            }
        }
        Ok(CredalSet { generators, step_tag })
    }

    pub fn generators(&self) -> &[ProbMeasure] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn step_tag(&self) -> usize {
        self.step_tag
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        self.generators[0].space()
    }

    /// Atom count of the underlying space.
    pub fn m(&self) -> usize {
        self.generators[0].m()
    }

    pub fn same_space(&self, other: &CredalSet) -> bool {
        self.generators[0].same_space(&other.generators[0])
    }

    pub fn has_duplicate_generators(&self) -> bool {
        for (i, a) in self.generators.iter().enumerate() {
            for b in self.generators.iter().skip(i + 1) {
                if a == b {
                    return true;
                }
            }
        }
        false
    }

    /// Lower envelope `min_g P_g(A)`.
    pub fn lower_prob(&self, event: &Event) -> Result<f64> {
        let mut best = f64::INFINITY;
        for g in &self.generators {
            best = best.min(g.prob(event)?);
        }
        Ok(best)
    }

    /// Upper envelope, computed as the conjugate `1 − lower(Aᶜ)` so that
    /// conjugacy holds exactly; it equals `max_g P_g(A)` up to rounding.
    pub fn upper_prob(&self, event: &Event) -> Result<f64> {
        let complement = event.complement(self.m());
        Ok(1.0 - self.lower_prob(&complement)?)
    }

    /// Direct maximum over generators (used for witness arithmetic).
    pub fn max_prob(&self, event: &Event) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for g in &self.generators {
            best = best.max(g.prob(event)?);
        }
        Ok(best)
    }
}

/// Credal engine state: the set, the current partition, and the step count.
#[derive(Debug, Clone)]
pub struct DipkState {
    pub set: CredalSet,
    pub partition: Partition,
    pub step: usize,
}

/// Trace of a credal run.
#[derive(Debug, Clone)]
pub struct DipkTrace {
    pub states: Vec<DipkState>,
    /// Hausdorff distance between consecutive sets, one per step.
    pub hausdorff_steps: Vec<f64>,
    pub stop_reason: StopReason,
}

impl DipkTrace {
    pub fn final_state(&self) -> &DipkState {
        self.states.last().expect("trace holds at least the initial state")
    }

    /// Hausdorff distance from each recorded set to the final set.
    pub fn hausdorff_to_final(&self) -> Result<Vec<f64>> {
        let last = &self.final_state().set;
        self.states.iter().map(|s| hausdorff(&s.set, last)).collect()
    }
}

/// Initial credal state: the generator set with the empty-observation
/// partition.
pub fn dipk_initial_state(set: CredalSet, model: &ObservationModel) -> Result<DipkState> {
    if set.m() != model.space().len() {
        return Err(DpkError::ShapeMismatch(format!(
            "credal set over {} atoms, model over {}",
            set.m(),
            model.space().len()
        )));
    }
    let partition = model.induce_partition::<&str>(&[])?;
    Ok(DipkState { set, partition, step: 0 })
}

/// One credal step: the partition is refined once and the mechanical masses
/// computed once; every generator is then updated against the same partition
/// and masses. All updated generators agree with the masses on partition
/// pieces, so the envelopes collapse to the mechanical value there.
pub fn dipk_step<S: AsRef<str>>(
    state: &DipkState,
    model: &ObservationModel,
    new_symbols: &[S],
) -> Result<DipkState> {
    let partition = model.refine_partition(&state.partition, new_symbols)?;
    let masses = model.mechanical_masses(&partition)?;
    let set = update_generators(&state.set, &partition, &masses)?;
    Ok(DipkState { set, partition, step: state.step + 1 })
}

/// Elementwise update of every generator against one partition and mass
/// assignment. Fails identifying the offending generator when one of them
/// nullifies a nonempty piece.
pub fn update_generators(
    set: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
) -> Result<CredalSet> {
    let mut updated = Vec::with_capacity(set.generator_count());
    for (index, g) in set.generators().iter().enumerate() {
        let next = jeffrey_update(g, partition, masses).map_err(|e| match e {
            DpkError::PriorNullBlock { block } => DpkError::PriorNullBlock {
                block: format!("{block} (generator {index})"),
            },
            other => other,
        })?;
        updated.push(next);
    }
    CredalSet::with_step_tag(updated, set.step_tag() + 1)
}

/// Runs a schedule of symbol batches over a credal set. Stopping mirrors the
/// precise engine, with the Hausdorff step distance in place of total
/// variation.
pub fn dipk_run<S: AsRef<str>>(
    set: CredalSet,
    model: &ObservationModel,
    schedule: &[Vec<S>],
    stop: &StopRule,
) -> Result<DipkTrace> {
    let budget = stop.budget.unwrap_or(10 * model.range_len());
    let mut states = vec![dipk_initial_state(set, model)?];
    let mut hausdorff_steps = Vec::new();

    if states[0].partition.is_terminal() {
        return Ok(DipkTrace { states, hausdorff_steps, stop_reason: StopReason::Terminal });
    }

    let mut stop_reason = StopReason::Budget;
    for batch in schedule {
        let previous = states.last().expect("nonempty");
        let next = dipk_step(previous, model, batch)?;
        let moved = hausdorff(&previous.set, &next.set)?;
        hausdorff_steps.push(moved);
        let terminal = next.partition.is_terminal();
        states.push(next);
        if terminal {
            stop_reason = StopReason::Terminal;
            break;
        }
        if moved < stop.tolerance {
            stop_reason = StopReason::Tolerance;
            break;
        }
        if states.len() > budget {
            stop_reason = StopReason::Budget;
            break;
        }
    }
    Ok(DipkTrace { states, hausdorff_steps, stop_reason })
}

/// Which conditioning rule produced a pair of bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsRule {
    GeneralizedBayes,
    Geometric,
}

/// Conditional lower/upper bounds under one rule.
///
/// Generalized-Bayes bounds always satisfy `lower ≤ upper`. Geometric bounds
/// are ratios of independently extremized envelope values and can invert
/// (`lower > upper`) when the minimizing and maximizing generators cross;
/// the values are reported as defined, without reordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalBounds {
    pub lower: f64,
    pub upper: f64,
    pub rule: BoundsRule,
}

/// Generalized-Bayes conditional envelope: extrema of `P(A | E)` over the
/// generators. The empty conditioning event yields `(0, 0)` by the same
/// convention as precise conditioning.
pub fn gen_bayes_bounds(set: &CredalSet, event: &Event, given: &Event) -> Result<ConditionalBounds> {
    if given.is_empty() {
        return Ok(ConditionalBounds { lower: 0.0, upper: 0.0, rule: BoundsRule::GeneralizedBayes });
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for (generator, g) in set.generators().iter().enumerate() {
        let ratio = g.cond_prob(event, given).map_err(|e| match e {
            DpkError::NullNonemptyConditioner => DpkError::NullConditioner { generator },
            other => other,
        })?;
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(ConditionalBounds { lower, upper, rule: BoundsRule::GeneralizedBayes })
}

/// Geometric conditional bounds: `lower(A∩E)/lower(E)` and
/// `upper(A∩E)/upper(E)`.
///
/// Requires a nonempty `E` with strictly positive lower envelope. The values
/// are at most one by construction; a violation is surfaced as an error
/// rather than clamped.
pub fn geometric_bounds(set: &CredalSet, event: &Event, given: &Event) -> Result<ConditionalBounds> {
    if given.is_empty() {
        return Err(DpkError::NullEnvelope);
    }
    let lower_e = set.lower_prob(given)?;
    if lower_e == 0.0 {
        return Err(DpkError::NullEnvelope);
    }
    let meet = event.intersect(given);
    let lower = set.lower_prob(&meet)? / lower_e;
    let upper = set.upper_prob(&meet)? / set.upper_prob(given)?;
    for value in [lower, upper] {
        if value > 1.0 {
            return Err(DpkError::UpperBoundExceedsOne(value));
        }
    }
    Ok(ConditionalBounds { lower, upper, rule: BoundsRule::Geometric })
}

/// Pre-update lower bound on the updated lower envelope:
/// `Σ_j lowerᴮ(A | E_j) · mass_j` over the new partition's pieces.
///
/// Computable without updating the credal set; empty pieces contribute zero.
pub fn jeffrey_lower_bound(
    set: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<f64> {
    weighted_gen_bayes_sum(set, partition, masses, event).map(|(lower, _)| lower)
}

/// Pre-update upper bound on the updated upper envelope (mirror of
/// [`jeffrey_lower_bound`]).
pub fn jeffrey_upper_bound(
    set: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<f64> {
    weighted_gen_bayes_sum(set, partition, masses, event).map(|(_, upper)| upper)
}

fn check_bound_shapes(partition: &Partition, masses: &PartitionMasses) -> Result<()> {
    if masses.block_masses().len() != partition.block_count() {
        return Err(DpkError::ShapeMismatch(format!(
            "{} block masses for {} blocks",
            masses.block_masses().len(),
            partition.block_count()
        )));
    }
    Ok(())
}

fn weighted_gen_bayes_sum(
    set: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<(f64, f64)> {
    check_bound_shapes(partition, masses)?;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (piece, mass) in partition.pieces().zip(masses.piece_masses()) {
        if piece.is_empty() {
            continue;
        }
        let bounds = gen_bayes_bounds(set, event, piece)?;
        lower += bounds.lower * mass;
        upper += bounds.upper * mass;
    }
    Ok((lower, upper))
}

/// Geometric analogue of the pre-update sums, plus the assumption check that
/// makes them valid envelope bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricJeffreySums {
    pub lower: f64,
    pub upper: f64,
    /// Whether the ratio-stationarity assumption
    /// `lowerₙ₊₁(A∩E_j)/lowerₙ₊₁(E_j) = lowerₙ(A∩E_j)/lowerₙ(E_j)` held for
    /// every event and piece after performing the actual update. Only when
    /// true do the geometric sums bound the updated envelopes.
    pub assumption_held: bool,
}

/// Weighted geometric sums `Σ_j lowerᴳ(A | E_j) · mass_j` (and the upper
/// mirror), together with the post-hoc ratio-stationarity flag.
///
/// The sums always tighten the generalized-Bayes sums inward; the flag is
/// verified exhaustively over all events, which limits the space to
/// [`SWEEP_LIMIT`] atoms.
pub fn geometric_jeffrey_bounds(
    set: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<GeometricJeffreySums> {
    check_bound_shapes(partition, masses)?;
    let m = set.m();
    if m > SWEEP_LIMIT {
        return Err(DpkError::BudgetExceeded(format!(
            "{m} atoms exceed the {SWEEP_LIMIT}-atom sweep limit for the stationarity check"
        )));
    }
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (piece, mass) in partition.pieces().zip(masses.piece_masses()) {
        if piece.is_empty() {
            continue;
        }
        let bounds = geometric_bounds(set, event, piece)?;
        lower += bounds.lower * mass;
        upper += bounds.upper * mass;
    }

    let updated = update_generators(set, partition, masses)?;
    let mut assumption_held = true;
    'outer: for mask in 0..(1u64 << m) {
        let a = Event::from_bitmask(mask, m);
        for piece in partition.pieces() {
            if piece.is_empty() {
                continue;
            }
            let meet = a.intersect(piece);
            let before_den = set.lower_prob(piece)?;
            let after_den = updated.lower_prob(piece)?;
            if before_den == 0.0 || after_den == 0.0 {
                assumption_held = false;
                break 'outer;
            }
            let before = set.lower_prob(&meet)? / before_den;
            let after = updated.lower_prob(&meet)? / after_den;
            if (before - after).abs() > 1e-9 {
                assumption_held = false;
                break 'outer;
            }
        }
    }
    Ok(GeometricJeffreySums { lower, upper, assumption_held })
}

/// Hausdorff distance between two credal sets under total variation:
/// the larger of the two directed max–min distances over generators.
pub fn hausdorff(a: &CredalSet, b: &CredalSet) -> Result<f64> {
    if !a.same_space(b) {
        return Err(DpkError::SpaceMismatch);
    }
    let directed = |from: &CredalSet, to: &CredalSet| -> Result<f64> {
        let mut worst = 0.0f64;
        for g in from.generators() {
            let mut nearest = f64::INFINITY;
            for h in to.generators() {
                nearest = nearest.min(tv_distance(g, h)?);
            }
            worst = worst.max(nearest);
        }
        Ok(worst)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

/// Envelope behavior of an update for one event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    Contracts,
    StrictlyContracts,
    Dilates,
    StrictlyDilates,
    SureLoss,
    None,
}

impl Behavior {
    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::Contracts => "contracts",
            Behavior::StrictlyContracts => "strictly_contracts",
            Behavior::Dilates => "dilates",
            Behavior::StrictlyDilates => "strictly_dilates",
            Behavior::SureLoss => "sure_loss",
            Behavior::None => "none",
        }
    }
}

/// The four envelope values behind a classification, plus the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorReport {
    pub event: Event,
    pub classification: Behavior,
    pub lower_before: f64,
    pub lower_after: f64,
    pub upper_before: f64,
    pub upper_after: f64,
}

/// Classifies how the envelope interval for `event` moved between two sets.
///
/// Contraction means the updated interval is nested inside the previous one,
/// dilation the reverse; sure loss means the intervals separated entirely.
/// When both nestings hold (all four values equal), the non-strict
/// contraction label wins. Comparisons use [`BEHAVIOR_EPS`].
pub fn classify_behavior(prev: &CredalSet, next: &CredalSet, event: &Event) -> Result<BehaviorReport> {
    if !prev.same_space(next) {
        return Err(DpkError::SpaceMismatch);
    }
    let lower_before = prev.lower_prob(event)?;
    let upper_before = prev.upper_prob(event)?;
    let lower_after = next.lower_prob(event)?;
    let upper_after = next.upper_prob(event)?;

    let classification = if gt(lower_after, upper_before) || gt(lower_before, upper_after) {
        Behavior::SureLoss
    } else if gt(lower_after, lower_before) && gt(upper_before, upper_after) {
        Behavior::StrictlyContracts
    } else if ge(lower_after, lower_before) && ge(upper_before, upper_after) {
        Behavior::Contracts
    } else if gt(lower_before, lower_after) && gt(upper_after, upper_before) {
        Behavior::StrictlyDilates
    } else if ge(lower_before, lower_after) && ge(upper_after, upper_before) {
        Behavior::Dilates
    } else {
        Behavior::None
    };

    Ok(BehaviorReport {
        event: event.clone(),
        classification,
        lower_before,
        lower_after,
        upper_before,
        upper_after,
    })
}

/// Result of a pre-update sufficiency test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sufficiency {
    /// The test's inequalities hold; the behavior is implied.
    Guaranteed,
    /// The test is inconclusive (the behavior may still occur).
    Unknown,
}

/// Sufficient contraction test using only pre-update quantities: guaranteed
/// when the generalized-Bayes sums already sit inside the current envelope
/// interval.
pub fn sufficient_contraction(
    prev: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<Sufficiency> {
    let (sum_lower, sum_upper) = weighted_gen_bayes_sum(prev, partition, masses, event)?;
    let lower_before = prev.lower_prob(event)?;
    let upper_before = prev.upper_prob(event)?;
    if ge(sum_lower, lower_before) && ge(upper_before, sum_upper) {
        Ok(Sufficiency::Guaranteed)
    } else {
        Ok(Sufficiency::Unknown)
    }
}

/// Sufficient sure-loss test: guaranteed when a generalized-Bayes sum
/// escapes the current envelope interval entirely.
pub fn sufficient_sure_loss(
    prev: &CredalSet,
    partition: &Partition,
    masses: &PartitionMasses,
    event: &Event,
) -> Result<Sufficiency> {
    let (sum_lower, sum_upper) = weighted_gen_bayes_sum(prev, partition, masses, event)?;
    let lower_before = prev.lower_prob(event)?;
    let upper_before = prev.upper_prob(event)?;
    if gt(sum_lower, upper_before) || gt(lower_before, sum_upper) {
        Ok(Sufficiency::Guaranteed)
    } else {
        Ok(Sufficiency::Unknown)
    }
}

fn check_witness(set: &CredalSet, index: usize) -> Result<&ProbMeasure> {
    set.generators()
        .get(index)
        .ok_or(DpkError::InvalidWitness { index, len: set.generator_count() })
}

/// Dilation witness test: indices address generators of the UPDATED set.
/// True when `lower_prev(A) ≥ P_s(A)` and `upper_prev(A) ≤ P_k(A)`, which
/// together imply (non-strict) dilation for `A`.
pub fn dilation_witness(
    prev: &CredalSet,
    next: &CredalSet,
    event: &Event,
    s_index: usize,
    k_index: usize,
) -> Result<bool> {
    let s = check_witness(next, s_index)?;
    let k = check_witness(next, k_index)?;
    let lower_before = prev.lower_prob(event)?;
    let upper_before = prev.upper_prob(event)?;
    Ok(ge(lower_before, s.prob(event)?) && ge(k.prob(event)?, upper_before))
}

/// Contraction witness test: indices address generators of the PREVIOUS
/// set. True when `lower_next(A) ≥ P_k(A)` and `upper_next(A) ≤ P_s(A)`,
/// which together imply (non-strict) contraction for `A`.
pub fn contraction_witness(
    prev: &CredalSet,
    next: &CredalSet,
    event: &Event,
    s_index: usize,
    k_index: usize,
) -> Result<bool> {
    let s = check_witness(prev, s_index)?;
    let k = check_witness(prev, k_index)?;
    let lower_after = next.lower_prob(event)?;
    let upper_after = next.upper_prob(event)?;
    Ok(ge(lower_after, k.prob(event)?) && ge(s.prob(event)?, upper_after))
}

/// Membership of a candidate measure in the core of the set's lower
/// envelope: the candidate must dominate the lower envelope on every
/// enumerated event.
///
/// `event_budget == 0` enumerates all `2^m` events (spaces up to
/// [`ENUMERATION_LIMIT`] atoms); a positive budget samples that many events
/// from a fixed-seed generator when full enumeration would be larger.
pub fn core_membership(
    set: &CredalSet,
    candidate: &ProbMeasure,
    event_budget: usize,
) -> Result<bool> {
    if !candidate.same_space(&set.generators()[0]) {
        return Err(DpkError::SpaceMismatch);
    }
    let m = set.m();
    let exhaustive_ok = m <= ENUMERATION_LIMIT;
    if event_budget == 0 && !exhaustive_ok {
        return Err(DpkError::BudgetExceeded(format!(
            "{m} atoms exceed the {ENUMERATION_LIMIT}-atom enumeration limit; pass an event budget"
        )));
    }
    let dominates = |event: &Event| -> Result<bool> {
        Ok(candidate.prob(event)? >= set.lower_prob(event)? - BEHAVIOR_EPS)
    };
    if event_budget == 0 || (exhaustive_ok && (1u128 << m) <= event_budget as u128) {
        for mask in 0..(1u64 << m) {
            if !dominates(&Event::from_bitmask(mask, m))? {
                return Ok(false);
            }
        }
    } else {
        let mut rng = StdRng::seed_from_u64(0x9e37_79b9 ^ (m as u64) << 32 ^ event_budget as u64);
        for _ in 0..event_budget {
            let mask: u64 = rng.random_range(0..(1u128 << m) as u64);
            if !dominates(&Event::from_bitmask(mask, m))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{convex_combine, StateSpace, VALUE_TOLERANCE};
    use crate::observation::ObservationModel;

    fn space4() -> Arc<StateSpace> {
        StateSpace::indexed(4)
    }

    fn pair_set() -> CredalSet {
        let space = space4();
        CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
            ProbMeasure::new(space, vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
        ])
        .unwrap()
    }

    fn four_bin_model() -> ObservationModel {
        let space = StateSpace::new(["a", "b", "c", "d"]).unwrap();
        ObservationModel::new(
            space,
            vec!["1".into(), "2".into(), "3".into(), "4".into()],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 8.0, 3.0 / 8.0],
            vec![Event::new([0]), Event::new([1]), Event::new([2]), Event::new([3])],
        )
        .unwrap()
    }

    #[test]
    fn singleton_set_envelopes_collapse() {
        let space = space4();
        let p = ProbMeasure::new(space, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let set = CredalSet::new(vec![p.clone()]).unwrap();
        let a = Event::new([0, 2]);
        let lo = set.lower_prob(&a).unwrap();
        let hi = set.upper_prob(&a).unwrap();
        assert!((lo - p.prob(&a).unwrap()).abs() <= VALUE_TOLERANCE);
        assert!((hi - lo).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn point_mass_pair_spans_unit_interval() {
        let space = space4();
        let set = CredalSet::new(vec![
            ProbMeasure::point_mass(space.clone(), 0).unwrap(),
            ProbMeasure::point_mass(space, 1).unwrap(),
        ])
        .unwrap();
        let a = Event::new([0]);
        assert_eq!(set.lower_prob(&a).unwrap(), 0.0);
        assert_eq!(set.upper_prob(&a).unwrap(), 1.0);
    }

    #[test]
    fn envelopes_match_exhaustive_enumeration() {
        let space = StateSpace::indexed(6);
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.3, 0.1, 0.15, 0.2, 0.05, 0.2]).unwrap(),
            ProbMeasure::new(space.clone(), vec![0.1, 0.25, 0.25, 0.1, 0.2, 0.1]).unwrap(),
            ProbMeasure::new(space, vec![0.05, 0.15, 0.3, 0.3, 0.1, 0.1]).unwrap(),
        ])
        .unwrap();
        for mask in 0..64u64 {
            let a = Event::from_bitmask(mask, 6);
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for g in set.generators() {
                let v = g.prob(&a).unwrap();
                min = min.min(v);
                max = max.max(v);
            }
            assert_eq!(set.lower_prob(&a).unwrap(), min);
            assert!((set.upper_prob(&a).unwrap() - max).abs() <= VALUE_TOLERANCE);
        }
    }

    #[test]
    fn conjugacy_is_exact() {
        let set = pair_set();
        for mask in 0..16u64 {
            let a = Event::from_bitmask(mask, 4);
            let upper = set.upper_prob(&a).unwrap();
            let conj = 1.0 - set.lower_prob(&a.complement(4)).unwrap();
            assert_eq!(upper, conj);
        }
    }

    #[test]
    fn gen_bayes_on_full_space_gives_envelopes() {
        let set = pair_set();
        let a = Event::new([1]);
        let bounds = gen_bayes_bounds(&set, &a, &Event::full(4)).unwrap();
        assert!((bounds.lower - set.lower_prob(&a).unwrap()).abs() <= VALUE_TOLERANCE);
        assert!((bounds.upper - set.max_prob(&a).unwrap()).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn gen_bayes_empty_conditioner_is_zero_pair() {
        let set = pair_set();
        let bounds = gen_bayes_bounds(&set, &Event::new([0]), &Event::empty()).unwrap();
        assert_eq!((bounds.lower, bounds.upper), (0.0, 0.0));
    }

    #[test]
    fn gen_bayes_matches_hand_ratios() {
        let set = pair_set();
        let a = Event::new([0]);
        let e = Event::new([0, 1]);
        let bounds = gen_bayes_bounds(&set, &a, &e).unwrap();
        assert!((bounds.lower - 1.0 / 3.0).abs() <= VALUE_TOLERANCE);
        assert!((bounds.upper - 4.0 / 7.0).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn gen_bayes_reports_null_generator() {
        let space = StateSpace::indexed(3);
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.5, 0.5, 0.0]).unwrap(),
            ProbMeasure::new(space, vec![0.5, 0.0, 0.5]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            gen_bayes_bounds(&set, &Event::new([0]), &Event::new([2])),
            Err(DpkError::NullConditioner { generator: 0 })
        ));
    }

    #[test]
    fn geometric_singleton_equals_cond_prob() {
        let space = space4();
        let p = ProbMeasure::new(space, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let set = CredalSet::new(vec![p.clone()]).unwrap();
        let a = Event::new([0]);
        let e = Event::new([0, 1]);
        let bounds = geometric_bounds(&set, &a, &e).unwrap();
        let exact = p.cond_prob(&a, &e).unwrap();
        assert!((bounds.lower - exact).abs() <= VALUE_TOLERANCE);
        assert!((bounds.upper - exact).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn geometric_superset_event_gives_lower_one() {
        let set = pair_set();
        let e = Event::new([1, 2]);
        let a = Event::new([0, 1, 2]);
        let bounds = geometric_bounds(&set, &a, &e).unwrap();
        assert!((bounds.lower - 1.0).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn geometric_null_envelope_errors() {
        let space = StateSpace::indexed(3);
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.5, 0.5, 0.0]).unwrap(),
            ProbMeasure::new(space, vec![0.0, 0.5, 0.5]).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            geometric_bounds(&set, &Event::new([1]), &Event::new([0])),
            Err(DpkError::NullEnvelope)
        ));
    }

    #[test]
    fn geometric_interval_can_invert_on_crossing_generators() {
        // The minimizing generator for A∩E and E need not coincide, so the
        // lower ratio can exceed the upper ratio. The values are reported as
        // defined; the generalized-Bayes interval still contains both.
        let space = StateSpace::indexed(3);
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.1, 0.1, 0.8]).unwrap(),
            ProbMeasure::new(space, vec![0.3, 0.6, 0.1]).unwrap(),
        ])
        .unwrap();
        let a = Event::new([0]);
        let e = Event::new([0, 1]);
        let geo = geometric_bounds(&set, &a, &e).unwrap();
        let gb = gen_bayes_bounds(&set, &a, &e).unwrap();
        assert!((geo.lower - 0.5).abs() <= VALUE_TOLERANCE);
        assert!((geo.upper - 1.0 / 3.0).abs() <= VALUE_TOLERANCE);
        assert!(geo.lower > geo.upper);
        // Outer chain links hold regardless.
        assert!(gb.lower <= geo.lower + BEHAVIOR_EPS);
        assert!(geo.upper <= gb.upper + BEHAVIOR_EPS);
    }

    #[test]
    fn dipk_singleton_reduces_to_dpk() {
        let model = four_bin_model();
        let prior =
            ProbMeasure::new(model.space().clone(), vec![0.125, 0.125, 0.5, 0.25]).unwrap();
        let set = CredalSet::new(vec![prior.clone()]).unwrap();
        let state = dipk_initial_state(set, &model).unwrap();
        let next = dipk_step(&state, &model, &["1"]).unwrap();

        let dpk_state = crate::dpk::initial_state(prior, &model).unwrap();
        let dpk_next = crate::dpk::dpk_step(&dpk_state, &model, &["1"]).unwrap();
        for (a, b) in next.set.generators()[0]
            .masses()
            .iter()
            .zip(dpk_next.measure.masses())
        {
            assert!((a - b).abs() <= VALUE_TOLERANCE);
        }
    }

    #[test]
    fn dipk_step_collapses_envelopes_on_blocks() {
        let model = four_bin_model();
        let space = model.space().clone();
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.125, 0.125, 0.5, 0.25]).unwrap(),
            ProbMeasure::new(space, vec![0.3, 0.3, 0.2, 0.2]).unwrap(),
        ])
        .unwrap();
        let state = dipk_initial_state(set, &model).unwrap();
        let next = dipk_step(&state, &model, &["1", "3"]).unwrap();
        let masses = model.mechanical_masses(&next.partition).unwrap();
        for (piece, mass) in next.partition.pieces().zip(masses.piece_masses()) {
            let lo = next.set.lower_prob(piece).unwrap();
            let hi = next.set.upper_prob(piece).unwrap();
            assert!((lo - mass).abs() <= VALUE_TOLERANCE);
            assert!((hi - mass).abs() <= VALUE_TOLERANCE);
        }
    }

    #[test]
    fn dipk_step_identifies_offending_generator() {
        let model = four_bin_model();
        let space = model.space().clone();
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
            ProbMeasure::new(space, vec![0.0, 0.5, 0.25, 0.25]).unwrap(),
        ])
        .unwrap();
        let state = dipk_initial_state(set, &model).unwrap();
        match dipk_step(&state, &model, &["1"]) {
            Err(DpkError::PriorNullBlock { block }) => assert!(block.contains("generator 1")),
            other => panic!("expected PriorNullBlock, got {other:?}"),
        }
    }

    #[test]
    fn jeffrey_bounds_equal_exact_value_for_singleton() {
        let model = four_bin_model();
        let prior =
            ProbMeasure::new(model.space().clone(), vec![0.125, 0.125, 0.5, 0.25]).unwrap();
        let set = CredalSet::new(vec![prior]).unwrap();
        let partition = model.induce_partition(&["1"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        let a = Event::new([2]);
        let lo = jeffrey_lower_bound(&set, &partition, &masses, &a).unwrap();
        let hi = jeffrey_upper_bound(&set, &partition, &masses, &a).unwrap();
        let updated = update_generators(&set, &partition, &masses).unwrap();
        let exact = updated.generators()[0].prob(&a).unwrap();
        assert!((lo - exact).abs() <= VALUE_TOLERANCE);
        assert!((hi - exact).abs() <= VALUE_TOLERANCE);
        assert!((exact - 10.0 / 21.0).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn geometric_sums_tighten_gen_bayes_sums() {
        let model = four_bin_model();
        let space = model.space().clone();
        let set = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.125, 0.125, 0.5, 0.25]).unwrap(),
            ProbMeasure::new(space, vec![0.25, 0.3, 0.25, 0.2]).unwrap(),
        ])
        .unwrap();
        let partition = model.induce_partition(&["2"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        for mask in 0..16u64 {
            let a = Event::from_bitmask(mask, 4);
            let geo = geometric_jeffrey_bounds(&set, &partition, &masses, &a).unwrap();
            let gb_lo = jeffrey_lower_bound(&set, &partition, &masses, &a).unwrap();
            let gb_hi = jeffrey_upper_bound(&set, &partition, &masses, &a).unwrap();
            assert!(geo.lower >= gb_lo - BEHAVIOR_EPS);
            assert!(geo.upper <= gb_hi + BEHAVIOR_EPS);
        }
    }

    #[test]
    fn geometric_sums_equal_exact_for_singleton_and_assumption_holds() {
        let model = four_bin_model();
        let prior =
            ProbMeasure::new(model.space().clone(), vec![0.125, 0.125, 0.5, 0.25]).unwrap();
        let set = CredalSet::new(vec![prior]).unwrap();
        let partition = model.induce_partition(&["1"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        let a = Event::new([2]);
        let geo = geometric_jeffrey_bounds(&set, &partition, &masses, &a).unwrap();
        let gb_lo = jeffrey_lower_bound(&set, &partition, &masses, &a).unwrap();
        assert!((geo.lower - gb_lo).abs() <= VALUE_TOLERANCE);
        assert!(geo.assumption_held);
    }

    #[test]
    fn hausdorff_identical_sets_is_zero() {
        let set = pair_set();
        assert_eq!(hausdorff(&set, &set).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_singletons_is_tv() {
        let space = space4();
        let p = ProbMeasure::new(space.clone(), vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let q = ProbMeasure::new(space, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = CredalSet::new(vec![p.clone()]).unwrap();
        let b = CredalSet::new(vec![q.clone()]).unwrap();
        assert_eq!(hausdorff(&a, &b).unwrap(), tv_distance(&p, &q).unwrap());
    }

    #[test]
    fn classify_identity_update_as_nonstrict_contraction() {
        let set = pair_set();
        let report = classify_behavior(&set, &set, &Event::new([0, 1])).unwrap();
        assert_eq!(report.classification, Behavior::Contracts);
    }

    #[test]
    fn classify_detects_sure_loss() {
        let space = StateSpace::indexed(2);
        let prev = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.05, 0.95]).unwrap(),
            ProbMeasure::new(space.clone(), vec![0.1, 0.9]).unwrap(),
        ])
        .unwrap();
        let next = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.8, 0.2]).unwrap(),
            ProbMeasure::new(space, vec![0.9, 0.1]).unwrap(),
        ])
        .unwrap();
        let report = classify_behavior(&prev, &next, &Event::new([0])).unwrap();
        assert_eq!(report.classification, Behavior::SureLoss);
    }

    #[test]
    fn classify_detects_strict_dilation() {
        let space = StateSpace::indexed(2);
        let prev = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.4, 0.6]).unwrap(),
            ProbMeasure::new(space.clone(), vec![0.5, 0.5]).unwrap(),
        ])
        .unwrap();
        let next = CredalSet::new(vec![
            ProbMeasure::new(space.clone(), vec![0.2, 0.8]).unwrap(),
            ProbMeasure::new(space, vec![0.7, 0.3]).unwrap(),
        ])
        .unwrap();
        let report = classify_behavior(&prev, &next, &Event::new([0])).unwrap();
        assert_eq!(report.classification, Behavior::StrictlyDilates);
    }

    #[test]
    fn witnesses_degenerate_to_equalities_on_identity() {
        let set = pair_set();
        let a = Event::new([0]);
        // With next == prev, picking the extremal generators as witnesses
        // turns both hypotheses into equalities. Dilation wants s at the
        // lower envelope and k at the upper; contraction the reverse.
        assert!(dilation_witness(&set, &set, &a, 1, 0).unwrap());
        assert!(contraction_witness(&set, &set, &a, 0, 1).unwrap());
    }

    #[test]
    fn witness_rejects_bad_index() {
        let set = pair_set();
        assert!(matches!(
            dilation_witness(&set, &set, &Event::new([0]), 5, 0),
            Err(DpkError::InvalidWitness { index: 5, len: 2 })
        ));
    }

    #[test]
    fn witness_hypotheses_can_fail() {
        let set = pair_set();
        let a = Event::new([0]);
        // Reversed roles: generator 0 has the maximal value on A, so the
        // dilation hypotheses fail.
        assert!(!dilation_witness(&set, &set, &a, 0, 1).unwrap());
    }

    #[test]
    fn core_membership_accepts_generators_and_mixtures() {
        let set = pair_set();
        for g in set.generators() {
            assert!(core_membership(&set, g, 0).unwrap());
        }
        let mix = convex_combine(&[0.3, 0.7], set.generators()).unwrap();
        assert!(core_membership(&set, &mix, 0).unwrap());
    }

    #[test]
    fn core_membership_rejects_violator() {
        let set = pair_set();
        // Dips below the lower envelope on atom 3 (envelope 0.1).
        let candidate =
            ProbMeasure::new(set.space().clone(), vec![0.5, 0.3, 0.15, 0.05]).unwrap();
        assert!(!core_membership(&set, &candidate, 0).unwrap());
    }

    #[test]
    fn sufficiency_guaranteed_for_singleton_identity_masses() {
        let model = four_bin_model();
        let prior =
            ProbMeasure::new(model.space().clone(), vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 8.0, 3.0 / 8.0])
                .unwrap();
        let set = CredalSet::new(vec![prior]).unwrap();
        let partition = model.induce_partition(&["1", "2", "3", "4"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        let a = Event::new([1, 2]);
        // Masses equal the prior's block probabilities: the bound sums land
        // exactly on the prior envelope, so weak contraction is guaranteed.
        assert_eq!(
            sufficient_contraction(&set, &partition, &masses, &a).unwrap(),
            Sufficiency::Guaranteed
        );
    }

    #[test]
    fn duplicate_generators_flagged() {
        let space = space4();
        let p = ProbMeasure::uniform(space);
        let set = CredalSet::new(vec![p.clone(), p]).unwrap();
        assert!(set.has_duplicate_generators());
    }
}
