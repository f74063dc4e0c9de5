//! Exhaustive core-level conditional bounds on small spaces.
//!
//! The core of a lower envelope is the polytope of all measures dominating
//! it on every event. Unconditional envelopes of the core coincide with the
//! generator envelopes, but conditional extrema over the core can be wider
//! than the generator-based ones. This oracle computes them exactly by
//! turning the linear-fractional program
//!
//! ```text
//! extremize  P(A∩E) / P(E)
//! subject to P(B) ≥ lower(B)  for every event B,  P(Ω) = 1,  P ≥ 0
//! ```
//!
//! into a linear program (scale the measure by `t = 1/P(E)`), with one
//! dominance constraint per event. The 2^m constraint matrix limits this to
//! small spaces; it exists to measure the generator-vs-core gap, not to run
//! in the update path.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{BoundsRule, ConditionalBounds, CredalSet};
use crate::error::{DpkError, Result};
use crate::measure::Event;

/// Largest atom count accepted by the core LP oracle.
pub const CORE_LP_LIMIT: usize = 10;

fn solve_direction(
    set: &CredalSet,
    event: &Event,
    given: &Event,
    direction: OptimizationDirection,
) -> Result<f64> {
    let m = set.m();
    let mut problem = Problem::new(direction);
    let meet = event.intersect(given);

    let vars: Vec<_> = (0..m)
        .map(|i| problem.add_var(if meet.contains(i) { 1.0 } else { 0.0 }, (0.0, f64::INFINITY)))
        .collect();
    let t = problem.add_var(0.0, (0.0, f64::INFINITY));

    // Dominance on every proper nonempty event: P(B) ≥ lower(B), scaled.
    for mask in 1..(1u64 << m) - 1 {
        let b = Event::from_bitmask(mask, m);
        let lower = set.lower_prob(&b)?;
        let mut terms: Vec<_> = b.indices().iter().map(|&i| (vars[i], 1.0)).collect();
        terms.push((t, -lower));
        problem.add_constraint(terms, ComparisonOp::Ge, 0.0);
    }
    // Normalization P(Ω) = 1, scaled: Σ y = t.
    let mut total: Vec<_> = vars.iter().map(|&v| (v, 1.0)).collect();
    total.push((t, -1.0));
    problem.add_constraint(total, ComparisonOp::Eq, 0.0);
    // The scaling pins the denominator: Σ_{i∈E} y_i = 1.
    let denom: Vec<_> = given.indices().iter().map(|&i| (vars[i], 1.0)).collect();
    problem.add_constraint(denom, ComparisonOp::Eq, 1.0);

    let solution = problem
        .solve()
        .map_err(|e| DpkError::LpFailure(e.to_string()))?
        .into_solution()
        .map_err(|_| DpkError::LpFailure("interrupted before a solution".into()))?;
    Ok(solution.objective().clamp(0.0, 1.0))
}

/// Conditional lower/upper probabilities of `A` given `E` extremized over
/// the full core of the set's lower envelope.
pub fn core_conditional_bounds(
    set: &CredalSet,
    event: &Event,
    given: &Event,
) -> Result<ConditionalBounds> {
    let m = set.m();
    if m > CORE_LP_LIMIT {
        return Err(DpkError::BudgetExceeded(format!(
            "{m} atoms exceed the {CORE_LP_LIMIT}-atom core LP limit"
        )));
    }
    if given.is_empty() {
        return Ok(ConditionalBounds { lower: 0.0, upper: 0.0, rule: BoundsRule::GeneralizedBayes });
    }
    if set.lower_prob(given)? == 0.0 {
        // The core then contains a measure nullifying E, so the conditional
        // extremum is undefined.
        return Err(DpkError::NullEnvelope);
    }
    let lower = solve_direction(set, event, given, OptimizationDirection::Minimize)?;
    let upper = solve_direction(set, event, given, OptimizationDirection::Maximize)?;
    Ok(ConditionalBounds { lower, upper, rule: BoundsRule::GeneralizedBayes })
}
