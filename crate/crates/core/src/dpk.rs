//! Precise sequential updating: the partition-driven update rule, runs to
//! the limit measure, verification of the underlying conditional-agreement
//! condition, and convergence-speed accounting.
//!
//! One step refines the current partition with freshly observed symbols,
//! assigns block masses mechanically from the pmf, and rebuilds the measure
//! as
//!
//! ```text
//! P'(A) = Σ_j P(A | E_j) · mass(E_j)
//! ```
//!
//! summed over all blocks plus the remainder, where an empty piece
//! contributes zero. Previously carved blocks keep their masses, so the
//! sequence of measures stabilizes once every symbol has been observed.

use crate::error::{DpkError, Result};
use crate::measure::{tv_distance, Event, ProbMeasure};
use crate::observation::{ObservationModel, Partition, PartitionMasses};

/// Engine state after `step` updates: the current measure and partition.
///
/// Invariant: away from step 0, the measure agrees with the mechanical
/// masses on every partition piece.
#[derive(Debug, Clone, PartialEq)]
pub struct DpkState {
    pub measure: ProbMeasure,
    pub partition: Partition,
    pub step: usize,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The partition's remainder became empty; no refinement is possible.
    Terminal,
    /// The step-to-step total variation fell below the tolerance.
    Tolerance,
    /// The schedule or the step budget was exhausted.
    Budget,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Terminal => "terminal",
            StopReason::Tolerance => "tolerance",
            StopReason::Budget => "budget",
        }
    }
}

/// Stopping rule for sequential runs.
///
/// Terminal detection is exact and always on. The tolerance exists for
/// simulated-infinite ranges (a never-observed tail symbol keeps the
/// remainder mass positive forever); the budget caps runaway schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub tolerance: f64,
    /// Maximum number of steps; defaults to `10 · |range|` when `None`.
    pub budget: Option<usize>,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { tolerance: 1e-10, budget: None }
    }
}

impl StopRule {
    pub fn with_tolerance(tolerance: f64) -> Self {
        StopRule { tolerance, budget: None }
    }

    fn effective_budget(&self, model: &ObservationModel) -> usize {
        self.budget.unwrap_or(10 * model.range_len())
    }
}

/// Trace of a run: every state plus the total-variation size of each step.
#[derive(Debug, Clone)]
pub struct DpkTrace {
    pub states: Vec<DpkState>,
    pub tv_steps: Vec<f64>,
    pub stop_reason: StopReason,
}

impl DpkTrace {
    pub fn initial(&self) -> &DpkState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &DpkState {
        self.states.last().expect("trace holds at least the initial state")
    }
}

fn piece_label(partition: &Partition, piece_index: usize) -> String {
    if piece_index < partition.block_count() {
        format!("block {piece_index}")
    } else {
        "remainder".to_string()
    }
}

/// The partition-driven update `A ↦ Σ_j P(A | E_j) · mass_j`.
///
/// Computed at atom resolution: an atom of piece `E_j` receives
/// `P({ω}) · mass_j / P(E_j)`, which extends to every event by additivity.
/// Empty pieces contribute nothing. Every nonempty piece must carry positive
/// prior probability ([`DpkError::PriorNullBlock`] otherwise); the result,
/// restricted to the partition, reproduces `masses`.
pub fn jeffrey_update(
    prior: &ProbMeasure,
    partition: &Partition,
    masses: &PartitionMasses,
) -> Result<ProbMeasure> {
    if partition.m() != prior.m() {
        return Err(DpkError::ShapeMismatch(format!(
            "partition over {} atoms, measure over {}",
            partition.m(),
            prior.m()
        )));
    }
    if masses.block_masses().len() != partition.block_count() {
        return Err(DpkError::ShapeMismatch(format!(
            "{} block masses for {} blocks",
            masses.block_masses().len(),
            partition.block_count()
        )));
    }
    let mut out = vec![0.0; prior.m()];
    for (piece_index, (piece, mass)) in
        partition.pieces().zip(masses.piece_masses()).enumerate()
    {
        if piece.is_empty() {
            continue;
        }
        let prior_piece = prior.prob(piece)?;
        if prior_piece == 0.0 {
            return Err(DpkError::PriorNullBlock {
                block: piece_label(partition, piece_index),
            });
        }
        let scale = mass / prior_piece;
        for &i in piece.indices() {
            out[i] = prior.masses()[i] * scale;
        }
    }
    ProbMeasure::new(prior.space().clone(), out)
}

/// One sequential step: refine, reassign masses mechanically, update.
pub fn dpk_step<S: AsRef<str>>(
    state: &DpkState,
    model: &ObservationModel,
    new_symbols: &[S],
) -> Result<DpkState> {
    let partition = model.refine_partition(&state.partition, new_symbols)?;
    let masses = model.mechanical_masses(&partition)?;
    let measure = jeffrey_update(&state.measure, &partition, &masses)?;
    Ok(DpkState { measure, partition, step: state.step + 1 })
}

/// Initial state: the prior measure with the empty-observation partition.
pub fn initial_state(prior: ProbMeasure, model: &ObservationModel) -> Result<DpkState> {
    if prior.m() != model.space().len() {
        return Err(DpkError::ShapeMismatch(format!(
            "prior over {} atoms, model over {}",
            prior.m(),
            model.space().len()
        )));
    }
    let partition = model.induce_partition::<&str>(&[])?;
    Ok(DpkState { measure: prior, partition, step: 0 })
}

/// Runs a schedule of symbol batches from a prior, recording every state and
/// the total-variation distance of each step. Stops at a terminal partition,
/// when a step moves the measure less than the tolerance, or when the
/// schedule or budget runs out.
pub fn dpk_run<S: AsRef<str>>(
    prior: ProbMeasure,
    model: &ObservationModel,
    schedule: &[Vec<S>],
    stop: &StopRule,
) -> Result<DpkTrace> {
    let budget = stop.effective_budget(model);
    let mut states = vec![initial_state(prior, model)?];
    let mut tv_steps = Vec::new();

    if states[0].partition.is_terminal() {
        return Ok(DpkTrace { states, tv_steps, stop_reason: StopReason::Terminal });
    }

    let mut stop_reason = StopReason::Budget;
    for batch in schedule {
        let previous = states.last().expect("nonempty");
        let next = dpk_step(previous, model, batch)?;
        let tv = tv_distance(&previous.measure, &next.measure)?;
        tv_steps.push(tv);
        let terminal = next.partition.is_terminal();
        states.push(next);
        if terminal {
            stop_reason = StopReason::Terminal;
            break;
        }
        if tv < stop.tolerance {
            stop_reason = StopReason::Tolerance;
            break;
        }
        if states.len() > budget {
            stop_reason = StopReason::Budget;
            break;
        }
    }
    Ok(DpkTrace { states, tv_steps, stop_reason })
}

/// Verifies the conditional-agreement condition behind the update rule:
/// for every partition piece `E` with positive posterior probability,
/// `posterior(A | E) = prior(A | E)` for all events `A`.
///
/// Checked on singletons (within `1e−9`); additivity extends the agreement
/// to every event. Pieces the posterior nullifies are skipped. A piece with
/// positive posterior but zero prior probability fails the check.
pub fn check_jeffrey_condition(
    prior: &ProbMeasure,
    posterior: &ProbMeasure,
    partition: &Partition,
) -> bool {
    const TOLERANCE: f64 = 1e-9;
    if prior.m() != posterior.m() || partition.m() != prior.m() {
        return false;
    }
    for piece in partition.pieces() {
        if piece.is_empty() {
            continue;
        }
        let post_piece = match posterior.prob(piece) {
            Ok(v) => v,
            Err(_) => return false,
        };
        if post_piece == 0.0 {
            continue;
        }
        if prior.prob(piece).map_or(true, |v| v == 0.0) {
            return false;
        }
        for &i in piece.indices() {
            let singleton = Event::new([i]);
            let a = prior.cond_prob(&singleton, piece);
            let b = posterior.cond_prob(&singleton, piece);
            match (a, b) {
                (Ok(a), Ok(b)) if (a - b).abs() <= TOLERANCE => {}
                _ => return false,
            }
        }
    }
    true
}

/// Number of steps to reach the terminal partition when each step consumes
/// `batch_size` fresh symbols (the last batch possibly smaller):
/// `ceil(|range| / batch_size)`.
///
/// Meaningful when the preimages cover the space, so that observing every
/// symbol actually empties the remainder.
pub fn steps_to_terminal(model: &ObservationModel, batch_size: usize) -> usize {
    assert!(batch_size >= 1, "batch size must be positive");
    model.range_len().div_ceil(batch_size)
}
