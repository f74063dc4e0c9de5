//! Sequential belief updating on finite state spaces, for single probability
//! measures and for finite credal sets.
//!
//! Observed symbols from a known generative pmf carve an ever-finer
//! partition out of the state space; each step reassigns block masses
//! mechanically and extends them to a full measure through the prior's
//! conditionals. The same machinery lifts elementwise to credal sets, with
//! lower/upper envelopes, cheap pre-update bounds on the updated envelopes,
//! and classification of envelope behavior (contraction, dilation, sure
//! loss).
//!
//! Modules:
//! - [`measure`]: state spaces, events, measures, conditioning, total
//!   variation.
//! - [`observation`]: observation models, induced partitions, refinement,
//!   mechanical masses.
//! - [`dpk`]: the precise sequential update engine.
//! - [`dipk`]: credal sets, envelopes, conditional bounds, behavior tests.
//! - [`coarsening`]: questionnaire-style coarsening of fine partitions and
//!   product observation models.
//! - [`config`], [`report`], [`runner`]: the batch front-end used by the
//!   `dpk` binary.
//!
//! ```
//! use dpk_core::{dpk_run, Event, ObservationModel, ProbMeasure, StateSpace, StopRule};
//!
//! // Four bins of the unit interval, observed through four symbols with a
//! // known pmf; the prior is the bin-length measure.
//! let space = StateSpace::new(["a", "b", "c", "d"])?;
//! let model = ObservationModel::new(
//!     space.clone(),
//!     vec!["1".into(), "2".into(), "3".into(), "4".into()],
//!     vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 8.0, 3.0 / 8.0],
//!     vec![Event::new([0]), Event::new([1]), Event::new([2]), Event::new([3])],
//! )?;
//! let prior = ProbMeasure::new(space, vec![0.125, 0.125, 0.5, 0.25])?;
//!
//! let schedule = vec![vec!["1"], vec!["2", "3", "4"]];
//! let trace = dpk_run(prior, &model, &schedule, &StopRule::default())?;
//!
//! // One step in, the interest bin holds 10/21; at the terminal partition
//! // it has settled on its pmf mass.
//! let interest = Event::new([2]);
//! let first = trace.states[1].measure.prob(&interest)?;
//! assert!((first - 10.0 / 21.0).abs() < 1e-12);
//! let limit = trace.final_state().measure.prob(&interest)?;
//! assert!((limit - 0.125).abs() < 1e-12);
//! # Ok::<(), dpk_core::DpkError>(())
//! ```

pub mod coarsening;
pub mod config;
pub mod dipk;
pub mod dpk;
pub mod error;
pub mod measure;
pub mod observation;
pub mod report;
pub mod runner;

pub use error::{DpkError, Result};
pub use measure::{
    convex_combine, tv_distance, tv_distance_bruteforce, Event, ProbMeasure, StateSpace,
};
pub use observation::{ModelViolation, ObservationModel, Partition, PartitionMasses};

pub use dpk::{
    check_jeffrey_condition, dpk_run, dpk_step, initial_state, jeffrey_update, steps_to_terminal,
    DpkState, DpkTrace, StopReason, StopRule,
};

pub use dipk::{
    classify_behavior, contraction_witness, core_membership, dilation_witness, dipk_run,
    dipk_step, gen_bayes_bounds, geometric_bounds, geometric_jeffrey_bounds, hausdorff,
    jeffrey_lower_bound, jeffrey_upper_bound, sufficient_contraction, sufficient_sure_loss,
    Behavior, BehaviorReport, BoundsRule, ConditionalBounds, CredalSet, DipkState, DipkTrace,
    Sufficiency,
};

pub use coarsening::{
    coarse_dpk_step, coarsen_masses, coarsen_partition, product_observation_model, CoarseningMap,
};
