//! Batch front-end: replays observation streams through precise or credal
//! runs and assembles deterministic reports, including the three built-in
//! demos.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::coarsening::{coarsen_masses, coarsen_partition, CoarseningMap};
use crate::config::{parse_stream, ModelConfig, OptionsConfig, QueryConfig, Session, SessionConfig};
use crate::dipk::{
    classify_behavior, hausdorff, jeffrey_lower_bound, jeffrey_upper_bound,
    sufficient_contraction, sufficient_sure_loss, update_generators, Behavior, CredalSet,
    Sufficiency, BEHAVIOR_EPS, SWEEP_LIMIT,
};
use crate::dpk::{check_jeffrey_condition, jeffrey_update, StopReason};
use crate::error::{DpkError, Result};
use crate::measure::{tv_distance, Event, ProbMeasure};
use crate::observation::{ObservationModel, Partition, PartitionMasses};
use crate::report::{
    sig12, BlockSummary, PartitionSummary, QueryRecord, RunReport, SelfCheck, StepRecord,
    SweepSummary,
};

/// Command-line overrides applied on top of the config's options.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub tolerance: Option<f64>,
    pub sweep_events: bool,
    pub seed: Option<u64>,
}

/// One step of a prepared run: the partition the update conditioned on, the
/// masses it pinned, and the batch that produced it.
struct PreparedStep {
    batch: Vec<String>,
    partition: Partition,
    masses: PartitionMasses,
    block_names: Vec<String>,
}

/// Walks the stream lazily, refining the fine partition and deriving the
/// (possibly coarse) partition and masses each step conditions on. Batches
/// past a stopping point are never touched.
struct StepWalker<'a> {
    model: &'a ObservationModel,
    symbol_groups: Option<&'a [Vec<usize>]>,
    fine: Partition,
}

impl<'a> StepWalker<'a> {
    fn new(model: &'a ObservationModel, symbol_groups: Option<&'a [Vec<usize>]>) -> Result<Self> {
        let fine = model.induce_partition::<&str>(&[])?;
        Ok(StepWalker { model, symbol_groups, fine })
    }

    fn advance(&mut self, batch: &[String]) -> Result<PreparedStep> {
        self.fine = self.model.refine_partition(&self.fine, batch)?;
        let fine = &self.fine;
        let fine_masses = self.model.mechanical_masses(fine)?;
        let (partition, masses, block_names) = match self.symbol_groups {
            Some(groups) => {
                let map = CoarseningMap::from_symbol_groups(fine, groups)?;
                let names = map
                    .groups()
                    .iter()
                    .map(|group| {
                        group
                            .iter()
                            .map(|&b| self.model.symbols()[fine.observed()[b]].clone())
                            .collect::<Vec<_>>()
                            .join("+")
                    })
                    .collect();
                (coarsen_partition(fine, &map)?, coarsen_masses(&fine_masses, &map)?, names)
            }
            None => {
                let names = fine
                    .observed()
                    .iter()
                    .map(|&s| self.model.symbols()[s].clone())
                    .collect();
                (fine.clone(), fine_masses, names)
            }
        };
        Ok(PreparedStep { batch: batch.to_vec(), partition, masses, block_names })
    }
}

fn partition_summary(
    model: &ObservationModel,
    partition: &Partition,
    masses: &PartitionMasses,
    block_names: &[String],
) -> PartitionSummary {
    let space = model.space();
    let atoms_of = |event: &Event| -> Vec<String> {
        event.indices().iter().map(|&i| space.label(i).to_string()).collect()
    };
    PartitionSummary {
        blocks: partition
            .blocks()
            .iter()
            .zip(masses.block_masses())
            .zip(block_names)
            .map(|((block, &mass), name)| BlockSummary {
                symbol: name.clone(),
                atoms: atoms_of(block),
                mass: sig12(mass),
            })
            .collect(),
        remainder_atoms: atoms_of(partition.remainder()),
        remainder_mass: sig12(masses.remainder_mass()),
    }
}

fn initial_summary(model: &ObservationModel) -> Result<PartitionSummary> {
    let partition = model.induce_partition::<&str>(&[])?;
    let masses = model.mechanical_masses(&partition)?;
    Ok(partition_summary(model, &partition, &masses, &[]))
}

fn stop_reason_of(terminal: bool, below_tolerance: bool) -> StopReason {
    if terminal {
        StopReason::Terminal
    } else if below_tolerance {
        StopReason::Tolerance
    } else {
        StopReason::Budget
    }
}

/// Runs a precise session over a stream and builds the report.
pub fn run_dpk_session(
    session: &Session,
    batches: &[Vec<String>],
    opts: &RunOptions,
) -> Result<RunReport> {
    let prior = session
        .prior
        .clone()
        .ok_or_else(|| DpkError::InvalidConfig("precise run needs a `prior`".into()))?;
    let model = &session.model;
    let tolerance = opts.tolerance.unwrap_or(session.tolerance);
    let budget = session.budget.unwrap_or(10 * model.range_len());

    let mut walker = StepWalker::new(model, session.symbol_groups.as_deref())?;
    let mut measures = vec![prior];
    let mut taken: Vec<PreparedStep> = Vec::new();
    let mut tv_steps: Vec<f64> = Vec::new();
    let mut terminal = false;
    let mut below_tolerance = false;
    for batch in batches {
        let step = walker.advance(batch)?;
        let previous = measures.last().expect("nonempty");
        let next = jeffrey_update(previous, &step.partition, &step.masses)?;
        let tv = tv_distance(previous, &next)?;
        measures.push(next);
        tv_steps.push(tv);
        terminal = step.partition.is_terminal();
        below_tolerance = tv < tolerance;
        taken.push(step);
        if terminal || below_tolerance || taken.len() >= budget {
            break;
        }
    }

    let mut records = Vec::with_capacity(taken.len() + 1);
    records.push(StepRecord {
        step: 0,
        batch: Vec::new(),
        partition: initial_summary(model)?,
        tv_step: None,
        hausdorff_step: None,
        hausdorff_to_final: None,
        queries: query_values(&measures[0], &session.queries)?,
        sweep: None,
    });
    for (i, step) in taken.iter().enumerate() {
        records.push(StepRecord {
            step: i + 1,
            batch: step.batch.clone(),
            partition: partition_summary(model, &step.partition, &step.masses, &step.block_names),
            tv_step: Some(sig12(tv_steps[i])),
            hausdorff_step: None,
            hausdorff_to_final: None,
            queries: query_values(&measures[i + 1], &session.queries)?,
            sweep: None,
        });
    }

    let self_check = match opts.seed {
        Some(seed) => Some(dpk_self_check(seed, &measures, &taken)?),
        None => None,
    };

    Ok(RunReport {
        mode: "dpk".into(),
        stop_reason: stop_reason_of(terminal, below_tolerance)
            .as_str()
            .into(),
        steps: records,
        self_check,
    })
}

fn query_values(measure: &ProbMeasure, queries: &[(String, Event)]) -> Result<Vec<QueryRecord>> {
    queries
        .iter()
        .map(|(name, event)| {
            Ok(QueryRecord {
                value: Some(sig12(measure.prob(event)?)),
                ..QueryRecord::named(name)
            })
        })
        .collect()
}

fn dpk_self_check(
    seed: u64,
    measures: &[ProbMeasure],
    steps: &[PreparedStep],
) -> Result<SelfCheck> {
    let mut detail = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let prev = &measures[i];
        let cur = &measures[i + 1];
        let total: f64 = cur.masses().iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            detail.push(format!("step {}: posterior sums to {total}", i + 1));
        }
        if !check_jeffrey_condition(prev, cur, &step.partition) {
            detail.push(format!("step {}: conditional agreement failed", i + 1));
        }
        for (piece, mass) in step.partition.pieces().zip(step.masses.piece_masses()) {
            if (cur.prob(piece)? - mass).abs() > 1e-9 {
                detail.push(format!("step {}: piece mass drifted", i + 1));
            }
        }
    }
    Ok(SelfCheck { seed, sampled_events: 0, passed: detail.is_empty(), detail })
}

/// Runs a credal session over a stream and builds the report.
pub fn run_dipk_session(
    session: &Session,
    batches: &[Vec<String>],
    opts: &RunOptions,
) -> Result<RunReport> {
    let generators = session
        .generators
        .clone()
        .ok_or_else(|| DpkError::InvalidConfig("credal run needs `generators`".into()))?;
    let model = &session.model;
    let tolerance = opts.tolerance.unwrap_or(session.tolerance);
    let budget = session.budget.unwrap_or(10 * model.range_len());
    let sweep = opts.sweep_events || session.sweep_events;
    let m = model.space().len();
    if sweep && m > SWEEP_LIMIT {
        return Err(DpkError::InvalidConfig(format!(
            "event sweep needs at most {SWEEP_LIMIT} atoms, space has {m}"
        )));
    }

    let mut walker = StepWalker::new(model, session.symbol_groups.as_deref())?;
    let mut sets = vec![CredalSet::new(generators)?];
    let mut taken: Vec<PreparedStep> = Vec::new();
    let mut hausdorff_steps: Vec<f64> = Vec::new();
    let mut terminal = false;
    let mut below_tolerance = false;
    for batch in batches {
        let step = walker.advance(batch)?;
        let previous = sets.last().expect("nonempty");
        let next = update_generators(previous, &step.partition, &step.masses)?;
        let moved = hausdorff(previous, &next)?;
        sets.push(next);
        hausdorff_steps.push(moved);
        terminal = step.partition.is_terminal();
        below_tolerance = moved < tolerance;
        taken.push(step);
        if terminal || below_tolerance || taken.len() >= budget {
            break;
        }
    }

    let final_set = sets.last().expect("nonempty");
    let mut to_final = Vec::with_capacity(sets.len());
    for set in &sets {
        to_final.push(hausdorff(set, final_set)?);
    }

    let mut records = Vec::with_capacity(taken.len() + 1);
    records.push(StepRecord {
        step: 0,
        batch: Vec::new(),
        partition: initial_summary(model)?,
        tv_step: None,
        hausdorff_step: None,
        hausdorff_to_final: Some(sig12(to_final[0])),
        queries: envelope_queries(&sets[0], None, &session.queries)?,
        sweep: None,
    });
    for (i, step) in taken.iter().enumerate() {
        let prev = &sets[i];
        let cur = &sets[i + 1];
        records.push(StepRecord {
            step: i + 1,
            batch: step.batch.clone(),
            partition: partition_summary(model, &step.partition, &step.masses, &step.block_names),
            tv_step: None,
            hausdorff_step: Some(sig12(hausdorff_steps[i])),
            hausdorff_to_final: Some(sig12(to_final[i + 1])),
            queries: envelope_queries(cur, Some((prev, step)), &session.queries)?,
            sweep: if sweep { Some(sweep_summary(prev, cur, model)?) } else { None },
        });
    }

    let self_check = match opts.seed {
        Some(seed) => Some(dipk_self_check(seed, &sets, &taken)?),
        None => None,
    };

    Ok(RunReport {
        mode: "dipk".into(),
        stop_reason: stop_reason_of(terminal, below_tolerance)
            .as_str()
            .into(),
        steps: records,
        self_check,
    })
}

fn envelope_queries(
    set: &CredalSet,
    context: Option<(&CredalSet, &PreparedStep)>,
    queries: &[(String, Event)],
) -> Result<Vec<QueryRecord>> {
    let mut out = Vec::with_capacity(queries.len());
    for (name, event) in queries {
        let mut record = QueryRecord::named(name);
        let lower = set.lower_prob(event)?;
        let upper = set.upper_prob(event)?;
        record.lower = Some(sig12(lower));
        record.upper = Some(sig12(upper));
        if let Some((prev, step)) = context {
            let bound_lower = jeffrey_lower_bound(prev, &step.partition, &step.masses, event)?;
            let bound_upper = jeffrey_upper_bound(prev, &step.partition, &step.masses, event)?;
            record.bound_lower = Some(sig12(bound_lower));
            record.bound_upper = Some(sig12(bound_upper));
            let report = classify_behavior(prev, set, event)?;
            record.behavior = Some(report.classification.as_str().to_string());
            let contraction =
                sufficient_contraction(prev, &step.partition, &step.masses, event)?;
            record.contraction_guaranteed = Some(contraction == Sufficiency::Guaranteed);
            if contraction == Sufficiency::Guaranteed {
                record.contraction_confirmed = Some(
                    report.lower_after >= report.lower_before - BEHAVIOR_EPS
                        && report.upper_after <= report.upper_before + BEHAVIOR_EPS,
                );
            }
            let sure_loss = sufficient_sure_loss(prev, &step.partition, &step.masses, event)?;
            record.sure_loss_guaranteed = Some(sure_loss == Sufficiency::Guaranteed);
            if sure_loss == Sufficiency::Guaranteed {
                record.sure_loss_confirmed =
                    Some(report.classification == Behavior::SureLoss);
            }
        }
        out.push(record);
    }
    Ok(out)
}

fn sweep_summary(
    prev: &CredalSet,
    cur: &CredalSet,
    model: &ObservationModel,
) -> Result<SweepSummary> {
    let m = model.space().len();
    let mut counts = std::collections::BTreeMap::new();
    let mut witnesses = std::collections::BTreeMap::new();
    for mask in 0..(1u64 << m) {
        let event = Event::from_bitmask(mask, m);
        let class = classify_behavior(prev, cur, &event)?.classification;
        let key = class.as_str().to_string();
        *counts.entry(key.clone()).or_insert(0) += 1;
        witnesses.entry(key).or_insert_with(|| {
            event
                .indices()
                .iter()
                .map(|&i| model.space().label(i).to_string())
                .collect()
        });
    }
    Ok(SweepSummary { events: 1usize << m, counts, witnesses })
}

fn dipk_self_check(seed: u64, sets: &[CredalSet], steps: &[PreparedStep]) -> Result<SelfCheck> {
    const SAMPLES: usize = 32;
    let mut rng = StdRng::seed_from_u64(seed);
    let m = sets[0].m();
    let events: Vec<Event> = (0..SAMPLES)
        .map(|_| Event::from_bitmask(rng.random_range(0..(1u128 << m) as u64), m))
        .collect();
    let mut detail = Vec::new();

    let last = sets.last().expect("nonempty");
    for event in &events {
        let upper = last.upper_prob(event)?;
        let conjugate = 1.0 - last.lower_prob(&event.complement(m))?;
        if upper != conjugate {
            detail.push("conjugacy broken on a sampled event".to_string());
            break;
        }
    }
    for (i, step) in steps.iter().enumerate() {
        let prev = &sets[i];
        let cur = &sets[i + 1];
        for event in &events {
            let lo = jeffrey_lower_bound(prev, &step.partition, &step.masses, event)?;
            let hi = jeffrey_upper_bound(prev, &step.partition, &step.masses, event)?;
            if lo > cur.lower_prob(event)? + BEHAVIOR_EPS
                || hi < cur.upper_prob(event)? - BEHAVIOR_EPS
            {
                detail.push(format!("step {}: bound failed to bracket envelope", i + 1));
                break;
            }
            for g in cur.generators() {
                let value = g.prob(event)?;
                if value < lo - BEHAVIOR_EPS || value > hi + BEHAVIOR_EPS {
                    detail.push(format!("step {}: generator escaped bound interval", i + 1));
                    break;
                }
            }
        }
    }
    Ok(SelfCheck { seed, sampled_events: SAMPLES, passed: detail.is_empty(), detail })
}

/// Validates a config, parses a stream, and runs the precise engine.
pub fn run_dpk(config: &SessionConfig, stream_text: &str, opts: &RunOptions) -> Result<RunReport> {
    let session = config.validate()?;
    let batches = parse_stream(stream_text, &session.model)?;
    run_dpk_session(&session, &batches, opts)
}

/// Validates a config, parses a stream, and runs the credal engine.
pub fn run_dipk(config: &SessionConfig, stream_text: &str, opts: &RunOptions) -> Result<RunReport> {
    let session = config.validate()?;
    let batches = parse_stream(stream_text, &session.model)?;
    run_dipk_session(&session, &batches, opts)
}

/// Built-in demonstration runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoName {
    BinomialExample,
    Noncommutativity,
    Survey,
}

/// A demo's deliverables: the report, a human-readable summary, and the
/// config/stream pair that reproduces the primary run.
#[derive(Debug, Clone)]
pub struct DemoOutput {
    pub report: RunReport,
    pub summary: String,
    pub config: SessionConfig,
    pub stream: String,
}

pub fn demo(name: DemoName) -> Result<DemoOutput> {
    match name {
        DemoName::BinomialExample => demo_binomial(),
        DemoName::Noncommutativity => demo_noncommutativity(),
        DemoName::Survey => demo_survey(),
    }
}

/// Binomial(10, 0.8) pmf.
fn binomial_pmf() -> Vec<f64> {
    let n = 10u32;
    (0..=n)
        .map(|k| {
            let choose: f64 =
                (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
            choose * 0.8f64.powi(k as i32) * 0.2f64.powi((n - k) as i32)
        })
        .collect()
}

/// Eleven-atom success-count space observed through a Binomial(10, 0.8)
/// mechanism; a single batch pins three blocks and leaves the rest in the
/// remainder.
pub fn binomial_example_config() -> SessionConfig {
    let atoms: Vec<String> = (0..=10).map(|k| k.to_string()).collect();
    SessionConfig {
        atoms: atoms.clone(),
        model: ModelConfig {
            symbols: atoms.clone(),
            pmf: binomial_pmf(),
            preimages: atoms.iter().map(|a| vec![a.clone()]).collect(),
        },
        prior: Some(vec![1.0 / 11.0; 11]),
        generators: None,
        options: OptionsConfig {
            queries: vec![QueryConfig {
                name: "observed".into(),
                atoms: vec!["3".into(), "5".into(), "7".into()],
            }],
            ..OptionsConfig::default()
        },
    }
}

fn demo_binomial() -> Result<DemoOutput> {
    let config = binomial_example_config();
    let stream = "3 5 7\n".to_string();
    let report = run_dpk(&config, &stream, &RunOptions::default())?;
    let last = report.steps.last().expect("one step");
    let mut summary = String::from("binomial-example: mechanical masses after observing {3, 5, 7}\n");
    for block in &last.partition.blocks {
        summary.push_str(&format!("  block {:>2}: {:.5}\n", block.symbol, block.mass));
    }
    summary.push_str(&format!("  remainder: {:.5}\n", last.partition.remainder_mass));
    Ok(DemoOutput { report, summary, config, stream })
}

/// Four-bin unit-interval space with pmf (1/6, 1/3, 1/8, 3/8); the prior is
/// the bin-length measure (1/8, 1/8, 1/2, 1/4).
pub fn noncommutativity_config() -> SessionConfig {
    let atoms = vec![
        "0-1/8".to_string(),
        "1/8-1/4".to_string(),
        "1/4-3/4".to_string(),
        "3/4-1".to_string(),
    ];
    SessionConfig {
        atoms: atoms.clone(),
        model: ModelConfig {
            symbols: vec!["1".into(), "2".into(), "3".into(), "4".into()],
            pmf: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 8.0, 3.0 / 8.0],
            preimages: atoms.iter().map(|a| vec![a.clone()]).collect(),
        },
        prior: Some(vec![0.125, 0.125, 0.5, 0.25]),
        generators: None,
        options: OptionsConfig {
            queries: vec![
                QueryConfig { name: "A".into(), atoms: vec!["1/4-3/4".into()] },
                QueryConfig { name: "B".into(), atoms: vec!["1/8-1/4".into()] },
            ],
            ..OptionsConfig::default()
        },
    }
}

fn query_value(report: &RunReport, step: usize, name: &str) -> f64 {
    report.steps[step]
        .queries
        .iter()
        .find(|q| q.name == name)
        .and_then(|q| q.value)
        .expect("query present")
}

fn demo_noncommutativity() -> Result<DemoOutput> {
    let config = noncommutativity_config();
    let stream = "1\n2 3 4\n".to_string();
    let swapped_stream = "3\n1 2 4\n";
    let report = run_dpk(&config, &stream, &RunOptions::default())?;
    let swapped = run_dpk(&config, swapped_stream, &RunOptions::default())?;

    let mut summary = String::from("noncommutativity: one-step values depend on arrival order\n");
    summary.push_str(&format!(
        "  P(B) prior {:.12}, after first batch {:.12} (5/42 = {:.12})\n",
        query_value(&report, 0, "B"),
        query_value(&report, 1, "B"),
        5.0 / 42.0,
    ));
    summary.push_str(&format!(
        "  P(A) after {{1}} first: {:.12} (10/21 = {:.12})\n",
        query_value(&report, 1, "A"),
        10.0 / 21.0,
    ));
    summary.push_str(&format!(
        "  P(A) after {{3}} first: {:.12} (1/8 = 0.125)\n",
        query_value(&swapped, 1, "A"),
    ));
    summary.push_str(&format!(
        "  shared limit P(A): {:.12} and {:.12}\n",
        query_value(&report, 2, "A"),
        query_value(&swapped, 2, "A"),
    ));
    Ok(DemoOutput { report, summary, config, stream })
}

const SURVEY_AGES: [&str; 5] = ["u18", "18-20", "21-44", "45-64", "65p"];
const SURVEY_RACES: [&str; 4] = ["W", "B", "A", "O"];

/// Survey space: five age bins by four race labels, each cell split into
/// two sub-atoms so that cell preimages are genuinely coarse. The model is
/// the product of the age and race mechanisms under a synthetic joint pmf;
/// the prior is a synthetic positive vector.
pub fn survey_config() -> SessionConfig {
    let mut atoms = Vec::with_capacity(40);
    for age in SURVEY_AGES {
        for race in SURVEY_RACES {
            atoms.push(format!("{age}:{race}:x"));
            atoms.push(format!("{age}:{race}:y"));
        }
    }
    let space = crate::measure::StateSpace::new(atoms.iter().cloned()).expect("distinct atoms");

    let mut weight_total = 0.0;
    let mut weights = Vec::with_capacity(20);
    for i in 0..SURVEY_AGES.len() {
        for j in 0..SURVEY_RACES.len() {
            let w = (i + 1) as f64 + 0.25 * (j + 1) as f64;
            weights.push(w);
            weight_total += w;
        }
    }
    let joint: Vec<f64> = weights.iter().map(|w| w / weight_total).collect();

    // Marginal mechanisms: age preimages are rows of eight atoms, race
    // preimages columns of ten; marginal pmfs are the joint's margins.
    let cell = |i: usize, j: usize| [(i * 4 + j) * 2, (i * 4 + j) * 2 + 1];
    let age_preimages: Vec<Event> = (0..5)
        .map(|i| Event::new((0..4).flat_map(|j| cell(i, j))))
        .collect();
    let race_preimages: Vec<Event> = (0..4)
        .map(|j| Event::new((0..5).flat_map(|i| cell(i, j))))
        .collect();
    let age_pmf: Vec<f64> = (0..5).map(|i| (0..4).map(|j| joint[i * 4 + j]).sum()).collect();
    let race_pmf: Vec<f64> = (0..4).map(|j| (0..5).map(|i| joint[i * 4 + j]).sum()).collect();
    let age_model = crate::observation::ObservationModel::new(
        space.clone(),
        SURVEY_AGES.iter().map(|s| s.to_string()).collect(),
        age_pmf,
        age_preimages,
    )
    .expect("age marginal is well formed");
    let race_model = crate::observation::ObservationModel::new(
        space.clone(),
        SURVEY_RACES.iter().map(|s| s.to_string()).collect(),
        race_pmf,
        race_preimages,
    )
    .expect("race marginal is well formed");
    let product = crate::coarsening::product_observation_model(&age_model, &race_model, &joint)
        .expect("survey grid pairs are nonempty");

    let symbols = product.symbols().to_vec();
    let preimages: Vec<Vec<String>> = product
        .preimages()
        .iter()
        .map(|event| event.indices().iter().map(|&i| space.label(i).to_string()).collect())
        .collect();
    let pmf = product.pmf().to_vec();
    // Synthetic positive prior, heavier on later atoms.
    let prior_weights: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 / 8.0).collect();
    let prior_total: f64 = prior_weights.iter().sum();
    let prior: Vec<f64> = prior_weights.iter().map(|w| w / prior_total).collect();

    let age_groups: Vec<Vec<String>> = SURVEY_AGES
        .iter()
        .map(|age| SURVEY_RACES.iter().map(|race| format!("({age},{race})")).collect())
        .collect();

    SessionConfig {
        atoms,
        model: ModelConfig { symbols, pmf, preimages },
        prior: Some(prior),
        generators: None,
        options: OptionsConfig {
            queries: vec![
                QueryConfig {
                    name: "under18".into(),
                    atoms: SURVEY_RACES
                        .iter()
                        .flat_map(|race| {
                            [format!("u18:{race}:x"), format!("u18:{race}:y")]
                        })
                        .collect(),
                },
                QueryConfig {
                    name: "senior".into(),
                    atoms: SURVEY_RACES
                        .iter()
                        .flat_map(|race| {
                            [format!("65p:{race}:x"), format!("65p:{race}:y")]
                        })
                        .collect(),
                },
            ],
            coarsening: Some(age_groups),
            ..OptionsConfig::default()
        },
    }
}

/// First-batch reports (youngest and oldest bins across races) and the
/// second-batch remainder, per the three-survey narrative.
pub fn survey_stream() -> String {
    let batch1: Vec<String> = ["u18", "65p"]
        .iter()
        .flat_map(|age| SURVEY_RACES.iter().map(move |race| format!("({age},{race})")))
        .collect();
    let batch2: Vec<String> = ["18-20", "21-44", "45-64"]
        .iter()
        .flat_map(|age| SURVEY_RACES.iter().map(move |race| format!("({age},{race})")))
        .collect();
    format!("{}\n{}\n", batch1.join(" "), batch2.join(" "))
}

fn demo_survey() -> Result<DemoOutput> {
    let config = survey_config();
    let stream = survey_stream();
    let session = config.validate()?;
    let model = &session.model;
    let batches = parse_stream(&stream, model)?;
    let prior = session.prior.clone().expect("survey config has a prior");

    // Coarse pipeline: age-binned for the two survey batches, then an
    // identity stage adopting the full fine partition.
    let coarse_report = run_dpk_session(&session, &batches, &RunOptions::default())?;

    // Fine pipeline over the same batches.
    let mut fine_session = session.clone();
    fine_session.symbol_groups = None;
    let fine_report = run_dpk_session(&fine_session, &batches, &RunOptions::default())?;

    // Stage-by-stage agreement: coarse-run mass of every coarse block vs the
    // group-aggregated fine-run mass.
    let mut summary = String::from("survey: coarse-run vs aggregated fine-run block masses\n");
    let mut fine_measures = vec![prior.clone()];
    let mut coarse_measures = vec![prior];
    let mut fine = model.induce_partition::<&str>(&[])?;
    for (stage, batch) in batches.iter().enumerate() {
        fine = model.refine_partition(&fine, batch)?;
        let fine_masses = model.mechanical_masses(&fine)?;
        let map =
            CoarseningMap::from_symbol_groups(&fine, session.symbol_groups.as_ref().unwrap())?;
        let coarse = coarsen_partition(&fine, &map)?;
        let coarse_masses = coarsen_masses(&fine_masses, &map)?;
        let next_fine = jeffrey_update(fine_measures.last().unwrap(), &fine, &fine_masses)?;
        let next_coarse =
            jeffrey_update(coarse_measures.last().unwrap(), &coarse, &coarse_masses)?;
        summary.push_str(&format!("  stage {}:\n", stage + 1));
        for (block_index, block) in coarse.blocks().iter().enumerate() {
            let coarse_value = next_coarse.prob(block)?;
            let fine_value = next_fine.prob(block)?;
            summary.push_str(&format!(
                "    coarse block {block_index}: coarse {:.12}  fine-aggregated {:.12}  |diff| {:.3e}\n",
                coarse_value,
                fine_value,
                (coarse_value - fine_value).abs()
            ));
        }
        fine_measures.push(next_fine);
        coarse_measures.push(next_coarse);
    }
    // Final identity stage: adopt the fine partition outright.
    let fine_masses = model.mechanical_masses(&fine)?;
    let final_coarse = jeffrey_update(coarse_measures.last().unwrap(), &fine, &fine_masses)?;
    let fine_limit = fine_measures.last().unwrap();
    let max_diff = final_coarse
        .masses()
        .iter()
        .zip(fine_limit.masses())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        .max(
            tv_distance(&final_coarse, fine_limit)?,
        );
    summary.push_str(&format!(
        "  identity stage: max |coarse - fine limit| = {max_diff:.3e} over 40 atoms\n"
    ));
    summary.push_str(&format!(
        "  fine stop: {}, coarse stop: {}\n",
        fine_report.stop_reason, coarse_report.stop_reason
    ));

    Ok(DemoOutput { report: coarse_report, summary, config, stream })
}
