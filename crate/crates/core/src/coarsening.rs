//! Coarsening of observation-induced partitions into questionnaire-style
//! bins, and product observation models for multi-question surveys.
//!
//! A coarsening map groups a fine partition's blocks; each group's union
//! becomes one coarse block and the fine remainder stays a block of its
//! own. Masses aggregate by group sums, so a coarse step is: refine the
//! fine partition, coarsen it, aggregate the mechanical masses, and update
//! against the coarse partition.

use crate::dpk::{jeffrey_update, DpkState};
use crate::error::{DpkError, Result};
use crate::measure::Event;
use crate::observation::{ObservationModel, Partition, PartitionMasses};

/// Disjoint nonempty groups of fine block indices, covering all blocks.
/// The fine remainder is never grouped; it maps to its own coarse block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseningMap {
    groups: Vec<Vec<usize>>,
}

impl CoarseningMap {
    /// Builds a map over `block_count` fine blocks. Groups must be nonempty,
    /// disjoint, in range, and cover every block index.
    pub fn new(groups: Vec<Vec<usize>>, block_count: usize) -> Result<Self> {
        let mut seen = vec![false; block_count];
        for group in &groups {
            if group.is_empty() {
                return Err(DpkError::InvalidCoarsening("empty group".into()));
            }
            for &index in group {
                if index >= block_count {
                    return Err(DpkError::InvalidCoarsening(format!(
                        "block index {index} out of range for {block_count} blocks"
                    )));
                }
                if seen[index] {
                    return Err(DpkError::InvalidCoarsening(format!(
                        "block index {index} appears in two groups"
                    )));
                }
                seen[index] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(DpkError::InvalidCoarsening(format!(
                "block index {missing} not covered by any group"
            )));
        }
        Ok(CoarseningMap { groups })
    }

    /// Identity map: every block its own group.
    pub fn identity(block_count: usize) -> Self {
        CoarseningMap { groups: (0..block_count).map(|i| vec![i]).collect() }
    }

    /// Builds the map for a partition by grouping its observed symbols.
    /// `symbol_groups` lists groups of model symbol indices; blocks whose
    /// symbols share a group are merged. Groups with no observed symbol are
    /// skipped. Every observed symbol must belong to some group.
    pub fn from_symbol_groups(
        partition: &Partition,
        symbol_groups: &[Vec<usize>],
    ) -> Result<Self> {
        let mut groups = Vec::new();
        for symbol_group in symbol_groups {
            let group: Vec<usize> = partition
                .observed()
                .iter()
                .enumerate()
                .filter(|(_, symbol)| symbol_group.contains(symbol))
                .map(|(block, _)| block)
                .collect();
            if !group.is_empty() {
                groups.push(group);
            }
        }
        Self::new(groups, partition.block_count())
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn is_identity(&self) -> bool {
        self.groups.iter().enumerate().all(|(i, g)| g.len() == 1 && g[0] == i)
    }
}

/// Coarse partition: one block per group (the union of its fine blocks),
/// remainder unchanged. The result is always coarser than the input:
/// `fine.refines(&coarse)` holds.
pub fn coarsen_partition(fine: &Partition, map: &CoarseningMap) -> Result<Partition> {
    check_map(fine, map)?;
    let blocks: Vec<Event> = map
        .groups()
        .iter()
        .map(|group| {
            group
                .iter()
                .fold(Event::empty(), |acc, &i| acc.union(&fine.blocks()[i]))
        })
        .collect();
    // Coarse blocks are synthetic unions, so they carry no symbol linkage.
    Ok(Partition::from_parts(
        fine.m(),
        blocks,
        fine.remainder().clone(),
        Vec::new(),
    ))
}

/// Aggregates fine piece masses by group sums; the remainder mass passes
/// through, so the total is preserved.
pub fn coarsen_masses(masses: &PartitionMasses, map: &CoarseningMap) -> Result<PartitionMasses> {
    let block_count = masses.block_masses().len();
    for group in map.groups() {
        for &index in group {
            if index >= block_count {
                return Err(DpkError::InvalidCoarsening(format!(
                    "block index {index} out of range for {block_count} masses"
                )));
            }
        }
    }
    let block_masses: Vec<f64> = map
        .groups()
        .iter()
        .map(|group| group.iter().map(|&i| masses.block_masses()[i]).sum())
        .collect();
    Ok(PartitionMasses::from_parts(block_masses, masses.remainder_mass()))
}

fn check_map(fine: &Partition, map: &CoarseningMap) -> Result<()> {
    let covered: usize = map.groups().iter().map(Vec::len).sum();
    if covered != fine.block_count() {
        return Err(DpkError::InvalidCoarsening(format!(
            "map covers {covered} of {} blocks",
            fine.block_count()
        )));
    }
    Ok(())
}

/// One coarse step: refine the fine partition with the new symbols, coarsen
/// per the map, aggregate the mechanical masses, and update against the
/// coarse partition. The returned state keeps the FINE partition (so later
/// steps can refine it further); its measure agrees with the aggregated
/// masses on coarse blocks.
pub fn coarse_dpk_step<S: AsRef<str>>(
    state: &DpkState,
    model: &ObservationModel,
    map: &CoarseningMap,
    new_symbols: &[S],
) -> Result<DpkState> {
    let fine = model.refine_partition(&state.partition, new_symbols)?;
    let fine_masses = model.mechanical_masses(&fine)?;
    let coarse = coarsen_partition(&fine, map)?;
    let coarse_masses = coarsen_masses(&fine_masses, map)?;
    let measure = jeffrey_update(&state.measure, &coarse, &coarse_masses)?;
    Ok(DpkState { measure, partition: fine, step: state.step + 1 })
}

/// Product of two observation mechanisms on one state space: symbols are
/// pairs, preimages are intersections of the marginal preimages, and the
/// supplied joint pmf rules the pairs. Every pair must have a nonempty
/// preimage.
///
/// `joint_pmf` is row-major: the pair `(i, j)` of symbol `i` of `model1`
/// with symbol `j` of `model2` sits at `i * model2.range_len() + j`.
pub fn product_observation_model(
    model1: &ObservationModel,
    model2: &ObservationModel,
    joint_pmf: &[f64],
) -> Result<ObservationModel> {
    if model1.space() != model2.space() {
        return Err(DpkError::SpaceMismatch);
    }
    let expected = model1.range_len() * model2.range_len();
    if joint_pmf.len() != expected {
        return Err(DpkError::ShapeMismatch(format!(
            "joint pmf has {} entries for {} pairs",
            joint_pmf.len(),
            expected
        )));
    }
    let mut symbols = Vec::with_capacity(expected);
    let mut preimages = Vec::with_capacity(expected);
    for (i, s1) in model1.symbols().iter().enumerate() {
        for (j, s2) in model2.symbols().iter().enumerate() {
            let symbol = format!("({s1},{s2})");
            let preimage = model1.preimages()[i].intersect(&model2.preimages()[j]);
            if preimage.is_empty() {
                return Err(DpkError::EmptyPreimage(symbol));
            }
            symbols.push(symbol);
            preimages.push(preimage);
        }
    }
    ObservationModel::new(model1.space().clone(), symbols, joint_pmf.to_vec(), preimages)
}
