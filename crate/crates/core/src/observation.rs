//! Observation models and the partitions they induce.
//!
//! An observation mechanism has a finite symbol range with a strictly
//! positive pmf, and one preimage event per symbol. Observed symbols carve
//! blocks out of the state space: the induced partition holds one block per
//! distinct observed symbol plus an explicit remainder block (the complement
//! of the block union), which later observations refine. Block probabilities
//! are assigned mechanically from the pmf; the remainder receives the
//! complement mass.

use std::sync::Arc;

use crate::error::{DpkError, Result};
use crate::measure::{Event, StateSpace, MASS_SUM_TOLERANCE};

/// Observation mechanism: symbols, their pmf, and per-symbol preimages.
///
/// Preimages are pairwise disjoint, nonempty, and need not cover the space;
/// atoms outside every preimage permanently live in the remainder of every
/// induced partition. An optional designated never-observed symbol with
/// positive pmf simulates a countable tail: the remainder mass then never
/// reaches zero and runs stop by tolerance instead of terminality.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    space: Arc<StateSpace>,
    symbols: Vec<String>,
    pmf: Vec<f64>,
    preimages: Vec<Event>,
}

/// One invariant violation reported by [`ObservationModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelViolation {
    /// `pmf[symbol] <= 0`.
    NonpositivePmf { symbol: String, },
    /// The pmf does not sum to one within tolerance.
    PmfSum { sum_str: String },
    /// Two preimages share an atom.
    OverlappingPreimages { first: String, second: String },
    /// A preimage is empty.
    EmptyPreimage { symbol: String },
}

impl std::fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelViolation::NonpositivePmf { symbol } => {
                write!(f, "pmf of `{symbol}` is not strictly positive")
            }
            ModelViolation::PmfSum { sum_str } => write!(f, "pmf sum != 1 (got {sum_str})"),
            ModelViolation::OverlappingPreimages { first, second } => {
                write!(f, "preimages of `{first}` and `{second}` overlap")
            }
            ModelViolation::EmptyPreimage { symbol } => {
                write!(f, "preimage of `{symbol}` is empty")
            }
        }
    }
}

impl ObservationModel {
    /// Builds a model. Construction enforces only structural sanity (distinct
    /// symbols, matching lengths, in-range preimage atoms); the semantic
    /// invariants are reported by [`validate`](Self::validate) so that
    /// diagnostics can list every violation of a bad configuration.
    pub fn new(
        space: Arc<StateSpace>,
        symbols: Vec<String>,
        pmf: Vec<f64>,
        preimages: Vec<Event>,
    ) -> Result<Self> {
        if symbols.is_empty() {
            return Err(DpkError::InvalidModel("no symbols".into()));
        }
        if symbols.len() != pmf.len() || symbols.len() != preimages.len() {
            return Err(DpkError::InvalidModel(format!(
                "{} symbols, {} pmf entries, {} preimages",
                symbols.len(),
                pmf.len(),
                preimages.len()
            )));
        }
        for (i, a) in symbols.iter().enumerate() {
            for b in symbols.iter().skip(i + 1) {
                if a == b {
                    return Err(DpkError::InvalidModel(format!("duplicate symbol `{a}`")));
                }
            }
        }
        for &v in &pmf {
            if !v.is_finite() {
                return Err(DpkError::InvalidModel(format!("non-finite pmf value {v}")));
            }
        }
        for preimage in &preimages {
            if let Some(index) = preimage.max_index() {
                if index >= space.len() {
                    return Err(DpkError::InvalidEvent { index, m: space.len() });
                }
            }
        }
        Ok(ObservationModel { space, symbols, pmf, preimages })
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Number of symbols in the range.
    pub fn range_len(&self) -> usize {
        self.symbols.len()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn preimages(&self) -> &[Event] {
        &self.preimages
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// True when the preimages cover the whole space.
    pub fn preimages_cover_space(&self) -> bool {
        let union = self
            .preimages
            .iter()
            .fold(Event::empty(), |acc, e| acc.union(e));
        union.len() == self.space.len()
    }

    /// Reports every violated model invariant: overlapping preimages,
    /// nonpositive pmf entries, pmf sum away from one, empty preimages.
    /// Diagnostic only; never errors.
    pub fn validate(&self) -> Vec<ModelViolation> {
        let mut violations = Vec::new();
        for (symbol, &v) in self.symbols.iter().zip(&self.pmf) {
            if v <= 0.0 {
                violations.push(ModelViolation::NonpositivePmf { symbol: symbol.clone() });
            }
        }
        let sum: f64 = self.pmf.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
            violations.push(ModelViolation::PmfSum { sum_str: format!("{sum}") });
        }
        for i in 0..self.preimages.len() {
            if self.preimages[i].is_empty() {
                violations.push(ModelViolation::EmptyPreimage { symbol: self.symbols[i].clone() });
            }
            for j in (i + 1)..self.preimages.len() {
                if !self.preimages[i].is_disjoint_from(&self.preimages[j]) {
                    violations.push(ModelViolation::OverlappingPreimages {
                        first: self.symbols[i].clone(),
                        second: self.symbols[j].clone(),
                    });
                }
            }
        }
        violations
    }

    fn resolve(&self, symbol: &str) -> Result<usize> {
        self.symbol_index(symbol)
            .ok_or_else(|| DpkError::UnknownSymbol(symbol.to_string()))
    }

    /// Partition induced by a list of observed symbols: one block per
    /// distinct symbol (first-occurrence order), remainder the complement of
    /// their union. Duplicates within the list are ignored.
    pub fn induce_partition<S: AsRef<str>>(&self, observed: &[S]) -> Result<Partition> {
        let mut seen: Vec<usize> = Vec::new();
        for symbol in observed {
            let index = self.resolve(symbol.as_ref())?;
            if !seen.contains(&index) {
                seen.push(index);
            }
        }
        Ok(self.partition_from_indices(seen))
    }

    fn partition_from_indices(&self, observed: Vec<usize>) -> Partition {
        let blocks: Vec<Event> = observed.iter().map(|&i| self.preimages[i].clone()).collect();
        let union = blocks.iter().fold(Event::empty(), |acc, e| acc.union(e));
        let remainder = union.complement(self.space.len());
        Partition { m: self.space.len(), blocks, remainder, observed }
    }

    /// Refines a partition with freshly observed symbols: existing blocks are
    /// unchanged, new blocks are carved out of the remainder. Re-observing a
    /// symbol is rejected rather than silently ignored.
    pub fn refine_partition<S: AsRef<str>>(
        &self,
        partition: &Partition,
        new_symbols: &[S],
    ) -> Result<Partition> {
        self.check_partition(partition)?;
        let mut observed = partition.observed.clone();
        for symbol in new_symbols {
            let index = self.resolve(symbol.as_ref())?;
            if partition.observed.contains(&index) {
                return Err(DpkError::DuplicateObservation(symbol.as_ref().to_string()));
            }
            if !observed[partition.observed.len()..].contains(&index) {
                observed.push(index);
            }
        }
        Ok(self.partition_from_indices(observed))
    }

    /// Mechanical block masses: block `j` gets the pmf of its symbol, the
    /// remainder gets the complement `1 − Σ` (exactly zero when the remainder
    /// is the empty event).
    pub fn mechanical_masses(&self, partition: &Partition) -> Result<PartitionMasses> {
        self.check_partition(partition)?;
        let block_masses: Vec<f64> =
            partition.observed.iter().map(|&i| self.pmf[i]).collect();
        let remainder_mass = if partition.remainder.is_empty() {
            0.0
        } else {
            let assigned: f64 = block_masses.iter().sum();
            (1.0 - assigned).max(0.0)
        };
        Ok(PartitionMasses { block_masses, remainder_mass })
    }

    /// Checks that a partition was generated from this model.
    fn check_partition(&self, partition: &Partition) -> Result<()> {
        if partition.m != self.space.len() {
            return Err(DpkError::ModelMismatch(format!(
                "partition over {} atoms, model over {}",
                partition.m,
                self.space.len()
            )));
        }
        for (block, &index) in partition.blocks.iter().zip(&partition.observed) {
            if index >= self.symbols.len() {
                return Err(DpkError::ModelMismatch(format!("symbol index {index} out of range")));
            }
            if *block != self.preimages[index] {
                return Err(DpkError::ModelMismatch(format!(
                    "block for `{}` is not the model preimage",
                    self.symbols[index]
                )));
            }
        }
        Ok(())
    }
}

/// Partition of the state space: one block per observed symbol, in
/// observation order, plus the remainder block (possibly empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    m: usize,
    blocks: Vec<Event>,
    remainder: Event,
    observed: Vec<usize>,
}

impl Partition {
    /// General-purpose constructor for partitions that do not come from an
    /// observation model (coarsened partitions carry no symbol linkage).
    pub(crate) fn from_parts(
        m: usize,
        blocks: Vec<Event>,
        remainder: Event,
        observed: Vec<usize>,
    ) -> Self {
        Partition { m, blocks, remainder, observed }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }

    pub fn remainder(&self) -> &Event {
        &self.remainder
    }

    /// Indices (into the generating model's symbol list) of the observed
    /// symbols, in first-occurrence order.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    /// All pieces: blocks first, then the remainder.
    pub fn pieces(&self) -> impl Iterator<Item = &Event> {
        self.blocks.iter().chain(std::iter::once(&self.remainder))
    }

    /// Number of blocks (excluding the remainder).
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Terminal means the remainder is empty: no further observation can
    /// refine the partition.
    pub fn is_terminal(&self) -> bool {
        self.remainder.is_empty()
    }

    /// True when every piece of `coarse` (including its remainder) is a
    /// union of pieces of `self`. Partitions over different spaces are never
    /// refinements of one another.
    pub fn refines(&self, coarse: &Partition) -> bool {
        if self.m != coarse.m {
            return false;
        }
        // Both cover the space, so it suffices that every nonempty fine
        // piece lies inside a single coarse piece.
        self.pieces().filter(|p| !p.is_empty()).all(|fine| {
            coarse
                .pieces()
                .any(|c| fine.is_subset_of(c))
        })
    }
}

/// Masses attached to a partition: one per block, plus the remainder mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMasses {
    block_masses: Vec<f64>,
    remainder_mass: f64,
}

impl PartitionMasses {
    pub(crate) fn from_parts(block_masses: Vec<f64>, remainder_mass: f64) -> Self {
        PartitionMasses { block_masses, remainder_mass }
    }

    pub fn block_masses(&self) -> &[f64] {
        &self.block_masses
    }

    pub fn remainder_mass(&self) -> f64 {
        self.remainder_mass
    }

    /// Block masses followed by the remainder mass, matching
    /// [`Partition::pieces`] order.
    pub fn piece_masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.block_masses
            .iter()
            .copied()
            .chain(std::iter::once(self.remainder_mass))
    }

    pub fn total(&self) -> f64 {
        self.block_masses.iter().sum::<f64>() + self.remainder_mass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::VALUE_TOLERANCE;

    /// Binomial(10, 0.8) pushforward over eleven atoms, preimage of symbol
    /// `k` being atom `k`.
    pub(crate) fn binomial_model() -> ObservationModel {
        let space = StateSpace::indexed(11);
        let n = 10u32;
        let pmf: Vec<f64> = (0..=n)
            .map(|k| {
                let choose: f64 = (0..k).fold(1.0, |acc, i| {
                    acc * (n - i) as f64 / (i + 1) as f64
                });
                choose * 0.8f64.powi(k as i32) * 0.2f64.powi((n - k) as i32)
            })
            .collect();
        let preimages: Vec<Event> = (0..=n as usize).map(|k| Event::new([k])).collect();
        let symbols: Vec<String> = (0..=n).map(|k| k.to_string()).collect();
        ObservationModel::new(space, symbols, pmf, preimages).unwrap()
    }

    /// Four-symbol model over four atoms with pmf (1/6, 1/3, 1/8, 3/8).
    pub(crate) fn four_bin_model() -> ObservationModel {
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
    fn validate_accepts_good_model() {
        assert!(binomial_model().validate().is_empty());
        assert!(four_bin_model().validate().is_empty());
    }

    #[test]
    fn validate_reports_overlap() {
        let space = StateSpace::indexed(3);
        let model = ObservationModel::new(
            space,
            vec!["x".into(), "y".into()],
            vec![0.5, 0.5],
            vec![Event::new([0, 1]), Event::new([1, 2])],
        )
        .unwrap();
        let violations = model.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, ModelViolation::OverlappingPreimages { .. })));
    }

    #[test]
    fn validate_reports_pmf_sum() {
        let space = StateSpace::indexed(2);
        let model = ObservationModel::new(
            space,
            vec!["x".into(), "y".into()],
            vec![0.5, 0.4],
            vec![Event::new([0]), Event::new([1])],
        )
        .unwrap();
        let violations = model.validate();
        assert!(violations.iter().any(|v| matches!(v, ModelViolation::PmfSum { .. })));
    }

    #[test]
    fn induce_binomial_partition() {
        let model = binomial_model();
        let partition = model.induce_partition(&["3", "5", "7"]).unwrap();
        assert_eq!(partition.blocks(), &[Event::new([3]), Event::new([5]), Event::new([7])]);
        assert_eq!(
            partition.remainder(),
            &Event::new([0, 1, 2, 4, 6, 8, 9, 10])
        );
        assert!(!partition.is_terminal());
    }

    #[test]
    fn induce_empty_observation_gives_full_remainder() {
        let model = four_bin_model();
        let partition = model.induce_partition::<&str>(&[]).unwrap();
        assert_eq!(partition.block_count(), 0);
        assert_eq!(partition.remainder(), &Event::full(4));
    }

    #[test]
    fn induce_all_symbols_is_terminal() {
        let model = four_bin_model();
        let partition = model.induce_partition(&["1", "2", "3", "4"]).unwrap();
        assert!(partition.is_terminal());
    }

    #[test]
    fn induce_deduplicates_first_occurrence() {
        let model = four_bin_model();
        let a = model.induce_partition(&["2", "1", "2", "1"]).unwrap();
        let b = model.induce_partition(&["2", "1"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn induce_unknown_symbol_errors() {
        let model = four_bin_model();
        assert!(matches!(
            model.induce_partition(&["9"]),
            Err(DpkError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn refine_four_bin_reaches_terminal() {
        let model = four_bin_model();
        let first = model.induce_partition(&["1"]).unwrap();
        let second = model.refine_partition(&first, &["2", "3", "4"]).unwrap();
        assert_eq!(second.block_count(), 4);
        assert!(second.is_terminal());
        assert!(second.refines(&first));
    }

    #[test]
    fn refine_with_empty_batch_is_identity() {
        let model = binomial_model();
        let partition = model.induce_partition(&["3", "5", "7"]).unwrap();
        let same = model.refine_partition::<&str>(&partition, &[]).unwrap();
        assert_eq!(partition, same);
    }

    #[test]
    fn refine_carves_from_remainder() {
        let model = binomial_model();
        let partition = model.induce_partition(&["3", "5", "7"]).unwrap();
        let refined = model.refine_partition(&partition, &["0"]).unwrap();
        assert_eq!(refined.blocks()[3], Event::new([0]));
        assert_eq!(
            refined.remainder(),
            &partition.remainder().minus(&Event::new([0]))
        );
        assert!(refined.refines(&partition));
    }

    #[test]
    fn refine_rejects_duplicate_observation() {
        let model = four_bin_model();
        let partition = model.induce_partition(&["1"]).unwrap();
        assert!(matches!(
            model.refine_partition(&partition, &["1"]),
            Err(DpkError::DuplicateObservation(_))
        ));
    }

    #[test]
    fn refinement_is_reflexive_and_detects_crossing() {
        let model = binomial_model();
        let p = model.induce_partition(&["3", "5"]).unwrap();
        assert!(p.refines(&p));

        let q = model.induce_partition(&["0"]).unwrap();
        // q's remainder crosses p's blocks and remainder.
        assert!(!q.refines(&p));
    }

    #[test]
    fn refinement_against_coarser_subset() {
        let model = binomial_model();
        let fine = model.induce_partition(&["3", "5", "7"]).unwrap();
        let coarse = model.induce_partition(&["3"]).unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
    }

    #[test]
    fn mechanical_masses_binomial() {
        let model = binomial_model();
        let partition = model.induce_partition(&["3", "5", "7"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        let expected = [
            120.0 * 64.0 / 9_765_625.0,          // C(10,3) 0.8^3 0.2^7
            252.0 * 1024.0 / 9_765_625.0,        // C(10,5) 0.8^5 0.2^5
            120.0 * 16384.0 / 9_765_625.0,       // C(10,7) 0.8^7 0.2^3
        ];
        for (got, want) in masses.block_masses().iter().zip(expected) {
            assert!((got - want).abs() <= VALUE_TOLERANCE);
        }
        assert!((masses.remainder_mass() - 0.7714628608).abs() <= 1e-10);
        assert!((masses.total() - 1.0).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn mechanical_masses_four_bin_first_step() {
        let model = four_bin_model();
        let partition = model.induce_partition(&["1"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        assert!((masses.block_masses()[0] - 1.0 / 6.0).abs() <= VALUE_TOLERANCE);
        assert!((masses.remainder_mass() - 5.0 / 6.0).abs() <= VALUE_TOLERANCE);
    }

    #[test]
    fn mechanical_masses_terminal_remainder_is_exactly_zero() {
        let model = four_bin_model();
        let partition = model.induce_partition(&["1", "2", "3", "4"]).unwrap();
        let masses = model.mechanical_masses(&partition).unwrap();
        assert_eq!(masses.remainder_mass(), 0.0);
    }

    #[test]
    fn mechanical_masses_rejects_foreign_partition() {
        let model = four_bin_model();
        let other = binomial_model();
        let partition = other.induce_partition(&["3"]).unwrap();
        assert!(matches!(
            model.mechanical_masses(&partition),
            Err(DpkError::ModelMismatch(_))
        ));
    }

    #[test]
    fn terminal_iff_remainder_mass_zero_for_covering_model() {
        let model = four_bin_model();
        for observed in [vec!["1"], vec!["1", "2"], vec!["1", "2", "3", "4"]] {
            let partition = model.induce_partition(&observed).unwrap();
            let masses = model.mechanical_masses(&partition).unwrap();
            assert_eq!(partition.is_terminal(), masses.remainder_mass() == 0.0);
        }
    }
}
