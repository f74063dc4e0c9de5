//! Run reports: one record per step, serialized as JSON and as a flat CSV
//! table for plotting.
//!
//! Every floating-point value is quantized to twelve significant digits
//! before serialization so that identical runs produce byte-identical
//! output.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{DpkError, Result};

/// Quantizes to twelve significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: String,
    pub stop_reason: String,
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_check: Option<SelfCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Symbols observed at this step (empty at step 0).
    pub batch: Vec<String>,
    pub partition: PartitionSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hausdorff_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hausdorff_to_final: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<QueryRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub blocks: Vec<BlockSummary>,
    pub remainder_atoms: Vec<String>,
    pub remainder_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    /// Generating symbol, or joined symbols for coarse blocks.
    pub symbol: String,
    pub atoms: Vec<String>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_guaranteed: Option<bool>,
    /// Exhaustive confirmation recorded whenever the guarantee fired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_confirmed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sure_loss_guaranteed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sure_loss_confirmed: Option<bool>,
}

impl QueryRecord {
    pub fn named(name: &str) -> Self {
        QueryRecord {
            name: name.to_string(),
            value: None,
            lower: None,
            upper: None,
            bound_lower: None,
            bound_upper: None,
            behavior: None,
            contraction_guaranteed: None,
            contraction_confirmed: None,
            sure_loss_guaranteed: None,
            sure_loss_confirmed: None,
        }
    }
}

/// Behavior counts over every event of the space, with one witness event
/// per class (smallest bitmask, rendered as its atom list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub events: usize,
    pub counts: BTreeMap<String, usize>,
    pub witnesses: BTreeMap<String, Vec<String>>,
}

/// Outcome of the seeded self-checks (run verbs with `--seed`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub seed: u64,
    pub sampled_events: usize,
    pub passed: bool,
    pub detail: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        // Trailing newline so files end cleanly.
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat per-step table: one row per (step, query), step metrics repeated;
    /// steps without queries emit a single row with empty query columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record([
                "step",
                "batch",
                "tv_step",
                "hausdorff_step",
                "hausdorff_to_final",
                "remainder_mass",
                "query",
                "value",
                "lower",
                "upper",
                "bound_lower",
                "bound_upper",
                "behavior",
            ])
            .map_err(|e| DpkError::InvalidConfig(e.to_string()))?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{:.11e}", x)).unwrap_or_default();
        for step in &self.steps {
            let base = [
                step.step.to_string(),
                step.batch.join(" "),
                fmt(step.tv_step),
                fmt(step.hausdorff_step),
                fmt(step.hausdorff_to_final),
                format!("{:.11e}", step.partition.remainder_mass),
            ];
            if step.queries.is_empty() {
                let mut row: Vec<String> = base.to_vec();
                row.extend(std::iter::repeat_n(String::new(), 7));
                writer.write_record(&row).map_err(|e| DpkError::InvalidConfig(e.to_string()))?;
            }
            for q in &step.queries {
                let mut row: Vec<String> = base.to_vec();
                row.push(q.name.clone());
                row.push(fmt(q.value));
                row.push(fmt(q.lower));
                row.push(fmt(q.upper));
                row.push(fmt(q.bound_lower));
                row.push(fmt(q.bound_upper));
                row.push(q.behavior.clone().unwrap_or_default());
                writer.write_record(&row).map_err(|e| DpkError::InvalidConfig(e.to_string()))?;
            }
        }
        let bytes = writer.into_inner().map_err(|e| DpkError::InvalidConfig(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| DpkError::InvalidConfig(e.to_string()))
    }
}
