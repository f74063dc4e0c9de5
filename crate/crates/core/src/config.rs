//! Session configuration: the JSON document a run is loaded from.
//!
//! A config names the atoms, the observation model (symbols, pmf, preimages
//! as atom-label lists), the priors (one mass vector for precise runs, a
//! generator list for credal runs), and options (tolerance, budget, named
//! event queries, coarsening groups). Streams are parsed separately: one
//! batch of whitespace-separated symbol tokens per line.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{DpkError, Result};
use crate::measure::{Event, ProbMeasure, StateSpace};
use crate::observation::ObservationModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    /// Atom labels, in order.
    pub atoms: Vec<String>,
    pub model: ModelConfig,
    /// Prior masses for precise runs, aligned with `atoms`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
    /// Generator mass vectors for credal runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub options: OptionsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub symbols: Vec<String>,
    pub pmf: Vec<f64>,
    /// One atom-label list per symbol.
    pub preimages: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Named events to evaluate at every step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<QueryConfig>,
    /// Symbol groups for coarse runs; when present, every symbol must
    /// belong to exactly one group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarsening: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sweep_events: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub name: String,
    pub atoms: Vec<String>,
}

/// A validated session: every label resolved, every invariant checked.
#[derive(Debug, Clone)]
pub struct Session {
    pub space: Arc<StateSpace>,
    pub model: ObservationModel,
    pub prior: Option<ProbMeasure>,
    pub generators: Option<Vec<ProbMeasure>>,
    pub queries: Vec<(String, Event)>,
    /// Coarsening groups resolved to symbol indices.
    pub symbol_groups: Option<Vec<Vec<usize>>>,
    pub tolerance: f64,
    pub budget: Option<usize>,
    pub sweep_events: bool,
}

impl SessionConfig {
    pub fn from_json(text: &str) -> Result<SessionConfig> {
        serde_json::from_str(text).map_err(|e| DpkError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolves labels and checks every invariant: distinct atoms, a valid
    /// observation model, well-formed priors, resolvable queries, and
    /// symbol groups that partition the symbol list.
    pub fn validate(&self) -> Result<Session> {
        let space = StateSpace::new(self.atoms.iter().cloned())
            .map_err(|e| DpkError::InvalidConfig(e.to_string()))?;

        let resolve_atoms = |labels: &[String], what: &str| -> Result<Event> {
            let mut indices = Vec::with_capacity(labels.len());
            for label in labels {
                match space.index_of(label) {
                    Some(i) => indices.push(i),
                    None => {
                        return Err(DpkError::InvalidConfig(format!(
                            "{what}: unknown atom label `{label}`"
                        )))
                    }
                }
            }
            Ok(Event::new(indices))
        };

        let mut preimages = Vec::with_capacity(self.model.preimages.len());
        for (i, labels) in self.model.preimages.iter().enumerate() {
            preimages.push(resolve_atoms(labels, &format!("preimage {i}"))?);
        }
        let model = ObservationModel::new(
            space.clone(),
            self.model.symbols.clone(),
            self.model.pmf.clone(),
            preimages,
        )
        .map_err(|e| DpkError::InvalidConfig(e.to_string()))?;
        let violations = model.validate();
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(DpkError::InvalidConfig(format!(
                "observation model violates invariants: {}",
                list.join("; ")
            )));
        }

        let prior = match &self.prior {
            Some(masses) => Some(
                ProbMeasure::new(space.clone(), masses.clone())
                    .map_err(|e| DpkError::InvalidConfig(format!("prior: {e}")))?,
            ),
            None => None,
        };
        let generators = match &self.generators {
            Some(rows) => {
                if rows.is_empty() {
                    return Err(DpkError::InvalidConfig("generator list is empty".into()));
                }
                let mut out = Vec::with_capacity(rows.len());
                for (i, masses) in rows.iter().enumerate() {
                    out.push(
                        ProbMeasure::new(space.clone(), masses.clone())
                            .map_err(|e| DpkError::InvalidConfig(format!("generator {i}: {e}")))?,
                    );
                }
                Some(out)
            }
            None => None,
        };

        let mut queries = Vec::with_capacity(self.options.queries.len());
        for q in &self.options.queries {
            queries.push((q.name.clone(), resolve_atoms(&q.atoms, &format!("query `{}`", q.name))?));
        }

        let symbol_groups = match &self.options.coarsening {
            Some(groups) => {
                let mut resolved: Vec<Vec<usize>> = Vec::with_capacity(groups.len());
                let mut seen = vec![false; model.range_len()];
                for group in groups {
                    let mut indices = Vec::with_capacity(group.len());
                    for symbol in group {
                        let index = model.symbol_index(symbol).ok_or_else(|| {
                            DpkError::InvalidConfig(format!(
                                "coarsening: unknown symbol `{symbol}`"
                            ))
                        })?;
                        if seen[index] {
                            return Err(DpkError::InvalidConfig(format!(
                                "coarsening: symbol `{symbol}` appears in two groups"
                            )));
                        }
                        seen[index] = true;
                        indices.push(index);
                    }
                    resolved.push(indices);
                }
                if let Some(missing) = seen.iter().position(|&s| !s) {
                    return Err(DpkError::InvalidConfig(format!(
                        "coarsening: symbol `{}` belongs to no group",
                        model.symbols()[missing]
                    )));
                }
                Some(resolved)
            }
            None => None,
        };

        Ok(Session {
            space,
            model,
            prior,
            generators,
            queries,
            symbol_groups,
            tolerance: self.options.tolerance.unwrap_or(1e-10),
            budget: self.options.budget,
            sweep_events: self.options.sweep_events,
        })
    }
}

/// Parses a stream: one batch per line, whitespace-separated symbol tokens,
/// blank lines skipped. Unknown tokens are reported with their line number.
pub fn parse_stream(text: &str, model: &ObservationModel) -> Result<Vec<Vec<String>>> {
    let mut batches = Vec::new();
    for (line_number, line) in text.lines().enumerate() {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if tokens.is_empty() {
            continue;
        }
        for token in &tokens {
            if model.symbol_index(token).is_none() {
                return Err(DpkError::InvalidStream(format!(
                    "line {}: unknown symbol `{token}`",
                    line_number + 1
                )));
            }
        }
        batches.push(tokens);
    }
    Ok(batches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> SessionConfig {
        SessionConfig {
            atoms: vec!["a".into(), "b".into(), "c".into()],
            model: ModelConfig {
                symbols: vec!["x".into(), "y".into()],
                pmf: vec![0.25, 0.75],
                preimages: vec![vec!["a".into()], vec!["b".into(), "c".into()]],
            },
            prior: Some(vec![0.2, 0.3, 0.5]),
            generators: None,
            options: OptionsConfig {
                tolerance: Some(1e-8),
                budget: None,
                queries: vec![QueryConfig { name: "A".into(), atoms: vec!["a".into(), "c".into()] }],
                coarsening: None,
                sweep_events: false,
            },
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let config = sample_config();
        let parsed = SessionConfig::from_json(&config.to_json()).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn validate_resolves_labels() {
        let session = sample_config().validate().unwrap();
        assert_eq!(session.model.range_len(), 2);
        assert_eq!(session.queries[0].1, Event::new([0, 2]));
        assert_eq!(session.tolerance, 1e-8);
    }

    #[test]
    fn validate_rejects_unknown_atom() {
        let mut config = sample_config();
        config.model.preimages[0] = vec!["zzz".into()];
        assert!(matches!(config.validate(), Err(DpkError::InvalidConfig(_))));
    }

    #[test]
    fn validate_rejects_bad_pmf() {
        let mut config = sample_config();
        config.model.pmf = vec![0.25, 0.25];
        let err = config.validate().unwrap_err();
        assert!(matches!(err, DpkError::InvalidConfig(ref s) if s.contains("pmf")));
    }

    #[test]
    fn validate_rejects_uncovered_coarsening() {
        let mut config = sample_config();
        config.options.coarsening = Some(vec![vec!["x".into()]]);
        assert!(matches!(config.validate(), Err(DpkError::InvalidConfig(_))));
    }

    #[test]
    fn stream_parsing_skips_blanks_and_reports_lines() {
        let config = sample_config();
        let session = config.validate().unwrap();
        let batches = parse_stream("x y\n\n  y\n", &session.model).unwrap();
        assert_eq!(batches, vec![vec!["x".to_string(), "y".to_string()], vec!["y".to_string()]]);

        let err = parse_stream("x\nq\n", &session.model).unwrap_err();
        assert!(matches!(err, DpkError::InvalidStream(ref s) if s.contains("line 2")));
    }
}
