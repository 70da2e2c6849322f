//! Level fitness functions. Every metric is minimised.
//!
//! All but Ability share the playability gate: while the agent fails to
//! finish (`p < 1`) the score is `-p`, and only a completed level earns the
//! metric-specific bonus.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, NodeBudget, SearchLimit, UnknownName};
use crate::error::MetricError;
use crate::level::Level;
use crate::sim::{run_playthrough_with, EventType, Limits, PlaythroughResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricId {
    Jump,
    Event,
    FailRate,
    Ability,
    Variance,
}

impl MetricId {
    pub const ALL: [MetricId; 5] = [
        MetricId::Jump,
        MetricId::Event,
        MetricId::FailRate,
        MetricId::Ability,
        MetricId::Variance,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            MetricId::Jump => "jump",
            MetricId::Event => "event",
            MetricId::FailRate => "failrate",
            MetricId::Ability => "ability",
            MetricId::Variance => "variance",
        }
    }

    /// Game simulations one evaluation costs.
    pub const fn simulations(self) -> usize {
        match self {
            MetricId::Ability => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(UnknownName)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
}

impl MetricScore {
    pub fn new(value: f64, components: &[(&str, f64)]) -> Self {
        MetricScore {
            value,
            components: components.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.get(name).copied()
    }
}

fn gated(p: f64, bonus: f64) -> f64 {
    if p < 1.0 {
        -p
    } else {
        -p - bonus
    }
}

pub fn jump_metric(result: &PlaythroughResult) -> MetricScore {
    let jumps = result.n_jumps as f64;
    MetricScore::new(gated(result.p, jumps), &[("p", result.p), ("jumps", jumps)])
}

pub fn event_metric(result: &PlaythroughResult) -> MetricScore {
    let count = result.events.len() as f64;
    MetricScore::new(gated(result.p, count), &[("p", result.p), ("events", count)])
}

/// Uses the fail rate as a fraction; the result stores it in percent.
pub fn fail_rate_metric(result: &PlaythroughResult) -> MetricScore {
    let fr = result.fail_rate / 100.0;
    MetricScore::new(gated(result.p, fr), &[("p", result.p), ("fail_rate", fr)])
}

pub fn ability_metric(perfect: &PlaythroughResult, blind: &PlaythroughResult) -> Result<MetricScore, MetricError> {
    if perfect.persona != blind.persona || perfect.blind || !blind.blind {
        return Err(MetricError::MismatchedPersona);
    }
    let (pp, pb) = (perfect.p, blind.p);
    let value = if pp >= 1.0 && pb < 1.0 { -1.0 } else { pb - pp };
    Ok(MetricScore::new(value, &[("p_perfect", pp), ("p_blind", pb)]))
}

/// Population standard deviation over the mean. Zero for a single value or
/// a zero mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::EmptyList);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 || mean == 0.0 {
        return Ok(0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(libm::sqrt(var) / mean)
}

pub fn variance_metric(result: &PlaythroughResult) -> MetricScore {
    variance_metric_excluding(result, &[])
}

/// Variance metric over events whose kind is not in `excluded`.
pub fn variance_metric_excluding(result: &PlaythroughResult, excluded: &[EventType]) -> MetricScore {
    let (xs, ys): (Vec<f64>, Vec<f64>) = result
        .events
        .iter()
        .filter(|e| !excluded.contains(&e.kind))
        .map(|e| (e.x, e.y))
        .unzip();
    let cv = |v: &[f64]| coefficient_of_variation(v).unwrap_or(0.0);
    let (cv_x, cv_y) = (cv(&xs), cv(&ys));
    MetricScore::new(gated(result.p, cv_x + cv_y), &[("p", result.p), ("cv_x", cv_x), ("cv_y", cv_y)])
}

/// A metric score together with the playthroughs behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub score: MetricScore,
    pub playthroughs: Vec<PlaythroughResult>,
}

impl Evaluation {
    pub fn simulations(&self) -> usize {
        self.playthroughs.len()
    }
}

/// Plays the level (twice for Ability: perfect then blind) and scores it.
pub fn evaluate(metric: MetricId, level: &Level, agent: &AgentConfig, limits: Limits) -> Result<Evaluation, MetricError> {
    evaluate_with(metric, level, agent, limits, &mut NodeBudget)
}

/// [`evaluate`] with a caller-provided search limit.
pub fn evaluate_with(
    metric: MetricId,
    level: &Level,
    agent: &AgentConfig,
    limits: Limits,
    limit: &mut dyn SearchLimit,
) -> Result<Evaluation, MetricError> {
    let perfect = run_playthrough_with(level, &agent.perfect(), limits, limit)?;
    let (score, playthroughs) = match metric {
        MetricId::Jump => (jump_metric(&perfect), alloc::vec![perfect]),
        MetricId::Event => (event_metric(&perfect), alloc::vec![perfect]),
        MetricId::FailRate => (fail_rate_metric(&perfect), alloc::vec![perfect]),
        MetricId::Variance => (variance_metric(&perfect), alloc::vec![perfect]),
        MetricId::Ability => {
            let blind = run_playthrough_with(level, &agent.blind(), limits, limit)?;
            (ability_metric(&perfect, &blind)?, alloc::vec![perfect, blind])
        }
    };
    Ok(Evaluation { score, playthroughs })
}
