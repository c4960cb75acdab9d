//! JSON instance and allocation documents.
//!
//! Canonical form is two-space pretty-printed JSON with a trailing newline,
//! keys in declaration order, agents and houses in instance order. Null
//! assignments are written out explicitly.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::mechanisms::{MechanismTrace, RightVertex};
use crate::model::{validate_instance, welfare_of, Allocation, Instance, ModelError, RawInstance};
use crate::oracles::{Manipulation, Property, PropertyReport, Verdict, Witness};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Invalid(String),
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let raw: RawInstance = serde_json::from_str(text)?;
    Ok(validate_instance(&raw)?)
}

pub fn write_instance(instance: &Instance) -> String {
    to_canonical(&instance.to_raw())
}

pub(crate) fn to_canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub allocation: IndexMap<String, Option<String>>,
    pub welfare: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    #[serde(rename = "W")]
    pub weight: i64,
    pub permutation: Vec<String>,
    pub t: IndexMap<String, u8>,
    pub rounds: Vec<RoundFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundFile {
    pub agent: String,
    pub removed: Vec<RightLabel>,
    /// Optimum after the removal; `null` when no perfect matching survived.
    pub weight: Option<i64>,
    pub accepted: bool,
}

/// Right endpoint of a removed edge: a real house or padding house `o_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RightLabel {
    House(String),
    DummyHouse(usize),
}

impl AllocationFile {
    pub fn new(instance: &Instance, allocation: &Allocation, trace: Option<&MechanismTrace<i64>>) -> Self {
        let label = |a| instance.agent_label(a).to_string();
        AllocationFile {
            allocation: instance
                .agents()
                .map(|a| (label(a), allocation.get(a).map(|h| instance.house_label(h).to_string())))
                .collect(),
            welfare: welfare_of(instance, allocation),
            trace: trace.map(|t| TraceFile {
                weight: t.initial_weight,
                permutation: t.permutation.iter().map(|&a| label(a)).collect(),
                t: instance.agents().map(|a| (label(a), u8::from(t.t[a.0]))).collect(),
                rounds: t
                    .rounds
                    .iter()
                    .map(|r| RoundFile {
                        agent: label(r.agent),
                        removed: r
                            .removed
                            .iter()
                            .map(|v| match *v {
                                RightVertex::House(h) => RightLabel::House(instance.house_label(h).to_string()),
                                RightVertex::Dummy(k) => RightLabel::DummyHouse(k),
                            })
                            .collect(),
                        weight: r.weight,
                        accepted: r.accepted,
                    })
                    .collect(),
            }),
        }
    }

    /// Resolves labels against `instance`. Every agent must appear exactly
    /// once and the stated welfare must match.
    pub fn to_allocation(&self, instance: &Instance) -> Result<Allocation, IoError> {
        let mut assignment = vec![None; instance.num_agents()];
        let mut seen = vec![false; instance.num_agents()];
        for (agent, house) in &self.allocation {
            let a = instance
                .agent_by_label(agent)
                .ok_or_else(|| IoError::Invalid(format!("allocation: unknown agent `{agent}`")))?;
            seen[a.0] = true;
            assignment[a.0] = match house {
                Some(h) => Some(
                    instance
                        .house_by_label(h)
                        .ok_or_else(|| IoError::Invalid(format!("allocation.{agent}: unknown house `{h}`")))?,
                ),
                None => None,
            };
        }
        if let Some(a) = instance.agents().find(|a| !seen[a.0]) {
            return Err(IoError::Invalid(format!(
                "allocation: agent `{}` missing (write null for no house)",
                instance.agent_label(a)
            )));
        }
        let allocation = Allocation::new(instance, assignment)?;
        let actual = welfare_of(instance, &allocation);
        if actual != self.welfare {
            return Err(IoError::Invalid(format!(
                "welfare: stated {} but allocation satisfies {actual}",
                self.welfare
            )));
        }
        Ok(allocation)
    }
}

pub fn write_allocation(instance: &Instance, allocation: &Allocation, trace: Option<&MechanismTrace<i64>>) -> String {
    to_canonical(&AllocationFile::new(instance, allocation, trace))
}

pub fn parse_allocation_file(text: &str) -> Result<AllocationFile, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_allocation(instance: &Instance, text: &str) -> Result<Allocation, IoError> {
    parse_allocation_file(text)?.to_allocation(instance)
}

/// A JSON array of agent ids naming every agent exactly once.
pub fn parse_permutation(instance: &Instance, text: &str) -> Result<Vec<crate::model::AgentId>, IoError> {
    let labels: Vec<String> = serde_json::from_str(text)?;
    labels
        .iter()
        .map(|l| {
            instance
                .agent_by_label(l)
                .ok_or_else(|| IoError::Invalid(format!("permutation: unknown agent `{l}`")))
        })
        .collect()
}

pub fn witness_json(instance: &Instance, witness: &Witness) -> Value {
    let agent = |a| instance.agent_label(a).to_string();
    let allocation = |x: &Allocation| serde_json::to_value(AllocationFile::new(instance, x, None)).expect("serializable");
    match witness {
        Witness::Violator(a) => json!({ "violator": agent(*a) }),
        Witness::Dominating(y) => json!({ "dominating": allocation(y) }),
        Witness::Coalition(c) => json!({
            "coalition": c.members.iter().map(|&a| agent(a)).collect::<Vec<_>>(),
            "reallocation": c
                .reallocation
                .iter()
                .map(|&(a, h)| (agent(a), instance.house_label(h).to_string()))
                .collect::<IndexMap<_, _>>(),
            "weak": c.weak,
        }),
        Witness::WelfareGap {
            achieved,
            optimum,
            better,
        } => json!({ "achieved": achieved, "optimum": optimum, "better": allocation(better) }),
    }
}

pub fn manipulation_json(instance: &Instance, m: &Manipulation) -> Value {
    json!({
        "agent": instance.agent_label(m.agent),
        "reported": m.reported.iter().map(|&h| instance.house_label(h)).collect::<Vec<_>>(),
        "truthful_utility": m.truthful.value(),
        "misreport_utility": m.misreported.value(),
    })
}

/// Machine-readable rendering of a property report.
pub fn report_json(instance: &Instance, report: &PropertyReport) -> Value {
    let verdicts: serde_json::Map<String, Value> = report
        .verdicts
        .iter()
        .map(|(p, v): (&Property, &Verdict<Witness>)| {
            let value = match v {
                Verdict::Holds => json!({ "holds": true }),
                Verdict::Fails(w) => json!({ "holds": false, "witness": witness_json(instance, w) }),
            };
            (p.name().to_string(), value)
        })
        .collect();
    Value::Object(verdicts)
}
