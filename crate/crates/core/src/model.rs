//! Housing markets with existing tenants under dichotomous preferences.
//!
//! Agents and houses carry string labels on the outside and dense indices on
//! the inside. Every algorithm iterates in index order, so tie-breaking is a
//! function of the input order alone.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense index of an agent inside an [`Instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

/// Dense index of a house inside an [`Instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HouseId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl HouseId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("house `{house}` is the endowment of both `{first}` and `{second}`")]
    DuplicateEndowment {
        house: String,
        first: String,
        second: String,
    },
    #[error("{field}: unknown house `{house}`")]
    UnknownHouse { field: String, house: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("duplicate agent id `{0}`")]
    DuplicateAgentId(String),
    #[error("duplicate house id `{0}`")]
    DuplicateHouseId(String),
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
}

/// One agent as it appears in an instance document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAgent {
    pub id: String,
    pub endowment: Option<String>,
    pub acceptable: Vec<String>,
}

/// Unvalidated instance data, shaped like the instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInstance {
    pub agents: Vec<RawAgent>,
    pub houses: Vec<String>,
}

/// A validated market `(N, H, endowment, acceptable sets)`.
///
/// Immutable after construction. The endowment map is injective and every
/// referenced house belongs to the market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agent_labels: Vec<String>,
    house_labels: Vec<String>,
    endowment: Vec<Option<HouseId>>,
    acceptable: Vec<BTreeSet<HouseId>>,
}

/// 1-0 utility: one for an acceptable house, zero for anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utility(u8);

impl Utility {
    pub const ZERO: Utility = Utility(0);
    pub const ONE: Utility = Utility(1);

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_satisfied(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Checks every [`Instance`] invariant and resolves labels to indices.
pub fn validate_instance(raw: &RawInstance) -> Result<Instance, ModelError> {
    let mut house_index = HashMap::with_capacity(raw.houses.len());
    for (i, h) in raw.houses.iter().enumerate() {
        if house_index.insert(h.as_str(), HouseId(i)).is_some() {
            return Err(ModelError::DuplicateHouseId(h.clone()));
        }
    }
    let mut seen_agents = HashMap::with_capacity(raw.agents.len());
    let mut owner: HashMap<HouseId, usize> = HashMap::new();
    let mut endowment = Vec::with_capacity(raw.agents.len());
    let mut acceptable = Vec::with_capacity(raw.agents.len());
    for (i, agent) in raw.agents.iter().enumerate() {
        if seen_agents.insert(agent.id.as_str(), i).is_some() {
            return Err(ModelError::DuplicateAgentId(agent.id.clone()));
        }
        let lookup = |field: &str, h: &str| {
            house_index
                .get(h)
                .copied()
                .ok_or_else(|| ModelError::UnknownHouse {
                    field: format!("agents[{i}].{field}"),
                    house: h.to_string(),
                })
        };
        let own = match &agent.endowment {
            Some(h) => {
                let id = lookup("endowment", h)?;
                if let Some(&prev) = owner.get(&id) {
                    return Err(ModelError::DuplicateEndowment {
                        house: h.clone(),
                        first: raw.agents[prev].id.clone(),
                        second: agent.id.clone(),
                    });
                }
                owner.insert(id, i);
                Some(id)
            }
            None => None,
        };
        let acc = agent
            .acceptable
            .iter()
            .map(|h| lookup("acceptable", h))
            .collect::<Result<BTreeSet<_>, _>>()?;
        endowment.push(own);
        acceptable.push(acc);
    }
    Ok(Instance {
        agent_labels: raw.agents.iter().map(|a| a.id.clone()).collect(),
        house_labels: raw.houses.clone(),
        endowment,
        acceptable,
    })
}

impl Instance {
    /// Builds an instance from indices, labelling agents `1..=n` and houses
    /// `h1..=hm`.
    pub fn from_indices(
        houses: usize,
        endowment: Vec<Option<usize>>,
        acceptable: Vec<Vec<usize>>,
    ) -> Result<Instance, ModelError> {
        if endowment.len() != acceptable.len() {
            return Err(ModelError::InvalidAllocation(format!(
                "{} endowments for {} acceptable sets",
                endowment.len(),
                acceptable.len()
            )));
        }
        let house_label = |h: usize| format!("h{}", h + 1);
        let raw = RawInstance {
            agents: endowment
                .iter()
                .zip(&acceptable)
                .enumerate()
                .map(|(i, (own, acc))| RawAgent {
                    id: (i + 1).to_string(),
                    endowment: own.map(house_label),
                    acceptable: acc.iter().map(|&h| house_label(h)).collect(),
                })
                .collect(),
            houses: (0..houses).map(house_label).collect(),
        };
        validate_instance(&raw)
    }

    pub fn num_agents(&self) -> usize {
        self.agent_labels.len()
    }

    pub fn num_houses(&self) -> usize {
        self.house_labels.len()
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = AgentId> + Clone {
        (0..self.num_agents()).map(AgentId)
    }

    pub fn houses(&self) -> impl ExactSizeIterator<Item = HouseId> + Clone {
        (0..self.num_houses()).map(HouseId)
    }

    pub fn agent_label(&self, agent: AgentId) -> &str {
        &self.agent_labels[agent.0]
    }

    pub fn house_label(&self, house: HouseId) -> &str {
        &self.house_labels[house.0]
    }

    pub fn agent_by_label(&self, label: &str) -> Option<AgentId> {
        self.agent_labels.iter().position(|a| a == label).map(AgentId)
    }

    pub fn house_by_label(&self, label: &str) -> Option<HouseId> {
        self.house_labels.iter().position(|h| h == label).map(HouseId)
    }

    pub fn endowment(&self, agent: AgentId) -> Option<HouseId> {
        self.endowment[agent.0]
    }

    pub fn acceptable(&self, agent: AgentId) -> &BTreeSet<HouseId> {
        &self.acceptable[agent.0]
    }

    pub fn is_acceptable(&self, agent: AgentId, house: HouseId) -> bool {
        self.acceptable[agent.0].contains(&house)
    }

    /// Whether the agent owns a house it finds acceptable.
    pub fn has_acceptable_endowment(&self, agent: AgentId) -> bool {
        self.endowment(agent)
            .is_some_and(|h| self.is_acceptable(agent, h))
    }

    /// Agent owning `house`, if any.
    pub fn owner(&self, house: HouseId) -> Option<AgentId> {
        self.endowment
            .iter()
            .position(|&e| e == Some(house))
            .map(AgentId)
    }

    /// The same market with one agent's acceptable set replaced.
    pub fn with_acceptable(&self, agent: AgentId, reported: BTreeSet<HouseId>) -> Instance {
        let mut out = self.clone();
        out.acceptable[agent.0] = reported;
        out
    }

    /// The endowment as an allocation (unendowed agents get nothing).
    pub fn endowment_allocation(&self) -> Allocation {
        Allocation {
            assignment: self.endowment.clone(),
        }
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            agents: self
                .agents()
                .map(|a| RawAgent {
                    id: self.agent_label(a).to_string(),
                    endowment: self.endowment(a).map(|h| self.house_label(h).to_string()),
                    acceptable: self
                        .acceptable(a)
                        .iter()
                        .map(|&h| self.house_label(h).to_string())
                        .collect(),
                })
                .collect(),
            houses: self.house_labels.clone(),
        }
    }

    fn check_agent(&self, agent: AgentId) -> Result<(), ModelError> {
        if agent.0 < self.num_agents() {
            Ok(())
        } else {
            Err(ModelError::UnknownAgent(format!("#{}", agent.0)))
        }
    }
}

/// Injective partial map from agents to houses. `None` means the agent
/// receives nothing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    assignment: Vec<Option<HouseId>>,
}

impl Allocation {
    /// Validates injectivity and membership against `instance`.
    pub fn new(instance: &Instance, assignment: Vec<Option<HouseId>>) -> Result<Self, ModelError> {
        if assignment.len() != instance.num_agents() {
            return Err(ModelError::InvalidAllocation(format!(
                "{} entries for {} agents",
                assignment.len(),
                instance.num_agents()
            )));
        }
        let mut taken = vec![false; instance.num_houses()];
        for (i, h) in assignment.iter().enumerate() {
            let Some(h) = h else { continue };
            let slot = taken.get_mut(h.0).ok_or_else(|| {
                ModelError::InvalidAllocation(format!("agent #{i} assigned unknown house #{}", h.0))
            })?;
            if *slot {
                return Err(ModelError::InvalidAllocation(format!(
                    "house `{}` assigned twice",
                    instance.house_label(*h)
                )));
            }
            *slot = true;
        }
        Ok(Allocation { assignment })
    }

    /// Convenience constructor from house indices.
    pub fn from_indices(instance: &Instance, assignment: &[Option<usize>]) -> Result<Self, ModelError> {
        Self::new(instance, assignment.iter().map(|h| h.map(HouseId)).collect())
    }

    pub fn empty(instance: &Instance) -> Self {
        Allocation {
            assignment: vec![None; instance.num_agents()],
        }
    }

    pub fn get(&self, agent: AgentId) -> Option<HouseId> {
        self.assignment[agent.0]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<HouseId>] {
        &self.assignment
    }

    /// Re-checks this allocation against `instance`.
    pub fn validate(&self, instance: &Instance) -> Result<(), ModelError> {
        Allocation::new(instance, self.assignment.clone()).map(|_| ())
    }

    pub(crate) fn set(&mut self, agent: AgentId, house: Option<HouseId>) {
        self.assignment[agent.0] = house;
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<Option<HouseId>>) -> Self {
        Allocation { assignment }
    }
}

/// Utility of `agent` for `house` (`None` is the null house).
pub fn utility(instance: &Instance, agent: AgentId, house: Option<HouseId>) -> Result<Utility, ModelError> {
    instance.check_agent(agent)?;
    if let Some(h) = house {
        if h.0 >= instance.num_houses() {
            return Err(ModelError::UnknownHouse {
                field: "house".into(),
                house: format!("#{}", h.0),
            });
        }
    }
    Ok(utility_of(instance, agent, house))
}

pub(crate) fn utility_of(instance: &Instance, agent: AgentId, house: Option<HouseId>) -> Utility {
    match house {
        Some(h) if instance.is_acceptable(agent, h) => Utility::ONE,
        _ => Utility::ZERO,
    }
}

/// Number of satisfied agents.
pub fn welfare(instance: &Instance, allocation: &Allocation) -> Result<usize, ModelError> {
    Ok(satisfied_set(instance, allocation)?.len())
}

/// Agents holding an acceptable house, in index order.
pub fn satisfied_set(instance: &Instance, allocation: &Allocation) -> Result<Vec<AgentId>, ModelError> {
    allocation.validate(instance)?;
    Ok(satisfied_agents(instance, allocation).collect())
}

pub(crate) fn satisfied_agents<'a>(
    instance: &'a Instance,
    allocation: &'a Allocation,
) -> impl Iterator<Item = AgentId> + 'a {
    instance
        .agents()
        .filter(move |&a| utility_of(instance, a, allocation.get(a)).is_satisfied())
}

pub(crate) fn welfare_of(instance: &Instance, allocation: &Allocation) -> usize {
    satisfied_agents(instance, allocation).count()
}
