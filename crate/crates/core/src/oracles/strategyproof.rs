use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::mechanisms::{run_mechanism, MechanismVariant, PermutationPolicy};
use crate::model::{utility_of, AgentId, HouseId, Instance, Utility};

use super::{OracleError, SizeBudget};

/// A report that raises the agent's true utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manipulation {
    pub agent: AgentId,
    pub reported: BTreeSet<HouseId>,
    pub truthful: Utility,
    pub misreported: Utility,
}

impl Manipulation {
    /// Re-runs the mechanism on both reports and compares true utilities.
    pub fn verify(&self, instance: &Instance, variant: MechanismVariant, policy: &PermutationPolicy) -> bool {
        if self.agent.0 >= instance.num_agents() || self.reported.iter().any(|h| h.0 >= instance.num_houses()) {
            return false;
        }
        let truthful = run_mechanism(instance, variant, policy);
        let lying = run_mechanism(&instance.with_acceptable(self.agent, self.reported.clone()), variant, policy);
        match (truthful, lying) {
            (Ok((x, _)), Ok((y, _))) => {
                utility_of(instance, self.agent, y.get(self.agent)) > utility_of(instance, self.agent, x.get(self.agent))
            }
            _ => false,
        }
    }
}

/// Tries every acceptable-set report for every agent. Returns the first
/// profitable one, scanning agents in index order and reports in increasing
/// bitmask order over the houses.
pub fn check_strategyproofness(
    instance: &Instance,
    variant: MechanismVariant,
    policy: &PermutationPolicy,
    budget: &SizeBudget,
) -> Result<Option<Manipulation>, OracleError> {
    budget.check_misreports(instance)?;
    let (truth, _) = run_mechanism(instance, variant, policy)?;
    let m = instance.num_houses();
    for agent in instance.agents() {
        let truthful = utility_of(instance, agent, truth.get(agent));
        if truthful.is_satisfied() {
            continue;
        }
        let found = (0u64..1 << m)
            .into_par_iter()
            .map(|mask| {
                let reported: BTreeSet<HouseId> = (0..m).filter(|h| mask >> h & 1 == 1).map(HouseId).collect();
                if &reported == instance.acceptable(agent) {
                    return Ok(None);
                }
                let lie = instance.with_acceptable(agent, reported.clone());
                let (y, _) = run_mechanism(&lie, variant, policy)?;
                let misreported = utility_of(instance, agent, y.get(agent));
                Ok((misreported > truthful).then_some(Manipulation {
                    agent,
                    reported,
                    truthful,
                    misreported,
                }))
            })
            .find_map_first(|r: Result<Option<Manipulation>, OracleError>| r.transpose());
        if let Some(found) = found {
            return found.map(Some);
        }
    }
    Ok(None)
}
