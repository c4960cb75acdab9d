use crate::model::{utility_of, AgentId, Allocation, HouseId, Instance};

use super::bipartite;
use super::{OracleError, SizeBudget, Verdict};

/// A coalition together with the reallocation of its own endowments that
/// (weakly, if `weak`) blocks an allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingCoalition {
    pub members: Vec<AgentId>,
    pub reallocation: Vec<(AgentId, HouseId)>,
    pub weak: bool,
}

impl BlockingCoalition {
    /// Checks the witness against the definition, independently of the
    /// search that produced it.
    pub fn verify(&self, instance: &Instance, x: &Allocation) -> bool {
        if x.validate(instance).is_err() || self.members.is_empty() {
            return false;
        }
        let n = instance.num_agents();
        if self.members.iter().any(|a| a.0 >= n) || self.reallocation.len() != self.members.len() {
            return false;
        }
        let pool: Vec<HouseId> = self.members.iter().filter_map(|&a| instance.endowment(a)).collect();
        let mut covered = vec![false; n];
        let mut used: Vec<HouseId> = Vec::new();
        for &(a, h) in &self.reallocation {
            if !self.members.contains(&a) || covered[a.0] || !pool.contains(&h) || used.contains(&h) {
                return false;
            }
            covered[a.0] = true;
            used.push(h);
        }
        let mut strict = 0;
        for &(a, h) in &self.reallocation {
            let (new, old) = (utility_of(instance, a, Some(h)), utility_of(instance, a, x.get(a)));
            if new < old {
                return false;
            }
            if new > old {
                strict += 1;
            }
        }
        if self.weak {
            strict > 0
        } else {
            strict == self.members.len()
        }
    }
}

fn subset(pool: &[AgentId], mask: u64) -> Vec<AgentId> {
    pool.iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, &a)| a)
        .collect()
}

fn endowments(instance: &Instance, members: &[AgentId]) -> Vec<HouseId> {
    members.iter().filter_map(|&a| instance.endowment(a)).collect()
}

fn satisfied(instance: &Instance, x: &Allocation, a: AgentId) -> bool {
    utility_of(instance, a, x.get(a)).is_satisfied()
}

/// Core check. Only owners who are unsatisfied under `x` can gain strictly,
/// and an agent without a house brings nothing to trade, so the search runs
/// over subsets of unsatisfied owners in increasing bitmask order.
pub fn is_core_stable(
    instance: &Instance,
    x: &Allocation,
    budget: &SizeBudget,
) -> Result<Verdict<BlockingCoalition>, OracleError> {
    budget.check_coalitions(instance)?;
    x.validate(instance)?;
    let pool: Vec<AgentId> = instance
        .agents()
        .filter(|&a| instance.endowment(a).is_some() && !satisfied(instance, x, a))
        .collect();
    Ok(Verdict::from_option(first_strict_block(instance, x, &pool)))
}

/// Core check over every subset of agents, with no pruning.
pub fn is_core_stable_unpruned(
    instance: &Instance,
    x: &Allocation,
    budget: &SizeBudget,
) -> Result<Verdict<BlockingCoalition>, OracleError> {
    budget.check_coalitions(instance)?;
    x.validate(instance)?;
    let pool: Vec<AgentId> = instance.agents().collect();
    Ok(Verdict::from_option(first_strict_block(instance, x, &pool)))
}

fn first_strict_block(instance: &Instance, x: &Allocation, pool: &[AgentId]) -> Option<BlockingCoalition> {
    (1u64..1 << pool.len()).find_map(|mask| {
        let members = subset(pool, mask);
        let houses = endowments(instance, &members);
        let improves = |a: AgentId, h: HouseId| {
            utility_of(instance, a, Some(h)) > utility_of(instance, a, x.get(a))
        };
        bipartite::saturate(&members, &houses, improves).map(|reallocation| BlockingCoalition {
            members,
            reallocation,
            weak: false,
        })
    })
}

/// Strict-core check: no coalition of owners can reshuffle its own houses so
/// that nobody loses and somebody gains.
pub fn is_strict_core_stable(
    instance: &Instance,
    x: &Allocation,
    budget: &SizeBudget,
) -> Result<Verdict<BlockingCoalition>, OracleError> {
    budget.check_coalitions(instance)?;
    x.validate(instance)?;
    // A reallocation must hand every member one of the members' houses, so
    // members without a house make the coalition infeasible.
    let owners: Vec<AgentId> = instance.agents().filter(|&a| instance.endowment(a).is_some()).collect();
    for mask in 1u64..1 << owners.len() {
        let members = subset(&owners, mask);
        let houses = endowments(instance, &members);
        let keep: Vec<AgentId> = members.iter().copied().filter(|&a| satisfied(instance, x, a)).collect();
        for &j in members.iter().filter(|&&a| !satisfied(instance, x, a)) {
            let mut group = keep.clone();
            group.push(j);
            let Some(mut pairs) = bipartite::saturate(&group, &houses, |a, h| instance.is_acceptable(a, h)) else {
                continue;
            };
            let taken: Vec<HouseId> = pairs.iter().map(|&(_, h)| h).collect();
            let mut spare = houses.iter().copied().filter(|h| !taken.contains(h));
            for &a in &members {
                if !group.contains(&a) {
                    pairs.push((a, spare.next().expect("one house per member")));
                }
            }
            pairs.sort();
            return Ok(Verdict::Fails(BlockingCoalition {
                members,
                reallocation: pairs,
                weak: true,
            }));
        }
    }
    Ok(Verdict::Holds)
}
