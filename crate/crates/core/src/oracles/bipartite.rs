//! Augmenting-path matching between agents and houses.
//!
//! Deliberately separate from [`crate::matching`] so the oracles never share
//! code with the mechanisms they check.

use crate::model::{AgentId, HouseId};

/// Assigns every agent in `agents` a distinct house from `houses` subject to
/// `allowed`, or returns `None` if that is impossible. Agents are tried in
/// slice order and houses in slice order.
pub(crate) fn saturate(
    agents: &[AgentId],
    houses: &[HouseId],
    allowed: impl Fn(AgentId, HouseId) -> bool,
) -> Option<Vec<(AgentId, HouseId)>> {
    if agents.len() > houses.len() {
        return None;
    }
    let (holder, size) = maximum(agents, houses, &allowed);
    if size < agents.len() {
        return None;
    }
    let mut pairs: Vec<(AgentId, HouseId)> = holder
        .iter()
        .enumerate()
        .filter_map(|(k, a)| a.map(|a| (agents[a], houses[k])))
        .collect();
    pairs.sort();
    Some(pairs)
}

/// Size of a maximum matching and, per house slot, the agent slot holding it.
pub(crate) fn maximum(
    agents: &[AgentId],
    houses: &[HouseId],
    allowed: &impl Fn(AgentId, HouseId) -> bool,
) -> (Vec<Option<usize>>, usize) {
    fn augment(
        a: usize,
        agents: &[AgentId],
        houses: &[HouseId],
        allowed: &impl Fn(AgentId, HouseId) -> bool,
        visited: &mut [bool],
        holder: &mut [Option<usize>],
    ) -> bool {
        for k in 0..houses.len() {
            if visited[k] || !allowed(agents[a], houses[k]) {
                continue;
            }
            visited[k] = true;
            if holder[k].is_none_or(|b| augment(b, agents, houses, allowed, visited, holder)) {
                holder[k] = Some(a);
                return true;
            }
        }
        false
    }
    let mut holder = vec![None; houses.len()];
    let mut size = 0;
    for a in 0..agents.len() {
        let mut visited = vec![false; houses.len()];
        if augment(a, agents, houses, allowed, &mut visited, &mut holder) {
            size += 1;
        }
    }
    (holder, size)
}
