use std::ops::ControlFlow;

use crate::model::{satisfied_agents, utility_of, AgentId, Allocation, HouseId, Instance};

use super::bipartite;
use super::welfare::for_each_allocation;
use super::{OracleError, SizeBudget, Verdict};

/// Whether `y` makes nobody worse off and somebody better off than `x`.
pub fn dominates(instance: &Instance, y: &Allocation, x: &Allocation) -> bool {
    if y.validate(instance).is_err() || x.validate(instance).is_err() {
        return false;
    }
    let mut strict = false;
    for a in instance.agents() {
        let (uy, ux) = (utility_of(instance, a, y.get(a)), utility_of(instance, a, x.get(a)));
        if uy < ux {
            return false;
        }
        strict |= uy > ux;
    }
    strict
}

/// Exhaustive check; the witness is the first dominating allocation in
/// enumeration order.
pub fn is_pareto_optimal(
    instance: &Instance,
    x: &Allocation,
    budget: &SizeBudget,
) -> Result<Verdict<Allocation>, OracleError> {
    x.validate(instance)?;
    let found = for_each_allocation(instance, budget, |y| {
        if dominates(instance, y, x) {
            ControlFlow::Break(y.clone())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(Verdict::from_option(found))
}

/// Polynomial check: `x` is Pareto optimal iff no unsatisfied agent can be
/// added to the satisfied set while still matching everyone in it to an
/// acceptable house.
pub fn is_pareto_optimal_certificate(instance: &Instance, x: &Allocation) -> Result<Verdict<Allocation>, OracleError> {
    x.validate(instance)?;
    let mut group: Vec<AgentId> = satisfied_agents(instance, x).collect();
    let houses: Vec<HouseId> = instance.houses().collect();
    for j in instance.agents() {
        if utility_of(instance, j, x.get(j)).is_satisfied() {
            continue;
        }
        group.push(j);
        if let Some(pairs) = bipartite::saturate(&group, &houses, |a, h| instance.is_acceptable(a, h)) {
            let mut y = Allocation::empty(instance);
            for (a, h) in pairs {
                y.set(a, Some(h));
            }
            return Ok(Verdict::Fails(y));
        }
        group.pop();
    }
    Ok(Verdict::Holds)
}
