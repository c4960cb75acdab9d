use std::ops::ControlFlow;

use crate::model::{welfare_of, AgentId, Allocation, HouseId, Instance};

use super::bipartite;
use super::rationality::satisfies;
use super::{OracleError, SizeBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    None,
    Ir,
    Sir,
}

/// Visits every injective partial map from agents to houses, unacceptable
/// assignments included. Agents are decided in index order, each trying
/// "nothing" first and then houses in index order.
pub fn for_each_allocation<B>(
    instance: &Instance,
    budget: &SizeBudget,
    mut visit: impl FnMut(&Allocation) -> ControlFlow<B>,
) -> Result<Option<B>, OracleError> {
    budget.check_allocations(instance)?;
    fn go<B>(
        agent: usize,
        instance: &Instance,
        used: &mut [bool],
        current: &mut Allocation,
        visit: &mut impl FnMut(&Allocation) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        if agent == instance.num_agents() {
            return visit(current);
        }
        current.set(AgentId(agent), None);
        go(agent + 1, instance, used, current, visit)?;
        for h in 0..instance.num_houses() {
            if used[h] {
                continue;
            }
            used[h] = true;
            current.set(AgentId(agent), Some(HouseId(h)));
            let flow = go(agent + 1, instance, used, current, visit);
            used[h] = false;
            flow?;
        }
        current.set(AgentId(agent), None);
        ControlFlow::Continue(())
    }
    let mut used = vec![false; instance.num_houses()];
    let mut current = Allocation::empty(instance);
    Ok(match go(0, instance, &mut used, &mut current, &mut visit) {
        ControlFlow::Break(b) => Some(b),
        ControlFlow::Continue(()) => None,
    })
}

/// Best welfare among allocations passing `constraint`, with the first
/// allocation (in enumeration order) attaining it.
pub fn best_allocation_subject_to(
    instance: &Instance,
    constraint: Constraint,
    budget: &SizeBudget,
) -> Result<(usize, Allocation), OracleError> {
    let mut best: Option<(usize, Allocation)> = None;
    let cap = instance.num_agents().min(instance.num_houses());
    for_each_allocation(instance, budget, |x| {
        if best.as_ref().is_some_and(|(w, _)| *w == cap) {
            return ControlFlow::Break(());
        }
        if satisfies(instance, x, constraint) {
            let w = welfare_of(instance, x);
            if best.as_ref().is_none_or(|(b, _)| w > *b) {
                best = Some((w, x.clone()));
            }
        }
        ControlFlow::Continue(())
    })?;
    Ok(best.expect("the endowment satisfies every constraint"))
}

pub fn max_welfare_subject_to(
    instance: &Instance,
    constraint: Constraint,
    budget: &SizeBudget,
) -> Result<usize, OracleError> {
    best_allocation_subject_to(instance, constraint, budget).map(|(w, _)| w)
}

/// Unconstrained maximum welfare: a maximum matching of agents to
/// acceptable houses.
pub fn max_welfare(instance: &Instance) -> usize {
    max_welfare_allocation(instance).0
}

/// [`max_welfare`] together with an allocation attaining it (unmatched
/// agents get nothing).
pub fn max_welfare_allocation(instance: &Instance) -> (usize, Allocation) {
    let agents: Vec<AgentId> = instance.agents().collect();
    let houses: Vec<HouseId> = instance.houses().collect();
    let (holder, size) = bipartite::maximum(&agents, &houses, &|a, h| instance.is_acceptable(a, h));
    let mut x = Allocation::empty(instance);
    for (k, a) in holder.iter().enumerate() {
        if let Some(a) = a {
            x.set(agents[*a], Some(houses[k]));
        }
    }
    (size, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn enumeration_counts() {
        // sum_k C(n,k) * m!/(m-k)! injective partial maps.
        let inst = Instance::from_indices(3, vec![None; 2], vec![vec![]; 2]).unwrap();
        let mut count = 0;
        for_each_allocation::<()>(&inst, &SizeBudget::default(), |_| {
            count += 1;
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(count, 1 + 2 * 3 + 3 * 2);
    }

    #[test]
    fn welfare_maxima_of_fixtures() {
        let b = SizeBudget::default();
        let e1 = fixtures::e1();
        assert_eq!(max_welfare(&e1), 5);
        assert_eq!(max_welfare_subject_to(&e1, Constraint::Sir, &b).unwrap(), 5);

        let e2 = fixtures::e2();
        assert_eq!(max_welfare(&e2), 1);
        assert_eq!(max_welfare_subject_to(&e2, Constraint::Sir, &b).unwrap(), 0);
        assert_eq!(max_welfare_subject_to(&e2, Constraint::Ir, &b).unwrap(), 1);

        let e3 = fixtures::e3();
        assert_eq!(max_welfare_subject_to(&e3, Constraint::Ir, &b).unwrap(), 2);
        assert_eq!(max_welfare_subject_to(&e3, Constraint::None, &b).unwrap(), 2);
        assert_eq!(max_welfare(&e3), 2);
    }

    #[test]
    fn nobody_acceptable() {
        let inst = Instance::from_indices(2, vec![Some(0), None], vec![vec![], vec![]]).unwrap();
        assert_eq!(max_welfare(&inst), 0);
        let (w, x) = max_welfare_allocation(&inst);
        assert_eq!(w, 0);
        assert_eq!(x, Allocation::empty(&inst));
    }

    #[test]
    fn witness_allocation_attains_the_optimum() {
        let e1 = fixtures::e1();
        let (w, x) = best_allocation_subject_to(&e1, Constraint::Ir, &SizeBudget::default()).unwrap();
        assert_eq!(welfare_of(&e1, &x), w);
        let (w, x) = max_welfare_allocation(&e1);
        assert_eq!(welfare_of(&e1, &x), w);
    }
}
