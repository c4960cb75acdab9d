use crate::model::{utility_of, AgentId, Allocation, Instance, ModelError};

use super::Constraint;

pub(crate) fn violates_ir(instance: &Instance, x: &Allocation, agent: AgentId) -> bool {
    agent.0 < instance.num_agents()
        && utility_of(instance, agent, x.get(agent)) < utility_of(instance, agent, instance.endowment(agent))
}

/// Owners must keep their house or trade an unacceptable one for an
/// acceptable one. Agents without a house are unconstrained.
pub(crate) fn violates_sir(instance: &Instance, x: &Allocation, agent: AgentId) -> bool {
    if agent.0 >= instance.num_agents() {
        return false;
    }
    let Some(own) = instance.endowment(agent) else {
        return false;
    };
    let got = x.get(agent);
    let kept = got == Some(own);
    let upgraded = !instance.is_acceptable(agent, own) && got.is_some_and(|h| instance.is_acceptable(agent, h));
    !(kept || upgraded)
}

pub fn ir_violator(instance: &Instance, x: &Allocation) -> Option<AgentId> {
    instance.agents().find(|&a| violates_ir(instance, x, a))
}

pub fn sir_violator(instance: &Instance, x: &Allocation) -> Option<AgentId> {
    instance.agents().find(|&a| violates_sir(instance, x, a))
}

pub fn is_ir(instance: &Instance, x: &Allocation) -> Result<bool, ModelError> {
    x.validate(instance)?;
    Ok(ir_violator(instance, x).is_none())
}

pub fn is_sir(instance: &Instance, x: &Allocation) -> Result<bool, ModelError> {
    x.validate(instance)?;
    Ok(sir_violator(instance, x).is_none())
}

/// Whether `x` passes `constraint`; `x` is assumed valid.
pub fn satisfies(instance: &Instance, x: &Allocation, constraint: Constraint) -> bool {
    match constraint {
        Constraint::None => true,
        Constraint::Ir => ir_violator(instance, x).is_none(),
        Constraint::Sir => sir_violator(instance, x).is_none(),
    }
}
