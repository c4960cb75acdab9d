//! Mechanism-agnostic property checkers.
//!
//! Each oracle works from the definitions: exhaustive enumeration for the
//! small-instance reference answers, plus polynomial certificates where the
//! 1-0 utility structure allows one. Every failure carries a witness, and
//! every witness type has its own checker that does not reuse the search.

mod bipartite;
mod coalition;
mod pareto;
mod rationality;
mod strategyproof;
mod welfare;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::mechanisms::MechanismError;
use crate::model::{welfare_of, AgentId, Allocation, HouseId, Instance, ModelError};

pub use coalition::{is_core_stable, is_core_stable_unpruned, is_strict_core_stable, BlockingCoalition};
pub use pareto::{dominates, is_pareto_optimal, is_pareto_optimal_certificate};
pub use rationality::{is_ir, is_sir, ir_violator, satisfies, sir_violator};
pub use strategyproof::{check_strategyproofness, Manipulation};
pub use welfare::{
    best_allocation_subject_to, for_each_allocation, max_welfare, max_welfare_allocation, max_welfare_subject_to,
    Constraint,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("size budget exceeded: {what} is {actual}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Limits for the exhaustive searches. Instances over a limit are rejected,
/// never truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeBudget {
    pub alloc_agents: usize,
    pub alloc_houses: usize,
    pub coalition_agents: usize,
    pub misreport_houses: usize,
}

impl Default for SizeBudget {
    fn default() -> Self {
        SizeBudget {
            alloc_agents: 8,
            alloc_houses: 8,
            coalition_agents: 12,
            misreport_houses: 6,
        }
    }
}

impl SizeBudget {
    pub const ENV_ALLOC_AGENTS: &'static str = "HOUSEALLOC_BUDGET_ALLOC_AGENTS";
    pub const ENV_ALLOC_HOUSES: &'static str = "HOUSEALLOC_BUDGET_ALLOC_HOUSES";
    pub const ENV_COALITION_AGENTS: &'static str = "HOUSEALLOC_BUDGET_COALITION_AGENTS";
    pub const ENV_MISREPORT_HOUSES: &'static str = "HOUSEALLOC_BUDGET_MISREPORT_HOUSES";

    /// Defaults, overridden by any of the `HOUSEALLOC_BUDGET_*` variables
    /// that parse as unsigned integers.
    pub fn from_env() -> Self {
        let read = |key: &str, default: usize| {
            std::env::var(key)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(default)
        };
        let d = SizeBudget::default();
        SizeBudget {
            alloc_agents: read(Self::ENV_ALLOC_AGENTS, d.alloc_agents),
            alloc_houses: read(Self::ENV_ALLOC_HOUSES, d.alloc_houses),
            coalition_agents: read(Self::ENV_COALITION_AGENTS, d.coalition_agents),
            misreport_houses: read(Self::ENV_MISREPORT_HOUSES, d.misreport_houses),
        }
    }

    pub(crate) fn check_allocations(&self, instance: &Instance) -> Result<(), OracleError> {
        check("agents for allocation enumeration", instance.num_agents(), self.alloc_agents)?;
        check("houses for allocation enumeration", instance.num_houses(), self.alloc_houses)
    }

    pub(crate) fn check_coalitions(&self, instance: &Instance) -> Result<(), OracleError> {
        check("agents for coalition enumeration", instance.num_agents(), self.coalition_agents)
    }

    pub(crate) fn check_misreports(&self, instance: &Instance) -> Result<(), OracleError> {
        check("houses for misreport sweep", instance.num_houses(), self.misreport_houses)
    }
}

fn check(what: &'static str, actual: usize, limit: usize) -> Result<(), OracleError> {
    if actual > limit {
        Err(OracleError::BudgetExceeded { what, actual, limit })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<T> {
    Holds,
    Fails(T),
}

impl<T> Verdict<T> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&T> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Verdict<U> {
        match self {
            Verdict::Holds => Verdict::Holds,
            Verdict::Fails(w) => Verdict::Fails(f(w)),
        }
    }

    pub(crate) fn from_option(witness: Option<T>) -> Self {
        witness.map_or(Verdict::Holds, Verdict::Fails)
    }
}

/// Properties an allocation can be checked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Ir,
    Sir,
    Po,
    Core,
    StrictCore,
    MaxWelfare,
    MaxWelfareIr,
    MaxWelfareSir,
}

impl Property {
    pub const ALL: [Property; 8] = [
        Property::Sir,
        Property::Ir,
        Property::Core,
        Property::StrictCore,
        Property::Po,
        Property::MaxWelfareSir,
        Property::MaxWelfareIr,
        Property::MaxWelfare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Ir => "ir",
            Property::Sir => "sir",
            Property::Po => "po",
            Property::Core => "core",
            Property::StrictCore => "strict-core",
            Property::MaxWelfare => "maxw",
            Property::MaxWelfareIr => "maxw-ir",
            Property::MaxWelfareSir => "maxw-sir",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

/// Evidence that a property fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Agent whose rationality constraint is broken.
    Violator(AgentId),
    /// Allocation that Pareto-dominates the checked one.
    Dominating(Allocation),
    Coalition(BlockingCoalition),
    /// A feasible allocation with strictly more satisfied agents.
    WelfareGap {
        achieved: usize,
        optimum: usize,
        better: Allocation,
    },
}

impl Witness {
    /// Re-checks the witness from scratch against `property`.
    pub fn verify(&self, property: Property, instance: &Instance, allocation: &Allocation) -> bool {
        match (property, self) {
            (Property::Ir, Witness::Violator(a)) => rationality::violates_ir(instance, allocation, *a),
            (Property::Sir, Witness::Violator(a)) => rationality::violates_sir(instance, allocation, *a),
            (Property::Po, Witness::Dominating(y)) => dominates(instance, y, allocation),
            (Property::Core, Witness::Coalition(c)) => !c.weak && c.verify(instance, allocation),
            (Property::StrictCore, Witness::Coalition(c)) => c.verify(instance, allocation),
            (Property::MaxWelfareIr, Witness::Violator(a)) => rationality::violates_ir(instance, allocation, *a),
            (Property::MaxWelfareSir, Witness::Violator(a)) => rationality::violates_sir(instance, allocation, *a),
            (p, Witness::WelfareGap { achieved, optimum, better }) => {
                let constraint = match p {
                    Property::MaxWelfare => Constraint::None,
                    Property::MaxWelfareIr => Constraint::Ir,
                    Property::MaxWelfareSir => Constraint::Sir,
                    _ => return false,
                };
                better.validate(instance).is_ok()
                    && satisfies(instance, better, constraint)
                    && welfare_of(instance, better) == *optimum
                    && welfare_of(instance, allocation) == *achieved
                    && optimum > achieved
            }
            _ => false,
        }
    }

    /// One-line human description.
    pub fn describe(&self, instance: &Instance) -> String {
        let house = |h: Option<HouseId>| h.map_or("null".to_string(), |h| instance.house_label(h).to_string());
        let render = |alloc: &Allocation| {
            instance
                .agents()
                .map(|a| format!("{}->{}", instance.agent_label(a), house(alloc.get(a))))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Witness::Violator(a) => format!("agent {} is worse off than its endowment allows", instance.agent_label(*a)),
            Witness::Dominating(y) => format!("dominated by {}", render(y)),
            Witness::Coalition(c) => {
                let members: Vec<&str> = c.members.iter().map(|&a| instance.agent_label(a)).collect();
                let trades: Vec<String> = c
                    .reallocation
                    .iter()
                    .map(|&(a, h)| format!("{}->{}", instance.agent_label(a), instance.house_label(h)))
                    .collect();
                format!(
                    "{}blocking coalition {{{}}} via {}",
                    if c.weak { "weakly " } else { "" },
                    members.join(", "),
                    trades.join(", ")
                )
            }
            Witness::WelfareGap {
                achieved,
                optimum,
                better,
            } => format!("welfare {achieved} < {optimum}, e.g. {}", render(better)),
        }
    }
}

/// Verdicts in the order the properties were requested.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropertyReport {
    pub verdicts: IndexMap<Property, Verdict<Witness>>,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.values().all(Verdict::holds)
    }

    pub fn get(&self, property: Property) -> Option<&Verdict<Witness>> {
        self.verdicts.get(&property)
    }
}

/// Checks `properties` of `allocation`. Pareto optimality uses the
/// polynomial certificate; the welfare-subject-to checks enumerate.
pub fn evaluate(
    instance: &Instance,
    allocation: &Allocation,
    properties: &[Property],
    budget: &SizeBudget,
) -> Result<PropertyReport, OracleError> {
    allocation.validate(instance)?;
    let mut report = PropertyReport::default();
    for &p in properties {
        let verdict = match p {
            Property::Ir => Verdict::from_option(ir_violator(instance, allocation)).map(Witness::Violator),
            Property::Sir => Verdict::from_option(sir_violator(instance, allocation)).map(Witness::Violator),
            Property::Po => is_pareto_optimal_certificate(instance, allocation)?.map(Witness::Dominating),
            Property::Core => is_core_stable(instance, allocation, budget)?.map(Witness::Coalition),
            Property::StrictCore => is_strict_core_stable(instance, allocation, budget)?.map(Witness::Coalition),
            Property::MaxWelfare => {
                let (optimum, better) = max_welfare_allocation(instance);
                welfare_verdict(instance, allocation, optimum, better)
            }
            Property::MaxWelfareIr | Property::MaxWelfareSir => {
                let (constraint, violator) = if p == Property::MaxWelfareIr {
                    (Constraint::Ir, ir_violator(instance, allocation))
                } else {
                    (Constraint::Sir, sir_violator(instance, allocation))
                };
                match violator {
                    Some(a) => Verdict::Fails(Witness::Violator(a)),
                    None => {
                        let (optimum, better) = best_allocation_subject_to(instance, constraint, budget)?;
                        welfare_verdict(instance, allocation, optimum, better)
                    }
                }
            }
        };
        report.verdicts.insert(p, verdict);
    }
    Ok(report)
}

fn welfare_verdict(instance: &Instance, allocation: &Allocation, optimum: usize, better: Allocation) -> Verdict<Witness> {
    let achieved = welfare_of(instance, allocation);
    if achieved >= optimum {
        Verdict::Holds
    } else {
        Verdict::Fails(Witness::WelfareGap {
            achieved,
            optimum,
            better,
        })
    }
}
