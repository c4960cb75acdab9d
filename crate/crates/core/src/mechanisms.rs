//! The MSIR and MIR mechanisms.
//!
//! Both build a padded bipartite graph between agents and houses whose
//! perfect matchings are exactly the feasible allocations (S-IR for MSIR, IR
//! for MIR), compute the optimal weight `W`, and then walk the agents in a
//! fixed order. Each agent tries to drop all of its weight-0 edges; the drop
//! sticks iff a perfect matching of weight `W` survives. Agents whose drop
//! sticks are guaranteed an acceptable house.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::Prng;
use crate::matching::{max_weight_perfect_matching, MatchingError, Weight, WeightedBipartiteGraph};
use crate::model::{welfare_of, AgentId, Allocation, HouseId, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismVariant {
    /// Maximum welfare subject to strong individual rationality.
    Msir,
    /// Maximum welfare subject to individual rationality.
    Mir,
}

impl MechanismVariant {
    pub const ALL: [MechanismVariant; 2] = [MechanismVariant::Msir, MechanismVariant::Mir];

    pub fn name(self) -> &'static str {
        match self {
            MechanismVariant::Msir => "MSIR",
            MechanismVariant::Mir => "MIR",
        }
    }
}

impl fmt::Display for MechanismVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Order in which agents get their refinement turn. Must not depend on the
/// reported preferences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PermutationPolicy {
    #[default]
    Identity,
    Explicit(Vec<AgentId>),
    /// Fisher-Yates shuffle of the index order driven by [`Prng`].
    Seeded(u64),
}

impl PermutationPolicy {
    pub fn realize(&self, agents: usize) -> Result<Vec<AgentId>, MechanismError> {
        match self {
            PermutationPolicy::Identity => Ok((0..agents).map(AgentId).collect()),
            PermutationPolicy::Explicit(order) => {
                let mut seen = vec![false; agents];
                for a in order {
                    match seen.get_mut(a.0) {
                        Some(s) if !*s => *s = true,
                        _ => return Err(MechanismError::InvalidPermutation(format!("{:?}", order))),
                    }
                }
                if order.len() != agents {
                    return Err(MechanismError::InvalidPermutation(format!(
                        "{} entries for {} agents",
                        order.len(),
                        agents
                    )));
                }
                Ok(order.clone())
            }
            PermutationPolicy::Seeded(seed) => {
                let mut order: Vec<AgentId> = (0..agents).map(AgentId).collect();
                Prng::new(*seed).shuffle(&mut order);
                Ok(order)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("initial graph has no perfect matching of the target weight")]
    InfeasibleInput,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invariant breached: {0}")]
    InvariantBreach(String),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeftVertex {
    Agent(AgentId),
    /// Padding agent `d_k`, numbered from 1.
    Dummy(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RightVertex {
    House(HouseId),
    /// Padding house `o_k`, numbered from 1; matching to it means receiving
    /// nothing.
    Dummy(usize),
}

/// Graph plus the meaning of each vertex. Agents occupy left indices
/// `0..n` and houses right indices `0..m`, followed by padding.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketGraph<W> {
    pub graph: WeightedBipartiteGraph<W>,
    pub left: Vec<LeftVertex>,
    pub right: Vec<RightVertex>,
}

impl<W: Weight> MarketGraph<W> {
    fn padded(instance: &Instance) -> Self {
        let (n, m) = (instance.num_agents(), instance.num_houses());
        let size = n.max(m);
        let left = instance
            .agents()
            .map(LeftVertex::Agent)
            .chain((1..=size - n).map(LeftVertex::Dummy))
            .collect();
        let right = instance
            .houses()
            .map(RightVertex::House)
            .chain((1..=size - m).map(RightVertex::Dummy))
            .collect();
        MarketGraph {
            graph: WeightedBipartiteGraph::new(size, size),
            left,
            right,
        }
    }

    fn connect(&mut self, agent: AgentId, house: HouseId, satisfied: bool) {
        let w = if satisfied { W::one() } else { W::zero() };
        self.graph.set_edge(agent.0, house.0, w).expect("vertex in range");
    }

    /// Edges to every right vertex; padding houses are never acceptable.
    fn connect_all(&mut self, instance: &Instance, agent: AgentId) {
        for r in 0..self.right.len() {
            let w = match self.right[r] {
                RightVertex::House(h) if instance.is_acceptable(agent, h) => W::one(),
                _ => W::zero(),
            };
            self.graph.set_edge(agent.0, r, w).expect("vertex in range");
        }
    }

    fn connect_dummies(&mut self) {
        for l in 0..self.left.len() {
            if let LeftVertex::Dummy(_) = self.left[l] {
                for r in 0..self.right.len() {
                    self.graph.set_edge(l, r, W::zero()).expect("vertex in range");
                }
            }
        }
    }
}

/// Graph whose perfect matchings are the S-IR allocations.
///
/// An owner of an acceptable house is tied to it. An owner of an
/// unacceptable house may keep it or take any acceptable house. Agents
/// without a house, and padding agents, connect to everything.
pub fn build_msir_graph<W: Weight>(instance: &Instance) -> MarketGraph<W> {
    let mut g = MarketGraph::padded(instance);
    for a in instance.agents() {
        match instance.endowment(a) {
            Some(own) => {
                let keeps_acceptable = instance.is_acceptable(a, own);
                g.connect(a, own, keeps_acceptable);
                if !keeps_acceptable {
                    for &h in instance.acceptable(a) {
                        g.connect(a, h, true);
                    }
                }
            }
            None => g.connect_all(instance, a),
        }
    }
    g.connect_dummies();
    g
}

/// Graph whose perfect matchings are the IR allocations.
///
/// An owner of an acceptable house may only move to acceptable houses;
/// everyone else connects to everything.
pub fn build_mir_graph<W: Weight>(instance: &Instance) -> MarketGraph<W> {
    let mut g = MarketGraph::padded(instance);
    for a in instance.agents() {
        if let Some(own) = instance.endowment(a) {
            g.connect(a, own, instance.is_acceptable(a, own));
        }
        for &h in instance.acceptable(a) {
            g.connect(a, h, true);
        }
        if !instance.has_acceptable_endowment(a) {
            g.connect_all(instance, a);
        }
    }
    g.connect_dummies();
    g
}

pub fn build_graph<W: Weight>(instance: &Instance, variant: MechanismVariant) -> MarketGraph<W> {
    match variant {
        MechanismVariant::Msir => build_msir_graph(instance),
        MechanismVariant::Mir => build_mir_graph(instance),
    }
}

/// One agent's turn in the refinement loop.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRound<W> {
    pub left: usize,
    /// Right endpoints of the weight-0 edges tried for removal.
    pub removed: Vec<usize>,
    /// Optimum after removal, `None` if no perfect matching remained.
    pub weight: Option<W>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<W> {
    pub graph: WeightedBipartiteGraph<W>,
    /// `t[l]` for every left vertex; only vertices in the order can be set.
    pub t: Vec<bool>,
    pub rounds: Vec<RefinementRound<W>>,
}

/// Serial weight-preserving refinement over left vertices in `order`.
///
/// Requires a perfect matching of weight `target` in `graph`. On return the
/// graph still has one, and in every such matching each vertex with `t = 1`
/// sits on a weight-1 edge.
pub fn serial_refinement<W: Weight>(
    mut graph: WeightedBipartiteGraph<W>,
    order: &[usize],
    target: W,
) -> Result<Refinement<W>, MechanismError> {
    match max_weight_perfect_matching(&graph)? {
        Some(m) if m.weight() == target => {}
        _ => return Err(MechanismError::InfeasibleInput),
    }
    let mut t = vec![false; graph.left_len()];
    let mut rounds = Vec::with_capacity(order.len());
    for &l in order {
        let delta = graph.remove_zero_edges(l)?;
        let weight = if delta.is_empty() {
            Some(target)
        } else {
            max_weight_perfect_matching(&graph)?.map(|m| m.weight())
        };
        let accepted = weight.is_some_and(|w| w >= target);
        if !accepted {
            graph.restore(&delta);
        }
        t[l] = accepted;
        rounds.push(RefinementRound {
            left: l,
            removed: delta.removed.iter().map(|&(r, _)| r).collect(),
            weight,
            accepted,
        });
    }
    Ok(Refinement { graph, t, rounds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRound<W> {
    pub agent: AgentId,
    pub removed: Vec<RightVertex>,
    pub weight: Option<W>,
    pub accepted: bool,
}

/// What a mechanism run decided and why.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismTrace<W> {
    pub variant: MechanismVariant,
    pub initial_weight: W,
    pub permutation: Vec<AgentId>,
    /// `t[i]` for agent `i`.
    pub t: Vec<bool>,
    pub rounds: Vec<TraceRound<W>>,
}

impl<W> MechanismTrace<W> {
    pub fn satisfied_count(&self) -> usize {
        self.t.iter().filter(|&&t| t).count()
    }
}

fn count_as<W: Weight>(k: usize) -> W {
    (0..k).fold(W::zero(), |acc, _| acc + W::one())
}

/// Runs a mechanism end to end with weights of type `W`.
pub fn run_with<W: Weight>(
    instance: &Instance,
    variant: MechanismVariant,
    policy: &PermutationPolicy,
) -> Result<(Allocation, MechanismTrace<W>), MechanismError> {
    let permutation = policy.realize(instance.num_agents())?;
    let market: MarketGraph<W> = build_graph(instance, variant);
    let initial = max_weight_perfect_matching(&market.graph)?
        .ok_or_else(|| MechanismError::InvariantBreach("built graph has no perfect matching".into()))?;
    let target = initial.weight();

    let order: Vec<usize> = permutation.iter().map(|a| a.0).collect();
    let refined = serial_refinement(market.graph, &order, target)?;
    let last = max_weight_perfect_matching(&refined.graph)?
        .ok_or_else(|| MechanismError::InvariantBreach("refined graph lost its perfect matching".into()))?;

    let assignment = instance
        .agents()
        .map(|a| match market.right[last.partner(a.0)] {
            RightVertex::House(h) => Some(h),
            RightVertex::Dummy(_) => None,
        })
        .collect();
    let allocation = Allocation::from_vec_unchecked(assignment);

    let trace = MechanismTrace {
        variant,
        initial_weight: target,
        permutation,
        t: refined.t[..instance.num_agents()].to_vec(),
        rounds: refined
            .rounds
            .into_iter()
            .map(|r| TraceRound {
                agent: AgentId(r.left),
                removed: r.removed.into_iter().map(|x| market.right[x]).collect(),
                weight: r.weight,
                accepted: r.accepted,
            })
            .collect(),
    };
    check_trace(instance, &allocation, &trace)?;
    Ok((allocation, trace))
}

/// [`run_with`] over `i64` weights.
pub fn run_mechanism(
    instance: &Instance,
    variant: MechanismVariant,
    policy: &PermutationPolicy,
) -> Result<(Allocation, MechanismTrace<i64>), MechanismError> {
    run_with::<i64>(instance, variant, policy)
}

fn check_trace<W: Weight>(
    instance: &Instance,
    allocation: &Allocation,
    trace: &MechanismTrace<W>,
) -> Result<(), MechanismError> {
    allocation
        .validate(instance)
        .map_err(|e| MechanismError::InvariantBreach(e.to_string()))?;
    let flagged = trace.satisfied_count();
    if count_as::<W>(flagged) != trace.initial_weight {
        return Err(MechanismError::InvariantBreach(format!(
            "sum of t = {flagged} but W = {:?}",
            trace.initial_weight
        )));
    }
    let satisfied: Vec<bool> = instance
        .agents()
        .map(|a| allocation.get(a).is_some_and(|h| instance.is_acceptable(a, h)))
        .collect();
    if satisfied != trace.t || welfare_of(instance, allocation) != flagged {
        return Err(MechanismError::InvariantBreach(
            "satisfied agents differ from t flags".into(),
        ));
    }
    Ok(())
}
