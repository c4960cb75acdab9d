//! Empirical pass rates of both mechanisms over random instances.

use std::fmt;

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::gen::{random_instance, GenError, GenParams, Prng};
use crate::mechanisms::{run_mechanism, MechanismTrace, MechanismVariant, PermutationPolicy};
use crate::fixtures;
use crate::model::{AgentId, Allocation, Instance};
use crate::oracles::{check_strategyproofness, evaluate, Manipulation, OracleError, Property, SizeBudget, Verdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportParams {
    pub trials: usize,
    pub seed: u64,
    pub max_agents: usize,
    pub max_houses: usize,
    pub strategyproofness: bool,
    /// Agent orders per instance: identity, then reversed, then seeded
    /// shuffles.
    pub orders: usize,
    /// Also evaluate the built-in fixture instances.
    pub fixtures: bool,
}

/// A table row: an allocation property or the misreport sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Row {
    Property(Property),
    Strategyproof,
}

impl Row {
    pub fn name(self) -> &'static str {
        match self {
            Row::Property(p) => p.name(),
            Row::Strategyproof => "sp",
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the theory says about a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// Guaranteed on every instance.
    Plus,
    /// Not guaranteed; counterexamples exist.
    Minus,
    /// No claim either way.
    Open,
}

impl Claim {
    pub fn symbol(self) -> &'static str {
        match self {
            Claim::Plus => "+",
            Claim::Minus => "-",
            Claim::Open => "?",
        }
    }
}

pub fn claim(variant: MechanismVariant, row: Row) -> Claim {
    use MechanismVariant::{Mir, Msir};
    use Property::*;
    match (variant, row) {
        (_, Row::Strategyproof) => Claim::Plus,
        (_, Row::Property(StrictCore)) => Claim::Open,
        (_, Row::Property(Ir)) => Claim::Plus,
        (Msir, Row::Property(Sir | Core | MaxWelfareSir)) => Claim::Plus,
        (Msir, Row::Property(Po | MaxWelfareIr | MaxWelfare)) => Claim::Minus,
        (Mir, Row::Property(Po | MaxWelfareIr | MaxWelfare)) => Claim::Plus,
        (Mir, Row::Property(Sir | Core | MaxWelfareSir)) => Claim::Minus,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Property(Witness),
    Manipulation(Manipulation),
}

/// The first failing trial of a cell, kept in full so it can be written out.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub sample: String,
    pub instance: Instance,
    pub allocation: Allocation,
    pub trace: MechanismTrace<i64>,
    pub failure: Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<Counterexample>,
}

impl Cell {
    fn new() -> Self {
        Cell {
            passed: 0,
            total: 0,
            first_failure: None,
        }
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }

    pub fn all_pass(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub params: ReportParams,
    pub rows: Vec<Row>,
    pub cells: IndexMap<(MechanismVariant, Row), Cell>,
}

impl Report {
    pub fn cell(&self, variant: MechanismVariant, row: Row) -> &Cell {
        &self.cells[&(variant, row)]
    }

    /// Cells the theory guarantees that saw a failure.
    pub fn broken_guarantees(&self) -> Vec<(MechanismVariant, Row)> {
        self.cells
            .iter()
            .filter(|((v, r), c)| claim(*v, *r) == Claim::Plus && !c.all_pass())
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{} random instances{}, seed {}, up to {} agents and {} houses, {} agent order{} each\n\n",
            self.params.trials,
            if self.params.fixtures { " plus fixtures" } else { "" },
            self.params.seed,
            self.params.max_agents,
            self.params.max_houses,
            self.params.orders,
            if self.params.orders == 1 { "" } else { "s" },
        );
        out.push_str(&format!("{:<12}", "property"));
        for v in MechanismVariant::ALL {
            out.push_str(&format!("  {:<22}", v.name().to_uppercase()));
        }
        out.push('\n');
        for &row in &self.rows {
            out.push_str(&format!("{:<12}", row.name()));
            for v in MechanismVariant::ALL {
                let c = self.cell(v, row);
                let text = format!(
                    "{}/{} {:>6.1}% ({})",
                    c.passed,
                    c.total,
                    100.0 * c.rate(),
                    claim(v, row).symbol()
                );
                out.push_str(&format!("  {text:<22}"));
            }
            out.push('\n');
        }
        out
    }
}

struct Sample {
    label: String,
    instance: Instance,
    seed: u64,
}

type Run = (MechanismVariant, Allocation, MechanismTrace<i64>, Vec<Option<Failure>>);

fn trial_params(params: &ReportParams) -> Vec<GenParams> {
    let mut rng = Prng::new(params.seed);
    (0..params.trials)
        .map(|_| GenParams {
            agents: rng.below(params.max_agents + 1),
            houses: rng.below(params.max_houses + 1),
            endow_prob: rng.unit(),
            accept_prob: rng.unit(),
            seed: rng.next_u64(),
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Budget(OracleError),
    #[error(transparent)]
    Oracle(OracleError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

impl From<OracleError> for ReportError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => ReportError::Budget(e),
            other => ReportError::Oracle(other),
        }
    }
}

/// Random instance `k` uses the `k`-th draw from a generator seeded with
/// `seed`: agent count, house count, endowment probability, acceptance
/// probability and instance seed, in that order. Fixtures come first when
/// enabled. Every instance runs under `orders` agent orders, and a cell
/// counts runs. Results do not depend on scheduling.
pub fn run_report(params: &ReportParams, budget: &SizeBudget) -> Result<Report, ReportError> {
    let worst = Instance::from_indices(
        params.max_houses,
        vec![None; params.max_agents],
        vec![vec![]; params.max_agents],
    )
    .map_err(OracleError::from)?;
    budget.check_allocations(&worst)?;
    budget.check_coalitions(&worst)?;
    if params.strategyproofness {
        budget.check_misreports(&worst)?;
    }

    let mut rows: Vec<Row> = Property::ALL.into_iter().map(Row::Property).collect();
    if params.strategyproofness {
        rows.push(Row::Strategyproof);
    }

    let mut samples = Vec::new();
    if params.fixtures {
        for (name, instance) in [("e1", fixtures::e1()), ("e2", fixtures::e2()), ("e3", fixtures::e3())] {
            samples.push(Sample {
                label: format!("fixture {name}"),
                instance,
                seed: params.seed,
            });
        }
    }
    for (k, gp) in trial_params(params).into_iter().enumerate() {
        samples.push(Sample {
            label: format!("trial {k}"),
            instance: random_instance(&gp)?,
            seed: gp.seed,
        });
    }

    let results: Vec<Vec<Run>> = samples
        .par_iter()
        .map(|s| run_sample(s, params.orders, &rows, budget))
        .collect::<Result<_, _>>()?;

    let mut cells: IndexMap<(MechanismVariant, Row), Cell> = IndexMap::new();
    for &row in &rows {
        for v in MechanismVariant::ALL {
            cells.insert((v, row), Cell::new());
        }
    }
    for (sample, runs) in samples.iter().zip(results) {
        for (v, allocation, trace, failures) in runs {
            for (&row, failure) in rows.iter().zip(failures) {
                let cell = cells.get_mut(&(v, row)).expect("cell exists");
                cell.total += 1;
                match failure {
                    None => cell.passed += 1,
                    Some(failure) => {
                        cell.first_failure.get_or_insert_with(|| Counterexample {
                            sample: sample.label.clone(),
                            instance: sample.instance.clone(),
                            allocation: allocation.clone(),
                            trace: trace.clone(),
                            failure,
                        });
                    }
                }
            }
        }
    }
    Ok(Report {
        params: *params,
        rows,
        cells,
    })
}

/// Order `j` of a sample: identity, reversed, then seeded shuffles.
pub fn agent_order(j: usize, agents: usize, seed: u64) -> PermutationPolicy {
    match j {
        0 => PermutationPolicy::Identity,
        1 => PermutationPolicy::Explicit((0..agents).rev().map(AgentId).collect()),
        _ => PermutationPolicy::Seeded(seed ^ j as u64),
    }
}

fn run_sample(sample: &Sample, orders: usize, rows: &[Row], budget: &SizeBudget) -> Result<Vec<Run>, ReportError> {
    let instance = &sample.instance;
    let properties: Vec<Property> = rows
        .iter()
        .filter_map(|r| match r {
            Row::Property(p) => Some(*p),
            Row::Strategyproof => None,
        })
        .collect();
    let mut runs = Vec::new();
    for j in 0..orders.max(1) {
        let policy = agent_order(j, instance.num_agents(), sample.seed);
        for v in MechanismVariant::ALL {
            let (allocation, trace) = run_mechanism(instance, v, &policy).map_err(OracleError::from)?;
            let report = evaluate(instance, &allocation, &properties, budget)?;
            let mut failures = Vec::with_capacity(rows.len());
            for row in rows {
                failures.push(match row {
                    Row::Property(p) => match &report.verdicts[p] {
                        Verdict::Holds => None,
                        Verdict::Fails(w) => Some(Failure::Property(w.clone())),
                    },
                    Row::Strategyproof => {
                        check_strategyproofness(instance, v, &policy, budget)?.map(Failure::Manipulation)
                    }
                });
            }
            runs.push((v, allocation, trace, failures));
        }
    }
    Ok(runs)
}
