//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a requested property fails (or a guaranteed
//! report cell is below 100%), 2 bad input, 3 internal error, 4 oracle
//! budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::gen::{random_instance, GenError, GenParams};
use crate::io::{self, IoError};
use crate::mechanisms::{run_mechanism, MechanismError, MechanismVariant, PermutationPolicy};
use crate::model::Instance;
use crate::oracles::{evaluate, OracleError, Property, SizeBudget, Verdict};
use crate::report::{claim, run_report, Claim, Failure, ReportError, ReportParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "housealloc", version, about = "House allocation with existing tenants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mechanism on an instance file.
    Run {
        input: PathBuf,
        #[arg(long, value_enum)]
        mechanism: Mechanism,
        /// identity, seed:<u64> or file:<path to a JSON list of agent ids>
        #[arg(long, default_value = "identity")]
        permutation: String,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check properties of an allocation.
    Verify {
        instance: PathBuf,
        allocation: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ir,sir,po,core,strict-core,maxw,maxw-ir,maxw-sir")]
        properties: Vec<Property>,
        /// Also write the verdicts as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        houses: usize,
        #[arg(long)]
        endow_prob: f64,
        #[arg(long)]
        accept_prob: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pass rates of both mechanisms on random instances.
    Report {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        max_agents: usize,
        #[arg(long, default_value_t = 6)]
        max_houses: usize,
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        sp: Switch,
        /// Agent orders per instance: identity, reversed, then seeded shuffles.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u16).range(1..))]
        orders: u16,
        /// Include the built-in fixture instances.
        #[arg(long, value_enum, default_value_t = Switch::On)]
        fixtures: Switch,
        /// Where counterexample files go.
        #[arg(long, default_value = "counterexamples")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mechanism {
    Msir,
    Mir,
}

impl From<Mechanism> for MechanismVariant {
    fn from(m: Mechanism) -> Self {
        match m {
            Mechanism::Msir => MechanismVariant::Msir,
            Mechanism::Mir => MechanismVariant::Mir,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MechanismError> for CliError {
    fn from(e: MechanismError) -> Self {
        match e {
            MechanismError::InvalidPermutation(_) => CliError::Input(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            OracleError::Model(m) => CliError::Input(m.to_string()),
            OracleError::Mechanism(m) => m.into(),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Budget(o) | ReportError::Oracle(o) => o.into(),
            ReportError::Gen(g) => g.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(format!("stdout: {e}"))),
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    io::parse_instance(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_permutation(spec: &str, instance: &Instance) -> Result<PermutationPolicy, CliError> {
    if spec == "identity" {
        return Ok(PermutationPolicy::Identity);
    }
    if let Some(seed) = spec.strip_prefix("seed:") {
        let seed = seed
            .parse()
            .map_err(|_| CliError::Input(format!("--permutation: bad seed `{seed}`")))?;
        return Ok(PermutationPolicy::Seeded(seed));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let order = io::parse_permutation(instance, &read(Path::new(path))?)?;
        return Ok(PermutationPolicy::Explicit(order));
    }
    Err(CliError::Input(format!(
        "--permutation: expected identity, seed:<u64> or file:<path>, got `{spec}`"
    )))
}

/// Runs one parsed command. `Ok(false)` means a property failed.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match cli.command {
        Command::Run {
            input,
            mechanism,
            permutation,
            output,
        } => {
            let instance = load_instance(&input)?;
            let policy = parse_permutation(&permutation, &instance)?;
            let (allocation, trace) = run_mechanism(&instance, mechanism.into(), &policy)?;
            emit(out, output.as_deref(), &io::write_allocation(&instance, &allocation, Some(&trace)))?;
            Ok(true)
        }
        Command::Verify {
            instance,
            allocation,
            properties,
            report,
        } => {
            let inst = load_instance(&instance)?;
            let x = io::parse_allocation(&inst, &read(&allocation)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", allocation.display())))?;
            let budget = SizeBudget::from_env();
            let verdicts = evaluate(&inst, &x, &properties, &budget)?;
            let mut text = String::new();
            for (p, v) in &verdicts.verdicts {
                match v {
                    Verdict::Holds => text.push_str(&format!("{p}: holds\n")),
                    Verdict::Fails(w) => {
                        text.push_str(&format!("{p}: fails: {}\n", w.describe(&inst)));
                        text.push_str(&format!("  witness: {}\n", io::witness_json(&inst, w)));
                    }
                }
            }
            emit(out, None, &text)?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&io::report_json(&inst, &verdicts)).expect("json") + "\n";
                write_file(&path, &json)?;
            }
            Ok(verdicts.all_hold())
        }
        Command::Gen {
            agents,
            houses,
            endow_prob,
            accept_prob,
            seed,
            output,
        } => {
            let instance = random_instance(&GenParams {
                agents,
                houses,
                endow_prob,
                accept_prob,
                seed,
            })?;
            emit(out, output.as_deref(), &io::write_instance(&instance))?;
            Ok(true)
        }
        Command::Report {
            trials,
            seed,
            max_agents,
            max_houses,
            sp,
            orders,
            fixtures,
            out_dir,
        } => {
            let params = ReportParams {
                trials,
                seed,
                max_agents,
                max_houses,
                strategyproofness: sp == Switch::On,
                orders: orders.into(),
                fixtures: fixtures == Switch::On,
            };
            let report = run_report(&params, &SizeBudget::from_env())?;
            let mut text = report.render_table();
            text.push('\n');
            let mut dir_ready = false;
            for ((v, row), cell) in &report.cells {
                let label = format!("{}/{}", v.name().to_lowercase(), row);
                let expected = claim(*v, *row);
                let Some(c) = &cell.first_failure else {
                    if expected == Claim::Minus {
                        text.push_str(&format!("{label}: no counterexample found\n"));
                    }
                    continue;
                };
                if !dir_ready {
                    fs::create_dir_all(&out_dir)
                        .map_err(|e| CliError::Internal(format!("{}: {e}", out_dir.display())))?;
                    dir_ready = true;
                }
                let stem = format!("{}-{}", v.name().to_lowercase(), row);
                let inst_path = out_dir.join(format!("{stem}.instance.json"));
                let alloc_path = out_dir.join(format!("{stem}.allocation.json"));
                let witness_path = out_dir.join(format!("{stem}.witness.json"));
                let order_path = out_dir.join(format!("{stem}.order.json"));
                write_file(&inst_path, &io::write_instance(&c.instance))?;
                write_file(&alloc_path, &io::write_allocation(&c.instance, &c.allocation, Some(&c.trace)))?;
                let witness = match &c.failure {
                    Failure::Property(w) => io::witness_json(&c.instance, w),
                    Failure::Manipulation(m) => io::manipulation_json(&c.instance, m),
                };
                write_file(&witness_path, &(serde_json::to_string_pretty(&witness).expect("json") + "\n"))?;
                let order: Vec<&str> = c.trace.permutation.iter().map(|&a| c.instance.agent_label(a)).collect();
                write_file(&order_path, &(serde_json::to_string(&order).expect("json") + "\n"))?;
                let note = if expected == Claim::Plus { " (guarantee broken)" } else { "" };
                text.push_str(&format!(
                    "{label}: counterexample from {}{note}: {}\n",
                    c.sample,
                    inst_path.display()
                ));
            }
            emit(out, None, &text)?;
            Ok(report.broken_guarantees().is_empty())
        }
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_PROPERTY,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
