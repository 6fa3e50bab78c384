//! `cabs`: evaluate finite causal models and check causal abstractions
//! between them.
//!
//! Exit status is 0 on success, 1 when a check fails and 2 on input
//! errors.

mod commands;
mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use cabs_core::graph::{NodeId, NodeSet};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::{parse_assignments, parse_nodes};

#[derive(Parser, Debug)]
#[command(
    name = "cabs",
    version,
    about = "Evaluate finite causal models and check causal abstractions"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    output: OutputFormat,
    /// List every witness instead of the first ten.
    #[arg(long, global = true)]
    all_witnesses: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cause,
    Effect,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Nodes,
    Subsets,
}

type Assignments = Vec<(NodeId, String)>;

#[derive(Subcommand, Debug)]
enum Command {
    /// Interventional distribution p(target | do(...)).
    Intervene {
        #[arg(long)]
        model: PathBuf,
        /// Intervened nodes; every row of the kernel is printed.
        #[arg(long, default_value = "", value_parser = parse_nodes)]
        do_set: NodeSet,
        /// Intervened values, e.g. `A=1,B=0`; only matching rows are printed.
        #[arg(long = "do", default_value = "", value_parser = parse_assignments)]
        do_values: Assignments,
        #[arg(long, value_parser = parse_nodes)]
        target: NodeSet,
    },
    /// Observational joint distribution over the observed nodes.
    Joint {
        #[arg(long)]
        model: PathBuf,
    },
    /// Check an abstraction between a low and a high model.
    Check {
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        high: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Queries covered by the interventional consistency check.
        #[arg(long, value_enum, default_value_t = ScopeArg::Subsets)]
        scope: ScopeArg,
    },
    /// Compose two abstraction files and print the composite.
    Compose {
        #[arg(long)]
        map1: PathBuf,
        #[arg(long)]
        map2: PathBuf,
        /// Low model of the first map, used for its domains.
        #[arg(long)]
        low: Option<PathBuf>,
        /// Middle model, used for the domains shared by both maps.
        #[arg(long)]
        mid: Option<PathBuf>,
        /// High model of the second map.
        #[arg(long)]
        high: Option<PathBuf>,
    },
    /// Graph operations.
    Graph {
        #[command(subcommand)]
        op: GraphCommand,
    },
    /// Latent projection of a model onto its observed nodes.
    Project {
        #[arg(long)]
        model: PathBuf,
    },
    /// d-separation in the projected graph; exits 1 if not separated.
    Dsep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_parser = parse_nodes)]
        x: NodeSet,
        #[arg(long, value_parser = parse_nodes)]
        y: NodeSet,
        #[arg(long, default_value = "", value_parser = parse_nodes)]
        given: NodeSet,
    },
    /// Test a do-calculus rule on the cluster ADMG and optionally verify it
    /// numerically on the low model.
    Docalc(DocalcArgs),
    /// List every query signature over the observed nodes.
    Enumerate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Parse and validate model and abstraction files.
    Validate {
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, requires = "map")]
        low: Option<PathBuf>,
        #[arg(long, requires = "map")]
        high: Option<PathBuf>,
    },
    /// Write the bundled fixture files into a directory.
    Fixtures {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct DocalcArgs {
    #[arg(long)]
    low: PathBuf,
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    rule: u8,
    #[arg(long, default_value = "", value_parser = parse_nodes)]
    x: NodeSet,
    #[arg(long, value_parser = parse_nodes)]
    y: NodeSet,
    #[arg(long, default_value = "", value_parser = parse_nodes)]
    z: NodeSet,
    #[arg(long, default_value = "", value_parser = parse_nodes)]
    w: NodeSet,
    /// Compare both sides of the rule on the low model.
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand, Debug)]
enum GraphCommand {
    /// Merge two nodes into one.
    Merge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        into: String,
    },
    /// Delete a node, wiring its parents to its child.
    Delete {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        node: String,
    },
    /// Check that a cluster map describes a graphical abstraction.
    ValidateMap {
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Expected high graph; without it the derived one is printed.
        #[arg(long)]
        high: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> input::Result<render::Outcome> {
    let limit = (!cli.all_witnesses).then_some(render::DEFAULT_WITNESSES);
    match cli.command {
        Command::Intervene {
            model,
            do_set,
            do_values,
            target,
        } => commands::intervene(&model, do_set, &do_values, &target),
        Command::Joint { model } => commands::joint(&model),
        Command::Check {
            low,
            high,
            map,
            mode,
            scope,
        } => commands::check(&low, &high, &map, mode, scope, limit),
        Command::Compose {
            map1,
            map2,
            low,
            mid,
            high,
        } => commands::compose(&map1, &map2, low.as_deref(), mid.as_deref(), high.as_deref()),
        Command::Graph { op } => match op {
            GraphCommand::Merge { model, a, b, into } => commands::graph_merge(&model, &a, &b, &into),
            GraphCommand::Delete { model, node } => commands::graph_delete(&model, &node),
            GraphCommand::ValidateMap { low, map, high } => commands::validate_map(&low, &map, high.as_deref()),
        },
        Command::Project { model } => commands::project(&model),
        Command::Dsep { model, x, y, given } => commands::dsep(&model, &x, &y, &given),
        Command::Docalc(args) => commands::docalc(&args, limit),
        Command::Enumerate { model } => commands::enumerate(&model),
        Command::Validate { model, map, low, high } => {
            commands::validate(&model, map.as_deref(), low.as_deref(), high.as_deref())
        }
        Command::Fixtures { dir } => commands::fixtures(&dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.output;
    match run(cli) {
        Ok(outcome) => {
            match format {
                OutputFormat::Text => print!("{}", outcome.text),
                OutputFormat::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&outcome.json).expect("report serialises")
                    )
                }
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
