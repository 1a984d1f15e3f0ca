//! Command-line front end: decide instances, write benchmark files, and run
//! the experiment suites with CSV output.
//!
//! Exit codes follow the DIMACS solver convention where applicable:
//! 10 satisfiable, 20 unsatisfiable, 30 node limit reached, 1 usage or I/O
//! error. `experiment` exits 0 on a PASS verdict and 2 on FAIL.

mod suites;

use std::fs;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bucketbdd::generators::{
    col_order, gphp, parse_graph, php, row_order, theorem2_graph, OrderSpec,
};
use bucketbdd::{
    parse_dimacs, run_with_config, write_dimacs, write_trace_csv, CnfFormula, ConjoinOrder,
    Decision, RunConfig, Schedule, VarOrder,
};
use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

pub type CliError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "bucketbdd", version, about = "Bucket elimination over reduced ordered BDDs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one instance and print a decision line plus run stats.
    Solve(SolveArgs),
    /// Write a DIMACS instance, optionally with variable order files.
    Generate(GenerateArgs),
    /// Run a benchmark suite: one CSV row per instance, then a verdict.
    Experiment(suites::ExperimentArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("instance").required(true).args(["cnf", "php", "gphp", "gphp_t2"])))]
struct SolveArgs {
    /// DIMACS CNF file.
    #[arg(long, value_name = "FILE")]
    cnf: Option<PathBuf>,

    /// Pigeonhole instance: n pigeons into n+1 holes.
    #[arg(long, value_name = "N")]
    php: Option<u32>,

    /// Pigeonhole instance over a bipartite graph file.
    #[arg(long, value_name = "FILE")]
    gphp: Option<PathBuf>,

    /// Sparse-graph pigeonhole instance with parameter n (2n pigeons).
    #[arg(long, value_name = "N")]
    gphp_t2: Option<u32>,

    /// Order for BDD structure: "row", "col", or an order file path.
    /// The matrix tokens need an instance with named variables.
    #[arg(long, value_name = "ORDER")]
    bdd_order: OrderSpec,

    /// Elimination order: "row", "col", or an order file path.
    #[arg(
        long,
        value_name = "ORDER",
        required_unless_present = "single_order",
        conflicts_with = "single_order"
    )]
    elim_order: Option<OrderSpec>,

    /// Eliminate in the BDD order itself.
    #[arg(long)]
    single_order: bool,

    /// Give up with exit 30 once live nodes exceed this count.
    #[arg(long, value_name = "M")]
    node_limit: Option<usize>,

    /// Write the event trace to a CSV file.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,

    /// How to order the conjoins inside a bucket.
    #[arg(long, value_enum, default_value_t = ConjoinOrderArg::Insertion)]
    conjoin_order: ConjoinOrderArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ConjoinOrderArg {
    Insertion,
    SmallestFirst,
}

impl From<ConjoinOrderArg> for ConjoinOrder {
    fn from(a: ConjoinOrderArg) -> ConjoinOrder {
        match a {
            ConjoinOrderArg::Insertion => ConjoinOrder::Insertion,
            ConjoinOrderArg::SmallestFirst => ConjoinOrder::SmallestFirst,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("instance").required(true).args(["php", "gphp_t2", "graph"])))]
struct GenerateArgs {
    /// Pigeonhole instance: n pigeons into n+1 holes.
    #[arg(long, value_name = "N")]
    php: Option<u32>,

    /// Sparse-graph pigeonhole instance with parameter n (2n pigeons).
    #[arg(long, value_name = "N")]
    gphp_t2: Option<u32>,

    /// Bipartite graph file to encode.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,

    /// Output DIMACS path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Also write the row-major variable order to this file.
    #[arg(long, value_name = "FILE")]
    order_out_row: Option<PathBuf>,

    /// Also write the column-major variable order to this file.
    #[arg(long, value_name = "FILE")]
    order_out_col: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Experiment(args) => suites::cmd_experiment(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(1)
        }
    }
}

fn load_solve_instance(args: &SolveArgs) -> Result<CnfFormula, CliError> {
    if let Some(path) = &args.cnf {
        return Ok(parse_dimacs(&fs::read_to_string(path)?)?);
    }
    if let Some(n) = args.php {
        return Ok(php(n)?);
    }
    if let Some(path) = &args.gphp {
        return Ok(gphp(&parse_graph(&fs::read_to_string(path)?)?)?);
    }
    let n = args.gphp_t2.expect("argument group guarantees one instance");
    Ok(gphp(&theorem2_graph(n)?)?)
}

fn cmd_solve(args: SolveArgs) -> Result<u8, CliError> {
    let f = load_solve_instance(&args)?;
    let bdd_order = args.bdd_order.resolve(&f)?;
    let schedule = if args.single_order {
        Schedule::single(bdd_order)
    } else {
        let elim = args
            .elim_order
            .as_ref()
            .expect("clap requires an elimination order here")
            .resolve(&f)?;
        Schedule::new(bdd_order, elim)?
    };
    let config = RunConfig {
        node_limit: args.node_limit,
        conjoin_order: args.conjoin_order.into(),
        ..RunConfig::default()
    };
    let result = run_with_config(&f, &schedule, &config)?;
    if let Some(path) = &args.trace {
        write_trace_csv(&result, &f, BufWriter::new(File::create(path)?))?;
    }
    let (line, code) = match result.decision {
        Decision::Sat => ("s SATISFIABLE", 10),
        Decision::Unsat => ("s UNSATISFIABLE", 20),
        Decision::Limit => ("s UNKNOWN", 30),
    };
    println!("{}", line);
    println!("c max-intermediate-size {}", result.max_intermediate_size);
    println!("c peak-nodes {}", result.peak_allocated_nodes);
    println!("c trace-events {}", result.trace.len());
    println!("c wall-ms {}", result.wall_time.as_millis());
    Ok(code)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, CliError> {
    let mut f;
    if let Some(n) = args.php {
        f = php(n)?;
        f.push_comment(format!("pigeonhole instance: {} pigeons, {} holes", n, n + 1));
    } else if let Some(n) = args.gphp_t2 {
        f = gphp(&theorem2_graph(n)?)?;
        f.push_comment(format!(
            "sparse-graph pigeonhole instance, parameter {} ({} pigeons, {} holes)",
            n,
            2 * n,
            2 * n + 1
        ));
    } else {
        let path = args.graph.as_ref().expect("argument group guarantees one instance");
        f = gphp(&parse_graph(&fs::read_to_string(path)?)?)?;
        f.push_comment(format!("graph pigeonhole instance from {}", path.display()));
    }
    f.push_comment("variables are p_{i,j}, numbered row-major over the graph edges");
    fs::write(&args.out, write_dimacs(&f))?;
    if let Some(path) = &args.order_out_row {
        write_order_file(path, &row_order(&f)?)?;
    }
    if let Some(path) = &args.order_out_col {
        write_order_file(path, &col_order(&f)?)?;
    }
    Ok(0)
}

/// Order file format: the permutation as whitespace-separated DIMACS
/// variable indices.
fn write_order_file(path: &Path, order: &VarOrder) -> Result<(), CliError> {
    let indices: Vec<String> = order.iter().map(|v| v.index().to_string()).collect();
    fs::write(path, format!("{}\n", indices.join(" ")))?;
    Ok(())
}
