//! Experiment suites. Each suite emits one CSV row per instance in
//! ascending n and then prints a verdict line; `verdict FAIL` exits 2 with
//! the reasons on stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use bucketbdd::generators::{
    and_or_chain, col_order, gphp, php, random_cnf, row_order, theorem2_graph,
};
use bucketbdd::stats::loglog_slope;
use bucketbdd::{
    brute_force_sat, clause_to_bdd, run, run_single_order, BddError, CnfFormula, Decision,
    Manager, RunResult, Schedule, VarId, VarOrder,
};
use clap::{Args, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const DEFAULT_FUZZ_SEED: u64 = 2024;

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    #[value(name = "theorem1")]
    Theorem1,
    #[value(name = "theorem2")]
    Theorem2,
    #[value(name = "lemma-col")]
    LemmaCol,
    #[value(name = "lemma-row")]
    LemmaRow,
    #[value(name = "lemma1")]
    Lemma1,
    #[value(name = "oracle-fuzz")]
    OracleFuzz,
}

impl SuiteName {
    fn name(self) -> &'static str {
        match self {
            SuiteName::Theorem1 => "theorem1",
            SuiteName::Theorem2 => "theorem2",
            SuiteName::LemmaCol => "lemma-col",
            SuiteName::LemmaRow => "lemma-row",
            SuiteName::Lemma1 => "lemma1",
            SuiteName::OracleFuzz => "oracle-fuzz",
        }
    }

    /// Default range and hard cap. The caps keep worst-case live nodes
    /// around 10^7; the exponential suites double per step, so even one
    /// more n can multiply the runtime.
    fn range(self) -> (u32, u32, Option<u32>) {
        match self {
            SuiteName::Theorem1 => (2, 40, Some(40)),
            SuiteName::Theorem2 => (4, 13, Some(13)),
            SuiteName::LemmaCol => (4, 14, Some(14)),
            SuiteName::LemmaRow => (4, 12, Some(14)),
            SuiteName::Lemma1 => (2, 16, Some(16)),
            SuiteName::OracleFuzz => (1, 500, None),
        }
    }
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    suite: SuiteName,

    /// First n, inclusive (suite-specific default).
    #[arg(long, value_name = "N")]
    n_min: Option<u32>,

    /// Last n, inclusive (suite-specific default). For oracle-fuzz the
    /// range indexes instances rather than a size parameter.
    #[arg(long, value_name = "N")]
    n_max: Option<u32>,

    /// Node limit applied to every run.
    #[arg(long, value_name = "M", default_value_t = 10_000_000)]
    node_limit: usize,

    /// Write the CSV to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

struct Row {
    n: u32,
    decision: Decision,
    max_intermediate_size: u64,
    peak_nodes: usize,
    wall_ms: u128,
    /// lemma1 only: (blockwise_size, interleaved_size).
    extra: Option<(u64, u64)>,
}

impl Row {
    fn from_result(n: u32, r: &RunResult) -> Row {
        Row {
            n,
            decision: r.decision,
            max_intermediate_size: r.max_intermediate_size,
            peak_nodes: r.peak_allocated_nodes,
            wall_ms: r.wall_time.as_millis(),
            extra: None,
        }
    }
}

pub fn cmd_experiment(args: ExperimentArgs) -> Result<u8, CliError> {
    let suite = args.suite;
    let (default_min, default_max, cap) = suite.range();
    let n_min = args.n_min.unwrap_or(default_min);
    let n_max = args.n_max.unwrap_or(default_max);
    if n_min < 1 || n_min > n_max {
        return Err(format!("invalid range {}..={}", n_min, n_max).into());
    }
    if let Some(cap) = cap {
        if n_max > cap {
            return Err(format!(
                "suite {} is capped at n = {} (requested {})",
                suite.name(),
                cap,
                n_max
            )
            .into());
        }
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    match suite {
        SuiteName::Theorem1 => {
            run_theorem1(&args, n_min, n_max, &mut rows, &mut failures)?
        }
        SuiteName::Theorem2 => {
            run_theorem2(&args, n_min, n_max, &mut rows, &mut failures)?
        }
        SuiteName::LemmaCol | SuiteName::LemmaRow => {
            run_single_order_suite(&args, suite, n_min, n_max, &mut rows, &mut failures)?
        }
        SuiteName::Lemma1 => run_lemma1(&args, n_min, n_max, &mut rows, &mut failures)?,
        SuiteName::OracleFuzz => {
            run_oracle_fuzz(&args, n_min, n_max, &mut rows, &mut failures)?
        }
    }

    let mut csv = String::from("suite,n,decision,max_intermediate_size,peak_nodes,wall_ms");
    if suite == SuiteName::Lemma1 {
        csv.push_str(",blockwise_size,interleaved_size");
    }
    csv.push('\n');
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}",
            suite.name(),
            row.n,
            row.decision,
            row.max_intermediate_size,
            row.peak_nodes,
            row.wall_ms
        ));
        if let Some((blockwise, interleaved)) = row.extra {
            csv.push_str(&format!(",{},{}", blockwise, interleaved));
        }
        csv.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{}", csv),
    }

    if failures.is_empty() {
        println!("verdict PASS");
        Ok(0)
    } else {
        for msg in &failures {
            eprintln!("check failed: {}", msg);
        }
        println!("verdict FAIL");
        Ok(2)
    }
}

fn row_col_schedule(f: &CnfFormula) -> Result<Schedule, CliError> {
    Ok(Schedule::new(row_order(f)?, col_order(f)?)?)
}

fn run_theorem1(
    args: &ExperimentArgs,
    n_min: u32,
    n_max: u32,
    rows: &mut Vec<Row>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    let mut points = Vec::new();
    for n in n_min..=n_max {
        let f = php(n)?;
        let r = run(&f, &row_col_schedule(&f)?, Some(args.node_limit))?;
        log::info!("theorem1 n={}: {} in {} ms", n, r.decision, r.wall_time.as_millis());
        if r.decision != Decision::Unsat {
            failures.push(format!("n={} decided {}", n, r.decision));
        }
        if n >= 10 {
            points.push((f64::from(n), r.max_intermediate_size as f64));
        }
        rows.push(Row::from_result(n, &r));
    }
    if points.len() >= 2 {
        match loglog_slope(&points) {
            Some(slope) if slope <= 3.5 => {}
            Some(slope) => failures.push(format!("log-log slope {:.3} exceeds 3.5", slope)),
            None => failures.push("scaling regression is degenerate".to_string()),
        }
    }
    Ok(())
}

fn run_theorem2(
    args: &ExperimentArgs,
    n_min: u32,
    n_max: u32,
    rows: &mut Vec<Row>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    let mut probes: BTreeMap<u32, u64> = BTreeMap::new();
    for n in n_min..=n_max {
        let f = gphp(&theorem2_graph(n)?)?;
        let r = run(&f, &row_col_schedule(&f)?, Some(args.node_limit))?;
        log::info!("theorem2 n={}: {} in {} ms", n, r.decision, r.wall_time.as_millis());
        let decision_ok =
            r.decision == Decision::Unsat || (n == n_max && r.decision == Decision::Limit);
        if !decision_ok {
            failures.push(format!("n={} decided {}", n, r.decision));
        }
        // The hard step of the run: the conjunction built just before
        // quantifying p_{2n,n+1}.
        let target = probe_target(&f, n)?;
        match r.conjoin_size_before(target) {
            Some(size) => {
                if size < 1u64 << (n - 1) {
                    failures.push(format!(
                        "n={}: probe size {} below 2^{} = {}",
                        n,
                        size,
                        n - 1,
                        1u64 << (n - 1)
                    ));
                }
                probes.insert(n, size);
            }
            None => failures.push(format!("n={}: probe variable never quantified", n)),
        }
        rows.push(Row::from_result(n, &r));
    }
    for n in n_min.max(8)..=n_max {
        if let (Some(&prev), Some(&cur)) = (probes.get(&(n - 1)), probes.get(&n)) {
            let ratio = cur as f64 / prev as f64;
            if ratio < 1.8 {
                failures.push(format!(
                    "probe ratio {} -> {} is {:.2}, below 1.8",
                    n - 1,
                    n,
                    ratio
                ));
            }
        }
    }
    Ok(())
}

fn probe_target(f: &CnfFormula, n: u32) -> Result<VarId, CliError> {
    f.name_map()
        .and_then(|m| {
            m.iter()
                .find(|&(_, &coords)| coords == (2 * n, n + 1))
                .map(|(&v, _)| v)
        })
        .ok_or_else(|| format!("no variable named ({}, {})", 2 * n, n + 1).into())
}

fn run_single_order_suite(
    args: &ExperimentArgs,
    suite: SuiteName,
    n_min: u32,
    n_max: u32,
    rows: &mut Vec<Row>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    for n in n_min..=n_max {
        let f = php(n)?;
        let order = match suite {
            SuiteName::LemmaCol => col_order(&f)?,
            _ => row_order(&f)?,
        };
        let r = run_single_order(&f, &order, Some(args.node_limit))?;
        log::info!(
            "{} n={}: {} in {} ms",
            suite.name(),
            n,
            r.decision,
            r.wall_time.as_millis()
        );
        if r.decision == Decision::Sat {
            failures.push(format!("n={} decided SAT", n));
        }
        if r.max_intermediate_size < 1u64 << n {
            failures.push(format!(
                "n={}: largest intermediate {} below 2^{} = {}",
                n,
                r.max_intermediate_size,
                n,
                1u64 << n
            ));
        }
        rows.push(Row::from_result(n, &r));
    }
    Ok(())
}

struct ChainBuild {
    final_size: u64,
    running_max: u64,
    peak: usize,
    is_false: bool,
}

fn chain_conjunction(
    f: &CnfFormula,
    order: VarOrder,
    node_limit: usize,
) -> Result<ChainBuild, BddError> {
    let mut m = Manager::with_node_limit(order, node_limit);
    let mut acc = m.one();
    let mut running_max = 1u64;
    for c in f.clauses() {
        let b = clause_to_bdd(&mut m, c)?;
        acc = m.and(acc, b)?;
        running_max = running_max.max(m.node_count(acc));
    }
    Ok(ChainBuild {
        final_size: m.node_count(acc),
        running_max,
        peak: m.peak_live_nodes(),
        is_false: acc.is_false(),
    })
}

fn run_lemma1(
    args: &ExperimentArgs,
    n_min: u32,
    n_max: u32,
    rows: &mut Vec<Row>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    for n in n_min..=n_max {
        let start = Instant::now();
        let (f, blockwise_order, interleaved_order) = and_or_chain(n)?;
        let blockwise = chain_conjunction(&f, blockwise_order, args.node_limit);
        let interleaved = chain_conjunction(&f, interleaved_order, args.node_limit);
        let (row, block_size, inter_size) = match (blockwise, interleaved) {
            (Ok(b), Ok(i)) => {
                let decision = if b.is_false || i.is_false {
                    Decision::Unsat
                } else {
                    Decision::Sat
                };
                let row = Row {
                    n,
                    decision,
                    max_intermediate_size: b.running_max.max(i.running_max),
                    peak_nodes: b.peak.max(i.peak),
                    wall_ms: start.elapsed().as_millis(),
                    extra: Some((b.final_size, i.final_size)),
                };
                (row, Some(b.final_size), Some(i.final_size))
            }
            (b, i) => {
                for outcome in [&b, &i] {
                    if let Err(e) = outcome {
                        if !e.is_node_limit() {
                            return Err(format!("lemma1 n={}: {}", n, e).into());
                        }
                    }
                }
                failures.push(format!("n={}: hit the node limit", n));
                let row = Row {
                    n,
                    decision: Decision::Limit,
                    max_intermediate_size: 0,
                    peak_nodes: 0,
                    wall_ms: start.elapsed().as_millis(),
                    extra: Some((0, 0)),
                };
                (row, None, None)
            }
        };
        if let Some(size) = block_size {
            if size < 1u64 << n {
                failures.push(format!(
                    "n={}: blockwise size {} below 2^{} = {}",
                    n,
                    size,
                    n,
                    1u64 << n
                ));
            }
        }
        if let Some(size) = inter_size {
            if size > u64::from(3 * n + 2) {
                failures.push(format!(
                    "n={}: interleaved size {} above 3n+2 = {}",
                    n,
                    size,
                    3 * n + 2
                ));
            }
        }
        rows.push(row);
    }
    Ok(())
}

fn run_oracle_fuzz(
    args: &ExperimentArgs,
    n_min: u32,
    n_max: u32,
    rows: &mut Vec<Row>,
    failures: &mut Vec<String>,
) -> Result<(), CliError> {
    let seed = match std::env::var("BUCKETBDD_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .map_err(|_| format!("BUCKETBDD_SEED must be an unsigned integer, got {:?}", text))?,
        Err(std::env::VarError::NotPresent) => DEFAULT_FUZZ_SEED,
        Err(e) => return Err(e.into()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in n_min..=n_max {
        let start = Instant::now();
        let idx = u64::from(i);
        let num_vars = 4 + (idx % 9) as u32;
        let num_clauses = 5 + ((idx * 7) % 36) as u32;
        let max_len = 1 + (idx % 4) as u32;
        let f = random_cnf(num_vars, num_clauses, max_len, seed.wrapping_add(idx))?;
        let expected = brute_force_sat(&f)?;
        let mut decision = if expected { Decision::Sat } else { Decision::Unsat };
        let mut max_size = 0u64;
        let mut peak = 0usize;
        for _ in 0..5 {
            let mut vars: Vec<VarId> = f.variables().collect();
            vars.shuffle(&mut rng);
            let bdd_order = VarOrder::new(vars.clone())?;
            vars.shuffle(&mut rng);
            let elim_order = VarOrder::new(vars.clone())?;
            let s = Schedule::new(bdd_order, elim_order)?;
            let r = run(&f, &s, Some(args.node_limit))?;
            max_size = max_size.max(r.max_intermediate_size);
            peak = peak.max(r.peak_allocated_nodes);
            if (r.decision == Decision::Sat) != expected || r.decision == Decision::Limit {
                failures.push(format!(
                    "instance {}: solver says {}, oracle says {}",
                    i,
                    r.decision,
                    if expected { "SAT" } else { "UNSAT" }
                ));
                decision = r.decision;
            }
        }
        rows.push(Row {
            n: i,
            decision,
            max_intermediate_size: max_size,
            peak_nodes: peak,
            wall_ms: start.elapsed().as_millis(),
            extra: None,
        });
    }
    Ok(())
}
