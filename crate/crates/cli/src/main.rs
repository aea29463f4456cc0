//! `pathcqa`: classify path queries and compute certain answers from the
//! command line.
//!
//! Every command prints `key=value` lines on stdout, except `datalog` and
//! `gen`, which print a program and a fact file. Exit codes: 0 for a true
//! answer or success, 1 for a false answer, 2 for usage, parse and
//! precondition errors, 3 when a repair or search cap is exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use pathcqa::genqueries::{classify_generalized, d_conditions, solve_generalized, GeneralizedPathQuery};
use pathcqa::oracle::certain_bruteforce;
use pathcqa::reductions::{reduce_mcvp, reduce_reachability, reduce_sat, Cnf, Digraph, MonotoneCircuit};
use pathcqa::solvers::{build_fo_rewriting, emit_datalog, solve, Method};
use pathcqa::{Error, Instance, Word};

#[derive(Parser)]
#[command(name = "pathcqa", version, about = "Consistent query answering for path queries under primary keys")]
struct Cli {
    /// Start of the fresh-name counter used by generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also print `time_ms=<elapsed milliseconds>`.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complexity tier of a query and the conditions behind it.
    Classify { query: String },
    /// Certain answer of a query on a fact file.
    Solve {
        query: String,
        db: PathBuf,
        #[arg(long, default_value = "auto")]
        method: Method,
        /// Bound on enumerated repairs or search nodes.
        #[arg(long, default_value_t = 1 << 20)]
        max_repairs: u64,
    },
    /// First-order rewriting of a query satisfying the prefix condition.
    Rewrite { query: String },
    /// Linear Datalog program for the NL procedure.
    Datalog { query: String },
    /// Instance generated from a source-problem input.
    Gen { kind: GenKind, input: PathBuf, query: String },
    /// Certain answer by repair enumeration.
    Oracle {
        query: String,
        db: PathBuf,
        #[arg(long, default_value_t = 1 << 20)]
        max_repairs: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Reachability in a DAG (`s=<v> t=<v>` header, one edge per line).
    Reach,
    /// CNF satisfiability (DIMACS).
    Sat,
    /// Monotone circuit value.
    Mcvp,
}

/// Text to print and the exit status.
struct Outcome {
    out: String,
    status: u8,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_db(path: &Path) -> anyhow::Result<Instance> {
    let text = read(path)?;
    Instance::parse(&text).map_err(|e| anyhow::Error::new(Error::from(e)).context(format!("in {}", path.display())))
}

fn parse_word(text: &str) -> anyhow::Result<Word> {
    Word::parse(text).map_err(|e| Error::from(e).into())
}

fn parse_query(text: &str) -> anyhow::Result<GeneralizedPathQuery> {
    GeneralizedPathQuery::parse(text).map_err(|e| Error::from(e).into())
}

fn facts_line(db: &Instance) -> String {
    db.facts().map(|f| f.to_string()).collect::<Vec<_>>().join(" ")
}

fn answer(out: String, yes: bool) -> Outcome {
    Outcome { out, status: if yes { 0 } else { 1 } }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let mut out = String::new();
    Ok(match &cli.command {
        Command::Classify { query } => {
            let q = parse_query(query)?;
            let c = classify_generalized(&q);
            writeln!(out, "query={q}")?;
            writeln!(out, "classification={}", c.tier)?;
            if q.has_constants() {
                let d = d_conditions(&q);
                writeln!(out, "d1={}\nd2={}\nd3={}", d.d1, d.d2, d.d3)?;
            } else {
                writeln!(out, "c1={}\nc2={}\nc3={}", c.c1, c.c2, c.c3)?;
            }
            Outcome { out, status: 0 }
        }
        Command::Solve { query, db, method, max_repairs } => {
            let q = parse_query(query)?;
            let db = read_db(db)?;
            if q.has_constants() {
                if !matches!(method, Method::Auto) {
                    return Err(Error::Precondition(format!(
                        "method {method} needs a query without constants; use auto"
                    ))
                    .into());
                }
                let yes = solve_generalized(&db, &q, *max_repairs)?;
                writeln!(out, "classification={}", classify_generalized(&q).tier)?;
                writeln!(out, "method=generalized")?;
                writeln!(out, "answer={yes}")?;
                return Ok(answer(out, yes));
            }
            let r = solve(&db, q.relations(), *method, *max_repairs)?;
            writeln!(out, "classification={}", r.classification.tier)?;
            writeln!(out, "method={}", r.method)?;
            writeln!(out, "answer={}", r.answer)?;
            if let Some(w) = &r.witness {
                writeln!(out, "witness={w}")?;
            }
            if let Some(cx) = &r.counterexample {
                writeln!(out, "counterexample={}", facts_line(cx))?;
            }
            if let Some(n) = &r.note {
                writeln!(out, "note={n}")?;
            }
            answer(out, r.answer)
        }
        Command::Rewrite { query } => {
            let q = parse_word(query)?;
            writeln!(out, "rewriting={}", build_fo_rewriting(&q)?)?;
            Outcome { out, status: 0 }
        }
        Command::Datalog { query } => Outcome { out: emit_datalog(&parse_word(query)?)?, status: 0 },
        Command::Gen { kind, input, query } => {
            let q = parse_word(query)?;
            let text = read(input)?;
            let db = match kind {
                GenKind::Reach => reduce_reachability(&Digraph::parse(&text).map_err(Error::from)?, &q, cli.seed)?,
                GenKind::Sat => reduce_sat(&Cnf::parse_dimacs(&text).map_err(Error::from)?, &q, cli.seed)?,
                GenKind::Mcvp => reduce_mcvp(&MonotoneCircuit::parse(&text).map_err(Error::from)?, &q, cli.seed)?,
            };
            Outcome { out: db.serialize(), status: 0 }
        }
        Command::Oracle { query, db, max_repairs } => {
            let q = parse_query(query)?;
            let db = read_db(db)?;
            let r = certain_bruteforce(&db, &q.to_bcq(), *max_repairs)?;
            writeln!(out, "method=bruteforce")?;
            writeln!(out, "answer={}", r.certain)?;
            writeln!(out, "repairs={}", db.repair_count())?;
            writeln!(out, "repairs_checked={}", r.repairs_checked)?;
            if let Some(cx) = &r.counterexample {
                writeln!(out, "counterexample={}", facts_line(cx))?;
            }
            answer(out, r.certain)
        }
    })
}

fn exit_status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::RepairCap { .. } | Error::SearchCap { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(o) => {
            print!("{}", o.out);
            if cli.timing {
                println!("time_ms={}", start.elapsed().as_millis());
            }
            ExitCode::from(o.status)
        }
        Err(e) => {
            // Parse errors repeat their source in their own message.
            let mut msgs: Vec<String> = Vec::new();
            for m in e.chain().map(|c| c.to_string()) {
                if !msgs.last().is_some_and(|prev| prev.ends_with(&m)) {
                    msgs.push(m);
                }
            }
            eprintln!("error: {}", msgs.join(": "));
            ExitCode::from(exit_status(&e))
        }
    }
}
