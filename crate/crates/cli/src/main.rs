use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cnfcompact::fuzz::{fuzz_reduce, FormulaShape};
use cnfcompact::mining::{parse_transactions, Vocabulary};
use cnfcompact::oracle::DEFAULT_VAR_LIMIT;
use cnfcompact::reduce::MapError;
use cnfcompact::{
    check_equisat, closed_itemsets, compact, maximal_itemsets, parse_dimacs, to_dimacs_string, CnfFormula, DimacsError,
    Literal, MinedItemset, Mode, OracleError, ReduceError, ReduceOptions, ReductionMap, TransactionDb,
};
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_ORACLE_LIMIT: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "cnfcompact",
    version,
    about = "Compact CNF formulas by substituting frequent literal sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rewrite a DIMACS formula into a smaller equi-satisfiable one.
    Reduce(ReduceArgs),
    /// Print closed (or maximal) frequent itemsets of a DIMACS or transaction file.
    Mine(MineArgs),
    /// Check a reduction with the built-in oracle, or fuzz the pipeline.
    Verify(VerifyArgs),
    /// Print size statistics of a DIMACS formula.
    Stats(StatsArgs),
}

#[derive(Args, Debug, Clone)]
struct ReduceFlags {
    #[arg(long, default_value = "general", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 2)]
    min_support: usize,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 2)]
    passes: usize,
    /// Split the clause list into this many independently reduced chunks.
    #[arg(long, default_value_t = 1)]
    parts: usize,
    /// Re-admit the disjoint remainder of sets pruned by an overlap.
    #[arg(long)]
    overlap_salvage: bool,
    /// Re-check maintained covers after every substitution.
    #[arg(long)]
    validate: bool,
}

impl ReduceFlags {
    fn options(&self) -> Result<ReduceOptions> {
        let options = ReduceOptions {
            min_support: self.min_support,
            min_size: self.min_size,
            passes: self.passes,
            overlap_salvage: self.overlap_salvage,
            validate_covers: self.validate,
        };
        options.validate()?;
        if self.parts == 0 {
            return Err(ReduceError::InvalidOptions("parts must be at least 1".into()).into());
        }
        Ok(options)
    }
}

#[derive(Args, Debug)]
struct ReduceArgs {
    input: PathBuf,
    #[command(flatten)]
    flags: ReduceFlags,
    /// Reduced DIMACS output (stdout if omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fresh-variable definitions as JSON.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Suppress the text statistics on stderr.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct MineArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    min_support: usize,
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    #[arg(long)]
    maximal: bool,
    /// Also print the transaction ids of each cover.
    #[arg(long)]
    covers: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Original DIMACS formula.
    #[arg(required_unless_present = "fuzz")]
    original: Option<PathBuf>,
    #[arg(long, required_unless_present = "fuzz")]
    reduced: Option<PathBuf>,
    #[arg(long, required_unless_present = "fuzz")]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_VAR_LIMIT)]
    var_limit: usize,
    /// Generate, reduce and verify this many random formulas instead.
    #[arg(long, conflicts_with_all = ["original", "reduced", "map"])]
    fuzz: Option<usize>,
    #[arg(long, default_value_t = 14)]
    max_vars: u32,
    #[arg(long, default_value_t = 60)]
    max_clauses: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    flags: ReduceFlags,
}

#[derive(Args, Debug)]
struct StatsArgs {
    input: PathBuf,
    #[arg(long)]
    json: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::Mine(args) => cmd_mine(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Stats(args) => cmd_stats(args),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<ReduceError>() {
            if matches!(e, ReduceError::InvalidOptions(_)) {
                return EXIT_USAGE;
            }
        }
        if let Some(OracleError::TooManyVariables { .. }) = cause.downcast_ref::<OracleError>() {
            return EXIT_ORACLE_LIMIT;
        }
        if cause.is::<OracleError>() {
            return EXIT_VERIFY;
        }
        if cause.is::<DimacsError>() || cause.is::<MapError>() || cause.is::<io::Error>() {
            return EXIT_INPUT;
        }
    }
    EXIT_INPUT
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("CNFCOMPACT_THREADS") else {
        return Ok(());
    };
    let threads: usize = match value.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(UsageError(format!("CNFCOMPACT_THREADS must be a positive integer, got `{value}`")).into()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn read_formula(path: &Path) -> Result<(CnfFormula, usize)> {
    let bytes = read_file(path)?;
    let f = parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok((f, bytes.len()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct StatsReport {
    schema: u32,
    mode: String,
    min_support: usize,
    min_size: usize,
    passes: usize,
    parts: usize,
    literals_before: usize,
    literals_after: usize,
    clauses_before: usize,
    clauses_after: usize,
    vars_before: u32,
    vars_after: u32,
    fresh_vars: usize,
    itemsets_applied: usize,
    duplicate_clauses_merged: usize,
    percent_literals_removed: f64,
    bytes_before: usize,
    bytes_after: usize,
}

fn cmd_reduce(args: ReduceArgs) -> Result<u8> {
    let options = args.flags.options()?;
    let (formula, bytes_before) = read_formula(&args.input)?;
    let start = Instant::now();
    let reduction = compact(&formula, args.flags.mode, args.flags.parts, &options)?;
    let elapsed = start.elapsed();

    let text = to_dimacs_string(&reduction.formula);
    match &args.output {
        Some(path) => write_file(path, text.as_bytes())?,
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .context("writing stdout")?,
    }
    if let Some(path) = &args.map {
        write_file(path, reduction.map.to_json().as_bytes())?;
    }

    let s = &reduction.stats;
    let report = StatsReport {
        schema: 1,
        mode: args.flags.mode.to_string(),
        min_support: options.min_support,
        min_size: options.min_size,
        passes: options.passes,
        parts: args.flags.parts,
        literals_before: s.literals_before,
        literals_after: s.literals_after,
        clauses_before: s.clauses_before,
        clauses_after: s.clauses_after,
        vars_before: s.vars_before,
        vars_after: s.vars_after,
        fresh_vars: reduction.map.len(),
        itemsets_applied: s.itemsets_applied,
        duplicate_clauses_merged: s.duplicate_clauses_merged,
        percent_literals_removed: s.percent_removed(),
        bytes_before,
        bytes_after: text.len(),
    };
    if let Some(path) = &args.stats {
        let mut json = serde_json::to_string_pretty(&report).context("serializing stats")?;
        json.push('\n');
        write_file(path, json.as_bytes())?;
    }
    if !args.quiet {
        eprintln!(
            "literals   {} -> {} ({:.2}% removed)",
            s.literals_before,
            s.literals_after,
            s.percent_removed()
        );
        eprintln!("clauses    {} -> {}", s.clauses_before, s.clauses_after);
        eprintln!(
            "variables  {} -> {} ({} fresh)",
            s.vars_before,
            s.vars_after,
            reduction.map.len()
        );
        eprintln!("bytes      {} -> {}", bytes_before, text.len());
        eprintln!("wall time  {:.3} s", elapsed.as_secs_f64());
    }
    Ok(0)
}

fn looks_like_dimacs(bytes: &[u8]) -> bool {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(str::trim)
        .any(|l| l.starts_with("p cnf") || l.starts_with("p  cnf"))
}

fn cmd_mine(args: MineArgs) -> Result<u8> {
    if args.min_support == 0 {
        return Err(UsageError("--min-support must be at least 1".into()).into());
    }
    let bytes = read_file(&args.input)?;
    let (db, vocab) = if looks_like_dimacs(&bytes) {
        let f = parse_dimacs(&bytes).with_context(|| format!("parsing {}", args.input.display()))?;
        let rows = f
            .clauses()
            .iter()
            .map(|c| c.literals().iter().map(|l| l.item()).collect::<Vec<_>>());
        (TransactionDb::from_rows(rows), None)
    } else {
        let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", args.input.display()))?;
        let (db, vocab) = parse_transactions(&text);
        (db, Some(vocab))
    };
    let sets = if args.maximal {
        maximal_itemsets(&db, args.min_support, args.min_size)
    } else {
        closed_itemsets(&db, args.min_support, args.min_size)
    };
    let mut out = io::stdout().lock();
    for set in &sets {
        writeln!(out, "{}", format_itemset(set, vocab.as_ref(), args.covers)).context("writing stdout")?;
    }
    Ok(0)
}

fn format_itemset(set: &MinedItemset, vocab: Option<&Vocabulary>, covers: bool) -> String {
    let items: Vec<String> = set
        .items
        .iter()
        .map(|&i| match vocab {
            Some(v) => v.name(i).to_string(),
            None => Literal::from_item(i).map_or_else(|| format!("?{i}"), |l| l.to_dimacs().to_string()),
        })
        .collect();
    let mut line = format!("{}\t{}", set.support, items.join(" "));
    if covers {
        let tids: Vec<String> = set.cover.iter().map(|t| t.to_string()).collect();
        line.push_str(&format!("\t[{}]", tids.join(" ")));
    }
    line
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    if let Some(count) = args.fuzz {
        return fuzz(&args, count);
    }
    let (original, _) = read_formula(args.original.as_deref().expect("required by clap"))?;
    let (reduced, _) = read_formula(args.reduced.as_deref().expect("required by clap"))?;
    let map_path = args.map.as_deref().expect("required by clap");
    let map_text =
        String::from_utf8(read_file(map_path)?).with_context(|| format!("{} is not UTF-8", map_path.display()))?;
    let map = ReductionMap::from_json(&map_text).with_context(|| format!("parsing {}", map_path.display()))?;

    let report = check_equisat(&original, &reduced, &map, args.var_limit)?;
    println!(
        "original {}, reduced {}",
        if report.original_sat { "SAT" } else { "UNSAT" },
        if report.reduced_sat { "SAT" } else { "UNSAT" }
    );
    if report.passed() {
        println!("ok: satisfiability, projection and extension checks passed");
        return Ok(0);
    }
    for v in &report.violations {
        println!("FAIL: {v}");
    }
    Ok(EXIT_VERIFY)
}

fn fuzz(args: &VerifyArgs, count: usize) -> Result<u8> {
    let options = args.flags.options()?;
    if args.max_vars < 3 || args.max_clauses == 0 {
        bail!(UsageError(
            "--max-vars must be at least 3 and --max-clauses at least 1".into()
        ));
    }
    let shape = FormulaShape {
        max_vars: args.max_vars,
        max_clauses: args.max_clauses,
        ..FormulaShape::default()
    };
    let cases = fuzz_reduce(
        args.seed,
        count,
        &shape,
        args.flags.mode,
        args.flags.parts,
        &options,
        args.var_limit,
    )?;
    let mut failed = 0;
    for case in &cases {
        if !case.report.passed() {
            failed += 1;
            println!("case {} failed:", case.index);
            for v in &case.report.violations {
                println!("  {v}");
            }
            print!("{}", to_dimacs_string(&case.original));
        }
    }
    let reduced = cases.iter().filter(|c| !c.reduction.map.is_empty()).count();
    println!("{}/{} pass ({} reduced)", cases.len() - failed, cases.len(), reduced);
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}

#[derive(Serialize)]
struct FormulaStats {
    variables: u32,
    occurring_variables: usize,
    clauses: usize,
    literals: usize,
    binary_clauses: usize,
    longest_clause: usize,
    bytes: usize,
}

fn cmd_stats(args: StatsArgs) -> Result<u8> {
    let (f, bytes) = read_formula(&args.input)?;
    let stats = FormulaStats {
        variables: f.num_vars(),
        occurring_variables: f.occurring_var_count(),
        clauses: f.num_clauses(),
        literals: f.literal_count(),
        binary_clauses: f.clauses().iter().filter(|c| c.len() == 2).count(),
        longest_clause: f.clauses().iter().map(|c| c.len()).max().unwrap_or(0),
        bytes,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&stats).context("serializing stats")?);
    } else {
        println!("variables       {}", stats.variables);
        println!("  occurring     {}", stats.occurring_variables);
        println!("clauses         {}", stats.clauses);
        println!("  binary        {}", stats.binary_clauses);
        println!("  longest       {}", stats.longest_clause);
        println!("literals        {}", stats.literals);
        println!("bytes           {}", stats.bytes);
    }
    Ok(0)
}
